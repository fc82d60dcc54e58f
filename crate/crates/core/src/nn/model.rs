use std::fmt::Debug;
use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use num_traits::Float;
use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::NnError;

/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` inside the loss.
pub const PROB_CLAMP: f64 = 1e-7;

pub trait Scalar: ndarray::LinalgScalar + Float + Debug + Send + Sync {
    fn from_f64(v: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Scalar for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn as_f64(self) -> f64 {
        f64::from(self)
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn as_f64(self) -> f64 {
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Architecture {
    pub input: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub output: usize,
}

impl Architecture {
    /// 3072 -> 1536 -> 768 -> 10.
    pub const FULL: Architecture = Architecture { input: 3072, hidden1: 1536, hidden2: 768, output: 10 };

    pub fn dims(&self) -> [usize; 4] {
        [self.input, self.hidden1, self.hidden2, self.output]
    }

    pub fn from_dims(dims: [usize; 4]) -> Self {
        Architecture { input: dims[0], hidden1: dims[1], hidden2: dims[2], output: dims[3] }
    }

    pub fn parameter_count(&self) -> usize {
        let d = self.dims();
        (0..3).map(|i| d[i + 1] * d[i] + d[i + 1]).sum()
    }
}

impl Default for Architecture {
    fn default() -> Self {
        Self::FULL
    }
}

/// `weights` is `out x in`; the layer computes `x W^T + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<F> {
    pub weights: Array2<F>,
    pub bias: Array1<F>,
}

impl<F: Scalar> DenseLayer<F> {
    pub fn zeros(input: usize, output: usize) -> Self {
        DenseLayer { weights: Array2::zeros((output, input)), bias: Array1::zeros(output) }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn cast<G: Scalar>(&self) -> DenseLayer<G> {
        DenseLayer {
            weights: self.weights.mapv(|w| G::from_f64(w.as_f64())),
            bias: self.bias.mapv(|b| G::from_f64(b.as_f64())),
        }
    }

    fn bitwise_eq(&self, other: &Self) -> bool {
        self.weights.dim() == other.weights.dim()
            && self.bias.dim() == other.bias.dim()
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| a.as_f64().to_bits() == b.as_f64().to_bits())
            && self.bias.iter().zip(&other.bias).all(|(a, b)| a.as_f64().to_bits() == b.as_f64().to_bits())
    }
}

/// Gradients of the loss, shaped like the model's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<F> {
    pub layers: [DenseLayer<F>; 3],
}

impl<F: Scalar> Gradients<F> {
    pub fn l2_norm(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()))
            .map(|g| g.as_f64().powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

static NEXT_MODEL_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_MODEL_ID.fetch_add(1, Ordering::Relaxed)
}

/// Three dense layers. Equality compares parameters only.
#[derive(Debug, Clone)]
pub struct Mlp<F = f32> {
    layers: [DenseLayer<F>; 3],
    /// Identifies the current parameter values; any mutation assigns a new id.
    id: u64,
}

impl<F: Scalar> PartialEq for Mlp<F> {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers
    }
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache<F> {
    model_id: u64,
    input: Array2<F>,
    pre: [Array2<F>; 3],
    hidden: [Array2<F>; 2],
    probs: Array2<F>,
}

impl<F: Scalar> ForwardCache<F> {
    /// Sigmoid outputs, one row per input row.
    pub fn probs(&self) -> &Array2<F> {
        &self.probs
    }

    /// Pre-sigmoid scores of the output layer.
    pub fn logits(&self) -> &Array2<F> {
        &self.pre[2]
    }
}

fn relu<F: Scalar>(z: &Array2<F>) -> Array2<F> {
    z.mapv(|v| if v > F::zero() { v } else { F::zero() })
}

fn sigmoid<F: Scalar>(z: F) -> F {
    // Split by sign so exp never overflows.
    if z >= F::zero() {
        F::one() / (F::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}

impl<F: Scalar> Mlp<F> {
    /// Weights uniform in `±sqrt(6 / fan_in)`, biases zero. Same seed, same model.
    pub fn init(arch: Architecture, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = arch.dims();
        let layers = std::array::from_fn(|i| {
            let (fan_in, fan_out) = (dims[i], dims[i + 1]);
            let bound = (6.0 / fan_in as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
            let weights =
                Array2::from_shape_simple_fn((fan_out, fan_in), || F::from_f64(dist.sample(&mut rng)));
            DenseLayer { weights, bias: Array1::zeros(fan_out) }
        });
        Mlp { layers, id: fresh_id() }
    }

    /// Builds a model from explicit layers, checking that they chain.
    pub fn from_layers(layers: [DenseLayer<F>; 3]) -> Result<Self, NnError> {
        for l in &layers {
            if l.bias.len() != l.out_dim() {
                return Err(NnError::DimMismatch { expected: l.out_dim(), found: l.bias.len() });
            }
        }
        for w in layers.windows(2) {
            if w[1].in_dim() != w[0].out_dim() {
                return Err(NnError::DimMismatch { expected: w[0].out_dim(), found: w[1].in_dim() });
            }
        }
        Ok(Mlp { layers, id: fresh_id() })
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            input: self.layers[0].in_dim(),
            hidden1: self.layers[0].out_dim(),
            hidden2: self.layers[1].out_dim(),
            output: self.layers[2].out_dim(),
        }
    }

    pub fn layers(&self) -> &[DenseLayer<F>; 3] {
        &self.layers
    }

    /// Mutable access; invalidates outstanding forward caches.
    pub fn layers_mut(&mut self) -> &mut [DenseLayer<F>; 3] {
        self.id = fresh_id();
        &mut self.layers
    }

    pub fn cast<G: Scalar>(&self) -> Mlp<G> {
        Mlp { layers: std::array::from_fn(|i| self.layers[i].cast()), id: fresh_id() }
    }

    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.layers.iter().zip(&other.layers).all(|(a, b)| a.bitwise_eq(b))
    }

    /// Forward pass over a batch (one row per sample).
    pub fn forward(&self, x: ArrayView2<'_, F>) -> Result<ForwardCache<F>, NnError> {
        let expected = self.layers[0].in_dim();
        if x.ncols() != expected {
            return Err(NnError::DimMismatch { expected, found: x.ncols() });
        }
        if let Some(((row, col), _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(NnError::NonFiniteInput { row, col });
        }
        let affine = |input: &ArrayView2<'_, F>, layer: &DenseLayer<F>| {
            let mut z = input.dot(&layer.weights.t());
            z.zip_mut_with(&layer.bias, |a, &b| *a = *a + b);
            z
        };
        let z1 = affine(&x, &self.layers[0]);
        let h1 = relu(&z1);
        let z2 = affine(&h1.view(), &self.layers[1]);
        let h2 = relu(&z2);
        let z3 = affine(&h2.view(), &self.layers[2]);
        let probs = z3.mapv(sigmoid);
        Ok(ForwardCache {
            model_id: self.id,
            input: x.to_owned(),
            pre: [z1, z2, z3],
            hidden: [h1, h2],
            probs,
        })
    }

    /// Exact gradients of [`bce_loss`] for the batch in `cache`.
    ///
    /// Uses the fused sigmoid + cross-entropy derivative `(p - y) / (N K)`,
    /// which is the gradient wherever the probability clamp is inactive.
    pub fn backward(
        &self,
        cache: &ForwardCache<F>,
        targets: ArrayView2<'_, F>,
    ) -> Result<Gradients<F>, NnError> {
        if cache.model_id != self.id {
            return Err(NnError::StaleCache);
        }
        if targets.dim() != cache.probs.dim() {
            return Err(NnError::ShapeMismatch {
                expected: cache.probs.shape().to_vec(),
                found: targets.shape().to_vec(),
            });
        }
        let scale = F::from_f64(1.0 / (cache.probs.len().max(1)) as f64);
        let mut delta = (&cache.probs - &targets).mapv(|d| d * scale);

        let inputs = [cache.input.view(), cache.hidden[0].view(), cache.hidden[1].view()];
        let mut grads: [Option<DenseLayer<F>>; 3] = [None, None, None];
        for layer in (0..3).rev() {
            let weights = delta.t().dot(&inputs[layer]);
            let bias = delta.sum_axis(Axis(0));
            if layer > 0 {
                let mut upstream = delta.dot(&self.layers[layer].weights);
                Zip::from(&mut upstream).and(&cache.pre[layer - 1]).for_each(|d, &z| {
                    if z <= F::zero() {
                        *d = F::zero();
                    }
                });
                delta = upstream;
            }
            grads[layer] = Some(DenseLayer { weights, bias });
        }
        Ok(Gradients { layers: grads.map(|g| g.expect("every layer visited")) })
    }
}

/// Mean binary cross-entropy over all entries, with clamped probabilities.
pub fn bce_loss<F: Scalar>(probs: ArrayView2<'_, F>, targets: ArrayView2<'_, F>) -> Result<f64, NnError> {
    if probs.dim() != targets.dim() {
        return Err(NnError::ShapeMismatch {
            expected: probs.shape().to_vec(),
            found: targets.shape().to_vec(),
        });
    }
    if probs.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = probs
        .iter()
        .zip(targets.iter())
        .map(|(&p, &y)| {
            let p = p.as_f64().clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            let y = y.as_f64();
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        })
        .sum();
    Ok(total / probs.len() as f64)
}

/// One-hot rows for 0-based class indices.
pub fn one_hot<F: Scalar>(classes: &[usize], num_classes: usize) -> Array2<F> {
    let mut out = Array2::zeros((classes.len(), num_classes));
    for (row, &c) in classes.iter().enumerate() {
        out[[row, c]] = F::one();
    }
    out
}
