use ndarray::{Array1, Array2, Zip};
use serde::{Deserialize, Serialize};

use super::model::{DenseLayer, Gradients, Mlp, Scalar};
use super::NnError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamConfig {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        AdamConfig { learning_rate, ..Self::default() }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { learning_rate: 5e-6, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// First and second moments per parameter plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<F> {
    pub config: AdamConfig,
    pub step: u64,
    first: [DenseLayer<F>; 3],
    second: [DenseLayer<F>; 3],
}

impl<F: Scalar> AdamState<F> {
    pub fn new(model: &Mlp<F>, config: AdamConfig) -> Self {
        let zeros = || {
            std::array::from_fn(|i| {
                let l = &model.layers()[i];
                DenseLayer { weights: Array2::zeros(l.weights.dim()), bias: Array1::zeros(l.bias.dim()) }
            })
        };
        AdamState { config, step: 0, first: zeros(), second: zeros() }
    }

    pub fn first_moments(&self) -> &[DenseLayer<F>; 3] {
        &self.first
    }

    pub fn second_moments(&self) -> &[DenseLayer<F>; 3] {
        &self.second
    }
}

#[derive(Clone, Copy)]
struct Coefficients<F> {
    lr: F,
    beta1: F,
    beta2: F,
    one_minus_beta1: F,
    one_minus_beta2: F,
    epsilon: F,
    correction1: F,
    correction2: F,
}

impl<F: Scalar> Coefficients<F> {
    fn new(step: u64, c: &AdamConfig) -> Self {
        let t = step as f64;
        Coefficients {
            lr: F::from_f64(c.learning_rate),
            beta1: F::from_f64(c.beta1),
            beta2: F::from_f64(c.beta2),
            one_minus_beta1: F::from_f64(1.0 - c.beta1),
            one_minus_beta2: F::from_f64(1.0 - c.beta2),
            epsilon: F::from_f64(c.epsilon),
            correction1: F::from_f64(1.0 - c.beta1.powf(t)),
            correction2: F::from_f64(1.0 - c.beta2.powf(t)),
        }
    }

    #[inline]
    fn apply(&self, p: &mut F, g: F, m: &mut F, v: &mut F) {
        *m = self.beta1 * *m + self.one_minus_beta1 * g;
        *v = self.beta2 * *v + self.one_minus_beta2 * g * g;
        let m_hat = *m / self.correction1;
        let v_hat = *v / self.correction2;
        *p = *p - self.lr * m_hat / (v_hat.sqrt() + self.epsilon);
    }
}

/// Bias-corrected Adam on flat slices for 1-based step number `step`.
pub fn adam_update<F: Scalar>(
    params: &mut [F],
    grads: &[F],
    first: &mut [F],
    second: &mut [F],
    step: u64,
    config: &AdamConfig,
) {
    let c = Coefficients::<F>::new(step, config);
    for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(first.iter_mut()).zip(second.iter_mut()) {
        c.apply(p, g, m, v);
    }
}

/// Applies one Adam step to every parameter and advances the step counter.
pub fn adam_step<F: Scalar>(
    model: &mut Mlp<F>,
    grads: &Gradients<F>,
    state: &mut AdamState<F>,
) -> Result<(), NnError> {
    for (g, l) in grads.layers.iter().zip(model.layers()) {
        if g.weights.dim() != l.weights.dim() || g.bias.dim() != l.bias.dim() {
            return Err(NnError::ShapeMismatch {
                expected: l.weights.shape().to_vec(),
                found: g.weights.shape().to_vec(),
            });
        }
    }
    for (m, l) in state.first.iter().zip(model.layers()) {
        if m.weights.dim() != l.weights.dim() {
            return Err(NnError::ShapeMismatch {
                expected: l.weights.shape().to_vec(),
                found: m.weights.shape().to_vec(),
            });
        }
    }
    state.step += 1;
    let c = Coefficients::<F>::new(state.step, &state.config);
    let params = model.layers_mut().iter_mut();
    let moments = state.first.iter_mut().zip(state.second.iter_mut());
    for ((layer, grad), (m, v)) in params.zip(&grads.layers).zip(moments) {
        Zip::from(&mut layer.weights)
            .and(&grad.weights)
            .and(&mut m.weights)
            .and(&mut v.weights)
            .for_each(|p, &g, m, v| c.apply(p, g, m, v));
        Zip::from(&mut layer.bias)
            .and(&grad.bias)
            .and(&mut m.bias)
            .and(&mut v.bias)
            .for_each(|p, &g, m, v| c.apply(p, g, m, v));
    }
    Ok(())
}
