use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::model::{bce_loss, one_hot, Architecture, Mlp, Scalar};
use super::NnError;
use crate::fusion::FeatureMatrix;
use crate::Task;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub task: Task,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub learning_rate: f64,
}

impl TrainConfig {
    pub const DEFAULT_BATCH_SIZE: usize = 32;
    pub const DEFAULT_LEARNING_RATE: f64 = 5e-6;

    /// 3 epochs for rating, 10 for disagreement, batch 32, lr 5e-6, seed 0.
    pub fn for_task(task: Task) -> Self {
        TrainConfig {
            task,
            epochs: task.default_epochs(),
            batch_size: Self::DEFAULT_BATCH_SIZE,
            seed: 0,
            learning_rate: Self::DEFAULT_LEARNING_RATE,
        }
    }

    fn validate(&self) -> Result<(), TrainError> {
        if self.batch_size == 0 {
            return Err(TrainError::InvalidConfig("batch_size must be at least 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(TrainError::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("training set is empty")]
    EmptyDataset,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("feature matrix is for the {found} task, not {expected}")]
    TaskMismatch { expected: Task, found: Task },
    #[error("class index {class} at row {row} is out of range")]
    InvalidLabel { row: usize, class: usize },
    #[error("loss became {loss} at epoch {epoch}, batch {batch} (learning rate {learning_rate})")]
    NonFiniteLoss { epoch: usize, batch: usize, loss: f64, learning_rate: f64 },
    #[error(transparent)]
    Nn(#[from] NnError),
}

/// Mini-batch training from a freshly initialised model.
///
/// Rows are reshuffled every epoch from a generator seeded with
/// `config.seed`; initialisation uses an independent stream of the same
/// seed. Returns the model and one mean loss per epoch.
pub fn train<F: Scalar>(
    config: &TrainConfig,
    arch: Architecture,
    features: ArrayView2<'_, F>,
    classes: &[usize],
) -> Result<(Mlp<F>, Vec<f64>), TrainError> {
    config.validate()?;
    let n = features.nrows();
    if n == 0 {
        return Err(TrainError::EmptyDataset);
    }
    if classes.len() != n {
        return Err(NnError::DimMismatch { expected: n, found: classes.len() }.into());
    }
    if features.ncols() != arch.input {
        return Err(NnError::DimMismatch { expected: arch.input, found: features.ncols() }.into());
    }
    if let Some((row, &class)) = classes.iter().enumerate().find(|(_, &c)| c >= arch.output) {
        return Err(TrainError::InvalidLabel { row, class });
    }

    let mut model = Mlp::<F>::init(arch, config.seed);
    let mut state = AdamState::new(&model, AdamConfig::with_learning_rate(config.learning_rate));
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    shuffle_rng.set_stream(1);
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut weighted_loss = 0f64;
        for (batch, idx) in order.chunks(config.batch_size).enumerate() {
            let x = features.select(Axis(0), idx);
            let batch_classes: Vec<usize> = idx.iter().map(|&i| classes[i]).collect();
            let y: Array2<F> = one_hot(&batch_classes, arch.output);
            let cache = model.forward(x.view())?;
            let loss = bce_loss(cache.probs().view(), y.view())?;
            if !loss.is_finite() {
                return Err(TrainError::NonFiniteLoss {
                    epoch: epoch + 1,
                    batch: batch + 1,
                    loss,
                    learning_rate: config.learning_rate,
                });
            }
            weighted_loss += loss * idx.len() as f64;
            let grads = model.backward(&cache, y.view())?;
            adam_step(&mut model, &grads, &mut state)?;
        }
        let mean = weighted_loss / n as f64;
        log::debug!("epoch {}/{}: mean loss {mean:.6}", epoch + 1, config.epochs);
        trace.push(mean);
    }
    Ok((model, trace))
}

/// Trains the fixed architecture on a fused feature matrix.
pub fn train_matrix(
    config: &TrainConfig,
    matrix: &FeatureMatrix,
) -> Result<(Mlp<f32>, Vec<f64>), TrainError> {
    if matrix.task != config.task {
        return Err(TrainError::TaskMismatch { expected: config.task, found: matrix.task });
    }
    if matrix.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let x = matrix.to_array();
    train(config, Architecture::FULL, x.view(), &matrix.class_indices())
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax<F: Scalar>(row: impl IntoIterator<Item = F>) -> usize {
    let mut best = 0;
    let mut best_value = None;
    for (i, v) in row.into_iter().enumerate() {
        if best_value.is_none_or(|b| v > b) {
            best = i;
            best_value = Some(v);
        }
    }
    best
}

const PREDICT_CHUNK: usize = 256;

/// Predicted 0-based class per row.
pub fn predict<F: Scalar>(model: &Mlp<F>, features: ArrayView2<'_, F>) -> Result<Vec<usize>, NnError> {
    let mut out = Vec::with_capacity(features.nrows());
    for chunk in features.axis_chunks_iter(Axis(0), PREDICT_CHUNK) {
        let cache = model.forward(chunk)?;
        out.extend(cache.probs().rows().into_iter().map(|r| argmax(r.iter().copied())));
    }
    Ok(out)
}

/// Predicted natural-scale labels for every row of `matrix`.
pub fn predict_labels(model: &Mlp<f32>, matrix: &FeatureMatrix) -> Result<Vec<u8>, NnError> {
    let classes = predict(model, matrix.to_array().view())?;
    Ok(classes.into_iter().map(|c| matrix.task.label_of_class(c)).collect())
}
