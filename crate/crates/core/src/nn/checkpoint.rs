//! Binary model checkpoints.
//!
//! Little-endian layout:
//!
//! ```text
//! "MLPC" | u32 version | u32 layer count (3) | 4 x u32 layer widths
//! | u8 task | u32 epochs | u32 batch size | u64 seed | f64 learning rate
//! | u32 trace length | trace length x f64
//! | W1 b1 W2 b2 W3 b3 as f32, weights row-major (out x in)
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};

use super::model::{Architecture, DenseLayer, Mlp};
use super::train::TrainConfig;
use crate::Task;

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"MLPC";
pub const CHECKPOINT_VERSION: u32 = 1;
const LAYER_COUNT: u32 = 3;
const FIXED_LEN: usize = 4 + 4 + 4 + 16 + 1 + 4 + 4 + 8 + 8 + 4;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("not a checkpoint: bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported checkpoint version {0}")]
    VersionMismatch(u32),
    #[error("architecture mismatch: expected {expected:?}, found {found:?}")]
    ArchitectureMismatch { expected: [usize; 4], found: [usize; 4] },
    #[error("checkpoint truncated at byte {offset}: {needed} more bytes needed")]
    TruncatedFile { offset: usize, needed: usize },
    #[error("{0} trailing bytes after checkpoint")]
    TrailingBytes(usize),
    #[error("invalid field {field}: {reason}")]
    InvalidField { field: &'static str, reason: String },
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Mlp<f32>,
    pub config: TrainConfig,
    pub loss_trace: Vec<f64>,
}

impl Checkpoint {
    pub fn encode(&self) -> Vec<u8> {
        let arch = self.model.architecture();
        let params = arch.parameter_count();
        let mut out = Vec::with_capacity(FIXED_LEN + 8 * self.loss_trace.len() + 4 * params);
        out.extend_from_slice(&CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&LAYER_COUNT.to_le_bytes());
        for d in arch.dims() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        out.push(match self.config.task {
            Task::Rating => 0,
            Task::Disagreement => 1,
        });
        out.extend_from_slice(&(self.config.epochs as u32).to_le_bytes());
        out.extend_from_slice(&(self.config.batch_size as u32).to_le_bytes());
        out.extend_from_slice(&self.config.seed.to_le_bytes());
        out.extend_from_slice(&self.config.learning_rate.to_le_bytes());
        out.extend_from_slice(&(self.loss_trace.len() as u32).to_le_bytes());
        for v in &self.loss_trace {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for layer in self.model.layers() {
            for v in layer.weights.iter().chain(layer.bias.iter()) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    /// Decodes a checkpoint, optionally requiring a specific architecture.
    pub fn decode(bytes: &[u8], expected: Option<Architecture>) -> Result<Self, CheckpointError> {
        let mut r = Reader { bytes, pos: 0 };
        let magic: [u8; 4] = r.take(4)?.try_into().unwrap();
        if magic != CHECKPOINT_MAGIC {
            return Err(CheckpointError::BadMagic(magic));
        }
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(CheckpointError::VersionMismatch(version));
        }
        let layers = r.u32()?;
        if layers != LAYER_COUNT {
            return Err(invalid("layer count", format!("expected {LAYER_COUNT}, found {layers}")));
        }
        let mut dims = [0usize; 4];
        for d in &mut dims {
            *d = r.u32()? as usize;
            if *d == 0 {
                return Err(invalid("layer width", "zero".into()));
            }
        }
        if let Some(expected) = expected {
            if expected.dims() != dims {
                return Err(CheckpointError::ArchitectureMismatch { expected: expected.dims(), found: dims });
            }
        }
        let arch = Architecture::from_dims(dims);
        let task = match r.take(1)?[0] {
            0 => Task::Rating,
            1 => Task::Disagreement,
            other => return Err(invalid("task", format!("unknown code {other}"))),
        };
        let epochs = r.u32()? as usize;
        let batch_size = r.u32()? as usize;
        let seed = r.u64()?;
        let learning_rate = r.f64()?;
        let trace_len = r.u32()? as usize;
        r.ensure(trace_len.saturating_mul(8))?;
        let loss_trace = (0..trace_len).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;

        let param_bytes = (dims[0] as u128 * dims[1] as u128
            + dims[1] as u128
            + dims[1] as u128 * dims[2] as u128
            + dims[2] as u128
            + dims[2] as u128 * dims[3] as u128
            + dims[3] as u128)
            * 4;
        let param_bytes = usize::try_from(param_bytes).unwrap_or(usize::MAX);
        r.ensure(param_bytes)?;
        let mut read_layer = |input: usize, output: usize| -> Result<DenseLayer<f32>, CheckpointError> {
            let w = r.f32s(input * output)?;
            let b = r.f32s(output)?;
            Ok(DenseLayer {
                weights: Array2::from_shape_vec((output, input), w).expect("length checked"),
                bias: Array1::from_vec(b),
            })
        };
        let l1 = read_layer(arch.input, arch.hidden1)?;
        let l2 = read_layer(arch.hidden1, arch.hidden2)?;
        let l3 = read_layer(arch.hidden2, arch.output)?;
        if r.pos != bytes.len() {
            return Err(CheckpointError::TrailingBytes(bytes.len() - r.pos));
        }
        let model = Mlp::from_layers([l1, l2, l3]).map_err(|e| invalid("layers", e.to_string()))?;
        Ok(Checkpoint {
            model,
            config: TrainConfig { task, epochs, batch_size, seed, learning_rate },
            loss_trace,
        })
    }
}

fn invalid(field: &'static str, reason: String) -> CheckpointError {
    CheckpointError::InvalidField { field, reason }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn ensure(&self, n: usize) -> Result<(), CheckpointError> {
        let left = self.bytes.len() - self.pos;
        if n > left {
            return Err(CheckpointError::TruncatedFile { offset: self.pos, needed: n - left });
        }
        Ok(())
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        self.ensure(n)?;
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>, CheckpointError> {
        let raw = self.take(n * 4)?;
        Ok(raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: &Path) -> Result<(), CheckpointError> {
    fs::write(path, checkpoint.encode()).map_err(|source| CheckpointError::Io { path: path.into(), source })
}

/// Loads a checkpoint of the fixed 3072-1536-768-10 architecture.
pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    load_checkpoint_with(path, Some(Architecture::FULL))
}

pub fn load_checkpoint_with(
    path: &Path,
    expected: Option<Architecture>,
) -> Result<Checkpoint, CheckpointError> {
    let bytes = fs::read(path).map_err(|source| CheckpointError::Io { path: path.into(), source })?;
    Checkpoint::decode(&bytes, expected)
}

/// `epoch,mean_loss` CSV with 1-based epochs.
pub fn loss_trace_csv(trace: &[f64]) -> String {
    let mut out = String::from("epoch,mean_loss\n");
    for (i, v) in trace.iter().enumerate() {
        out.push_str(&format!("{},{v:.8}\n", i + 1));
    }
    out
}
