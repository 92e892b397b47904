//! Dilated-convolution segment classifier.
//!
//! Architecture, for an input of C = M² channels by L = D + 1 delays:
//!
//! ```text
//! input ─┬─ conv(k=15, dilation 1)  ─┐
//!        ├─ conv(k=15, dilation 3)  ─┤
//!        ├─ conv(k=15, dilation 7)  ─┼─ concat ─ conv(k=3) ─ conv(k=3) ─ flatten
//!        └─ conv(k=15, dilation 15) ─┘                                     │
//!                         softmax ─ dense ─ dense(ReLU) ─ dense(ReLU) ─────┘
//! ```
//!
//! Every convolution is followed by a leaky ReLU and preserves length, so the
//! parallel branches concatenate on the channel axis.

mod checkpoint;
mod conv;
mod loss;
mod model;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use checkpoint::{decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use conv::{dilated_conv1d, ConvLayer};
pub use loss::{weighted_cross_entropy, LossValue, PROB_FLOOR};
pub use model::{embed_segment, model_backward, model_forward, DenseLayer, ModelParams};
pub use train::{
    auto_class_weights, train, Adam, ClassWeights, EpochLog, Sample, TrainConfig, TrainOutcome, Validation,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub dilations: Vec<usize>,
    pub parallel_kernel: usize,
    pub parallel_filters: usize,
    pub seq_kernels: Vec<usize>,
    pub seq_filters: Vec<usize>,
    pub dense_units: Vec<usize>,
    pub leaky_slope: f64,
    /// L2 penalty on the hidden dense-layer weights.
    pub l2_lambda: f64,
    /// Inverted dropout after each hidden dense layer, training only.
    pub dropout: f64,
    pub classes: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            dilations: vec![1, 3, 7, 15],
            parallel_kernel: 15,
            parallel_filters: 8,
            seq_kernels: vec![3, 3],
            seq_filters: vec![8, 8],
            dense_units: vec![16, 8],
            leaky_slope: 0.01,
            l2_lambda: 0.01,
            dropout: 0.0,
            classes: 2,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("model: {m}")));
        if self.dilations.is_empty() || self.dilations.contains(&0) {
            return bad("dilations must be non-empty and strictly positive");
        }
        if self.parallel_kernel == 0 || self.seq_kernels.contains(&0) {
            return bad("kernel sizes must be >= 1");
        }
        if self.seq_kernels.len() != self.seq_filters.len() {
            return bad("seq_kernels and seq_filters differ in length");
        }
        if self.parallel_filters == 0 || self.seq_filters.contains(&0) || self.dense_units.contains(&0) {
            return bad("layer widths must be >= 1");
        }
        if !(self.l2_lambda >= 0.0) || !(0.0..1.0).contains(&self.dropout) || !self.leaky_slope.is_finite() {
            return bad("need l2_lambda >= 0, 0 <= dropout < 1, finite leaky_slope");
        }
        if self.classes < 2 {
            return bad("need at least two classes");
        }
        Ok(())
    }

    /// Channels entering the flatten layer.
    pub fn embedding_channels(&self) -> usize {
        self.seq_filters.last().copied().unwrap_or(self.parallel_filters * self.dilations.len())
    }
}
