//! Channel-delay correlation features, a dilated-convolution segment
//! classifier and plurality-vote session aggregation for segment-to-session
//! classification of multi-channel time series.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the pipeline and CLI use.

pub mod acf;
mod error;
mod scalar;
pub mod metrics;
pub mod net;
pub mod pipeline;
pub mod signal;
pub mod vote;

pub use error::{Error, ErrorKind, Result};
pub use scalar::Scalar;

pub type Series = signal::MultiChannelSeries<f64>;
pub type Segment = signal::Segment<f64>;
pub type AcfMatrix = acf::AcfMatrix<f64>;
pub type SeriesF32 = signal::MultiChannelSeries<f32>;
pub type AcfMatrixF32 = acf::AcfMatrix<f32>;
