//! Multi-channel time series, standardization, segmentation, labels and the
//! synthetic autoregressive data source.

pub mod io;
mod label;
mod segment;
mod series;
mod synth;

pub use label::{hamd_label, Class, SessionLabel, HAMD_THRESHOLD};
pub use segment::{segment_session, truncate_fixed, Segment, SegmentationConfig};
pub use series::{standardize_channels, standardize_rows, MultiChannelSeries};
pub use synth::{generate_var_series, make_labeled_dataset, LabeledSession, SessionCounts, SynthConfig};

pub(crate) use synth::mix_seed;
