//! Reproducible end-to-end runs: synthetic data, feature extraction,
//! training and session-level evaluation, each reading and writing files
//! under one output directory (see [`Layout`]).

mod config;
mod eval;
mod extract;
mod plot;
mod store;
mod synth;
mod train;

pub use config::{
    ClassProcess, PathsConfig, PipelineConfig, SplitConfig, StandardizeScope, SynthSection, CONFIG_VERSION,
    DEFAULT_SEED,
};
pub use eval::{lift_check, run_eval, ClassLift, EvalReport, LiftCheck, SessionResult};
pub use extract::run_extract;
pub use plot::{measured_recall_chart, roc_chart, run_plot, theorem_chart, Chart, Line};
pub use store::{
    FeatureIndex, Layout, SegmentEntry, SessionFeatures, SessionStatus, Splits, CHECKPOINT, FEATURE_INDEX,
    METRICS_JSON, METRICS_TXT, SPLITS, TRAIN_LOG, TRAIN_SUMMARY,
};
pub use synth::run_synth;
pub use train::{load_samples, run_train, split_sessions, TrainSummary};

use crate::error::Result;
use crate::signal::mix_seed;

pub(crate) const STREAM_SYNTH: u64 = 1;
pub(crate) const STREAM_SPLIT: u64 = 2;
pub(crate) const STREAM_LIFT: u64 = 3;
pub(crate) const STREAM_TIE: u64 = 1 << 32;

/// Seed of one stochastic component, derived from the master seed.
pub(crate) fn stream_seed(seed: u64, stream: u64) -> u64 {
    mix_seed(seed, stream)
}

/// Runs synth, extract, train and eval into `cfg.out_dir()`, or into the
/// manifest named in `cfg.paths.manifest` when one is given instead of synth.
pub fn run_all(cfg: &PipelineConfig) -> Result<EvalReport> {
    let layout = Layout::new(cfg.out_dir());
    let manifest = match &cfg.paths.manifest {
        Some(m) => m.clone(),
        None => run_synth(cfg, &layout.data_dir())?,
    };
    run_extract(cfg, &manifest, &layout.features_dir())?;
    run_train(cfg, &layout.features_dir(), &layout.model_dir())?;
    run_eval(cfg, &layout.features_dir(), &layout.model_dir(), &layout.eval_dir())
}
