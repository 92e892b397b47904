use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acf::{AcfConfig, AcfMethod};
use crate::error::{Error, Result};
use crate::net::{ModelConfig, TrainConfig};
use crate::signal::{SegmentationConfig, SessionCounts, SynthConfig};
use crate::vote::AggregationPolicy;

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 1729;

/// Whether channels are standardized over each segment or over the whole recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardizeScope {
    #[default]
    Segment,
    Recording,
}

/// Vector-autoregression parameters for one class. Channel count comes from
/// the size of `coupling`; frame rate and seed come from the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassProcess {
    pub coupling: Vec<Vec<f64>>,
    pub coupling_delay: usize,
    pub noise_std: f64,
}

impl ClassProcess {
    pub fn to_synth(&self, frame_rate_hz: f64) -> SynthConfig {
        SynthConfig {
            channels: self.coupling.len(),
            frames: self.coupling_delay + 1,
            coupling: self.coupling.clone(),
            coupling_delay: self.coupling_delay,
            noise_std: self.noise_std,
            frame_rate_hz,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    pub depressed: ClassProcess,
    pub not_depressed: ClassProcess,
    pub sessions: SessionCounts,
    pub duration_range_s: (f64, f64),
}

// Four channels in a ring with no self-coupling. The not-depressed process
// drives each channel from its neighbour a little more strongly and sooner
// than the depressed one.
fn ring(strength: f64) -> Vec<Vec<f64>> {
    let m = 4;
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    if j == (i + m - 1) % m {
                        strength
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            depressed: ClassProcess { coupling: ring(0.045), coupling_delay: 10, noise_std: 1.0 },
            not_depressed: ClassProcess { coupling: ring(0.065), coupling_delay: 8, noise_std: 1.0 },
            sessions: SessionCounts::balanced(10),
            duration_range_s: (60.0, 120.0),
        }
    }
}

/// Session-level train/validation/test proportions. They are normalised, so
/// `[60, 20, 20]` and `[0.6, 0.2, 0.2]` mean the same.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self { train: 60.0, validation: 20.0, test: 20.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    /// Root of every stage's output; the CLI's `--out` overrides it.
    pub out_dir: Option<PathBuf>,
    /// Manifest to extract from instead of the one `synth` writes.
    pub manifest: Option<PathBuf>,
}

/// Everything a reproducible run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub version: u32,
    /// Master seed; every stochastic component derives its seed from it.
    pub seed: u64,
    pub frame_rate_hz: f64,
    pub synth: SynthSection,
    pub segmentation: SegmentationConfig,
    pub standardize: StandardizeScope,
    pub acf: AcfConfig,
    pub acf_method: AcfMethod,
    /// Also write one CSV per segment next to the binary ACF files.
    pub write_acf_csv: bool,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub split: SplitConfig,
    pub aggregation: AggregationPolicy,
    /// Replicates behind the Monte-Carlo interval of the session-level check.
    pub lift_replicates: u64,
    pub paths: PathsConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            seed: DEFAULT_SEED,
            frame_rate_hz: 100.0,
            synth: SynthSection::default(),
            segmentation: SegmentationConfig::default(),
            standardize: StandardizeScope::default(),
            acf: AcfConfig::default(),
            acf_method: AcfMethod::default(),
            write_acf_csv: false,
            model: ModelConfig::default(),
            train: TrainConfig {
                learning_rate: 1e-3,
                batch_size: 16,
                max_epochs: 60,
                patience_epochs: 10,
                ..TrainConfig::default()
            },
            split: SplitConfig::default(),
            aggregation: AggregationPolicy::default(),
            lift_replicates: 20_000,
            paths: PathsConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let cfg: PipelineConfig = serde_json::from_str(text).map_err(|e| Error::json(path, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if !(self.frame_rate_hz > 0.0 && self.frame_rate_hz.is_finite()) {
            return Err(Error::Config("frame_rate_hz must be > 0".into()));
        }
        self.segmentation.validate()?;
        self.model.validate()?;
        self.train.validate()?;
        let s = &self.split;
        if [s.train, s.validation, s.test].iter().any(|v| !(*v >= 0.0 && v.is_finite())) || s.train <= 0.0 {
            return Err(Error::Config("split fractions must be >= 0 with a positive train share".into()));
        }
        let (lo, hi) = self.synth.duration_range_s;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::Config(format!("synth.duration_range_s [{lo}, {hi}] is invalid")));
        }
        if self.lift_replicates == 0 {
            return Err(Error::Config("lift_replicates must be >= 1".into()));
        }
        for p in [&self.synth.depressed, &self.synth.not_depressed] {
            p.to_synth(self.frame_rate_hz).validate()?;
        }
        Ok(())
    }

    /// The training configuration with its seed tied to the master seed.
    pub fn effective_train(&self) -> TrainConfig {
        TrainConfig { seed: self.seed, ..self.train.clone() }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.paths.out_dir.clone().unwrap_or_else(|| PathBuf::from("acfkit-out"))
    }
}
