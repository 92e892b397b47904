use nalgebra::DMatrix;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{hamd_label, Class, MultiChannelSeries, SessionLabel};
use crate::Scalar;

/// Parameters of a single-lag vector autoregression
/// `x[t] = A·x[t − delay] + ε[t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub channels: usize,
    pub frames: usize,
    /// Row-major M×M coupling matrix; `coupling[i][j]` drives channel i from channel j.
    pub coupling: Vec<Vec<f64>>,
    pub coupling_delay: usize,
    pub noise_std: f64,
    #[serde(default = "default_frame_rate")]
    pub frame_rate_hz: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_frame_rate() -> f64 {
    100.0
}

impl SynthConfig {
    pub fn coupling_matrix(&self) -> Result<DMatrix<f64>> {
        let m = self.channels;
        if m == 0 {
            return Err(Error::Config("synth: channels must be >= 1".into()));
        }
        if self.coupling.len() != m || self.coupling.iter().any(|r| r.len() != m) {
            return Err(Error::Config(format!("synth: coupling must be {m}x{m}")));
        }
        Ok(DMatrix::from_fn(m, m, |i, j| self.coupling[i][j]))
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        let a = self.coupling_matrix()?;
        Ok(a.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.coupling_matrix()?;
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("synth: coupling has non-finite entries".into()));
        }
        if self.coupling_delay == 0 {
            return Err(Error::Config("synth: coupling_delay must be >= 1".into()));
        }
        if self.frames <= self.coupling_delay {
            return Err(Error::Config("synth: frames must exceed coupling_delay".into()));
        }
        if !(self.noise_std > 0.0 && self.noise_std.is_finite()) {
            return Err(Error::Config("synth: noise_std must be > 0".into()));
        }
        if !(self.frame_rate_hz > 0.0 && self.frame_rate_hz.is_finite()) {
            return Err(Error::Config("synth: frame_rate_hz must be > 0".into()));
        }
        let rho = self.spectral_radius()?;
        if rho >= 1.0 {
            return Err(Error::UnstableCoupling(rho));
        }
        Ok(())
    }
}

/// Draws one realisation of the autoregression. Bit-reproducible for a given config.
pub fn generate_var_series<T: Scalar>(cfg: &SynthConfig) -> Result<MultiChannelSeries<T>> {
    cfg.validate()?;
    let (m, n, lag) = (cfg.channels, cfg.frames, cfg.coupling_delay);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise_std).map_err(|e| Error::Config(e.to_string()))?;

    // Generate in f64 so f32 and f64 outputs come from the same draw.
    let mut x = vec![0.0f64; m * n];
    for t in 0..n {
        for i in 0..m {
            let mut v = noise.sample(&mut rng);
            if t >= lag {
                for (j, a) in cfg.coupling[i].iter().enumerate() {
                    v += a * x[j * n + t - lag];
                }
            }
            x[i * n + t] = v;
        }
    }
    let values = Array2::from_shape_fn((m, n), |(i, t)| T::of(x[i * n + t]));
    MultiChannelSeries::from_values(cfg.frame_rate_hz, values)
}

/// Session counts per class for [`make_labeled_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionCounts {
    pub depressed: usize,
    pub not_depressed: usize,
}

impl SessionCounts {
    pub fn balanced(per_class: usize) -> Self {
        Self { depressed: per_class, not_depressed: per_class }
    }
}

#[derive(Debug, Clone)]
pub struct LabeledSession<T> {
    pub series: MultiChannelSeries<T>,
    pub label: SessionLabel,
}

// splitmix64 finaliser; decorrelates per-session seeds derived from one master seed.
pub(crate) fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Builds a labelled synthetic corpus: `counts.depressed` sessions drawn from
/// `depressed`, then `counts.not_depressed` from `not_depressed`.
///
/// Each session gets a duration uniform in `duration_range_s`, a HAMD score
/// consistent with its class, and its own seed derived from `seed`. The
/// `frames` and `seed` fields of the class configs are ignored.
pub fn make_labeled_dataset<T: Scalar>(
    depressed: &SynthConfig,
    not_depressed: &SynthConfig,
    counts: SessionCounts,
    duration_range_s: (f64, f64),
    seed: u64,
) -> Result<Vec<LabeledSession<T>>> {
    if depressed.channels != not_depressed.channels {
        return Err(Error::MismatchedChannels(format!(
            "channel count ({} vs {})",
            depressed.channels, not_depressed.channels
        )));
    }
    if depressed.frame_rate_hz != not_depressed.frame_rate_hz {
        return Err(Error::MismatchedChannels(format!(
            "frame rate ({} vs {})",
            depressed.frame_rate_hz, not_depressed.frame_rate_hz
        )));
    }
    let (lo, hi) = duration_range_s;
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::Config(format!("duration range [{lo}, {hi}] is invalid")));
    }
    let rate = depressed.frame_rate_hz;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = std::iter::repeat_n((Class::Depressed, depressed), counts.depressed)
        .chain(std::iter::repeat_n((Class::NotDepressed, not_depressed), counts.not_depressed));

    let mut out = Vec::with_capacity(counts.depressed + counts.not_depressed);
    for (idx, (class, base)) in plan.enumerate() {
        let duration = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let hamd: i64 = match class {
            Class::Depressed => rng.random_range(8..=30),
            Class::NotDepressed => rng.random_range(0..=7),
        };
        debug_assert_eq!(hamd_label(hamd)?, class);
        let frames = ((duration * rate).floor() as usize).min((hi * rate).floor() as usize);
        let cfg = SynthConfig { frames, seed: mix_seed(seed, idx as u64), ..base.clone() };
        let series = generate_var_series(&cfg)?;
        let label = SessionLabel::new(format!("S{idx:03}"), hamd)?;
        out.push(LabeledSession { series, label });
    }
    Ok(out)
}
