use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::signal::Class;
use crate::vote::{pv_decide, ProbabilityField, SessionVote, VoteParams};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub trials: u64,
    pub successes: u64,
    pub recall: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Wilson score 95% interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Simulates sessions of N independent segment decisions (correct with
/// probability p0) and reports how often the plurality vote recovers the
/// true class.
///
/// Trial `i` draws from its own ChaCha stream `i` under `seed`, so the
/// estimate does not depend on how trials are spread over threads.
pub fn monte_carlo_session_eval<F: ProbabilityField>(params: &VoteParams<F>, trials: u64, seed: u64) -> McEstimate {
    let p0 = params.p0.to_f64_lossy();
    let n = params.n_segments;
    let successes = (0..trials)
        .into_par_iter()
        .filter(|&trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            let segment_predictions = (0..n)
                .map(|_| if rng.random::<f64>() < p0 { Class::Depressed } else { Class::NotDepressed })
                .collect();
            let vote = SessionVote { segment_predictions, tie_break_seed: rng.random() };
            pv_decide(&vote).expect("n_segments >= 1") == Class::Depressed
        })
        .count() as u64;
    let (ci_low, ci_high) = wilson_interval(successes, trials);
    McEstimate {
        trials,
        successes,
        recall: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        ci_low,
        ci_high,
    }
}
