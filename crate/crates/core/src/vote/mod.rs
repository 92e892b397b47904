//! Plurality-vote session classification and its analysis.

mod field;
mod recall;
mod simulate;
mod sweep;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Class;
use crate::Scalar;

pub use field::{binomial, ProbabilityField};
pub use recall::{
    brute_force_pv_recall, exact_pv_recall, jury_limit_check, theorem_margin, BRUTE_FORCE_MAX_SEGMENTS,
};
pub use simulate::{monte_carlo_session_eval, wilson_interval, McEstimate};
pub use sweep::{theorem_sweep, GridPoint, RecallCurve, SweepGrid, TheoremReport, MARGIN_TOLERANCE};

/// Segment-level recall `p0` of the true class and segments per session.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteParams<F> {
    pub p0: F,
    pub n_segments: usize,
}

impl<F: ProbabilityField> VoteParams<F> {
    pub fn new(p0: F, n_segments: usize) -> Result<Self> {
        if !(p0 >= F::zero() && p0 <= F::one()) {
            return Err(Error::Config(format!("p0 must lie in [0, 1], got {p0:?}")));
        }
        if n_segments == 0 {
            return Err(Error::Config("a session needs at least one segment".into()));
        }
        Ok(Self { p0, n_segments })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionVote {
    pub segment_predictions: Vec<Class>,
    pub tie_break_seed: u64,
}

/// Plurality vote; an exact tie is settled by a fair coin drawn from `tie_break_seed`.
pub fn pv_decide(vote: &SessionVote) -> Result<Class> {
    if vote.segment_predictions.is_empty() {
        return Err(Error::EmptyVote);
    }
    let first = vote.segment_predictions.iter().filter(|&&c| c == Class::Depressed).count();
    let second = vote.segment_predictions.len() - first;
    Ok(match first.cmp(&second) {
        std::cmp::Ordering::Greater => Class::Depressed,
        std::cmp::Ordering::Less => Class::NotDepressed,
        std::cmp::Ordering::Equal => {
            if ChaCha8Rng::seed_from_u64(vote.tie_break_seed).random::<bool>() {
                Class::Depressed
            } else {
                Class::NotDepressed
            }
        }
    })
}

/// How segment-level class probabilities become a session decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationPolicy {
    /// Plurality vote over per-segment argmax decisions.
    #[default]
    Pv,
    /// Argmax of the mean probability vector.
    MeanProb,
}

// Exact probability ties go to class 0.
fn argmax<T: Scalar>(probs: &[T]) -> Class {
    if probs[1] > probs[0] {
        Class::NotDepressed
    } else {
        Class::Depressed
    }
}

pub fn aggregate_session<T: Scalar, P: AsRef<[T]>>(
    segment_probs: &[P],
    policy: AggregationPolicy,
    tie_break_seed: u64,
) -> Result<Class> {
    if segment_probs.is_empty() {
        return Err(Error::EmptyVote);
    }
    if let Some(bad) = segment_probs.iter().find(|p| p.as_ref().len() != 2) {
        return Err(Error::ShapeMismatch(format!("expected 2 class probabilities, got {}", bad.as_ref().len())));
    }
    match policy {
        AggregationPolicy::Pv => pv_decide(&SessionVote {
            segment_predictions: segment_probs.iter().map(|p| argmax(p.as_ref())).collect(),
            tie_break_seed,
        }),
        AggregationPolicy::MeanProb => {
            let mut mean = [T::zero(); 2];
            for p in segment_probs {
                mean[0] += p.as_ref()[0];
                mean[1] += p.as_ref()[1];
            }
            Ok(argmax(&mean))
        }
    }
}

/// JSON report emitted by the `vote` CLI commands. Fields a command does not
/// compute are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteReport {
    pub p0: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub exact: f64,
    pub brute_force: Option<f64>,
    pub margin: f64,
    pub mc_estimate: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

impl VoteReport {
    pub fn exact(params: &VoteParams<f64>) -> Self {
        Self {
            p0: params.p0,
            n: params.n_segments,
            exact: exact_pv_recall(params),
            brute_force: None,
            margin: theorem_margin(params),
            mc_estimate: None,
            ci_low: None,
            ci_high: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Class::{Depressed as C0, NotDepressed as C1};

    fn vote(v: &[Class], seed: u64) -> SessionVote {
        SessionVote { segment_predictions: v.to_vec(), tie_break_seed: seed }
    }

    #[test]
    fn majority() {
        assert_eq!(pv_decide(&vote(&[C0, C0, C1], 0)).unwrap(), C0);
        assert_eq!(pv_decide(&vote(&[C1, C0, C1], 0)).unwrap(), C1);
        assert!(matches!(pv_decide(&vote(&[], 0)), Err(Error::EmptyVote)));
    }

    #[test]
    fn ties_are_fair_and_seeded() {
        let c0 = (0..10_000u64).filter(|&s| pv_decide(&vote(&[C0, C1], s)).unwrap() == C0).count();
        let freq = c0 as f64 / 10_000.0;
        assert!((0.47..=0.53).contains(&freq), "{freq}");
        // 3 sigma of a fair binomial at n = 10^4
        assert!((c0 as f64 - 5000.0).abs() <= 150.0);
        for s in 0..50 {
            assert_eq!(pv_decide(&vote(&[C1, C0], s)).unwrap(), pv_decide(&vote(&[C1, C0], s)).unwrap());
        }
    }

    #[test]
    fn aggregation_policies() {
        let all = vec![[0.9, 0.1]; 4];
        assert_eq!(aggregate_session(&all, AggregationPolicy::Pv, 0).unwrap(), C0);
        assert_eq!(aggregate_session(&all, AggregationPolicy::MeanProb, 0).unwrap(), C0);

        let split = [[0.6, 0.4], [0.6, 0.4], [0.1, 0.9]];
        assert_eq!(aggregate_session(&split, AggregationPolicy::Pv, 0).unwrap(), C0);
        assert_eq!(aggregate_session(&split, AggregationPolicy::MeanProb, 0).unwrap(), C1);

        let one = [[0.2, 0.8]];
        assert_eq!(aggregate_session(&one, AggregationPolicy::Pv, 0).unwrap(), C1);
        assert_eq!(aggregate_session(&one, AggregationPolicy::MeanProb, 0).unwrap(), C1);

        let empty: [[f64; 2]; 0] = [];
        assert!(matches!(aggregate_session(&empty, AggregationPolicy::Pv, 0), Err(Error::EmptyVote)));
        assert!(aggregate_session(&[vec![1.0f64]], AggregationPolicy::Pv, 0).is_err());
    }

    #[test]
    fn params_validated() {
        assert!(VoteParams::new(1.2, 3).is_err());
        assert!(VoteParams::new(0.5, 0).is_err());
        assert!(VoteParams::new(f64::NAN, 1).is_err());
    }

    #[test]
    fn report_shape() {
        let r = VoteReport::exact(&VoteParams::new(0.6, 3).unwrap());
        let json = serde_json::to_value(&r).unwrap();
        for key in ["p0", "N", "exact", "brute_force", "margin", "mc_estimate", "ci_low", "ci_high"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert!((r.exact - 0.648).abs() < 1e-15);
    }
}
