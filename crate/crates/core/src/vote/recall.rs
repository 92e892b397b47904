//! Exact session-level recall of plurality voting and its enumeration oracle.
//!
//! With N independent segment decisions, each correct with probability p,
//! a plurality vote that splits ties with a fair coin is correct with
//! probability
//!
//! ```text
//! P(p, N) = Σ_{k=⌈N/2⌉}^{N} C(N,k) · w(k) · p^k · (1-p)^(N-k),   w(N/2) = 1/2, else 1.
//! ```

use num_traits::pow;

use crate::error::{Error, Result};
use crate::vote::field::{binomial, ProbabilityField};
use crate::vote::VoteParams;

/// Largest segment count the enumeration oracle accepts.
pub const BRUTE_FORCE_MAX_SEGMENTS: usize = 24;

pub fn exact_pv_recall<F: ProbabilityField>(params: &VoteParams<F>) -> F {
    let n = params.n_segments;
    let p = params.p0.clone();
    let q = F::one() - p.clone();
    let mut total = F::zero();
    for k in n.div_ceil(2)..=n {
        let mut term = F::from_biguint(&binomial(n, k)) * pow(p.clone(), k) * pow(q.clone(), n - k);
        if 2 * k == n {
            term = term * F::half();
        }
        total = total + term;
    }
    total
}

/// Sums the probability of every one of the 2^N correct/incorrect outcome
/// vectors on which the vote picks the true class, with half weight on ties.
pub fn brute_force_pv_recall<F: ProbabilityField>(params: &VoteParams<F>) -> Result<F> {
    let n = params.n_segments;
    if n > BRUTE_FORCE_MAX_SEGMENTS {
        return Err(Error::TooManySegments { n, max: BRUTE_FORCE_MAX_SEGMENTS });
    }
    let p = params.p0.clone();
    let q = F::one() - p.clone();
    let mut total = F::zero();
    for outcome in 0u32..(1u32 << n) {
        let correct = outcome.count_ones() as usize;
        let wrong = n - correct;
        if correct < wrong {
            continue;
        }
        let mut mass = F::one();
        for bit in 0..n {
            mass = mass * if outcome >> bit & 1 == 1 { p.clone() } else { q.clone() };
        }
        if correct == wrong {
            mass = mass * F::half();
        }
        total = total + mass;
    }
    Ok(total)
}

/// Session recall minus segment recall; non-negative whenever `p0 >= 1/2`.
pub fn theorem_margin<F: ProbabilityField>(params: &VoteParams<F>) -> F {
    exact_pv_recall(params) - params.p0.clone()
}

/// Session recall along a grid of odd segment counts for a better-than-chance
/// segment classifier.
pub fn jury_limit_check<F: ProbabilityField>(p0: F, n_grid: &[usize]) -> Result<Vec<F>> {
    if !(p0 > F::half() && p0 <= F::one()) {
        return Err(Error::Config(format!("jury check needs 1/2 < p0 <= 1, got {p0:?}")));
    }
    n_grid
        .iter()
        .map(|&n| {
            if n % 2 == 0 {
                return Err(Error::Config(format!("jury check uses odd segment counts, got {n}")));
            }
            Ok(exact_pv_recall(&VoteParams::new(p0.clone(), n)?))
        })
        .collect()
}
