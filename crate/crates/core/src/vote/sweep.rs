use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vote::field::{binomial, ProbabilityField};
use crate::vote::recall::exact_pv_recall;
use crate::vote::VoteParams;

/// Tolerance on the floating-point margin before a grid point counts as a violation.
pub const MARGIN_TOLERANCE: f64 = 1e-12;

/// Grid of segment recalls `p0 = k/100` for `k` in `p0_min_pct..=p0_max_pct`
/// and segment counts `1..=n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub p0_min_pct: u32,
    pub p0_max_pct: u32,
    pub n_max: usize,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self { p0_min_pct: 50, p0_max_pct: 100, n_max: 50 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub p0: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallCurve {
    pub p0: f64,
    pub n: Vec<usize>,
    pub recall: Vec<f64>,
}

/// Outcome of checking `P(p0, N) >= p0` over a [`SweepGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub grid: SweepGrid,
    pub cases: usize,
    pub min_margin: f64,
    pub violations: Vec<GridPoint>,
    /// Points where the exact margin is zero although `p0 ∉ {1/2, 1}` and `N > 2`.
    pub unexpected_equalities: Vec<GridPoint>,
    /// Points with `p0 ∈ {1/2, 1}` or `N <= 2` whose exact margin is not zero.
    pub missing_equalities: Vec<GridPoint>,
    /// Session recall is nondecreasing along odd `N` for every `p0 > 1/2`.
    pub odd_n_monotone: bool,
    pub curves: Vec<RecallCurve>,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
            && self.unexpected_equalities.is_empty()
            && self.missing_equalities.is_empty()
            && self.odd_n_monotone
    }
}

struct Row {
    points: Vec<(GridPoint, bool)>,
    recall: Vec<f64>,
    odd_monotone: bool,
}

// With p0 = a/100, the exact session recall is S(N) / (2 * 100^N) where
// S(N) = Σ_{k>N/2} 2 C(N,k) a^k b^(N-k) + C(N,N/2) (ab)^(N/2) for even N.
fn scaled_recall(n: usize, a_pow: &[BigUint], b_pow: &[BigUint]) -> BigUint {
    let mut total = BigUint::zero();
    for k in n.div_ceil(2)..=n {
        let term = binomial(n, k) * &a_pow[k] * &b_pow[n - k];
        total += if 2 * k == n { term } else { term << 1 };
    }
    total
}

fn sweep_row(pct: u32, n_max: usize) -> Result<Row> {
    let p = f64::from_ratio(pct as u64, 100);
    let a = BigUint::from(pct);
    let b = BigUint::from(100 - pct);
    let mut a_pow = vec![BigUint::one()];
    let mut b_pow = vec![BigUint::one()];
    let mut hundred_pow = vec![BigUint::one()];
    for k in 1..=n_max {
        a_pow.push(&a_pow[k - 1] * &a);
        b_pow.push(&b_pow[k - 1] * &b);
        hundred_pow.push(&hundred_pow[k - 1] * 100u32);
    }
    let mut points = Vec::with_capacity(n_max);
    let mut recall = Vec::with_capacity(n_max);
    let mut odd_monotone = true;
    let mut last_odd: Option<BigUint> = None;
    for n in 1..=n_max {
        let value = exact_pv_recall(&VoteParams::new(p, n)?);
        let scaled = scaled_recall(n, &a_pow, &b_pow);
        // P = p0  <=>  S(N) = 2 a 100^(N-1)
        let exact_zero = scaled == (&a * &hundred_pow[n - 1]) << 1;
        if n % 2 == 1 {
            // P(N) >= P(N-2)  <=>  S(N) >= 100^2 S(N-2)
            odd_monotone &= last_odd.as_ref().is_none_or(|prev| scaled >= prev * 10_000u32);
            last_odd = Some(scaled);
        }
        recall.push(value);
        points.push((GridPoint { p0: p, n, margin: value - p }, exact_zero));
    }
    Ok(Row { points, recall, odd_monotone })
}

/// Evaluates the recall-amplification inequality on every grid point, in
/// floating point and exactly in rationals.
pub fn theorem_sweep(grid: SweepGrid) -> Result<TheoremReport> {
    if grid.p0_min_pct < 50 || grid.p0_max_pct > 100 || grid.p0_min_pct > grid.p0_max_pct || grid.n_max == 0 {
        return Err(Error::Config(format!(
            "sweep grid needs 50 <= p0_min_pct <= p0_max_pct <= 100 and n_max >= 1, got {grid:?}"
        )));
    }
    let pcts: Vec<u32> = (grid.p0_min_pct..=grid.p0_max_pct).collect();
    let rows: Vec<Row> = pcts.par_iter().map(|&pct| sweep_row(pct, grid.n_max)).collect::<Result<_>>()?;

    let mut report = TheoremReport {
        grid,
        cases: 0,
        min_margin: f64::INFINITY,
        violations: Vec::new(),
        unexpected_equalities: Vec::new(),
        missing_equalities: Vec::new(),
        odd_n_monotone: true,
        curves: Vec::new(),
    };
    for (&pct, row) in pcts.iter().zip(&rows) {
        for &(pt, exact_zero) in &row.points {
            report.cases += 1;
            report.min_margin = report.min_margin.min(pt.margin);
            if pt.margin < -MARGIN_TOLERANCE {
                report.violations.push(pt);
            }
            let expected_zero = pct == 50 || pct == 100 || pt.n <= 2;
            match (expected_zero, exact_zero) {
                (true, false) => report.missing_equalities.push(pt),
                (false, true) => report.unexpected_equalities.push(pt),
                _ => {}
            }
        }
        if pct > 50 {
            report.odd_n_monotone &= row.odd_monotone;
        }
        if matches!(pct, 55 | 60 | 70 | 80 | 90) {
            report.curves.push(RecallCurve {
                p0: f64::from_ratio(pct as u64, 100),
                n: (1..=grid.n_max).collect(),
                recall: row.recall.clone(),
            });
        }
    }
    Ok(report)
}
