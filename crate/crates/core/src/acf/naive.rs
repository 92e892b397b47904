use ndarray::{Array2, ArrayView2};

use crate::acf::{check_shape, pair_row, warn_if_unstandardized, AcfConfig, AcfMatrix};
use crate::error::{Error, Result};
use crate::signal::Segment;
use crate::Scalar;

/// Neumaier-compensated sum of `x[t]·y[t+d]`, accumulated in f64.
fn lagged_dot<T: Scalar>(x: &[T], y: &[T], d: usize) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (a, b) in x.iter().zip(&y[d..]) {
        let term = a.as_f64() * b.as_f64();
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Delayed correlation of `y` against `x` at lag `d`, normalised by the
/// `N - d` overlapping frames.
pub fn delayed_correlation_pair<T: Scalar>(x: &[T], y: &[T], d: usize) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if d >= n {
        return Err(Error::DelayTooLarge { delay: d, len: n });
    }
    Ok(T::of(lagged_dot(x, y, d) / (n - d) as f64))
}

/// Direct-loop channel-delay correlation matrix of an M×N array.
pub fn acf_values_naive<T: Scalar>(values: ArrayView2<'_, T>, cfg: &AcfConfig) -> Result<AcfMatrix<T>> {
    check_shape(&values, cfg)?;
    warn_if_unstandardized(&values);
    let (m, n) = values.dim();
    let big_d = cfg.max_delay_frames;
    let channels: Vec<Vec<T>> = values.outer_iter().map(|r| r.to_vec()).collect();
    let mut rows = Array2::zeros((m * m, big_d + 1));
    for i in 0..m {
        for j in 0..m {
            let k = pair_row(m, i, j);
            for d in 0..=big_d {
                rows[[k, d]] = T::of(lagged_dot(&channels[i], &channels[j], d) / (n - d) as f64);
            }
        }
    }
    AcfMatrix::new(m, rows)
}

pub fn acf_matrix_naive<T: Scalar>(segment: &Segment<T>, cfg: &AcfConfig) -> Result<AcfMatrix<T>> {
    acf_values_naive(segment.values.view(), cfg)
}
