//! Channel-delay correlation matrices.
//!
//! For standardized channels `x_i`, `x_j` of length N the delayed correlation is
//!
//! ```text
//! r[i,j](d) = Σ_{t=0}^{N-d-1} x_i[t] · x_j[t+d] / (N - d)
//! ```
//!
//! and the matrix stacks the vectors `[r(0) .. r(D)]` of all M² ordered pairs,
//! row-major: `(0,0), (0,1), .., (0,M-1), (1,0), .., (M-1,M-1)`.
//!
//! Two implementations share that contract: [`acf_matrix_naive`] is the direct
//! O(M²·N·D) loop and serves as the oracle for [`acf_matrix_fast`], which
//! correlates in the frequency domain.

mod fast;
pub mod io;
mod naive;

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

pub use fast::{acf_matrix_fast, acf_values_fast};
pub use naive::{acf_matrix_naive, acf_values_naive, delayed_correlation_pair};

/// Default maximum delay; D + 1 = 211 matches the receptive field of a
/// kernel-15, dilation-15 convolution.
pub const DEFAULT_MAX_DELAY: usize = 210;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcfConfig {
    pub max_delay_frames: usize,
}

impl Default for AcfConfig {
    fn default() -> Self {
        Self { max_delay_frames: DEFAULT_MAX_DELAY }
    }
}

/// Which implementation computes the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcfMethod {
    Naive,
    #[default]
    Fast,
}

/// The M² × (D+1) stack of delayed auto- and cross-correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfMatrix<T> {
    channels: usize,
    rows: Array2<T>,
}

impl<T: Scalar> AcfMatrix<T> {
    pub fn new(channels: usize, rows: Array2<T>) -> Result<Self> {
        if channels == 0 || rows.nrows() != channels * channels || rows.ncols() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "ACF matrix for {channels} channels must have {} rows, got {}x{}",
                channels * channels,
                rows.nrows(),
                rows.ncols()
            )));
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { channels, rows })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn max_delay(&self) -> usize {
        self.rows.ncols() - 1
    }

    pub fn rows(&self) -> &Array2<T> {
        &self.rows
    }

    /// Row index of the ordered pair `(i, j)`.
    pub fn row_of(&self, i: usize, j: usize) -> usize {
        pair_row(self.channels, i, j)
    }

    /// Ordered pair stored at row `k`.
    pub fn pair_of(&self, k: usize) -> (usize, usize) {
        (k / self.channels, k % self.channels)
    }

    pub fn get(&self, i: usize, j: usize, d: usize) -> T {
        self.rows[[self.row_of(i, j), d]]
    }

    pub fn pair(&self, i: usize, j: usize) -> ArrayView1<'_, T> {
        self.rows.row(self.row_of(i, j))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.rows.iter().zip(other.rows.iter()).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    /// Reinterprets a classifier input tensor (M² channels × D+1) as a matrix.
    pub fn from_model_input(input: Array2<T>) -> Result<Self> {
        let m = (input.nrows() as f64).sqrt().round() as usize;
        Self::new(m, input)
    }
}

pub(crate) fn pair_row(m: usize, i: usize, j: usize) -> usize {
    i * m + j
}

/// Lays the matrix out as classifier input: each ordered pair becomes one
/// input channel of length D+1. Inverse of [`AcfMatrix::from_model_input`].
pub fn acf_to_model_input<T: Scalar>(acf: &AcfMatrix<T>) -> Array2<T> {
    acf.rows.clone()
}

pub(crate) fn check_shape<T: Scalar>(values: &ArrayView2<'_, T>, cfg: &AcfConfig) -> Result<()> {
    let n = values.ncols();
    if values.nrows() == 0 || n == 0 {
        return Err(Error::ShapeMismatch("segment has no channels or frames".into()));
    }
    if cfg.max_delay_frames >= n {
        return Err(Error::DelayTooLarge { delay: cfg.max_delay_frames, len: n });
    }
    Ok(())
}

// Eq. 1 assumes standardized channels; flag input that clearly is not.
pub(crate) fn warn_if_unstandardized<T: Scalar>(values: &ArrayView2<'_, T>) {
    let n = values.ncols() as f64;
    for (i, row) in values.outer_iter().enumerate() {
        let mean = row.iter().map(|v| v.as_f64()).sum::<f64>() / n;
        let power = row.iter().map(|v| v.as_f64().powi(2)).sum::<f64>() / n;
        if mean.abs() > 1e-6 || (power - 1.0).abs() > 1e-6 {
            log::warn!("ACF input channel {i} is not standardized (mean {mean:.3e}, power {power:.6})");
            return;
        }
    }
}
