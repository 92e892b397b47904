use ndarray::{Array2, ArrayView2};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::acf::{check_shape, pair_row, warn_if_unstandardized, AcfConfig, AcfMatrix};
use crate::error::Result;
use crate::signal::Segment;
use crate::Scalar;

/// Frequency-domain channel-delay correlation matrix of an M×N array.
///
/// Channels are zero-padded to at least N + D points so the circular
/// correlation has no wrap-around at lags in `[-D, D]`. One inverse transform
/// per unordered pair `{i, j}` yields both orderings: lag `+d` of `x_i ⋆ x_j`
/// is `r[i,j](d)` and lag `-d` is `r[j,i](d)`.
pub fn acf_values_fast<T: Scalar>(values: ArrayView2<'_, T>, cfg: &AcfConfig) -> Result<AcfMatrix<T>> {
    check_shape(&values, cfg)?;
    warn_if_unstandardized(&values);
    let (m, n) = values.dim();
    let big_d = cfg.max_delay_frames;
    let size = (n + big_d).next_power_of_two();

    let mut planner = FftPlanner::<T>::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);

    let spectra: Vec<Vec<Complex<T>>> = values
        .outer_iter()
        .map(|row| {
            let mut buf = vec![Complex::new(T::zero(), T::zero()); size];
            for (slot, &v) in buf.iter_mut().zip(row.iter()) {
                slot.re = v;
            }
            forward.process(&mut buf);
            buf
        })
        .collect();

    let scale = T::of_usize(size);
    let norm: Vec<T> = (0..=big_d).map(|d| scale * T::of_usize(n - d)).collect();
    let mut rows = Array2::zeros((m * m, big_d + 1));
    let mut buf = vec![Complex::new(T::zero(), T::zero()); size];
    for i in 0..m {
        for j in i..m {
            for ((slot, a), b) in buf.iter_mut().zip(&spectra[i]).zip(&spectra[j]) {
                *slot = a.conj() * b;
            }
            inverse.process(&mut buf);
            let (ij, ji) = (pair_row(m, i, j), pair_row(m, j, i));
            for d in 0..=big_d {
                rows[[ij, d]] = buf[d].re / norm[d];
                rows[[ji, d]] = buf[(size - d) % size].re / norm[d];
            }
        }
    }
    AcfMatrix::new(m, rows)
}

pub fn acf_matrix_fast<T: Scalar>(segment: &Segment<T>, cfg: &AcfConfig) -> Result<AcfMatrix<T>> {
    acf_values_fast(segment.values.view(), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acf::acf_values_naive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn impulse_pair() {
        let (n, d) = (64, 9);
        let mut v = Array2::<f64>::zeros((2, n));
        v[[0, 0]] = 1.0;
        v[[1, d]] = 1.0;
        let acf = acf_values_fast(v.view(), &AcfConfig { max_delay_frames: 20 }).unwrap();
        for lag in 0..=20 {
            let expect = if lag == d { 1.0 / (n - d) as f64 } else { 0.0 };
            assert!((acf.get(0, 1, lag) - expect).abs() < 1e-15, "lag {lag}");
            assert!(acf.get(1, 0, lag).abs() < 1e-15);
        }
    }

    #[test]
    fn agrees_with_naive_on_random_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &(m, n, d) in &[(1, 2, 1), (2, 17, 16), (3, 100, 30), (5, 257, 64)] {
            let v = Array2::from_shape_fn((m, n), |_| rng.random_range(-2.0f64..2.0));
            let cfg = AcfConfig { max_delay_frames: d };
            let fast = acf_values_fast(v.view(), &cfg).unwrap();
            let naive = acf_values_naive(v.view(), &cfg).unwrap();
            assert!(fast.max_abs_diff(&naive) <= 1e-9);
        }
    }

    #[test]
    fn f32_agrees_loosely() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = Array2::from_shape_fn((2, 300), |_| rng.random_range(-1.0f32..1.0));
        let cfg = AcfConfig { max_delay_frames: 40 };
        let fast = acf_values_fast(v.view(), &cfg).unwrap();
        let naive = acf_values_naive(v.view(), &cfg).unwrap();
        assert!(fast.max_abs_diff(&naive) < 1e-4);
    }
}
