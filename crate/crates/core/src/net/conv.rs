use ndarray::Array2;

use crate::error::{Error, Result};
use crate::Scalar;

/// Causal dilated 1-D convolution (cross-correlation) with left zero padding:
///
/// ```text
/// out[f][t] = bias[f] + Σ_c Σ_k w[f][c][k] · in[c][t - k·dilation]
/// ```
///
/// Taps that reach before `t = 0` contribute nothing, so the output keeps the
/// input length. `weights` is F×C×K, flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer<T> {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub dilation: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> ConvLayer<T> {
    pub fn zeros(in_channels: usize, out_channels: usize, kernel: usize, dilation: usize) -> Self {
        Self {
            in_channels,
            out_channels,
            kernel,
            dilation,
            weights: vec![T::zero(); out_channels * in_channels * kernel],
            bias: vec![T::zero(); out_channels],
        }
    }

    pub fn fan_in(&self) -> usize {
        self.in_channels * self.kernel
    }

    pub fn fan_out(&self) -> usize {
        self.out_channels * self.kernel
    }

    #[inline]
    fn w(&self, f: usize, c: usize, k: usize) -> T {
        self.weights[(f * self.in_channels + c) * self.kernel + k]
    }

    /// `input` is C×L flattened; returns F×L flattened.
    pub fn forward(&self, input: &[T], len: usize) -> Vec<T> {
        debug_assert_eq!(input.len(), self.in_channels * len);
        let mut out = vec![T::zero(); self.out_channels * len];
        for f in 0..self.out_channels {
            let row = &mut out[f * len..(f + 1) * len];
            row.iter_mut().for_each(|v| *v = self.bias[f]);
            for c in 0..self.in_channels {
                let x = &input[c * len..(c + 1) * len];
                for k in 0..self.kernel {
                    let off = k * self.dilation;
                    if off >= len {
                        break;
                    }
                    let w = self.w(f, c, k);
                    for (o, &xi) in row[off..].iter_mut().zip(&x[..len - off]) {
                        *o += w * xi;
                    }
                }
            }
        }
        out
    }

    /// Accumulates parameter gradients into `grad` and, when requested,
    /// returns the gradient with respect to the input.
    pub fn backward(&self, input: &[T], len: usize, d_out: &[T], grad: &mut ConvLayer<T>, want_input: bool) -> Option<Vec<T>> {
        let mut d_in = want_input.then(|| vec![T::zero(); self.in_channels * len]);
        for f in 0..self.out_channels {
            let g = &d_out[f * len..(f + 1) * len];
            grad.bias[f] += g.iter().copied().sum::<T>();
            for c in 0..self.in_channels {
                let x = &input[c * len..(c + 1) * len];
                for k in 0..self.kernel {
                    let off = k * self.dilation;
                    if off >= len {
                        break;
                    }
                    let idx = (f * self.in_channels + c) * self.kernel + k;
                    let dot = g[off..].iter().zip(&x[..len - off]).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
                    grad.weights[idx] += dot;
                    if let Some(d_in) = d_in.as_mut() {
                        let w = self.weights[idx];
                        for (di, &gi) in d_in[c * len..c * len + len - off].iter_mut().zip(&g[off..]) {
                            *di += w * gi;
                        }
                    }
                }
            }
        }
        d_in
    }
}

/// Stand-alone dilated convolution on ndarray tensors: `input` is C×L,
/// `weights` is F×C×K flattened, result is F×L.
pub fn dilated_conv1d<T: Scalar>(input: &Array2<T>, weights: &ndarray::Array3<T>, bias: &[T], dilation: usize) -> Result<Array2<T>> {
    let (c, len) = input.dim();
    let (f, wc, k) = weights.dim();
    if wc != c || bias.len() != f || k == 0 || dilation == 0 || len == 0 {
        return Err(Error::ShapeMismatch(format!(
            "conv: input {c}x{len}, weights {f}x{wc}x{k}, bias {}, dilation {dilation}",
            bias.len()
        )));
    }
    let layer = ConvLayer {
        in_channels: c,
        out_channels: f,
        kernel: k,
        dilation,
        weights: weights.iter().copied().collect(),
        bias: bias.to_vec(),
    };
    let flat: Vec<T> = input.iter().copied().collect();
    let out = layer.forward(&flat, len);
    Ok(Array2::from_shape_vec((f, len), out).expect("conv output shape"))
}
