use std::collections::HashSet;

use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{Error, Result};
use crate::Scalar;

/// An M-channel, N-frame real-valued signal sampled at a fixed frame rate.
///
/// Values are stored channel-major: row `i` is channel `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiChannelSeries<T> {
    channel_names: Vec<String>,
    frame_rate_hz: f64,
    values: Array2<T>,
}

impl<T: Scalar> MultiChannelSeries<T> {
    pub fn new(channel_names: Vec<String>, frame_rate_hz: f64, values: Array2<T>) -> Result<Self> {
        let (m, n) = values.dim();
        if m == 0 || n == 0 {
            return Err(Error::InvalidSeries(format!("need at least one channel and frame, got {m}x{n}")));
        }
        if channel_names.len() != m {
            return Err(Error::InvalidSeries(format!(
                "{} channel names for {m} channels",
                channel_names.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &channel_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidSeries(format!("duplicate channel name `{name}`")));
            }
        }
        if !(frame_rate_hz.is_finite() && frame_rate_hz > 0.0) {
            return Err(Error::InvalidSeries(format!("frame rate must be positive, got {frame_rate_hz}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { channel_names, frame_rate_hz, values })
    }

    /// Builds a series with generated channel names `ch1..chM`.
    pub fn from_values(frame_rate_hz: f64, values: Array2<T>) -> Result<Self> {
        let names = (1..=values.nrows()).map(|i| format!("ch{i}")).collect();
        Self::new(names, frame_rate_hz, values)
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn frame_rate_hz(&self) -> f64 {
        self.frame_rate_hz
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn channels(&self) -> usize {
        self.values.nrows()
    }

    pub fn frames(&self) -> usize {
        self.values.ncols()
    }

    pub fn duration_s(&self) -> f64 {
        self.frames() as f64 / self.frame_rate_hz
    }

    pub fn channel(&self, i: usize) -> ArrayView1<'_, T> {
        self.values.index_axis(Axis(0), i)
    }

    pub fn into_values(self) -> Array2<T> {
        self.values
    }

    pub(crate) fn with_values(&self, values: Array2<T>) -> Self {
        debug_assert_eq!(values.nrows(), self.channels());
        Self { channel_names: self.channel_names.clone(), frame_rate_hz: self.frame_rate_hz, values }
    }
}

/// Rescales each channel (row) to mean 0 and population standard deviation 1.
///
/// `names` is only used to label a [`Error::ConstantChannel`] failure.
pub fn standardize_rows<T: Scalar>(values: &Array2<T>, names: &[String]) -> Result<Array2<T>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = T::of_usize(values.ncols());
    let mut out = values.clone();
    for (i, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
        let mean = row.iter().copied().sum::<T>() / n;
        let var = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
        if !(var > T::zero()) {
            let name = names.get(i).cloned().unwrap_or_else(|| format!("#{i}"));
            return Err(Error::ConstantChannel(name));
        }
        let std = var.sqrt();
        row.mapv_inplace(|v| (v - mean) / std);
        // Second pass removes the residual mean left by rounding in the first.
        let resid = row.iter().copied().sum::<T>() / n;
        row.mapv_inplace(|v| v - resid);
    }
    Ok(out)
}

/// Standardizes every channel of a series individually.
pub fn standardize_channels<T: Scalar>(series: &MultiChannelSeries<T>) -> Result<MultiChannelSeries<T>> {
    let values = standardize_rows(series.values(), series.channel_names())?;
    Ok(series.with_values(values))
}
