use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::MultiChannelSeries;
use crate::Scalar;

/// Windowing rules for cutting a session into segments. Durations are seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmentationConfig {
    pub window_s: f64,
    pub shift_s: f64,
    pub min_s: f64,
    /// When set, every segment is cut down to its first `truncate_s` seconds.
    pub truncate_s: Option<f64>,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self { window_s: 20.0, shift_s: 5.0, min_s: 10.0, truncate_s: None }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("segmentation: {msg}")));
        if !(self.shift_s > 0.0 && self.shift_s <= self.window_s) {
            return bad("require 0 < shift_s <= window_s");
        }
        if !(self.min_s > 0.0 && self.min_s <= self.window_s) {
            return bad("require 0 < min_s <= window_s");
        }
        if let Some(t) = self.truncate_s {
            if !(t > 0.0 && t <= self.min_s) {
                return bad("require 0 < truncate_s <= min_s");
            }
        }
        Ok(())
    }
}

/// A contiguous window of one session.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment<T> {
    pub session_id: String,
    pub start_frame: usize,
    /// M channels by L frames.
    pub values: Array2<T>,
}

impl<T> Segment<T> {
    pub fn frames(&self) -> usize {
        self.values.ncols()
    }

    pub fn channels(&self) -> usize {
        self.values.nrows()
    }
}

// Seconds to frames; the small epsilon keeps 0.1 s * 100 fps from landing on 9.999.
fn to_frames(seconds: f64, rate: f64) -> usize {
    (seconds * rate + 1e-9).floor() as usize
}

/// Cuts a session into fixed-length overlapping windows.
///
/// Sessions shorter than `min_s` yield nothing; sessions up to `window_s` long
/// are kept whole; longer sessions yield every full window starting at a
/// multiple of `shift_s`, and the trailing remainder is dropped.
pub fn segment_session<T: Scalar>(
    session_id: &str,
    series: &MultiChannelSeries<T>,
    cfg: &SegmentationConfig,
) -> Result<Vec<Segment<T>>> {
    cfg.validate()?;
    let rate = series.frame_rate_hz();
    let n = series.frames();
    let window = to_frames(cfg.window_s, rate).max(1);
    let shift = to_frames(cfg.shift_s, rate).max(1);
    let min = to_frames(cfg.min_s, rate);

    let make = |start: usize, len: usize| Segment {
        session_id: session_id.to_owned(),
        start_frame: start,
        values: series.values().slice(s![.., start..start + len]).to_owned(),
    };

    if n < min {
        return Ok(Vec::new());
    }
    if n <= window {
        return Ok(vec![make(0, n)]);
    }
    Ok((0..=n - window).step_by(shift).map(|start| make(start, window)).collect())
}

/// Keeps the first `⌊truncate_s · frame_rate⌋` frames of a segment.
pub fn truncate_fixed<T: Scalar>(segment: &Segment<T>, truncate_s: f64, frame_rate_hz: f64) -> Result<Segment<T>> {
    let keep = to_frames(truncate_s, frame_rate_hz);
    if keep == 0 {
        return Err(Error::Config(format!("truncation to {truncate_s} s keeps no frames")));
    }
    if segment.frames() < keep {
        return Err(Error::TooShort { have: segment.frames(), need: keep });
    }
    Ok(Segment {
        session_id: segment.session_id.clone(),
        start_frame: segment.start_frame,
        values: segment.values.slice(s![.., ..keep]).to_owned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(seconds: f64, rate: f64) -> MultiChannelSeries<f64> {
        let n = (seconds * rate).round() as usize;
        let values = Array2::from_shape_fn((2, n), |(c, t)| (c * n + t) as f64);
        MultiChannelSeries::from_values(rate, values).unwrap()
    }

    #[test]
    fn long_session_windows() {
        let segs = segment_session("s", &series(45.0, 100.0), &SegmentationConfig::default()).unwrap();
        let starts: Vec<_> = segs.iter().map(|s| s.start_frame).collect();
        assert_eq!(starts, vec![0, 500, 1000, 1500, 2000, 2500]);
        assert!(segs.iter().all(|s| s.frames() == 2000 && s.channels() == 2));
        assert_eq!(segs[1].values[[0, 0]], 500.0);
        assert_eq!(segs[1].values[[1, 0]], 4500.0 + 500.0);
    }

    #[test]
    fn medium_session_kept_whole() {
        let s = series(15.0, 100.0);
        let segs = segment_session("s", &s, &SegmentationConfig::default()).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].values, *s.values());
    }

    #[test]
    fn short_session_dropped() {
        let segs = segment_session("s", &series(8.0, 100.0), &SegmentationConfig::default()).unwrap();
        assert!(segs.is_empty());
    }

    #[test]
    fn boundaries() {
        let cfg = SegmentationConfig::default();
        assert_eq!(segment_session("s", &series(10.0, 100.0), &cfg).unwrap().len(), 1);
        assert_eq!(segment_session("s", &series(20.0, 100.0), &cfg).unwrap().len(), 1);
        // 24.99 s: one full window, remainder discarded.
        let segs = segment_session("s", &series(24.99, 100.0), &cfg).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].frames(), 2000);
    }

    #[test]
    fn truncation() {
        let seg = segment_session("s", &series(20.0, 100.0), &SegmentationConfig::default()).unwrap().remove(0);
        let t = truncate_fixed(&seg, 10.0, 100.0).unwrap();
        assert_eq!(t.frames(), 1000);
        assert_eq!(t.values[[0, 999]], 999.0);

        let exact = truncate_fixed(&t, 10.0, 100.0).unwrap();
        assert_eq!(exact, t);

        let short = segment_session("s", &series(9.0, 100.0), &SegmentationConfig { min_s: 5.0, ..Default::default() })
            .unwrap()
            .remove(0);
        assert!(matches!(truncate_fixed(&short, 10.0, 100.0), Err(Error::TooShort { have: 900, need: 1000 })));
    }

    #[test]
    fn config_validation() {
        let mut c = SegmentationConfig::default();
        assert!(c.validate().is_ok());
        c.shift_s = 25.0;
        assert!(c.validate().is_err());
        c = SegmentationConfig { truncate_s: Some(12.0), ..Default::default() };
        assert!(c.validate().is_err());
        c = SegmentationConfig { min_s: 0.0, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn window_count_formula() {
        let cfg = SegmentationConfig::default();
        for tenths in (201..=900).step_by(7) {
            let secs = tenths as f64 / 10.0;
            let s = series(secs, 10.0);
            let segs = segment_session("s", &s, &cfg).unwrap();
            let dur = s.duration_s();
            let expect = ((dur - 20.0) / 5.0 + 1e-9).floor() as usize + 1;
            assert_eq!(segs.len(), expect, "duration {dur}");
            assert!(segs.iter().all(|g| g.frames() == 200));
        }
    }
}
