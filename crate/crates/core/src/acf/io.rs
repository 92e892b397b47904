//! ACF persistence: a labelled CSV for inspection and the `ACF1` binary
//! container for pipeline use.
//!
//! Binary layout, all little-endian: magic `ACF1`, `u32` channel count M,
//! `u32` max delay D, then M²·(D+1) `f64` values in row-major order.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::acf::AcfMatrix;
use crate::error::{Error, Result};
use crate::Scalar;

pub const ACF_MAGIC: &[u8; 4] = b"ACF1";

pub fn encode_acf<T: Scalar>(acf: &AcfMatrix<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + acf.rows().len() * 8);
    out.extend_from_slice(ACF_MAGIC);
    out.extend_from_slice(&(acf.channels() as u32).to_le_bytes());
    out.extend_from_slice(&(acf.max_delay() as u32).to_le_bytes());
    for v in acf.rows().iter() {
        out.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    out
}

pub fn decode_acf<T: Scalar>(bytes: &[u8]) -> std::result::Result<AcfMatrix<T>, String> {
    if bytes.len() < 12 || &bytes[..4] != ACF_MAGIC {
        return Err("missing ACF1 header".into());
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let (m, d) = (word(4), word(8));
    let count = m * m * (d + 1);
    let body = &bytes[12..];
    if body.len() != count * 8 {
        return Err(format!("expected {count} values for M={m}, D={d}, found {} bytes", body.len()));
    }
    let values: Vec<T> = body.chunks_exact(8).map(|c| T::of(f64::from_le_bytes(c.try_into().unwrap()))).collect();
    let rows = Array2::from_shape_vec((m * m, d + 1), values).map_err(|e| e.to_string())?;
    AcfMatrix::new(m, rows).map_err(|e| e.to_string())
}

pub fn write_acf_bin<T: Scalar>(path: &Path, acf: &AcfMatrix<T>) -> Result<()> {
    fs::write(path, encode_acf(acf)).map_err(|e| Error::io(path, e))
}

pub fn read_acf_bin<T: Scalar>(path: &Path) -> Result<AcfMatrix<T>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_acf(&bytes).map_err(|msg| Error::Format { path: path.to_owned(), msg })
}

/// CSV with header `pair,d0,..,dD` and one row per ordered pair labelled
/// `i:j` with 1-based channel numbers.
pub fn acf_to_csv<T: Scalar>(acf: &AcfMatrix<T>) -> String {
    let mut out = String::from("pair");
    for d in 0..=acf.max_delay() {
        out.push_str(&format!(",d{d}"));
    }
    out.push('\n');
    for (k, row) in acf.rows().outer_iter().enumerate() {
        let (i, j) = acf.pair_of(k);
        out.push_str(&format!("{}:{}", i + 1, j + 1));
        for v in row {
            out.push_str(&format!(",{:?}", v.as_f64()));
        }
        out.push('\n');
    }
    out
}

pub fn write_acf_csv<T: Scalar>(path: &Path, acf: &AcfMatrix<T>) -> Result<()> {
    fs::write(path, acf_to_csv(acf)).map_err(|e| Error::io(path, e))
}

pub fn read_acf_csv<T: Scalar>(path: &Path) -> Result<AcfMatrix<T>> {
    let fmt = |msg: String| Error::Format { path: path.to_owned(), msg };
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| fmt("empty file".into()))?;
    let cols = header.split(',').count().saturating_sub(1);
    let mut values = Vec::new();
    let mut rows = 0;
    for (n, line) in lines.enumerate() {
        let mut fields = line.split(',');
        fields.next();
        for f in fields {
            let v: f64 = f.parse().map_err(|_| fmt(format!("line {}: bad value `{f}`", n + 2)))?;
            values.push(T::of(v));
        }
        rows += 1;
    }
    if cols == 0 || values.len() != rows * cols {
        return Err(fmt("ragged rows".into()));
    }
    let arr = Array2::from_shape_vec((rows, cols), values).map_err(|e| fmt(e.to_string()))?;
    AcfMatrix::from_model_input(arr).map_err(|e| fmt(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(m: usize, d: usize) -> AcfMatrix<f64> {
        AcfMatrix::new(m, Array2::from_shape_fn((m * m, d + 1), |(k, j)| (k as f64 * 0.37 - j as f64).sin())).unwrap()
    }

    #[test]
    fn binary_layout() {
        let bytes = encode_acf(&sample(2, 1));
        assert_eq!(&bytes[..4], b"ACF1");
        assert_eq!(&bytes[4..8], &2u32.to_le_bytes());
        assert_eq!(&bytes[8..12], &1u32.to_le_bytes());
        assert_eq!(bytes.len(), 12 + 8 * 8);
        assert_eq!(&bytes[12..20], &0.0f64.to_le_bytes());
        assert!(decode_acf::<f64>(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_acf::<f64>(b"ACF2\0\0\0\0\0\0\0\0").is_err());
    }

    #[test]
    fn csv_labels() {
        let text = acf_to_csv(&sample(2, 2));
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "pair,d0,d1,d2");
        let labels: Vec<_> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(labels, ["1:1", "1:2", "2:1", "2:2"]);
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let acf = sample(3, 7);
        write_acf_bin(&dir.path().join("a.bin"), &acf).unwrap();
        write_acf_csv(&dir.path().join("a.csv"), &acf).unwrap();
        assert_eq!(read_acf_bin::<f64>(&dir.path().join("a.bin")).unwrap(), acf);
        assert_eq!(read_acf_csv::<f64>(&dir.path().join("a.csv")).unwrap(), acf);
    }

    proptest! {
        #[test]
        fn binary_round_trip(m in 1usize..5, d in 0usize..12, seed in any::<u32>()) {
            let acf = AcfMatrix::new(m, Array2::from_shape_fn((m * m, d + 1), |(k, j)| {
                ((seed as f64) * 1e-3 + k as f64 * 1.7 - j as f64 * 0.3).cos()
            })).unwrap();
            prop_assert_eq!(decode_acf::<f64>(&encode_acf(&acf)).unwrap(), acf);
        }
    }
}
