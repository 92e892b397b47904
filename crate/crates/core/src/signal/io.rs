//! CSV time-series ingestion and the JSON dataset manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::MultiChannelSeries;
use crate::Scalar;

/// Name of the optional leading time column, which is skipped on read.
pub const TIME_COLUMN: &str = "t_s";

/// Reads a series from CSV: a header of channel names, then one row per frame.
pub fn read_series_csv<T: Scalar>(path: &Path, frame_rate_hz: f64) -> Result<MultiChannelSeries<T>> {
    let csv_err = |source| Error::Csv { path: path.to_owned(), source };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err)?;
    let header = reader.headers().map_err(csv_err)?.clone();
    let skip = usize::from(header.get(0) == Some(TIME_COLUMN));
    let names: Vec<String> = header.iter().skip(skip).map(str::to_owned).collect();
    let m = names.len();
    if m == 0 {
        return Err(Error::Format { path: path.to_owned(), msg: "no channel columns".into() });
    }

    let mut flat: Vec<T> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        if record.len() != m + skip {
            return Err(Error::Format {
                path: path.to_owned(),
                msg: format!("row {} has {} fields, expected {}", row_idx + 2, record.len(), m + skip),
            });
        }
        for field in record.iter().skip(skip) {
            let v: f64 = field.parse().map_err(|_| Error::Format {
                path: path.to_owned(),
                msg: format!("row {}: `{field}` is not a number", row_idx + 2),
            })?;
            flat.push(T::of(v));
        }
    }
    let n = flat.len() / m;
    // Rows were read frame-major; transpose into channel-major storage.
    let values = Array2::from_shape_fn((m, n), |(i, t)| flat[t * m + i]);
    MultiChannelSeries::new(names, frame_rate_hz, values)
}

/// Writes a series as CSV with a leading `t_s` column.
pub fn write_series_csv<T: Scalar>(path: &Path, series: &MultiChannelSeries<T>) -> Result<()> {
    let mut out = String::new();
    out.push_str(TIME_COLUMN);
    for name in series.channel_names() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let rate = series.frame_rate_hz();
    for t in 0..series.frames() {
        out.push_str(&format!("{}", t as f64 / rate));
        for i in 0..series.channels() {
            // `{:?}` on f64 prints the shortest representation that round-trips.
            out.push_str(&format!(",{:?}", series.values()[[i, t]].as_f64()));
        }
        out.push('\n');
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub session_id: String,
    /// Relative paths resolve against the manifest's directory.
    pub csv_path: PathBuf,
    pub hamd: i64,
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

pub fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let text = serde_json::to_string_pretty(entries).map_err(|e| Error::json(path, e))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Resolves an entry's CSV path relative to the manifest that lists it.
pub fn resolve_csv(manifest: &Path, entry: &ManifestEntry) -> PathBuf {
    if entry.csv_path.is_absolute() {
        entry.csv_path.clone()
    } else {
        manifest.parent().unwrap_or(Path::new(".")).join(&entry.csv_path)
    }
}
