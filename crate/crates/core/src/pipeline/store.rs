use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::acf::AcfMethod;
use crate::error::{Error, Result};
use crate::signal::Class;

/// Where each stage reads and writes below the output root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn data_dir(&self) -> PathBuf {
        self.root.join("data")
    }

    pub fn manifest(&self) -> PathBuf {
        self.data_dir().join("manifest.json")
    }

    pub fn features_dir(&self) -> PathBuf {
        self.root.join("features")
    }

    pub fn model_dir(&self) -> PathBuf {
        self.root.join("model")
    }

    pub fn eval_dir(&self) -> PathBuf {
        self.root.join("eval")
    }

    pub fn plots_dir(&self) -> PathBuf {
        self.root.join("plots")
    }
}

pub const FEATURE_INDEX: &str = "index.json";
pub const CHECKPOINT: &str = "model.segn";
pub const TRAIN_LOG: &str = "train_log.csv";
pub const TRAIN_SUMMARY: &str = "train_summary.json";
pub const SPLITS: &str = "splits.json";
pub const METRICS_JSON: &str = "metrics.json";
pub const METRICS_TXT: &str = "metrics.txt";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Ok,
    /// Shorter than the minimum segment duration.
    Discarded,
    /// Extraction failed on this session; the reason is in `note`.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentEntry {
    /// Path of the `.acf` file relative to the feature directory.
    pub file: String,
    pub start_frame: usize,
    pub frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionFeatures {
    pub session_id: String,
    pub hamd: i64,
    pub class: Class,
    pub duration_s: f64,
    pub status: SessionStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub segments: Vec<SegmentEntry>,
}

/// Contents of `features/index.json`: the segment to session mapping that
/// training and aggregation rely on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureIndex {
    pub channels: usize,
    pub max_delay: usize,
    pub method: AcfMethod,
    pub frame_rate_hz: f64,
    pub sessions: Vec<SessionFeatures>,
}

impl FeatureIndex {
    pub fn session(&self, id: &str) -> Option<&SessionFeatures> {
        self.sessions.iter().find(|s| s.session_id == id)
    }

    pub fn usable(&self) -> impl Iterator<Item = &SessionFeatures> {
        self.sessions.iter().filter(|s| s.status == SessionStatus::Ok && !s.segments.is_empty())
    }
}

/// Session ids of each split, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub seed: u64,
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
