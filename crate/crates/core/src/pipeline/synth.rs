use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pipeline::config::PipelineConfig;
use crate::pipeline::{stream_seed, STREAM_SYNTH};
use crate::signal::io::{write_manifest, write_series_csv, ManifestEntry};
use crate::signal::make_labeled_dataset;

/// Generates the labelled synthetic corpus into `data_dir`: one CSV per
/// session under `sessions/` plus `manifest.json`. Returns the manifest path.
pub fn run_synth(cfg: &PipelineConfig, data_dir: &Path) -> Result<PathBuf> {
    cfg.validate()?;
    let s = &cfg.synth;
    let sessions = make_labeled_dataset::<f64>(
        &s.depressed.to_synth(cfg.frame_rate_hz),
        &s.not_depressed.to_synth(cfg.frame_rate_hz),
        s.sessions,
        s.duration_range_s,
        stream_seed(cfg.seed, STREAM_SYNTH),
    )?;

    let session_dir = data_dir.join("sessions");
    std::fs::create_dir_all(&session_dir).map_err(|e| Error::io(&session_dir, e))?;
    let mut entries = Vec::with_capacity(sessions.len());
    for session in &sessions {
        let id = &session.label.session_id;
        let rel = PathBuf::from("sessions").join(format!("{id}.csv"));
        write_series_csv(&data_dir.join(&rel), &session.series)?;
        entries.push(ManifestEntry { session_id: id.clone(), csv_path: rel, hamd: session.label.hamd as i64 });
    }
    let manifest = data_dir.join("manifest.json");
    write_manifest(&manifest, &entries)?;
    log::info!("wrote {} sessions to {}", entries.len(), data_dir.display());
    Ok(manifest)
}
