use std::path::Path;

use rayon::prelude::*;

use crate::acf::io::{write_acf_bin, write_acf_csv};
use crate::acf::{acf_matrix_fast, acf_matrix_naive, AcfMatrix, AcfMethod};
use crate::error::{Error, Result};
use crate::pipeline::config::{PipelineConfig, StandardizeScope};
use crate::pipeline::store::{write_json, FeatureIndex, SegmentEntry, SessionFeatures, SessionStatus, FEATURE_INDEX};
use crate::signal::io::{read_manifest, read_series_csv, resolve_csv, ManifestEntry};
use crate::signal::{hamd_label, segment_session, standardize_channels, standardize_rows, truncate_fixed, Segment};

fn segment_features(cfg: &PipelineConfig, segment: &Segment<f64>) -> Result<AcfMatrix<f64>> {
    let mut segment = match cfg.segmentation.truncate_s {
        Some(t) => truncate_fixed(segment, t, cfg.frame_rate_hz)?,
        None => segment.clone(),
    };
    if cfg.standardize == StandardizeScope::Segment {
        let names: Vec<String> = (1..=segment.channels()).map(|i| format!("ch{i}")).collect();
        segment.values = standardize_rows(&segment.values, &names)?;
    }
    match cfg.acf_method {
        AcfMethod::Naive => acf_matrix_naive(&segment, &cfg.acf),
        AcfMethod::Fast => acf_matrix_fast(&segment, &cfg.acf),
    }
}

struct Extracted {
    features: SessionFeatures,
    matrices: Vec<AcfMatrix<f64>>,
}

fn extract_session(cfg: &PipelineConfig, manifest: &Path, entry: &ManifestEntry) -> Result<Extracted> {
    let class = hamd_label(entry.hamd)?;
    let series = read_series_csv::<f64>(&resolve_csv(manifest, entry), cfg.frame_rate_hz)?;
    let mut features = SessionFeatures {
        session_id: entry.session_id.clone(),
        hamd: entry.hamd,
        class,
        duration_s: series.duration_s(),
        status: SessionStatus::Ok,
        note: None,
        segments: Vec::new(),
    };

    let processed = match cfg.standardize {
        StandardizeScope::Recording => standardize_channels(&series),
        StandardizeScope::Segment => Ok(series),
    };
    let result = processed
        .and_then(|s| segment_session(&entry.session_id, &s, &cfg.segmentation))
        .and_then(|segments| {
            let matrices = segments.iter().map(|seg| segment_features(cfg, seg)).collect::<Result<Vec<_>>>()?;
            Ok((segments, matrices))
        });

    match result {
        Ok((segments, matrices)) => {
            if segments.is_empty() {
                log::warn!(
                    "session {} lasts {:.2} s, below the {} s minimum; discarded",
                    entry.session_id,
                    features.duration_s,
                    cfg.segmentation.min_s
                );
                features.status = SessionStatus::Discarded;
            }
            features.segments = segments
                .iter()
                .enumerate()
                .map(|(k, seg)| SegmentEntry {
                    file: format!("{}/seg{k:03}.acf", entry.session_id),
                    start_frame: seg.start_frame,
                    frames: seg.frames(),
                })
                .collect();
            Ok(Extracted { features, matrices })
        }
        Err(e @ (Error::ConstantChannel(_) | Error::DelayTooLarge { .. } | Error::TooShort { .. })) => {
            log::warn!("session {} skipped: {e}", entry.session_id);
            features.status = SessionStatus::Skipped;
            features.note = Some(format!("{}: {e}", e.code()));
            Ok(Extracted { features, matrices: Vec::new() })
        }
        Err(e) => Err(e),
    }
}

/// Standardizes, segments and computes one ACF matrix per segment for every
/// session in the manifest, writing `<session>/segNNN.acf` files and
/// `index.json` under `features_dir`.
///
/// Sessions are processed in parallel; the index lists them in manifest order.
pub fn run_extract(cfg: &PipelineConfig, manifest: &Path, features_dir: &Path) -> Result<FeatureIndex> {
    cfg.validate()?;
    let entries = read_manifest(manifest)?;
    if entries.is_empty() {
        return Err(Error::Format { path: manifest.to_owned(), msg: "manifest lists no sessions".into() });
    }
    let extracted: Vec<Extracted> =
        entries.par_iter().map(|e| extract_session(cfg, manifest, e)).collect::<Result<_>>()?;

    let mut channels = None;
    for ex in &extracted {
        for (entry, acf) in ex.features.segments.iter().zip(&ex.matrices) {
            match channels {
                None => channels = Some(acf.channels()),
                Some(m) if m != acf.channels() => {
                    return Err(Error::ShapeMismatch(format!(
                        "session {} has {} channels, earlier sessions {m}",
                        ex.features.session_id,
                        acf.channels()
                    )))
                }
                Some(_) => {}
            }
            let path = features_dir.join(&entry.file);
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            write_acf_bin(&path, acf)?;
            if cfg.write_acf_csv {
                write_acf_csv(&path.with_extension("csv"), acf)?;
            }
        }
    }

    let index = FeatureIndex {
        channels: channels.unwrap_or(0),
        max_delay: cfg.acf.max_delay_frames,
        method: cfg.acf_method,
        frame_rate_hz: cfg.frame_rate_hz,
        sessions: extracted.into_iter().map(|e| e.features).collect(),
    };
    write_json(&features_dir.join(FEATURE_INDEX), &index)?;
    let segments: usize = index.sessions.iter().map(|s| s.segments.len()).sum();
    log::info!("extracted {segments} segments from {} sessions", index.sessions.len());
    Ok(index)
}
