use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acf::acf_to_model_input;
use crate::acf::io::read_acf_bin;
use crate::error::{Error, Result};
use crate::net::{train, write_checkpoint, EpochLog, Sample, Validation};
use crate::pipeline::config::{PipelineConfig, SplitConfig};
use crate::pipeline::store::{
    read_json, write_file, write_json, FeatureIndex, SessionFeatures, Splits, CHECKPOINT, FEATURE_INDEX, SPLITS,
    TRAIN_LOG, TRAIN_SUMMARY,
};
use crate::pipeline::{stream_seed, STREAM_SPLIT};
use crate::signal::Class;

/// Stratified split of session ids into train/validation/test. Every class
/// keeps at least one training session; shares are rounded per class.
pub fn split_sessions(sessions: &[(&str, Class)], split: &SplitConfig, seed: u64) -> Splits {
    let total = split.train + split.validation + split.test;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Splits { seed, train: Vec::new(), validation: Vec::new(), test: Vec::new() };
    for class in [Class::Depressed, Class::NotDepressed] {
        let mut ids: Vec<&str> = sessions.iter().filter(|s| s.1 == class).map(|s| s.0).collect();
        ids.sort_unstable();
        ids.shuffle(&mut rng);
        let n = ids.len();
        let share = |f: f64| (n as f64 * f / total).round() as usize;
        let test = share(split.test).min(n.saturating_sub(1));
        let validation = share(split.validation).min(n.saturating_sub(1 + test));
        out.test.extend(ids[..test].iter().map(|s| s.to_string()));
        out.validation.extend(ids[test..test + validation].iter().map(|s| s.to_string()));
        out.train.extend(ids[test + validation..].iter().map(|s| s.to_string()));
    }
    out.train.sort();
    out.validation.sort();
    out.test.sort();
    out
}

/// Loads every segment of the given sessions as classifier inputs, in order.
pub fn load_samples(features_dir: &Path, sessions: &[&SessionFeatures]) -> Result<Vec<Sample<f64>>> {
    let per_session: Vec<Vec<Sample<f64>>> = sessions
        .par_iter()
        .map(|s| {
            s.segments
                .iter()
                .map(|seg| {
                    let acf = read_acf_bin::<f64>(&features_dir.join(&seg.file))?;
                    Ok(Sample { session_id: s.session_id.clone(), input: acf_to_model_input(&acf), class: s.class })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(per_session.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub stopped_early: bool,
    pub class_weights: [f64; 2],
    pub train_sessions: usize,
    pub validation_sessions: usize,
    pub train_segments: usize,
    pub validation_segments: usize,
    pub best_val_loss: Option<f64>,
    pub best_val_uar: Option<f64>,
}

fn lookup<'a>(index: &'a FeatureIndex, ids: &[String]) -> Vec<&'a SessionFeatures> {
    ids.iter().filter_map(|id| index.session(id)).collect()
}

/// Splits sessions, trains the segment classifier with early stopping on the
/// validation sessions, and writes the checkpoint, log, splits and summary
/// into `model_dir`.
pub fn run_train(cfg: &PipelineConfig, features_dir: &Path, model_dir: &Path) -> Result<TrainSummary> {
    cfg.validate()?;
    let index: FeatureIndex = read_json(&features_dir.join(FEATURE_INDEX))?;
    let usable: Vec<(&str, Class)> = index.usable().map(|s| (s.session_id.as_str(), s.class)).collect();
    for class in [Class::Depressed, Class::NotDepressed] {
        if !usable.iter().any(|s| s.1 == class) {
            return Err(Error::SingleClassDataset);
        }
    }
    let splits = split_sessions(&usable, &cfg.split, stream_seed(cfg.seed, STREAM_SPLIT));
    write_json(&model_dir.join(SPLITS), &splits)?;

    let train_samples = load_samples(features_dir, &lookup(&index, &splits.train))?;
    let val_samples = load_samples(features_dir, &lookup(&index, &splits.validation))?;
    let validation = if val_samples.is_empty() { Validation::None } else { Validation::Provided(&val_samples) };
    log::info!(
        "training on {} segments ({} sessions), validating on {} ({} sessions)",
        train_samples.len(),
        splits.train.len(),
        val_samples.len(),
        splits.validation.len()
    );

    let outcome = train(&cfg.model, &cfg.effective_train(), &train_samples, validation)?;
    write_checkpoint(&model_dir.join(CHECKPOINT), &outcome.params)?;
    write_file(&model_dir.join(TRAIN_LOG), EpochLog::to_csv(&outcome.log).as_bytes())?;

    let best = outcome.log.iter().find(|e| e.epoch == outcome.best_epoch);
    let summary = TrainSummary {
        epochs_run: outcome.log.len(),
        best_epoch: outcome.best_epoch,
        stopped_early: outcome.stopped_early,
        class_weights: outcome.class_weights,
        train_sessions: splits.train.len(),
        validation_sessions: splits.validation.len(),
        train_segments: train_samples.len(),
        validation_segments: val_samples.len(),
        best_val_loss: best.and_then(|e| e.val_loss),
        best_val_uar: best.and_then(|e| e.val_uar),
    };
    write_json(&model_dir.join(TRAIN_SUMMARY), &summary)?;
    Ok(summary)
}
