use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{roc_curve, MetricsReport, MetricsTable};
use crate::net::{model_forward, read_checkpoint, ModelParams};
use crate::pipeline::config::PipelineConfig;
use crate::pipeline::store::{
    read_json, write_file, write_json, FeatureIndex, SessionFeatures, Splits, CHECKPOINT, FEATURE_INDEX, METRICS_JSON,
    METRICS_TXT, SPLITS,
};
use crate::pipeline::train::load_samples;
use crate::pipeline::{stream_seed, STREAM_LIFT, STREAM_TIE};
use crate::signal::Class;
use crate::vote::{aggregate_session, exact_pv_recall, AggregationPolicy, VoteParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionResult {
    pub session_id: String,
    pub class: Class,
    pub segments: usize,
    /// Segments whose argmax is the depressed class.
    pub depressed_votes: usize,
    pub decision: Class,
    /// Depressed-class score used for the session ROC.
    pub score: f64,
}

/// Predicted versus observed session recall of one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassLift {
    pub class: Class,
    pub sessions: usize,
    pub segment_recall: f64,
    /// Mean over this class's test sessions of the exact plurality-vote
    /// recall at the measured segment recall and the session's segment count.
    pub expected_session_recall: f64,
    pub mc_low: f64,
    pub mc_high: f64,
    pub observed_session_recall: f64,
    pub consistent: bool,
}

/// Whether the session-level gain matches what independent segment errors
/// at the measured recalls would produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftCheck {
    pub replicates: u64,
    pub per_class: Vec<ClassLift>,
    pub segment_uar: f64,
    pub expected_session_uar: f64,
    pub uar_mc_low: f64,
    pub uar_mc_high: f64,
    pub observed_session_uar: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub policy: AggregationPolicy,
    pub test_sessions: usize,
    pub test_segments: usize,
    pub segment: MetricsReport,
    pub session: MetricsReport,
    pub segment_roc: Vec<(f64, f64)>,
    pub session_roc: Vec<(f64, f64)>,
    pub lift: LiftCheck,
    pub sessions: Vec<SessionResult>,
}

impl EvalReport {
    pub fn to_text(&self) -> String {
        let mut out = MetricsTable(&[("Segment-level", &self.segment), ("Session-level", &self.session)]).to_string();
        out.push('\n');
        out.push_str(&format!(
            "test: {} sessions, {} segments, aggregation {:?}\n",
            self.test_sessions, self.test_segments, self.policy
        ));
        out.push_str("recall   segment  session  expected  95% MC interval\n");
        for c in &self.lift.per_class {
            out.push_str(&format!(
                "{:<7}  {:>7.4}  {:>7.4}  {:>8.4}  [{:.4}, {:.4}]\n",
                c.class.short(),
                c.segment_recall,
                c.observed_session_recall,
                c.expected_session_recall,
                c.mc_low,
                c.mc_high
            ));
        }
        out.push_str(&format!(
            "{:<7}  {:>7.4}  {:>7.4}  {:>8.4}  [{:.4}, {:.4}]\nlift consistent: {}\n",
            "UAR",
            self.lift.segment_uar,
            self.lift.observed_session_uar,
            self.lift.expected_session_uar,
            self.lift.uar_mc_low,
            self.lift.uar_mc_high,
            self.lift.consistent
        ));
        out
    }
}

// Nearest-rank quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Simulates the test set `replicates` times with every segment of a class-c
/// session independently correct with probability `segment_recall[c]`, and
/// compares the observed session recalls with the central 95% of outcomes.
pub fn lift_check(
    sessions: &[SessionResult],
    segment_recall: [f64; 2],
    replicates: u64,
    seed: u64,
) -> Result<LiftCheck> {
    let classes = [Class::Depressed, Class::NotDepressed];
    let of_class = |c: Class| sessions.iter().filter(move |s| s.class == c);
    let counts = classes.map(|c| of_class(c).count());
    if counts.contains(&0) {
        return Err(Error::MissingClass(if counts[0] == 0 { "D" } else { "ND" }));
    }

    let draws: Vec<[f64; 2]> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r);
            let mut correct = [0usize; 2];
            for s in sessions {
                let c = s.class.index();
                let right = (0..s.segments).filter(|_| rng.random::<f64>() < segment_recall[c]).count();
                let wrong = s.segments - right;
                let tie_coin: bool = rng.random();
                if right > wrong || (right == wrong && tie_coin) {
                    correct[c] += 1;
                }
            }
            [0, 1].map(|c| correct[c] as f64 / counts[c] as f64)
        })
        .collect();

    let mut per_class = Vec::new();
    let mut sorted_uar: Vec<f64> = draws.iter().map(|d| (d[0] + d[1]) / 2.0).collect();
    sorted_uar.sort_by(f64::total_cmp);
    for class in classes {
        let c = class.index();
        let mut sorted: Vec<f64> = draws.iter().map(|d| d[c]).collect();
        sorted.sort_by(f64::total_cmp);
        let expected = of_class(class)
            .map(|s| Ok(exact_pv_recall(&VoteParams::new(segment_recall[c], s.segments)?)))
            .sum::<Result<f64>>()?
            / counts[c] as f64;
        let observed = of_class(class).filter(|s| s.decision == class).count() as f64 / counts[c] as f64;
        let (lo, hi) = (quantile(&sorted, 0.025), quantile(&sorted, 0.975));
        per_class.push(ClassLift {
            class,
            sessions: counts[c],
            segment_recall: segment_recall[c],
            expected_session_recall: expected,
            mc_low: lo,
            mc_high: hi,
            observed_session_recall: observed,
            consistent: (lo..=hi).contains(&observed),
        });
    }
    let observed_uar = (per_class[0].observed_session_recall + per_class[1].observed_session_recall) / 2.0;
    let (lo, hi) = (quantile(&sorted_uar, 0.025), quantile(&sorted_uar, 0.975));
    Ok(LiftCheck {
        replicates,
        segment_uar: (segment_recall[0] + segment_recall[1]) / 2.0,
        expected_session_uar: (per_class[0].expected_session_recall + per_class[1].expected_session_recall) / 2.0,
        uar_mc_low: lo,
        uar_mc_high: hi,
        observed_session_uar: observed_uar,
        consistent: per_class.iter().all(|c| c.consistent) && (lo..=hi).contains(&observed_uar),
        per_class,
    })
}

fn argmax(p: &[f64]) -> Class {
    if p[1] > p[0] {
        Class::NotDepressed
    } else {
        Class::Depressed
    }
}

/// Scores the held-out test sessions at segment and session level and
/// writes `metrics.json` and `metrics.txt` into `eval_dir`.
pub fn run_eval(cfg: &PipelineConfig, features_dir: &Path, model_dir: &Path, eval_dir: &Path) -> Result<EvalReport> {
    cfg.validate()?;
    let params: ModelParams<f64> = read_checkpoint(&model_dir.join(CHECKPOINT))?;
    let splits: Splits = read_json(&model_dir.join(SPLITS))?;
    let index: FeatureIndex = read_json(&features_dir.join(FEATURE_INDEX))?;
    let test: Vec<&SessionFeatures> =
        splits.test.iter().filter_map(|id| index.session(id)).filter(|s| !s.segments.is_empty()).collect();
    if test.is_empty() {
        return Err(Error::MissingSplit("test".into()));
    }

    let per_session: Vec<(SessionResult, Vec<[f64; 2]>)> = test
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            let samples = load_samples(features_dir, &[*s])?;
            let probs = samples
                .iter()
                .map(|x| model_forward(&params, &x.input).map(|p| [p[0], p[1]]))
                .collect::<Result<Vec<_>>>()?;
            let decision = aggregate_session(&probs, cfg.aggregation, stream_seed(cfg.seed, STREAM_TIE + k as u64))?;
            let depressed_votes = probs.iter().filter(|p| argmax(&p[..]) == Class::Depressed).count();
            let score = match cfg.aggregation {
                AggregationPolicy::Pv => depressed_votes as f64 / probs.len() as f64,
                AggregationPolicy::MeanProb => probs.iter().map(|p| p[0]).sum::<f64>() / probs.len() as f64,
            };
            let result = SessionResult {
                session_id: s.session_id.clone(),
                class: s.class,
                segments: probs.len(),
                depressed_votes,
                decision,
                score,
            };
            Ok((result, probs))
        })
        .collect::<Result<_>>()?;

    let mut seg_labels = Vec::new();
    let mut seg_preds = Vec::new();
    let mut seg_scores = Vec::new();
    for (s, probs) in &per_session {
        for p in probs {
            seg_labels.push(s.class);
            seg_preds.push(argmax(&p[..]));
            seg_scores.push(p[0]);
        }
    }
    let sessions: Vec<SessionResult> = per_session.into_iter().map(|(s, _)| s).collect();
    let sess_labels: Vec<Class> = sessions.iter().map(|s| s.class).collect();
    let sess_preds: Vec<Class> = sessions.iter().map(|s| s.decision).collect();
    let sess_scores: Vec<f64> = sessions.iter().map(|s| s.score).collect();

    let segment = MetricsReport::compute(&seg_labels, &seg_preds, &seg_scores)?;
    let session = MetricsReport::compute(&sess_labels, &sess_preds, &sess_scores)?;
    let lift = lift_check(
        &sessions,
        [segment.recall_depressed, segment.recall_not_depressed],
        cfg.lift_replicates,
        stream_seed(cfg.seed, STREAM_LIFT),
    )?;
    let report = EvalReport {
        policy: cfg.aggregation,
        test_sessions: sessions.len(),
        test_segments: seg_labels.len(),
        segment_roc: roc_curve(&seg_labels, &seg_scores)?,
        session_roc: roc_curve(&sess_labels, &sess_scores)?,
        segment,
        session,
        lift,
        sessions,
    };
    write_json(&eval_dir.join(METRICS_JSON), &report)?;
    write_file(&eval_dir.join(METRICS_TXT), report.to_text().as_bytes())?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn session(class: Class, segments: usize, correct: bool) -> SessionResult {
        SessionResult {
            session_id: String::new(),
            class,
            segments,
            depressed_votes: 0,
            decision: if correct { class } else { class.other() },
            score: 0.0,
        }
    }

    #[test]
    fn perfect_segments_predict_perfect_sessions() {
        let sessions = vec![session(Class::Depressed, 5, true), session(Class::NotDepressed, 7, true)];
        let lift = lift_check(&sessions, [1.0, 1.0], 200, 0).unwrap();
        assert!(lift.consistent);
        assert_eq!((lift.uar_mc_low, lift.uar_mc_high), (1.0, 1.0));
        let wrong = vec![session(Class::Depressed, 5, false), session(Class::NotDepressed, 7, true)];
        assert!(!lift_check(&wrong, [1.0, 1.0], 200, 0).unwrap().consistent);
    }

    #[test]
    fn expected_recall_matches_closed_form() {
        let sessions = vec![session(Class::Depressed, 3, true), session(Class::NotDepressed, 1, true)];
        let lift = lift_check(&sessions, [0.6, 0.7], 1000, 1).unwrap();
        assert!((lift.per_class[0].expected_session_recall - 0.648).abs() < 1e-12);
        assert!((lift.per_class[1].expected_session_recall - 0.7).abs() < 1e-12);
        assert_eq!(lift, lift_check(&sessions, [0.6, 0.7], 1000, 1).unwrap());
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.025), 1.0);
        assert_eq!(quantile(&v, 0.975), 4.0);
        assert_eq!(quantile(&v, 0.5), 2.0);
    }
}
