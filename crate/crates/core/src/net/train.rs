use std::collections::BTreeMap;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{confusion, uar};
use crate::net::loss::weighted_cross_entropy;
use crate::net::{ModelConfig, ModelParams};
use crate::signal::{mix_seed, Class};
use crate::Scalar;

/// Per-class loss weights, or `"auto"` for inverse class frequency scaled to mean 1.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawWeights", into = "RawWeights")]
pub enum ClassWeights {
    #[default]
    Auto,
    /// Indexed by [`Class::index`].
    Fixed([f64; 2]),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawWeights {
    Name(String),
    Values([f64; 2]),
}

impl TryFrom<RawWeights> for ClassWeights {
    type Error = String;

    fn try_from(raw: RawWeights) -> std::result::Result<Self, String> {
        match raw {
            RawWeights::Name(s) if s == "auto" => Ok(ClassWeights::Auto),
            RawWeights::Name(s) => Err(format!("unknown class weighting `{s}`")),
            RawWeights::Values(w) if w.iter().all(|&v| v > 0.0 && v.is_finite()) => Ok(ClassWeights::Fixed(w)),
            RawWeights::Values(_) => Err("class weights must be positive".into()),
        }
    }
}

impl From<ClassWeights> for RawWeights {
    fn from(w: ClassWeights) -> Self {
        match w {
            ClassWeights::Auto => RawWeights::Name("auto".into()),
            ClassWeights::Fixed(v) => RawWeights::Values(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience_epochs: usize,
    pub class_weights: ClassWeights,
    pub seed: u64,
    /// Fraction of sessions held out when validation is [`Validation::AutoBySession`].
    pub validation_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 2e-5,
            batch_size: 128,
            max_epochs: 300,
            patience_epochs: 20,
            class_weights: ClassWeights::Auto,
            seed: 1729,
            validation_fraction: 0.2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("train: {m}")));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be > 0");
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return bad("batch_size and max_epochs must be >= 1");
        }
        if self.patience_epochs > self.max_epochs {
            return bad("patience_epochs must not exceed max_epochs");
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad("validation_fraction must lie in [0, 1)");
        }
        Ok(())
    }
}

/// One labelled classifier input.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub session_id: String,
    pub input: Array2<T>,
    pub class: Class,
}

pub enum Validation<'a, T> {
    /// No early stopping; train for `max_epochs`.
    None,
    Provided(&'a [Sample<T>]),
    /// Hold out `validation_fraction` of the sessions of each class. Whole
    /// sessions move, so overlapping windows never straddle the split.
    AutoBySession,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    pub val_uar: Option<f64>,
}

impl EpochLog {
    /// CSV with columns `epoch,train_loss,val_loss,val_uar`; missing values are empty.
    pub fn to_csv(log: &[EpochLog]) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        let mut out = String::from("epoch,train_loss,val_loss,val_uar\n");
        for e in log {
            out.push_str(&format!("{},{:?},{},{}\n", e.epoch, e.train_loss, opt(e.val_loss), opt(e.val_uar)));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    /// Parameters from the epoch with the lowest validation loss (or the last epoch).
    pub params: ModelParams<T>,
    pub log: Vec<EpochLog>,
    pub best_epoch: usize,
    pub stopped_early: bool,
    pub class_weights: [f64; 2],
}

/// Adam with the usual defaults β₁ = 0.9, β₂ = 0.999, ε = 1e-8.
pub struct Adam<T> {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: i32,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(params: &ModelParams<T>, learning_rate: f64) -> Self {
        let zeros: Vec<Vec<T>> = params.tensors().iter().map(|t| vec![T::zero(); t.len()]).collect();
        Self { learning_rate, beta1: 0.9, beta2: 0.999, epsilon: 1e-8, step: 0, m: zeros.clone(), v: zeros }
    }

    pub fn step(&mut self, params: &mut ModelParams<T>, grads: &ModelParams<T>) {
        self.step += 1;
        let (b1, b2) = (T::of(self.beta1), T::of(self.beta2));
        let c1 = T::of(1.0 - self.beta1.powi(self.step));
        let c2 = T::of(1.0 - self.beta2.powi(self.step));
        let (lr, eps) = (T::of(self.learning_rate), T::of(self.epsilon));
        let one = T::one();
        for (((p, g), m), v) in params.tensors_mut().into_iter().zip(grads.tensors()).zip(&mut self.m).zip(&mut self.v) {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (one - b1) * g[i];
                v[i] = b2 * v[i] + (one - b2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}

/// Inverse class frequency normalised so the two weights average 1.
/// A class absent from `classes` gets weight 1.
pub fn auto_class_weights(classes: impl IntoIterator<Item = Class>) -> [f64; 2] {
    let mut counts = [0usize; 2];
    classes.into_iter().for_each(|c| counts[c.index()] += 1);
    if counts.contains(&0) {
        return [1.0, 1.0];
    }
    let inv = [1.0 / counts[0] as f64, 1.0 / counts[1] as f64];
    let mean = (inv[0] + inv[1]) / 2.0;
    [inv[0] / mean, inv[1] / mean]
}

fn add_into<T: Scalar>(acc: &mut ModelParams<T>, g: &ModelParams<T>) {
    for (a, b) in acc.tensors_mut().into_iter().zip(g.tensors()) {
        a.iter_mut().zip(b).for_each(|(x, &y)| *x += y);
    }
}

fn scale<T: Scalar>(p: &mut ModelParams<T>, s: T) {
    p.tensors_mut().into_iter().for_each(|t| t.iter_mut().for_each(|x| *x *= s));
}

/// Splits samples by session: roughly `fraction` of each class's sessions go
/// to validation, at least one session per class stays in training.
pub(crate) fn split_by_session<T: Clone>(samples: &[Sample<T>], fraction: f64, seed: u64) -> (Vec<Sample<T>>, Vec<Sample<T>>) {
    let mut by_class: [Vec<&str>; 2] = [Vec::new(), Vec::new()];
    let mut session_class: BTreeMap<&str, Class> = BTreeMap::new();
    for s in samples {
        session_class.entry(&s.session_id).or_insert(s.class);
    }
    for (id, class) in &session_class {
        by_class[class.index()].push(id);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut held: Vec<&str> = Vec::new();
    for ids in by_class.iter_mut() {
        ids.shuffle(&mut rng);
        let take = ((ids.len() as f64 * fraction).round() as usize).min(ids.len().saturating_sub(1));
        held.extend(&ids[..take]);
    }
    let (val, train) = samples.iter().cloned().partition(|s| held.contains(&s.session_id.as_str()));
    (train, val)
}

/// Mean weighted cross-entropy and UAR of `params` on `samples`.
fn evaluate<T: Scalar>(params: &ModelParams<T>, samples: &[Sample<T>], weights: [f64; 2]) -> Result<(f64, Option<f64>)> {
    let results: Vec<(f64, Class)> = samples
        .par_iter()
        .map(|s| {
            let x = params.check_input(&s.input)?;
            let probs = params.forward_cached(&x, None).probs;
            let w = T::of(weights[s.class.index()]);
            let loss = weighted_cross_entropy(&probs, s.class.index(), w)?.loss.as_f64();
            let pred = if probs[1] > probs[0] { Class::NotDepressed } else { Class::Depressed };
            Ok((loss, pred))
        })
        .collect::<Result<_>>()?;
    let loss = results.iter().map(|r| r.0).sum::<f64>() / results.len() as f64;
    let labels: Vec<Class> = samples.iter().map(|s| s.class).collect();
    let preds: Vec<Class> = results.iter().map(|r| r.1).collect();
    let score = confusion(&labels, &preds).and_then(|cm| uar(&cm)).ok();
    Ok((loss, score))
}

/// Mini-batch Adam training with early stopping on validation loss.
///
/// Per-sample gradients of a batch may be computed in parallel; they are
/// summed in sample order so the result does not depend on thread count.
pub fn train<T: Scalar>(
    model_cfg: &ModelConfig,
    train_cfg: &TrainConfig,
    samples: &[Sample<T>],
    validation: Validation<'_, T>,
) -> Result<TrainOutcome<T>> {
    model_cfg.validate()?;
    train_cfg.validate()?;
    if model_cfg.classes != 2 {
        return Err(Error::Config("training supports two classes".into()));
    }
    let has = |c: Class| samples.iter().any(|s| s.class == c);
    if !(has(Class::Depressed) && has(Class::NotDepressed)) {
        return Err(Error::SingleClassDataset);
    }

    let (train_set, val_set): (Vec<Sample<T>>, Option<Vec<Sample<T>>>) = match validation {
        Validation::None => (samples.to_vec(), None),
        Validation::Provided(v) => (samples.to_vec(), (!v.is_empty()).then(|| v.to_vec())),
        Validation::AutoBySession => {
            let (t, v) = split_by_session(samples, train_cfg.validation_fraction, mix_seed(train_cfg.seed, 0x5eed));
            (t, (!v.is_empty()).then_some(v))
        }
    };

    let (train_weights, val_weights) = match &train_cfg.class_weights {
        ClassWeights::Fixed(w) => (*w, *w),
        ClassWeights::Auto => (
            auto_class_weights(train_set.iter().map(|s| s.class)),
            val_set.as_ref().map_or([1.0, 1.0], |v| auto_class_weights(v.iter().map(|s| s.class))),
        ),
    };

    let (c, l) = train_set[0].input.dim();
    let mut params = ModelParams::init(model_cfg, c, l, &mut ChaCha8Rng::seed_from_u64(train_cfg.seed))?;
    for s in &train_set {
        params.check_input(&s.input)?;
    }
    let mut adam = Adam::new(&params, train_cfg.learning_rate);

    let n = train_set.len();
    let mut log = Vec::new();
    let mut best = (f64::INFINITY, 0usize, params.clone());
    let mut since_best = 0;
    let mut stopped_early = false;
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 1..=train_cfg.max_epochs {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(mix_seed(train_cfg.seed, epoch as u64)));
        let mut epoch_loss = 0.0;
        for batch in order.chunks(train_cfg.batch_size) {
            let per_sample: Vec<(f64, ModelParams<T>)> = batch
                .par_iter()
                .map(|&i| {
                    let s = &train_set[i];
                    let x = params.check_input(&s.input).expect("checked above");
                    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(train_cfg.seed, (epoch * n + i) as u64));
                    let cache = params.forward_cached(&x, Some(&mut rng));
                    let w = T::of(train_weights[s.class.index()]);
                    let loss = weighted_cross_entropy(&cache.probs, s.class.index(), w).expect("valid label").loss;
                    (loss.as_f64(), params.backward_cached(&x, &cache, s.class.index(), w))
                })
                .collect();
            let mut grad = params.zeros_like();
            for (loss, g) in &per_sample {
                epoch_loss += loss;
                add_into(&mut grad, g);
            }
            scale(&mut grad, T::one() / T::of_usize(batch.len()));
            adam.step(&mut params, &grad);
        }
        let train_loss = epoch_loss / n as f64 + params.l2_penalty().as_f64();

        let (val_loss, val_uar) = match &val_set {
            Some(v) => {
                let (loss, score) = evaluate(&params, v, val_weights)?;
                (Some(loss), score)
            }
            None => (None, None),
        };
        log::debug!("epoch {epoch}: train {train_loss:.5} val {val_loss:?} uar {val_uar:?}");
        log.push(EpochLog { epoch, train_loss, val_loss, val_uar });

        match val_loss {
            Some(v) if v < best.0 => {
                best = (v, epoch, params.clone());
                since_best = 0;
            }
            Some(_) => {
                since_best += 1;
                if since_best >= train_cfg.patience_epochs {
                    stopped_early = epoch < train_cfg.max_epochs;
                    break;
                }
            }
            None => best = (f64::INFINITY, epoch, params.clone()),
        }
    }

    Ok(TrainOutcome { params: best.2, log, best_epoch: best.1, stopped_early, class_weights: train_weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn tiny() -> ModelConfig {
        ModelConfig {
            parallel_kernel: 3,
            parallel_filters: 2,
            seq_filters: vec![2, 2],
            dense_units: vec![4, 3],
            ..Default::default()
        }
    }

    fn blobs(per_class: usize, seed: u64) -> Vec<Sample<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for i in 0..2 * per_class {
            let class = if i % 2 == 0 { Class::Depressed } else { Class::NotDepressed };
            let centre = if class == Class::Depressed { 0.5 } else { -0.5 };
            let input = Array2::from_shape_fn((4, 8), |_| centre + rng.random_range(-0.3..0.3));
            out.push(Sample { session_id: format!("s{}", i % 10), input, class });
        }
        out
    }

    #[test]
    fn weights_serde() {
        let auto: ClassWeights = serde_json::from_str("\"auto\"").unwrap();
        assert_eq!(auto, ClassWeights::Auto);
        let fixed: ClassWeights = serde_json::from_str("[2.0, 0.5]").unwrap();
        assert_eq!(fixed, ClassWeights::Fixed([2.0, 0.5]));
        assert!(serde_json::from_str::<ClassWeights>("\"balanced\"").is_err());
        assert!(serde_json::from_str::<ClassWeights>("[0.0, 1.0]").is_err());
        assert_eq!(serde_json::to_string(&ClassWeights::Auto).unwrap(), "\"auto\"");
    }

    #[test]
    fn auto_weights() {
        use Class::*;
        let w = auto_class_weights([Depressed, NotDepressed, NotDepressed, NotDepressed]);
        assert!((w[0] - 1.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
        assert_eq!(auto_class_weights([Depressed, NotDepressed]), [1.0, 1.0]);
    }

    #[test]
    fn single_class_rejected() {
        let data: Vec<_> = blobs(4, 0).into_iter().filter(|s| s.class == Class::Depressed).collect();
        let r = train(&tiny(), &TrainConfig::default(), &data, Validation::None);
        assert!(matches!(r, Err(Error::SingleClassDataset)));
    }

    #[test]
    fn separable_blobs_are_learned() {
        let data = blobs(20, 1);
        let cfg = TrainConfig { learning_rate: 1e-2, batch_size: 8, max_epochs: 100, ..Default::default() };
        let out = train(&tiny(), &cfg, &data, Validation::None).unwrap();
        let correct = data
            .iter()
            .filter(|s| {
                let p = crate::net::model_forward(&out.params, &s.input).unwrap();
                (p[0] >= p[1]) == (s.class == Class::Depressed)
            })
            .count();
        assert!(correct as f64 / data.len() as f64 >= 0.95, "{correct}/{}", data.len());
        // Near-uniform start: first-epoch loss is about ln 2 for balanced classes.
        assert!((out.log[0].train_loss - std::f64::consts::LN_2).abs() < 0.2, "{}", out.log[0].train_loss);
    }

    #[test]
    fn deterministic_given_seed() {
        let data = blobs(6, 2);
        let cfg = TrainConfig { learning_rate: 1e-3, batch_size: 4, max_epochs: 5, patience_epochs: 2, ..Default::default() };
        let a = train(&tiny(), &cfg, &data, Validation::AutoBySession).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| train(&tiny(), &cfg, &data, Validation::AutoBySession).unwrap());
        assert_eq!(a.params, b.params);
        assert_eq!(a.log, b.log);
    }

    #[test]
    fn early_stopping_respects_patience() {
        let data = blobs(6, 3);
        let val = blobs(3, 4);
        // A huge learning rate makes validation loss erratic enough to stall.
        let cfg = TrainConfig { learning_rate: 0.5, batch_size: 4, max_epochs: 200, patience_epochs: 3, ..Default::default() };
        let out = train(&tiny(), &cfg, &data, Validation::Provided(&val)).unwrap();
        assert!(out.stopped_early);
        assert_eq!(out.log.len(), out.best_epoch + 3);
        let best = out.log[out.best_epoch - 1].val_loss.unwrap();
        assert!(out.log.iter().all(|e| e.val_loss.unwrap() >= best));
    }

    #[test]
    fn session_split_keeps_sessions_whole() {
        let data = blobs(10, 5);
        let (train_set, val) = split_by_session(&data, 0.2, 9);
        assert!(!val.is_empty());
        for v in &val {
            assert!(train_set.iter().all(|t| t.session_id != v.session_id));
        }
        assert_eq!(train_set.len() + val.len(), data.len());
    }

    #[test]
    fn first_adam_step_reduces_loss() {
        let data = blobs(4, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(1729);
        let mut params = ModelParams::init(&tiny(), 4, 8, &mut rng).unwrap();
        let batch_loss = |p: &ModelParams<f64>| -> (f64, ModelParams<f64>) {
            let mut g = p.zeros_like();
            let mut total = 0.0;
            for s in &data {
                let (l, gi) = crate::net::model_backward(p, &s.input, s.class.index(), 1.0).unwrap();
                total += l;
                add_into(&mut g, &gi);
            }
            scale(&mut g, 1.0 / data.len() as f64);
            (total / data.len() as f64, g)
        };
        let (before, grad) = batch_loss(&params);
        let mut adam = Adam::new(&params, 1e-6);
        adam.step(&mut params, &grad);
        let (after, _) = batch_loss(&params);
        assert!(after < before, "{after} >= {before}");
    }

    #[test]
    fn log_csv_layout() {
        let log = vec![
            EpochLog { epoch: 1, train_loss: 0.5, val_loss: Some(0.25), val_uar: Some(0.75) },
            EpochLog { epoch: 2, train_loss: 0.4, val_loss: None, val_uar: None },
        ];
        assert_eq!(EpochLog::to_csv(&log), "epoch,train_loss,val_loss,val_uar\n1,0.5,0.25,0.75\n2,0.4,,\n");
    }
}
