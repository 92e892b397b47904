//! Binary classification metrics: confusion matrix, per-class recall and F1,
//! unweighted average recall and ROC AUC.
//!
//! Class indices follow [`Class::index`]: depressed is 0 and is the positive
//! class for ROC analysis.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Class;
use crate::Scalar;

/// Counts indexed `[true class][predicted class]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 2]; 2],
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn support(&self, class: Class) -> u64 {
        self.counts[class.index()].iter().sum()
    }

    pub fn recall(&self, class: Class) -> Result<f64> {
        let support = self.support(class);
        if support == 0 {
            return Err(Error::MissingClass(class.short()));
        }
        Ok(self.counts[class.index()][class.index()] as f64 / support as f64)
    }
}

pub fn confusion(labels: &[Class], predictions: &[Class]) -> Result<ConfusionMatrix> {
    if labels.len() != predictions.len() {
        return Err(Error::LengthMismatch(labels.len(), predictions.len()));
    }
    if labels.is_empty() {
        return Err(Error::Empty);
    }
    let mut cm = ConfusionMatrix::default();
    for (t, p) in labels.iter().zip(predictions) {
        cm.counts[t.index()][p.index()] += 1;
    }
    Ok(cm)
}

/// Unweighted average recall: the mean of the per-class recalls.
pub fn uar(cm: &ConfusionMatrix) -> Result<f64> {
    Ok((cm.recall(Class::Depressed)? + cm.recall(Class::NotDepressed)?) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Scores {
    pub depressed: f64,
    pub not_depressed: f64,
    /// Set for a class whose F1 was forced to 0 because it was never predicted.
    pub undefined: [bool; 2],
}

pub fn f1_per_class(cm: &ConfusionMatrix) -> Result<F1Scores> {
    let mut f1 = [0.0; 2];
    let mut undefined = [false; 2];
    for class in Class::ALL {
        let c = class.index();
        cm.recall(class)?;
        let predicted = cm.counts[0][c] + cm.counts[1][c];
        let tp = cm.counts[c][c];
        if predicted == 0 || tp == 0 {
            undefined[c] = predicted == 0;
            continue;
        }
        // 2PR / (P + R) = 2TP / (predicted + support)
        f1[c] = (2 * tp) as f64 / (predicted + cm.support(class)) as f64;
    }
    Ok(F1Scores { depressed: f1[0], not_depressed: f1[1], undefined })
}

/// F1 of a predictor that always outputs the majority class, for a test set in
/// which a fraction `depressed_prevalence` of samples is depressed.
pub fn majority_baseline_f1(depressed_prevalence: f64) -> (f64, f64) {
    let f = |pi: f64| 2.0 * pi / (1.0 + pi);
    if depressed_prevalence >= 0.5 {
        (f(depressed_prevalence), 0.0)
    } else {
        (0.0, f(1.0 - depressed_prevalence))
    }
}

/// Area under the ROC curve for scores where larger means "more depressed".
///
/// Computed as the Mann–Whitney statistic from midranks, so tied
/// positive/negative pairs count one half.
pub fn auc_roc<T: Scalar>(labels: &[Class], scores: &[T]) -> Result<f64> {
    if labels.len() != scores.len() {
        return Err(Error::LengthMismatch(labels.len(), scores.len()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n_pos = labels.iter().filter(|&&c| c == Class::Depressed).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));

    // Sum of 1-based midranks of the positives.
    let mut rank_sum = 0.0f64;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let midrank = (start + end + 1) as f64 / 2.0;
        let positives = order[start..end].iter().filter(|&&i| labels[i] == Class::Depressed).count();
        rank_sum += midrank * positives as f64;
        start = end;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// ROC operating points `(false positive rate, true positive rate)` from the
/// strictest threshold to the loosest, starting at (0, 0) and ending at (1, 1).
pub fn roc_curve<T: Scalar>(labels: &[Class], scores: &[T]) -> Result<Vec<(f64, f64)>> {
    auc_roc(labels, scores)?;
    let n_pos = labels.iter().filter(|&&c| c == Class::Depressed).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("finite scores"));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0.0, 0.0);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] == Class::Depressed {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        points.push((fp / n_neg, tp / n_pos));
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub auc_roc: f64,
    pub uar: f64,
    pub f1_depressed: f64,
    pub f1_not_depressed: f64,
    pub recall_depressed: f64,
    pub recall_not_depressed: f64,
    pub f1_undefined: [bool; 2],
    pub confusion: ConfusionMatrix,
}

impl MetricsReport {
    /// `scores` are the depressed-class scores behind `predictions`.
    pub fn compute<T: Scalar>(labels: &[Class], predictions: &[Class], scores: &[T]) -> Result<Self> {
        let cm = confusion(labels, predictions)?;
        let f1 = f1_per_class(&cm)?;
        Ok(Self {
            auc_roc: auc_roc(labels, scores)?,
            uar: uar(&cm)?,
            f1_depressed: f1.depressed,
            f1_not_depressed: f1.not_depressed,
            recall_depressed: cm.recall(Class::Depressed)?,
            recall_not_depressed: cm.recall(Class::NotDepressed)?,
            f1_undefined: f1.undefined,
            confusion: cm,
        })
    }
}

/// Plain-text rows in the `AUC-ROC  UAR  F1 (D/ND)` layout.
pub struct MetricsTable<'a>(pub &'a [(&'a str, &'a MetricsReport)]);

impl fmt::Display for MetricsTable<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.0.iter().map(|(name, _)| name.len()).max().unwrap_or(0).max(5);
        writeln!(f, "{:<width$}  {:>7}  {:>6}  {:>11}", "Model", "AUC-ROC", "UAR", "F1 (D/ND)")?;
        for (name, m) in self.0 {
            writeln!(
                f,
                "{:<width$}  {:>7.4}  {:>6.4}  {:>11}",
                name,
                m.auc_roc,
                m.uar,
                format!("{:.2}/{:.2}", m.f1_depressed, m.f1_not_depressed)
            )?;
        }
        Ok(())
    }
}
