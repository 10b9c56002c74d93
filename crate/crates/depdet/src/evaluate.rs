//! Evaluation suite: confusion matrix, weighted classification metrics,
//! ROC curve, AUC and cross-run comparison.
//!
//! The positive class is depressive throughout. Weighted aggregation
//! multiplies class support into the metric numerator before dividing, so
//! weighted recall equals accuracy bitwise (the binary identity that also
//! explains why a weighted-average report's recall column mirrors its
//! accuracy column).

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::network::{softmax_rows, Network};

/// Counts by (true, predicted) with depressive as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix2x2 {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix2x2 {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

pub fn confusion_matrix(y_true: &[Label], y_pred: &[Label]) -> Result<ConfusionMatrix2x2> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::LengthMismatch { left: 0, right: 0 });
    }
    let mut cm = ConfusionMatrix2x2 {
        tp: 0,
        fp: 0,
        fn_: 0,
        tn: 0,
    };
    for (t, p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (Label::Depressive, Label::Depressive) => cm.tp += 1,
            (Label::NonDepressive, Label::Depressive) => cm.fp += 1,
            (Label::Depressive, Label::NonDepressive) => cm.fn_ += 1,
            (Label::NonDepressive, Label::NonDepressive) => cm.tn += 1,
        }
    }
    Ok(cm)
}

/// How per-class metrics aggregate into one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Support-weighted average over both classes (the default).
    Weighted,
    /// Unweighted mean over both classes.
    Macro,
    /// Positive (depressive) class only.
    PositiveClass,
}

/// Precision/recall/F1 for one class, kept as integer numerator/denominator
/// so aggregation can stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerClassMetrics {
    pub support: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub positive: PerClassMetrics,
    pub negative: PerClassMetrics,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Weighted sum of per-class rationals: sum over classes of
/// (support * num / den), divided by the total count. The multiply-first
/// ordering keeps support*(num/den) exact whenever den divides support*num.
fn weighted(parts: &[(usize, usize, usize)], total: usize) -> f64 {
    let sum: f64 = parts
        .iter()
        .map(|&(support, num, den)| {
            if den == 0 {
                0.0
            } else {
                (support as f64) * (num as f64) / (den as f64)
            }
        })
        .sum();
    sum / total as f64
}

/// Per-class precision/recall/F1 with the requested aggregate. A class with
/// zero predicted positives has precision 0.
pub fn classification_metrics_with(cm: &ConfusionMatrix2x2, mode: Averaging) -> ClassificationMetrics {
    let total = cm.total();
    let support_pos = cm.tp + cm.fn_;
    let support_neg = cm.tn + cm.fp;
    // positive class rationals
    let pos_precision = (cm.tp, cm.tp + cm.fp);
    let pos_recall = (cm.tp, support_pos);
    let pos_f1 = (2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn_);
    // negative class rationals
    let neg_precision = (cm.tn, cm.tn + cm.fn_);
    let neg_recall = (cm.tn, support_neg);
    let neg_f1 = (2 * cm.tn, 2 * cm.tn + cm.fn_ + cm.fp);

    let positive = PerClassMetrics {
        support: support_pos,
        precision: ratio(pos_precision.0, pos_precision.1),
        recall: ratio(pos_recall.0, pos_recall.1),
        f1: ratio(pos_f1.0, pos_f1.1),
    };
    let negative = PerClassMetrics {
        support: support_neg,
        precision: ratio(neg_precision.0, neg_precision.1),
        recall: ratio(neg_recall.0, neg_recall.1),
        f1: ratio(neg_f1.0, neg_f1.1),
    };

    let (precision, recall, f1) = match mode {
        Averaging::Weighted => (
            weighted(
                &[
                    (support_pos, pos_precision.0, pos_precision.1),
                    (support_neg, neg_precision.0, neg_precision.1),
                ],
                total,
            ),
            weighted(
                &[
                    (support_pos, pos_recall.0, pos_recall.1),
                    (support_neg, neg_recall.0, neg_recall.1),
                ],
                total,
            ),
            weighted(
                &[
                    (support_pos, pos_f1.0, pos_f1.1),
                    (support_neg, neg_f1.0, neg_f1.1),
                ],
                total,
            ),
        ),
        Averaging::Macro => (
            (positive.precision + negative.precision) / 2.0,
            (positive.recall + negative.recall) / 2.0,
            (positive.f1 + negative.f1) / 2.0,
        ),
        Averaging::PositiveClass => (positive.precision, positive.recall, positive.f1),
    };

    ClassificationMetrics {
        accuracy: (cm.tp + cm.tn) as f64 / total as f64,
        precision,
        recall,
        f1,
        positive,
        negative,
    }
}

/// Support-weighted metrics (the reporting default).
pub fn classification_metrics(cm: &ConfusionMatrix2x2) -> ClassificationMetrics {
    classification_metrics_with(cm, Averaging::Weighted)
}

/// ROC curve as (fpr, tpr) points from (0,0) to (1,1) with matching score
/// thresholds (prediction rule: score >= threshold). The first point's
/// threshold is +infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    pub thresholds: Vec<f64>,
}

impl RocCurve {
    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let csv_err = |e: csv::Error| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["threshold", "fpr", "tpr"]).map_err(csv_err)?;
        for ((fpr, tpr), threshold) in self.points.iter().zip(&self.thresholds) {
            w.write_record(&[threshold.to_string(), fpr.to_string(), tpr.to_string()])
                .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Sweep thresholds over the distinct scores, descending; tied scores are
/// one threshold step.
pub fn roc_curve(y_true: &[Label], scores: &[f64]) -> Result<RocCurve> {
    if y_true.len() != scores.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: scores.len(),
        });
    }
    let n_pos = y_true.iter().filter(|l| **l == Label::Depressive).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClassRoc);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());

    let mut points = vec![(0.0, 0.0)];
    let mut thresholds = vec![f64::INFINITY];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        // consume the whole tie group
        while i < order.len() && scores[order[i]] == threshold {
            match y_true[order[i]] {
                Label::Depressive => tp += 1,
                Label::NonDepressive => fp += 1,
            }
            i += 1;
        }
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
        thresholds.push(threshold);
    }
    debug_assert_eq!(*points.last().unwrap(), (1.0, 1.0));
    Ok(RocCurve { points, thresholds })
}

/// Trapezoidal area under the (fpr, tpr) polyline.
pub fn auc(curve: &RocCurve) -> f64 {
    let mut area = 0.0;
    for pair in curve.points.windows(2) {
        let (x1, y1) = pair[0];
        let (x2, y2) = pair[1];
        area += (x2 - x1) * (y1 + y2) / 2.0;
    }
    area
}

/// The full per-run evaluation product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub backend: String,
    pub n_test: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Absent when the test set contains a single class.
    pub auc: Option<f64>,
    pub confusion: ConfusionMatrix2x2,
    pub roc: Option<RocCurve>,
}

impl EvaluationReport {
    pub fn save_json(&self, path: &Path) -> Result<()> {
        crate::corpus::write_json(path, self)
    }

    pub fn load_json(path: &Path) -> Result<EvaluationReport> {
        crate::corpus::read_json(path)
    }
}

/// Run inference-mode forward over the test tensors and assemble the
/// report. Predictions are argmax with the 0.5 tie resolved to depressive;
/// ROC scores are p(depressive).
pub fn evaluate_model(
    network: &Network,
    test_x: &Array2<f32>,
    test_y: &[Label],
    backend_name: &str,
) -> Result<EvaluationReport> {
    if test_x.nrows() != test_y.len() || test_y.is_empty() {
        return Err(Error::LengthMismatch {
            left: test_x.nrows(),
            right: test_y.len(),
        });
    }
    let scores = depressive_scores(network, test_x)?;
    let y_pred: Vec<Label> = scores
        .iter()
        .map(|&s| {
            if s >= 0.5 {
                Label::Depressive
            } else {
                Label::NonDepressive
            }
        })
        .collect();
    let cm = confusion_matrix(test_y, &y_pred)?;
    let metrics = classification_metrics(&cm);
    let (roc, auc_value) = match roc_curve(test_y, &scores) {
        Ok(curve) => {
            let a = auc(&curve);
            (Some(curve), Some(a))
        }
        Err(Error::SingleClassRoc) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(EvaluationReport {
        backend: backend_name.to_string(),
        n_test: test_y.len(),
        accuracy: metrics.accuracy,
        precision: metrics.precision,
        recall: metrics.recall,
        f1: metrics.f1,
        auc: auc_value,
        confusion: cm,
        roc,
    })
}

/// p(depressive) per row, computed in inference mode.
pub fn depressive_scores(network: &Network, x: &Array2<f32>) -> Result<Vec<f64>> {
    let mut scores = Vec::with_capacity(x.nrows());
    let chunk = 256;
    let mut start = 0;
    while start < x.nrows() {
        let end = (start + chunk).min(x.nrows());
        let probs = softmax_rows(&network.infer_logits(&x.slice(s![start..end, ..]).to_owned())?);
        scores.extend(probs.rows().into_iter().map(|r| r[1] as f64));
        start = end;
    }
    Ok(scores)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub backend: String,
    /// Percentages rounded to whole points, plus AUC as a fraction.
    pub accuracy_pct: f64,
    pub precision_pct: f64,
    pub recall_pct: f64,
    pub f1_pct: f64,
    pub auc: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    /// metric name -> backend with the best value (first wins on ties).
    pub best: BTreeMap<String, String>,
}

fn pct(fraction: f64) -> f64 {
    (fraction * 100.0).round()
}

/// One row per report, with the argmax backend flagged per metric.
pub fn compare_runs(reports: &[EvaluationReport]) -> ComparisonTable {
    let rows: Vec<ComparisonRow> = reports
        .iter()
        .map(|r| ComparisonRow {
            backend: r.backend.clone(),
            accuracy_pct: pct(r.accuracy),
            precision_pct: pct(r.precision),
            recall_pct: pct(r.recall),
            f1_pct: pct(r.f1),
            auc: r.auc,
        })
        .collect();
    let mut best = BTreeMap::new();
    let metrics: [(&str, Box<dyn Fn(&EvaluationReport) -> f64>); 5] = [
        ("accuracy", Box::new(|r: &EvaluationReport| r.accuracy)),
        ("precision", Box::new(|r: &EvaluationReport| r.precision)),
        ("recall", Box::new(|r: &EvaluationReport| r.recall)),
        ("f1", Box::new(|r: &EvaluationReport| r.f1)),
        (
            "auc",
            Box::new(|r: &EvaluationReport| r.auc.unwrap_or(f64::NEG_INFINITY)),
        ),
    ];
    for (name, get) in metrics {
        if let Some(winner) = reports
            .iter()
            .max_by(|a, b| get(a).partial_cmp(&get(b)).unwrap())
        {
            best.insert(name.to_string(), winner.backend.clone());
        }
    }
    ComparisonTable { rows, best }
}

impl ComparisonTable {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<16} {:>9} {:>10} {:>7} {:>9} {:>6}\n",
            "backend", "accuracy%", "precision%", "recall%", "f1-score%", "auc"
        ));
        for row in &self.rows {
            let auc = row
                .auc
                .map(|a| format!("{a:.2}"))
                .unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "{:<16} {:>9} {:>10} {:>7} {:>9} {:>6}\n",
                row.backend, row.accuracy_pct, row.precision_pct, row.recall_pct, row.f1_pct, auc
            ));
        }
        for (metric, backend) in &self.best {
            out.push_str(&format!("best {metric}: {backend}\n"));
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let csv_err = |e: csv::Error| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["backend", "accuracy_pct", "precision_pct", "recall_pct", "f1_pct", "auc"])
            .map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(&[
                row.backend.clone(),
                row.accuracy_pct.to_string(),
                row.precision_pct.to_string(),
                row.recall_pct.to_string(),
                row.f1_pct.to_string(),
                row.auc.map(|a| a.to_string()).unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}
