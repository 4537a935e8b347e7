use std::io::{self, Write};

use serde::Serialize;

use super::{EvalError, Result};
use crate::numfmt;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassificationMetrics {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub accuracy: f64,
    /// Absent without positive labels.
    pub tpr: Option<f64>,
    /// Absent without negative labels.
    pub fpr: Option<f64>,
    /// Rank AUC; absent unless both classes are present.
    pub auc: Option<f64>,
}

fn check_inputs(scores: &[f64], labels: &[u8]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(EvalError::Dimension(format!("{} scores vs {} labels", scores.len(), labels.len())));
    }
    if scores.is_empty() {
        return Err(EvalError::Invalid("no predictions".into()));
    }
    if let Some(bad) = labels.iter().find(|l| **l > 1) {
        return Err(EvalError::Invalid(format!("label {bad} is not binary")));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(EvalError::Invalid("non-finite score".into()));
    }
    Ok(())
}

/// Mann-Whitney rank statistic with tied scores sharing their average rank.
fn rank_auc(scores: &[f64], labels: &[u8]) -> Option<f64> {
    let n_pos = labels.iter().filter(|l| **l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks are 1-based: positions i..=j share (i + j)/2 + 1
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum_pos += avg_rank * order[i..=j].iter().filter(|&&k| labels[k] == 1).count() as f64;
        i = j + 1;
    }
    let n_pos_f = n_pos as f64;
    Some((rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0) / (n_pos_f * n_neg as f64))
}

/// Confusion counts at `score >= threshold` plus rank AUC.
pub fn classification_metrics(scores: &[f64], labels: &[u8], threshold: f64) -> Result<ClassificationMetrics> {
    check_inputs(scores, labels)?;
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    Ok(ClassificationMetrics {
        tp,
        fp,
        tn,
        fn_,
        accuracy: (tp + tn) as f64 / scores.len() as f64,
        tpr: ratio(tp, tp + fn_),
        fpr: ratio(fp, fp + tn),
        auc: rank_auc(scores, labels),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// ROC points at each distinct score (descending) plus the `+inf` origin.
/// Empty when either class is missing.
pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<Vec<RocPoint>> {
    check_inputs(scores, labels)?;
    let n_pos = labels.iter().filter(|l| **l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Ok(Vec::new());
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint { threshold: f64::INFINITY, tpr: 0.0, fpr: 0.0 }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint { threshold: s, tpr: tp as f64 / n_pos as f64, fpr: fp as f64 / n_neg as f64 });
    }
    Ok(points)
}

pub fn regression_metrics(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(EvalError::Dimension(format!("{} predictions vs {} targets", predictions.len(), targets.len())));
    }
    if predictions.is_empty() {
        return Err(EvalError::Invalid("no predictions".into()));
    }
    let mse = predictions.iter().zip(targets).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / predictions.len() as f64;
    Ok(mse.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub n: usize,
    pub threshold: f64,
    #[serde(flatten)]
    pub classification: ClassificationMetrics,
    /// Phase-I RMSE on simulated benign records (scaled units).
    pub rmse_phase1: Option<f64>,
    /// Phase-II RMSE on simulated records (scaled units).
    pub rmse_phase2: Option<f64>,
    pub posterior_mad: Option<f64>,
}

const CSV_COLUMNS: [&str; 14] = [
    "n",
    "threshold",
    "tp",
    "fp",
    "tn",
    "fn",
    "accuracy",
    "tpr",
    "fpr",
    "auc",
    "rmse_phase1",
    "rmse_phase2",
    "posterior_mad",
    "status",
];

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Header plus one flat row; absent values are empty cells.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let opt = |v: Option<f64>| v.map(numfmt::exact).unwrap_or_default();
        let c = &self.classification;
        writeln!(out, "{}", CSV_COLUMNS.join(","))?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},ok",
            self.n,
            numfmt::exact(self.threshold),
            c.tp,
            c.fp,
            c.tn,
            c.fn_,
            numfmt::exact(c.accuracy),
            opt(c.tpr),
            opt(c.fpr),
            opt(c.auc),
            opt(self.rmse_phase1),
            opt(self.rmse_phase2),
            opt(self.posterior_mad),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_predictions() {
        let labels = [0, 1, 1, 0, 1];
        let scores: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
        let m = classification_metrics(&scores, &labels, 0.5).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.fpr, Some(0.0));
        assert_eq!(m.tpr, Some(1.0));
        assert_eq!(m.auc, Some(1.0));
    }

    #[test]
    fn ranked_and_constant_scores() {
        let labels = [0, 0, 1, 1];
        assert_eq!(classification_metrics(&[0.1, 0.2, 0.3, 0.9], &labels, 0.5).unwrap().auc, Some(1.0));
        assert_eq!(classification_metrics(&[0.4; 4], &labels, 0.5).unwrap().auc, Some(0.5));
        assert_eq!(classification_metrics(&[0.9, 0.8, 0.2, 0.1], &labels, 0.5).unwrap().auc, Some(0.0));
    }

    #[test]
    fn single_class_has_no_auc() {
        let m = classification_metrics(&[0.2, 0.7], &[0, 0], 0.5).unwrap();
        assert_eq!(m.auc, None);
        assert_eq!(m.tpr, None);
        assert_eq!(m.fpr, Some(0.5));
        assert!(roc_curve(&[0.2, 0.7], &[0, 0]).unwrap().is_empty());
    }

    #[test]
    fn threshold_tie_counts_as_positive() {
        let m = classification_metrics(&[0.5], &[1], 0.5).unwrap();
        assert_eq!(m.tp, 1);
    }

    #[test]
    fn input_errors() {
        assert!(classification_metrics(&[0.1], &[0, 1], 0.5).is_err());
        assert!(classification_metrics(&[0.1], &[2], 0.5).is_err());
        assert!(regression_metrics(&[], &[]).is_err());
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(regression_metrics(&[0.3, 0.4], &[0.3, 0.4]).unwrap(), 0.0);
        let t = [0.1, 0.5, 0.9];
        let p: Vec<f64> = t.iter().map(|v| v + 0.25).collect();
        assert!((regression_metrics(&p, &t).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(regression_metrics(&[0.0, 2.0], &[1.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn roc_ends_at_one_one() {
        let roc = roc_curve(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]).unwrap();
        assert_eq!(roc.first().unwrap().tpr, 0.0);
        let last = roc.last().unwrap();
        assert_eq!((last.tpr, last.fpr), (1.0, 1.0));
    }

    #[test]
    fn report_csv_has_one_row() {
        let c = classification_metrics(&[0.2, 0.7], &[0, 1], 0.5).unwrap();
        let r = EvalReport {
            n: 2,
            threshold: 0.5,
            classification: c,
            rmse_phase1: None,
            rmse_phase2: Some(0.1),
            posterior_mad: None,
        };
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(r.to_json().contains("\"fn\": 0"));
        assert!(r.to_json().contains("\"rmse_phase1\": null"));
    }

    // Brute-force AUC: fraction of (positive, negative) pairs ordered correctly, ties half.
    fn pairwise_auc(scores: &[f64], labels: &[u8]) -> f64 {
        let mut total = 0.0;
        let mut pairs = 0.0;
        for (i, &si) in scores.iter().enumerate() {
            for (j, &sj) in scores.iter().enumerate() {
                if labels[i] == 1 && labels[j] == 0 {
                    pairs += 1.0;
                    total += if si > sj {
                        1.0
                    } else if si == sj {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        total / pairs
    }

    proptest! {
        #[test]
        fn rank_auc_matches_pairwise(data in proptest::collection::vec((0u8..5, 0u8..=1), 2..60)) {
            let scores: Vec<f64> = data.iter().map(|(s, _)| f64::from(*s) / 4.0).collect();
            let labels: Vec<u8> = data.iter().map(|(_, l)| *l).collect();
            let m = classification_metrics(&scores, &labels, 0.5).unwrap();
            prop_assert_eq!(m.tp + m.fp + m.tn + m.fn_, labels.len());
            for rate in [Some(m.accuracy), m.tpr, m.fpr, m.auc].into_iter().flatten() {
                prop_assert!((0.0..=1.0).contains(&rate));
            }
            if let Some(auc) = m.auc {
                prop_assert!((auc - pairwise_auc(&scores, &labels)).abs() < 1e-12);
            }
        }
    }
}
