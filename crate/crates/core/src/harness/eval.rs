use std::collections::BTreeMap;
use std::fmt::{Display, Write as _};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::records;

/// One-vs-rest counts and scores for a single label.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ClassScore {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ClassScore {
    fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        ClassScore {
            tp,
            fp,
            fn_,
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fn_),
            f1: ratio(2 * tp, 2 * tp + fp + fn_),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport<L: Ord> {
    /// Labels seen in either the gold or the predicted sequence.
    pub per_class: BTreeMap<L, ClassScore>,
    /// `2·TP / (2·TP + FP + FN)` over counts pooled across labels.
    pub micro_f1: f64,
    /// Unweighted mean of the per-label F1 scores.
    pub macro_f1: f64,
    pub n: usize,
}

/// Scores aligned predictions against gold labels. Undefined ratios (no
/// predictions and no gold items) count as 0.
pub fn evaluate<L: Ord + Clone>(predictions: &[L], gold: &[L]) -> Result<EvalReport<L>> {
    if predictions.len() != gold.len() {
        return Err(Error::Validation(format!(
            "{} predictions for {} gold labels",
            predictions.len(),
            gold.len()
        )));
    }
    let mut counts: BTreeMap<L, (usize, usize, usize)> = BTreeMap::new();
    for (p, g) in predictions.iter().zip(gold) {
        if p == g {
            counts.entry(g.clone()).or_default().0 += 1;
        } else {
            counts.entry(p.clone()).or_default().1 += 1;
            counts.entry(g.clone()).or_default().2 += 1;
        }
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    let per_class: BTreeMap<L, ClassScore> = counts
        .into_iter()
        .map(|(l, (t, f, n))| {
            tp += t;
            fp += f;
            fn_ += n;
            (l, ClassScore::from_counts(t, f, n))
        })
        .collect();
    let macro_f1 = if per_class.is_empty() {
        0.0
    } else {
        per_class.values().map(|s| s.f1).sum::<f64>() / per_class.len() as f64
    };
    Ok(EvalReport {
        per_class,
        micro_f1: ratio(2 * tp, 2 * tp + fp + fn_),
        macro_f1,
        n: gold.len(),
    })
}

impl<L: Ord + Display> EvalReport<L> {
    /// One row per label with counts and scores, then the two averages.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("label\ttp\tfp\tfn\tprecision\trecall\tf1\n");
        for (l, s) in &self.per_class {
            let _ = writeln!(
                out,
                "{l}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}",
                s.tp, s.fp, s.fn_, s.precision, s.recall, s.f1
            );
        }
        let _ = writeln!(out, "micro-F1\t\t\t\t\t\t{:.4}", self.micro_f1);
        let _ = writeln!(out, "macro-F1\t\t\t\t\t\t{:.4}", self.macro_f1);
        out
    }
}

/// Reads `gold<TAB>prediction` label pairs, one per line. Returns the
/// predictions and the gold labels in the order [`evaluate`] takes them.
pub fn parse_label_pairs(text: &str, source_name: &str) -> Result<(Vec<String>, Vec<String>)> {
    let mut predictions = Vec::new();
    let mut gold = Vec::new();
    for rec in records(text, source_name, 2) {
        let (_, f) = rec?;
        gold.push(f[0].to_string());
        predictions.push(f[1].to_string());
    }
    Ok((predictions, gold))
}
