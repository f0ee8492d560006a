use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LabelVector, LABEL_NAMES, NUM_LABELS};

/// 2x2 counts for one binary head.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The same counts with the positive and negative classes swapped.
    pub fn flipped(&self) -> Confusion {
        Confusion {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }

    pub fn metrics(&self) -> ClassMetrics {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassMetrics {
            precision,
            recall,
            f1,
            support: self.tp + self.fn_,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of gold positives.
    pub support: usize,
}

fn check_lengths(preds: &[LabelVector], golds: &[LabelVector]) -> Result<()> {
    if preds.len() != golds.len() {
        return Err(Error::dim(format!(
            "{} predictions for {} gold labels",
            preds.len(),
            golds.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::UndefinedMetric("no examples".into()));
    }
    Ok(())
}

pub fn confusion_matrix(preds: &[LabelVector], golds: &[LabelVector]) -> Result<[Confusion; NUM_LABELS]> {
    check_lengths(preds, golds)?;
    let mut out = [Confusion::default(); NUM_LABELS];
    for (p, g) in preds.iter().zip(golds) {
        for (k, (p, g)) in p.to_array().into_iter().zip(g.to_array()).enumerate() {
            let c = &mut out[k];
            match (p, g) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
    }
    Ok(out)
}

pub fn f1_per_class(preds: &[LabelVector], golds: &[LabelVector]) -> Result<[ClassMetrics; NUM_LABELS]> {
    let confusion = confusion_matrix(preds, golds)?;
    Ok(confusion.map(|c| c.metrics()))
}

/// Support-weighted mean F1 over the four fine-grained classes.
pub fn weighted_fine_f1(preds: &[LabelVector], golds: &[LabelVector]) -> Result<f64> {
    let per_class = f1_per_class(preds, golds)?;
    weighted_mean(&per_class[1..])
}

fn weighted_mean(classes: &[ClassMetrics]) -> Result<f64> {
    let support: usize = classes.iter().map(|c| c.support).sum();
    if support == 0 {
        return Err(Error::UndefinedMetric("no gold positives in any fine-grained class".into()));
    }
    let weighted: f64 = classes.iter().map(|c| c.support as f64 * c.f1).sum();
    Ok(weighted / support as f64)
}

/// Support-weighted F1 over the two classes hostile / non-hostile.
pub fn coarse_f1(preds: &[LabelVector], golds: &[LabelVector]) -> Result<f64> {
    let hostile = confusion_matrix(preds, golds)?[0];
    weighted_mean(&[hostile.metrics(), hostile.flipped().metrics()])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub label: String,
    #[serde(flatten)]
    pub metrics: ClassMetrics,
    pub confusion: Confusion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub examples: usize,
    pub classes: Vec<ClassReport>,
    pub coarse_f1: f64,
    /// `None` when the gold labels contain no fine-grained positives.
    pub weighted_fine_f1: Option<f64>,
}

pub fn evaluate(preds: &[LabelVector], golds: &[LabelVector]) -> Result<EvalReport> {
    let confusion = confusion_matrix(preds, golds)?;
    let classes = confusion
        .iter()
        .zip(LABEL_NAMES)
        .map(|(c, name)| ClassReport {
            label: name.to_string(),
            metrics: c.metrics(),
            confusion: *c,
        })
        .collect();
    let weighted_fine_f1 = match weighted_fine_f1(preds, golds) {
        Ok(v) => Some(v),
        Err(Error::UndefinedMetric(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(EvalReport {
        examples: preds.len(),
        classes,
        coarse_f1: coarse_f1(preds, golds)?,
        weighted_fine_f1,
    })
}

impl EvalReport {
    /// Aligned plain-text rendering.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<12} {:>9} {:>9} {:>9} {:>8} {:>6} {:>6} {:>6} {:>6}",
            "label", "precision", "recall", "f1", "support", "tp", "fp", "fn", "tn"
        );
        for c in &self.classes {
            let m = &c.metrics;
            let k = &c.confusion;
            let _ = writeln!(
                out,
                "{:<12} {:>9.4} {:>9.4} {:>9.4} {:>8} {:>6} {:>6} {:>6} {:>6}",
                c.label, m.precision, m.recall, m.f1, m.support, k.tp, k.fp, k.fn_, k.tn
            );
        }
        let _ = writeln!(out, "coarse_f1        {:.4}", self.coarse_f1);
        match self.weighted_fine_f1 {
            Some(v) => {
                let _ = writeln!(out, "weighted_fine_f1 {v:.4}");
            }
            None => out.push_str("weighted_fine_f1 undefined\n"),
        }
        out
    }
}
