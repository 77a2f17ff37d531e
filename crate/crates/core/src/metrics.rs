//! Evaluation metrics: regression errors, 4-class confusion matrices,
//! per-class F1, presence/absence collapse and the composite tuning score.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::NUM_CLASSES;
use crate::error::{Error, Result};

/// `counts[true][pred]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix4 {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix4 {
    pub fn from_counts(counts: [[u64; NUM_CLASSES]; NUM_CLASSES]) -> Self {
        Self { counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..NUM_CLASSES).map(|i| self.counts[i][i]).sum()
    }

    /// Numerator of the presence/absence accuracy: `C00 + sum_{i,j >= 1} Cij`.
    pub fn binary_agreement(&self) -> u64 {
        self.counts[0][0]
            + (1..NUM_CLASSES)
                .flat_map(|i| (1..NUM_CLASSES).map(move |j| (i, j)))
                .map(|(i, j)| self.counts[i][j])
                .sum::<u64>()
    }

    pub fn row_sum(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn col_sum(&self, class: usize) -> u64 {
        self.counts.iter().map(|row| row[class]).sum()
    }
}

impl fmt::Display for ConfusionMatrix4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .counts
            .iter()
            .flatten()
            .map(|v| v.to_string().len())
            .max()
            .unwrap_or(1)
            .max(4);
        write!(f, "{:>10}", "true\\pred")?;
        for j in 0..NUM_CLASSES {
            write!(f, " {j:>width$}")?;
        }
        writeln!(f)?;
        for (i, row) in self.counts.iter().enumerate() {
            write!(f, "{i:>10}")?;
            for v in row {
                write!(f, " {v:>width$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Builds `C[label][pred]` from paired class indices.
pub fn confusion(preds: &[u8], labels: &[u8]) -> Result<ConfusionMatrix4> {
    if preds.len() != labels.len() || preds.is_empty() {
        return Err(Error::InvalidInput(format!(
            "need equal non-empty prediction/label lists, got {} and {}",
            preds.len(),
            labels.len()
        )));
    }
    let mut cm = ConfusionMatrix4::default();
    for (&p, &l) in preds.iter().zip(labels) {
        if usize::from(p) >= NUM_CLASSES || usize::from(l) >= NUM_CLASSES {
            return Err(Error::InvalidInput(format!(
                "class pair ({l}, {p}) outside 0..{NUM_CLASSES}"
            )));
        }
        cm.counts[usize::from(l)][usize::from(p)] += 1;
    }
    Ok(cm)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Trace over total; 0 for an empty matrix.
pub fn accuracy(cm: &ConfusionMatrix4) -> f64 {
    ratio(cm.trace(), cm.total())
}

/// Presence/absence accuracy (class 0 vs classes 1-3).
pub fn binary_collapse(cm: &ConfusionMatrix4) -> f64 {
    ratio(cm.binary_agreement(), cm.total())
}

fn check_pairs(preds: &[f64], labels: &[f64]) -> Result<()> {
    if preds.len() != labels.len() || preds.is_empty() {
        return Err(Error::InvalidInput(format!(
            "need equal non-empty prediction/label lists, got {} and {}",
            preds.len(),
            labels.len()
        )));
    }
    Ok(())
}

pub fn mae(preds: &[f64], labels: &[f64]) -> Result<f64> {
    check_pairs(preds, labels)?;
    Ok(preds.iter().zip(labels).map(|(p, l)| (p - l).abs()).sum::<f64>() / preds.len() as f64)
}

pub fn rmse(preds: &[f64], labels: &[f64]) -> Result<f64> {
    check_pairs(preds, labels)?;
    let mse = preds.iter().zip(labels).map(|(p, l)| (p - l) * (p - l)).sum::<f64>()
        / preds.len() as f64;
    Ok(mse.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1Family {
    pub per_class: [ClassScores; NUM_CLASSES],
    /// Mean F1 over classes 0-3.
    pub f1_macro: f64,
    /// Mean F1 over classes 1-3.
    pub f1_minority: f64,
    /// Mean recall over classes 1-3.
    pub recall_minority: f64,
}

/// Per-class precision/recall/F1 with 0/0 taken as 0.
pub fn f1_family(cm: &ConfusionMatrix4) -> F1Family {
    let per_class: [ClassScores; NUM_CLASSES] = std::array::from_fn(|k| {
        let tp = cm.counts[k][k];
        let precision = ratio(tp, cm.col_sum(k));
        let recall = ratio(tp, cm.row_sum(k));
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        ClassScores {
            precision,
            recall,
            f1,
        }
    });
    let minority = &per_class[1..];
    F1Family {
        f1_macro: per_class.iter().map(|c| c.f1).sum::<f64>() / NUM_CLASSES as f64,
        f1_minority: minority.iter().map(|c| c.f1).sum::<f64>() / minority.len() as f64,
        recall_minority: minority.iter().map(|c| c.recall).sum::<f64>() / minority.len() as f64,
        per_class,
    }
}

/// Weights of the composite score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeWeights {
    pub w_acc: f64,
    pub w_f1macro: f64,
    pub w_f1min: f64,
    pub w_recmin: f64,
    pub w_nonzero: f64,
}

impl Default for CompositeWeights {
    fn default() -> Self {
        Self {
            w_acc: 0.25,
            w_f1macro: 0.20,
            w_f1min: 0.30,
            w_recmin: 0.15,
            w_nonzero: 0.10,
        }
    }
}

impl CompositeWeights {
    pub fn sum(&self) -> f64 {
        self.w_acc + self.w_f1macro + self.w_f1min + self.w_recmin + self.w_nonzero
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.w_acc,
            self.w_f1macro,
            self.w_f1min,
            self.w_recmin,
            self.w_nonzero,
        ];
        if all.iter().any(|w| !(*w >= 0.0)) || (self.sum() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "composite weights must be non-negative and sum to 1, got {all:?}"
            )));
        }
        Ok(())
    }
}

/// The five rates the composite score combines.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CompositeParts {
    pub accuracy: f64,
    pub f1_macro: f64,
    pub f1_minority: f64,
    pub recall_minority: f64,
    pub r_nonzero: f64,
}

impl CompositeParts {
    pub fn from_confusion(cm: &ConfusionMatrix4) -> Self {
        let f1 = f1_family(cm);
        Self {
            accuracy: accuracy(cm),
            f1_macro: f1.f1_macro,
            f1_minority: f1.f1_minority,
            recall_minority: f1.recall_minority,
            r_nonzero: binary_collapse(cm),
        }
    }
}

pub fn composite_score(parts: &CompositeParts, w: &CompositeWeights) -> f64 {
    w.w_acc * parts.accuracy
        + w.w_f1macro * parts.f1_macro
        + w.w_f1min * parts.f1_minority
        + w.w_recmin * parts.recall_minority
        + w.w_nonzero * parts.r_nonzero
}

/// Everything reported for one model on one test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub rmse: f64,
    pub mae: f64,
    pub accuracy: f64,
    pub f1_macro: f64,
    pub f1_minority: f64,
    pub recall_minority: f64,
    pub r_nonzero: f64,
    pub composite: f64,
    pub per_class: [ClassScores; NUM_CLASSES],
    pub confusion: ConfusionMatrix4,
}

impl EvalReport {
    /// Builds the report from continuous predictions and integer labels;
    /// `classes` are the rounded predictions.
    pub fn new(
        continuous: &[f64],
        classes: &[u8],
        labels: &[u8],
        weights: &CompositeWeights,
    ) -> Result<Self> {
        let cm = confusion(classes, labels)?;
        let label_f: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
        let parts = CompositeParts::from_confusion(&cm);
        let f1 = f1_family(&cm);
        Ok(Self {
            n: labels.len(),
            rmse: rmse(continuous, &label_f)?,
            mae: mae(continuous, &label_f)?,
            accuracy: parts.accuracy,
            f1_macro: parts.f1_macro,
            f1_minority: parts.f1_minority,
            recall_minority: parts.recall_minority,
            r_nonzero: parts.r_nonzero,
            composite: composite_score(&parts, weights),
            per_class: f1.per_class,
            confusion: cm,
        })
    }
}
