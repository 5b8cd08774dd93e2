use serde::{Deserialize, Serialize};

use super::label::{Label, LabeledExample, NUM_LABELS};
use super::model::StanceModel;
use crate::error::{Error, Result};

/// Scores of a predictor against gold labels.
///
/// `r` is the ratio of rejects to supports; "other" takes no part in it.
/// The fraction score `r_pred / r_gold` is `None` whenever either ratio is
/// undefined (no supports) or `r_gold` is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n: usize,
    pub accuracy: f64,
    /// `confusion[gold][predicted]`, indexed by [`Label::ORDER`].
    pub confusion: [[u64; NUM_LABELS]; NUM_LABELS],
    pub gold_counts: [u64; NUM_LABELS],
    pub predicted_counts: [u64; NUM_LABELS],
    pub r_gold: Option<f64>,
    pub r_pred: Option<f64>,
    pub fraction_score: Option<f64>,
}

fn reject_support_ratio(counts: &[u64; NUM_LABELS]) -> Option<f64> {
    let supports = counts[Label::Supports.index()];
    if supports == 0 {
        None
    } else {
        Some(counts[Label::Rejects.index()] as f64 / supports as f64)
    }
}

impl EvaluationReport {
    pub fn from_labels(gold: &[Label], predicted: &[Label]) -> Result<Self> {
        if gold.len() != predicted.len() {
            return Err(Error::LengthMismatch(gold.len(), predicted.len()));
        }
        if gold.is_empty() {
            return Err(Error::NotEnoughExamples("empty evaluation set".into()));
        }
        let mut confusion = [[0u64; NUM_LABELS]; NUM_LABELS];
        for (g, p) in gold.iter().zip(predicted) {
            confusion[g.index()][p.index()] += 1;
        }
        Ok(Self::from_confusion(confusion))
    }

    pub fn from_confusion(confusion: [[u64; NUM_LABELS]; NUM_LABELS]) -> Self {
        let mut gold_counts = [0u64; NUM_LABELS];
        let mut predicted_counts = [0u64; NUM_LABELS];
        let mut correct = 0u64;
        for g in 0..NUM_LABELS {
            for p in 0..NUM_LABELS {
                gold_counts[g] += confusion[g][p];
                predicted_counts[p] += confusion[g][p];
            }
            correct += confusion[g][g];
        }
        let n: u64 = gold_counts.iter().sum();
        let r_gold = reject_support_ratio(&gold_counts);
        let r_pred = reject_support_ratio(&predicted_counts);
        let fraction_score = match (r_pred, r_gold) {
            (Some(p), Some(g)) if g > 0.0 => Some(p / g),
            _ => None,
        };
        EvaluationReport {
            n: n as usize,
            accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
            confusion,
            gold_counts,
            predicted_counts,
            r_gold,
            r_pred,
            fraction_score,
        }
    }

    /// Fraction score folded so over- and under-prediction of rejects
    /// count alike: `min(f, 1/f)`, 1.0 at best. Undefined scores rank
    /// below everything.
    pub fn symmetric_fraction_score(&self) -> f64 {
        match self.fraction_score {
            None => f64::NEG_INFINITY,
            Some(0.0) => 0.0,
            Some(f) => f.min(1.0 / f),
        }
    }
}

/// Runs `model` over `test` and scores the predictions.
pub fn evaluate(model: &StanceModel, test: &[LabeledExample]) -> Result<EvaluationReport> {
    let gold: Vec<Label> = test.iter().map(|e| e.label).collect();
    let predicted: Vec<Label> = test.iter().map(|e| model.predict(&e.text).label).collect();
    EvaluationReport::from_labels(&gold, &predicted)
}

/// Chance-corrected agreement between two annotators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub kappa: f64,
    pub observed_agreement: f64,
    pub expected_agreement: f64,
    pub n: usize,
}

/// Cohen's kappa with marginal-product expected agreement.
///
/// Computed from integer counts as `(n*A - E) / (n^2 - E)`, where `A` is
/// the number of agreements and `E` the sum over labels of the product of
/// both annotators' marginal counts. When expected agreement is 1 (both
/// annotators used one and the same label throughout) kappa is 1.
pub fn kappa(labels_a: &[Label], labels_b: &[Label]) -> Result<AgreementReport> {
    if labels_a.len() != labels_b.len() {
        return Err(Error::LengthMismatch(labels_a.len(), labels_b.len()));
    }
    if labels_a.is_empty() {
        return Err(Error::NotEnoughExamples("kappa needs at least one label pair".into()));
    }
    let n = labels_a.len() as u64;
    let mut marg_a = [0u64; NUM_LABELS];
    let mut marg_b = [0u64; NUM_LABELS];
    let mut agree = 0u64;
    for (a, b) in labels_a.iter().zip(labels_b) {
        marg_a[a.index()] += 1;
        marg_b[b.index()] += 1;
        agree += (a == b) as u64;
    }
    let expected: u64 = marg_a.iter().zip(&marg_b).map(|(x, y)| x * y).sum();
    let n2 = n * n;
    let kappa = if expected == n2 {
        1.0
    } else {
        (n as i128 * agree as i128 - expected as i128) as f64 / (n2 - expected) as f64
    };
    Ok(AgreementReport {
        kappa,
        observed_agreement: agree as f64 / n as f64,
        expected_agreement: expected as f64 / n2 as f64,
        n: n as usize,
    })
}
