//! Model selection and assessment: k-fold cross-validation, grid search
//! over an 80/10/10 split, and learning curves.
//!
//! Every procedure is a pure function of its inputs and seed. Independent
//! models (folds, grid configurations, repeats) train in parallel with
//! seeds derived as `seed + index`, and results are collected in index
//! order, so parallelism never changes the output.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::label::LabeledExample;
use super::metrics::{evaluate, EvaluationReport};
use super::model::{train, Hyperparams, StanceModel};
use crate::error::{Error, Result};

fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

fn pick(examples: &[LabeledExample], idx: &[usize]) -> Vec<LabeledExample> {
    idx.iter().map(|&i| examples[i].clone()).collect()
}

fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// Per-fold reports plus mean and population standard deviation. Fraction
/// score statistics cover only folds where it is defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub folds: Vec<EvaluationReport>,
    /// Test-set example indices of each fold.
    pub assignments: Vec<Vec<usize>>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_fraction_score: Option<f64>,
    pub std_fraction_score: Option<f64>,
}

/// Contiguous folds over a seeded shuffle; sizes differ by at most one.
pub fn fold_assignments(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let order = shuffled_indices(n, seed);
    let (base, extra) = (n / folds, n % folds);
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for k in 0..folds {
        let len = base + usize::from(k < extra);
        out.push(order[start..start + len].to_vec());
        start += len;
    }
    out
}

pub fn cross_validate(
    examples: &[LabeledExample],
    hp: &Hyperparams,
    folds: usize,
    seed: u64,
) -> Result<CrossValidation> {
    if folds < 2 {
        return Err(Error::NotEnoughExamples(format!("need at least 2 folds, got {folds}")));
    }
    if examples.len() < folds {
        return Err(Error::NotEnoughExamples(format!(
            "{} examples cannot fill {folds} folds",
            examples.len()
        )));
    }
    let assignments = fold_assignments(examples.len(), folds, seed);
    let reports: Vec<EvaluationReport> = assignments
        .par_iter()
        .enumerate()
        .map(|(k, test_idx)| {
            let mut in_test = vec![false; examples.len()];
            test_idx.iter().for_each(|&i| in_test[i] = true);
            let train_set: Vec<LabeledExample> = examples
                .iter()
                .zip(&in_test)
                .filter(|(_, &t)| !t)
                .map(|(e, _)| e.clone())
                .collect();
            let fold_hp = Hyperparams {
                seed: hp.seed.wrapping_add(k as u64),
                ..*hp
            };
            let model = train(&train_set, &fold_hp)?;
            evaluate(&model, &pick(examples, test_idx))
        })
        .collect::<Result<_>>()?;
    let acc: Vec<f64> = reports.iter().map(|r| r.accuracy).collect();
    let frac: Vec<f64> = reports.iter().filter_map(|r| r.fraction_score).collect();
    let (mean_accuracy, std_accuracy) = mean_std(&acc).expect("at least two folds");
    let fs = mean_std(&frac);
    Ok(CrossValidation {
        folds: reports,
        assignments,
        mean_accuracy,
        std_accuracy,
        mean_fraction_score: fs.map(|x| x.0),
        std_fraction_score: fs.map(|x| x.1),
    })
}

/// Validation criterion for grid search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Objective {
    Accuracy,
    /// Maximises `min(f, 1/f)` of the fraction score `f`.
    FractionScore,
}

impl Objective {
    pub fn score(self, report: &EvaluationReport) -> f64 {
        match self {
            Objective::Accuracy => report.accuracy,
            Objective::FractionScore => report.symmetric_fraction_score(),
        }
    }
}

/// Candidate values per searched hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dims: Vec<usize>,
    pub epochs: Vec<usize>,
    pub lrs: Vec<f64>,
}

impl Grid {
    /// A coarse grid spanning dimension 10-300, epochs 10-500 and learning
    /// rate 0.05-1.0.
    pub fn default_bounds() -> Self {
        Grid {
            dims: vec![10, 50, 100, 200, 300],
            epochs: vec![10, 50, 100, 200, 500],
            lrs: vec![0.05, 0.1, 0.2, 0.5, 1.0],
        }
    }

    /// Configurations in preference order: smaller dim, then fewer epochs,
    /// then smaller lr. Duplicates are dropped.
    pub fn configs(&self, base: &Hyperparams) -> Vec<Hyperparams> {
        let mut dims = self.dims.clone();
        dims.sort_unstable();
        dims.dedup();
        let mut epochs = self.epochs.clone();
        epochs.sort_unstable();
        epochs.dedup();
        let mut lrs = self.lrs.clone();
        lrs.sort_by(f64::total_cmp);
        lrs.dedup();
        let mut out = Vec::new();
        for &dim in &dims {
            for &ep in &epochs {
                for &lr in &lrs {
                    out.push(Hyperparams {
                        dim,
                        epochs: ep,
                        lr,
                        ..*base
                    });
                }
            }
        }
        out
    }
}

/// One evaluated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub hyperparams: Hyperparams,
    pub score: f64,
    pub validation: EvaluationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchReport {
    pub objective: Objective,
    pub best: Hyperparams,
    pub validation: EvaluationReport,
    pub test: EvaluationReport,
    pub split: [usize; 3],
    pub trials: Vec<Trial>,
}

/// Sizes of the train/validation/test split: 10% each for validation and
/// test (at least one example each), the rest for training.
pub fn split_sizes(n: usize) -> Result<[usize; 3]> {
    let held = ((n as f64 * 0.1).round() as usize).max(1);
    if n < 2 * held + 2 {
        return Err(Error::NotEnoughExamples(format!(
            "{n} examples are too few for an 80/10/10 split"
        )));
    }
    Ok([n - 2 * held, held, held])
}

/// Trains every grid configuration on the training split, selects by the
/// objective on the validation split and reports the winner once on the
/// test split. Also returns the winning model.
pub fn grid_search(
    examples: &[LabeledExample],
    grid: &Grid,
    base: &Hyperparams,
    objective: Objective,
    seed: u64,
) -> Result<(GridSearchReport, StanceModel)> {
    let configs: Vec<Hyperparams> = grid
        .configs(base)
        .into_iter()
        .enumerate()
        .map(|(i, hp)| Hyperparams {
            seed: seed.wrapping_add(i as u64),
            ..hp
        })
        .collect();
    if configs.is_empty() {
        return Err(Error::Hyperparams("empty grid".into()));
    }
    let split = split_sizes(examples.len())?;
    let order = shuffled_indices(examples.len(), seed);
    let train_set = pick(examples, &order[..split[0]]);
    let val_set = pick(examples, &order[split[0]..split[0] + split[1]]);
    let test_set = pick(examples, &order[split[0] + split[1]..]);

    let trials: Vec<Trial> = configs
        .par_iter()
        .map(|hp| {
            let model = train(&train_set, hp)?;
            let validation = evaluate(&model, &val_set)?;
            Ok(Trial {
                hyperparams: *hp,
                score: objective.score(&validation),
                validation,
            })
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (i, t) in trials.iter().enumerate() {
        if t.score > trials[best].score {
            best = i;
        }
    }
    let best_hp = trials[best].hyperparams;
    let model = train(&train_set, &best_hp)?;
    let test = evaluate(&model, &test_set)?;
    Ok((
        GridSearchReport {
            objective,
            best: best_hp,
            validation: trials[best].validation.clone(),
            test,
            split,
            trials,
        },
        model,
    ))
}

/// Learning-curve settings. `test_size` examples are held out once and
/// shared by every size and repeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveParams {
    pub train_sizes: Vec<usize>,
    pub repeats: usize,
    pub test_size: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub size: usize,
    pub mean_accuracy: f64,
    /// Mean over repeats where the fraction score is defined.
    pub mean_fraction_score: Option<f64>,
    pub accuracies: Vec<f64>,
}

/// Held-out test indices and, per repeat, the order in which the training
/// pool is consumed. Training subsets are prefixes of that order, so
/// smaller subsets are nested in larger ones.
pub fn curve_orders(n: usize, test_size: usize, repeats: usize, seed: u64) -> (Vec<usize>, Vec<Vec<usize>>) {
    let order = shuffled_indices(n, seed);
    let test = order[..test_size].to_vec();
    let pool = &order[test_size..];
    let pools = (0..repeats)
        .map(|r| {
            let mut p = pool.to_vec();
            p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(1 + r as u64)));
            p
        })
        .collect();
    (test, pools)
}

pub fn learning_curve(
    examples: &[LabeledExample],
    hp: &Hyperparams,
    params: &CurveParams,
) -> Result<Vec<CurvePoint>> {
    let sizes = &params.train_sizes;
    if sizes.is_empty() || params.repeats == 0 || params.test_size == 0 {
        return Err(Error::NotEnoughExamples(
            "learning curve needs sizes, repeats and a test set".into(),
        ));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] == 0 {
        return Err(Error::NotEnoughExamples("train sizes must be positive and increasing".into()));
    }
    let largest = *sizes.last().expect("non-empty");
    if largest + params.test_size > examples.len() {
        return Err(Error::NotEnoughExamples(format!(
            "largest size {largest} plus test size {} exceeds {} examples",
            params.test_size,
            examples.len()
        )));
    }
    let (test_idx, pools) = curve_orders(examples.len(), params.test_size, params.repeats, params.seed);
    let test = pick(examples, &test_idx);

    // reports[repeat][size]
    let reports: Vec<Vec<EvaluationReport>> = pools
        .par_iter()
        .enumerate()
        .map(|(r, pool)| {
            let rep_hp = Hyperparams {
                seed: hp.seed.wrapping_add(r as u64),
                ..*hp
            };
            sizes
                .iter()
                .map(|&size| {
                    let model = train(&pick(examples, &pool[..size]), &rep_hp)?;
                    evaluate(&model, &test)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok(sizes
        .iter()
        .enumerate()
        .map(|(s, &size)| {
            let accuracies: Vec<f64> = reports.iter().map(|r| r[s].accuracy).collect();
            let fracs: Vec<f64> = reports.iter().filter_map(|r| r[s].fraction_score).collect();
            CurvePoint {
                size,
                mean_accuracy: accuracies.iter().sum::<f64>() / accuracies.len() as f64,
                mean_fraction_score: mean_std(&fracs).map(|x| x.0),
                accuracies,
            }
        })
        .collect())
}
