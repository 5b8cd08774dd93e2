//! Stance classification: annotation sampling, inter-annotator agreement,
//! a subword-augmented linear classifier and its evaluation harness.

mod annotate;
mod features;
mod harness;
mod label;
mod metrics;
mod model;
pub mod network;

pub use annotate::{label_corpus, prepare_annotation_set, write_annotation_template, LabeledMessage, LabeledRow};
pub use features::{char_ngrams, fnv1a, Featurizer};
pub use harness::{
    cross_validate, curve_orders, fold_assignments, grid_search, learning_curve, split_sizes, CrossValidation,
    CurveParams, CurvePoint, Grid, GridSearchReport, Objective, Trial,
};
pub use label::{load_labels, parse_labels, sanitize_text, write_labels, Label, LabeledExample, NUM_LABELS};
pub use metrics::{evaluate, kappa, AgreementReport, EvaluationReport};
pub use model::{argmax, train, train_traced, Hyperparams, Prediction, StanceModel};

#[cfg(test)]
pub(crate) mod test_support {
    pub use crate::synthetic::separable;
}
