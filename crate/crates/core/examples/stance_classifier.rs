//! Trains the stance classifier, evaluates it, round-trips the model file
//! and runs 10-fold cross-validation.
//!
//!     cargo run --release --example stance_classifier

use opinion_pulse::stance::{cross_validate, evaluate, train_traced, Hyperparams, StanceModel};
use opinion_pulse::synthetic;

fn main() -> opinion_pulse::Result<()> {
    let data = synthetic::noisy(1000, 25, 0.1, 1);
    let (train_set, test_set) = data.split_at(800);
    let hp = Hyperparams { dim: 32, epochs: 25, lr: 0.3, ..Hyperparams::default() };

    let (model, losses) = train_traced(train_set, &hp, true)?;
    println!("epoch losses: {:?}", losses.iter().map(|l| format!("{l:.3}")).collect::<Vec<_>>());
    let report = evaluate(&model, test_set)?;
    println!("test accuracy {:.3}, fraction score {:?}", report.accuracy, report.fraction_score);
    println!("confusion (rows gold S/R/O, cols predicted): {:?}", report.confusion);

    let restored = StanceModel::from_bytes(&model.to_bytes()?)?;
    let p = restored.predict(&test_set[0].text);
    println!("reloaded model predicts {} {:?} for {:?}", p.label, p.probs, test_set[0].text);

    let cv = cross_validate(&data, &hp, 10, 42)?;
    println!(
        "10-fold accuracy {:.3} +- {:.3}, fraction score {:?}",
        cv.mean_accuracy, cv.std_accuracy, cv.mean_fraction_score
    );
    Ok(())
}
