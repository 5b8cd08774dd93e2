//! Selects hyperparameters on a validation split by fraction score and
//! reports the winner once on the test split.
//!
//!     cargo run --release --example grid_search

use opinion_pulse::stance::{grid_search, Grid, Hyperparams, Objective};
use opinion_pulse::synthetic;

fn main() -> opinion_pulse::Result<()> {
    let data = synthetic::noisy(1000, 25, 0.1, 3);
    let grid = Grid { dims: vec![10, 50], epochs: vec![10, 30], lrs: vec![0.1, 0.2] };
    let (report, _model) = grid_search(&data, &grid, &Hyperparams::default(), Objective::FractionScore, 42)?;
    println!("split train/validation/test = {:?}", report.split);
    for t in &report.trials {
        let h = &t.hyperparams;
        println!(
            "dim {:>3} epochs {:>3} lr {:.2}  score {:.3}  acc {:.3}",
            h.dim, h.epochs, h.lr, t.score, t.validation.accuracy
        );
    }
    let b = &report.best;
    println!(
        "best dim {} epochs {} lr {}: test accuracy {:.3}, fraction score {:?}",
        b.dim, b.epochs, b.lr, report.test.accuracy, report.test.fraction_score
    );
    Ok(())
}
