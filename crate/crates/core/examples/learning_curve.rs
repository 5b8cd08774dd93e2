//! Accuracy as a function of training-set size on noisy synthetic labels.
//!
//!     cargo run --release --example learning_curve -- [epochs]

use opinion_pulse::stance::{learning_curve, CurveParams, Hyperparams};
use opinion_pulse::synthetic;

fn main() -> opinion_pulse::Result<()> {
    let epochs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(25);
    let data = synthetic::noisy(1300, 30, 0.1, 4);
    let hp = Hyperparams { dim: 16, epochs, lr: 0.3, ..Hyperparams::default() };
    let params = CurveParams {
        train_sizes: vec![50, 100, 200, 400, 800],
        repeats: 5,
        test_size: 500,
        seed: 42,
    };
    println!("size  mean_acc  mean_fraction  per-repeat");
    for p in learning_curve(&data, &hp, &params)? {
        let frac = p.mean_fraction_score.map_or("n/a".to_string(), |f| format!("{f:.3}"));
        let reps: Vec<String> = p.accuracies.iter().map(|a| format!("{a:.3}")).collect();
        println!("{:>4}  {:>8.3}  {:>13}  {}", p.size, p.mean_accuracy, frac, reps.join(" "));
    }
    Ok(())
}
