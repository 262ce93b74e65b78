//! Jammer-count sweep with a small network retrained at every point.
//!
//! ```bash
//! cargo run --release --example sweep [trials]
//! ```

use antijam::experiments::{run_sweep, write_sweep_csv, LearnedModel, SweepSpec, SweepVariable};
use antijam::training::{Featurization, TrainConfig};

fn main() -> antijam::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(50);
    let mut spec = SweepSpec::new(SweepVariable::NumJammers);
    spec.trials = trials;
    spec.learned = LearnedModel::Retrain(TrainConfig {
        dataset_size: 5_000,
        epochs: 5,
        batch_size: 10,
        learning_rate: 0.1,
        momentum: Some(0.9),
        featurization: Featurization::Cosine,
        require_progress: false,
        start_at_fixed_array: true,
        ..TrainConfig::default()
    });
    let rows = run_sweep(&spec)?;
    for r in &rows {
        println!(
            "K={}  {:<7} {:>7.2} dB ± {:.2}",
            r.variable_value, r.scheme, r.mean_sinr_db, r.std_sinr_db
        );
    }
    let out = std::env::temp_dir().join("antijam-jammer-sweep.csv");
    write_sweep_csv(&rows, &out)?;
    println!("wrote {}", out.display());
    Ok(())
}
