//! Train the positioning network at desk scale and compare it with the
//! baselines on held-out scenes.
//!
//! ```bash
//! cargo run --release --example train_and_compare [epochs] [lr] [momentum] [featurization]
//! ```

use std::time::Instant;

use antijam::baselines::{ao, fpv, rpb, AoConfig};
use antijam::training::{evaluate, holdout_scenes, train, Featurization, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn main() -> antijam::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let epochs = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let learning_rate = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.1);
    let momentum =
        Some(args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.9)).filter(|&m: &f64| m > 0.0);
    let featurization = args
        .get(4)
        .and_then(|s| s.parse().ok())
        .unwrap_or(Featurization::Cosine);
    let cfg = TrainConfig {
        dataset_size: 10_000,
        epochs,
        learning_rate,
        momentum,
        featurization,
        batch_size: 10,
        seed: 1,
        require_progress: false,
        start_at_fixed_array: true,
        ..TrainConfig::default()
    };
    let start = Instant::now();
    let (params, history) = train(&cfg)?;
    for e in &history.epochs {
        println!(
            "epoch {:>2}  loss {:.5}  mean SINR {:.3} dB  ({:.1}s)",
            e.epoch, e.mean_loss, e.mean_sinr_db, e.seconds
        );
    }
    println!("trained in {:.1}s", start.elapsed().as_secs_f64());

    let system = &cfg.system;
    let scenes = holdout_scenes(1000, system.num_jammers, None, cfg.seed);
    let learned = evaluate(&params, &scenes, system, cfg.featurization)?;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut fixed = Vec::new();
    let mut random = Vec::new();
    let mut optimized = Vec::new();
    for s in &scenes {
        fixed.push(fpv(s, system)?.sinr);
        random.push(rpb(s, system, &mut rng)?.sinr);
        optimized.push(ao(s, system, &AoConfig::default())?.strategy.sinr);
    }
    println!("mean linear SINR over {} held-out scenes:", scenes.len());
    println!("  learned {:.3}", mean(&learned));
    println!("  AO      {:.3}", mean(&optimized));
    println!("  FPV     {:.3}", mean(&fixed));
    println!("  RPB     {:.3}", mean(&random));
    println!("learned / AO = {:.3}", mean(&learned) / mean(&optimized));
    Ok(())
}
