//! The three reference schemes on a single scene.
//!
//! ```bash
//! cargo run --release --example baselines
//! ```

use std::f64::consts::PI;

use antijam::baselines::{ao, fpv, rpb, AoConfig};
use antijam::{Scene, Strategy, SystemConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn report(name: &str, s: &Strategy) {
    let xs: Vec<String> = s
        .layout
        .positions()
        .iter()
        .map(|x| format!("{x:.2}"))
        .collect();
    println!("{name:<4} {:>7.2} dB  x = [{}]", s.sinr_db(), xs.join(", "));
}

fn main() -> antijam::Result<()> {
    let cfg = SystemConfig::default();
    let scene = Scene::new(0.4 * PI, vec![0.35 * PI, 0.55 * PI, 0.9 * PI])?;

    report("FPV", &fpv(&scene, &cfg)?);
    report(
        "RPB",
        &rpb(&scene, &cfg, &mut ChaCha8Rng::seed_from_u64(3))?,
    );
    let out = ao(&scene, &cfg, &AoConfig::default())?;
    report("AO", &out.strategy);
    println!("AO sweeps: {}  trace: {:.3?}", out.sweeps_used, out.trace);
    Ok(())
}
