//! Closed-form receive beamforming for one array and one jamming scene.
//!
//! ```bash
//! cargo run --release --example beamforming
//! ```

use std::f64::consts::PI;

use antijam::array::{optimal_beamformer, sinr, sinr_position_gradient, to_db};
use antijam::{ArrayLayout, Beamformer, Scene, SystemConfig};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> antijam::Result<()> {
    let cfg = SystemConfig::default();
    let scene = Scene::new(PI / 2.0, vec![PI / 6.0, 0.45 * PI, 0.8 * PI])?;
    let layout = ArrayLayout::uniform(cfg.num_elements, 1.0);

    let (w, eta) = optimal_beamformer(&layout, &scene, &cfg)?;
    println!(
        "optimal SINR {:.3} ({:.2} dB), |w| = {:.12}",
        eta,
        to_db(eta),
        w.norm()
    );
    println!("recomputed   {:.3}", sinr(&layout, &w, &scene, &cfg)?);

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let best_random = (0..1000)
        .map(|_| {
            let v = (0..cfg.num_elements)
                .map(|_| {
                    Complex64::new(
                        StandardNormal.sample(&mut rng),
                        StandardNormal.sample(&mut rng),
                    )
                })
                .collect();
            sinr(&layout, &Beamformer::normalized(v).unwrap(), &scene, &cfg).unwrap()
        })
        .fold(0.0, f64::max);
    println!("best of 1000 random beamformers {best_random:.3}");

    let grad = sinr_position_gradient(&layout, &scene, &cfg)?;
    println!("dη/dx:");
    for (x, g) in layout.positions().iter().zip(&grad) {
        println!("  x = {x:>4.1}  {g:+.4}");
    }
    Ok(())
}
