//! Mapping spacing ratios to feasible antenna positions.
//!
//! ```bash
//! cargo run --release --example spacing_ratios
//! ```

use antijam::positioning::{ratios_to_positions, validate_layout, SpacingRatios};
use antijam::SystemConfig;

fn show(label: &str, ratios: Vec<f64>, cfg: &SystemConfig) -> antijam::Result<()> {
    let r = SpacingRatios::new(ratios)?;
    let out = ratios_to_positions(&r, cfg)?;
    let xs: Vec<String> = out
        .layout
        .positions()
        .iter()
        .map(|x| format!("{x:.3}"))
        .collect();
    println!("{label}: {:?} δ={:.4}", out.branch, out.delta);
    println!("  x = [{}]", xs.join(", "));
    println!("  violations: {}", validate_layout(&out.layout, cfg).len());
    Ok(())
}

fn main() -> antijam::Result<()> {
    let cfg = SystemConfig::default();
    show("all ones (tight packing)", vec![1.0; 7], &cfg)?;
    show("all halves (FPV spacing)", vec![0.5; 7], &cfg)?;
    show("all quarters (overflow, rescaled)", vec![0.25; 7], &cfg)?;
    show("mixed", vec![0.9, 0.2, 0.6, 0.05, 1.0, 0.3, 0.7], &cfg)?;
    Ok(())
}
