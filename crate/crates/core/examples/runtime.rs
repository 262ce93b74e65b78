//! Per-scene runtime of every scheme as the jammer count grows.
//!
//! ```bash
//! cargo run --release --example runtime
//! ```

use antijam::experiments::{bench_runtime, BenchSpec};

fn main() -> antijam::Result<()> {
    let spec = BenchSpec {
        elements: vec![8],
        ..BenchSpec::default()
    };
    for r in bench_runtime(&spec)? {
        println!(
            "{:<7} N={} K={}  mean {:>9.4} ms  p95 {:>9.4} ms",
            r.scheme, r.num_elements, r.num_jammers, r.mean_ms, r.p95_ms
        );
    }
    println!("(FPV and RPB rows time 100 back-to-back runs)");
    Ok(())
}
