mod common;

use antijam::positioning::{
    positions_jacobian, ratios_to_positions, validate_layout, Branch, SpacingRatios, MIN_RATIO,
};
use antijam::SystemConfig;
use common::gradient_error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_ratios<R: Rng>(rng: &mut R, len: usize) -> SpacingRatios {
    SpacingRatios::new(
        (0..len)
            .map(|_| rng.random_range(MIN_RATIO..=1.0))
            .collect(),
    )
    .unwrap()
}

fn numeric_jacobian(r: &SpacingRatios, cfg: &SystemConfig, h: f64) -> Vec<Vec<f64>> {
    let base = r.as_slice();
    (0..base.len())
        .map(|m| {
            let at = |d: f64| {
                let mut v = base.to_vec();
                v[m] += d;
                ratios_to_positions(&SpacingRatios::clamped(v), cfg)
                    .unwrap()
                    .layout
                    .positions()
                    .to_vec()
            };
            let (plus, minus) = (at(h), at(-h));
            plus.iter()
                .zip(&minus)
                .map(|(p, q)| (p - q) / (2.0 * h))
                .collect()
        })
        .collect()
}

#[test]
fn random_ratios_always_give_feasible_layouts() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut branches = [0usize; 2];
    for i in 0..100_000 {
        let n = 2 + i % 15;
        let cfg = SystemConfig::default()
            .with_elements(n)
            .with_region(0.5 * (n - 1) as f64 + rng.random_range(0.0..8.0));
        let r = random_ratios(&mut rng, n - 1);
        let out = ratios_to_positions(&r, &cfg).unwrap();
        let violations = validate_layout(&out.layout, &cfg);
        assert!(
            violations.is_empty(),
            "{r:?} -> {:?}: {violations:?}",
            out.layout
        );
        assert_eq!(out.layout.positions()[0], 0.0);
        match out.branch {
            Branch::Tentative => {
                branches[0] += 1;
                assert_eq!(out.delta, cfg.min_spacing);
            }
            Branch::Rescaled => {
                branches[1] += 1;
                assert!((out.layout.positions()[n - 1] - cfg.region_size).abs() <= 1e-9);
            }
        }
    }
    assert!(branches.iter().all(|&c| c > 1000), "{branches:?}");
}

#[test]
fn quarter_ratio_example_is_exact() {
    let cfg = SystemConfig::default();
    let out = ratios_to_positions(&SpacingRatios::new(vec![0.25; 7]).unwrap(), &cfg).unwrap();
    assert_eq!(out.branch, Branch::Rescaled);
    assert_eq!(out.delta, 1.0 / 6.0);
    let expected: Vec<f64> = (0..8).map(f64::from).collect();
    for (x, e) in out.layout.positions().iter().zip(&expected) {
        assert!((x - e).abs() <= 1e-12, "{:?}", out.layout.positions());
    }
}

#[test]
fn jacobian_matches_finite_differences_on_both_branches() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = 1e-7;
    let mut seen = [false; 2];
    let mut worst = 0.0f64;
    for _ in 0..400 {
        let n = rng.random_range(2..=10);
        let cfg = SystemConfig::default().with_elements(n);
        let r = SpacingRatios::new((0..n - 1).map(|_| rng.random_range(0.05..=0.95)).collect())
            .unwrap();
        let out = ratios_to_positions(&r, &cfg).unwrap();
        // Skip points within the finite-difference stencil of the branch switch.
        let tentative_end: f64 = r.as_slice().iter().map(|x| cfg.min_spacing / x).sum();
        if (tentative_end - cfg.region_size).abs() < 1e-3 {
            continue;
        }
        seen[(out.branch == Branch::Rescaled) as usize] = true;
        let jac = positions_jacobian(&r, &cfg).unwrap();
        let numeric = numeric_jacobian(&r, &cfg, h);
        for (m, col) in numeric.iter().enumerate() {
            let analytic: Vec<f64> = (0..n).map(|row| jac.get(row, m)).collect();
            worst = worst.max(gradient_error(&analytic, col));
        }
    }
    assert!(seen[0] && seen[1]);
    assert!(worst < 1e-5, "worst relative error {worst:e}");
}

#[test]
fn branches_agree_at_the_boundary() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let n = rng.random_range(2..=12);
        let cfg = SystemConfig::default().with_elements(n);
        let r: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.05..=1.0)).collect();
        // Choose L so that the tentative layout ends exactly on it.
        let end: f64 = r.iter().map(|x| cfg.min_spacing / x).sum();
        let cfg = cfg.with_region(end);
        let tentative: Vec<f64> = std::iter::once(0.0)
            .chain(r.iter().scan(0.0, |acc, x| {
                *acc += cfg.min_spacing / x;
                Some(*acc)
            }))
            .collect();
        // Rescale formula evaluated directly at the boundary.
        let excess: f64 = r.iter().map(|x| 1.0 / x - 1.0).sum();
        if excess < 1e-6 {
            continue;
        }
        let delta = (cfg.region_size - cfg.min_aperture()) / excess;
        assert!((delta - cfg.min_spacing).abs() < 1e-9);
        let mut x = 0.0;
        let mut rescaled = vec![0.0];
        for ri in &r {
            x += cfg.min_spacing + delta * (1.0 / ri - 1.0);
            rescaled.push(x);
        }
        for (a, b) in tentative.iter().zip(&rescaled) {
            assert!((a - b).abs() < 1e-9);
        }
        let out = ratios_to_positions(&SpacingRatios::new(r).unwrap(), &cfg).unwrap();
        for (a, b) in out.layout.positions().iter().zip(&tentative) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

proptest! {
    #[test]
    fn positions_strictly_increase(
        r in prop::collection::vec(MIN_RATIO..=1.0f64, 1..16),
        extra in 0.0f64..10.0,
    ) {
        let n = r.len() + 1;
        let cfg = SystemConfig::default().with_elements(n).with_region(0.5 * r.len() as f64 + extra);
        let out = ratios_to_positions(&SpacingRatios::new(r).unwrap(), &cfg).unwrap();
        let xs = out.layout.positions();
        prop_assert!(xs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn shrinking_a_ratio_never_pulls_later_elements_back(
        r in prop::collection::vec(0.2..=1.0f64, 1..10),
        pick in any::<prop::sample::Index>(),
        factor in 0.5f64..1.0,
    ) {
        // A large region keeps both evaluations on the tentative branch.
        let n = r.len() + 1;
        let cfg = SystemConfig::default().with_elements(n).with_region(1e3);
        let m = pick.index(r.len());
        let mut smaller = r.clone();
        smaller[m] *= factor;
        let a = ratios_to_positions(&SpacingRatios::new(r).unwrap(), &cfg).unwrap();
        let b = ratios_to_positions(&SpacingRatios::new(smaller).unwrap(), &cfg).unwrap();
        prop_assert_eq!(a.branch, Branch::Tentative);
        prop_assert_eq!(b.branch, Branch::Tentative);
        for i in (m + 1)..n {
            prop_assert!(b.layout.positions()[i] >= a.layout.positions()[i]);
        }
    }
}
