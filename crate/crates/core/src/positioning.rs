//! Spacing-ratio parametrization of feasible layouts.
//!
//! A network emits one ratio `rₙ = d_min / (xₙ₊₁ − xₙ)` per gap. Tentative
//! positions follow directly from the ratios; if they overflow the region the
//! excess spacing is rescaled by `δ` so that the last element sits at `L`.

use std::fmt;

use crate::array::ArrayLayout;
use crate::config::{SystemConfig, LAYOUT_TOLERANCE};
use crate::error::{Error, Result};

/// Lower clamp applied to every ratio so that `1/r` stays bounded.
pub const MIN_RATIO: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct SpacingRatios(Vec<f64>);

impl SpacingRatios {
    pub fn new(ratios: Vec<f64>) -> Result<Self> {
        if let Some((i, r)) = ratios
            .iter()
            .enumerate()
            .find(|(_, r)| !(MIN_RATIO..=1.0).contains(*r))
        {
            return Err(Error::InvalidRatios(format!(
                "ratio {i} = {r} outside [{MIN_RATIO}, 1]"
            )));
        }
        Ok(Self(ratios))
    }

    /// Clamps each value into `[MIN_RATIO, 1]`; NaN maps to `MIN_RATIO`.
    pub fn clamped(ratios: Vec<f64>) -> Self {
        Self(
            ratios
                .into_iter()
                .map(|r| {
                    if r.is_nan() {
                        MIN_RATIO
                    } else {
                        r.clamp(MIN_RATIO, 1.0)
                    }
                })
                .collect(),
        )
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Tentative positions already fit in the region.
    Tentative,
    /// Excess spacing rescaled so the last element lands on `L`.
    Rescaled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutResult {
    pub layout: ArrayLayout,
    pub branch: Branch,
    /// Multiplier applied to the excess spacing `1/rₙ − 1`.
    pub delta: f64,
}

fn check_len(r: &SpacingRatios, cfg: &SystemConfig) -> Result<()> {
    let expected = cfg.num_elements.saturating_sub(1);
    if r.len() != expected {
        return Err(Error::DimensionMismatch {
            context: "spacing ratios",
            expected,
            found: r.len(),
        });
    }
    Ok(())
}

/// Prefix sums `Pₙ = Σ_{m<n} (1/r_m − 1)` for n = 1..N (P₁ = 0).
fn excess_prefix(r: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(r.len() + 1);
    out.push(0.0);
    for &rm in r {
        acc += 1.0 / rm - 1.0;
        out.push(acc);
    }
    out
}

fn tentative_end(r: &[f64], d_min: f64) -> f64 {
    d_min * r.iter().map(|rm| 1.0 / rm).sum::<f64>()
}

pub fn ratios_to_positions(r: &SpacingRatios, cfg: &SystemConfig) -> Result<LayoutResult> {
    check_len(r, cfg)?;
    let d = cfg.min_spacing;
    let ratios = r.as_slice();

    if tentative_end(ratios, d) <= cfg.region_size {
        let mut positions = Vec::with_capacity(ratios.len() + 1);
        let mut x = 0.0;
        positions.push(x);
        for &rm in ratios {
            x += d / rm;
            positions.push(x);
        }
        return Ok(LayoutResult {
            layout: ArrayLayout::new(positions)?,
            branch: Branch::Tentative,
            delta: d,
        });
    }

    let prefix = excess_prefix(ratios);
    let total = *prefix.last().expect("prefix is never empty");
    // Σ(1/r − 1) ≥ x̃_N/d − (N−1) > 0 whenever the tentative layout overflows.
    assert!(
        total > 1e-12,
        "rescale branch with vanishing excess spacing"
    );
    let slack = cfg.region_size - cfg.min_aperture();
    let delta = slack / total;
    let last = prefix.len() - 1;
    let positions = prefix
        .iter()
        .enumerate()
        .map(|(n, &p)| {
            if n == last {
                cfg.region_size
            } else {
                n as f64 * d + slack * (p / total)
            }
        })
        .collect();
    Ok(LayoutResult {
        layout: ArrayLayout::new(positions)?,
        branch: Branch::Rescaled,
        delta,
    })
}

/// Row-major N×(N−1) matrix of `∂xₙ/∂r_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Jacobian {
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.data[n * self.cols + m]
    }

    /// `Jᵀ g` for a gradient `g` over positions.
    pub fn transpose_mul(&self, g: &[f64]) -> Vec<f64> {
        assert_eq!(g.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (n, gn) in g.iter().enumerate() {
            let row = &self.data[n * self.cols..(n + 1) * self.cols];
            for (o, j) in out.iter_mut().zip(row) {
                *o += j * gn;
            }
        }
        out
    }
}

/// Jacobian of [`ratios_to_positions`] on the branch it takes for `r`.
pub fn positions_jacobian(r: &SpacingRatios, cfg: &SystemConfig) -> Result<Jacobian> {
    check_len(r, cfg)?;
    let ratios = r.as_slice();
    let d = cfg.min_spacing;
    let rows = ratios.len() + 1;
    let cols = ratios.len();
    let mut data = vec![0.0; rows * cols];

    if tentative_end(ratios, d) <= cfg.region_size {
        for n in 0..rows {
            for (m, &rm) in ratios.iter().enumerate().take(n) {
                data[n * cols + m] = -d / (rm * rm);
            }
        }
    } else {
        // xₙ = (n−1)d + δPₙ with δ = (L − (N−1)d)/S, S = P_N:
        // ∂xₙ/∂r_m = (δ/r_m²)(Pₙ/S − [m < n]).
        let prefix = excess_prefix(ratios);
        let total = prefix[cols];
        let delta = (cfg.region_size - cfg.min_aperture()) / total;
        for (n, &p) in prefix.iter().enumerate() {
            let frac = p / total;
            for (m, &rm) in ratios.iter().enumerate() {
                let step = if m < n { 1.0 } else { 0.0 };
                data[n * cols + m] = delta / (rm * rm) * (frac - step);
            }
        }
    }
    Ok(Jacobian { rows, cols, data })
}

/// A violated layout constraint. Element indices are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Element lies outside `[0, L]`; `excess` is the distance to the region.
    OutOfRegion { index: usize, excess: f64 },
    /// Gap between elements `index − 1` and `index` is short of `d_min` by `shortfall`.
    Spacing { index: usize, shortfall: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OutOfRegion { index, excess } => {
                write!(f, "element {index} lies {excess} outside the region")
            }
            Violation::Spacing { index, shortfall } => {
                write!(f, "gap before element {index} is {shortfall} below d_min")
            }
        }
    }
}

pub fn validate_layout(layout: &ArrayLayout, cfg: &SystemConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let xs = layout.positions();
    for (i, &x) in xs.iter().enumerate() {
        let excess = if x < 0.0 {
            -x
        } else if x > cfg.region_size {
            x - cfg.region_size
        } else {
            0.0
        };
        if excess > LAYOUT_TOLERANCE {
            out.push(Violation::OutOfRegion {
                index: i + 1,
                excess,
            });
        }
    }
    for (i, pair) in xs.windows(2).enumerate() {
        let shortfall = cfg.min_spacing - (pair[1] - pair[0]);
        if shortfall > LAYOUT_TOLERANCE {
            out.push(Violation::Spacing {
                index: i + 2,
                shortfall,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize) -> SystemConfig {
        SystemConfig::default().with_elements(n)
    }

    fn ratios(v: &[f64]) -> SpacingRatios {
        SpacingRatios::new(v.to_vec()).unwrap()
    }

    fn assert_positions(got: &ArrayLayout, expected: &[f64]) {
        assert_eq!(got.len(), expected.len());
        for (g, e) in got.positions().iter().zip(expected) {
            assert!(
                (g - e).abs() < 1e-12,
                "{:?} vs {:?}",
                got.positions(),
                expected
            );
        }
    }

    #[test]
    fn unit_ratios_pack_at_min_spacing() {
        let out = ratios_to_positions(&ratios(&[1.0; 7]), &cfg(8)).unwrap();
        assert_eq!(out.branch, Branch::Tentative);
        assert_eq!(out.delta, 0.5);
        let expected: Vec<f64> = (0..8).map(|n| 0.5 * n as f64).collect();
        assert_positions(&out.layout, &expected);
    }

    #[test]
    fn half_ratios_exactly_fill_region() {
        let out = ratios_to_positions(&ratios(&[0.5; 7]), &cfg(8)).unwrap();
        assert_eq!(out.branch, Branch::Tentative);
        let expected: Vec<f64> = (0..8).map(f64::from).collect();
        assert_positions(&out.layout, &expected);
    }

    #[test]
    fn quarter_ratios_are_rescaled() {
        let out = ratios_to_positions(&ratios(&[0.25; 7]), &cfg(8)).unwrap();
        assert_eq!(out.branch, Branch::Rescaled);
        assert!((out.delta - 1.0 / 6.0).abs() < 1e-15);
        let expected: Vec<f64> = (0..8).map(f64::from).collect();
        assert_positions(&out.layout, &expected);
        assert_eq!(out.layout.positions()[7], 7.0);
    }

    #[test]
    fn wrong_ratio_count_is_rejected() {
        assert!(ratios_to_positions(&ratios(&[0.5; 3]), &cfg(8)).is_err());
    }

    #[test]
    fn ratios_outside_range_are_rejected() {
        assert!(SpacingRatios::new(vec![0.0]).is_err());
        assert!(SpacingRatios::new(vec![1.5]).is_err());
        assert_eq!(
            SpacingRatios::clamped(vec![0.0, 2.0]).as_slice(),
            &[MIN_RATIO, 1.0]
        );
    }

    #[test]
    fn jacobian_tentative_hand_values() {
        let j = positions_jacobian(&ratios(&[0.5, 0.5]), &cfg(3)).unwrap();
        assert_eq!((j.rows, j.cols), (3, 2));
        assert_eq!(j.get(0, 0), 0.0);
        assert_eq!(j.get(0, 1), 0.0);
        assert_eq!(j.get(1, 0), -2.0);
        assert_eq!(j.get(1, 1), 0.0);
        assert_eq!(j.get(2, 0), -2.0);
        assert_eq!(j.get(2, 1), -2.0);
    }

    #[test]
    fn jacobian_at_unit_ratios() {
        let j = positions_jacobian(&ratios(&[1.0; 4]), &cfg(5)).unwrap();
        for n in 0..5 {
            for m in 0..4 {
                let e = if m < n { -0.5 } else { 0.0 };
                assert_eq!(j.get(n, m), e);
            }
        }
    }

    #[test]
    fn rescaled_jacobian_pins_both_ends() {
        let j = positions_jacobian(&ratios(&[0.1, 0.3, 0.2]), &cfg(4)).unwrap();
        for m in 0..3 {
            assert_eq!(j.get(0, m), 0.0);
            assert!(j.get(3, m).abs() < 1e-12);
        }
    }

    #[test]
    fn validate_feasible_layout() {
        let l = ArrayLayout::new(vec![0.0, 0.5, 1.0]).unwrap();
        assert!(validate_layout(&l, &cfg(3)).is_empty());
    }

    #[test]
    fn validate_reports_spacing_violation() {
        let l = ArrayLayout::new(vec![0.0, 0.3]).unwrap();
        let v = validate_layout(&l, &cfg(2));
        assert_eq!(v.len(), 1);
        match v[0] {
            Violation::Spacing { index, shortfall } => {
                assert_eq!(index, 2);
                assert!((shortfall - 0.2).abs() < 1e-12);
            }
            ref other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validate_reports_range_violation() {
        let l = ArrayLayout::new(vec![0.0, 8.0]).unwrap();
        let v = validate_layout(&l, &cfg(2));
        assert_eq!(
            v,
            vec![Violation::OutOfRegion {
                index: 2,
                excess: 1.0
            }]
        );
    }
}
