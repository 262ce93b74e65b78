//! Reference schemes: alternating optimization (AO), a fixed uniform array
//! (FPV) and random feasible positioning with random beamforming (RPB).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use std::f64::consts::PI;

use crate::array::{optimal_sinr, sinr, ArrayLayout, Beamformer, Scene, Strategy};
use crate::config::{SystemConfig, LAYOUT_TOLERANCE};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Cholesky};
use crate::positioning::{ratios_to_positions, SpacingRatios, MIN_RATIO};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AoConfig {
    /// Candidate positions per one-dimensional search.
    pub grid_points: usize,
    pub max_sweeps: usize,
    /// Stop once a sweep improves `η*` by less than this relative amount.
    pub tolerance: f64,
}

impl Default for AoConfig {
    fn default() -> Self {
        Self {
            grid_points: 200,
            max_sweeps: 50,
            tolerance: 1e-6,
        }
    }
}

impl AoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 2 {
            return Err(Error::InvalidConfig(
                "grid_points must be at least 2".into(),
            ));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidConfig("max_sweeps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoOutcome {
    pub strategy: Strategy,
    pub sweeps_used: usize,
    /// `η*` at the start and after every completed sweep.
    pub trace: Vec<f64>,
}

/// Uniform array with spacing `2·d_min`.
pub fn fpv_layout(cfg: &SystemConfig) -> Result<ArrayLayout> {
    let spacing = 2.0 * cfg.min_spacing;
    let span = cfg.num_elements.saturating_sub(1) as f64 * spacing;
    if span > cfg.region_size + LAYOUT_TOLERANCE {
        return Err(Error::InfeasibleGeometry(format!(
            "fixed array spans {span} but the region is {}",
            cfg.region_size
        )));
    }
    Ok(ArrayLayout::uniform(cfg.num_elements, spacing))
}

pub fn fpv(scene: &Scene, cfg: &SystemConfig) -> Result<Strategy> {
    Strategy::for_layout(fpv_layout(cfg)?, scene, cfg)
}

/// Random feasible layout from uniform ratios and a random unit beamformer.
pub fn rpb<R: Rng + ?Sized>(scene: &Scene, cfg: &SystemConfig, rng: &mut R) -> Result<Strategy> {
    let n = cfg.num_elements;
    let ratios: Vec<f64> = (0..n.saturating_sub(1))
        .map(|_| rng.random_range(MIN_RATIO..=1.0))
        .collect();
    let layout = ratios_to_positions(&SpacingRatios::new(ratios)?, cfg)?.layout;
    let weights: Vec<Complex64> = (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    let beamformer = Beamformer::normalized(weights)?;
    let sinr = sinr(&layout, &beamformer, scene, cfg)?;
    Ok(Strategy {
        layout,
        beamformer,
        sinr,
    })
}

/// Uniform starting array for AO: the FPV geometry, compressed to fit when
/// `2·d_min` spacing would overflow the region.
pub fn ao_start_layout(cfg: &SystemConfig) -> ArrayLayout {
    let gaps = cfg.num_elements.saturating_sub(1);
    let spacing = if gaps == 0 {
        0.0
    } else {
        (2.0 * cfg.min_spacing).min(cfg.region_size / gaps as f64)
    };
    ArrayLayout::uniform(cfg.num_elements, spacing)
}

/// `η*` restricted to moves of a single element.
///
/// With `J` the power-scaled jammer steering matrix and `c = Jᴴa₀`, Woodbury
/// gives `a₀ᴴB⁻¹a₀ = (N − cᴴ(σ²I + JᴴJ)⁻¹c) / σ²`, so a candidate position
/// costs a K×K solve rather than an N×N one.
struct CoordinateSearch<'a> {
    cfg: &'a SystemConfig,
    source: f64,
    jammers: Vec<f64>,
    amplitude: f64,
}

struct Line<'a> {
    search: &'a CoordinateSearch<'a>,
    num_elements: usize,
    /// `JᴴJ` and `Jᴴa₀` summed over every element except the moving one.
    gram: Vec<Complex64>,
    cross: Vec<Complex64>,
}

fn phase(wave: f64, x: f64) -> Complex64 {
    Complex64::from_polar(1.0, wave * x)
}

impl<'a> CoordinateSearch<'a> {
    fn new(scene: &Scene, cfg: &'a SystemConfig) -> Self {
        let wave = |t: f64| 2.0 * PI * t.cos();
        Self {
            cfg,
            source: wave(scene.source()),
            jammers: scene.jammers().iter().map(|&t| wave(t)).collect(),
            amplitude: cfg.jammer_power.sqrt(),
        }
    }

    fn row(&self, x: f64) -> Vec<Complex64> {
        self.jammers
            .iter()
            .map(|&w| self.amplitude * phase(w, x))
            .collect()
    }

    fn line(&self, xs: &[f64], moving: usize) -> Line<'_> {
        let k = self.jammers.len();
        let mut gram = vec![Complex64::new(0.0, 0.0); k * k];
        let mut cross = vec![Complex64::new(0.0, 0.0); k];
        for (n, &x) in xs.iter().enumerate() {
            if n != moving {
                accumulate(&mut gram, &mut cross, &self.row(x), phase(self.source, x));
            }
        }
        Line {
            search: self,
            num_elements: xs.len(),
            gram,
            cross,
        }
    }
}

fn accumulate(gram: &mut [Complex64], cross: &mut [Complex64], row: &[Complex64], a0: Complex64) {
    let k = row.len();
    for p in 0..k {
        let cp = row[p].conj();
        cross[p] += cp * a0;
        for q in 0..k {
            gram[p * k + q] += cp * row[q];
        }
    }
}

impl Line<'_> {
    fn eval(&self, x: f64) -> Result<f64> {
        let s = self.search;
        let k = s.jammers.len();
        let noise = s.cfg.noise_power;
        let mut gram = self.gram.clone();
        let mut cross = self.cross.clone();
        accumulate(&mut gram, &mut cross, &s.row(x), phase(s.source, x));
        let mut m = CMatrix::zeros(k);
        for p in 0..k {
            for q in 0..k {
                m[(p, q)] = gram[p * k + q];
            }
            m[(p, p)] += noise;
        }
        let y = Cholesky::factor(&m)?.solve(&cross);
        let quad: f64 = cross.iter().zip(&y).map(|(c, y)| (c.conj() * y).re).sum();
        Ok(s.cfg.source_power * (self.num_elements as f64 - quad) / noise)
    }
}

/// Coordinate-wise grid search on `η*(x)`, starting from [`ao_start_layout`].
///
/// Each element moves over the interval its neighbours leave free; a move is
/// accepted only if it strictly improves `η*`.
pub fn ao(scene: &Scene, cfg: &SystemConfig, ao_cfg: &AoConfig) -> Result<AoOutcome> {
    ao_cfg.validate()?;
    cfg.validate()?;
    let mut layout = ao_start_layout(cfg);
    let n = layout.len();
    let search = CoordinateSearch::new(scene, cfg);
    let mut best = optimal_sinr(&layout, scene, cfg)?;
    let mut trace = vec![best];
    let mut sweeps_used = 0;

    for _ in 0..ao_cfg.max_sweeps {
        sweeps_used += 1;
        let start = best;
        for i in 0..n {
            let xs = layout.positions();
            let lo = if i == 0 {
                0.0
            } else {
                xs[i - 1] + cfg.min_spacing
            };
            let hi = if i + 1 == n {
                cfg.region_size
            } else {
                xs[i + 1] - cfg.min_spacing
            };
            if hi < lo {
                continue;
            }
            let mut best_x = xs[i];
            let line = search.line(xs, i);
            for g in 0..ao_cfg.grid_points {
                let t = g as f64 / (ao_cfg.grid_points - 1) as f64;
                let x = lo + t * (hi - lo);
                let eta = line.eval(x)?;
                if eta > best {
                    best = eta;
                    best_x = x;
                }
            }
            layout.positions_mut()[i] = best_x;
        }
        trace.push(best);
        if best - start <= ao_cfg.tolerance * start.abs() {
            break;
        }
    }

    Ok(AoOutcome {
        strategy: Strategy::for_layout(layout, scene, cfg)?,
        sweeps_used,
        trace,
    })
}
