//! Physical-layer model of the movable linear array: steering vectors, SINR,
//! jamming-plus-noise covariance, the closed-form optimal receive beamformer
//! and the gradient of the optimal SINR with respect to element positions.
//!
//! Positions are in wavelengths, so element `n` of the steering vector for
//! direction `θ` is `exp(j·2π·xₙ·cos θ)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Cholesky};

/// Norm deviation above which a beamformer is rejected by [`sinr`].
pub const UNIT_NORM_TOLERANCE: f64 = 1e-6;

/// Directions of arrival: the legitimate source first, then the jammers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    source: f64,
    jammers: Vec<f64>,
}

impl Scene {
    pub fn new(source: f64, jammers: Vec<f64>) -> Result<Self> {
        for (i, &a) in std::iter::once(&source).chain(&jammers).enumerate() {
            if !(a.is_finite() && (0.0..=PI).contains(&a)) {
                return Err(Error::InvalidScene(format!(
                    "angle {i} = {a} is outside [0, π]"
                )));
            }
        }
        Ok(Self { source, jammers })
    }

    /// Builds a scene from `[θ₀, θ₁, …, θ_K]`.
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        match angles.split_first() {
            Some((&s, rest)) => Self::new(s, rest.to_vec()),
            None => Err(Error::InvalidScene("empty angle list".into())),
        }
    }

    pub fn source(&self) -> f64 {
        self.source
    }

    pub fn jammers(&self) -> &[f64] {
        &self.jammers
    }

    pub fn num_jammers(&self) -> usize {
        self.jammers.len()
    }

    /// All angles, source first.
    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.source).chain(self.jammers.iter().copied())
    }

    /// The same scene restricted to its first `k` jammers.
    pub fn truncated(&self, k: usize) -> Self {
        Self {
            source: self.source,
            jammers: self.jammers[..k.min(self.jammers.len())].to_vec(),
        }
    }
}

/// Element positions in wavelengths, in array order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayLayout {
    positions: Vec<f64>,
}

impl ArrayLayout {
    pub fn new(positions: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidLayout("layout has no elements".into()));
        }
        if let Some(i) = positions.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidLayout(format!("position {i} is not finite")));
        }
        Ok(Self { positions })
    }

    /// Uniform array starting at the origin.
    pub fn uniform(num_elements: usize, spacing: f64) -> Self {
        Self {
            positions: (0..num_elements).map(|n| n as f64 * spacing).collect(),
        }
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub(crate) fn positions_mut(&mut self) -> &mut [f64] {
        &mut self.positions
    }
}

/// Receive combining weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    weights: Vec<Complex64>,
}

impl Beamformer {
    /// Wraps `weights` as given; [`sinr`] rejects them if they are not unit-norm.
    pub fn from_weights(weights: Vec<Complex64>) -> Self {
        Self { weights }
    }

    /// Scales `v` to unit norm.
    pub fn normalized(mut v: Vec<Complex64>) -> Result<Self> {
        let norm = l2_norm(&v);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NonUnitBeamformer { norm });
        }
        v.iter_mut().for_each(|x| *x /= norm);
        Ok(Self { weights: v })
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.weights)
    }
}

/// A complete anti-jamming decision: positions, combining weights and the SINR they achieve.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    pub layout: ArrayLayout,
    pub beamformer: Beamformer,
    pub sinr: f64,
}

impl Strategy {
    /// Optimal beamformer for a fixed layout.
    pub fn for_layout(layout: ArrayLayout, scene: &Scene, cfg: &SystemConfig) -> Result<Self> {
        let (beamformer, sinr) = optimal_beamformer(&layout, scene, cfg)?;
        Ok(Self {
            layout,
            beamformer,
            sinr,
        })
    }

    pub fn sinr_db(&self) -> f64 {
        to_db(self.sinr)
    }
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Signal covariance `A = a₀a₀ᴴ` and jamming-plus-noise covariance
/// `B = Σₖ aₖaₖᴴ + σ₀²I`.
#[derive(Debug, Clone)]
pub struct Covariances {
    pub signal: CMatrix,
    pub interference: CMatrix,
}

fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `aᴴb`
fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Spatial frequency `2π cos θ` in radians per wavelength.
fn wavenumber(angle: f64) -> f64 {
    2.0 * PI * angle.cos()
}

pub fn steering_vector(layout: &ArrayLayout, angle: f64) -> Vec<Complex64> {
    let k = wavenumber(angle);
    layout
        .positions
        .iter()
        .map(|&x| Complex64::from_polar(1.0, k * x))
        .collect()
}

/// Post-combining SINR `|wᴴa₀|² / (Σₖ|wᴴaₖ|² + σ₀²)` for a given beamformer.
pub fn sinr(
    layout: &ArrayLayout,
    w: &Beamformer,
    scene: &Scene,
    cfg: &SystemConfig,
) -> Result<f64> {
    if w.weights.len() != layout.len() {
        return Err(Error::DimensionMismatch {
            context: "beamformer length",
            expected: layout.len(),
            found: w.weights.len(),
        });
    }
    let norm = w.norm();
    let unit = (norm - 1.0).abs() <= UNIT_NORM_TOLERANCE;
    if !unit {
        return Err(Error::NonUnitBeamformer { norm });
    }
    let gain = |angle| inner(&w.weights, &steering_vector(layout, angle)).norm_sqr();
    let signal = cfg.source_power * gain(scene.source);
    let interference: f64 = scene.jammers.iter().map(|&a| gain(a)).sum::<f64>() * cfg.jammer_power;
    Ok(signal / (interference + cfg.noise_power))
}

fn interference_matrix(
    jammer_steering: &[Vec<Complex64>],
    n: usize,
    cfg: &SystemConfig,
) -> CMatrix {
    let mut b = CMatrix::identity(n);
    for i in 0..n {
        b[(i, i)] *= cfg.noise_power;
    }
    for a in jammer_steering {
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] += cfg.jammer_power * a[i] * a[j].conj();
            }
        }
    }
    b
}

pub fn build_covariances(layout: &ArrayLayout, scene: &Scene, cfg: &SystemConfig) -> Covariances {
    let n = layout.len();
    let a0 = steering_vector(layout, scene.source);
    let jam: Vec<_> = scene
        .jammers
        .iter()
        .map(|&t| steering_vector(layout, t))
        .collect();
    let mut signal = CMatrix::outer(&a0);
    if cfg.source_power != 1.0 {
        for i in 0..n {
            for j in 0..n {
                signal[(i, j)] *= cfg.source_power;
            }
        }
    }
    Covariances {
        signal,
        interference: interference_matrix(&jam, n, cfg),
    }
}

/// Intermediate quantities of the closed-form solution, reused by the gradient.
struct Envelope {
    source_steering: Vec<Complex64>,
    jammer_steering: Vec<Vec<Complex64>>,
    /// `B⁻¹a₀`
    whitened: Vec<Complex64>,
    sinr: f64,
}

fn envelope(layout: &ArrayLayout, scene: &Scene, cfg: &SystemConfig) -> Result<Envelope> {
    let n = layout.len();
    let a0 = steering_vector(layout, scene.source);
    let jam: Vec<_> = scene
        .jammers
        .iter()
        .map(|&t| steering_vector(layout, t))
        .collect();
    let b = interference_matrix(&jam, n, cfg);
    let u = Cholesky::factor(&b)?.solve(&a0);
    let sinr = cfg.source_power * inner(&a0, &u).re;
    Ok(Envelope {
        source_steering: a0,
        jammer_steering: jam,
        whitened: u,
        sinr,
    })
}

/// Largest achievable SINR `η* = a₀ᴴB⁻¹a₀` for the given positions.
pub fn optimal_sinr(layout: &ArrayLayout, scene: &Scene, cfg: &SystemConfig) -> Result<f64> {
    envelope(layout, scene, cfg).map(|e| e.sinr)
}

/// Closed-form maximizer of the generalized Rayleigh quotient:
/// `w* = B⁻¹a₀ / ‖B⁻¹a₀‖`, returned together with `η*`.
pub fn optimal_beamformer(
    layout: &ArrayLayout,
    scene: &Scene,
    cfg: &SystemConfig,
) -> Result<(Beamformer, f64)> {
    let env = envelope(layout, scene, cfg)?;
    let w = Beamformer::normalized(env.whitened)?;
    Ok((w, env.sinr))
}

/// Gradient of `η*` with respect to every element position, with the beamformer
/// re-optimized implicitly (envelope form).
pub fn sinr_position_gradient(
    layout: &ArrayLayout,
    scene: &Scene,
    cfg: &SystemConfig,
) -> Result<Vec<f64>> {
    sinr_and_position_gradient(layout, scene, cfg).map(|(_, g)| g)
}

/// `η*` and `∂η*/∂x` from a single factorization.
pub fn sinr_and_position_gradient(
    layout: &ArrayLayout,
    scene: &Scene,
    cfg: &SystemConfig,
) -> Result<(f64, Vec<f64>)> {
    let env = envelope(layout, scene, cfg)?;
    let u = &env.whitened;
    let j = Complex64::i();

    // ∂η*/∂xₙ = 2Re{(∂a₀/∂xₙ)ᴴu} − uᴴ(∂B/∂xₙ)u, each ∂aₖ/∂xₙ nonzero only in entry n.
    let k0 = wavenumber(scene.source);
    let mut grad: Vec<f64> = env
        .source_steering
        .iter()
        .zip(u)
        .map(|(a, un)| 2.0 * ((j * k0 * a).conj() * un).re)
        .collect();
    for (&theta, a) in scene.jammers.iter().zip(&env.jammer_steering) {
        let kk = wavenumber(theta);
        let proj = inner(a, u);
        for (n, g) in grad.iter_mut().enumerate() {
            let term = u[n].conj() * j * kk * a[n] * proj;
            *g -= 2.0 * cfg.jammer_power * term.re;
        }
    }
    grad.iter_mut().for_each(|g| *g *= cfg.source_power);
    Ok((env.sinr, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(xs: &[f64]) -> ArrayLayout {
        ArrayLayout::new(xs.to_vec()).unwrap()
    }

    fn cfg(n: usize, k: usize) -> SystemConfig {
        SystemConfig::default().with_elements(n).with_jammers(k)
    }

    fn close(a: Complex64, re: f64, im: f64) -> bool {
        (a.re - re).abs() < 1e-12 && (a.im - im).abs() < 1e-12
    }

    #[test]
    fn steering_single_element_at_origin() {
        let a = steering_vector(&layout(&[0.0]), 1.234);
        assert_eq!(a.len(), 1);
        assert!(close(a[0], 1.0, 0.0));
    }

    #[test]
    fn steering_broadside_is_all_ones() {
        let a = steering_vector(&layout(&[0.0, 0.37, 1.9, 4.2]), PI / 2.0);
        assert!(a.iter().all(|&x| close(x, 1.0, 0.0)));
    }

    #[test]
    fn steering_half_wavelength_endfire() {
        let a = steering_vector(&layout(&[0.0, 0.5]), 0.0);
        assert!(close(a[0], 1.0, 0.0));
        assert!(close(a[1], -1.0, 0.0));
    }

    #[test]
    fn sinr_single_element_no_jammer() {
        let c = cfg(1, 0).with_noise_power(1.0);
        let w = Beamformer::from_weights(vec![Complex64::new(1.0, 0.0)]);
        let scene = Scene::new(0.3, vec![]).unwrap();
        assert_eq!(sinr(&layout(&[0.0]), &w, &scene, &c).unwrap(), 1.0);
    }

    #[test]
    fn sinr_two_element_hand_values() {
        let c = cfg(2, 1);
        let l = layout(&[0.0, 0.5]);
        let scene = Scene::new(PI / 2.0, vec![0.0]).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let w = Beamformer::from_weights(vec![Complex64::new(s, 0.0); 2]);
        assert!((sinr(&l, &w, &scene, &c).unwrap() - 20.0).abs() < 1e-12);
        let w = Beamformer::from_weights(vec![Complex64::new(s, 0.0), Complex64::new(-s, 0.0)]);
        assert!(sinr(&l, &w, &scene, &c).unwrap().abs() < 1e-30);
    }

    #[test]
    fn sinr_rejects_non_unit_weights() {
        let c = cfg(2, 0);
        let w = Beamformer::from_weights(vec![Complex64::new(1.0, 0.0); 2]);
        let scene = Scene::new(1.0, vec![]).unwrap();
        let err = sinr(&layout(&[0.0, 0.5]), &w, &scene, &c).unwrap_err();
        assert!(matches!(err, Error::NonUnitBeamformer { .. }));
    }

    #[test]
    fn covariances_without_jammers_are_scaled_identity() {
        let c = cfg(3, 0);
        let cov = build_covariances(
            &layout(&[0.0, 0.7, 1.5]),
            &Scene::new(0.4, vec![]).unwrap(),
            &c,
        );
        assert_eq!(cov.interference, {
            let mut m = CMatrix::identity(3);
            for i in 0..3 {
                m[(i, i)] *= 0.1;
            }
            m
        });
        assert!((cov.signal.trace().re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn covariances_single_element() {
        let c = cfg(1, 2);
        let cov = build_covariances(
            &layout(&[0.0]),
            &Scene::new(0.4, vec![1.0, 2.0]).unwrap(),
            &c,
        );
        assert!(close(cov.signal[(0, 0)], 1.0, 0.0));
        assert!(close(cov.interference[(0, 0)], 2.1, 0.0));
    }

    #[test]
    fn covariances_two_element_hand_values() {
        let c = cfg(2, 1);
        let cov = build_covariances(
            &layout(&[0.0, 0.5]),
            &Scene::new(PI / 2.0, vec![0.0]).unwrap(),
            &c,
        );
        let b = &cov.interference;
        assert!(close(b[(0, 0)], 1.1, 0.0));
        assert!(close(b[(1, 1)], 1.1, 0.0));
        assert!(close(b[(0, 1)], -1.0, 0.0));
        assert!(close(b[(1, 0)], -1.0, 0.0));
        assert!(b.hermitian_defect() < 1e-12);
    }

    #[test]
    fn optimal_beamformer_isotropic_noise() {
        let c = cfg(5, 0);
        let l = layout(&[0.0, 0.5, 1.3, 2.0, 4.4]);
        let scene = Scene::new(1.1, vec![]).unwrap();
        let (w, eta) = optimal_beamformer(&l, &scene, &c).unwrap();
        assert!((eta - 50.0).abs() < 50.0 * 1e-12);
        let a0 = steering_vector(&l, 1.1);
        for (wi, ai) in w.weights().iter().zip(&a0) {
            assert!((wi - ai / 5f64.sqrt()).norm() < 1e-12);
        }
    }

    #[test]
    fn optimal_beamformer_orthogonal_jammer() {
        let c = cfg(2, 1);
        let l = layout(&[0.0, 0.5]);
        let scene = Scene::new(PI / 2.0, vec![0.0]).unwrap();
        let (w, eta) = optimal_beamformer(&l, &scene, &c).unwrap();
        assert!((eta - 20.0).abs() < 20.0 * 1e-12);
        let s = 1.0 / 2f64.sqrt();
        assert!(w.weights().iter().all(|&x| close(x, s, 0.0)));
    }

    #[test]
    fn gradient_vanishes_at_broadside() {
        let c = cfg(4, 2);
        let l = layout(&[0.0, 0.9, 2.0, 3.3]);
        let scene = Scene::new(PI / 2.0, vec![PI / 2.0, PI / 2.0]).unwrap();
        let g = sinr_position_gradient(&l, &scene, &c).unwrap();
        assert!(g.iter().all(|&x| x.abs() < 1e-12));
    }

    #[test]
    fn scene_rejects_out_of_range_angle() {
        assert!(Scene::new(-0.1, vec![]).is_err());
        assert!(Scene::new(0.1, vec![4.0]).is_err());
        assert!(Scene::new(f64::NAN, vec![]).is_err());
    }
}
