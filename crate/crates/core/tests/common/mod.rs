//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the crate's solver or gradient code paths.

#![allow(dead_code)]

use std::f64::consts::PI;

use antijam::{ArrayLayout, Scene, SystemConfig};
use num_complex::Complex64;
use rand::Rng;

pub type C = Complex64;

/// Steering vector evaluated straight from its definition.
pub fn steering(xs: &[f64], angle: f64) -> Vec<C> {
    xs.iter()
        .map(|&x| C::new(0.0, 2.0 * PI * x * angle.cos()).exp())
        .collect()
}

/// Dense `B = Σ aₖaₖᴴ + σ²I` as nested rows.
pub fn interference(xs: &[f64], scene: &Scene, noise: f64) -> Vec<Vec<C>> {
    let n = xs.len();
    let mut b = vec![vec![C::new(0.0, 0.0); n]; n];
    for (i, row) in b.iter_mut().enumerate() {
        row[i] = C::new(noise, 0.0);
    }
    for &t in scene.jammers() {
        let a = steering(xs, t);
        for i in 0..n {
            for j in 0..n {
                b[i][j] += a[i] * a[j].conj();
            }
        }
    }
    b
}

/// Gauss–Jordan inverse with partial pivoting.
pub fn invert(m: &[Vec<C>]) -> Vec<Vec<C>> {
    let n = m.len();
    let mut a: Vec<Vec<C>> = m.to_vec();
    let mut inv: Vec<Vec<C>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| C::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                for j in 0..n {
                    let (ac, ic) = (a[col][j], inv[col][j]);
                    a[i][j] -= f * ac;
                    inv[i][j] -= f * ic;
                }
            }
        }
    }
    inv
}

pub fn matvec(m: &[Vec<C>], v: &[C]) -> Vec<C> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Dominant eigenvalue of `B⁻¹A` by power iteration with a Rayleigh-type estimate.
pub fn power_iteration_top_eigenvalue(xs: &[f64], scene: &Scene, noise: f64, iters: usize) -> f64 {
    let n = xs.len();
    let a0 = steering(xs, scene.source());
    let b_inv = invert(&interference(xs, scene, noise));
    // (B⁻¹A) v = B⁻¹ a₀ (a₀ᴴ v)
    let apply = |v: &[C]| {
        let s: C = a0.iter().zip(v).map(|(a, x)| a.conj() * x).sum();
        let t: Vec<C> = a0.iter().map(|a| a * s).collect();
        matvec(&b_inv, &t)
    };
    let mut v: Vec<C> = (0..n).map(|i| C::new(1.0, 0.1 * i as f64)).collect();
    let mut lambda = 0.0;
    for _ in 0..iters {
        let w = apply(&v);
        let num: C = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
        let den: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        lambda = (num / den).re;
        let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        v = w.into_iter().map(|x| x / norm).collect();
    }
    lambda
}

/// Random feasible layout: x₁ = 0 and gaps in `[d_min, d_min + extra]`, then
/// shrunk into the region if needed.
pub fn random_layout<R: Rng>(rng: &mut R, cfg: &SystemConfig) -> ArrayLayout {
    let n = cfg.num_elements;
    let mut xs = vec![0.0];
    for _ in 1..n {
        let gap = cfg.min_spacing + rng.random_range(0.0..1.5);
        xs.push(xs.last().unwrap() + gap);
    }
    let span = *xs.last().unwrap();
    if span > cfg.region_size {
        let slack = cfg.region_size - cfg.min_aperture();
        let excess = span - cfg.min_aperture();
        for (i, x) in xs.iter_mut().enumerate() {
            let extra = *x - i as f64 * cfg.min_spacing;
            *x = i as f64 * cfg.min_spacing + extra * slack / excess;
        }
    }
    ArrayLayout::new(xs).unwrap()
}

pub fn random_scene<R: Rng>(rng: &mut R, k: usize) -> Scene {
    let source = rng.random_range(0.0..PI);
    let jammers = (0..k).map(|_| rng.random_range(0.0..PI)).collect();
    Scene::new(source, jammers).unwrap()
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Component-wise error measure for gradient checks, robust to tiny entries:
/// `|a − b| / max(|a|, |b|, floor)` with `floor` tied to the vector's scale.
pub fn gradient_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let scale = analytic
        .iter()
        .chain(numeric)
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = 1e-3 * scale;
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(floor).max(1e-300))
        .fold(0.0, f64::max)
}
