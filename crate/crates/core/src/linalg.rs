//! Dense complex matrices and the Hermitian positive-definite solve used by
//! the beamformer.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Condition estimates above this are treated as a failed factorization.
const MAX_CONDITION: f64 = 1e14;

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// `v vᴴ`
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Largest entrywise deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..=i {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// Lower-triangular factor `L` with `L Lᴴ = B` for a Hermitian positive-definite `B`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<Complex64>,
}

impl Cholesky {
    /// Factors `b`, reading only its lower triangle.
    pub fn factor(b: &CMatrix) -> Result<Self> {
        let n = b.dim();
        let mut l = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            let mut diag = b[(j, j)].re;
            for k in 0..j {
                diag -= l[j * n + k].norm_sqr();
            }
            if !(diag.is_finite() && diag > 0.0) {
                return Err(Error::Solver {
                    condition_estimate: f64::INFINITY,
                });
            }
            let ljj = diag.sqrt();
            l[j * n + j] = Complex64::new(ljj, 0.0);
            for i in j + 1..n {
                let mut s = b[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / ljj;
            }
        }
        let chol = Self { n, l };
        let cond = chol.condition_estimate();
        let acceptable = cond <= MAX_CONDITION;
        if !acceptable {
            return Err(Error::Solver {
                condition_estimate: cond,
            });
        }
        Ok(chol)
    }

    /// Cheap lower bound on the 2-norm condition number, `(max Lᵢᵢ / min Lᵢᵢ)²`.
    pub fn condition_estimate(&self) -> f64 {
        let diag = (0..self.n).map(|i| self.l[i * self.n + i].re);
        let (lo, hi) = diag.fold((f64::INFINITY, 0.0f64), |(lo, hi), d| {
            (lo.min(d), hi.max(d))
        });
        if self.n == 0 {
            1.0
        } else {
            (hi / lo).powi(2)
        }
    }

    /// Solves `B x = rhs` by forward and back substitution.
    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        assert_eq!(rhs.len(), n);
        let l = &self.l;
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i].re;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[k * n + i].conj() * y[k];
            }
            y[i] = s / l[i * n + i].re;
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solves_small_hermitian_system() {
        let mut b = CMatrix::zeros(2);
        b[(0, 0)] = c(4.0, 0.0);
        b[(0, 1)] = c(1.0, -2.0);
        b[(1, 0)] = c(1.0, 2.0);
        b[(1, 1)] = c(6.0, 0.0);
        let x = vec![c(1.0, 1.0), c(-0.5, 2.0)];
        let rhs = b.mul_vec(&x);
        let got = Cholesky::factor(&b).unwrap().solve(&rhs);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let mut b = CMatrix::identity(2);
        b[(1, 1)] = c(-1.0, 0.0);
        assert!(matches!(Cholesky::factor(&b), Err(Error::Solver { .. })));
    }

    #[test]
    fn rejects_nan() {
        let mut b = CMatrix::identity(3);
        b[(2, 1)] = c(f64::NAN, 0.0);
        assert!(Cholesky::factor(&b).is_err());
    }
}
