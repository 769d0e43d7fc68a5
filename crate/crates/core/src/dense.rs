//! Dense complex Hermitian eigenvalues via cyclic Jacobi rotations.
//!
//! Kept as the independent oracle next to the structured tridiagonal
//! solver in [`crate::fibers`]; also used for operator 2-norms.

use num_complex::Complex64;

use crate::{Error, Result};

/// Row-major dense complex matrix.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex64::ZERO; dim * dim] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        for i in 0..self.dim {
            for j in 0..self.dim {
                if (self.at(i, j) - self.at(j, i).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    s += self.at(i, j).norm_sqr();
                }
            }
        }
        s.sqrt()
    }

    fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

const MAX_SWEEPS: usize = 60;

/// All eigenvalues of a Hermitian matrix, ascending.
///
/// Cyclic Jacobi with complex plane rotations; quadratic convergence
/// makes the sweep cap generous for the matrix sizes used here.
pub fn hermitian_eigenvalues(a: &DenseMatrix) -> Result<Vec<f64>> {
    let n = a.dim;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut m = a.clone();
    let scale = m.frobenius().max(1.0);
    let target = 1e-15 * scale;

    for _sweep in 0..MAX_SWEEPS {
        if m.off_diagonal_norm() <= target {
            let mut eigs: Vec<f64> = (0..n).map(|i| m.at(i, i).re).collect();
            eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
            return Ok(eigs);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let g = m.at(p, q);
                if g.norm() <= 1e-300 {
                    continue;
                }
                let app = m.at(p, p).re;
                let aqq = m.at(q, q).re;
                let abs_g = g.norm();
                let phase = g / abs_g;
                // rotation angle zeroing the (p,q) entry
                let tau = (aqq - app) / (2.0 * abs_g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cth = 1.0 / (1.0 + t * t).sqrt();
                let sth = t * cth;
                let s_pq = phase * sth;

                // A <- J^* A J with J = [[c, s_pq], [-conj(s_pq), c]]
                for k in 0..n {
                    let akp = m.at(k, p);
                    let akq = m.at(k, q);
                    m.set(k, p, akp * cth - akq * s_pq.conj());
                    m.set(k, q, akp * s_pq + akq * cth);
                }
                for k in 0..n {
                    let apk = m.at(p, k);
                    let aqk = m.at(q, k);
                    m.set(p, k, apk * cth - aqk * s_pq);
                    m.set(q, k, apk * s_pq.conj() + aqk * cth);
                }
                // keep the diagonal exactly real against rounding drift
                let dpp = m.at(p, p).re;
                let dqq = m.at(q, q).re;
                m.set(p, p, Complex64::new(dpp, 0.0));
                m.set(q, q, Complex64::new(dqq, 0.0));
            }
        }
    }
    Err(Error::NonConvergence(MAX_SWEEPS))
}

/// Spectral norm (largest |eigenvalue|) of a Hermitian matrix.
pub fn hermitian_spectral_norm(a: &DenseMatrix) -> Result<f64> {
    let eigs = hermitian_eigenvalues(a)?;
    Ok(eigs.iter().fold(0.0f64, |acc, &e| acc.max(e.abs())))
}
