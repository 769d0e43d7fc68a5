//! Fourier truncation of the cosine-potential operator
//! `(2/C)(-i d/dtheta)^2 - 2 alpha cos(theta)` and its identification
//! with the even fiber matrices at gauge shift zero.

use crate::fibers::{fiber_eigs, fiber_matrix, TridiagMatrix};
use crate::report::VerifyReport;
use crate::{Error, ModelParams, Result};

/// Fourier-mode truncation of the cosine-potential operator.
///
/// Modes `n = n_cut .. -n_cut` give diagonal `(2/C) n^2`; the cosine
/// couples adjacent modes with weight `-alpha`.
#[derive(Debug, Clone)]
pub struct MathieuTruncation {
    pub c: f64,
    pub alpha: f64,
    pub n_cut: i32,
    pub matrix: TridiagMatrix,
}

/// Tridiagonal matrix of the truncated cosine-potential operator.
pub fn mathieu_matrix(c: f64, alpha: f64, n_cut: i32) -> Result<TridiagMatrix> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter(format!("C must be positive, got {c}")));
    }
    if n_cut < 1 {
        return Err(Error::InvalidParameter(format!("n_cut must be >= 1, got {n_cut}")));
    }
    let dim = (2 * n_cut + 1) as usize;
    let diag: Vec<f64> = (0..dim)
        .map(|j| {
            let n = (n_cut - j as i32) as f64;
            2.0 * n * n / c
        })
        .collect();
    let off = vec![-alpha; dim - 1];
    Ok(TridiagMatrix { diag, off })
}

impl MathieuTruncation {
    pub fn new(c: f64, alpha: f64, n_cut: i32) -> Result<Self> {
        Ok(Self { c, alpha, n_cut, matrix: mathieu_matrix(c, alpha, n_cut)? })
    }
}

/// Lowest `count` eigenvalues of the truncation.
pub fn mathieu_low_eigs(c: f64, alpha: f64, n_cut: i32, count: usize) -> Result<Vec<f64>> {
    let t = mathieu_matrix(c, alpha, n_cut)?;
    if count > t.dim() {
        return Err(Error::InvalidParameter(format!(
            "requested {count} eigenvalues from a dimension-{} truncation",
            t.dim()
        )));
    }
    let mut eigs = fiber_eigs(&t)?;
    eigs.truncate(count);
    Ok(eigs)
}

/// Check the structural identity with the even fiber matrix and the
/// cutoff convergence of the lowest eigenvalues.
///
/// The truncation at `n_cut = k` IS the fiber matrix of total number
/// `2k` at gauge shift zero, so the match there is exact; doubling the
/// cutoff measures how converged the low eigenvalues are, and the gap
/// must shrink as `k` grows through `k, k+4, k+8`.
pub fn verify_fiber_limit(
    c: f64,
    alpha: f64,
    k: i32,
    n_eigs: usize,
    tol: f64,
) -> Result<VerifyReport> {
    if tol <= 0.0 {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    if k < n_eigs as i32 {
        return Err(Error::InvalidParameter(format!(
            "need k >= n_eigs, got k={k}, n_eigs={n_eigs}"
        )));
    }
    let mut report = VerifyReport::new();
    let params = ModelParams::new(c, 0.0, alpha, 0.0)?;

    // exact identity: same matrix, so same eigenvalues bit for bit
    let fiber = fiber_matrix(2 * k, &params)?;
    let trunc = mathieu_matrix(c, alpha, k)?;
    report.push(format!("mathieu_matrix_identity_k{k}"), fiber.max_abs_diff(&trunc), tol);
    let fiber_low: Vec<f64> = fiber_eigs(&fiber)?.into_iter().take(n_eigs).collect();
    let trunc_low = mathieu_low_eigs(c, alpha, k, n_eigs)?;
    let eig_residual = fiber_low
        .iter()
        .zip(&trunc_low)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    report.push(format!("mathieu_low_eigs_identity_k{k}"), eig_residual, tol);

    // convergence gap against the doubled cutoff, shrinking in k
    let gap_at = |kk: i32| -> Result<f64> {
        let low = mathieu_low_eigs(c, alpha, kk, n_eigs)?;
        let wide = mathieu_low_eigs(c, alpha, 2 * kk, n_eigs)?;
        Ok(low.iter().zip(&wide).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max))
    };
    let gaps = [gap_at(k)?, gap_at(k + 4)?, gap_at(k + 8)?];
    for (i, g) in gaps.iter().enumerate() {
        report.note(format!("mathieu_gap_k{}", k + 4 * i as i32), *g);
    }
    let monotone = gaps[1] <= gaps[0] + tol && gaps[2] <= gaps[1] + tol;
    report.push_bool(format!("mathieu_gap_monotone_from_k{k}"), monotone);
    Ok(report)
}
