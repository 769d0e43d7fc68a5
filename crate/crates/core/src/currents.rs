//! The tunneling current: three independent constructions, fiber closed
//! forms, phase transport, flux-integrated totals and standing waves.
//!
//! The current is `(i/2) [N_rel, H(phi)]`. It is Hermitian, bounded and
//! block-diagonal over the sixteen products of the mode-window
//! projections, which is what makes the flux integral collapse to a
//! `sin(x)/x` envelope.

use num_complex::Complex64;

use crate::fibers::fiber_basis;
use crate::indexing::{PlaneIndex, Representation, SectorBasis};
use crate::opalg::{build_hamiltonian, commutator, RepKind, SparseOp};
use crate::quad;
use crate::{Error, ModelParams, Result};

/// Which construction of the current operator to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurrentKind {
    /// `i alpha (e^{i phi} T_fwd - e^{-i phi} T_bwd)` on the Fock basis.
    FockClosedForm,
    /// Commutator of the first-angle derivative with the circle
    /// Hamiltonian.
    CircleCommutator,
    /// The sixteen multiplication blocks over mode-window projections.
    CircleBlockTable,
}

/// Current operator in the requested construction.
pub fn build_current(
    kind: CurrentKind,
    params: &ModelParams,
    basis: &SectorBasis,
) -> Result<SparseOp> {
    match kind {
        CurrentKind::FockClosedForm => {
            if basis.representation() != Representation::Fock {
                return Err(Error::BasisMismatch {
                    expected: "Fock".into(),
                    found: format!("{:?}", basis.representation()),
                });
            }
            Ok(build_fock_closed_form(params, basis))
        }
        CurrentKind::CircleCommutator | CurrentKind::CircleBlockTable => {
            if !matches!(basis.representation(), Representation::Plane | Representation::Circle) {
                return Err(Error::BasisMismatch {
                    expected: "Plane or Circle".into(),
                    found: format!("{:?}", basis.representation()),
                });
            }
            match kind {
                CurrentKind::CircleCommutator => build_circle_commutator(params, basis),
                _ => Ok(build_block_table(params, basis)),
            }
        }
    }
}

fn build_fock_closed_form(params: &ModelParams, basis: &SectorBasis) -> SparseOp {
    let mut op = SparseOp::zeros(basis.tag());
    let fwd = Complex64::new(0.0, params.alpha) * Complex64::from_polar(1.0, params.phi);
    let bwd = Complex64::new(0.0, -params.alpha) * Complex64::from_polar(1.0, -params.phi);
    for j in 0..basis.dim() {
        let f = basis.fock(j);
        if f.alpha >= 1 {
            if let Some(t) = basis
                .ordinal_fock(crate::indexing::FockIndex::new(f.alpha - 1, f.beta + 1))
            {
                op.add(t, j, fwd);
            }
        }
        if f.beta >= 1 {
            if let Some(t) = basis
                .ordinal_fock(crate::indexing::FockIndex::new(f.alpha + 1, f.beta - 1))
            {
                op.add(t, j, bwd);
            }
        }
    }
    op
}

fn build_circle_commutator(params: &ModelParams, basis: &SectorBasis) -> Result<SparseOp> {
    // the first-angle derivative is diagonal i*p on mode (p, r)
    let derivative = SparseOp::diagonal(
        basis.tag(),
        (0..basis.dim()).map(|j| Complex64::new(0.0, basis.plane(j).p as f64)),
    );
    let rep = match basis.representation() {
        Representation::Plane => RepKind::Plane,
        _ => RepKind::Circle,
    };
    let h = build_hamiltonian(rep, params, basis)?;
    commutator(&derivative, &h)
}

/// One output leg of a block-table multiplication operator:
/// shift `(dp, dr)` with weight `w(phi)`.
fn block_table_legs(p: i32, r: i32, phi: f64) -> Vec<(i32, i32, Complex64)> {
    // i e^{+- i (theta_1 - phi ...)} legs; s1 = +-1 carries e^{-+ i phi}
    let leg = |s1: i32, s2: i32, sign: f64| {
        let phase = Complex64::from_polar(1.0, -(s1 as f64) * phi);
        (s1, s2, Complex64::new(0.0, sign) * phase)
    };
    // rows: first-factor window of the input mode; columns: second-factor
    let row = if p <= -2 {
        0
    } else if p == -1 {
        1
    } else if p == 0 {
        2
    } else {
        3
    };
    let col = if r <= -2 {
        0
    } else if r == -1 {
        1
    } else if r == 0 {
        2
    } else {
        3
    };
    match (row, col) {
        // -2 sin(t1 - phi - t2)
        (0, 0) | (3, 3) => vec![leg(1, -1, 1.0), leg(-1, 1, -1.0)],
        // -2 sin(t1 - phi + t2)
        (0, 3) | (1, 3) | (3, 0) => vec![leg(1, 1, 1.0), leg(-1, -1, -1.0)],
        // -i e^{-i(t1-phi-t2)} + i e^{i(t1-phi)}
        (1, 0) => vec![leg(-1, 1, -1.0), leg(1, 0, 1.0)],
        // i e^{i(t1-phi)}
        (1, 1) => vec![leg(1, 0, 1.0)],
        // i e^{i(t1-phi+t2)}
        (0, 2) | (1, 2) => vec![leg(1, 1, 1.0)],
        // i e^{i(t1-phi-t2)}
        (0, 1) => vec![leg(1, -1, 1.0)],
        // -i e^{-i(t1-phi)} + i e^{i(t1-phi+t2)}
        (2, 0) => vec![leg(-1, 0, -1.0), leg(1, 1, 1.0)],
        // -i e^{-i(t1-phi)}; the grouped derivative fixes this sign
        (2, 1) => vec![leg(-1, 0, -1.0)],
        // the doubly-centred block carries no current
        (2, 2) => vec![],
        // -i e^{-i(t1-phi+t2)} + i e^{i(t1-phi-t2)}
        (2, 3) => vec![leg(-1, -1, -1.0), leg(1, -1, 1.0)],
        // -i e^{-i(t1-phi+t2)}
        (3, 1) => vec![leg(-1, -1, -1.0)],
        // -i e^{-i(t1-phi-t2)}
        (3, 2) => vec![leg(-1, 1, -1.0)],
        _ => unreachable!(),
    }
}

fn build_block_table(params: &ModelParams, basis: &SectorBasis) -> SparseOp {
    let mut op = SparseOp::zeros(basis.tag());
    for j in 0..basis.dim() {
        let z = basis.plane(j);
        for (dp, dr, w) in block_table_legs(z.p, z.r, params.phi) {
            if let Some(t) = basis.ordinal_plane(PlaneIndex::new(z.p + dp, z.r + dr)) {
                op.add(t, j, -params.alpha * w);
            }
        }
    }
    op
}

/// Real expectation value `<psi, O psi>` on unit-orthonormal coefficients.
///
/// The imaginary part is a Hermiticity guard: it must be negligible
/// against `|psi|^2 |O|` and is then discarded.
pub fn expectation(state: &[Complex64], op: &SparseOp) -> Result<f64> {
    let image = op.apply(state)?;
    let mut acc = Complex64::ZERO;
    for (s, o) in state.iter().zip(&image) {
        acc += s.conj() * o;
    }
    let norm_sq: f64 = state.iter().map(|z| z.norm_sqr()).sum();
    let bound = 1e-12 * norm_sq * op.inf_norm().max(1.0);
    if acc.im.abs() > bound {
        return Err(Error::HermiticityGuard { imag: acc.im.abs(), bound });
    }
    Ok(acc.re)
}

/// Coefficients on one total-number fiber, in fiber base order.
///
/// For the even fiber `2k` the slots are `a_k^+ ... a_1^+, a_0, a_1^-
/// ... a_k^-`; for the odd fiber `2k-1` they are `a_{k-1}^+ ... a_0^+,
/// a_0^- ... a_{k-1}^-`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberState {
    pub k_total: i32,
    pub coeffs: Vec<Complex64>,
}

impl FiberState {
    pub fn new(k_total: i32, coeffs: Vec<Complex64>) -> Result<Self> {
        let dim = fiber_basis(k_total)?.dim();
        if coeffs.len() != dim {
            return Err(Error::LengthMismatch { expected: dim, found: coeffs.len() });
        }
        Ok(Self { k_total, coeffs })
    }

    pub fn zero(k_total: i32) -> Result<Self> {
        let dim = fiber_basis(k_total)?.dim();
        Ok(Self { k_total, coeffs: vec![Complex64::ZERO; dim] })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Number of slots carried by one sign family: `k` for the fiber
    /// `2k` (counting the centre slot), `k` for the fiber `2k-1`.
    fn half(&self) -> usize {
        self.dim() / 2
    }

    /// Set the slot `(n, sign)`; sign 0 addresses the even-fiber centre.
    pub fn set_slot(&mut self, n: i32, sign: i8, value: Complex64) -> Result<()> {
        let j = self.slot_index(n, sign)?;
        self.coeffs[j] = value;
        Ok(())
    }

    pub fn slot_index(&self, n: i32, sign: i8) -> Result<usize> {
        let even = self.k_total % 2 == 0;
        let half = self.half() as i32;
        let bad = |msg: String| Err(Error::StateFile(msg));
        if even {
            let k = half;
            match sign {
                0 if n == 0 => Ok(k as usize),
                1 if n >= 1 && n <= k => Ok((k - n) as usize),
                -1 if n >= 1 && n <= k => Ok((k + n) as usize),
                _ => bad(format!(
                    "slot (n={n}, sign={sign}) is not legal on the fiber {}",
                    self.k_total
                )),
            }
        } else {
            let k = half;
            match sign {
                1 if (0..=k - 1).contains(&n) => Ok((k - 1 - n) as usize),
                -1 if (0..=k - 1).contains(&n) => Ok((k + n) as usize),
                _ => bad(format!(
                    "slot (n={n}, sign={sign}) is not legal on the fiber {}",
                    self.k_total
                )),
            }
        }
    }

    /// Embed into the full sector coefficient vector of `basis`.
    pub fn embed(&self, basis: &SectorBasis) -> Result<Vec<Complex64>> {
        if basis.cutoff() < self.k_total {
            return Err(Error::InvalidParameter(format!(
                "sector cutoff {} is below the fiber {}",
                basis.cutoff(),
                self.k_total
            )));
        }
        let fb = fiber_basis(self.k_total)?;
        let mut out = vec![Complex64::ZERO; basis.dim()];
        for (j, &z) in fb.indices.iter().enumerate() {
            let t = basis.ordinal_plane(z).expect("fiber lies inside the sector");
            out[t] = self.coeffs[j];
        }
        Ok(out)
    }
}

/// Closed-form current expectation on a fiber state.
///
/// In fiber base order the current is the nearest-neighbour form
/// `i alpha e^{i phi}` below the diagonal and its conjugate above, so
/// the expectation collapses to `2 alpha Im(e^{-i phi} sum_j conj(c_j)
/// c_{j+1})`. On the even fiber this is exactly the printed quadratic
/// form; on the odd fiber it includes the centre-pair coupling that the
/// tridiagonal block dictates.
pub fn fiber_current_expectation(fs: &FiberState, params: &ModelParams) -> f64 {
    let mut s = Complex64::ZERO;
    for w in fs.coeffs.windows(2) {
        s += w[0].conj() * w[1];
    }
    2.0 * params.alpha * (Complex64::from_polar(1.0, -params.phi) * s).im
}

/// Phase transport: multiply the coefficient at mode `(p, r)` by
/// `e^{i p phi}`, the coefficient action of sliding the first angle.
pub fn ab_transport(state: &[Complex64], basis: &SectorBasis, phi: f64) -> Result<Vec<Complex64>> {
    if state.len() != basis.dim() {
        return Err(Error::LengthMismatch { expected: basis.dim(), found: state.len() });
    }
    Ok(state
        .iter()
        .enumerate()
        .map(|(j, &c)| c * Complex64::from_polar(1.0, basis.plane(j).p as f64 * phi))
        .collect())
}

fn current_kind_for(basis: &SectorBasis) -> CurrentKind {
    match basis.representation() {
        Representation::Fock => CurrentKind::FockClosedForm,
        _ => CurrentKind::CircleBlockTable,
    }
}

/// Flux-integrated current: Gauss-Legendre quadrature of
/// `x -> <psi, I(Psi x) psi>` over the junction width `[-1/2, 1/2]`.
pub fn fraunhofer_total(
    state: &[Complex64],
    basis: &SectorBasis,
    psi_flux: f64,
    params: &ModelParams,
    n_nodes: usize,
) -> Result<f64> {
    if n_nodes < 2 {
        return Err(Error::InvalidParameter("quadrature needs at least two nodes".into()));
    }
    let kind = current_kind_for(basis);
    let (nodes, weights) = quad::gauss_legendre(n_nodes)?;
    let mut total = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        // map [-1,1] to [-1/2, 1/2]
        let local = params.with_phi(psi_flux * 0.5 * x);
        let current = build_current(kind, &local, basis)?;
        total += 0.5 * w * expectation(state, &current)?;
    }
    Ok(total)
}

/// One row of a flux sweep.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CurveSample {
    pub psi: f64,
    pub quadrature: f64,
    pub analytic: f64,
    pub abs_dev: f64,
}

/// Result of a flux sweep, with support diagnostics.
#[derive(Debug, Clone)]
pub struct FraunhoferCurve {
    pub samples: Vec<CurveSample>,
    /// True when the state straddles more than one projection block and
    /// more than one fiber, where the single-block statement does not
    /// literally apply; the blockwise identity is still evaluated.
    pub mixed_support: bool,
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn support_blocks(state: &[Complex64], basis: &SectorBasis) -> (Vec<(u8, u8)>, Vec<i32>) {
    let window = |v: i32| -> u8 {
        if v <= -2 {
            0
        } else if v == -1 {
            1
        } else if v == 0 {
            2
        } else {
            3
        }
    };
    let mut blocks = Vec::new();
    let mut fibers = Vec::new();
    for (j, c) in state.iter().enumerate() {
        if c.norm() > 0.0 {
            let z = basis.plane(j);
            let b = (window(z.p), window(z.r));
            if !blocks.contains(&b) {
                blocks.push(b);
            }
            let t = basis.total(j);
            if !fibers.contains(&t) {
                fibers.push(t);
            }
        }
    }
    (blocks, fibers)
}

/// Sweep the flux over a grid, comparing quadrature against the
/// `sin(Psi/2)/(Psi/2)` envelope times the zero-shift expectation.
pub fn fraunhofer_curve(
    state: &[Complex64],
    basis: &SectorBasis,
    psi_grid: &[f64],
    params: &ModelParams,
    n_nodes: usize,
) -> Result<FraunhoferCurve> {
    let kind = current_kind_for(basis);
    let zero_shift = build_current(kind, &params.with_phi(0.0), basis)?;
    let base = expectation(state, &zero_shift)?;
    let (blocks, fibers) = support_blocks(state, basis);
    let mixed_support = blocks.len() > 1 && fibers.len() > 1;
    let mut samples = Vec::with_capacity(psi_grid.len());
    for &psi_flux in psi_grid {
        let quadrature = fraunhofer_total(state, basis, psi_flux, params, n_nodes)?;
        let analytic = sinc(psi_flux / 2.0) * base;
        samples.push(CurveSample {
            psi: psi_flux,
            quadrature,
            analytic,
            abs_dev: (quadrature - analytic).abs(),
        });
    }
    Ok(FraunhoferCurve { samples, mixed_support })
}

/// Build the mirror-symmetric fiber state `a_n^+ = a_n^-` from one
/// coefficient per independent slot.
///
/// The even fiber `2k` takes `k` coefficients `(a_0, a_1, ..., a_{k-1})`;
/// the odd fiber `2k-1` takes `k-1` coefficients `(a_0, ..., a_{k-2})`.
/// The outermost slots stay zero.
pub fn standing_wave_state(k_total: i32, coeffs: &[Complex64]) -> Result<FiberState> {
    let mut fs = FiberState::zero(k_total)?;
    if k_total % 2 == 0 {
        let k = (k_total / 2) as usize;
        if coeffs.len() != k {
            return Err(Error::LengthMismatch { expected: k, found: coeffs.len() });
        }
        if k > 0 {
            fs.set_slot(0, 0, coeffs[0])?;
            for (n, &c) in coeffs.iter().enumerate().skip(1) {
                fs.set_slot(n as i32, 1, c)?;
                fs.set_slot(n as i32, -1, c)?;
            }
        }
    } else {
        let k = ((k_total + 1) / 2) as usize;
        if coeffs.len() != k - 1 {
            return Err(Error::LengthMismatch { expected: k - 1, found: coeffs.len() });
        }
        for (n, &c) in coeffs.iter().enumerate() {
            fs.set_slot(n as i32, 1, c)?;
            fs.set_slot(n as i32, -1, c)?;
        }
    }
    Ok(fs)
}
