//! Sparse complex operator kernel and the independent constructors for
//! every Hamiltonian, number operator, shift, projection and gauge
//! unitary of the six representations.
//!
//! Each representation's constructor is written from its own closed
//! form; their entrywise agreement is a theorem that
//! [`verify_equivalences`] checks numerically instead of assuming.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::dense::DenseMatrix;
use crate::indexing::{
    BasisTag, BranchIndex, BranchSide, FockIndex, LatticeIndex, PlaneIndex, Representation,
    SectorBasis,
};
use crate::report::VerifyReport;
use crate::{Error, ModelParams, Result};

/// Complex sparse matrix tagged with the basis it acts on.
///
/// Entries of exact zero are never stored, so structural equality is
/// meaningful and commutators of block-diagonal operators come out empty.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    tag: BasisTag,
    entries: BTreeMap<(usize, usize), Complex64>,
}

impl SparseOp {
    pub fn zeros(tag: BasisTag) -> Self {
        Self { tag, entries: BTreeMap::new() }
    }

    pub fn identity(tag: BasisTag) -> Self {
        let mut op = Self::zeros(tag);
        for j in 0..tag.dim {
            op.add(j, j, Complex64::ONE);
        }
        op
    }

    pub fn diagonal(tag: BasisTag, values: impl Iterator<Item = Complex64>) -> Self {
        let mut op = Self::zeros(tag);
        for (j, v) in values.enumerate() {
            op.add(j, j, v);
        }
        op
    }

    pub fn tag(&self) -> BasisTag {
        self.tag
    }

    pub fn dim(&self) -> usize {
        self.tag.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Accumulate into an entry, dropping it again if the sum is zero.
    pub fn add(&mut self, row: usize, col: usize, v: Complex64) {
        debug_assert!(row < self.tag.dim && col < self.tag.dim);
        if v == Complex64::ZERO {
            return;
        }
        let slot = self.entries.entry((row, col)).or_insert(Complex64::ZERO);
        *slot += v;
        if *slot == Complex64::ZERO {
            self.entries.remove(&(row, col));
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries.get(&(row, col)).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.entries.iter().map(|(&(r, c), &v)| (r, c, v))
    }

    fn same_tag(&self, other: &SparseOp) -> Result<()> {
        if self.tag != other.tag {
            return Err(Error::BasisMismatch {
                expected: self.tag.to_string(),
                found: other.tag.to_string(),
            });
        }
        Ok(())
    }

    pub fn plus(&self, other: &SparseOp) -> Result<SparseOp> {
        self.same_tag(other)?;
        let mut out = self.clone();
        for (r, c, v) in other.iter() {
            out.add(r, c, v);
        }
        Ok(out)
    }

    pub fn minus(&self, other: &SparseOp) -> Result<SparseOp> {
        self.same_tag(other)?;
        let mut out = self.clone();
        for (r, c, v) in other.iter() {
            out.add(r, c, -v);
        }
        Ok(out)
    }

    pub fn scale(&self, factor: Complex64) -> SparseOp {
        let mut out = SparseOp::zeros(self.tag);
        for (r, c, v) in self.iter() {
            out.add(r, c, v * factor);
        }
        out
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &SparseOp) -> Result<SparseOp> {
        self.same_tag(other)?;
        let mut out = SparseOp::zeros(self.tag);
        for (&(i, k), &a) in &self.entries {
            let row = other.entries.range((k, 0)..=(k, usize::MAX));
            for (&(_, j), &b) in row {
                out.add(i, j, a * b);
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> SparseOp {
        let mut out = SparseOp::zeros(self.tag);
        for (r, c, v) in self.iter() {
            out.add(c, r, v.conj());
        }
        out
    }

    pub fn is_hermitian_exact(&self) -> bool {
        *self == self.dagger()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation after ordinal identification.
    /// Requires equal dimensions but tolerates different representations.
    pub fn max_abs_diff(&self, other: &SparseOp) -> f64 {
        if self.tag.dim != other.tag.dim {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for (r, c, v) in self.iter() {
            worst = worst.max((v - other.get(r, c)).norm());
        }
        for (r, c, v) in other.iter() {
            worst = worst.max((v - self.get(r, c)).norm());
        }
        worst
    }

    /// Apply to a coefficient vector.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.tag.dim {
            return Err(Error::LengthMismatch { expected: self.tag.dim, found: v.len() });
        }
        let mut out = vec![Complex64::ZERO; v.len()];
        for (r, c, val) in self.iter() {
            out[r] += val * v[c];
        }
        Ok(out)
    }

    /// Maximum absolute row sum; an upper bound on the spectral norm.
    pub fn inf_norm(&self) -> f64 {
        let mut sums = vec![0.0f64; self.tag.dim];
        for (r, _, v) in self.iter() {
            sums[r] += v.norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.tag.dim);
        for (r, c, v) in self.iter() {
            m.set(r, c, v);
        }
        m
    }

    /// Spectral norm via the dense Hermitian eigensolver.
    pub fn spectral_norm_hermitian(&self) -> Result<f64> {
        crate::dense::hermitian_spectral_norm(&self.to_dense())
    }
}

/// `a b - b a`.
pub fn commutator(a: &SparseOp, b: &SparseOp) -> Result<SparseOp> {
    a.matmul(b)?.minus(&b.matmul(a)?)
}

/// Which closed form a Hamiltonian is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepKind {
    /// Number-basis form on the Fock enumeration.
    Fock,
    /// Transition rules on the relative-number/pair-depth lattice.
    LatticeRules,
    /// Shift/projection operator products on the same lattice.
    LatticeFactored,
    /// Even/odd branch split with halved mode labels.
    Branch,
    /// Ten shift products on the bilateral plane.
    Plane,
    /// Fourier multiplication blocks on the two-torus modes.
    Circle,
}

impl RepKind {
    /// The basis enumeration this constructor expects.
    pub fn representation(&self) -> Representation {
        match self {
            RepKind::Fock => Representation::Fock,
            RepKind::LatticeRules | RepKind::LatticeFactored => Representation::Lattice,
            RepKind::Branch => Representation::Branch,
            RepKind::Plane => Representation::Plane,
            RepKind::Circle => Representation::Circle,
        }
    }

    pub const CHAIN: [RepKind; 6] = [
        RepKind::Fock,
        RepKind::LatticeRules,
        RepKind::LatticeFactored,
        RepKind::Branch,
        RepKind::Plane,
        RepKind::Circle,
    ];
}

fn check_basis(rep: RepKind, basis: &SectorBasis) -> Result<()> {
    if basis.representation() != rep.representation() {
        return Err(Error::BasisMismatch {
            expected: format!("{:?}", rep.representation()),
            found: format!("{:?}", basis.representation()),
        });
    }
    Ok(())
}

/// Diagonal number operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumberKind {
    /// Difference of the two sides' counts.
    Relative,
    /// Sum of the two sides' counts; commutes with every Hamiltonian here.
    Total,
    /// Twice the smaller count, `total - |relative|`.
    Npm,
}

/// Diagonal number operator on any sector basis.
pub fn build_number(kind: NumberKind, basis: &SectorBasis) -> SparseOp {
    SparseOp::diagonal(
        basis.tag(),
        (0..basis.dim()).map(|j| {
            let f = basis.fock(j);
            let v = match kind {
                NumberKind::Relative => f.relative(),
                NumberKind::Total => f.total(),
                NumberKind::Npm => f.npm(),
            };
            Complex64::new(v as f64, 0.0)
        }),
    )
}

/// Diagonal gauge unitary `exp(i (phi/2) N_rel)`.
pub fn gauge_rotation(phi: f64, basis: &SectorBasis) -> SparseOp {
    SparseOp::diagonal(
        basis.tag(),
        (0..basis.dim())
            .map(|j| Complex64::from_polar(1.0, 0.5 * phi * basis.relative(j) as f64)),
    )
}

/// Shift and projection primitives restricted to a sector basis.
///
/// Unilateral shifts live on half-line coordinates and annihilate the
/// boundary; bilateral shifts live on full-line coordinates. Raising
/// operators drop components that leave the sector, which only happens
/// for operators that change the total number.
pub struct ShiftOps<'a> {
    basis: &'a SectorBasis,
}

/// Coordinate selector for [`ShiftOps`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    First,
    Second,
}

impl<'a> ShiftOps<'a> {
    pub fn new(basis: &'a SectorBasis) -> Self {
        Self { basis }
    }

    fn coord_is_half_line(&self, coord: Coord) -> bool {
        match (self.basis.representation(), coord) {
            (Representation::Fock, _) => true,
            (Representation::Lattice | Representation::Branch, Coord::First) => false,
            (Representation::Lattice | Representation::Branch, Coord::Second) => true,
            (Representation::Plane | Representation::Circle, _) => false,
        }
    }

    fn shifted(&self, j: usize, coord: Coord, delta: i32) -> Option<usize> {
        let basis = self.basis;
        match basis.representation() {
            Representation::Fock => {
                let f = basis.fock(j);
                let (alpha, beta) = match coord {
                    Coord::First => (f.alpha + delta, f.beta),
                    Coord::Second => (f.alpha, f.beta + delta),
                };
                if alpha < 0 || beta < 0 {
                    return None;
                }
                basis.ordinal_fock(FockIndex::new(alpha, beta))
            }
            Representation::Lattice => {
                let l = basis.lattice(j);
                let (n, m) = match coord {
                    Coord::First => (l.n + delta, l.m),
                    Coord::Second => (l.n, l.m + delta),
                };
                if m < 0 {
                    return None;
                }
                basis.ordinal_lattice(LatticeIndex::new(n, m))
            }
            Representation::Branch => {
                let b = basis.branch(j);
                let (p, m) = match coord {
                    Coord::First => (b.p + delta, b.m),
                    Coord::Second => (b.p, b.m + delta),
                };
                if m < 0 {
                    return None;
                }
                basis.ordinal_branch(BranchIndex { side: b.side, p, m })
            }
            Representation::Plane | Representation::Circle => {
                let z = basis.plane(j);
                let (p, r) = match coord {
                    Coord::First => (z.p + delta, z.r),
                    Coord::Second => (z.p, z.r + delta),
                };
                basis.ordinal_plane(PlaneIndex::new(p, r))
            }
        }
    }

    fn shift(&self, coord: Coord, delta: i32) -> SparseOp {
        let mut op = SparseOp::zeros(self.basis.tag());
        for j in 0..self.basis.dim() {
            if let Some(t) = self.shifted(j, coord, delta) {
                op.add(t, j, Complex64::ONE);
            }
        }
        op
    }

    /// Unilateral lowering `L` on a half-line coordinate.
    pub fn unilateral_lower(&self, coord: Coord) -> Result<SparseOp> {
        if !self.coord_is_half_line(coord) {
            return Err(Error::CoordinateUnavailable {
                rep: self.basis.representation(),
                coord: "half-line",
            });
        }
        Ok(self.shift(coord, -1))
    }

    /// Unilateral raising `L*`.
    pub fn unilateral_raise(&self, coord: Coord) -> Result<SparseOp> {
        if !self.coord_is_half_line(coord) {
            return Err(Error::CoordinateUnavailable {
                rep: self.basis.representation(),
                coord: "half-line",
            });
        }
        Ok(self.shift(coord, 1))
    }

    /// Bilateral lowering `A` on a full-line coordinate.
    pub fn bilateral_lower(&self, coord: Coord) -> Result<SparseOp> {
        if self.coord_is_half_line(coord) {
            return Err(Error::CoordinateUnavailable {
                rep: self.basis.representation(),
                coord: "full-line",
            });
        }
        Ok(self.shift(coord, -1))
    }

    /// Bilateral raising `A*`.
    pub fn bilateral_raise(&self, coord: Coord) -> Result<SparseOp> {
        if self.coord_is_half_line(coord) {
            return Err(Error::CoordinateUnavailable {
                rep: self.basis.representation(),
                coord: "full-line",
            });
        }
        Ok(self.shift(coord, 1))
    }

    /// Projection `P_M` onto mode labels satisfying a predicate, acting
    /// on the full-line relative/mode coordinate. Not available on the
    /// Fock enumeration, which has no such coordinate.
    pub fn mode_projection(&self, pred: impl Fn(i32) -> bool) -> Result<SparseOp> {
        let value = |j: usize| -> i32 {
            match self.basis.representation() {
                Representation::Fock => unreachable!(),
                Representation::Lattice => self.basis.lattice(j).n,
                Representation::Branch => self.basis.branch(j).p,
                Representation::Plane | Representation::Circle => self.basis.plane(j).p,
            }
        };
        if self.basis.representation() == Representation::Fock {
            return Err(Error::CoordinateUnavailable {
                rep: Representation::Fock,
                coord: "mode",
            });
        }
        Ok(self.projection_by(|j| pred(value(j))))
    }

    /// Projection `Q_{M'}` onto pair-depth labels satisfying a predicate.
    /// Available only where the second coordinate is the half-line depth.
    pub fn depth_projection(&self, pred: impl Fn(i32) -> bool) -> Result<SparseOp> {
        match self.basis.representation() {
            Representation::Lattice => Ok(self.projection_by(|j| pred(self.basis.lattice(j).m))),
            Representation::Branch => Ok(self.projection_by(|j| pred(self.basis.branch(j).m))),
            rep => Err(Error::CoordinateUnavailable { rep, coord: "depth" }),
        }
    }

    /// Projection onto second plane coordinate labels (circle and plane).
    pub fn second_mode_projection(&self, pred: impl Fn(i32) -> bool) -> Result<SparseOp> {
        match self.basis.representation() {
            Representation::Plane | Representation::Circle => {
                Ok(self.projection_by(|j| pred(self.basis.plane(j).r)))
            }
            rep => Err(Error::CoordinateUnavailable { rep, coord: "second mode" }),
        }
    }

    fn projection_by(&self, keep: impl Fn(usize) -> bool) -> SparseOp {
        let mut op = SparseOp::zeros(self.basis.tag());
        for j in 0..self.basis.dim() {
            if keep(j) {
                op.add(j, j, Complex64::ONE);
            }
        }
        op
    }
}

fn phase_factors(params: &ModelParams) -> (Complex64, Complex64) {
    let fwd = Complex64::from_polar(1.0, params.phi);
    (fwd, fwd.conj())
}

fn kinetic_diag(basis: &SectorBasis, params: &ModelParams) -> SparseOp {
    let denom = 2.0 * params.c;
    SparseOp::diagonal(
        basis.tag(),
        (0..basis.dim()).map(|j| {
            let rel = basis.relative(j) as f64 + params.q;
            Complex64::new(rel * rel / denom, 0.0)
        }),
    )
}

fn build_fock(params: &ModelParams, basis: &SectorBasis) -> SparseOp {
    let (e_fwd, e_bwd) = phase_factors(params);
    let mut h = kinetic_diag(basis, params);
    let a = params.alpha;
    for j in 0..basis.dim() {
        let f = basis.fock(j);
        // one pair moves left to right
        if f.alpha >= 1 {
            if let Some(t) = basis.ordinal_fock(FockIndex::new(f.alpha - 1, f.beta + 1)) {
                h.add(t, j, -a * e_fwd);
            }
        }
        // and right to left
        if f.beta >= 1 {
            if let Some(t) = basis.ordinal_fock(FockIndex::new(f.alpha + 1, f.beta - 1)) {
                h.add(t, j, -a * e_bwd);
            }
        }
    }
    h
}

fn build_lattice_rules(params: &ModelParams, basis: &SectorBasis) -> SparseOp {
    let (e_fwd, e_bwd) = phase_factors(params);
    let mut h = kinetic_diag(basis, params);
    let a = params.alpha;
    let mut hop = |h: &mut SparseOp, from: usize, n: i32, m: i32, phase: Complex64| {
        if let Some(t) = basis.ordinal_lattice(LatticeIndex::new(n, m)) {
            h.add(t, from, -a * phase);
        }
    };
    for j in 0..basis.dim() {
        let l = basis.lattice(j);
        // forward transfer lowers the relative label by two
        if l.n >= 2 {
            hop(&mut h, j, l.n - 2, l.m + 1, e_fwd);
        } else if l.n == 1 {
            hop(&mut h, j, -1, l.m, e_fwd);
        } else if l.m >= 1 {
            hop(&mut h, j, l.n - 2, l.m - 1, e_fwd);
        }
        // backward transfer raises it by two
        if l.n >= 0 {
            if l.m >= 1 {
                hop(&mut h, j, l.n + 2, l.m - 1, e_bwd);
            }
        } else if l.n == -1 {
            hop(&mut h, j, 1, l.m, e_bwd);
        } else {
            hop(&mut h, j, l.n + 2, l.m + 1, e_bwd);
        }
    }
    h
}

fn build_lattice_factored(params: &ModelParams, basis: &SectorBasis) -> Result<SparseOp> {
    let ops = ShiftOps::new(basis);
    let a2 = ops.bilateral_lower(Coord::First)?.matmul(&ops.bilateral_lower(Coord::First)?)?;
    let a2s = a2.dagger();
    let l = ops.unilateral_lower(Coord::Second)?;
    let ls = ops.unilateral_raise(Coord::Second)?;
    let p_ge2 = ops.mode_projection(|n| n >= 2)?;
    let p_one = ops.mode_projection(|n| n == 1)?;
    let p_le0 = ops.mode_projection(|n| n <= 0)?;
    let p_ge0 = ops.mode_projection(|n| n >= 0)?;
    let p_neg_one = ops.mode_projection(|n| n == -1)?;
    let p_le_neg2 = ops.mode_projection(|n| n <= -2)?;
    let q_ge0 = ops.depth_projection(|m| m >= 0)?;
    let q_ge1 = ops.depth_projection(|m| m >= 1)?;

    // The two factors of each term commute on the full space; on the
    // sector the total-lowering factor must be applied first so that no
    // intermediate leaves the truncation.
    let fwd = ls
        .matmul(&q_ge0)?
        .matmul(&a2.matmul(&p_ge2)?)?
        .plus(&a2.matmul(&p_one)?.matmul(&q_ge0)?)?
        .plus(&a2.matmul(&p_le0)?.matmul(&l.matmul(&q_ge1)?)?)?;
    let bwd = a2s
        .matmul(&p_ge0)?
        .matmul(&l.matmul(&q_ge1)?)?
        .plus(&a2s.matmul(&p_neg_one)?.matmul(&q_ge0)?)?
        .plus(&ls.matmul(&q_ge0)?.matmul(&a2s.matmul(&p_le_neg2)?)?)?;

    let (e_fwd, e_bwd) = phase_factors(params);
    let tunneling = fwd.scale(-params.alpha * e_fwd).plus(&bwd.scale(-params.alpha * e_bwd))?;
    kinetic_diag(basis, params).plus(&tunneling)
}

fn build_branch(params: &ModelParams, basis: &SectorBasis) -> SparseOp {
    let (e_fwd, e_bwd) = phase_factors(params);
    let mut h = kinetic_diag(basis, params);
    let a = params.alpha;
    let mut hop =
        |h: &mut SparseOp, from: usize, side: BranchSide, p: i32, m: i32, phase: Complex64| {
            if m < 0 {
                return;
            }
            if let Some(t) = basis.ordinal_branch(BranchIndex { side, p, m }) {
                h.add(t, from, -a * phase);
            }
        };
    for j in 0..basis.dim() {
        let b = basis.branch(j);
        match b.side {
            BranchSide::Even => {
                // forward: A P_[1,inf) (x) L* Q_[0,inf)  +  A P_(-inf,0] (x) L Q_[1,inf)
                if b.p >= 1 {
                    hop(&mut h, j, b.side, b.p - 1, b.m + 1, e_fwd);
                }
                if b.p <= 0 && b.m >= 1 {
                    hop(&mut h, j, b.side, b.p - 1, b.m - 1, e_fwd);
                }
                // backward: A* P_[0,inf) (x) L Q_[1,inf)  +  A* P_(-inf,-1] (x) L* Q_[0,inf)
                if b.p >= 0 && b.m >= 1 {
                    hop(&mut h, j, b.side, b.p + 1, b.m - 1, e_bwd);
                }
                if b.p <= -1 {
                    hop(&mut h, j, b.side, b.p + 1, b.m + 1, e_bwd);
                }
            }
            BranchSide::Odd => {
                // forward: A P_[1,inf) (x) L* Q  +  A P_{0} (x) Q  +  A P_(-inf,-1] (x) L Q_[1,inf)
                if b.p >= 1 {
                    hop(&mut h, j, b.side, b.p - 1, b.m + 1, e_fwd);
                }
                if b.p == 0 {
                    hop(&mut h, j, b.side, -1, b.m, e_fwd);
                }
                if b.p <= -1 && b.m >= 1 {
                    hop(&mut h, j, b.side, b.p - 1, b.m - 1, e_fwd);
                }
                // backward: A* P_[0,inf) (x) L Q_[1,inf)  +  A* P_{-1} (x) Q  +  A* P_(-inf,-2] (x) L* Q
                if b.p >= 0 && b.m >= 1 {
                    hop(&mut h, j, b.side, b.p + 1, b.m - 1, e_bwd);
                }
                if b.p == -1 {
                    hop(&mut h, j, b.side, 0, b.m, e_bwd);
                }
                if b.p <= -2 {
                    hop(&mut h, j, b.side, b.p + 1, b.m + 1, e_bwd);
                }
            }
        }
    }
    h
}

/// The ten plane shift products: predicate on `(p, r)`, shift `(dp, dr)`,
/// and whether the term belongs to the forward transfer direction.
const PLANE_TERMS: [(fn(i32, i32) -> bool, i32, i32, bool); 10] = [
    (|p, r| p >= 1 && r >= 0, -1, 1, true),
    (|p, r| p <= 0 && r >= 1, -1, -1, true),
    (|p, r| p >= 0 && r >= 1, 1, -1, false),
    (|p, r| p <= -1 && r >= 0, 1, 1, false),
    (|p, r| p >= 1 && r <= -1, -1, -1, true),
    (|p, r| p == 0 && r <= -1, -1, 0, true),
    (|p, r| p <= -1 && r <= -2, -1, 1, true),
    (|p, r| p >= 0 && r <= -2, 1, 1, false),
    (|p, r| p == -1 && r <= -1, 1, 0, false),
    (|p, r| p <= -2 && r <= -1, 1, -1, false),
];

fn build_plane(params: &ModelParams, basis: &SectorBasis) -> SparseOp {
    let (e_fwd, e_bwd) = phase_factors(params);
    let mut h = kinetic_diag(basis, params);
    let a = params.alpha;
    for j in 0..basis.dim() {
        let z = basis.plane(j);
        for (pred, dp, dr, forward) in PLANE_TERMS {
            if pred(z.p, z.r) {
                if let Some(t) = basis.ordinal_plane(PlaneIndex::new(z.p + dp, z.r + dr)) {
                    h.add(t, j, -a * if forward { e_fwd } else { e_bwd });
                }
            }
        }
    }
    h
}

fn build_circle(params: &ModelParams, basis: &SectorBasis) -> SparseOp {
    let mut h = kinetic_diag(basis, params);
    let a = params.alpha;
    // multiplication by exp(i(s1 (theta_1 - Phi) + s2 theta_2)) restricted
    // to a first-factor mode window, grouped by the second-factor block
    let mut mult = |h: &mut SparseOp,
                    from: usize,
                    z: PlaneIndex,
                    s1: i32,
                    s2: i32,
                    p_lo: i32,
                    p_hi: i32| {
        if z.p < p_lo || z.p > p_hi {
            return;
        }
        if let Some(t) = basis.ordinal_plane(PlaneIndex::new(z.p + s1, z.r + s2)) {
            let phase = Complex64::from_polar(1.0, -(s1 as f64) * params.phi);
            h.add(t, from, -a * phase);
        }
    };
    const LO: i32 = i32::MIN / 4;
    const HI: i32 = i32::MAX / 4;
    for j in 0..basis.dim() {
        let z = basis.plane(j);
        if z.r == 0 {
            // second-factor block {0}
            mult(&mut h, j, z, 1, 1, LO, -1);
            mult(&mut h, j, z, -1, 1, 1, HI);
        } else if z.r >= 1 {
            // block [1, inf)
            mult(&mut h, j, z, -1, -1, LO, 0);
            mult(&mut h, j, z, -1, 1, 1, HI);
            mult(&mut h, j, z, 1, 1, LO, -1);
            mult(&mut h, j, z, 1, -1, 0, HI);
        } else if z.r == -1 {
            // block {-1}
            mult(&mut h, j, z, 1, -1, LO, -2);
            mult(&mut h, j, z, 1, 0, -1, -1);
            mult(&mut h, j, z, -1, 0, 0, 0);
            mult(&mut h, j, z, -1, -1, 1, HI);
        } else {
            // block (-inf, -2]
            mult(&mut h, j, z, -1, 1, LO, -1);
            mult(&mut h, j, z, -1, 0, 0, 0);
            mult(&mut h, j, z, -1, -1, 1, HI);
            mult(&mut h, j, z, 1, -1, LO, -2);
            mult(&mut h, j, z, 1, 0, -1, -1);
            mult(&mut h, j, z, 1, 1, 0, HI);
        }
    }
    h
}

/// Hermitian Hamiltonian built from the representation's own closed form.
///
/// With `phi = 0` this reduces to the unshifted junction Hamiltonian of
/// that representation; equality across representations after ordinal
/// identification is checked, never assumed.
pub fn build_hamiltonian(
    rep: RepKind,
    params: &ModelParams,
    basis: &SectorBasis,
) -> Result<SparseOp> {
    check_basis(rep, basis)?;
    Ok(match rep {
        RepKind::Fock => build_fock(params, basis),
        RepKind::LatticeRules => build_lattice_rules(params, basis),
        RepKind::LatticeFactored => build_lattice_factored(params, basis)?,
        RepKind::Branch => build_branch(params, basis),
        RepKind::Plane => build_plane(params, basis),
        RepKind::Circle => build_circle(params, basis),
    })
}

/// Variant Hamiltonian whose kinetic term carries both the relative
/// number and the pair depth symmetrically. Defined at `q = 0`, `phi = 0`.
pub fn build_symmetric_hamiltonian(
    rep: RepKind,
    params: &ModelParams,
    basis: &SectorBasis,
) -> Result<SparseOp> {
    if params.q != 0.0 {
        return Err(Error::InvalidParameter(
            "the symmetric Hamiltonian is defined at q = 0".into(),
        ));
    }
    if params.phi != 0.0 {
        return Err(Error::InvalidParameter(
            "the symmetric Hamiltonian is defined at phase shift zero".into(),
        ));
    }
    if !matches!(rep, RepKind::Fock | RepKind::Plane | RepKind::Circle) {
        return Err(Error::IncompatibleRepresentation { rep: rep.representation() });
    }
    check_basis(rep, basis)?;
    let denom = 2.0 * params.c;
    let kinetic = SparseOp::diagonal(
        basis.tag(),
        (0..basis.dim()).map(|j| {
            let value = match rep {
                RepKind::Fock => {
                    let f = basis.fock(j);
                    let rel = f.relative() as f64;
                    let npm = f.npm() as f64;
                    (rel * rel + npm * npm) / denom
                }
                _ => {
                    let z = basis.plane(j);
                    if z.r >= 0 {
                        let (tp, tr) = (2.0 * z.p as f64, 2.0 * z.r as f64);
                        (tp * tp + tr * tr) / denom
                    } else {
                        let tp = 2.0 * z.p as f64 + 1.0;
                        let tr = 2.0 * (z.r as f64 + 1.0);
                        (tp * tp + tr * tr) / denom
                    }
                }
            };
            Complex64::new(value, 0.0)
        }),
    );
    let full = build_hamiltonian(rep, params, basis)?;
    // swap the kinetic diagonal of the standard form for the symmetric one
    full.minus(&kinetic_diag(basis, params))?.plus(&kinetic)
}

/// Permutation unitary carrying ordinals of `rep_a`'s enumeration to
/// `rep_b`'s. Canonical ordering shares ordinals across representations,
/// so this is the identity matrix; it exists to make the chain explicit
/// and to support reordered bases in tests.
pub fn representation_permutation(rep_a: RepKind, rep_b: RepKind, cutoff: i32) -> Result<SparseOp> {
    let a = SectorBasis::new(rep_a.representation(), cutoff)?;
    let b = SectorBasis::new(rep_b.representation(), cutoff)?;
    let mut op = SparseOp::zeros(b.tag());
    for j in 0..a.dim() {
        let target = b.ordinal_fock(a.fock(j)).expect("sector enumerations share index sets");
        op.add(target, j, Complex64::ONE);
    }
    Ok(op)
}

/// Build all six representations independently and record the residual
/// of every adjacent pair, the end-to-end pair, total-number
/// conservation, and the gauge conjugation identities, at the given
/// phase shift and at phase zero.
pub fn verify_equivalences(params: &ModelParams, cutoff: i32, tol: f64) -> Result<VerifyReport> {
    if tol <= 0.0 {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let mut report = VerifyReport::new();
    let params0 = params.with_phi(0.0);

    let mut built0 = Vec::new();
    let mut built_phi = Vec::new();
    for rep in RepKind::CHAIN {
        let basis = SectorBasis::new(rep.representation(), cutoff)?;
        built0.push(build_hamiltonian(rep, &params0, &basis)?);
        built_phi.push(build_hamiltonian(rep, params, &basis)?);
    }

    let names = ["fock", "lattice_rules", "lattice_factored", "branch", "plane", "circle"];
    for w in 0..names.len() - 1 {
        report.push(
            format!("h0_{}_vs_{}", names[w], names[w + 1]),
            built0[w].max_abs_diff(&built0[w + 1]),
            tol,
        );
        report.push(
            format!("hphi_{}_vs_{}", names[w], names[w + 1]),
            built_phi[w].max_abs_diff(&built_phi[w + 1]),
            tol,
        );
    }
    report.push("h0_fock_vs_circle", built0[0].max_abs_diff(&built0[5]), tol);
    report.push("hphi_fock_vs_circle", built_phi[0].max_abs_diff(&built_phi[5]), tol);

    // hermiticity of every constructor output
    for (name, h) in names.iter().zip(built_phi.iter()) {
        report.push_bool(format!("hphi_{name}_hermitian"), h.is_hermitian_exact());
    }

    // total-number conservation, exact block structure
    let fock_basis = SectorBasis::new(Representation::Fock, cutoff)?;
    let total = build_number(NumberKind::Total, &fock_basis);
    report.push("total_number_commutator", commutator(&total, &built_phi[0])?.max_abs(), 0.0);

    // gauge conjugation carries the unshifted form onto the shifted one
    let g_fwd = gauge_rotation(params.phi, &fock_basis);
    let g_bwd = gauge_rotation(-params.phi, &fock_basis);
    let conjugated = g_bwd.matmul(&built0[0])?.matmul(&g_fwd)?;
    report.push("gauge_conjugation_fock", conjugated.max_abs_diff(&built_phi[0]), tol);

    // same identity on the circle side; a nonzero residual here would
    // flag the grouped phase reading of the magnetic multiplication blocks
    let circle_basis = SectorBasis::new(Representation::Circle, cutoff)?;
    let g_fwd_c = gauge_rotation(params.phi, &circle_basis);
    let g_bwd_c = gauge_rotation(-params.phi, &circle_basis);
    let conjugated_c = g_bwd_c.matmul(&built0[5])?.matmul(&g_fwd_c)?;
    report.push("gauge_conjugation_circle", conjugated_c.max_abs_diff(&built_phi[5]), tol);

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexing::enumerate_sector;

    fn params(c: f64, q: f64, alpha: f64, phi: f64) -> ModelParams {
        ModelParams::new(c, q, alpha, phi).unwrap()
    }

    fn fock_basis(k: i32) -> SectorBasis {
        enumerate_sector(Representation::Fock, k).unwrap()
    }

    #[test]
    fn fock_hamiltonian_k1_printed_matrix() {
        let basis = fock_basis(1);
        let h = build_hamiltonian(RepKind::Fock, &params(1.0, 0.0, 1.0, 0.0), &basis).unwrap();
        let expect = [
            [0.0, 0.0, 0.0],
            [0.0, 0.5, -1.0],
            [0.0, -1.0, 0.5],
        ];
        for (i, row) in expect.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert!((h.get(i, j) - Complex64::new(v, 0.0)).norm() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn alpha_zero_is_diagonal() {
        for rep in RepKind::CHAIN {
            let basis = enumerate_sector(rep.representation(), 6).unwrap();
            let h = build_hamiltonian(rep, &params(1.3, 0.4, 0.0, 0.9), &basis).unwrap();
            for (r, c, _) in h.iter() {
                assert_eq!(r, c, "{rep:?} has off-diagonal entries at alpha = 0");
            }
        }
    }

    #[test]
    fn number_operator_examples() {
        let basis = fock_basis(8);
        let rel = build_number(NumberKind::Relative, &basis);
        let tot = build_number(NumberKind::Total, &basis);
        let npm = build_number(NumberKind::Npm, &basis);
        let j = basis.ordinal_fock(FockIndex::new(5, 3)).unwrap();
        assert_eq!(rel.get(j, j).re, 2.0);
        assert_eq!(npm.get(j, j).re, 6.0);
        let j = basis.ordinal_fock(FockIndex::new(3, 4)).unwrap();
        assert_eq!(tot.get(j, j).re, 7.0);
    }

    #[test]
    fn shift_ops_unilateral_examples() {
        let basis = fock_basis(4);
        let ops = ShiftOps::new(&basis);
        let l = ops.unilateral_lower(Coord::First).unwrap();
        let j10 = basis.ordinal_fock(FockIndex::new(1, 0)).unwrap();
        let j00 = basis.ordinal_fock(FockIndex::new(0, 0)).unwrap();
        assert_eq!(l.get(j00, j10), Complex64::ONE);
        // on the boundary the lowering gives the zero vector
        let j03 = basis.ordinal_fock(FockIndex::new(0, 3)).unwrap();
        for r in 0..basis.dim() {
            assert_eq!(l.get(r, j03), Complex64::ZERO);
        }
    }

    #[test]
    fn lower_raise_is_identity_below_top_shell() {
        for k in 1..=12 {
            let basis = fock_basis(k);
            let ops = ShiftOps::new(&basis);
            let l = ops.unilateral_lower(Coord::First).unwrap();
            let ls = ops.unilateral_raise(Coord::First).unwrap();
            let prod = l.matmul(&ls).unwrap();
            // raising leaves the sector on the top shell, so L L* is the
            // projection onto totals <= K-1
            for j in 0..basis.dim() {
                let expect = if basis.total(j) <= k - 1 { 1.0 } else { 0.0 };
                assert_eq!(prod.get(j, j).re, expect, "K={k} j={j}");
            }
        }
    }

    #[test]
    fn projection_coordinate_errors() {
        let fock = fock_basis(3);
        assert!(ShiftOps::new(&fock).mode_projection(|n| n >= 0).is_err());
        let plane = enumerate_sector(Representation::Plane, 3).unwrap();
        assert!(ShiftOps::new(&plane).depth_projection(|m| m >= 0).is_err());
        assert!(ShiftOps::new(&plane).unilateral_lower(Coord::First).is_err());
        let lattice = enumerate_sector(Representation::Lattice, 3).unwrap();
        assert!(ShiftOps::new(&lattice).unilateral_lower(Coord::First).is_err());
        assert!(ShiftOps::new(&lattice).bilateral_lower(Coord::Second).is_err());
    }

    #[test]
    fn all_representations_agree_entrywise() {
        let p = params(1.0, 0.3, 2.5, 1.1);
        let report = verify_equivalences(&p, 10, 1e-13).unwrap();
        assert!(report.passed(), "{:#?}", report.checks);
        assert!(report.max_residual() <= 1e-13);
    }

    #[test]
    fn equivalences_exact_at_phase_zero() {
        let report = verify_equivalences(&params(1.0, 0.0, 1.0, 0.0), 6, 1e-15).unwrap();
        assert!(report.passed());
        assert_eq!(report.max_residual(), 0.0);
    }

    #[test]
    fn gauge_rotation_entries() {
        let basis = fock_basis(2);
        let g = gauge_rotation(std::f64::consts::PI, &basis);
        let j = basis.ordinal_fock(FockIndex::new(1, 0)).unwrap();
        assert!((g.get(j, j) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let id = gauge_rotation(0.0, &basis);
        assert_eq!(id.max_abs_diff(&SparseOp::identity(basis.tag())), 0.0);
    }

    #[test]
    fn gauge_conjugation_matches_shifted_hamiltonian() {
        let basis = fock_basis(8);
        let phi = 0.83;
        let h0 = build_hamiltonian(RepKind::Fock, &params(1.0, 0.2, 1.4, 0.0), &basis).unwrap();
        let hphi = build_hamiltonian(RepKind::Fock, &params(1.0, 0.2, 1.4, phi), &basis).unwrap();
        let conj = gauge_rotation(-phi, &basis)
            .matmul(&h0)
            .unwrap()
            .matmul(&gauge_rotation(phi, &basis))
            .unwrap();
        assert!(conj.max_abs_diff(&hphi) <= 1e-14);
    }

    #[test]
    fn commutator_of_anything_with_itself_vanishes() {
        let basis = fock_basis(5);
        let h = build_hamiltonian(RepKind::Fock, &params(0.7, 0.1, 1.9, 0.4), &basis).unwrap();
        assert_eq!(commutator(&h, &h).unwrap().nnz(), 0);
    }

    #[test]
    fn total_number_commutes_exactly() {
        let basis = fock_basis(9);
        let h = build_hamiltonian(RepKind::Fock, &params(0.9, -0.4, 2.2, 0.6), &basis).unwrap();
        let total = build_number(NumberKind::Total, &basis);
        assert_eq!(commutator(&total, &h).unwrap().nnz(), 0);
    }

    #[test]
    fn relative_number_commutator_matches_direct_form() {
        // [N_rel, H(phi)] = 2 alpha (e^{i phi} T_fwd - e^{-i phi} T_bwd)
        let phi = 0.77;
        let alpha = 1.6;
        for k in 1..=10 {
            let basis = fock_basis(k);
            let h = build_hamiltonian(RepKind::Fock, &params(1.0, 0.2, alpha, phi), &basis)
                .unwrap();
            let rel = build_number(NumberKind::Relative, &basis);
            let got = commutator(&rel, &h).unwrap();

            let ops = ShiftOps::new(&basis);
            let l1 = ops.unilateral_lower(Coord::First).unwrap();
            let r1 = ops.unilateral_raise(Coord::First).unwrap();
            let l2 = ops.unilateral_lower(Coord::Second).unwrap();
            let r2 = ops.unilateral_raise(Coord::Second).unwrap();
            let fwd = r2.matmul(&l1).unwrap(); // pair left to right
            let bwd = r1.matmul(&l2).unwrap();
            let direct = fwd
                .scale(2.0 * alpha * Complex64::from_polar(1.0, phi))
                .minus(&bwd.scale(2.0 * alpha * Complex64::from_polar(1.0, -phi)))
                .unwrap();
            assert!(got.max_abs_diff(&direct) <= 1e-13, "K={k}");
        }
    }

    #[test]
    fn block_reduction_exact() {
        for k in 1..=12 {
            let basis = fock_basis(k);
            let h =
                build_hamiltonian(RepKind::Fock, &params(1.1, 0.3, 1.7, 0.4), &basis).unwrap();
            for (r, c, _) in h.iter() {
                assert_eq!(basis.total(r), basis.total(c), "K={k}");
            }
        }
    }

    #[test]
    fn even_odd_reduction_on_lattice() {
        let basis = enumerate_sector(Representation::Lattice, 10).unwrap();
        let h =
            build_hamiltonian(RepKind::LatticeRules, &params(1.0, 0.2, 1.3, 0.5), &basis).unwrap();
        for (r, c, _) in h.iter() {
            let parity_r = basis.lattice(r).n.rem_euclid(2);
            let parity_c = basis.lattice(c).n.rem_euclid(2);
            assert_eq!(parity_r, parity_c);
        }
    }

    #[test]
    fn branch_projection_identities() {
        // the twelve even/odd projection identities, checked as diagonal
        // matrices on the branch enumeration against the lattice side
        let k = 12;
        let lattice = enumerate_sector(Representation::Lattice, k).unwrap();
        let branch = enumerate_sector(Representation::Branch, k).unwrap();
        type Window = (&'static str, fn(i32) -> bool, fn(i32) -> bool, BranchSide, bool);
        // (name, lattice-side predicate, branch-side predicate, side, nonzero)
        let cases: [Window; 12] = [
            ("even_le_-2", |n| n <= -2, |p| p <= -1, BranchSide::Even, true),
            ("even_ge_2", |n| n >= 2, |p| p >= 1, BranchSide::Even, true),
            ("even_ge_0", |n| n >= 0, |p| p >= 0, BranchSide::Even, true),
            ("even_le_0", |n| n <= 0, |p| p <= 0, BranchSide::Even, true),
            ("even_eq_-1", |n| n == -1, |_| false, BranchSide::Even, false),
            ("even_eq_1", |n| n == 1, |_| false, BranchSide::Even, false),
            ("odd_le_-2", |n| n <= -2, |p| p <= -2, BranchSide::Odd, true),
            ("odd_ge_2", |n| n >= 2, |p| p >= 1, BranchSide::Odd, true),
            ("odd_ge_0", |n| n >= 0, |p| p >= 0, BranchSide::Odd, true),
            ("odd_le_0", |n| n <= 0, |p| p <= -1, BranchSide::Odd, true),
            ("odd_eq_-1", |n| n == -1, |p| p == -1, BranchSide::Odd, true),
            ("odd_eq_1", |n| n == 1, |p| p == 0, BranchSide::Odd, true),
        ];
        for (name, lat_pred, br_pred, side, nonzero) in cases {
            let mut any = false;
            for j in 0..branch.dim() {
                let b = branch.branch(j);
                if b.side != side {
                    continue;
                }
                let n = lattice.lattice(j).n;
                let lhs = lat_pred(n);
                let rhs = br_pred(b.p);
                assert_eq!(lhs, rhs, "{name} fails at ordinal {j} (n={n}, p={})", b.p);
                any |= lhs;
            }
            assert_eq!(any, nonzero, "{name}: expected nonzero = {nonzero}");
        }
    }

    #[test]
    fn quadrant_cosine_actions() {
        // states supported on a first-factor/second-factor sign quadrant
        // see a plain two-sided cosine: shifts p -> p +- 1 paired with the
        // stated r shift
        let k = 12;
        let basis = enumerate_sector(Representation::Circle, k).unwrap();
        let p = params(1.0, 0.0, 1.0, 0.0);
        let h = build_hamiltonian(RepKind::Circle, &p, &basis).unwrap();
        let kinetic = kinetic_diag(&basis, &p);
        let tunneling = h.minus(&kinetic).unwrap();

        type Quadrant = (&'static str, fn(i32, i32) -> bool, i32);
        // r_pair: -1 means cos(theta_1 - theta_2), +1 means cos(theta_1 + theta_2)
        let quadrants: [Quadrant; 4] = [
            ("p>=1,r>=1", |p, r| p >= 1 && r >= 1, -1),
            ("p<=-2,r<=-2", |p, r| p <= -2 && r <= -2, -1),
            ("p<=-1,r>=1", |p, r| p <= -1 && r >= 1, 1),
            ("p>=1,r<=-2", |p, r| p >= 1 && r <= -2, 1),
        ];
        for (name, pred, r_pair) in quadrants {
            let mut state = vec![Complex64::ZERO; basis.dim()];
            let mut support = 0;
            for j in 0..basis.dim() {
                let z = basis.plane(j);
                if pred(z.p, z.r) {
                    state[j] = Complex64::from_polar(1.0 / (1.0 + j as f64), 0.31 * j as f64);
                    support += 1;
                }
            }
            assert!(support > 2, "{name}: quadrant empty at this cutoff");
            let got = tunneling.apply(&state).unwrap();
            // cosine action: shift p by +-1 with r moving by -+ r_pair each way
            let mut expect = vec![Complex64::ZERO; basis.dim()];
            for j in 0..basis.dim() {
                if state[j] == Complex64::ZERO {
                    continue;
                }
                let z = basis.plane(j);
                for s in [1, -1] {
                    let target = PlaneIndex::new(z.p + s, z.r + s * r_pair);
                    let t = basis.ordinal_plane(target).unwrap();
                    expect[t] += -p.alpha * state[j];
                }
            }
            let worst = got
                .iter()
                .zip(&expect)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max);
            assert!(worst <= 1e-13, "{name}: residual {worst}");
        }
    }

    #[test]
    fn symmetric_hamiltonian_diagonal_and_equivalence() {
        let p = params(1.0, 0.0, 1.0, 0.0);
        let fock = fock_basis(8);
        let h = build_symmetric_hamiltonian(RepKind::Fock, &p, &fock).unwrap();
        let j = fock.ordinal_fock(FockIndex::new(5, 3)).unwrap();
        assert!((h.get(j, j).re - 20.0).abs() < 1e-14);

        let circle = enumerate_sector(Representation::Circle, 8).unwrap();
        let hc = build_symmetric_hamiltonian(RepKind::Circle, &p, &circle).unwrap();
        assert!(h.max_abs_diff(&hc) <= 1e-14);
        let plane = enumerate_sector(Representation::Plane, 8).unwrap();
        let hp = build_symmetric_hamiltonian(RepKind::Plane, &p, &plane).unwrap();
        assert!(h.max_abs_diff(&hp) <= 1e-14);

        let alpha_zero = build_symmetric_hamiltonian(
            RepKind::Fock,
            &params(2.0, 0.0, 0.0, 0.0),
            &fock,
        )
        .unwrap();
        for (r, c, _) in alpha_zero.iter() {
            assert_eq!(r, c);
        }
    }

    #[test]
    fn symmetric_hamiltonian_rejects_gauge_shift() {
        let fock = fock_basis(4);
        assert!(
            build_symmetric_hamiltonian(RepKind::Fock, &params(1.0, 0.5, 1.0, 0.0), &fock)
                .is_err()
        );
    }

    #[test]
    fn permutation_is_identity_on_canonical_order() {
        let perm = representation_permutation(RepKind::Fock, RepKind::Plane, 9).unwrap();
        assert_eq!(perm.max_abs_diff(&SparseOp::identity(perm.tag())), 0.0);
    }

    #[test]
    fn basis_mismatch_rejected() {
        let fock = fock_basis(3);
        assert!(build_hamiltonian(RepKind::Circle, &params(1.0, 0.0, 1.0, 0.0), &fock).is_err());
        let plane = enumerate_sector(Representation::Plane, 4).unwrap();
        let a = SparseOp::identity(fock.tag());
        let b = SparseOp::identity(plane.tag());
        assert!(a.matmul(&b).is_err());
    }

    #[test]
    fn current_norm_matches_chain_closed_form() {
        // the tunneling current restricted to the sector has spectral
        // norm 2|alpha| cos(pi / (K + 2)); in particular it exceeds
        // |alpha| once K >= 2
        let alpha = 1.3;
        for k in [2, 5, 12] {
            let basis = fock_basis(k);
            let h = build_hamiltonian(RepKind::Fock, &params(1.0, 0.0, alpha, 0.4), &basis)
                .unwrap();
            let rel = build_number(NumberKind::Relative, &basis);
            let current = commutator(&rel, &h).unwrap().scale(Complex64::new(0.0, 0.5));
            let norm = current.spectral_norm_hermitian().unwrap();
            let expect = 2.0 * alpha * (std::f64::consts::PI / (k as f64 + 2.0)).cos();
            assert!((norm - expect).abs() < 1e-10, "K={k}: {norm} vs {expect}");
        }
    }
}
