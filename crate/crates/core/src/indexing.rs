//! Index sets, bijections between representations, and sector enumeration.
//!
//! Five index types label the same states:
//!
//! * [`FockIndex`] `(alpha, beta)` - particle counts of the two sides,
//! * [`LatticeIndex`] `(n, m)` - relative number and pair depth on `Z x N`,
//! * [`BranchIndex`] - even/odd split of the relative number,
//! * [`PlaneIndex`] `(p, r)` - two bilateral mode labels on `Z x Z`,
//! * the circle representation, which reuses [`PlaneIndex`] as Fourier
//!   mode labels `e^{i p theta_1} e^{i r theta_2}`.
//!
//! All bijections are exact on machine integers, and the sector of total
//! particle number `<= K` is finite with dimension `(K+1)(K+2)/2`.

use std::collections::HashMap;

use crate::{Error, Result};

/// Largest supported sector cutoff; keeps dense fallbacks tractable.
pub const MAX_CUTOFF: i32 = 200;

/// Basis label on `l2(N) (x) l2(N)`: `alpha` particles left, `beta` right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockIndex {
    pub alpha: i32,
    pub beta: i32,
}

/// Basis label on `l2(Z x N)`: relative number `n`, pair depth `m >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeIndex {
    pub n: i32,
    pub m: i32,
}

/// Even or odd relative-number branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BranchSide {
    Even,
    Odd,
}

/// Basis label on the even/odd branch split `(l2(Z) (x) l2(N))^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BranchIndex {
    pub side: BranchSide,
    pub p: i32,
    pub m: i32,
}

/// Basis label on `l2(Z) (x) l2(Z)`; negative `r` encodes the odd branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaneIndex {
    pub p: i32,
    pub r: i32,
}

impl FockIndex {
    pub fn new(alpha: i32, beta: i32) -> Self {
        debug_assert!(alpha >= 0 && beta >= 0);
        Self { alpha, beta }
    }

    /// Total particle number `alpha + beta`.
    pub fn total(&self) -> i32 {
        self.alpha + self.beta
    }

    /// Relative particle number `alpha - beta`.
    pub fn relative(&self) -> i32 {
        self.alpha - self.beta
    }

    /// Twice the smaller count, `2 min(alpha, beta)`.
    pub fn npm(&self) -> i32 {
        2 * self.alpha.min(self.beta)
    }
}

impl LatticeIndex {
    pub fn new(n: i32, m: i32) -> Self {
        debug_assert!(m >= 0);
        Self { n, m }
    }

    pub fn total(&self) -> i32 {
        self.n.abs() + 2 * self.m
    }

    pub fn relative(&self) -> i32 {
        self.n
    }

    pub fn npm(&self) -> i32 {
        2 * self.m
    }
}

impl BranchIndex {
    pub fn total(&self) -> i32 {
        self.relative().abs() + 2 * self.m
    }

    pub fn relative(&self) -> i32 {
        match self.side {
            BranchSide::Even => 2 * self.p,
            BranchSide::Odd => 2 * self.p + 1,
        }
    }

    pub fn npm(&self) -> i32 {
        2 * self.m
    }
}

impl PlaneIndex {
    pub fn new(p: i32, r: i32) -> Self {
        Self { p, r }
    }

    /// Total particle number of the mode, the four-case count.
    pub fn total(&self) -> i32 {
        let (p, r) = (self.p, self.r);
        if r >= 0 {
            if p >= 0 {
                2 * (p + r)
            } else {
                2 * (-p + r)
            }
        } else if p >= 0 {
            2 * (p - r) - 1
        } else {
            -2 * (p + r + 1) - 1
        }
    }

    pub fn relative(&self) -> i32 {
        if self.r >= 0 {
            2 * self.p
        } else {
            2 * self.p + 1
        }
    }

    pub fn npm(&self) -> i32 {
        if self.r >= 0 {
            2 * self.r
        } else {
            -2 * (self.r + 1)
        }
    }
}

/// `(alpha, beta) -> (n, m)`: relative number and smaller count.
pub fn fock_to_lattice(i: FockIndex) -> LatticeIndex {
    if i.alpha >= i.beta {
        LatticeIndex::new(i.alpha - i.beta, i.beta)
    } else {
        LatticeIndex::new(i.alpha - i.beta, i.alpha)
    }
}

/// Inverse of [`fock_to_lattice`].
pub fn lattice_to_fock(j: LatticeIndex) -> FockIndex {
    if j.n >= 0 {
        FockIndex::new(j.m + j.n, j.m)
    } else {
        FockIndex::new(j.m, j.m - j.n)
    }
}

/// Split the relative number into its even/odd branch.
pub fn lattice_to_branch(j: LatticeIndex) -> BranchIndex {
    if j.n.rem_euclid(2) == 0 {
        BranchIndex { side: BranchSide::Even, p: j.n / 2, m: j.m }
    } else {
        BranchIndex { side: BranchSide::Odd, p: (j.n - 1) / 2, m: j.m }
    }
}

pub fn branch_to_lattice(b: BranchIndex) -> LatticeIndex {
    match b.side {
        BranchSide::Even => LatticeIndex::new(2 * b.p, b.m),
        BranchSide::Odd => LatticeIndex::new(2 * b.p + 1, b.m),
    }
}

/// Fold the two branches onto one bilateral depth coordinate:
/// even keeps `r = m >= 0`, odd goes to `r = -m - 1 <= -1`.
pub fn branch_to_plane(b: BranchIndex) -> PlaneIndex {
    match b.side {
        BranchSide::Even => PlaneIndex::new(b.p, b.m),
        BranchSide::Odd => PlaneIndex::new(b.p, -b.m - 1),
    }
}

pub fn plane_to_branch(z: PlaneIndex) -> BranchIndex {
    if z.r >= 0 {
        BranchIndex { side: BranchSide::Even, p: z.p, m: z.r }
    } else {
        BranchIndex { side: BranchSide::Odd, p: z.p, m: -z.r - 1 }
    }
}

/// Composite of the whole unitary chain on index labels.
pub fn fock_to_plane(i: FockIndex) -> PlaneIndex {
    let n = i.alpha - i.beta;
    let m = i.alpha.min(i.beta);
    if n.rem_euclid(2) == 0 {
        PlaneIndex::new(n / 2, m)
    } else {
        PlaneIndex::new((n - 1) / 2, -m - 1)
    }
}

/// Exact two-sided inverse of [`fock_to_plane`].
pub fn plane_to_fock(z: PlaneIndex) -> FockIndex {
    let (n, m) = if z.r >= 0 { (2 * z.p, z.r) } else { (2 * z.p + 1, -z.r - 1) };
    lattice_to_fock(LatticeIndex::new(n, m))
}

/// Total particle number carried by a plane mode.
pub fn plane_total_number(z: PlaneIndex) -> i32 {
    z.total()
}

/// The five basis enumerations sharing one canonical ordinal ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Representation {
    Fock,
    Lattice,
    Branch,
    Plane,
    Circle,
}

/// Identity of a sector basis, carried by every operator built on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisTag {
    pub rep: Representation,
    pub cutoff: i32,
    pub dim: usize,
}

impl std::fmt::Display for BasisTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}(K={}, dim={})", self.rep, self.cutoff, self.dim)
    }
}

/// Ordered basis of the sector `total particle number <= K` in one
/// representation.
///
/// The ordinal ordering is canonical across representations: ascending
/// total number, then within each fiber the descending-`alpha` order the
/// fiber bases use. An index and its image under any of the bijections
/// above always share the same ordinal, so representation changes are
/// identity permutations on ordinals and fiber blocks are contiguous.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    rep: Representation,
    cutoff: i32,
    focks: Vec<FockIndex>,
    pos: HashMap<FockIndex, usize>,
}

impl SectorBasis {
    pub fn new(rep: Representation, cutoff: i32) -> Result<Self> {
        if cutoff < 0 {
            return Err(Error::InvalidParameter(format!("cutoff K must be >= 0, got {cutoff}")));
        }
        if cutoff > MAX_CUTOFF {
            return Err(Error::InvalidParameter(format!(
                "cutoff K = {cutoff} exceeds the supported maximum {MAX_CUTOFF}"
            )));
        }
        let mut focks = Vec::with_capacity(((cutoff + 1) * (cutoff + 2) / 2) as usize);
        for t in 0..=cutoff {
            for beta in 0..=t {
                focks.push(FockIndex::new(t - beta, beta));
            }
        }
        let pos = focks.iter().enumerate().map(|(j, &f)| (f, j)).collect();
        Ok(Self { rep, cutoff, focks, pos })
    }

    pub fn representation(&self) -> Representation {
        self.rep
    }

    pub fn cutoff(&self) -> i32 {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.focks.len()
    }

    pub fn tag(&self) -> BasisTag {
        BasisTag { rep: self.rep, cutoff: self.cutoff, dim: self.dim() }
    }

    /// Fock preimage of ordinal `j`.
    pub fn fock(&self, j: usize) -> FockIndex {
        self.focks[j]
    }

    pub fn lattice(&self, j: usize) -> LatticeIndex {
        fock_to_lattice(self.focks[j])
    }

    pub fn branch(&self, j: usize) -> BranchIndex {
        lattice_to_branch(self.lattice(j))
    }

    pub fn plane(&self, j: usize) -> PlaneIndex {
        fock_to_plane(self.focks[j])
    }

    /// Total particle number of ordinal `j`.
    pub fn total(&self, j: usize) -> i32 {
        self.focks[j].total()
    }

    /// Relative number eigenvalue of ordinal `j`.
    pub fn relative(&self, j: usize) -> i32 {
        self.focks[j].relative()
    }

    pub fn ordinal_fock(&self, f: FockIndex) -> Option<usize> {
        self.pos.get(&f).copied()
    }

    pub fn ordinal_lattice(&self, j: LatticeIndex) -> Option<usize> {
        if j.m < 0 {
            return None;
        }
        self.ordinal_fock(lattice_to_fock(j))
    }

    pub fn ordinal_branch(&self, b: BranchIndex) -> Option<usize> {
        if b.m < 0 {
            return None;
        }
        self.ordinal_fock(lattice_to_fock(branch_to_lattice(b)))
    }

    pub fn ordinal_plane(&self, z: PlaneIndex) -> Option<usize> {
        self.ordinal_fock(plane_to_fock(z))
    }
}

/// Enumerate the sector basis for a representation, cutoff `K`.
pub fn enumerate_sector(rep: Representation, cutoff: i32) -> Result<SectorBasis> {
    SectorBasis::new(rep, cutoff)
}
