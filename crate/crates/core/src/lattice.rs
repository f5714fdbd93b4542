//! Index algebra on `ℕ^m`: multi-indices, index boxes `[k, l]`, the `2^m` signed
//! corners of a box, and row-major box iteration.
//!
//! Axes are numbered from 0. The dimension is a runtime value in `1..=MAX_DIM`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported dimension. `2^MAX_DIM` corners per box query.
pub const MAX_DIM: usize = 8;

pub(crate) fn check_dim(m: usize) -> Result<()> {
    if m == 0 || m > MAX_DIM {
        Err(Error::Dimension(m))
    } else {
        Ok(())
    }
}

/// A point of `ℕ^m`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(coords: Vec<usize>) -> Result<Self> {
        check_dim(coords.len())?;
        Ok(Self(coords))
    }

    /// The index `(v, v, ..., v)` of dimension `m`.
    pub fn splat(m: usize, v: usize) -> Result<Self> {
        Self::new(vec![v; m])
    }

    pub fn zeros(m: usize) -> Result<Self> {
        Self::splat(m, 0)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub fn max_coord(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn min_coord(&self) -> usize {
        self.0.iter().copied().min().unwrap_or(0)
    }

    /// `true` when every coordinate is `<=` the corresponding coordinate of `other`.
    pub fn le_all(&self, other: &MultiIndex) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Number of lattice points of `[0, self]`.
    pub fn volume(&self) -> u128 {
        self.0.iter().map(|&h| h as u128 + 1).product()
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl std::ops::Index<usize> for MultiIndex {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

impl TryFrom<Vec<usize>> for MultiIndex {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

/// The box `[lo, hi] = {j : lo_p <= j_p <= hi_p}` of `ℕ^m`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeBox {
    lo: MultiIndex,
    hi: MultiIndex,
}

impl LatticeBox {
    pub fn new(lo: MultiIndex, hi: MultiIndex) -> Result<Self> {
        if lo.dim() != hi.dim() {
            return Err(Error::DimensionMismatch { expected: lo.dim(), got: hi.dim() });
        }
        if !lo.le_all(&hi) {
            return Err(Error::InvalidBox {
                lo: lo.0.iter().map(|&x| x as f64).collect(),
                hi: hi.0.iter().map(|&x| x as f64).collect(),
            });
        }
        Ok(Self { lo, hi })
    }

    pub fn from_coords(lo: Vec<usize>, hi: Vec<usize>) -> Result<Self> {
        Self::new(MultiIndex::new(lo)?, MultiIndex::new(hi)?)
    }

    /// `[0, hi]`, the support of a rectangular partial sum.
    pub fn anchored(hi: MultiIndex) -> Self {
        let lo = MultiIndex(vec![0; hi.dim()]);
        Self { lo, hi }
    }

    pub fn lo(&self) -> &MultiIndex {
        &self.lo
    }

    pub fn hi(&self) -> &MultiIndex {
        &self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn volume(&self) -> u128 {
        self.lo.0.iter().zip(&self.hi.0).map(|(&k, &l)| (l - k) as u128 + 1).product()
    }
}

impl fmt::Debug for LatticeBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

/// One coordinate of a box corner. `BelowZero` stands for the index `k_p - 1` when
/// `k_p = 0`; cumulative sums at such a corner are zero by convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CornerCoord {
    BelowZero,
    At(usize),
}

/// A corner of a box: every coordinate is either `l_p` or `k_p - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CornerIndex(Vec<CornerCoord>);

impl CornerIndex {
    pub fn coords(&self) -> &[CornerCoord] {
        &self.0
    }

    /// The corner as a lattice point, or `None` when some coordinate is below zero.
    pub fn resolve(&self) -> Option<MultiIndex> {
        self.0
            .iter()
            .map(|c| match c {
                CornerCoord::At(v) => Some(*v),
                CornerCoord::BelowZero => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }
}

/// The bit vector `δ` selecting a corner, and its sign `(-1)^(δ_1+...+δ_m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CornerSign {
    deltas: u16,
    dim: u8,
}

impl CornerSign {
    /// Bit `p` of `mask` is `δ_{p+1}`.
    pub fn from_mask(mask: usize, dim: usize) -> Self {
        Self { deltas: mask as u16, dim: dim as u8 }
    }

    pub fn delta(&self, axis: usize) -> bool {
        (self.deltas >> axis) & 1 == 1
    }

    pub fn deltas(&self) -> Vec<bool> {
        (0..self.dim as usize).map(|p| self.delta(p)).collect()
    }

    pub fn sign(&self) -> i8 {
        if self.deltas.count_ones().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

/// The `2^m` signed corners of `bx`, ordered by the bit mask `δ` with `δ_1` as the
/// least significant bit. Coordinate `p` is `l_p` where `δ_p = 0` and `k_p - 1`
/// (or `BelowZero`) where `δ_p = 1`.
pub fn corners(bx: &LatticeBox) -> Vec<(CornerSign, CornerIndex)> {
    let m = bx.dim();
    (0..1usize << m)
        .map(|mask| {
            let coords = (0..m)
                .map(|p| {
                    if (mask >> p) & 1 == 0 {
                        CornerCoord::At(bx.hi[p])
                    } else if bx.lo[p] == 0 {
                        CornerCoord::BelowZero
                    } else {
                        CornerCoord::At(bx.lo[p] - 1)
                    }
                })
                .collect();
            (CornerSign::from_mask(mask, m), CornerIndex(coords))
        })
        .collect()
}

/// Iterator over the lattice points of a box, last axis fastest.
#[derive(Clone, Debug)]
pub struct BoxIter {
    lo: Vec<usize>,
    hi: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for BoxIter {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut p = succ.len();
        loop {
            if p == 0 {
                break;
            }
            p -= 1;
            if succ[p] < self.hi[p] {
                succ[p] += 1;
                self.next = Some(succ);
                break;
            }
            succ[p] = self.lo[p];
        }
        Some(MultiIndex(current))
    }
}

/// Every lattice point of `bx` exactly once, in row-major order (last axis fastest).
pub fn iterate_box(bx: &LatticeBox) -> BoxIter {
    BoxIter {
        lo: bx.lo.0.clone(),
        hi: bx.hi.0.clone(),
        next: Some(bx.lo.0.clone()),
    }
}
