//! Dense cumulative-sum tables over `[0, horizon]` and corner queries on them.
//!
//! Cells are stored row-major (last axis fastest). A [`PartialSumTable`] holds
//! `S(l) = Σ_{0 <= j <= l} c_j`; a [`SequenceTable`] holds an arbitrary multiple
//! sequence. Both answer the same `2^m` alternating corner sum, which for a
//! cumulative table is the subrectangular sum over the box.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::compensated::ComplexSum;
use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, MultiIndex};

/// Default cap on the number of cells in one table (16 bytes per cell).
pub const DEFAULT_MAX_CELLS: usize = 1 << 26;

/// Environment variable overriding [`DEFAULT_MAX_CELLS`].
pub const MAX_CELLS_ENV: &str = "REGCONV_MAX_CELLS";

/// The active memory budget in cells.
pub fn max_cells() -> usize {
    std::env::var(MAX_CELLS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(DEFAULT_MAX_CELLS)
}

/// Row-major dense storage shared by both table kinds.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Dense {
    horizon: MultiIndex,
    strides: Vec<usize>,
    cells: Vec<Complex64>,
}

impl Dense {
    fn layout(horizon: &MultiIndex, budget: usize) -> Result<Vec<usize>> {
        let cells = horizon.volume();
        if cells > budget as u128 {
            return Err(Error::ResourceExhausted { cells, budget });
        }
        let m = horizon.dim();
        let mut strides = vec![1usize; m];
        for p in (0..m.saturating_sub(1)).rev() {
            strides[p] = strides[p + 1] * (horizon[p + 1] + 1);
        }
        Ok(strides)
    }

    fn filled(horizon: &MultiIndex, budget: usize, cells: Vec<Complex64>) -> Result<Self> {
        let strides = Self::layout(horizon, budget)?;
        debug_assert_eq!(cells.len() as u128, horizon.volume());
        Ok(Self { horizon: horizon.clone(), strides, cells })
    }

    #[inline]
    fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    fn check_in_range(&self, idx: &[usize]) -> Result<()> {
        if idx.len() != self.horizon.dim() {
            return Err(Error::DimensionMismatch { expected: self.horizon.dim(), got: idx.len() });
        }
        if idx.iter().zip(self.horizon.coords()).any(|(i, h)| i > h) {
            return Err(out_of_range(idx, &self.horizon));
        }
        Ok(())
    }

    /// Alternating corner sum over `[lo, hi]`; corners below zero contribute nothing.
    /// Indices must already be in range.
    #[inline]
    fn corner_sum_unchecked(&self, lo: &[usize], hi: &[usize]) -> Complex64 {
        self.corner_sum_scaled(lo, hi).0
    }

    /// The corner sum and `Σ |corner value|`, whose ratio bounds the cancellation.
    fn corner_sum_scaled(&self, lo: &[usize], hi: &[usize]) -> (Complex64, f64) {
        let m = lo.len();
        let mut acc = ComplexSum::new();
        let mut scale = 0.0;
        'mask: for mask in 0..1usize << m {
            let mut off = 0;
            let mut negative = false;
            for p in 0..m {
                if (mask >> p) & 1 == 0 {
                    off += hi[p] * self.strides[p];
                } else {
                    if lo[p] == 0 {
                        continue 'mask;
                    }
                    off += (lo[p] - 1) * self.strides[p];
                    negative = !negative;
                }
            }
            let v = self.cells[off];
            scale += v.norm();
            if negative {
                acc.sub(v);
            } else {
                acc.add(v);
            }
        }
        (acc.value(), scale)
    }

    fn corner_sum(&self, bx: &LatticeBox) -> Result<Complex64> {
        self.check_in_range(bx.hi().coords())?;
        Ok(self.corner_sum_unchecked(bx.lo().coords(), bx.hi().coords()))
    }
}

pub(crate) fn out_of_range(idx: &[usize], horizon: &MultiIndex) -> Error {
    Error::OutOfRange {
        query: idx.iter().map(|&x| x as f64).collect(),
        horizon: horizon.coords().iter().map(|&x| x as f64).collect(),
    }
}

/// Cumulative sums `S(l)` of a term array over `[0, horizon]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialSumTable {
    dense: Dense,
}

impl PartialSumTable {
    /// Builds the table from raw terms with the running-sum recurrence
    /// `S(l) = c_l - Σ_{δ ≠ 0} (-1)^{|δ|} S(l - δ)`, one pass in row-major order.
    pub fn try_from_terms<F>(horizon: &MultiIndex, budget: usize, mut term: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> Result<Complex64>,
    {
        Self::grow(None, horizon, budget, &mut term)
    }

    pub fn from_terms<F>(horizon: &MultiIndex, term: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> Complex64,
    {
        Self::try_from_terms(horizon, max_cells(), |j| Ok(term(j)))
    }

    /// A table over a larger horizon. Cells inside the old horizon are copied, so
    /// existing answers never change; only new cells evaluate `term`.
    pub fn extend<F>(&self, new_horizon: &MultiIndex, term: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> Complex64,
    {
        self.try_extend(new_horizon, max_cells(), |j| Ok(term(j)))
    }

    pub fn try_extend<F>(&self, new_horizon: &MultiIndex, budget: usize, mut term: F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> Result<Complex64>,
    {
        let old = self.horizon();
        if new_horizon.dim() != old.dim() {
            return Err(Error::DimensionMismatch { expected: old.dim(), got: new_horizon.dim() });
        }
        if !old.le_all(new_horizon) {
            return Err(Error::Config(format!(
                "new horizon {new_horizon:?} does not contain the current horizon {old:?}"
            )));
        }
        Self::grow(Some(self), new_horizon, budget, &mut term)
    }

    fn grow<F>(prev: Option<&Self>, horizon: &MultiIndex, budget: usize, term: &mut F) -> Result<Self>
    where
        F: FnMut(&[usize]) -> Result<Complex64>,
    {
        let m = horizon.dim();
        let strides = Dense::layout(horizon, budget)?;
        let n = horizon.volume() as usize;
        let mut cells = Vec::with_capacity(n);

        // Offsets and parities of the 2^m - 1 lower neighbours l - δ.
        let neighbours: Vec<(usize, usize, bool)> = (1..1usize << m)
            .map(|mask| {
                let off = (0..m).filter(|p| (mask >> p) & 1 == 1).map(|p| strides[p]).sum();
                (mask, off, mask.count_ones() % 2 == 1)
            })
            .collect();

        let mut idx = vec![0usize; m];
        for pos in 0..n {
            let reuse = prev.filter(|t| idx.iter().zip(t.horizon().coords()).all(|(i, h)| i <= h));
            let value = if let Some(t) = reuse {
                t.dense.cells[t.dense.offset(&idx)]
            } else {
                let mut acc = ComplexSum::new();
                acc.add(term(&idx)?);
                let positive_axes = idx
                    .iter()
                    .enumerate()
                    .fold(0usize, |b, (p, &i)| if i > 0 { b | (1 << p) } else { b });
                for &(mask, off, odd) in &neighbours {
                    if mask & !positive_axes != 0 {
                        continue;
                    }
                    let v = cells[pos - off];
                    if odd {
                        acc.add(v);
                    } else {
                        acc.sub(v);
                    }
                }
                acc.value()
            };
            cells.push(value);
            for p in (0..m).rev() {
                if idx[p] < horizon[p] {
                    idx[p] += 1;
                    break;
                }
                idx[p] = 0;
            }
        }
        Ok(Self { dense: Dense { horizon: horizon.clone(), strides, cells } })
    }

    pub fn dim(&self) -> usize {
        self.dense.horizon.dim()
    }

    pub fn horizon(&self) -> &MultiIndex {
        &self.dense.horizon
    }

    /// `S(l)`.
    pub fn cell(&self, l: &[usize]) -> Result<Complex64> {
        self.dense.check_in_range(l)?;
        Ok(self.dense.cells[self.dense.offset(l)])
    }

    #[inline]
    pub(crate) fn cell_unchecked(&self, l: &[usize]) -> Complex64 {
        self.dense.cells[self.dense.offset(l)]
    }

    /// Cells in row-major order.
    pub fn cells(&self) -> &[Complex64] {
        &self.dense.cells
    }

    /// The subrectangular sum over `bx` by the alternating corner formula.
    pub fn subrect_sum(&self, bx: &LatticeBox) -> Result<Complex64> {
        self.dense.corner_sum(bx)
    }

    pub(crate) fn subrect_scaled(&self, lo: &[usize], hi: &[usize]) -> (Complex64, f64) {
        self.dense.corner_sum_scaled(lo, hi)
    }

    /// Writes the little-endian binary layout: magic `PSTB`, `u32` version (1),
    /// `u32` dimension, one `u64` horizon entry per axis, then each cell as two
    /// `f64` (real, imaginary) in row-major order.
    pub fn dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"PSTB")?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&(self.dim() as u32).to_le_bytes())?;
        for &h in self.horizon().coords() {
            w.write_all(&(h as u64).to_le_bytes())?;
        }
        for z in &self.dense.cells {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"PSTB" {
            return Err(Error::Format("bad magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != 1 {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let m = read_u32(&mut r)? as usize;
        let mut horizon = Vec::with_capacity(m.min(16));
        for _ in 0..m {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            horizon.push(usize::try_from(u64::from_le_bytes(b)).map_err(|_| Error::Format("horizon overflow".into()))?);
        }
        let horizon = MultiIndex::new(horizon)?;
        let n = horizon.volume();
        if n > max_cells() as u128 {
            return Err(Error::ResourceExhausted { cells: n, budget: max_cells() });
        }
        let mut cells = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let mut b = [0u8; 16];
            r.read_exact(&mut b)?;
            let re = f64::from_le_bytes(b[..8].try_into().unwrap());
            let im = f64::from_le_bytes(b[8..].try_into().unwrap());
            cells.push(Complex64::new(re, im));
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Format("trailing bytes after cell data".into()));
        }
        Ok(Self { dense: Dense::filled(&horizon, usize::MAX, cells)? })
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// A raw multiple sequence `s_l` over `[0, horizon]` (no accumulation).
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceTable {
    dense: Dense,
}

impl SequenceTable {
    pub fn from_fn<F>(horizon: &MultiIndex, f: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> Complex64,
    {
        let strides = Dense::layout(horizon, max_cells())?;
        let bx = LatticeBox::anchored(horizon.clone());
        let cells = crate::lattice::iterate_box(&bx).map(|j| f(j.coords())).collect();
        Ok(Self { dense: Dense { horizon: horizon.clone(), strides, cells } })
    }

    pub fn horizon(&self) -> &MultiIndex {
        &self.dense.horizon
    }

    pub fn value(&self, l: &[usize]) -> Result<Complex64> {
        self.dense.check_in_range(l)?;
        Ok(self.dense.cells[self.dense.offset(l)])
    }

    /// `Σ_δ (-1)^{|δ|} s(corner_δ)` over `bx`, with below-zero corners taken as 0.
    pub fn corner_sum(&self, bx: &LatticeBox) -> Result<Complex64> {
        self.dense.corner_sum(bx)
    }
}

/// The smallest `κ₂` such that every box inside the horizon with `max k > κ₂`
/// has alternating corner sum below `eps` in modulus. Exhaustive over all boxes.
/// `None` when violations persist up to the largest horizon coordinate.
pub fn sequence_regular_check(table: &SequenceTable, eps: f64) -> Option<usize> {
    let top = table.horizon().max_coord();
    let (profile, _) = table.dense.scan(u128::MAX);
    match profile.deepest_at_least(eps) {
        None => Some(0),
        Some(d) if d < top => Some(d),
        Some(_) => None,
    }
}

/// Box enumeration shared by the sequence check and the diagnostics.
pub(crate) mod scan {
    use num_complex::Complex64;

    /// Per-depth maxima of a box functional, where depth is `max k`.
    #[derive(Clone, Debug)]
    pub struct DepthProfile {
        pub best: Vec<f64>,
        pub witness: Vec<Option<(Vec<usize>, Vec<usize>)>>,
        pub boxes: u128,
    }

    impl DepthProfile {
        pub fn new(max_depth: usize) -> Self {
            Self { best: vec![0.0; max_depth + 1], witness: vec![None; max_depth + 1], boxes: 0 }
        }

        #[inline]
        pub fn record(&mut self, depth: usize, value: f64, lo: &[usize], hi: &[usize]) {
            self.boxes += 1;
            // NaN counts as a violation of any threshold.
            if value > self.best[depth] || (value.is_nan() && !self.best[depth].is_nan()) {
                self.best[depth] = value;
                self.witness[depth] = Some((lo.to_vec(), hi.to_vec()));
            }
        }

        /// Deepest depth whose maximum reaches `eps`.
        pub fn deepest_at_least(&self, eps: f64) -> Option<usize> {
            (0..self.best.len()).rev().find(|&d| !(self.best[d] < eps))
        }

        /// Largest value over depths strictly greater than `t`.
        pub fn sup_beyond(&self, t: Option<usize>) -> f64 {
            let start = t.map_or(0, |t| t + 1);
            self.best.iter().skip(start).fold(0.0, |a: f64, &b| if b.is_nan() { f64::NAN } else { a.max(b) })
        }
    }

    /// All pairs `k <= l` in `0..=h`.
    pub fn all_pairs(h: usize) -> Vec<(usize, usize)> {
        (0..=h).flat_map(|k| (k..=h).map(move |l| (k, l))).collect()
    }

    /// Pairs with length `l - k` in `{0, 1, 2, 4, ...}` plus the pair reaching `h`.
    pub fn ladder_pairs(h: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for k in 0..=h {
            let mut len = 0usize;
            loop {
                if k + len >= h {
                    break;
                }
                out.push((k, k + len));
                len = if len == 0 { 1 } else { len * 2 };
            }
            out.push((k, h));
        }
        out
    }

    /// Anchored pairs `(0, l)` with `l` in `{0, 1, 2, 4, ...}` plus `(0, h)`.
    pub fn anchored_ladder(h: usize) -> Vec<(usize, usize)> {
        let mut out = vec![(0, 0)];
        let mut l = 1usize;
        while l < h {
            out.push((0, l));
            l *= 2;
        }
        if h > 0 {
            out.push((0, h));
        }
        out
    }

    pub fn count(per_axis: &[Vec<(usize, usize)>]) -> u128 {
        per_axis.iter().map(|v| v.len() as u128).product()
    }

    /// Groups of per-axis pair lists whose products are the boxes to visit:
    /// every box when there are at most `budget`, otherwise the documented
    /// deterministic sample (ladder pairs on every axis, plus slabs taking all
    /// pairs on one axis and anchored ladder pairs on the others). The flag tells
    /// whether the scan is exhaustive.
    pub fn plan(horizon: &[usize], budget: u128) -> (Vec<Vec<Vec<(usize, usize)>>>, bool) {
        let full: Vec<_> = horizon.iter().map(|&h| all_pairs(h)).collect();
        if count(&full) <= budget {
            return (vec![full], true);
        }
        let mut groups = vec![horizon.iter().map(|&h| ladder_pairs(h)).collect::<Vec<_>>()];
        for axis in 0..horizon.len() {
            groups.push(
                horizon
                    .iter()
                    .enumerate()
                    .map(|(p, &h)| if p == axis { all_pairs(h) } else { anchored_ladder(h) })
                    .collect(),
            );
        }
        (groups, false)
    }

    /// One axis entry: `(k, l, offset of l, offset of k - 1 if k > 0)`.
    type AxisEntry = (usize, usize, usize, Option<usize>);

    struct Walk<'a> {
        cells: &'a [Complex64],
        axes: Vec<Vec<AxisEntry>>,
        /// Signed corner offsets accumulated over the outer axes, one buffer per level.
        partial: Vec<Vec<(usize, bool)>>,
        lo: Vec<usize>,
        hi: Vec<usize>,
    }

    impl Walk<'_> {
        fn run(&mut self, axis: usize, depth: usize, profile: &mut DepthProfile) {
            let m = self.axes.len();
            for e in 0..self.axes[axis].len() {
                let (k, l, off_hi, off_lo) = self.axes[axis][e];
                self.lo[axis] = k;
                self.hi[axis] = l;
                let (before, after) = self.partial.split_at_mut(axis + 1);
                let src = &before[axis];
                let dst = &mut after[0];
                dst.clear();
                for &(off, neg) in src.iter() {
                    dst.push((off + off_hi, neg));
                    if let Some(o) = off_lo {
                        dst.push((off + o, !neg));
                    }
                }
                let d = depth.max(k);
                if axis + 1 == m {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &(off, neg) in dst.iter() {
                        if neg {
                            acc -= self.cells[off];
                        } else {
                            acc += self.cells[off];
                        }
                    }
                    profile.record(d, acc.norm(), &self.lo, &self.hi);
                } else {
                    self.run(axis + 1, d, profile);
                }
            }
        }
    }

    /// Visits every box of the product of `per_axis`, first axis slowest, and
    /// records the modulus of its alternating corner sum over `cells`.
    pub(crate) fn corner_walk(
        cells: &[Complex64],
        strides: &[usize],
        per_axis: &[Vec<(usize, usize)>],
        profile: &mut DepthProfile,
    ) {
        let m = per_axis.len();
        if per_axis.iter().any(|v| v.is_empty()) {
            return;
        }
        let axes = per_axis
            .iter()
            .zip(strides)
            .map(|(pairs, &s)| pairs.iter().map(|&(k, l)| (k, l, l * s, k.checked_sub(1).map(|x| x * s))).collect())
            .collect();
        let mut partial = vec![Vec::with_capacity(1 << m); m + 1];
        partial[0].push((0usize, false));
        let mut walk = Walk { cells, axes, partial, lo: vec![0; m], hi: vec![0; m] };
        walk.run(0, 0, profile);
    }
}

impl Dense {
    fn scan(&self, budget: u128) -> (scan::DepthProfile, bool) {
        let (groups, exhaustive) = scan::plan(self.horizon.coords(), budget);
        let mut profile = scan::DepthProfile::new(self.horizon.max_coord());
        for g in &groups {
            scan::corner_walk(&self.cells, &self.strides, g, &mut profile);
        }
        (profile, exhaustive)
    }
}

impl PartialSumTable {
    /// Depth profile of `|subrect_sum|` over the planned boxes.
    pub(crate) fn scan_boxes(&self, budget: u128) -> (scan::DepthProfile, bool) {
        self.dense.scan(budget)
    }
}
