//! Term sources for multiple series on `ℕ^m` and two-sided series on `ℤ^m`,
//! subseries extraction by pinning indices, and the fold that turns symmetric
//! two-sided partial sums into ordinary rectangular ones.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::compensated::ComplexSum;
use crate::error::{Error, Result};
use crate::lattice::{check_dim, LatticeBox, MultiIndex};
use crate::prefix_tables::PartialSumTable;

type TermFn = dyn Fn(&[usize]) -> Complex64 + Send + Sync;
type SignedFn = dyn Fn(&[i64]) -> Complex64 + Send + Sync;

/// A deterministic term oracle `c: ℕ^m → ℂ`.
#[derive(Clone)]
pub struct TermSource {
    dim: usize,
    label: String,
    ground_truth: Option<Complex64>,
    alternating: Vec<bool>,
    eval: Arc<TermFn>,
}

impl TermSource {
    pub fn new<F>(dim: usize, label: impl Into<String>, eval: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> Complex64 + Send + Sync + 'static,
    {
        check_dim(dim)?;
        Ok(Self {
            dim,
            label: label.into(),
            ground_truth: None,
            alternating: vec![false; dim],
            eval: Arc::new(eval),
        })
    }

    /// Real-valued convenience constructor.
    pub fn real<F>(dim: usize, label: impl Into<String>, eval: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> f64 + Send + Sync + 'static,
    {
        Self::new(dim, label, move |j| Complex64::new(eval(j), 0.0))
    }

    pub fn with_ground_truth(mut self, s: Complex64) -> Self {
        self.ground_truth = Some(s);
        self
    }

    /// Marks every axis as alternating: along each axis, for any fixed values of
    /// the other indices, terms alternate in sign and decrease in modulus.
    pub fn with_alternating_axes(mut self) -> Self {
        self.alternating = vec![true; self.dim];
        self
    }

    pub fn with_alternating(mut self, axes: Vec<bool>) -> Result<Self> {
        if axes.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: axes.len() });
        }
        self.alternating = axes;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn ground_truth(&self) -> Option<Complex64> {
        self.ground_truth
    }

    pub fn alternating(&self) -> &[bool] {
        &self.alternating
    }

    #[inline]
    pub fn eval(&self, j: &[usize]) -> Complex64 {
        (self.eval)(j)
    }

    /// The source `|c|`.
    pub fn modulus(&self) -> TermSource {
        let inner = self.eval.clone();
        TermSource {
            dim: self.dim,
            label: format!("|{}|", self.label),
            ground_truth: None,
            alternating: vec![false; self.dim],
            eval: Arc::new(move |j| Complex64::new(inner(j).norm(), 0.0)),
        }
    }
}

impl fmt::Debug for TermSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TermSource")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("ground_truth", &self.ground_truth)
            .finish_non_exhaustive()
    }
}

/// A deterministic term oracle on `ℤ^m`.
#[derive(Clone)]
pub struct SignedTermSource {
    dim: usize,
    label: String,
    ground_truth: Option<Complex64>,
    eval: Arc<SignedFn>,
}

impl SignedTermSource {
    pub fn new<F>(dim: usize, label: impl Into<String>, eval: F) -> Result<Self>
    where
        F: Fn(&[i64]) -> Complex64 + Send + Sync + 'static,
    {
        check_dim(dim)?;
        Ok(Self { dim, label: label.into(), ground_truth: None, eval: Arc::new(eval) })
    }

    pub fn with_ground_truth(mut self, s: Complex64) -> Self {
        self.ground_truth = Some(s);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn ground_truth(&self) -> Option<Complex64> {
        self.ground_truth
    }

    #[inline]
    pub fn eval(&self, j: &[i64]) -> Complex64 {
        (self.eval)(j)
    }
}

impl fmt::Debug for SignedTermSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SignedTermSource")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

/// Builds the cumulative table of `src` over `[0, horizon]`.
pub fn build_table(src: &TermSource, horizon: &MultiIndex) -> Result<PartialSumTable> {
    if horizon.dim() != src.dim() {
        return Err(Error::DimensionMismatch { expected: src.dim(), got: horizon.dim() });
    }
    PartialSumTable::from_terms(horizon, |j| src.eval(j))
}

/// Pins the listed `(axis, value)` pairs (axes numbered from 0) and returns the
/// series in the remaining axes, which keep their relative order.
pub fn subseries(src: &TermSource, fixed: &[(usize, usize)]) -> Result<TermSource> {
    let m = src.dim();
    let mut pinned: Vec<Option<usize>> = vec![None; m];
    for &(axis, value) in fixed {
        if axis >= m {
            return Err(Error::Config(format!("axis {axis} out of range for dimension {m}")));
        }
        if pinned[axis].replace(value).is_some() {
            return Err(Error::Config(format!("axis {axis} pinned twice")));
        }
    }
    if fixed.is_empty() {
        return Err(Error::Config("subseries needs at least one pinned axis".into()));
    }
    if fixed.len() == m {
        return Err(Error::Config("pinning every axis leaves a single term, not a series".into()));
    }
    let free: Vec<usize> = (0..m).filter(|&p| pinned[p].is_none()).collect();
    let alternating = free.iter().map(|&p| src.alternating[p]).collect();
    let mut sorted = fixed.to_vec();
    sorted.sort_unstable();
    let label = format!(
        "{}[{}]",
        src.label,
        sorted.iter().map(|(a, v)| format!("j{}={}", a + 1, v)).collect::<Vec<_>>().join(",")
    );
    let inner = src.eval.clone();
    let free_axes = free.clone();
    Ok(TermSource {
        dim: free.len(),
        label,
        ground_truth: None,
        alternating,
        eval: Arc::new(move |j: &[usize]| {
            let mut full: Vec<usize> = pinned.iter().map(|v| v.unwrap_or(0)).collect();
            for (k, &p) in free_axes.iter().enumerate() {
                full[p] = j[k];
            }
            inner(&full)
        }),
    })
}

/// Sum of `src` over all sign flips of the nonzero coordinates of `j`, folded
/// one axis at a time (axis 0 outermost). A source odd in some axis folds to an
/// exact zero because each pair is `x + (-x)`.
fn fold_at(src: &SignedTermSource, j: &[usize], axis: usize, buf: &mut Vec<i64>) -> Complex64 {
    if axis == j.len() {
        return src.eval(buf);
    }
    buf[axis] = j[axis] as i64;
    let plus = fold_at(src, j, axis + 1, buf);
    if j[axis] == 0 {
        return plus;
    }
    buf[axis] = -(j[axis] as i64);
    let minus = fold_at(src, j, axis + 1, buf);
    plus + minus
}

/// The `ℕ^m` source whose rectangular partial sum at `l` is the symmetric sum of
/// `src` over `|j_p| <= l_p`.
pub fn symmetric_fold(src: &SignedTermSource) -> TermSource {
    let s = src.clone();
    TermSource {
        dim: src.dim(),
        label: format!("fold({})", src.label()),
        ground_truth: src.ground_truth(),
        alternating: vec![false; src.dim()],
        eval: Arc::new(move |j: &[usize]| {
            let mut buf = vec![0i64; j.len()];
            fold_at(&s, j, 0, &mut buf)
        }),
    }
}

/// Sum of `src` over the annular block `{k_p <= |j_p| <= l_p}` by corner query on
/// a folded table sized to the block.
pub fn symmetric_block_sum(src: &SignedTermSource, bx: &LatticeBox) -> Result<Complex64> {
    if bx.dim() != src.dim() {
        return Err(Error::DimensionMismatch { expected: src.dim(), got: bx.dim() });
    }
    let table = build_table(&symmetric_fold(src), bx.hi())?;
    table.subrect_sum(bx)
}

/// The same block sum by direct enumeration of the signed indices.
pub fn symmetric_block_sum_direct(src: &SignedTermSource, bx: &LatticeBox) -> Result<Complex64> {
    if bx.dim() != src.dim() {
        return Err(Error::DimensionMismatch { expected: src.dim(), got: bx.dim() });
    }
    let m = bx.dim();
    let ranges: Vec<Vec<i64>> = (0..m)
        .map(|p| {
            let (k, l) = (bx.lo()[p] as i64, bx.hi()[p] as i64);
            (-l..=l).filter(|j| j.abs() >= k).collect()
        })
        .collect();
    let mut acc = ComplexSum::new();
    let mut idx = vec![0usize; m];
    let mut j = vec![0i64; m];
    loop {
        for p in 0..m {
            j[p] = ranges[p][idx[p]];
        }
        acc.add(src.eval(&j));
        let mut p = m;
        loop {
            if p == 0 {
                return Ok(acc.value());
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < ranges[p].len() {
                break;
            }
            idx[p] = 0;
        }
    }
}
