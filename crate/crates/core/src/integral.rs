//! Rectangular and subrectangular integrals over `ℝ^m₊` from a cumulative table
//! of cell integrals, plus convergence diagnostics and the symmetric fold.
//!
//! A box with real bounds splits, per axis, into at most three pieces: a partial
//! cell at each end and a run of whole cells. The all-whole combination is a
//! corner query; every other combination is integrated cell by cell with the
//! same rule mapped to the partial bounds.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::compensated::ComplexSum;
use crate::diagnostics::{self, Mode, Verdict};
use crate::error::{Error, Result};
use crate::lattice::{iterate_box, LatticeBox, MultiIndex};
use crate::prefix_tables::PartialSumTable;
use crate::quadrature::{IntegrandSource, PanelGrid};

/// Relative tolerance for snapping a bound onto a grid line.
const SNAP: f64 = 1e-9;
/// A corner query whose result is smaller than this fraction of the summed corner
/// moduli is recomputed by adding the cached cell integrals directly.
const CANCELLATION: f64 = 1e-4;

/// The box `[u, v]` in `ℝ^m₊`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl RealBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        crate::lattice::check_dim(lo.len())?;
        let ok = lo.iter().zip(&hi).all(|(&u, &v)| u.is_finite() && v.is_finite() && 0.0 <= u && u <= v);
        if !ok {
            return Err(Error::InvalidBox { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// `[0, v]`.
    pub fn anchored(v: Vec<f64>) -> Result<Self> {
        Self::new(vec![0.0; v.len()], v)
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

/// An additive function of boxes: integrals, and the iterated limits built on them.
pub trait BoxFunction: Send + Sync {
    fn dim(&self) -> usize;
    /// Upper end of the domain per axis.
    fn extent(&self) -> Vec<f64>;
    /// Grid spacing of the underlying discretization.
    fn step(&self) -> f64;
    fn eval_box(&self, lo: &[f64], hi: &[f64]) -> Result<Complex64>;
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Piece {
    /// Cells `k..=l`.
    Whole(usize, usize),
    /// Part `[a, b]` of one cell.
    Part(usize, f64, f64),
}

/// Integral table of an integrand over `[0, extent]`.
#[derive(Clone, Debug)]
pub struct IntegralTable {
    grid: PanelGrid,
    prefix: PartialSumTable,
}

impl IntegralTable {
    /// Grids `[0, extent_p]` into cells of width `delta` (rounding the cell count up)
    /// and accumulates the cell integrals.
    pub fn build(src: &IntegrandSource, delta: f64, q: usize, extent: &[f64]) -> Result<Self> {
        if extent.len() != src.dim() {
            return Err(Error::DimensionMismatch { expected: src.dim(), got: extent.len() });
        }
        if !(delta > 0.0) {
            return Err(Error::Config(format!("cell width must be positive, got {delta}")));
        }
        let last: Vec<usize> = extent
            .iter()
            .map(|&e| {
                let n = snap(e / delta).ceil().max(1.0);
                n as usize - 1
            })
            .collect();
        let last = MultiIndex::new(last)?;
        let grid = PanelGrid::new(src, delta, q, &last)?;
        let cached = grid.cached();
        let mut pos = 0usize;
        let prefix = PartialSumTable::try_from_terms(&last, crate::prefix_tables::max_cells(), |_| {
            let v = cached[pos];
            pos += 1;
            Ok(v)
        })?;
        Ok(Self { grid, prefix })
    }

    pub fn grid(&self) -> &PanelGrid {
        &self.grid
    }

    pub fn prefix(&self) -> &PartialSumTable {
        &self.prefix
    }

    pub fn src(&self) -> &IntegrandSource {
        self.grid.src()
    }

    pub fn delta(&self) -> f64 {
        self.grid.delta()
    }

    pub fn dim(&self) -> usize {
        self.prefix.dim()
    }

    pub fn extent(&self) -> Vec<f64> {
        self.grid.extent()
    }

    /// Cells per axis.
    pub fn cells(&self) -> Vec<usize> {
        self.prefix.horizon().coords().iter().map(|&h| h + 1).collect()
    }

    /// `I(v) = I(0, v_1; ...; 0, v_m)`.
    pub fn rect_integral(&self, v: &[f64]) -> Result<Complex64> {
        self.subrect_integral(&RealBox::anchored(v.to_vec())?)
    }

    pub fn subrect_integral(&self, bx: &RealBox) -> Result<Complex64> {
        self.integrate(bx.lo(), bx.hi())
    }

    fn pieces(&self, axis: usize, u: f64, v: f64) -> Result<Vec<Piece>> {
        let d = self.delta();
        let n = self.prefix.horizon()[axis] + 1;
        let a = snap(u / d);
        let b = snap(v / d);
        if b > n as f64 {
            return Err(Error::OutOfRange { query: vec![v], horizon: vec![n as f64 * d] });
        }
        if a >= b {
            return Ok(Vec::new());
        }
        let (fa, ca) = (a.floor() as usize, a.ceil() as usize);
        let (fb, cb) = (b.floor() as usize, b.ceil() as usize);
        let mut out = Vec::with_capacity(3);
        if ca > fb {
            out.push(Piece::Part(fa, u, v));
            return Ok(out);
        }
        if fa != ca {
            out.push(Piece::Part(fa, u, ca as f64 * d));
        }
        if ca < fb {
            out.push(Piece::Whole(ca, fb - 1));
        }
        if fb != cb {
            out.push(Piece::Part(fb, fb as f64 * d, v));
        }
        Ok(out)
    }

    fn integrate(&self, lo: &[f64], hi: &[f64]) -> Result<Complex64> {
        let m = self.dim();
        if lo.len() != m || hi.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: lo.len() });
        }
        let mut per_axis = Vec::with_capacity(m);
        for p in 0..m {
            let pieces = self.pieces(p, lo[p], hi[p])?;
            if pieces.is_empty() {
                return Ok(Complex64::new(0.0, 0.0));
            }
            per_axis.push(pieces);
        }
        let mut acc = ComplexSum::new();
        let mut pos = vec![0usize; m];
        loop {
            let combo: Vec<Piece> = (0..m).map(|p| per_axis[p][pos[p]]).collect();
            acc.add(self.combo_integral(&combo)?);
            let mut p = m;
            loop {
                if p == 0 {
                    return Ok(acc.value());
                }
                p -= 1;
                pos[p] += 1;
                if pos[p] < per_axis[p].len() {
                    break;
                }
                pos[p] = 0;
            }
        }
    }

    fn direct_cell_sum(&self, lo: &[usize], hi: &[usize]) -> Complex64 {
        let bx = LatticeBox::from_coords(lo.to_vec(), hi.to_vec()).expect("cells lie inside the grid");
        iterate_box(&bx).map(|c| self.grid.cell(c.coords())).collect::<ComplexSum>().value()
    }

    fn combo_integral(&self, combo: &[Piece]) -> Result<Complex64> {
        let d = self.delta();
        if combo.iter().all(|c| matches!(c, Piece::Whole(..))) {
            let (lo, hi): (Vec<usize>, Vec<usize>) = combo
                .iter()
                .map(|c| match *c {
                    Piece::Whole(k, l) => (k, l),
                    Piece::Part(..) => unreachable!(),
                })
                .unzip();
            let (v, scale) = self.prefix.subrect_scaled(&lo, &hi);
            if v.norm() >= CANCELLATION * scale {
                return Ok(v);
            }
            return Ok(self.direct_cell_sum(&lo, &hi));
        }
        let rule = self.grid.rule();
        if let Some(fs) = self.src().factors() {
            let mut prod = Complex64::new(1.0, 0.0);
            for (p, c) in combo.iter().enumerate() {
                let g = &fs[p];
                let v = match *c {
                    Piece::Part(_, a, b) => rule.integrate_1d(|x| g(x), a, b)?,
                    Piece::Whole(k, l) => {
                        let mut s = ComplexSum::new();
                        for i in k..=l {
                            s.add(rule.integrate_1d(|x| g(x), i as f64 * d, (i + 1) as f64 * d)?);
                        }
                        s.value()
                    }
                };
                prod *= v;
            }
            return Ok(prod);
        }
        // Generic integrand: one tensor rule per cell of the combination.
        let ranges: Vec<(usize, usize)> = combo
            .iter()
            .map(|c| match *c {
                Piece::Whole(k, l) => (k, l),
                Piece::Part(i, ..) => (i, i),
            })
            .collect();
        let m = combo.len();
        let mut cell: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        let mut lo = vec![0.0; m];
        let mut hi = vec![0.0; m];
        let mut acc = ComplexSum::new();
        loop {
            for p in 0..m {
                match combo[p] {
                    Piece::Part(_, a, b) => {
                        lo[p] = a;
                        hi[p] = b;
                    }
                    Piece::Whole(..) => {
                        lo[p] = cell[p] as f64 * d;
                        hi[p] = (cell[p] + 1) as f64 * d;
                    }
                }
            }
            acc.add(self.grid.partial(&lo, &hi)?);
            let mut p = m;
            loop {
                if p == 0 {
                    return Ok(acc.value());
                }
                p -= 1;
                if cell[p] < ranges[p].1 {
                    cell[p] += 1;
                    break;
                }
                cell[p] = ranges[p].0;
            }
        }
    }
}

impl BoxFunction for IntegralTable {
    fn dim(&self) -> usize {
        IntegralTable::dim(self)
    }

    fn extent(&self) -> Vec<f64> {
        IntegralTable::extent(self)
    }

    fn step(&self) -> f64 {
        self.delta()
    }

    fn eval_box(&self, lo: &[f64], hi: &[f64]) -> Result<Complex64> {
        if lo.iter().zip(hi).any(|(u, v)| !(u <= v)) || lo.iter().any(|&u| u < 0.0) {
            return Err(Error::InvalidBox { lo: lo.to_vec(), hi: hi.to_vec() });
        }
        self.integrate(lo, hi)
    }
}

fn snap(r: f64) -> f64 {
    let n = r.round();
    if (r - n).abs() <= SNAP * r.abs().max(1.0) {
        n
    } else {
        r
    }
}

/// Points at which boxes are probed in the regular diagnosis of an integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeLattice {
    /// Cell corners `iΔ`.
    Corners,
    /// Cell corners and midpoints `iΔ/2`, scanned on a table rebuilt at `Δ/2`.
    CornersAndMidpoints,
}

/// Pringsheim diagnosis of `I(v)` at the cell corners `v = (l+1)Δ`. The threshold
/// `ρ₁` is reported in `t` units.
pub fn integral_pringsheim_diagnose(table: &IntegralTable, eps: f64) -> Result<Verdict> {
    let v = diagnostics::pringsheim_diagnose(table.prefix(), eps)?;
    let d = table.delta();
    let mut v = v.with_spacing(d);
    v.threshold = v.witness.map(|w| (w + 1) as f64 * d);
    Ok(v)
}

/// Regular diagnosis over boxes with corners on the probe lattice. The threshold
/// `ρ₂` is reported in `t` units: boxes with `max u > ρ₂` stay below `eps`.
pub fn integral_regular_diagnose(table: &IntegralTable, eps: f64, budget: u128, lattice: ProbeLattice) -> Result<Verdict> {
    regular_like(Mode::Regular, table, eps, budget, lattice)
}

/// Regular diagnosis of `|f|`, the finite proxy for absolute integrability.
pub fn integral_absolute_diagnose(table: &IntegralTable, eps: f64, budget: u128, lattice: ProbeLattice) -> Result<Verdict> {
    let abs = IntegralTable::build(&table.src().modulus(), table.delta(), table.grid().order(), &table.extent())?;
    regular_like(Mode::Absolute, &abs, eps, budget, lattice)
}

fn regular_like(mode: Mode, table: &IntegralTable, eps: f64, budget: u128, lattice: ProbeLattice) -> Result<Verdict> {
    diagnostics::check_eps(eps)?;
    let (t, d) = match lattice {
        ProbeLattice::Corners => (None, table.delta()),
        ProbeLattice::CornersAndMidpoints => {
            let half = table.delta() / 2.0;
            (Some(IntegralTable::build(table.src(), half, table.grid().order(), &table.extent())?), half)
        }
    };
    let t = t.as_ref().unwrap_or(table);
    let v = diagnostics::regular_scan(mode, t.prefix(), eps, budget);
    Ok(v.with_spacing(d))
}

/// `|I(box) - I(left) - I(right)|` for a split of `box` at `point` on `axis`.
pub fn additivity_check(table: &IntegralTable, bx: &RealBox, axis: usize, point: f64) -> Result<f64> {
    if axis >= bx.dim() || !(bx.lo()[axis] < point && point < bx.hi()[axis]) {
        return Err(Error::Precondition(format!("split point {point} is not inside the box on axis {axis}")));
    }
    let whole = table.subrect_integral(bx)?;
    let mut left_hi = bx.hi().to_vec();
    left_hi[axis] = point;
    let mut right_lo = bx.lo().to_vec();
    right_lo[axis] = point;
    let left = table.subrect_integral(&RealBox::new(bx.lo().to_vec(), left_hi)?)?;
    let right = table.subrect_integral(&RealBox::new(right_lo, bx.hi().to_vec())?)?;
    Ok((whole - left - right).norm())
}

/// Folds a two-sided integrand onto `ℝ^m₊` by `t_p ↦ f(.., t_p, ..) + f(.., -t_p, ..)`
/// one axis at a time, so `I_folded(v)` is the symmetric integral over `[-v, v]`.
pub fn symmetric_fold_integrand(src: &IntegrandSource) -> IntegrandSource {
    let label = format!("fold({})", src.label());
    let folded = if let Some(fs) = src.factors() {
        let gs = fs
            .iter()
            .map(|g| {
                let g = g.clone();
                Arc::new(move |x: f64| g(x) + g(-x)) as Arc<dyn Fn(f64) -> Complex64 + Send + Sync>
            })
            .collect();
        IntegrandSource::product(label, src.smoothness(), gs).expect("same dimension")
    } else {
        let s = src.clone();
        IntegrandSource::new(src.dim(), label, src.smoothness(), move |t| {
            let mut buf = t.to_vec();
            fold_point(&s, t, 0, &mut buf)
        })
        .expect("same dimension")
    };
    match src.ground_truth() {
        Some(g) => folded.with_ground_truth(g),
        None => folded,
    }
}

fn fold_point(src: &IntegrandSource, t: &[f64], axis: usize, buf: &mut Vec<f64>) -> Complex64 {
    if axis == t.len() {
        return src.eval(buf);
    }
    buf[axis] = t[axis];
    let plus = fold_point(src, t, axis + 1, buf);
    buf[axis] = -t[axis];
    let minus = fold_point(src, t, axis + 1, buf);
    plus + minus
}

/// The folded integrand and its table over `[0, extent]`. Symmetric integrals
/// over `[-v, v]` are `rect_integral(v)`, and annular integrals
/// `∫_{u_p < |t_p| < v_p}` are `subrect_integral([u, v])`.
pub fn symmetric_integral_adapter(
    src: &IntegrandSource,
    delta: f64,
    q: usize,
    extent: &[f64],
) -> Result<(IntegrandSource, IntegralTable)> {
    let folded = symmetric_fold_integrand(src);
    let table = IntegralTable::build(&folded, delta, q, extent)?;
    Ok((folded, table))
}
