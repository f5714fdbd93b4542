//! Fixed-order tensor Gauss–Legendre panels over a uniform grid of cells
//! `[i_1Δ, (i_1+1)Δ] × ... × [i_mΔ, (i_m+1)Δ]` in `ℝ^m₊`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::compensated::ComplexSum;
use crate::error::{Error, Result};
use crate::lattice::{check_dim, MultiIndex};

/// Default nodes per axis per cell.
pub const DEFAULT_ORDER: usize = 8;
/// Default cell width.
pub const DEFAULT_DELTA: f64 = 0.5;

type PointFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;
type AxisFn = dyn Fn(f64) -> Complex64 + Send + Sync;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Smoothness {
    Smooth,
    /// Oscillates with the given period; cells must be at most a quarter period wide.
    Oscillatory { period: f64 },
    /// Smooth on each grid cell when breakpoints fall on cell boundaries.
    Piecewise,
}

/// A deterministic integrand `f: ℝ^m₊ → ℂ`.
#[derive(Clone)]
pub struct IntegrandSource {
    dim: usize,
    label: String,
    ground_truth: Option<Complex64>,
    smoothness: Smoothness,
    eval: Arc<PointFn>,
    factors: Option<Vec<Arc<AxisFn>>>,
}

impl IntegrandSource {
    pub fn new<F>(dim: usize, label: impl Into<String>, smoothness: Smoothness, eval: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        check_dim(dim)?;
        Ok(Self { dim, label: label.into(), ground_truth: None, smoothness, eval: Arc::new(eval), factors: None })
    }

    /// `f(t) = Π_p g_p(t_p)`. Cell rules then factor into 1-D rules, which gives the
    /// same tensor rule with `m·q` instead of `q^m` evaluations.
    pub fn product(label: impl Into<String>, smoothness: Smoothness, factors: Vec<Arc<AxisFn>>) -> Result<Self> {
        check_dim(factors.len())?;
        let fs = factors.clone();
        let eval = move |t: &[f64]| fs.iter().zip(t).map(|(g, &x)| g(x)).product::<Complex64>();
        Ok(Self {
            dim: factors.len(),
            label: label.into(),
            ground_truth: None,
            smoothness,
            eval: Arc::new(eval),
            factors: Some(factors),
        })
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

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn factors(&self) -> Option<&[Arc<AxisFn>]> {
        self.factors.as_deref()
    }

    #[inline]
    pub fn eval(&self, t: &[f64]) -> Complex64 {
        (self.eval)(t)
    }

    /// `|f|`, keeping the product structure.
    pub fn modulus(&self) -> IntegrandSource {
        let inner = self.eval.clone();
        IntegrandSource {
            dim: self.dim,
            label: format!("|{}|", self.label),
            ground_truth: None,
            smoothness: self.smoothness,
            eval: Arc::new(move |t| Complex64::new(inner(t).norm(), 0.0)),
            factors: self.factors.as_ref().map(|fs| {
                fs.iter()
                    .map(|g| {
                        let g = g.clone();
                        Arc::new(move |x: f64| Complex64::new(g(x).norm(), 0.0)) as Arc<AxisFn>
                    })
                    .collect()
            }),
        }
    }

    /// The integrand in the listed axes with the others held at fixed values.
    pub fn restrict(&self, fixed: &[(usize, f64)]) -> Result<IntegrandSource> {
        let m = self.dim;
        let mut pinned: Vec<Option<f64>> = vec![None; m];
        for &(axis, t) in fixed {
            if axis >= m || pinned[axis].replace(t).is_some() {
                return Err(Error::Config(format!("bad restriction axis {axis}")));
            }
        }
        let free: Vec<usize> = (0..m).filter(|&p| pinned[p].is_none()).collect();
        if free.is_empty() {
            return Err(Error::Config("restriction leaves no free axis".into()));
        }
        let inner = self.eval.clone();
        let free_axes = free.clone();
        let base: Vec<f64> = pinned.iter().map(|v| v.unwrap_or(0.0)).collect();
        let factors = self.factors.as_ref().map(|fs| {
            let scale: Complex64 = fixed.iter().map(|&(p, t)| fs[p](t)).product();
            free.iter()
                .enumerate()
                .map(|(k, &p)| {
                    let g = fs[p].clone();
                    if k == 0 {
                        Arc::new(move |x: f64| scale * g(x)) as Arc<AxisFn>
                    } else {
                        g
                    }
                })
                .collect()
        });
        Ok(IntegrandSource {
            dim: free.len(),
            label: format!("{}|restricted", self.label),
            ground_truth: None,
            smoothness: self.smoothness,
            eval: Arc::new(move |t: &[f64]| {
                let mut full = base.clone();
                for (k, &p) in free_axes.iter().enumerate() {
                    full[p] = t[k];
                }
                inner(&full)
            }),
            factors,
        })
    }
}

impl fmt::Debug for IntegrandSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegrandSource")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("smoothness", &self.smoothness)
            .field("product", &self.factors.is_some())
            .finish_non_exhaustive()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_q`.
/// Nodes ascend.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(q >= 1, "quadrature order must be at least 1");
    // (P_q(x), P_q'(x)) by the three-term recurrence.
    let legendre = |x: f64| {
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=q {
            let k = k as f64;
            let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        (p1, q as f64 * (x * p1 - p0) / (x * x - 1.0))
    };
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    (nodes, weights)
}

/// A Gauss–Legendre rule of fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    pub fn new(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::Config("quadrature order must be at least 1".into()));
        }
        let (nodes, weights) = gauss_legendre(q);
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }

    /// `∫_a^b g` for a scalar function.
    pub fn integrate_1d<G: Fn(f64) -> Complex64>(&self, g: G, a: f64, b: f64) -> Result<Complex64> {
        let mut acc = ComplexSum::new();
        for (x, w) in self.mapped(a, b) {
            let v = g(x);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite { point: vec![x] });
            }
            acc.add(v * w);
        }
        Ok(acc.value())
    }

    /// The tensor rule over `[lo, hi]`.
    pub fn integrate_box(&self, src: &IntegrandSource, lo: &[f64], hi: &[f64]) -> Result<Complex64> {
        if let Some(fs) = src.factors() {
            let mut prod = Complex64::new(1.0, 0.0);
            for (p, g) in fs.iter().enumerate() {
                prod *= self.integrate_1d(|x| g(x), lo[p], hi[p]).map_err(|e| lift_point(e, p, lo))?;
            }
            return Ok(prod);
        }
        let m = lo.len();
        let q = self.order();
        let mapped: Vec<Vec<(f64, f64)>> = (0..m).map(|p| self.mapped(lo[p], hi[p]).collect()).collect();
        let mut idx = vec![0usize; m];
        let mut t = vec![0.0; m];
        let mut acc = ComplexSum::new();
        loop {
            let mut w = 1.0;
            for p in 0..m {
                let (x, wp) = mapped[p][idx[p]];
                t[p] = x;
                w *= wp;
            }
            let v = src.eval(&t);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite { point: t });
            }
            acc.add(v * w);
            let mut p = m;
            loop {
                if p == 0 {
                    return Ok(acc.value());
                }
                p -= 1;
                idx[p] += 1;
                if idx[p] < q {
                    break;
                }
                idx[p] = 0;
            }
        }
    }
}

fn lift_point(e: Error, axis: usize, lo: &[f64]) -> Error {
    match e {
        Error::NonFinite { point } => {
            let mut full = lo.to_vec();
            full[axis] = point[0];
            Error::NonFinite { point: full }
        }
        other => other,
    }
}

fn check_delta(src: &IntegrandSource, delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Config(format!("cell width must be positive, got {delta}")));
    }
    if let Smoothness::Oscillatory { period } = src.smoothness() {
        if delta > period / 4.0 {
            return Err(Error::Config(format!(
                "cell width {delta} exceeds a quarter of the declared period {period}"
            )));
        }
    }
    Ok(())
}

/// `∫` of `src` over the grid cell `cell` of width `delta`.
pub fn cell_integral(src: &IntegrandSource, cell: &MultiIndex, delta: f64, q: usize) -> Result<Complex64> {
    check_delta(src, delta)?;
    let lo: Vec<f64> = cell.coords().iter().map(|&i| i as f64 * delta).collect();
    let hi: Vec<f64> = cell.coords().iter().map(|&i| (i + 1) as f64 * delta).collect();
    Rule::new(q)?.integrate_box(src, &lo, &hi)
}

/// `∫` of `src` over the sub-box `[lo, hi]` of `cell`, using the same rule mapped
/// to the sub-box.
pub fn partial_cell_integral(
    src: &IntegrandSource,
    cell: &MultiIndex,
    lo: &[f64],
    hi: &[f64],
    delta: f64,
    q: usize,
) -> Result<Complex64> {
    check_delta(src, delta)?;
    let slack = 1e-9 * delta;
    for (p, &i) in cell.coords().iter().enumerate() {
        let (a, b) = (i as f64 * delta, (i + 1) as f64 * delta);
        if lo[p] > hi[p] || lo[p] < a - slack || hi[p] > b + slack {
            return Err(Error::InvalidBox { lo: lo.to_vec(), hi: hi.to_vec() });
        }
    }
    Rule::new(q)?.integrate_box(src, lo, hi)
}

/// Cached cell integrals over `[0, (n_p) Δ]` per axis, where `n_p = cells_p + 1`.
#[derive(Clone, Debug)]
pub struct PanelGrid {
    src: IntegrandSource,
    delta: f64,
    rule: Rule,
    cells: MultiIndex,
    cache: Vec<Complex64>,
}

impl PanelGrid {
    /// Computes every cell integral with index `<= last_cell`.
    pub fn new(src: &IntegrandSource, delta: f64, q: usize, last_cell: &MultiIndex) -> Result<Self> {
        check_delta(src, delta)?;
        if last_cell.dim() != src.dim() {
            return Err(Error::DimensionMismatch { expected: src.dim(), got: last_cell.dim() });
        }
        let budget = crate::prefix_tables::max_cells();
        let volume = last_cell.volume();
        if volume > budget as u128 {
            return Err(Error::ResourceExhausted { cells: volume, budget });
        }
        let rule = Rule::new(q)?;
        let mut cache = Vec::with_capacity(volume as usize);
        let bx = crate::lattice::LatticeBox::anchored(last_cell.clone());
        let mut lo = vec![0.0; src.dim()];
        let mut hi = vec![0.0; src.dim()];
        for c in crate::lattice::iterate_box(&bx) {
            for (p, &i) in c.coords().iter().enumerate() {
                lo[p] = i as f64 * delta;
                hi[p] = (i + 1) as f64 * delta;
            }
            cache.push(rule.integrate_box(src, &lo, &hi)?);
        }
        Ok(Self { src: src.clone(), delta, rule, cells: last_cell.clone(), cache })
    }

    pub fn src(&self) -> &IntegrandSource {
        &self.src
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn order(&self) -> usize {
        self.rule.order()
    }

    pub fn rule(&self) -> &Rule {
        &self.rule
    }

    /// Index of the last cell per axis.
    pub fn last_cell(&self) -> &MultiIndex {
        &self.cells
    }

    /// The gridded extent `(last_cell + 1) Δ` per axis.
    pub fn extent(&self) -> Vec<f64> {
        self.cells.coords().iter().map(|&i| (i + 1) as f64 * self.delta).collect()
    }

    /// The cached integral over a cell, in row-major order of the cell index.
    pub fn cached(&self) -> &[Complex64] {
        &self.cache
    }

    pub fn cell(&self, c: &[usize]) -> Complex64 {
        let mut off = 0;
        for (p, &i) in c.iter().enumerate() {
            off = off * (self.cells[p] + 1) + i;
        }
        self.cache[off]
    }

    pub fn partial(&self, lo: &[f64], hi: &[f64]) -> Result<Complex64> {
        self.rule.integrate_box(&self.src, lo, hi)
    }
}
