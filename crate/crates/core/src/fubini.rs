//! Iterated limits of integrals over `ℝ^m₊`: inner axes are pushed to infinity
//! along a geometric ladder while the outer box stays fixed.
//!
//! Any [`BoxFunction`] can be split, including the stage functions produced by
//! an earlier split, which is how [`repeated_split`] peels axes off in stages.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use itertools::Itertools;
use num_complex::Complex64;
use serde::Serialize;

use crate::compensated::ComplexSum;
use crate::diagnostics::{Mode, Region, Status, Verdict, Violation};
use crate::error::{Error, Result};
use crate::integral::{BoxFunction, IntegralTable, RealBox};
use crate::lattice::{check_dim, MultiIndex};
use crate::quadrature::{IntegrandSource, Rule};

/// Ladder base in units of the grid step.
pub const LADDER_BASE_STEPS: f64 = 4.0;
/// Slack when comparing a ladder rung with a domain extent.
const EDGE: f64 = 1e-9;

/// Partition of the axes of an `m`-dimensional box function into outer axes,
/// which stay bounded, and inner axes, which go to infinity first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitSpec {
    outer: Vec<usize>,
    inner: Vec<usize>,
}

impl SplitSpec {
    /// `outer` lists the outer axes in the order they become the axes of the
    /// iterated limit; the remaining axes are inner.
    pub fn new(m: usize, outer: Vec<usize>) -> Result<Self> {
        check_dim(m)?;
        let mut seen = vec![false; m];
        for &a in &outer {
            if a >= m || seen[a] {
                return Err(Error::Config(format!("outer axes {outer:?} are not distinct axes of 0..{m}")));
            }
            seen[a] = true;
        }
        let inner: Vec<usize> = (0..m).filter(|&a| !seen[a]).collect();
        if outer.is_empty() || inner.is_empty() {
            return Err(Error::Config(format!("split of {m} axes needs p, q >= 1, got outer {outer:?}")));
        }
        Ok(Self { outer, inner })
    }

    /// Outer axes `0..p`, inner axes `p..m`.
    pub fn leading(m: usize, p: usize) -> Result<Self> {
        Self::new(m, (0..p).collect())
    }

    pub fn m(&self) -> usize {
        self.outer.len() + self.inner.len()
    }

    pub fn p(&self) -> usize {
        self.outer.len()
    }

    pub fn q(&self) -> usize {
        self.inner.len()
    }

    pub fn outer(&self) -> &[usize] {
        &self.outer
    }

    pub fn inner(&self) -> &[usize] {
        &self.inner
    }

    /// The full box with `outer` on the outer axes and `[0, w]` on the inner ones.
    fn assemble(&self, outer: &RealBox, w: f64) -> (Vec<f64>, Vec<f64>) {
        let m = self.m();
        let mut lo = vec![0.0; m];
        let mut hi = vec![w; m];
        for (k, &a) in self.outer.iter().enumerate() {
            lo[a] = outer.lo()[k];
            hi[a] = outer.hi()[k];
        }
        (lo, hi)
    }
}

/// Inner horizons `w₀, 2w₀, 4w₀, …` with `w₀ = 4Δ`, up to the smallest inner extent.
pub fn inner_ladder(f: &dyn BoxFunction, split: &SplitSpec) -> Result<Vec<f64>> {
    let ext = f.extent();
    let top = split.inner.iter().map(|&a| ext[a]).fold(f64::INFINITY, f64::min);
    let ladder = geometric_ladder(LADDER_BASE_STEPS * f.step(), top);
    if ladder.len() < 2 {
        return Err(Error::Precondition(format!(
            "inner extent {top} holds fewer than two ladder rungs from {}",
            LADDER_BASE_STEPS * f.step()
        )));
    }
    Ok(ladder)
}

fn geometric_ladder(w0: f64, top: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut w = w0;
    while w <= top * (1.0 + EDGE) {
        out.push(w.min(top));
        w *= 2.0;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IteratedLimit {
    pub value: Complex64,
    /// Inner horizon of the returned value.
    pub inner_horizon: f64,
    pub rung: usize,
    /// `|J(w_k) - J(w_{k-1})|` at the returned rung.
    pub residual: f64,
    pub stabilized: bool,
    /// Values at the last two rungs.
    pub last_two: [Complex64; 2],
}

/// `J` on an outer box: evaluates the box function with `[0, w]` on every inner
/// axis for `w` on the ladder and stops at the first rung within `eps` of the
/// previous one. Without such a rung the last value is returned unstabilized.
pub fn iterated_limit(f: &dyn BoxFunction, split: &SplitSpec, outer: &RealBox, eps: f64) -> Result<IteratedLimit> {
    let ladder = inner_ladder(f, split)?;
    iterated_on_ladder(f, split, outer, eps, &ladder)
}

fn iterated_on_ladder(
    f: &dyn BoxFunction,
    split: &SplitSpec,
    outer: &RealBox,
    eps: f64,
    ladder: &[f64],
) -> Result<IteratedLimit> {
    crate::diagnostics::check_eps(eps)?;
    if f.dim() != split.m() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: split.m() });
    }
    if outer.dim() != split.p() {
        return Err(Error::DimensionMismatch { expected: split.p(), got: outer.dim() });
    }
    let ext = f.extent();
    for (k, &a) in split.outer.iter().enumerate() {
        if outer.hi()[k] > ext[a] * (1.0 + EDGE) {
            return Err(Error::OutOfRange { query: outer.hi().to_vec(), horizon: ext.clone() });
        }
    }
    let mut prev: Option<Complex64> = None;
    let mut before = Complex64::new(0.0, 0.0);
    let mut residual = f64::INFINITY;
    for (rung, &w) in ladder.iter().enumerate() {
        let (lo, hi) = split.assemble(outer, w);
        let v = f.eval_box(&lo, &hi)?;
        if let Some(p) = prev {
            residual = (v - p).norm();
            if residual < eps {
                return Ok(IteratedLimit { value: v, inner_horizon: w, rung, residual, stabilized: true, last_two: [p, v] });
            }
            before = p;
        }
        prev = Some(v);
    }
    let last = prev.unwrap_or_default();
    Ok(IteratedLimit {
        value: last,
        inner_horizon: *ladder.last().unwrap_or(&0.0),
        rung: ladder.len().saturating_sub(1),
        residual,
        stabilized: false,
        last_two: [before, last],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JEntry {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub limit: IteratedLimit,
    pub flagged: bool,
}

impl JEntry {
    fn anchored(&self) -> bool {
        self.lo.iter().all(|&u| u == 0.0)
    }
}

/// `|J(box) - J(left) - J(right)|` for a split of a stored box at the midpoint of
/// one outer axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdditivityRecord {
    pub entry: usize,
    pub axis: usize,
    pub point: f64,
    pub residual: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IteratedLimitTable {
    pub split: SplitSpec,
    pub eps: f64,
    pub step: f64,
    /// Outer extents of the underlying box function, by outer axis.
    pub outer_extent: Vec<f64>,
    pub ladder: Vec<f64>,
    pub entries: Vec<JEntry>,
    /// Largest inner horizon any entry needed.
    pub uniformity: f64,
    pub additivity: Vec<AdditivityRecord>,
    pub additivity_tolerance: f64,
    /// Set when some entry did not stabilize or some additivity residual is too large.
    pub flagged: bool,
}

impl IteratedLimitTable {
    /// Distinct inner horizons used by the entries, ascending.
    pub fn horizons_used(&self) -> Vec<f64> {
        let mut hs: Vec<f64> = self.entries.iter().map(|e| e.limit.inner_horizon).collect();
        hs.sort_by(f64::total_cmp);
        hs.dedup();
        hs
    }
}

/// Runs [`iterated_limit`] on every probe box and checks additivity of each
/// stored value by splitting every non-degenerate outer axis at its midpoint,
/// with tolerance `3·eps`.
pub fn uniformity_probe(
    f: &dyn BoxFunction,
    split: &SplitSpec,
    probes: &[RealBox],
    eps: f64,
) -> Result<IteratedLimitTable> {
    if probes.is_empty() {
        return Err(Error::Precondition("probe set is empty".into()));
    }
    let ladder = inner_ladder(f, split)?;
    let tolerance = 3.0 * eps;
    let mut entries = Vec::with_capacity(probes.len());
    let mut additivity = Vec::new();
    for (i, bx) in probes.iter().enumerate() {
        let limit = iterated_on_ladder(f, split, bx, eps, &ladder)?;
        for axis in 0..bx.dim() {
            let (u, v) = (bx.lo()[axis], bx.hi()[axis]);
            if !(u < v) {
                continue;
            }
            let point = 0.5 * (u + v);
            let mut left_hi = bx.hi().to_vec();
            left_hi[axis] = point;
            let mut right_lo = bx.lo().to_vec();
            right_lo[axis] = point;
            let left = iterated_on_ladder(f, split, &RealBox::new(bx.lo().to_vec(), left_hi)?, eps, &ladder)?;
            let right = iterated_on_ladder(f, split, &RealBox::new(right_lo, bx.hi().to_vec())?, eps, &ladder)?;
            let residual = (limit.value - left.value - right.value).norm();
            additivity.push(AdditivityRecord { entry: i, axis, point, residual, ok: residual <= tolerance });
        }
        let flagged = !limit.stabilized;
        entries.push(JEntry { lo: bx.lo().to_vec(), hi: bx.hi().to_vec(), limit, flagged });
    }
    let uniformity = entries.iter().map(|e| e.limit.inner_horizon).fold(0.0, f64::max);
    let flagged = entries.iter().any(|e| e.flagged) || additivity.iter().any(|a| !a.ok);
    let ext = f.extent();
    Ok(IteratedLimitTable {
        split: split.clone(),
        eps,
        step: f.step(),
        outer_extent: split.outer.iter().map(|&a| ext[a]).collect(),
        ladder,
        entries,
        uniformity,
        additivity,
        additivity_tolerance: tolerance,
        flagged,
    })
}

fn real_horizon(jt: &IteratedLimitTable, reach: &[f64]) -> Result<MultiIndex> {
    MultiIndex::new(reach.iter().map(|&r| (r / jt.step).round() as usize).collect())
}

/// Per-axis reach of the probe set: the largest upper bound on each outer axis.
fn reach(entries: &[&JEntry]) -> Vec<f64> {
    let p = entries.first().map_or(0, |e| e.hi.len());
    (0..p).map(|k| entries.iter().map(|e| e.hi[k]).fold(0.0, f64::max)).collect()
}

/// Regular diagnosis of `J` over the probe boxes: `ρ₃` is the largest `max u`
/// over entries with `|J| > eps`, and the verdict is satisfied when `2ρ₃` does
/// not exceed the smallest per-axis reach of the probe set.
pub fn j_regular_diagnose(jt: &IteratedLimitTable, eps: f64) -> Result<Verdict> {
    crate::diagnostics::check_eps(eps)?;
    let all: Vec<&JEntry> = jt.entries.iter().collect();
    if all.is_empty() {
        return Err(Error::Precondition("iterated limit table is empty".into()));
    }
    let reach = reach(&all);
    let d = reach.iter().copied().fold(f64::INFINITY, f64::min);
    let mut rho = 0.0;
    let mut worst: Option<&JEntry> = None;
    let mut residual: f64 = 0.0;
    for e in &all {
        let depth = e.lo.iter().copied().fold(0.0, f64::max);
        let mag = e.limit.value.norm();
        if mag > eps && (worst.is_none() || depth > rho) {
            rho = depth;
            worst = Some(e);
        }
        if 2.0 * depth > d {
            residual = residual.max(mag);
        }
    }
    let violated = 2.0 * rho > d;
    let status = if violated {
        Status::Violated
    } else if jt.entries.iter().any(|e| e.flagged) {
        Status::Inconclusive
    } else {
        Status::SatisfiedAtHorizon
    };
    let violation = match (violated, worst) {
        (true, Some(e)) => Some(Violation {
            mode: Mode::Regular,
            pins: Vec::new(),
            region: Region::Real { lo: e.lo.clone(), hi: e.hi.clone() },
            depth: (rho / jt.step).round() as usize,
            magnitude: e.limit.value.norm(),
        }),
        _ => None,
    };
    Ok(Verdict {
        mode: Mode::Regular,
        status,
        estimate: None,
        witness: (!violated).then(|| (rho / jt.step).round() as usize),
        threshold: (!violated).then_some(rho),
        spacing: Some(jt.step),
        residual,
        eps,
        horizon: real_horizon(jt, &reach)?,
        boxes_examined: all.len() as u64,
        exhaustive: false,
        violation,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinalLimit {
    pub value: Complex64,
    pub verdict: Verdict,
}

/// Pringsheim diagnosis of `v ↦ J(0, v)` over the anchored probe entries. The
/// estimate is `J` on the anchored entry with the largest `min v`; `ρ` is the
/// largest `min v` of an anchored entry deviating from it by at least `eps`.
pub fn final_limit(jt: &IteratedLimitTable, eps: f64) -> Result<FinalLimit> {
    crate::diagnostics::check_eps(eps)?;
    let anchored: Vec<&JEntry> = jt.entries.iter().filter(|e| e.anchored()).collect();
    if anchored.len() < 2 {
        return Err(Error::Precondition("final limit needs at least two anchored probe boxes".into()));
    }
    let min_hi = |e: &JEntry| e.hi.iter().copied().fold(f64::INFINITY, f64::min);
    let top = anchored
        .iter()
        .copied()
        .max_by(|a, b| min_hi(a).total_cmp(&min_hi(b)).then_with(|| a.hi.iter().sum::<f64>().total_cmp(&b.hi.iter().sum())))
        .expect("non-empty");
    let estimate = top.limit.value;
    let d = min_hi(top);
    let mut rho = 0.0;
    let mut worst: Option<&JEntry> = None;
    let mut residual: f64 = 0.0;
    for e in &anchored {
        let depth = min_hi(e);
        let dev = (e.limit.value - estimate).norm();
        if dev >= eps && depth >= rho {
            rho = depth;
            worst = Some(e);
        }
        if 2.0 * depth > d {
            residual = residual.max(dev);
        }
    }
    let violated = 2.0 * rho > d;
    let status = if violated {
        Status::Violated
    } else if anchored.iter().any(|e| e.flagged) {
        Status::Inconclusive
    } else {
        Status::SatisfiedAtHorizon
    };
    let violation = match (violated, worst) {
        (true, Some(e)) => Some(Violation {
            mode: Mode::Pringsheim,
            pins: Vec::new(),
            region: Region::Real { lo: e.lo.clone(), hi: e.hi.clone() },
            depth: (rho / jt.step).round() as usize,
            magnitude: (e.limit.value - estimate).norm(),
        }),
        _ => None,
    };
    let verdict = Verdict {
        mode: Mode::Pringsheim,
        status,
        estimate: (!violated).then_some(estimate),
        witness: (!violated).then(|| (rho / jt.step).round() as usize),
        threshold: (!violated).then_some(rho),
        spacing: Some(jt.step),
        residual,
        eps,
        horizon: real_horizon(jt, &reach(&anchored))?,
        boxes_examined: anchored.len() as u64,
        exhaustive: false,
        violation,
    };
    Ok(FinalLimit { value: estimate, verdict })
}

/// Outer quadrature of the full inner integral: for every outer quadrature node
/// the inner integral over `[0, w]^q` is pushed up the ladder until two rungs
/// agree within `tol`. Uses the integrand, cell width, rule order and inner
/// extent of `table`.
pub fn inner_lebesgue_variant(table: &IntegralTable, split: &SplitSpec, outer: &RealBox, tol: f64) -> Result<Complex64> {
    crate::diagnostics::check_eps(tol)?;
    let src = table.src();
    if split.m() != src.dim() {
        return Err(Error::DimensionMismatch { expected: src.dim(), got: split.m() });
    }
    if outer.dim() != split.p() {
        return Err(Error::DimensionMismatch { expected: split.p(), got: outer.dim() });
    }
    let delta = table.delta();
    let rule = Rule::new(table.grid().order())?;
    let ladder = inner_ladder(table, split)?;

    // Nodes and weights per outer axis, one mapped rule per grid cell piece.
    let per_axis: Vec<Vec<(f64, f64)>> = (0..split.p())
        .map(|k| {
            let (u, v) = (outer.lo()[k], outer.hi()[k]);
            let mut nodes = Vec::new();
            let mut a = u;
            while a < v {
                let next = (((a / delta) + EDGE).floor() + 1.0) * delta;
                let b = next.min(v);
                nodes.extend(rule.mapped(a, b));
                a = b;
            }
            nodes
        })
        .collect();
    if per_axis.iter().any(Vec::is_empty) {
        return Ok(Complex64::new(0.0, 0.0));
    }

    let mut acc = ComplexSum::new();
    let mut pos = vec![0usize; split.p()];
    loop {
        let mut weight = 1.0;
        let mut fixed = Vec::with_capacity(split.p());
        for (k, &a) in split.outer.iter().enumerate() {
            let (t, w) = per_axis[k][pos[k]];
            weight *= w;
            fixed.push((a, t));
        }
        let inner_src = src.restrict(&fixed)?;
        let node: Vec<f64> = fixed.iter().map(|&(_, t)| t).collect();
        let inner = full_octant(&inner_src, &rule, delta, &ladder, tol, node)?;
        acc.add(inner * weight);
        let mut k = split.p();
        loop {
            if k == 0 {
                return Ok(acc.value());
            }
            k -= 1;
            pos[k] += 1;
            if pos[k] < per_axis[k].len() {
                break;
            }
            pos[k] = 0;
        }
    }
}

/// `∫_{ℝ^q₊} g` by the ladder: each rung adds the cells between the previous cube
/// and the new one.
fn full_octant(src: &IntegrandSource, rule: &Rule, delta: f64, ladder: &[f64], tol: f64, node: Vec<f64>) -> Result<Complex64> {
    let q = src.dim();
    let mut prev: Option<Complex64> = None;
    if let Some(fs) = src.factors() {
        let mut per_axis = vec![ComplexSum::new(); q];
        let mut filled = 0usize;
        for &w in ladder {
            let cells = (w / delta).round() as usize;
            for (p, sum) in per_axis.iter_mut().enumerate() {
                let g = &fs[p];
                for c in filled..cells {
                    sum.add(rule.integrate_1d(|x| g(x), c as f64 * delta, (c + 1) as f64 * delta)?);
                }
            }
            filled = cells;
            let v: Complex64 = per_axis.iter().map(ComplexSum::value).product();
            if let Some(p) = prev {
                if (v - p).norm() < tol {
                    return Ok(v);
                }
            }
            prev = Some(v);
        }
    } else {
        let mut total = ComplexSum::new();
        let mut filled = 0usize;
        for &w in ladder {
            let cells = (w / delta).round() as usize;
            let mut idx = vec![0usize; q];
            'cells: loop {
                if idx.iter().any(|&c| c >= filled) {
                    let lo: Vec<f64> = idx.iter().map(|&c| c as f64 * delta).collect();
                    let hi: Vec<f64> = idx.iter().map(|&c| (c + 1) as f64 * delta).collect();
                    total.add(rule.integrate_box(src, &lo, &hi)?);
                }
                let mut p = q;
                loop {
                    if p == 0 {
                        break 'cells;
                    }
                    p -= 1;
                    idx[p] += 1;
                    if idx[p] < cells {
                        break;
                    }
                    idx[p] = 0;
                }
            }
            filled = cells;
            let v = total.value();
            if let Some(p) = prev {
                if (v - p).norm() < tol {
                    return Ok(v);
                }
            }
            prev = Some(v);
        }
    }
    let last = prev.unwrap_or_default();
    Err(Error::InnerNotStabilized { node, last: [last.re, last.im] })
}

/// `J` of one split as a box function of the outer axes, with every value
/// cached by its box.
pub struct StageFunction {
    base: Arc<dyn BoxFunction>,
    split: SplitSpec,
    eps: f64,
    ladder: Vec<f64>,
    cache: Mutex<HashMap<Vec<u64>, Complex64>>,
    unstable: AtomicBool,
}

impl StageFunction {
    pub fn new(base: Arc<dyn BoxFunction>, split: SplitSpec, eps: f64) -> Result<Self> {
        if base.dim() != split.m() {
            return Err(Error::DimensionMismatch { expected: base.dim(), got: split.m() });
        }
        let ladder = inner_ladder(base.as_ref(), &split)?;
        Ok(Self { base, split, eps, ladder, cache: Mutex::new(HashMap::new()), unstable: AtomicBool::new(false) })
    }

    /// True once some evaluation failed to stabilize on the ladder.
    pub fn unstable(&self) -> bool {
        self.unstable.load(Ordering::Relaxed)
    }

    pub fn cached_boxes(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }
}

impl BoxFunction for StageFunction {
    fn dim(&self) -> usize {
        self.split.p()
    }

    fn extent(&self) -> Vec<f64> {
        let ext = self.base.extent();
        self.split.outer.iter().map(|&a| ext[a]).collect()
    }

    fn step(&self) -> f64 {
        self.base.step()
    }

    fn eval_box(&self, lo: &[f64], hi: &[f64]) -> Result<Complex64> {
        let key: Vec<u64> = lo.iter().chain(hi).map(|x| x.to_bits()).collect();
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let bx = RealBox::new(lo.to_vec(), hi.to_vec())?;
        let j = iterated_on_ladder(self.base.as_ref(), &self.split, &bx, self.eps, &self.ladder)?;
        if !j.stabilized {
            self.unstable.store(true, Ordering::Relaxed);
        }
        self.cache.lock().expect("cache lock").insert(key, j.value);
        Ok(j.value)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RepeatedSplit {
    pub value: Complex64,
    /// Diagonal ladder `v` of the last stage and its values `J(0, v)`.
    pub final_ladder: Vec<(f64, Complex64)>,
    pub stabilized: bool,
    /// Number of cached boxes per stage.
    pub cached_boxes: Vec<usize>,
    /// `5·eps` per split in the chain.
    pub budget: f64,
}

/// Applies the splits of `chain` in turn, each to the iterated limit produced by
/// the previous one, then takes the limit of the last stage along the diagonal
/// ladder `v = w₀, 2w₀, …`.
pub fn repeated_split(f: Arc<dyn BoxFunction>, chain: &[SplitSpec], eps: f64) -> Result<RepeatedSplit> {
    crate::diagnostics::check_eps(eps)?;
    if chain.is_empty() {
        return Err(Error::Config("split chain is empty".into()));
    }
    let mut current = f;
    let mut stages: Vec<Arc<StageFunction>> = Vec::with_capacity(chain.len());
    for split in chain {
        if split.m() != current.dim() {
            return Err(Error::Config(format!(
                "split of {} axes applied to a function of {} axes",
                split.m(),
                current.dim()
            )));
        }
        let stage = Arc::new(StageFunction::new(current.clone(), split.clone(), eps)?);
        stages.push(stage.clone());
        current = stage;
    }
    let top = current.extent().into_iter().fold(f64::INFINITY, f64::min);
    let ladder = geometric_ladder(LADDER_BASE_STEPS * current.step(), top);
    if ladder.len() < 2 {
        return Err(Error::Precondition(format!("outer extent {top} holds fewer than two ladder rungs")));
    }
    let p = current.dim();
    let mut values = Vec::with_capacity(ladder.len());
    let mut stabilized = false;
    for &v in &ladder {
        let val = current.eval_box(&vec![0.0; p], &vec![v; p])?;
        if let Some(&(_, prev)) = values.last() {
            let prev: Complex64 = prev;
            if (val - prev).norm() < eps {
                stabilized = true;
                values.push((v, val));
                break;
            }
        }
        values.push((v, val));
    }
    let stabilized = stabilized && stages.iter().all(|s| !s.unstable());
    Ok(RepeatedSplit {
        value: values.last().expect("ladder has rungs").1,
        final_ladder: values,
        stabilized,
        cached_boxes: stages.iter().map(|s| s.cached_boxes()).collect(),
        budget: 5.0 * eps * chain.len() as f64,
    })
}

/// Anchored probes `[0, v]` for `v` on the grid `{lo, lo + step, …, hi}^p`.
pub fn anchored_probes(p: usize, lo: f64, hi: f64, step: f64) -> Result<Vec<RealBox>> {
    let axis = grid_points(lo, hi, step);
    (0..p)
        .map(|_| axis.iter().copied())
        .multi_cartesian_product()
        .map(RealBox::anchored)
        .collect()
}

/// All boxes `[u, v]` with `u < v` per axis and corners on `{0, step, …, hi}`.
pub fn lattice_probes(p: usize, hi: f64, step: f64) -> Result<Vec<RealBox>> {
    let pts = grid_points(0.0, hi, step);
    let pairs: Vec<(f64, f64)> = pts.iter().copied().tuple_combinations().collect();
    (0..p)
        .map(|_| pairs.iter().copied())
        .multi_cartesian_product()
        .map(|combo| {
            let (lo, hi) = combo.into_iter().unzip();
            RealBox::new(lo, hi)
        })
        .collect()
}

fn grid_points(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + EDGE).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}
