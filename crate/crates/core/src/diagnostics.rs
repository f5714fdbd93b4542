//! Finite-horizon diagnoses of the four convergence modes of a multiple series.
//!
//! Each diagnosis scans a cumulative table for the deepest place where the
//! defining inequality fails. With `D = min(horizon)`, a mode is reported as
//! satisfied at the horizon when the threshold `λ` it needs obeys `2λ <= D`, so
//! at least half of the explored range lies past the threshold. Otherwise it is
//! violated and the verdict carries the violating box.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::MultiIndex;
use crate::prefix_tables::scan::DepthProfile;
use crate::prefix_tables::PartialSumTable;
use crate::series::{build_table, subseries, TermSource};

/// Default number of boxes above which the regular scan switches to sampling.
pub const DEFAULT_BOX_BUDGET: u128 = 1 << 23;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Pringsheim,
    Regular,
    Absolute,
    Complete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    SatisfiedAtHorizon,
    Violated,
    Inconclusive,
}

/// Where a violation was found: an index box, or a box in `ℝ^m₊` for integrals.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Lattice { lo: Vec<usize>, hi: Vec<usize> },
    Real { lo: Vec<f64>, hi: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    /// Which check failed; a recursive regular diagnosis may fail on a Pringsheim check.
    pub mode: Mode,
    /// Indices pinned to reach the failing subseries, as `(axis, value)` with axes
    /// of the original series numbered from 0.
    pub pins: Vec<(usize, usize)>,
    pub region: Region,
    /// `max k` of the box (regular) or `min l` of the cell (Pringsheim).
    pub depth: usize,
    pub magnitude: f64,
}

/// A finite-horizon diagnosis. Never a proof: `SatisfiedAtHorizon` only means the
/// data up to the horizon are consistent with the mode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub mode: Mode,
    pub status: Status,
    pub estimate: Option<Complex64>,
    /// `λ₁` / `λ₂` analogue in index units.
    pub witness: Option<usize>,
    /// The witness in the caller's units (`witness * spacing`) for gridded tables.
    pub threshold: Option<f64>,
    pub spacing: Option<f64>,
    pub residual: f64,
    pub eps: f64,
    pub horizon: MultiIndex,
    pub boxes_examined: u64,
    pub exhaustive: bool,
    pub violation: Option<Violation>,
}

impl Verdict {
    pub fn satisfied(&self) -> bool {
        self.status == Status::SatisfiedAtHorizon
    }

    pub fn violated(&self) -> bool {
        self.status == Status::Violated
    }

    pub(crate) fn with_spacing(mut self, spacing: f64) -> Self {
        self.spacing = Some(spacing);
        self.threshold = self.witness.map(|w| w as f64 * spacing);
        if let Some(v) = &mut self.violation {
            if let Region::Lattice { lo, hi } = &v.region {
                v.region = Region::Real {
                    lo: lo.iter().map(|&k| k as f64 * spacing).collect(),
                    hi: hi.iter().map(|&l| (l + 1) as f64 * spacing).collect(),
                };
            }
        }
        self
    }
}

/// Turns a depth profile into a verdict under the `2λ <= D` rule.
pub(crate) fn settle(
    mode: Mode,
    profile: &DepthProfile,
    eps: f64,
    horizon: &MultiIndex,
    estimate: Complex64,
    exhaustive: bool,
) -> Verdict {
    let d = horizon.min_coord();
    let deepest = profile.deepest_at_least(eps);
    let lambda = deepest.unwrap_or(0);
    let mut v = Verdict {
        mode,
        status: Status::SatisfiedAtHorizon,
        estimate: Some(estimate),
        witness: Some(lambda),
        threshold: None,
        spacing: None,
        residual: profile.sup_beyond(Some(lambda)),
        eps,
        horizon: horizon.clone(),
        boxes_examined: profile.boxes.min(u64::MAX as u128) as u64,
        exhaustive,
        violation: None,
    };
    if 2 * lambda > d {
        let (lo, hi) = profile.witness[lambda].clone().unwrap_or_default();
        v.status = Status::Violated;
        v.estimate = None;
        v.witness = None;
        v.residual = profile.sup_beyond(Some(d / 2));
        v.violation = Some(Violation {
            mode,
            pins: Vec::new(),
            region: Region::Lattice { lo, hi },
            depth: lambda,
            magnitude: profile.best[lambda],
        });
    }
    v
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("eps must be positive and finite, got {eps}")))
    }
}

/// Pringsheim diagnosis: the estimate is `S(horizon)`, and `λ₁` is the largest
/// `min l` over cells deviating from it by at least `eps`.
pub fn pringsheim_diagnose(table: &PartialSumTable, eps: f64) -> Result<Verdict> {
    check_eps(eps)?;
    let h = table.horizon();
    if h.min_coord() < 3 {
        return Err(Error::Precondition(format!("horizon {h:?} is too small; need at least 3 per axis")));
    }
    let est = table.cell_unchecked(h.coords());
    Ok(pringsheim_profile(table, est, eps))
}

pub(crate) fn pringsheim_profile(table: &PartialSumTable, est: Complex64, eps: f64) -> Verdict {
    let h = table.horizon();
    let m = h.dim();
    let mut profile = DepthProfile::new(h.max_coord());
    let zero = vec![0usize; m];
    for (l, &cell) in crate::lattice::iterate_box(&crate::lattice::LatticeBox::anchored(h.clone()))
        .zip(table.cells())
    {
        profile.record(l.min_coord(), (cell - est).norm(), &zero, l.coords());
    }
    settle(Mode::Pringsheim, &profile, eps, h, est, true)
}

/// Regular diagnosis by scanning boxes `[k, l]`: exhaustive up to `box_budget`
/// boxes, otherwise the deterministic ladder-and-slab sample.
pub fn regular_diagnose_direct(table: &PartialSumTable, eps: f64, box_budget: u128) -> Result<Verdict> {
    check_eps(eps)?;
    Ok(regular_scan(Mode::Regular, table, eps, box_budget))
}

pub(crate) fn regular_scan(mode: Mode, table: &PartialSumTable, eps: f64, box_budget: u128) -> Verdict {
    let h = table.horizon();
    let (profile, exhaustive) = table.scan_boxes(box_budget);
    let est = table.cell_unchecked(h.coords());
    settle(mode, &profile, eps, h, est, exhaustive)
}

/// Knobs for the recursive regular and complete diagnoses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecursionOptions {
    pub box_budget: u128,
    /// Largest pinned index. Defaults to the Pringsheim witness `λ₁` for the
    /// recursive regular diagnosis and to `max(λ₁, min(horizon) / 4)` for the
    /// complete diagnosis.
    pub pin_depth: Option<usize>,
}

impl Default for RecursionOptions {
    fn default() -> Self {
        Self { box_budget: DEFAULT_BOX_BUDGET, pin_depth: None }
    }
}

fn drop_axis(h: &MultiIndex, axis: usize) -> MultiIndex {
    let rest: Vec<usize> = h.coords().iter().enumerate().filter(|&(p, _)| p != axis).map(|(_, &v)| v).collect();
    MultiIndex::new(rest).expect("dimension at least one")
}

/// Rewrites a verdict found on a subseries in terms of the original series: the
/// pins are recorded and the violating box is lifted to the full index space.
/// `axes` maps local axes to original ones.
fn pinned_violation(mut v: Verdict, mode: Mode, axes: &[usize], pins: &[(usize, usize)]) -> Verdict {
    if let Some(viol) = &mut v.violation {
        let mut all = pins.to_vec();
        all.sort_unstable();
        viol.pins = all;
        if let Region::Lattice { lo, hi } = &viol.region {
            let m = axes.len() + pins.len();
            let mut flo = vec![0; m];
            let mut fhi = vec![0; m];
            for &(p, j) in pins {
                flo[p] = j;
                fhi[p] = j;
            }
            for (local, &p) in axes.iter().enumerate() {
                flo[p] = lo[local];
                fhi[p] = hi[local];
            }
            viol.region = Region::Lattice { lo: flo, hi: fhi };
        }
    }
    v.mode = mode;
    v
}

/// Advances `vals` through `[0, caps]` odometer-style, last entry fastest.
fn next_tuple(vals: &mut [usize], caps: &[usize]) -> bool {
    for p in (0..vals.len()).rev() {
        if vals[p] < caps[p] {
            vals[p] += 1;
            return true;
        }
        vals[p] = 0;
    }
    false
}

/// Regular diagnosis through the recursive characterization: Pringsheim on the
/// whole series, then every subseries with one axis pinned at `j <= pin_depth`,
/// down to one-dimensional Cauchy checks.
pub fn regular_diagnose_recursive(
    src: &TermSource,
    eps: f64,
    horizon: &MultiIndex,
    opts: RecursionOptions,
) -> Result<Verdict> {
    check_eps(eps)?;
    if horizon.dim() != src.dim() {
        return Err(Error::DimensionMismatch { expected: src.dim(), got: horizon.dim() });
    }
    let axes: Vec<usize> = (0..src.dim()).collect();
    recurse(src, &axes, &[], eps, horizon, opts, 0)
}

fn recurse(
    src: &TermSource,
    axes: &[usize],
    pins: &[(usize, usize)],
    eps: f64,
    horizon: &MultiIndex,
    opts: RecursionOptions,
    inherited: usize,
) -> Result<Verdict> {
    let table = build_table(src, horizon)?;
    if src.dim() == 1 {
        let v = regular_scan(Mode::Regular, &table, eps, opts.box_budget);
        return Ok(pinned_violation(v, Mode::Regular, axes, pins));
    }
    let top = pringsheim_diagnose(&table, eps)?;
    if top.violated() {
        return Ok(pinned_violation(top, Mode::Regular, axes, pins));
    }
    let own = top.witness.unwrap_or(0);
    let depth = opts.pin_depth.unwrap_or(own.max(inherited));
    let mut combined = top.clone();
    combined.mode = Mode::Regular;
    combined.exhaustive = true;
    for (local, &axis) in axes.iter().enumerate() {
        let sub_h = drop_axis(horizon, local);
        let sub_axes: Vec<usize> = axes.iter().copied().filter(|&a| a != axis).collect();
        for j in 0..=depth.min(horizon[local]) {
            let sub = subseries(src, &[(local, j)])?;
            let mut sub_pins = pins.to_vec();
            sub_pins.push((axis, j));
            let v = recurse(&sub, &sub_axes, &sub_pins, eps, &sub_h, opts, depth)?;
            combined.boxes_examined = combined.boxes_examined.saturating_add(v.boxes_examined);
            combined.exhaustive &= v.exhaustive;
            if !v.satisfied() {
                let mut out = v;
                out.estimate = None;
                out.horizon = horizon.clone();
                out.boxes_examined = combined.boxes_examined;
                return Ok(out);
            }
            combined.witness = combined.witness.max(v.witness);
            combined.residual = combined.residual.max(v.residual);
        }
    }
    Ok(combined)
}

/// Absolute diagnosis: the regular scan applied to the table of `|c|`; the
/// estimate is `Σ|c|` over the horizon.
pub fn absolute_diagnose(src: &TermSource, eps: f64, horizon: &MultiIndex, box_budget: u128) -> Result<Verdict> {
    check_eps(eps)?;
    let table = build_table(&src.modulus(), horizon)?;
    Ok(regular_scan(Mode::Absolute, &table, eps, box_budget))
}

/// Complete diagnosis: Pringsheim on the whole series and a Cauchy check of every
/// line obtained by pinning all indices but one within `{0, ..., pin_depth}`.
pub fn complete_diagnose(src: &TermSource, eps: f64, horizon: &MultiIndex, opts: RecursionOptions) -> Result<Verdict> {
    check_eps(eps)?;
    let m = src.dim();
    if m < 2 {
        return Err(Error::Precondition("complete convergence needs dimension at least 2".into()));
    }
    let table = build_table(src, horizon)?;
    let top = pringsheim_diagnose(&table, eps)?;
    if top.violated() {
        let all: Vec<usize> = (0..m).collect();
        return Ok(pinned_violation(top, Mode::Complete, &all, &[]));
    }
    let depth = opts.pin_depth.unwrap_or(top.witness.unwrap_or(0).max(horizon.min_coord() / 4));
    let mut combined = top;
    combined.mode = Mode::Complete;
    for axis in 0..m {
        let others: Vec<usize> = (0..m).filter(|&p| p != axis).collect();
        let caps: Vec<usize> = others.iter().map(|&p| depth.min(horizon[p])).collect();
        let line_h = MultiIndex::new(vec![horizon[axis]])?;
        let mut vals = vec![0usize; others.len()];
        loop {
            let pins: Vec<(usize, usize)> = others.iter().copied().zip(vals.iter().copied()).collect();
            let line = subseries(src, &pins)?;
            let t = build_table(&line, &line_h)?;
            let v = regular_scan(Mode::Complete, &t, eps, opts.box_budget);
            combined.boxes_examined = combined.boxes_examined.saturating_add(v.boxes_examined);
            if !v.satisfied() {
                let mut out = pinned_violation(v, Mode::Complete, &[axis], &pins);
                out.horizon = horizon.clone();
                out.boxes_examined = combined.boxes_examined;
                return Ok(out);
            }
            combined.witness = combined.witness.max(v.witness);
            combined.residual = combined.residual.max(v.residual);
            if !next_tuple(&mut vals, &caps) {
                break;
            }
        }
    }
    Ok(combined)
}

/// All four verdicts at one `(eps, horizon)`.
#[derive(Clone, Debug, Serialize)]
pub struct ModeReport {
    pub pringsheim: Verdict,
    pub regular: Verdict,
    pub regular_recursive: Verdict,
    pub absolute: Verdict,
    pub complete: Option<Verdict>,
}

pub fn diagnose_all(src: &TermSource, eps: f64, horizon: &MultiIndex, opts: RecursionOptions) -> Result<ModeReport> {
    let table = build_table(src, horizon)?;
    let pringsheim = pringsheim_diagnose(&table, eps)?;
    let regular = regular_diagnose_direct(&table, eps, opts.box_budget)?;
    let rec_opts = RecursionOptions { pin_depth: None, ..opts };
    let regular_recursive = regular_diagnose_recursive(src, eps, horizon, rec_opts)?;
    let absolute = absolute_diagnose(src, eps, horizon, opts.box_budget)?;
    let complete = if src.dim() >= 2 { Some(complete_diagnose(src, eps, horizon, opts)?) } else { None };
    Ok(ModeReport { pringsheim, regular, regular_recursive, absolute, complete })
}

/// Failures of the implication chain among the verdicts of one source: absolute
/// ⇒ regular, regular ⇒ Pringsheim at `m·eps` with the same estimate, and
/// regular ⇒ complete. An empty list means the chain holds.
pub fn implication_failures(src: &TermSource, report: &ModeReport) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let eps = report.regular.eps;
    if report.absolute.satisfied() && !report.regular.satisfied() {
        out.push(format!("{}: absolute satisfied but regular not", src.label()));
    }
    if report.regular.satisfied() {
        let table = build_table(src, &report.regular.horizon)?;
        let widened = pringsheim_diagnose(&table, src.dim() as f64 * eps)?;
        if !widened.satisfied() {
            out.push(format!("{}: regular satisfied but Pringsheim at m*eps violated", src.label()));
        }
        if widened.estimate != report.regular.estimate {
            out.push(format!("{}: regular and Pringsheim estimates differ", src.label()));
        }
        if let Some(c) = &report.complete {
            if !c.satisfied() {
                out.push(format!("{}: regular satisfied but complete not", src.label()));
            }
        }
    }
    Ok(out)
}
