//! Pipelines behind the command-line tool and the versioned reports they emit.

use std::io::Write;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{self, CorpusEntry, EntrySource, ModeTags, Tag};
use crate::diagnostics::{self, Mode, RecursionOptions, Status, Verdict, DEFAULT_BOX_BUDGET};
use crate::error::{Error, Result};
use crate::fubini::{self, FinalLimit, SplitSpec};
use crate::integral::{self, BoxFunction, IntegralTable, ProbeLattice, RealBox};
use crate::lattice::MultiIndex;
use crate::quadrature::DEFAULT_ORDER;
use crate::series::{symmetric_fold, TermSource};
use crate::successive::{self, SummationPlan, Sweep};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "regconv";

pub const EXIT_MATCH: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;

pub const DEFAULT_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Diagnose,
    Successive,
    Fubini,
    Corpus,
}

/// Everything that determines a run. Unset numeric fields are filled with the
/// values actually used before the config is echoed into the report.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunConfig {
    pub source: Option<String>,
    pub m: Option<usize>,
    pub eps: Option<f64>,
    pub horizon: Option<usize>,
    pub box_budget: Option<u128>,
    pub pin_depth: Option<usize>,
    pub tol: Option<f64>,
    pub cap: Option<usize>,
    pub delta: Option<f64>,
    pub q: Option<usize>,
    pub p: Option<usize>,
    /// Outer dimensions of successive splits, e.g. `[2, 1]` for 4 → 2 → 1.
    pub chain: Vec<usize>,
    /// Sample this many lattice probe boxes instead of taking all of them.
    pub random_probes: Option<usize>,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub matched: bool,
    pub exit_code: i32,
    pub messages: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Command,
    pub config: RunConfig,
    pub results: Results,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Results {
    Diagnose(DiagnoseResults),
    Successive(SuccessiveResults),
    Fubini(Box<FubiniResults>),
    Corpus { entries: Vec<CorpusSummary> },
}

#[derive(Clone, Debug, Serialize)]
pub struct Observed {
    pub mode: Mode,
    pub expected: Tag,
    pub status: Status,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnoseResults {
    pub label: String,
    pub dim: usize,
    pub kind: &'static str,
    pub ground_truth: Option<Complex64>,
    pub verdicts: Vec<Verdict>,
    pub observed: Vec<Observed>,
    pub implication_failures: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuccessiveResults {
    pub label: String,
    pub dim: usize,
    pub ground_truth: Option<Complex64>,
    /// Documented per-family bound on `|value - truth|`.
    pub budget: f64,
    /// False when the family has no documented budget and `m · tol` stands in.
    pub budget_documented: bool,
    pub sweep: Sweep,
    pub max_truth_error: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableSummary {
    pub probes: usize,
    pub ladder: Vec<f64>,
    pub uniformity: f64,
    pub horizons_used: Vec<f64>,
    pub flagged: bool,
    pub max_additivity_residual: f64,
    pub additivity_tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainSummary {
    pub outer_dims: Vec<usize>,
    pub value: Complex64,
    pub difference: f64,
    pub budget: f64,
    pub stabilized: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FubiniResults {
    pub label: String,
    pub dim: usize,
    pub split: SplitSpec,
    pub extent: f64,
    pub ground_truth: Option<Complex64>,
    pub table: TableSummary,
    pub entries: Vec<fubini::JEntry>,
    pub j_regular: Verdict,
    pub final_limit: FinalLimit,
    pub pringsheim: Verdict,
    pub final_vs_pringsheim: Option<f64>,
    pub chain: Option<ChainSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusSummary {
    pub label: &'static str,
    pub dim: usize,
    pub kind: &'static str,
    pub tags: ModeTags,
    pub ground_truth: Option<Complex64>,
    pub eps: f64,
    pub horizon: usize,
    pub delta: Option<f64>,
    pub note: &'static str,
}

fn kind(e: &CorpusEntry) -> &'static str {
    match e.source {
        EntrySource::Series(_) => "series",
        EntrySource::Signed(_) => "signed_series",
        EntrySource::Integrand(_) => "integrand",
        EntrySource::TwoSidedIntegrand(_) => "two_sided_integrand",
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn entry(cfg: &RunConfig) -> Result<CorpusEntry> {
    let label = cfg.source.as_deref().ok_or_else(|| usage("--source is required"))?;
    corpus::lookup(label, cfg.m).ok_or_else(|| {
        usage(format!(
            "unknown source {label}{}; available: {}",
            cfg.m.map(|m| format!(" with m={m}")).unwrap_or_default(),
            corpus::labels().join(", ")
        ))
    })
}

fn tag_of(status: Status) -> Option<Tag> {
    match status {
        Status::SatisfiedAtHorizon => Some(Tag::Holds),
        Status::Violated => Some(Tag::Fails),
        Status::Inconclusive => None,
    }
}

fn finish(command: Command, config: RunConfig, results: Results, messages: Vec<String>) -> Report {
    let matched = messages.is_empty();
    Report {
        schema_version: SCHEMA_VERSION,
        tool: TOOL,
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        results,
        outcome: Outcome { matched, exit_code: if matched { EXIT_MATCH } else { EXIT_MISMATCH }, messages },
        wall_clock_seconds: None,
    }
}

pub fn run(command: Command, cfg: RunConfig) -> Result<Report> {
    match command {
        Command::Diagnose => cmd_diagnose(cfg),
        Command::Successive => cmd_successive(cfg),
        Command::Fubini => cmd_fubini(cfg),
        Command::Corpus => Ok(cmd_corpus(cfg)),
    }
}

/// Runs every mode diagnosis on a corpus member and compares with its tags.
pub fn cmd_diagnose(mut cfg: RunConfig) -> Result<Report> {
    let e = entry(&cfg)?;
    cfg.m = Some(e.dim);
    let eps = *cfg.eps.get_or_insert(e.eps);
    let horizon = *cfg.horizon.get_or_insert(e.horizon);
    let budget = *cfg.box_budget.get_or_insert(DEFAULT_BOX_BUDGET);

    let (verdicts, implications) = match &e.source {
        EntrySource::Series(src) => series_verdicts(src, eps, horizon, budget, cfg.pin_depth)?,
        EntrySource::Signed(src) => series_verdicts(&symmetric_fold(src), eps, horizon, budget, cfg.pin_depth)?,
        EntrySource::Integrand(src) | EntrySource::TwoSidedIntegrand(src) => {
            let delta = *cfg.delta.get_or_insert(e.delta.unwrap_or(crate::quadrature::DEFAULT_DELTA));
            let q = *cfg.q.get_or_insert(DEFAULT_ORDER);
            let ext = vec![horizon as f64; e.dim];
            let table = match e.source {
                EntrySource::TwoSidedIntegrand(_) => integral::symmetric_integral_adapter(src, delta, q, &ext)?.1,
                _ => IntegralTable::build(src, delta, q, &ext)?,
            };
            let v = vec![
                integral::integral_pringsheim_diagnose(&table, eps)?,
                integral::integral_regular_diagnose(&table, eps, budget, ProbeLattice::Corners)?,
                integral::integral_absolute_diagnose(&table, eps, budget, ProbeLattice::Corners)?,
            ];
            (v, Vec::new())
        }
    };

    let mut messages = Vec::new();
    let mut observed = Vec::new();
    for v in &verdicts {
        if let Some(expected) = e.tags.get(v.mode) {
            if observed.iter().any(|o: &Observed| o.mode == v.mode) {
                continue;
            }
            if tag_of(v.status) != Some(expected) {
                messages.push(format!("{:?}: expected {expected:?}, got {:?}", v.mode, v.status));
            }
            observed.push(Observed { mode: v.mode, expected, status: v.status });
        }
    }
    let regulars: Vec<&Verdict> = verdicts.iter().filter(|v| v.mode == Mode::Regular).collect();
    if regulars.windows(2).any(|w| w[0].status != w[1].status) {
        messages.push("direct and recursive regular diagnoses disagree".into());
    }
    messages.extend(implications.iter().cloned());
    let results = Results::Diagnose(DiagnoseResults {
        label: e.label.to_string(),
        dim: e.dim,
        kind: kind(&e),
        ground_truth: e.ground_truth,
        verdicts,
        observed,
        implication_failures: implications,
    });
    Ok(finish(Command::Diagnose, cfg, results, messages))
}

fn series_verdicts(
    src: &TermSource,
    eps: f64,
    horizon: usize,
    box_budget: u128,
    pin_depth: Option<usize>,
) -> Result<(Vec<Verdict>, Vec<String>)> {
    let h = MultiIndex::splat(src.dim(), horizon)?;
    let r = diagnostics::diagnose_all(src, eps, &h, RecursionOptions { box_budget, pin_depth })?;
    let failures = diagnostics::implication_failures(src, &r)?;
    let mut v = vec![r.pringsheim, r.regular, r.regular_recursive, r.absolute];
    v.extend(r.complete);
    Ok((v, failures))
}

/// Successive sums under every axis permutation; matched when all are
/// conclusive and pairwise within twice the per-value budget.
pub fn cmd_successive(mut cfg: RunConfig) -> Result<Report> {
    let e = entry(&cfg)?;
    let EntrySource::Series(src) = &e.source else {
        return Err(usage(format!("{} is not a series; successive needs a series source", e.label)));
    };
    cfg.m = Some(e.dim);
    let tol = *cfg.tol.get_or_insert(DEFAULT_TOL);
    let cap = *cfg.cap.get_or_insert(successive::DEFAULT_CAP);
    let sweep = successive::permutation_sweep(src, &SummationPlan::uniform(e.dim, tol, cap)?)?;
    let (budget, documented) = match e.successive {
        Some(b) => (b.budget(e.dim, tol), true),
        None => (e.dim as f64 * tol, false),
    };
    let mut messages = Vec::new();
    for r in &sweep.results {
        if let Some(inc) = &r.inconclusive {
            messages.push(format!(
                "permutation {:?}: axis {} did not settle within cap {} (pins {:?})",
                r.plan.permutation(),
                inc.axis,
                cap,
                inc.pins
            ));
        }
    }
    if sweep.all_conclusive() && sweep.max_discrepancy > 2.0 * budget {
        messages.push(format!("max pairwise discrepancy {:e} exceeds {:e}", sweep.max_discrepancy, 2.0 * budget));
    }
    let max_truth_error = e.ground_truth.filter(|_| sweep.all_conclusive()).map(|s| {
        sweep.results.iter().map(|r| (r.value - s).norm()).fold(0.0, f64::max)
    });
    let results = Results::Successive(SuccessiveResults {
        label: e.label.to_string(),
        dim: e.dim,
        ground_truth: e.ground_truth,
        budget,
        budget_documented: documented,
        sweep,
        max_truth_error,
    });
    Ok(finish(Command::Successive, cfg, results, messages))
}

/// Anchored probes `[0, v]` with `v` from `E/2` to `E` in steps of `E/8`, and
/// boxes with corners on multiples of `E/8` (`E/4` when `p > 2`), optionally
/// sampled by `seed`.
pub fn fubini_probes(p: usize, extent: f64, random: Option<usize>, seed: u64) -> Result<Vec<RealBox>> {
    let step = extent / 8.0;
    let mut probes = fubini::anchored_probes(p, extent / 2.0, extent, step)?;
    let lattice_step = if p > 2 { extent / 4.0 } else { step };
    let mut lattice = fubini::lattice_probes(p, extent, lattice_step)?;
    if let Some(n) = random {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        lattice.shuffle(&mut rng);
        lattice.truncate(n);
    }
    probes.extend(lattice);
    Ok(probes)
}

/// Iterated limits on the probe set, the regular check of `J`, the final limit,
/// and an optional split chain. Matched when the final limit lies within
/// `5·eps` of the Pringsheim estimate of the whole integral.
pub fn cmd_fubini(mut cfg: RunConfig) -> Result<Report> {
    let e = entry(&cfg)?;
    let EntrySource::Integrand(src) = &e.source else {
        return Err(usage(format!("{} is not a one-sided integrand; fubini needs one", e.label)));
    };
    let m = e.dim;
    if m < 2 {
        return Err(usage("fubini needs dimension at least 2"));
    }
    cfg.m = Some(m);
    let eps = *cfg.eps.get_or_insert(e.eps);
    let extent = *cfg.horizon.get_or_insert(e.horizon) as f64;
    let delta = *cfg.delta.get_or_insert(e.delta.unwrap_or(crate::quadrature::DEFAULT_DELTA));
    let q = *cfg.q.get_or_insert(DEFAULT_ORDER);
    let p = *cfg.p.get_or_insert(m / 2);
    let split = SplitSpec::leading(m, p)?;

    let table = IntegralTable::build(src, delta, q, &vec![extent; m])?;
    let probes = fubini_probes(p, extent, cfg.random_probes, cfg.seed)?;
    let jt = fubini::uniformity_probe(&table, &split, &probes, eps)?;
    let j_regular = fubini::j_regular_diagnose(&jt, eps)?;
    let final_limit = fubini::final_limit(&jt, eps)?;
    let pringsheim = integral::integral_pringsheim_diagnose(&table, eps)?;

    let mut messages = Vec::new();
    let final_vs_pringsheim = pringsheim.estimate.map(|s| (final_limit.value - s).norm());
    match final_vs_pringsheim {
        Some(d) if d <= 5.0 * eps => {}
        Some(d) => messages.push(format!("final limit differs from the Pringsheim estimate by {d:e} > 5·eps")),
        None => messages.push("Pringsheim diagnosis of the integral is not satisfied".into()),
    }

    let chain = if cfg.chain.is_empty() {
        None
    } else {
        let mut splits = Vec::new();
        let mut cur = m;
        for &pk in &cfg.chain {
            splits.push(SplitSpec::leading(cur, pk)?);
            cur = pk;
        }
        let f: std::sync::Arc<dyn BoxFunction> = std::sync::Arc::new(table.clone());
        let rs = fubini::repeated_split(f, &splits, eps)?;
        Some(ChainSummary {
            outer_dims: cfg.chain.clone(),
            value: rs.value,
            difference: (rs.value - final_limit.value).norm(),
            budget: rs.budget,
            stabilized: rs.stabilized,
        })
    };

    let max_add = jt.additivity.iter().map(|a| a.residual).fold(0.0, f64::max);
    let summary = TableSummary {
        probes: jt.entries.len(),
        ladder: jt.ladder.clone(),
        uniformity: jt.uniformity,
        horizons_used: jt.horizons_used(),
        flagged: jt.flagged,
        max_additivity_residual: max_add,
        additivity_tolerance: jt.additivity_tolerance,
    };
    let results = Results::Fubini(Box::new(FubiniResults {
        label: e.label.to_string(),
        dim: m,
        split,
        extent,
        ground_truth: e.ground_truth,
        table: summary,
        entries: jt.entries,
        j_regular,
        final_limit,
        pringsheim,
        final_vs_pringsheim,
        chain,
    }));
    Ok(finish(Command::Fubini, cfg, results, messages))
}

pub fn cmd_corpus(cfg: RunConfig) -> Report {
    let entries = corpus::corpus_list()
        .iter()
        .map(|e| CorpusSummary {
            label: e.label,
            dim: e.dim,
            kind: kind(e),
            tags: e.tags,
            ground_truth: e.ground_truth,
            eps: e.eps,
            horizon: e.horizon,
            delta: e.delta,
            note: e.note,
        })
        .collect();
    finish(Command::Corpus, cfg, Results::Corpus { entries }, Vec::new())
}

/// The serialized name of a unit enum variant.
fn name<T: Serialize>(v: T) -> String {
    serde_json::to_value(v).ok().and_then(|x| x.as_str().map(str::to_string)).unwrap_or_default()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn joined<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// Writes the tabular part of a report as CSV. Columns per command:
///
/// - diagnose: `mode,status,estimate_re,estimate_im,witness,threshold,residual,eps,horizon,boxes_examined,exhaustive`
/// - successive: `permutation,value_re,value_im,conclusive,inconclusive_axis,tails,depths`
/// - fubini: `lo,hi,value_re,value_im,inner_horizon,rung,residual,stabilized`
/// - corpus: `label,dim,kind,pringsheim,regular,absolute,complete,eps,horizon,delta`
///
/// Vector-valued cells are space-separated.
pub fn write_csv<W: Write>(report: &Report, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Format(e.to_string());
    match &report.results {
        Results::Diagnose(d) => {
            w.write_record([
                "mode", "status", "estimate_re", "estimate_im", "witness", "threshold", "residual", "eps", "horizon",
                "boxes_examined", "exhaustive",
            ])
            .map_err(err)?;
            for v in &d.verdicts {
                w.write_record([
                    name(v.mode),
                    name(v.status),
                    opt(v.estimate.map(|z| z.re)),
                    opt(v.estimate.map(|z| z.im)),
                    opt(v.witness),
                    opt(v.threshold),
                    v.residual.to_string(),
                    v.eps.to_string(),
                    joined(v.horizon.coords()),
                    v.boxes_examined.to_string(),
                    v.exhaustive.to_string(),
                ])
                .map_err(err)?;
            }
        }
        Results::Successive(s) => {
            w.write_record(["permutation", "value_re", "value_im", "conclusive", "inconclusive_axis", "tails", "depths"])
                .map_err(err)?;
            for r in &s.sweep.results {
                w.write_record([
                    joined(r.plan.permutation()),
                    r.value.re.to_string(),
                    r.value.im.to_string(),
                    r.conclusive().to_string(),
                    opt(r.inconclusive.as_ref().map(|i| i.axis)),
                    joined(&r.tails),
                    joined(&r.depths),
                ])
                .map_err(err)?;
            }
        }
        Results::Fubini(f) => {
            w.write_record(["lo", "hi", "value_re", "value_im", "inner_horizon", "rung", "residual", "stabilized"])
                .map_err(err)?;
            for e in &f.entries {
                w.write_record([
                    joined(&e.lo),
                    joined(&e.hi),
                    e.limit.value.re.to_string(),
                    e.limit.value.im.to_string(),
                    e.limit.inner_horizon.to_string(),
                    e.limit.rung.to_string(),
                    e.limit.residual.to_string(),
                    e.limit.stabilized.to_string(),
                ])
                .map_err(err)?;
            }
        }
        Results::Corpus { entries } => {
            w.write_record([
                "label", "dim", "kind", "pringsheim", "regular", "absolute", "complete", "eps", "horizon", "delta",
            ])
            .map_err(err)?;
            for e in entries {
                w.write_record([
                    e.label.to_string(),
                    e.dim.to_string(),
                    e.kind.to_string(),
                    name(e.tags.pringsheim),
                    name(e.tags.regular),
                    name(e.tags.absolute),
                    e.tags.complete.map(name).unwrap_or_default(),
                    e.eps.to_string(),
                    e.horizon.to_string(),
                    opt(e.delta),
                ])
                .map_err(err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
