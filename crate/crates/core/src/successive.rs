//! Successive summation: one axis at a time, innermost axis first, under an
//! arbitrary axis permutation.

use itertools::Itertools;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::compensated::ComplexSum;
use crate::error::{Error, Result};
use crate::lattice::check_dim;
use crate::series::TermSource;

pub const DEFAULT_CAP: usize = 1 << 20;
/// Largest dimension accepted by [`permutation_sweep`].
pub const MAX_SWEEP_DIM: usize = 5;

/// Order and stopping parameters. `permutation[0]` is the outermost axis and
/// `permutation[m-1]` is summed first. Tolerances and caps are indexed by axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummationPlan {
    permutation: Vec<usize>,
    tolerances: Vec<f64>,
    caps: Vec<usize>,
}

impl SummationPlan {
    pub fn new(permutation: Vec<usize>, tolerances: Vec<f64>, caps: Vec<usize>) -> Result<Self> {
        let m = permutation.len();
        check_dim(m)?;
        let mut seen = vec![false; m];
        for &a in &permutation {
            if a >= m || seen[a] {
                return Err(Error::Config(format!("{permutation:?} is not a permutation of 0..{m}")));
            }
            seen[a] = true;
        }
        if tolerances.len() != m || caps.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: tolerances.len().min(caps.len()) });
        }
        if let Some(t) = tolerances.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::Config(format!("tolerance must be positive and finite, got {t}")));
        }
        if caps.iter().any(|&c| c < 2) {
            return Err(Error::Config("axis caps must be at least 2".into()));
        }
        Ok(Self { permutation, tolerances, caps })
    }

    /// Identity order with the same tolerance and cap on every axis.
    pub fn uniform(m: usize, tol: f64, cap: usize) -> Result<Self> {
        Self::new((0..m).collect(), vec![tol; m], vec![cap; m])
    }

    pub fn with_permutation(&self, permutation: Vec<usize>) -> Result<Self> {
        Self::new(permutation, self.tolerances.clone(), self.caps.clone())
    }

    pub fn dim(&self) -> usize {
        self.permutation.len()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn tolerances(&self) -> &[f64] {
        &self.tolerances
    }

    pub fn caps(&self) -> &[usize] {
        &self.caps
    }
}

/// The axis whose single series did not settle within its cap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inconclusive {
    pub axis: usize,
    /// Indices pinned on the outer axes when the failure happened, by axis.
    pub pins: Vec<(usize, usize)>,
    pub last_tail: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessiveResult {
    pub value: Complex64,
    /// Largest first-omitted term seen on each axis, by axis.
    pub tails: Vec<f64>,
    /// Deepest truncation index used on each axis, by axis.
    pub depths: Vec<usize>,
    /// Number of single series summed on each axis, by axis.
    pub series_count: Vec<u64>,
    /// True when some axis is not tagged alternating, so only the
    /// consecutive-difference rule backs its truncation.
    pub heuristic: bool,
    pub inconclusive: Option<Inconclusive>,
    pub plan: SummationPlan,
}

impl SuccessiveResult {
    pub fn conclusive(&self) -> bool {
        self.inconclusive.is_none()
    }
}

struct Summer<'a> {
    src: &'a TermSource,
    plan: &'a SummationPlan,
    idx: Vec<usize>,
    tails: Vec<f64>,
    depths: Vec<usize>,
    counts: Vec<u64>,
}

impl Summer<'_> {
    /// Value of the series over the axes `permutation[level..]` with the outer
    /// axes pinned in `self.idx`. Each inner value is computed once and kept in a
    /// three-term window, so the outer stop rule can look one term ahead.
    fn level(&mut self, level: usize) -> std::result::Result<Complex64, Inconclusive> {
        let m = self.plan.dim();
        if level == m {
            return Ok(self.src.eval(&self.idx));
        }
        let axis = self.plan.permutation[level];
        let tol = self.plan.tolerances[axis];
        let cap = self.plan.caps[axis];
        let alternating = self.src.alternating()[axis];
        self.counts[axis] += 1;

        let term = |s: &mut Self, j: usize| {
            s.idx[axis] = j;
            s.level(level + 1)
        };
        let mut acc = ComplexSum::default();
        let mut prev = term(self, 0)?;
        acc.add(prev);
        let mut cur = term(self, 1)?;
        let mut n = 1;
        loop {
            let next = term(self, n + 1)?;
            acc.add(cur);
            let parity_ok = !alternating || n % 2 == 0;
            if parity_ok && prev.norm() < tol && cur.norm() < tol && next.norm() < tol {
                self.tails[axis] = self.tails[axis].max(next.norm());
                self.depths[axis] = self.depths[axis].max(n);
                self.idx[axis] = 0;
                return Ok(acc.value());
            }
            if n + 1 >= cap {
                let pins = self.plan.permutation[..level].iter().map(|&a| (a, self.idx[a])).collect();
                self.idx[axis] = 0;
                return Err(Inconclusive { axis, pins, last_tail: next.norm() });
            }
            prev = cur;
            cur = next;
            n += 1;
        }
    }
}

/// Sums `src` one axis at a time: the innermost axis of the plan is summed as an
/// ordinary series for every pin of the outer axes, and the resulting values form
/// the terms of the next axis out.
///
/// Each single series stops at the first `n >= 1` with `|t_{n-1}|`, `|t_n|` and the
/// look-ahead term `|t_{n+1}|` all below the axis tolerance. On axes tagged
/// alternating, `n` must also be even, so every truncation error on that axis
/// has the same sign.
pub fn successive_sum(src: &TermSource, plan: &SummationPlan) -> Result<SuccessiveResult> {
    let m = src.dim();
    if plan.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, got: plan.dim() });
    }
    let mut s = Summer { src, plan, idx: vec![0; m], tails: vec![0.0; m], depths: vec![0; m], counts: vec![0; m] };
    let outcome = s.level(0);
    let heuristic = plan.permutation.iter().any(|&a| !src.alternating()[a]);
    let (value, inconclusive) = match outcome {
        Ok(v) => (v, None),
        Err(inc) => {
            s.tails[inc.axis] = s.tails[inc.axis].max(inc.last_tail);
            (Complex64::new(f64::NAN, f64::NAN), Some(inc))
        }
    };
    Ok(SuccessiveResult {
        value,
        tails: s.tails,
        depths: s.depths,
        series_count: s.counts,
        heuristic,
        inconclusive,
        plan: plan.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub results: Vec<SuccessiveResult>,
    /// Largest `|value_a - value_b|` over conclusive pairs; infinite when some
    /// permutation is inconclusive.
    pub max_discrepancy: f64,
}

impl Sweep {
    pub fn all_conclusive(&self) -> bool {
        self.results.iter().all(SuccessiveResult::conclusive)
    }
}

/// Runs [`successive_sum`] for every axis permutation, in lexicographic order,
/// with the tolerances and caps of `base`.
pub fn permutation_sweep(src: &TermSource, base: &SummationPlan) -> Result<Sweep> {
    let m = src.dim();
    if m > MAX_SWEEP_DIM {
        return Err(Error::Precondition(format!("sweep needs m <= {MAX_SWEEP_DIM}, got {m}")));
    }
    let results = (0..m)
        .permutations(m)
        .map(|p| successive_sum(src, &base.with_permutation(p)?))
        .collect::<Result<Vec<_>>>()?;
    let max_discrepancy = if results.iter().all(SuccessiveResult::conclusive) {
        results
            .iter()
            .tuple_combinations()
            .map(|(a, b)| (a.value - b.value).norm())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    Ok(Sweep { results, max_discrepancy })
}
