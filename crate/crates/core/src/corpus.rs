//! Registry of example sources with known convergence behaviour.
//!
//! Each entry carries the expected outcome per mode, the eps/horizon at which
//! those tags are checked, and a note on what certifies them.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::diagnostics::Mode;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::quadrature::{IntegrandSource, Smoothness};
use crate::series::{SignedTermSource, TermSource};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Holds,
    Fails,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ModeTags {
    pub pringsheim: Tag,
    pub regular: Tag,
    pub absolute: Tag,
    /// Absent for one-dimensional and integral entries.
    pub complete: Option<Tag>,
}

impl ModeTags {
    pub fn get(&self, mode: Mode) -> Option<Tag> {
        match mode {
            Mode::Pringsheim => Some(self.pringsheim),
            Mode::Regular => Some(self.regular),
            Mode::Absolute => Some(self.absolute),
            Mode::Complete => self.complete,
        }
    }
}

#[derive(Clone, Debug)]
pub enum EntrySource {
    Series(TermSource),
    Signed(SignedTermSource),
    Integrand(IntegrandSource),
    /// An integrand on all of `ℝ^m`, studied through its symmetric fold.
    TwoSidedIntegrand(IntegrandSource),
}

/// Budget for successive summation of a product series, per family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SuccessiveBudget {
    /// Alternating product: `m · tol · (1 + ln 2)^{m-1}`.
    AlternatingProduct,
    /// Positive geometric product with ratio 1/2: `2 · tol · Σ_{i<m} K^i`,
    /// `K = ⌈log2(1/tol)⌉ + 2`.
    GeometricProduct,
}

impl SuccessiveBudget {
    pub fn budget(&self, m: usize, tol: f64) -> f64 {
        match self {
            SuccessiveBudget::AlternatingProduct => m as f64 * tol * (1.0 + LN_2).powi(m as i32 - 1),
            SuccessiveBudget::GeometricProduct => {
                let k = (1.0 / tol).log2().ceil() + 2.0;
                2.0 * tol * (0..m).map(|i| k.powi(i as i32)).sum::<f64>()
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub label: &'static str,
    pub dim: usize,
    pub source: EntrySource,
    pub tags: ModeTags,
    pub ground_truth: Option<Complex64>,
    pub eps: f64,
    /// Index horizon per axis for series; extent in `t` units for integrands.
    pub horizon: usize,
    /// Cell width for integrands.
    pub delta: Option<f64>,
    pub successive: Option<SuccessiveBudget>,
    pub note: &'static str,
}

const H: Tag = Tag::Holds;
const F: Tag = Tag::Fails;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn alt_term(j: usize) -> f64 {
    let s = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    s / (j as f64 + 1.0)
}

fn diag_pair(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else if a == b + 1 {
        -1.0
    } else {
        0.0
    }
}

/// `u`: `c_{j,0} = j`, `c_{j,1} = -j`, zero elsewhere.
pub fn unbounded_rows() -> TermSource {
    TermSource::real(2, "u", |j| match j[1] {
        0 => j[0] as f64,
        1 => -(j[0] as f64),
        _ => 0.0,
    })
    .expect("valid dimension")
    .with_ground_truth(re(0.0))
}

/// `Π_p (-1)^{j_p} / (j_p + 1)`.
pub fn alternating_product(m: usize) -> TermSource {
    TermSource::real(m, "alt", |j| j.iter().map(|&x| alt_term(x)).product())
        .expect("valid dimension")
        .with_ground_truth(re(LN_2.powi(m as i32)))
        .with_alternating_axes()
}

/// The diagonal pair `d`: `+1` on `j1 = j2`, `-1` on `j1 = j2 + 1`.
pub fn diagonal_pair() -> TermSource {
    TermSource::real(2, "d", |j| diag_pair(j[0], j[1])).expect("valid dimension")
}

/// `d_{j1,j2} · w_{j3}` with `w = (1, -1, 0, 0, ...)`.
pub fn diagonal_tensor_w() -> TermSource {
    TermSource::real(3, "d-tensor-w", |j| {
        let w = match j[2] {
            0 => 1.0,
            1 => -1.0,
            _ => 0.0,
        };
        diag_pair(j[0], j[1]) * w
    })
    .expect("valid dimension")
    .with_ground_truth(re(0.0))
}

/// `2^{-Σ j_p}`.
pub fn geometric(m: usize) -> TermSource {
    TermSource::real(m, "geo", |j| 0.5f64.powi(j.iter().sum::<usize>() as i32))
        .expect("valid dimension")
        .with_ground_truth(re(2f64.powi(m as i32)))
}

/// `j1 · j2 + j1 / 2` on `ℤ^2`: odd in the first axis.
pub fn odd_signed() -> SignedTermSource {
    SignedTermSource::new(2, "odd-signed", |j| re((j[0] * j[1]) as f64 + 0.5 * j[0] as f64))
        .expect("valid dimension")
        .with_ground_truth(re(0.0))
}

/// `2^{-|j1|-|j2|}` on `ℤ^2`, total 9.
pub fn even_signed() -> SignedTermSource {
    SignedTermSource::new(2, "even-signed", |j| re(0.5f64.powi((j[0].abs() + j[1].abs()) as i32)))
        .expect("valid dimension")
        .with_ground_truth(re(9.0))
}

/// `∫_0^∞ sin t / (1 + t) dt`, equal to `∫_0^∞ e^{-s} / (1 + s²) ds`.
pub const COND_INTEGRAL: f64 = 0.621_449_624_235_813_4;

type AxisFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

fn axis(f: fn(f64) -> f64) -> AxisFn {
    Arc::new(move |x| re(f(x)))
}

/// `Π_p e^{-t_p}`.
pub fn expo(m: usize) -> IntegrandSource {
    IntegrandSource::product("expo", Smoothness::Smooth, vec![axis(|x| (-x).exp()); m])
        .expect("valid dimension")
        .with_ground_truth(re(1.0))
}

/// `Π_p sin t_p / (1 + t_p)`.
pub fn cond(m: usize) -> IntegrandSource {
    IntegrandSource::product(
        "cond",
        Smoothness::Oscillatory { period: 2.0 * PI },
        vec![axis(|x| x.sin() / (1.0 + x)); m],
    )
    .expect("valid dimension")
    .with_ground_truth(re(COND_INTEGRAL.powi(m as i32)))
}

/// `(1 + t1) sin t1 · e^{-t2}`: strips `[u, u + π] × [0, w]` keep a mass of order `u`.
pub fn strip_violator() -> IntegrandSource {
    IntegrandSource::product(
        "strip-violator",
        Smoothness::Oscillatory { period: 2.0 * PI },
        vec![axis(|x| (1.0 + x) * x.sin()), axis(|x| (-x).exp())],
    )
    .expect("valid dimension")
}

/// `t1 · w(t2)` with `w = 1` on `[0, 1)`, `-1` on `[1, 2)`, `0` beyond: every
/// rectangle with `v2 >= 2` integrates to zero, strips over `[0, 1]` grow.
pub fn step_row() -> IntegrandSource {
    IntegrandSource::product(
        "step-row",
        Smoothness::Piecewise,
        vec![
            axis(|x| x),
            axis(|x| {
                if x < 1.0 {
                    1.0
                } else if x < 2.0 {
                    -1.0
                } else {
                    0.0
                }
            }),
        ],
    )
    .expect("valid dimension")
    .with_ground_truth(re(0.0))
}

/// `e^{-|t1| - |t2|}` on `ℝ^2`, total 4.
pub fn sym_expo() -> IntegrandSource {
    IntegrandSource::product("sym-expo", Smoothness::Smooth, vec![axis(|x| (-x.abs()).exp()); 2])
        .expect("valid dimension")
        .with_ground_truth(re(4.0))
}

/// `t1 · e^{-|t1| - |t2|}` on `ℝ^2`: odd in the first axis.
pub fn sym_odd() -> IntegrandSource {
    IntegrandSource::new(2, "sym-odd", Smoothness::Smooth, |t| re(t[0] * (-t[0].abs() - t[1].abs()).exp()))
        .expect("valid dimension")
        .with_ground_truth(re(0.0))
}

fn integrand_entries() -> Vec<CorpusEntry> {
    let mut out = Vec::new();
    for (m, extent, delta, eps) in [(2, 16, 0.5, 1e-3), (4, 16, 1.0, 1e-3)] {
        out.push(CorpusEntry {
            label: "expo",
            dim: m,
            source: EntrySource::Integrand(expo(m)),
            tags: ModeTags { pringsheim: H, regular: H, absolute: H, complete: None },
            ground_truth: Some(re(1.0)),
            eps,
            horizon: extent,
            delta: Some(delta),
            successive: None,
            note: "closed form: box integrals are products of e^{-u} - e^{-v}",
        });
    }
    for (m, extent, eps) in [(2, 48, 0.1), (4, 24, 0.25)] {
        out.push(CorpusEntry {
            label: "cond",
            dim: m,
            source: EntrySource::Integrand(cond(m)),
            tags: ModeTags { pringsheim: H, regular: H, absolute: F, complete: None },
            ground_truth: Some(re(COND_INTEGRAL.powi(m as i32))),
            eps,
            horizon: extent,
            delta: Some(1.5),
            successive: None,
            note: "1-D tails |∫_u^v g| <= 2/(1+u); ∫|g| grows like (2/π) ln v",
        });
    }
    out.push(CorpusEntry {
        label: "strip-violator",
        dim: 2,
        source: EntrySource::Integrand(strip_violator()),
        tags: ModeTags { pringsheim: F, regular: F, absolute: F, complete: None },
        ground_truth: None,
        eps: 0.5,
        horizon: 48,
        delta: Some(1.5),
        successive: None,
        note: "∫_u^{u+π} (1+t) sin t dt has modulus about 2(1+u)",
    });
    out.push(CorpusEntry {
        label: "step-row",
        dim: 2,
        source: EntrySource::Integrand(step_row()),
        tags: ModeTags { pringsheim: H, regular: F, absolute: F, complete: None },
        ground_truth: Some(re(0.0)),
        eps: 0.25,
        horizon: 16,
        delta: Some(0.5),
        successive: None,
        note: "I(v1, v2) = 0 once v2 >= 2; strips [u, v] x [0, 1] give (v² - u²)/2",
    });
    out.push(CorpusEntry {
        label: "sym-expo",
        dim: 2,
        source: EntrySource::TwoSidedIntegrand(sym_expo()),
        tags: ModeTags { pringsheim: H, regular: H, absolute: H, complete: None },
        ground_truth: Some(re(4.0)),
        eps: 1e-3,
        horizon: 16,
        delta: Some(0.5),
        successive: None,
        note: "closed form: symmetric integral over [-v, v]^2 is 4(1 - e^{-v})^2",
    });
    out.push(CorpusEntry {
        label: "sym-odd",
        dim: 2,
        source: EntrySource::TwoSidedIntegrand(sym_odd()),
        tags: ModeTags { pringsheim: H, regular: H, absolute: H, complete: None },
        ground_truth: Some(re(0.0)),
        eps: 1e-3,
        horizon: 16,
        delta: Some(0.5),
        successive: None,
        note: "odd in t1, so the fold vanishes identically",
    });
    out
}

/// Every registered entry.
pub fn corpus_list() -> Vec<CorpusEntry> {
    let mut out = vec![
        CorpusEntry {
            label: "u",
            dim: 2,
            source: EntrySource::Series(unbounded_rows()),
            tags: ModeTags { pringsheim: H, regular: F, absolute: F, complete: Some(F) },
            ground_truth: Some(re(0.0)),
            eps: 0.25,
            horizon: 32,
            delta: None,
            successive: None,
            note: "s(l1,l2) = 0 for l2 >= 1; single cells (k,0) have modulus k",
        },
        CorpusEntry {
            label: "d-tensor-w",
            dim: 3,
            source: EntrySource::Series(diagonal_tensor_w()),
            tags: ModeTags { pringsheim: H, regular: F, absolute: F, complete: Some(H) },
            ground_truth: Some(re(0.0)),
            eps: 0.25,
            horizon: 32,
            delta: None,
            successive: None,
            note: "rectangular sums vanish for l3 >= 1; s_d(n,n) = 1 and s_d(n+1,n) = 0; every line has at most two nonzero terms",
        },
    ];
    for (m, horizon, eps) in [(2, 256, 1e-2), (3, 48, 0.0625)] {
        out.push(CorpusEntry {
            label: "alt",
            dim: m,
            source: EntrySource::Series(alternating_product(m)),
            tags: ModeTags { pringsheim: H, regular: H, absolute: F, complete: Some(H) },
            ground_truth: Some(re(LN_2.powi(m as i32))),
            eps,
            horizon,
            delta: None,
            successive: Some(SuccessiveBudget::AlternatingProduct),
            note: "box sums factor into 1-D segment sums bounded by 1/(k+1); |c| sums grow like (ln n)^m",
        });
    }
    for (m, horizon) in [(2, 64), (3, 64)] {
        out.push(CorpusEntry {
            label: "geo",
            dim: m,
            source: EntrySource::Series(geometric(m)),
            tags: ModeTags { pringsheim: H, regular: H, absolute: H, complete: Some(H) },
            ground_truth: Some(re(2f64.powi(m as i32))),
            eps: 1e-8,
            horizon,
            delta: None,
            successive: Some(SuccessiveBudget::GeometricProduct),
            note: "closed form: box sums are products of 2^{1-k} - 2^{-l}",
        });
    }
    out.extend(integrand_entries());
    out.push(CorpusEntry {
        label: "odd-signed",
        dim: 2,
        source: EntrySource::Signed(odd_signed()),
        tags: ModeTags { pringsheim: H, regular: H, absolute: F, complete: None },
        ground_truth: Some(re(0.0)),
        eps: 1e-12,
        horizon: 16,
        delta: None,
        successive: None,
        note: "odd in the first axis, so every symmetric sum is exactly zero",
    });
    out.push(CorpusEntry {
        label: "even-signed",
        dim: 2,
        source: EntrySource::Signed(even_signed()),
        tags: ModeTags { pringsheim: H, regular: H, absolute: H, complete: None },
        ground_truth: Some(re(9.0)),
        eps: 1e-8,
        horizon: 64,
        delta: None,
        successive: None,
        note: "closed form: (1 + 2·Σ_{j>=1} 2^-j)^2 = 9",
    });
    out
}

/// Distinct labels, in registry order.
pub fn labels() -> Vec<&'static str> {
    let mut seen = Vec::new();
    for e in corpus_list() {
        if !seen.contains(&e.label) {
            seen.push(e.label);
        }
    }
    seen
}

/// The entry with `label`; `dim` picks among dimensions, defaulting to the first.
pub fn lookup(label: &str, dim: Option<usize>) -> Option<CorpusEntry> {
    corpus_list().into_iter().find(|e| e.label == label && dim.is_none_or(|m| m == e.dim))
}
