use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use regconv::diagnostics::{pringsheim_diagnose, regular_diagnose_direct};
use regconv::fubini::{iterated_limit, SplitSpec};
use regconv::integral::{IntegralTable, RealBox};
use regconv::lattice::{corners, iterate_box, LatticeBox, MultiIndex};
use regconv::prefix_tables::PartialSumTable;
use regconv::quadrature::{cell_integral, IntegrandSource, PanelGrid, Rule, Smoothness};
use regconv::series::{
    build_table, subseries, symmetric_block_sum, symmetric_block_sum_direct, SignedTermSource, TermSource,
};
use regconv::successive::{permutation_sweep, successive_sum, SummationPlan};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Deterministic pseudo-random value in `[-1, 1]` for an index.
fn hashed(seed: u64, j: &[usize]) -> f64 {
    let mut x = seed;
    for &k in j {
        x = (x ^ k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(23);
    }
    (x >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

fn horizon_and_box(max_m: usize, max_h: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>, Vec<usize>)> {
    (1..=max_m)
        .prop_flat_map(move |m| proptest::collection::vec(0..=max_h, m))
        .prop_flat_map(|h| {
            let pairs: Vec<_> = h.iter().map(|&x| (0..=x).prop_flat_map(move |a| (Just(a), a..=x))).collect();
            (Just(h), pairs)
        })
        .prop_map(|(h, pairs)| {
            let (lo, hi) = pairs.into_iter().unzip();
            (h, lo, hi)
        })
}

fn brute_sum(lo: &[usize], hi: &[usize], f: impl Fn(&[usize]) -> f64) -> f64 {
    let bx = LatticeBox::from_coords(lo.to_vec(), hi.to_vec()).unwrap();
    iterate_box(&bx).map(|j| f(j.coords())).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn corner_count_and_sign_balance((_h, lo, hi) in horizon_and_box(6, 5)) {
        let bx = LatticeBox::from_coords(lo.clone(), hi.clone()).unwrap();
        let cs = corners(&bx);
        prop_assert_eq!(cs.len(), 1 << lo.len());
        let sign_sum: i32 = cs.iter().map(|(s, _)| s.sign() as i32).sum();
        prop_assert_eq!(sign_sum, 0);
        let sentinels = cs.iter().filter(|(_, ix)| ix.resolve().is_none()).count();
        if lo.iter().all(|&k| k > 0) {
            prop_assert_eq!(sentinels, 0);
        }
        prop_assert_eq!(iterate_box(&bx).count() as u128, bx.volume());
    }

    #[test]
    fn integer_corner_queries_are_exact((h, lo, hi) in horizon_and_box(4, 7), seed in any::<u64>()) {
        let term = move |j: &[usize]| (hashed(seed, j) * 1000.0).round();
        let table = PartialSumTable::from_terms(&MultiIndex::new(h).unwrap(), |j| c(term(j))).unwrap();
        let got = table.subrect_sum(&LatticeBox::from_coords(lo.clone(), hi.clone()).unwrap()).unwrap();
        prop_assert_eq!(got, c(brute_sum(&lo, &hi, term)));
    }

    #[test]
    fn float_corner_queries_stay_within_rounding_bound((h, lo, hi) in horizon_and_box(4, 7), seed in any::<u64>()) {
        let m = h.len();
        let term = move |j: &[usize]| hashed(seed, j);
        let hz = MultiIndex::new(h).unwrap();
        let table = PartialSumTable::from_terms(&hz, |j| c(term(j))).unwrap();
        let got = table.subrect_sum(&LatticeBox::from_coords(lo.clone(), hi.clone()).unwrap()).unwrap();
        let bound = (1u64 << m) as f64 * hz.coords().iter().map(|&x| (x + 1) as f64).product::<f64>() * 2f64.powi(-50);
        prop_assert!((got.re - brute_sum(&lo, &hi, term)).abs() <= bound);
    }

    #[test]
    fn partition_additivity((h, lo, hi) in horizon_and_box(4, 7), seed in any::<u64>(), axis_pick in any::<usize>()) {
        let term = move |j: &[usize]| (hashed(seed, j) * 1000.0).round();
        let table = PartialSumTable::from_terms(&MultiIndex::new(h).unwrap(), |j| c(term(j))).unwrap();
        let axis = axis_pick % lo.len();
        prop_assume!(lo[axis] < hi[axis]);
        let cut = (lo[axis] + hi[axis]) / 2;
        let (mut left_hi, mut right_lo) = (hi.clone(), lo.clone());
        left_hi[axis] = cut;
        right_lo[axis] = cut + 1;
        let q = |a: &[usize], b: &[usize]| table.subrect_sum(&LatticeBox::from_coords(a.to_vec(), b.to_vec()).unwrap()).unwrap();
        prop_assert_eq!(q(&lo, &hi), q(&lo, &left_hi) + q(&right_lo, &hi));
    }

    #[test]
    fn extension_keeps_existing_sums((h, lo, hi) in horizon_and_box(3, 6), grow in proptest::collection::vec(0usize..4, 3), seed in any::<u64>()) {
        let term = move |j: &[usize]| c((hashed(seed, j) * 1000.0).round());
        let small = PartialSumTable::from_terms(&MultiIndex::new(h.clone()).unwrap(), term).unwrap();
        let bigger: Vec<usize> = h.iter().zip(&grow).map(|(&a, &g)| a + g).collect();
        let big = small.extend(&MultiIndex::new(bigger).unwrap(), term).unwrap();
        let bx = LatticeBox::from_coords(lo, hi).unwrap();
        prop_assert_eq!(small.subrect_sum(&bx).unwrap(), big.subrect_sum(&bx).unwrap());
    }

    #[test]
    fn folded_blocks_match_enumeration((_h, lo, hi) in horizon_and_box(3, 5), seed in any::<u64>()) {
        let src = SignedTermSource::new(lo.len(), "hashed", move |j: &[i64]| {
            let u: Vec<usize> = j.iter().map(|&x| (x + 64) as usize).collect();
            c(hashed(seed, &u))
        })
        .unwrap();
        let bx = LatticeBox::from_coords(lo, hi).unwrap();
        let fast = symmetric_block_sum(&src, &bx).unwrap();
        let slow = symmetric_block_sum_direct(&src, &bx).unwrap();
        prop_assert!((fast - slow).norm() <= 1e-12 * bx.volume() as f64 * 8.0);
    }

    #[test]
    fn nested_subseries_compose(a in 0usize..10, b in 0usize..10, seed in any::<u64>(), j in proptest::collection::vec(0usize..10, 2)) {
        let src = TermSource::real(4, "hashed", move |j| hashed(seed, j)).unwrap();
        let once = subseries(&src, &[(1, a), (2, b)]).unwrap();
        let twice = subseries(&subseries(&src, &[(1, a)]).unwrap(), &[(1, b)]).unwrap();
        prop_assert_eq!(once.eval(&j), twice.eval(&j));
        prop_assert_eq!(once.eval(&j), src.eval(&[j[0], a, b, j[1]]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn witnesses_shrink_as_eps_grows(m in 1usize..=2, h in 4usize..=12, seed in any::<u64>(), ratio in 0.1f64..0.9) {
        let src = TermSource::real(m, "decaying", move |j| hashed(seed, j) * ratio.powi(j.iter().sum::<usize>() as i32)).unwrap();
        let table = build_table(&src, &MultiIndex::splat(m, h).unwrap()).unwrap();
        let mut prev_p = usize::MAX;
        let mut prev_r = usize::MAX;
        for eps in [1e-3, 1e-2, 1e-1, 1.0] {
            let p = pringsheim_diagnose(&table, eps).unwrap();
            let r = regular_diagnose_direct(&table, eps, u128::MAX).unwrap();
            prop_assert!(r.exhaustive);
            let (wp, wr) = (p.witness.unwrap_or(usize::MAX), r.witness.unwrap_or(usize::MAX));
            prop_assert!(wp <= prev_p && wr <= prev_r);
            prev_p = wp;
            prev_r = wr;
        }
    }

    #[test]
    fn diagnoses_are_deterministic(m in 1usize..=3, h in 3usize..=8, seed in any::<u64>()) {
        let src = TermSource::real(m, "hashed", move |j| hashed(seed, j)).unwrap();
        let table = build_table(&src, &MultiIndex::splat(m, h).unwrap()).unwrap();
        prop_assert_eq!(regular_diagnose_direct(&table, 0.5, 1 << 20).unwrap(), regular_diagnose_direct(&table, 0.5, 1 << 20).unwrap());
        prop_assert_eq!(pringsheim_diagnose(&table, 0.5).unwrap(), pringsheim_diagnose(&table, 0.5).unwrap());
    }

    #[test]
    fn successive_sums_of_finite_support_are_exact(m in 1usize..=3, support in 1usize..6, seed in any::<u64>()) {
        // Positive terms keep every inner sum away from zero, so no axis stops early.
        let src = TermSource::real(m, "finite", move |j| {
            if j.iter().all(|&k| k < support) { 0.75 + 0.25 * hashed(seed, j) } else { 0.0 }
        })
        .unwrap();
        let exact = brute_sum(&vec![0; m], &vec![support - 1; m], |j| src.eval(j).re);
        let plan = SummationPlan::uniform(m, 1e-9, 64).unwrap();
        let sweep = permutation_sweep(&src, &plan).unwrap();
        for r in &sweep.results {
            prop_assert!(r.conclusive());
            prop_assert!((r.value.re - exact).abs() <= 1e-12 * exact.abs().max(1.0));
        }
        prop_assert_eq!(successive_sum(&src, &plan).unwrap(), successive_sum(&src, &plan).unwrap());
    }

    #[test]
    fn geometric_series_in_one_dimension(r in -0.9f64..0.9, tol in 1e-10f64..1e-4) {
        let src = TermSource::real(1, "geometric", move |j| r.powi(j[0] as i32)).unwrap();
        let got = successive_sum(&src, &SummationPlan::uniform(1, tol, 1 << 16).unwrap()).unwrap();
        prop_assert!(got.conclusive());
        prop_assert!((got.value.re - 1.0 / (1.0 - r)).abs() <= tol / (1.0 - r.abs()));
    }
}

fn expo(m: usize, rates: Vec<f64>) -> IntegrandSource {
    IntegrandSource::new(m, "expo", Smoothness::Smooth, move |t| {
        c(t.iter().zip(&rates).map(|(x, a)| -a * x).sum::<f64>().exp())
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gauss_legendre_is_exact_on_low_degree(q in 1usize..=12, coeffs in proptest::collection::vec(-1.0f64..1.0, 24), a in -2.0f64..0.0, b in 0.0f64..2.0) {
        let deg = 2 * q - 1;
        let cf = coeffs[..=deg].to_vec();
        let rule = Rule::new(q).unwrap();
        let cf1 = cf.clone();
        let got = rule.integrate_1d(move |t| c(cf1.iter().rev().fold(0.0, |acc, k| acc * t + k)), a, b).unwrap();
        let anti = |t: f64| cf.iter().enumerate().map(|(i, k)| k * t.powi(i as i32 + 1) / (i + 1) as f64).sum::<f64>();
        let want = anti(b) - anti(a);
        let scale: f64 = cf.iter().map(|k| k.abs()).sum::<f64>() * 2f64.powi(deg as i32 + 1);
        prop_assert!((got.re - want).abs() <= 1e-13 * scale);
    }

    #[test]
    fn cell_split_additivity(m in 1usize..=3, rates in proptest::collection::vec(0.1f64..2.0, 3), frac in 0.1f64..0.9, axis_pick in any::<usize>()) {
        let src = expo(m, rates);
        let rule = Rule::new(8).unwrap();
        let lo = vec![0.5; m];
        let hi = vec![1.0; m];
        let axis = axis_pick % m;
        let cut = 0.5 + 0.5 * frac;
        let (mut lh, mut rl) = (hi.clone(), lo.clone());
        lh[axis] = cut;
        rl[axis] = cut;
        let whole = rule.integrate_box(&src, &lo, &hi).unwrap();
        let parts = rule.integrate_box(&src, &lo, &lh).unwrap() + rule.integrate_box(&src, &rl, &hi).unwrap();
        prop_assert!((whole - parts).norm() <= 1e-12);
    }

    #[test]
    fn cached_cells_equal_fresh_cells(m in 1usize..=3, rates in proptest::collection::vec(0.1f64..2.0, 3), cell in proptest::collection::vec(0usize..4, 3)) {
        let src = expo(m, rates);
        let grid = PanelGrid::new(&src, 0.5, 6, &MultiIndex::splat(m, 3).unwrap()).unwrap();
        let cell = MultiIndex::new(cell[..m].to_vec()).unwrap();
        prop_assert_eq!(grid.cell(cell.coords()), cell_integral(&src, &cell, 0.5, 6).unwrap());
    }

    #[test]
    fn boxes_reduce_to_anchored_rectangles(m in 1usize..=3, rates in proptest::collection::vec(0.1f64..2.0, 3), ends in proptest::collection::vec((0.0f64..3.0, 0.0f64..3.0), 3)) {
        let src = expo(m, rates);
        let table = IntegralTable::build(&src, 0.25, 8, &vec![3.0; m]).unwrap();
        let (lo, hi): (Vec<f64>, Vec<f64>) = ends[..m].iter().map(|&(a, b)| (a.min(b), a.max(b))).unzip();
        let direct = table.subrect_integral(&RealBox::new(lo.clone(), hi.clone()).unwrap()).unwrap();
        let mut by_corners = Complex64::new(0.0, 0.0);
        for mask in 0..1usize << m {
            let v: Vec<f64> = (0..m).map(|p| if (mask >> p) & 1 == 1 { lo[p] } else { hi[p] }).collect();
            let s = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            by_corners += table.rect_integral(&v).unwrap() * s;
        }
        prop_assert!((direct - by_corners).norm() <= 1e-12);
    }

    #[test]
    fn refining_the_grid_keeps_integrals(m in 1usize..=2, rates in proptest::collection::vec(0.1f64..2.0, 2), v in proptest::collection::vec(0.0f64..2.0, 2)) {
        let src = expo(m, rates);
        let coarse = IntegralTable::build(&src, 0.5, 8, &vec![2.0; m]).unwrap();
        let fine = IntegralTable::build(&src, 0.25, 8, &vec![2.0; m]).unwrap();
        let v = &v[..m];
        prop_assert!((coarse.rect_integral(v).unwrap() - fine.rect_integral(v).unwrap()).norm() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn split_choice_does_not_matter_for_separable_integrands(rates in proptest::collection::vec(1.0f64..2.0, 3), a in 0.0f64..1.5, b in 0.5f64..2.0) {
        let fwd = expo(3, rates.clone());
        let rev = expo(3, rates.iter().rev().copied().collect());
        let ta = IntegralTable::build(&fwd, 0.25, 8, &[2.0, 32.0, 32.0]).unwrap();
        let tb = IntegralTable::build(&rev, 0.25, 8, &[32.0, 32.0, 2.0]).unwrap();
        let ja = iterated_limit(&ta, &SplitSpec::new(3, vec![0]).unwrap(), &RealBox::new(vec![a], vec![a + b / 4.0]).unwrap(), 1e-6).unwrap();
        let jb = iterated_limit(&tb, &SplitSpec::new(3, vec![2]).unwrap(), &RealBox::new(vec![a], vec![a + b / 4.0]).unwrap(), 1e-6).unwrap();
        prop_assert!(ja.stabilized && jb.stabilized);
        prop_assert!((ja.value - jb.value).norm() <= 1e-12);
    }

    #[test]
    fn iterated_limits_are_additive(rates in proptest::collection::vec(1.0f64..2.0, 3), a in 0.0f64..1.0, w in 0.25f64..1.0, frac in 0.1f64..0.9) {
        let eps = 1e-8;
        let table = IntegralTable::build(&expo(3, rates), 0.25, 8, &[2.0, 2.0, 48.0]).unwrap();
        let split = SplitSpec::leading(3, 2).unwrap();
        let j = |lo: Vec<f64>, hi: Vec<f64>| iterated_limit(&table, &split, &RealBox::new(lo, hi).unwrap(), eps).unwrap();
        let cut = a + w * frac;
        let whole = j(vec![a, 0.0], vec![a + w, 1.0]);
        let left = j(vec![a, 0.0], vec![cut, 1.0]);
        let right = j(vec![cut, 0.0], vec![a + w, 1.0]);
        prop_assert!(whole.stabilized && left.stabilized && right.stabilized);
        prop_assert!((whole.value - left.value - right.value).norm() <= 3.0 * eps);
    }
}

#[test]
fn rejected_inputs() {
    let src = expo(2, vec![1.0, 1.0]);
    assert!(IntegralTable::build(&src, 0.25, 8, &[1.0]).is_err());
    let table = IntegralTable::build(&src, 0.25, 8, &[1.0, 1.0]).unwrap();
    assert!(table.rect_integral(&[2.0, 0.5]).is_err());
    assert!(Arc::new(table).subrect_integral(&RealBox::new(vec![0.0, 0.0], vec![0.5, 0.5]).unwrap()).is_ok());
}
