use coupon_core::collector::{
    closed_form_curve, expectation_as, recurrence_curve, tail_almost_uniform_curve, tail_curve, TailMethod,
};
use coupon_core::combinatorics::Limits;
use coupon_core::majorization::{check_theorem2, check_theorem3, flatten_to_v, lemma2_residual, lemma3_gap, mix_pair};
use coupon_core::oracle::{markov_tail_curves, sequence_enumeration_curves};
use coupon_core::{ArithmeticMode, DrawDistribution, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn r(n: u64, d: u64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `p_i = a_i / (a_0 + sum a)` with small integer parts.
fn distribution(max_n: usize) -> impl Strategy<Value = DrawDistribution> {
    (1..=max_n)
        .prop_flat_map(|n| (prop::collection::vec(1u64..12, n), 0u64..12))
        .prop_filter_map("single coupon needs a null mass", |(parts, a0)| {
            let a0 = if parts.len() == 1 { a0.max(1) } else { a0 };
            let d: u64 = parts.iter().sum::<u64>() + a0;
            DrawDistribution::new(parts.iter().map(|&a| r(a, d)).collect()).ok()
        })
}

fn unit_interval() -> impl Strategy<Value = Rational> {
    (1u64..=12).prop_flat_map(|d| (0..=d).prop_map(move |a| r(a, d)))
}

fn exact_curve(p: &DrawDistribution, c: usize, k_max: usize) -> Vec<Rational> {
    closed_form_curve::<Rational>(p, c, k_max, &Limits::default()).unwrap().0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tail_is_permutation_invariant(p in distribution(5), seed in any::<u64>(), k in 0usize..15) {
        let n = p.len();
        let mut order: Vec<usize> = (0..n).collect();
        // deterministic shuffle from the seed
        for i in (1..n).rev() {
            order.swap(i, (seed as usize ^ i.wrapping_mul(2654435761)) % (i + 1));
        }
        let q = p.permuted(&order).unwrap();
        for c in 1..=n {
            prop_assert_eq!(exact_curve(&p, c, k).pop(), exact_curve(&q, c, k).pop());
        }
    }

    #[test]
    fn tail_is_a_survival_function(p in distribution(5)) {
        for c in 1..=p.len() {
            let t = exact_curve(&p, c, 20);
            prop_assert!(t.iter().take(c).all(One::is_one));
            prop_assert!(t.windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(t.iter().all(|x| !x.is_negative()));
        }
        // more coupons to collect, later completion
        for c in 1..p.len() {
            let lo = exact_curve(&p, c, 12);
            let hi = exact_curve(&p, c + 1, 12);
            prop_assert!(lo.iter().zip(&hi).all(|(a, b)| a <= b));
        }
    }

    #[test]
    fn independent_methods_agree(p in distribution(4), k_max in 0usize..7) {
        let chain = markov_tail_curves::<Rational>(&p, k_max).unwrap();
        let seq = sequence_enumeration_curves(&p, k_max).unwrap();
        for c in 1..=p.len() {
            let closed = exact_curve(&p, c, k_max);
            let rec = recurrence_curve::<Rational>(&p, c, k_max, &Limits::default()).unwrap();
            prop_assert_eq!(&closed, &rec);
            prop_assert_eq!(&closed, &chain[c - 1]);
            prop_assert_eq!(&closed, &seq[c - 1]);
        }
    }

    #[test]
    fn float_tracks_exact(p in distribution(6)) {
        for c in 1..=p.len() {
            let exact = tail_curve(&p, c, 30, ArithmeticMode::Exact, TailMethod::ClosedForm, &Limits::default()).unwrap();
            let float = tail_curve(&p, c, 30, ArithmeticMode::Float, TailMethod::ClosedForm, &Limits::default()).unwrap();
            for (e, f) in exact.tail.iter().zip(&float.tail) {
                prop_assert!((e.to_f64() - f.to_f64()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn flat_formula_matches_subsets(n in 1usize..6, a0 in 0u64..10) {
        let v0 = r(a0, 10);
        let v = DrawDistribution::almost_uniform(n, &v0);
        prop_assume!(v.is_ok());
        let v = v.unwrap();
        for c in 1..=n {
            let fast = tail_almost_uniform_curve::<Rational>(n, c, &v0, 15).unwrap().0;
            prop_assert_eq!(fast, exact_curve(&v, c, 15));
        }
    }

    #[test]
    fn mixing_conserves_mass(p in distribution(6), lambda in unit_interval(), a in 0usize..6, b in 0usize..6) {
        let n = p.len();
        prop_assume!(n >= 2);
        let (i, j) = (a % n, b % n);
        prop_assume!(i != j);
        let step = mix_pair(&p, i, j, &lambda).unwrap();
        prop_assert_eq!(step.after.total(), p.total());
        prop_assert_eq!(step.after.null_mass(), p.null_mass());
        for k in (0..n).filter(|&k| k != i && k != j) {
            prop_assert_eq!(&step.after.weights()[k], &p.weights()[k]);
        }
        if lambda.is_one() {
            prop_assert_eq!(&step.after, &p);
        }
    }

    #[test]
    fn mixing_never_lowers_full_collection_cdf(p in distribution(4), lambda in unit_interval(), a in 0usize..4, b in 0usize..4) {
        let n = p.len();
        prop_assume!(n >= 2);
        let (i, j) = (a % n, b % n);
        prop_assume!(i != j);
        prop_assert!(!check_theorem3(&p, i, j, &lambda, 20).unwrap().is_negative());
    }

    #[test]
    fn flattening_reaches_v(p in distribution(6)) {
        let trace = flatten_to_v(&p, None).unwrap();
        prop_assert!(trace.steps.len() < p.len().max(1));
        prop_assert_eq!(trace.end(), &p.flattened());
        let target = p.flat_share();
        let pinned = |d: &DrawDistribution| d.weights().iter().filter(|w| **w == target).count();
        for s in &trace.steps {
            prop_assert!(pinned(&s.after) > pinned(&s.before));
        }
        // expectations weakly decrease along the trace
        let limits = Limits::default();
        for c in 1..=p.len() {
            let e: Vec<Rational> = trace.vectors().map(|d| expectation_as::<Rational>(d, c, &limits).unwrap().0).collect();
            prop_assert!(e.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn expectation_ordering(p in distribution(5)) {
        for c in 1..=p.len() {
            let m = check_theorem2(&p, c).unwrap();
            prop_assert!(!m.first.is_negative() && !m.second.is_negative());
            if p.is_almost_uniform() {
                prop_assert!(m.first.is_zero());
            }
            if p.null_mass().is_zero() {
                prop_assert!(m.second.is_zero());
            }
        }
    }

    #[test]
    fn reciprocal_sum_at_least_n_squared(parts in prop::collection::vec(1u64..20, 1..7)) {
        let d: u64 = parts.iter().sum();
        let rs: Vec<Rational> = parts.iter().map(|&a| r(a, d)).collect();
        let res = lemma2_residual(&rs).unwrap();
        prop_assert!(!res.is_negative());
        prop_assert_eq!(res.is_zero(), parts.iter().all(|&a| a == parts[0]));
    }

    #[test]
    fn convexity_gap_nonnegative(s in 1u32..7, mut pts in prop::collection::vec(0u64..=24, 4)) {
        pts.sort_unstable();
        pts.dedup();
        prop_assume!(pts.len() == 4);
        let x = r(pts[0], 24);
        let t = r(pts[3], 24);
        for (y, z) in [(r(pts[1], 24), r(pts[2], 24)), (r(pts[2], 24), r(pts[1], 24))] {
            prop_assert!(!lemma3_gap(s, &x, &y, &z, &t).unwrap().is_negative());
        }
    }
}
