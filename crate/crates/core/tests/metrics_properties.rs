use proptest::prelude::*;
use safeset_core::metrics::{
    loop_epsilon_bar, epsilon_bar_bruteforce, epsilon_bar_exact, epsilon_from_count, fatality_rate_bound, trailing_run,
    trailing_run_pmf, ttc, TTC_CLIP,
};

fn beta() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.5), Just(0.1), Just(0.001), 1e-6..0.999f64]
}

proptest! {
    #[test]
    fn single_bound_decreases_with_count(n in 1usize..100_000, b in beta()) {
        let a = epsilon_from_count(n, b).unwrap();
        let c = epsilon_from_count(n + 1, b).unwrap();
        prop_assert!(a > 0.0 && a < 1.0);
        prop_assert!(c < a);
    }

    #[test]
    fn pmf_is_a_distribution(s in 0usize..=200, c in 0usize..=200) {
        prop_assume!(s + c >= 1 && s + c <= 200);
        let p = trailing_run_pmf(s, c).unwrap();
        prop_assert_eq!(p.len(), s + 1);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        let sum: f64 = p.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12, "sum {}", sum);
    }

    #[test]
    fn replay_expectation_matches_enumeration(labels in prop::collection::vec(any::<bool>(), 1..=8), b in beta()) {
        let s = labels.iter().filter(|l| **l).count();
        let exact = epsilon_bar_exact(s, labels.len() - s, b).unwrap();
        let brute = epsilon_bar_bruteforce(&labels, b, 10).unwrap();
        prop_assert!((exact - brute).abs() < 1e-12);
    }

    #[test]
    fn enumeration_ignores_label_order(mut labels in prop::collection::vec(any::<bool>(), 1..=7), rot in 0usize..7, b in beta()) {
        let before = epsilon_bar_bruteforce(&labels, b, 10).unwrap();
        let k = rot % labels.len();
        labels.rotate_left(k);
        labels.reverse();
        let after = epsilon_bar_bruteforce(&labels, b, 10).unwrap();
        prop_assert!((before - after).abs() < 1e-12);
    }

    #[test]
    fn replay_expectation_lies_between_best_case_and_one(s in 0usize..500, c in 0usize..500, b in beta()) {
        prop_assume!(s + c >= 1);
        let e = epsilon_bar_exact(s, c, b).unwrap();
        let best = epsilon_from_count(s, b).unwrap();
        prop_assert!(e >= best - 1e-12 && e <= 1.0 + 1e-12);
    }

    #[test]
    fn loop_expectation_is_non_negative(t in 1usize..300, frac in 0.0..=1.0f64, b in beta()) {
        let s = ((t as f64) * frac) as usize;
        let v = loop_epsilon_bar(s.min(t), t, b).unwrap();
        prop_assert!(v >= 0.0 && v.is_finite());
    }

    #[test]
    fn trailing_run_is_bounded_by_safe_count(labels in prop::collection::vec(any::<bool>(), 0..50)) {
        let n = trailing_run(&labels);
        prop_assert!(n <= labels.iter().filter(|l| **l).count());
        prop_assert!(n == labels.len() || !labels[labels.len() - 1 - n]);
    }

    #[test]
    fn ttc_is_clipped_and_shift_invariant(v0 in 0.0..40.0f64, v1 in 0.0..40.0f64, p in -5.0..100.0f64, k in 0.0..10.0f64) {
        match ttc(&[v0, v1, p]) {
            Some(t) => {
                prop_assert!(v0 > v1 && p > 0.0);
                prop_assert!(t > 0.0 && t <= TTC_CLIP);
                if let Some(u) = ttc(&[v0 + k, v1 + k, p]) {
                    prop_assert!((t - u).abs() <= 1e-9 * t.max(1.0) + 1e-9 * (v0 + k));
                }
            }
            None => prop_assert!(v0 <= v1 || p <= 0.0),
        }
    }

    #[test]
    fn mileage_bound_decreases_with_distance(km in 0.1..1e5f64, extra in 0.1..1e4f64, b in beta()) {
        let a = fatality_rate_bound(km, b, false).unwrap();
        let c = fatality_rate_bound(km + extra, b, false).unwrap();
        prop_assert!(a > 0.0 && a < 1.0);
        prop_assert!(c <= a);
    }
}
