use approx::assert_relative_eq;
use hues_core::exec::Execution;
use hues_core::stats::*;
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

fn pts(v: &[(f64, f64)]) -> Vec<Point> {
    v.iter().map(|&(x, y)| Point::new(x, y)).collect()
}

#[test]
fn f_survival_agrees_with_statrs() {
    for &(d1, d2) in &[(2u32, 1u32), (2, 3), (2, 9), (2, 30), (1, 1), (5, 7), (10, 100), (40, 4)] {
        let dist = FisherSnedecor::new(d1 as f64, d2 as f64).unwrap();
        for i in 1..200 {
            let x = i as f64 * 0.05;
            let want = dist.sf(x);
            let got = f_survival(x, d1, d2).unwrap();
            assert!((got - want).abs() < 1e-9, "F({d1},{d2}) at {x}: {got} vs {want}");
        }
    }
}

#[test]
fn f_survival_monotone_on_grid() {
    for &(d1, d2) in &[(2u32, 1u32), (2, 4), (2, 9), (2, 50)] {
        let mut prev = 1.0;
        for i in 0..1000 {
            let p = f_survival(i as f64 * 0.02, d1, d2).unwrap();
            assert!((0.0..=1.0).contains(&p));
            assert!(p <= prev, "not monotone at {i}");
            prev = p;
        }
    }
}

#[test]
fn beta_inc_symmetry() {
    for &(a, b, x) in &[(0.5, 0.5, 0.3), (2.0, 5.0, 0.1), (10.0, 3.0, 0.8)] {
        assert_relative_eq!(beta_inc(a, b, x).unwrap() + beta_inc(b, a, 1.0 - x).unwrap(), 1.0, epsilon = 1e-13);
    }
}

#[test]
fn permutation_modes_agree() {
    let a = pts(&[(0.0, 0.0), (1.0, 0.2), (0.3, 1.1), (0.9, 0.8), (0.1, 0.6), (0.5, 0.4)]);
    let b = pts(&[(0.6, 0.9), (1.4, 0.7), (0.8, 1.6), (1.2, 1.3), (0.9, 1.0)]);
    let s = permutation_test(&a, &b, 3000, 11, Execution::Sequential).unwrap();
    let p = permutation_test(&a, &b, 3000, 11, Execution::Parallel).unwrap();
    assert_eq!(s, p);
    assert_eq!(s.valid_shuffles + s.degenerate_shuffles, 3000);
}

#[test]
fn weighted_test_with_equal_weights_is_unweighted() {
    let a = pts(&[(0.2, 0.1), (0.5, 0.4), (0.3, 0.9), (0.8, 0.2)]);
    let b = pts(&[(1.0, 1.1), (1.3, 0.7), (0.9, 1.4), (1.6, 1.0), (1.1, 0.8)]);
    let u = hotelling_two_sample(&a, &b, DEFAULT_ALPHA).unwrap();
    let w = hotelling_two_sample_weighted(&a, &b, &[2.0; 5], DEFAULT_ALPHA).unwrap();
    assert_relative_eq!(u.t2, w.t2, max_relative = 1e-12);
    assert_relative_eq!(u.p_value, w.p_value, max_relative = 1e-12);
}

fn sample(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
}

fn well_conditioned(a: &[Point], b: &[Point]) -> bool {
    pooled_covariance(a, b).is_ok_and(|c| c.det() > 1e-6 * c.trace().powi(2))
}

proptest! {
    #[test]
    fn t2_affine_invariant(a in sample(3..9), b in sample(3..9),
                           m in ((-2.0..2.0f64), (-2.0..2.0f64), (-2.0..2.0f64), (-2.0..2.0f64)),
                           shift in ((-5.0..5.0f64), (-5.0..5.0f64))) {
        let (a, b) = (pts(&a), pts(&b));
        let det = m.0 * m.3 - m.1 * m.2;
        prop_assume!(det.abs() > 0.1 && well_conditioned(&a, &b));
        let t = |p: &Point| Point::new(m.0 * p.x + m.1 * p.y + shift.0, m.2 * p.x + m.3 * p.y + shift.1);
        let ta: Vec<Point> = a.iter().map(t).collect();
        let tb: Vec<Point> = b.iter().map(t).collect();
        let t1 = hotelling_t2(&a, &b).unwrap();
        let t2 = hotelling_t2(&ta, &tb).unwrap();
        prop_assert!((t1 - t2).abs() <= 1e-8 * t1.max(1.0), "{} vs {}", t1, t2);
    }

    #[test]
    fn t2_symmetric_and_nonnegative(a in sample(2..9), b in sample(2..9)) {
        let (a, b) = (pts(&a), pts(&b));
        prop_assume!(a.len() + b.len() >= 4 && pooled_covariance(&a, &b).is_ok_and(|c| !c.is_singular()));
        let ab = hotelling_two_sample(&a, &b, DEFAULT_ALPHA).unwrap();
        let ba = hotelling_two_sample(&b, &a, DEFAULT_ALPHA).unwrap();
        prop_assert_eq!(ab.t2, ba.t2);
        prop_assert_eq!(ab.p_value, ba.p_value);
        prop_assert!(ab.t2 >= 0.0);
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
    }

    #[test]
    fn f_survival_in_unit_interval(x in 0.0..1e4f64, d1 in 1u32..200, d2 in 1u32..200) {
        let p = f_survival(x, d1, d2).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(f_survival(x * 1.5 + 0.01, d1, d2).unwrap() <= p + 1e-12);
    }

    #[test]
    fn verdict_follows_alpha(p in 0.0..1.0f64, alpha in 0.0..1.0f64) {
        let v = classify_alignment(p, alpha);
        prop_assert_eq!(v == Verdict::Match, p > alpha);
    }
}
