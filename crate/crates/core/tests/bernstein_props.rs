mod common;

use cfcuc::bernstein::{basis_eval, fit_segment, BernsteinSegment, FitAnchor, PiecewiseBernstein};
use common::bern_ref;
use proptest::prelude::*;

fn coeffs(max_degree: usize) -> impl Strategy<Value = Vec<f64>> {
    (1..=max_degree).prop_flat_map(|n| prop::collection::vec(-50.0f64..50.0, n + 1))
}

fn taus() -> impl Strategy<Value = f64> {
    0.0f64..=1.0
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn eval_matches_power_form(c in coeffs(6), tau in taus()) {
        let s = BernsteinSegment::new(0, c.clone()).unwrap();
        prop_assert!((s.eval(tau).unwrap() - bern_ref(&c, tau)).abs() <= 1e-9);
    }

    #[test]
    fn elevation_keeps_the_curve(c in coeffs(6), extra in 0usize..4, tau in taus()) {
        let s = BernsteinSegment::new(0, c.clone()).unwrap();
        let e = s.elevate(s.degree() + extra).unwrap();
        prop_assert!((e.eval(tau).unwrap() - bern_ref(&c, tau)).abs() <= 1e-9);
    }

    #[test]
    fn product_is_pointwise(a in coeffs(3), b in coeffs(3), tau in taus()) {
        let p = BernsteinSegment::new(0, a.clone()).unwrap()
            .multiply(&BernsteinSegment::new(0, b.clone()).unwrap()).unwrap();
        prop_assert_eq!(p.degree(), a.len() + b.len() - 2);
        prop_assert!((p.eval(tau).unwrap() - bern_ref(&a, tau) * bern_ref(&b, tau)).abs() <= 1e-9);
    }

    #[test]
    fn derivative_matches_central_difference(c in coeffs(6), tau in 0.01f64..0.99) {
        let s = BernsteinSegment::new(0, c.clone()).unwrap();
        let h = 1e-5;
        let fd = (bern_ref(&c, tau + h) - bern_ref(&c, tau - h)) / (2.0 * h);
        let d = s.derivative().eval(tau).unwrap();
        prop_assert!((d - fd).abs() <= 1e-6 * fd.abs().max(1.0));
    }

    #[test]
    fn basis_sums_to_one(n in 0usize..=6, tau in taus()) {
        let sum: f64 = (0..=n).map(|b| basis_eval(b, n, tau).unwrap()).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn curve_stays_in_coefficient_hull(c in coeffs(6), tau in taus()) {
        let s = BernsteinSegment::new(0, c).unwrap();
        let (lo, hi) = s.coeff_bounds();
        let v = s.eval(tau).unwrap();
        prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }

    #[test]
    fn integral_matches_simpson(c in coeffs(6)) {
        let s = BernsteinSegment::new(0, c.clone()).unwrap();
        let n = 2000;
        let h = 1.0 / n as f64;
        let mut acc = bern_ref(&c, 0.0) + bern_ref(&c, 1.0);
        for k in 1..n {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * bern_ref(&c, k as f64 * h);
        }
        prop_assert!((s.integral() - acc * h / 3.0).abs() <= 1e-8);
    }

    #[test]
    fn fit_recovers_a_cubic(c in prop::collection::vec(-20.0f64..20.0, 4)) {
        let samples: Vec<(f64, f64)> = (0..=12).map(|k| {
            let tau = k as f64 / 12.0;
            (tau, bern_ref(&c, tau))
        }).collect();
        let fit = fit_segment(0, &samples, 3, None).unwrap();
        for (got, want) in fit.coeffs().iter().zip(&c) {
            prop_assert!((got - want).abs() <= 1e-8);
        }
        let anchored = fit_segment(0, &samples, 3, Some(FitAnchor { value: c[0], slope: Some(3.0 * (c[1] - c[0])) })).unwrap();
        prop_assert!((anchored.coeffs()[1] - c[1]).abs() <= 1e-8);
    }
}

#[test]
fn mismatched_hours_are_rejected() {
    let a = BernsteinSegment::new(0, vec![1.0, 2.0]).unwrap();
    let b = BernsteinSegment::new(1, vec![1.0, 2.0]).unwrap();
    assert!(a.add(&b).is_err());
    assert!(a.multiply(&b).is_err());
}

#[test]
fn evaluation_outside_the_hour_fails() {
    let a = BernsteinSegment::new(0, vec![1.0, 2.0]).unwrap();
    assert!(a.eval(1.5).is_err());
    assert!(a.eval(-0.1).is_err());
}

#[test]
fn piecewise_continuity_residuals() {
    let pw = PiecewiseBernstein::from_coeffs(vec![vec![0.0, 1.0, 2.0, 3.0], vec![3.0, 4.0, 5.0, 6.0]]).unwrap();
    assert!(pw.is_c0_continuous(1e-12));
    assert!(pw.is_c1_continuous(1e-12));
    let kinked = PiecewiseBernstein::from_coeffs(vec![vec![0.0, 1.0, 2.0, 3.0], vec![3.0, 3.0, 3.0, 3.0]]).unwrap();
    assert!(kinked.is_c0_continuous(1e-12));
    assert!(!kinked.is_c1_continuous(1e-6));
    assert!((pw.eval_time(1.5).unwrap() - 4.5).abs() < 1e-12);
}
