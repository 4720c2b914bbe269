mod common;

use proptest::prelude::*;
use stefan_core::model::{spherical_lift, spherical_reduce, Geometry, ProblemSpec};
use stefan_core::series::{HeatSeries, StefanConvention};
use stefan_core::solver::solve;
use stefan_core::Error;

fn taylor_eval(c: &[f64], x: f64) -> f64 {
    let mut fact = 1.0;
    let mut sum = 0.0;
    for (n, v) in c.iter().enumerate() {
        if n > 0 {
            fact *= n as f64;
        }
        sum += v * x.powi(n as i32) / fact;
    }
    sum
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reduced_initial_data_is_r_times_f(spec in common::spherical_problem(), x in 0.0f64..1.0) {
        let g = spherical_reduce(&spec).unwrap();
        prop_assert_eq!(g.geometry, Geometry::Planar);
        prop_assert_eq!(g.trace_radius, Some(spec.b));
        let want = (x + spec.b) * taylor_eval(&spec.f_taylor, x);
        prop_assert!((taylor_eval(&g.f_taylor, x) - want).abs() <= 1e-12 * (1.0 + want.abs()));
    }

    #[test]
    fn lift_after_reduce_is_identity(spec in common::spherical_problem(), dx in 0.0f64..2.0, t in 0.01f64..1.0) {
        let sol = solve(&spec, StefanConvention::Derived).unwrap();
        let field = sol.spherical_field().unwrap();
        let r = spec.b + dx;
        let v = sol.temperature(dx, t).unwrap();
        prop_assert!((field.temperature(r, t).unwrap() * r - v).abs() <= 1e-12 * (1.0 + v.abs()));
    }

    #[test]
    fn spec_json_round_trip(spec in common::general_problem()) {
        let text = serde_json::to_string(&spec).unwrap();
        let back: ProblemSpec = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert!(back.validate().is_ok());
    }

    #[test]
    fn incompatible_initial_data_is_rejected(spec in common::sqrt_problem(), shift in 0.1f64..1.0) {
        let mut bad = spec;
        bad.f_taylor[0] += shift;
        match bad.validate() {
            Err(Error::Invalid(v)) => prop_assert!(v.iter().any(|v| v.field == "f_taylor")),
            other => prop_assert!(false, "{:?}", other.map(|_| ())),
        }
    }
}

#[test]
fn steady_profile_lifts_to_a_constant() {
    // v(x, t) = x + b  ⇒  θ ≡ 1
    let b = 1.0;
    // (2a√t)[i¹erfc(−ξ) − i¹erfc(ξ)] = x and (b/2)[erfc(ξ) + erfc(−ξ)] = b
    let s = HeatSeries::new(1.0, vec![b / 2.0, -0.5], vec![b / 2.0, 0.5]).unwrap();
    let field = spherical_lift(&s, &s, &stefan_core::model::FrontExpansion::sqrt_front(1.0), b).unwrap();
    for t in [0.1, 0.5, 1.0] {
        for r in [1.0, 1.3, 2.0, 4.0] {
            assert!((field.temperature(r, t).unwrap() - 1.0).abs() <= 1e-14);
        }
    }
    assert!(field.temperature(0.5, 0.1).is_err());
}

#[test]
fn erfc_profile_at_contact_radius() {
    let b = 2.0;
    let s = HeatSeries::new(1.0, vec![b], vec![0.0]).unwrap();
    let field = spherical_lift(&s, &s, &stefan_core::model::FrontExpansion::sqrt_front(1.0), b).unwrap();
    for t in [0.01, 0.3, 1.0] {
        assert!((field.temperature(b, t).unwrap() - 1.0).abs() <= 1e-15);
    }
}
