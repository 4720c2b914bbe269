mod common;

use proptest::collection::vec;
use proptest::prelude::*;
use stefan_core::collocation::{collocate, linspace, relative_error_curve, CollocationPlan};
use stefan_core::model::ProblemSpec;
use stefan_core::series::{FluxSeries, StefanConvention};
use stefan_core::solver::solve;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Linear initial data and a `√t` front are represented exactly by three terms.
    #[test]
    fn exact_problems_are_recovered(spec in common::sqrt_problem(), conv_printed in any::<bool>()) {
        let mut spec = spec;
        spec.f_taylor.truncate(2);
        let conv = if conv_printed { StefanConvention::Printed } else { StefanConvention::Derived };
        let exact = solve(&spec, conv).unwrap();
        let approx = collocate(&spec, &CollocationPlan::default(), conv).unwrap();
        prop_assert!(approx.residual_report.max() <= 1e-10);
        for n in 0..=2 {
            let tol = 1e-8 * (1.0 + exact.phase1.plus(n).abs());
            prop_assert!((exact.phase1.plus(n) - approx.phase1.plus(n)).abs() <= tol);
            prop_assert!((exact.phase1.minus(n) - approx.phase1.minus(n)).abs() <= tol);
        }
    }

    #[test]
    fn any_three_instants_give_a_solvable_system(
        mut pts in vec(0.01f64..1.0, 3),
        with_origin in any::<bool>(),
    ) {
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assume!(pts.windows(2).all(|w| w[1] - w[0] > 0.02));
        if with_origin {
            pts[0] = 0.0;
        }
        let spec = ProblemSpec::test_problem();
        let plan = CollocationPlan { points: pts, ..CollocationPlan::default() };
        let s = collocate(&spec, &plan, StefanConvention::Derived).unwrap();
        prop_assert!(s.residual_report.max() <= 1e-10);
        prop_assert!((s.phase1.minus(1) - 0.5).abs() <= 1e-8);
    }

    #[test]
    fn error_curve_of_a_scaled_flux(singular in -1.0f64..1.0, p0 in 0.5f64..2.0, c in 0.5f64..1.5) {
        let e = FluxSeries { singular, p: vec![p0] };
        let a = FluxSeries { singular: c * singular, p: vec![c * p0] };
        let curve = relative_error_curve(&e, &a, &linspace(0.05, 1.0, 20));
        for s in &curve.samples {
            if let Some(r) = s.rel_err {
                prop_assert!((r - (1.0 - c).abs()).abs() <= 1e-12 * (1.0 + r));
            }
        }
    }
}

#[test]
fn more_points_never_worsen_the_flux() {
    let spec = ProblemSpec::test_problem();
    for conv in [StefanConvention::Derived, StefanConvention::Printed] {
        let exact = solve(&spec, conv).unwrap();
        let errs: Vec<f64> = [3, 5, 9]
            .iter()
            .map(|&n| {
                let plan = CollocationPlan::uniform(n, 1.0, 3);
                let s = collocate(&spec, &plan, conv).unwrap();
                relative_error_curve(&exact.flux, &s.flux, &plan.t_grid).max_rel_err
            })
            .collect();
        assert!(errs.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{conv}: {errs:?}");
    }
}
