//! Invariant suite shared by the `verify` command and the acceptance tests.
//!
//! Every check is deterministic: sample points and coefficient sets are fixed.

use serde::Serialize;

use crate::collocation::{collocate, linspace, relative_error_curve, CollocationPlan};
use crate::error::Result;
use crate::jets::{jet_compose_basis, jet_product, partial_bell, Jet};
use crate::model::{spherical_reduce, FrontExpansion, Geometry, PhaseParams, ProblemSpec};
use crate::oracle_fd::{
    compare, fit_similarity_coefficient, simulate, BoundaryData, Drive, FrontMode, OracleConfig,
    Similarity,
};
use crate::series::{front_residual_jet, HeatSeries, StefanConvention};
use crate::solver::{
    generate_conditions, solve, solve_sqrt_front, Condition, LinearConditions, Unknown,
};
use crate::specfun::{self, reference, SpecFun, TWO_OVER_SQRT_PI};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn() -> Result<(bool, String)>;

fn run(module: &'static str, checks: &[(&'static str, Check)]) -> Vec<CheckOutcome> {
    checks
        .iter()
        .map(|(name, f)| {
            let (passed, detail) = match f() {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckOutcome {
                module,
                name,
                passed,
                detail,
            }
        })
        .collect()
}

pub fn run_all() -> Vec<CheckOutcome> {
    let mut out = specfun_checks();
    out.extend(jets_checks());
    out.extend(series_checks());
    out.extend(model_checks());
    out.extend(solver_checks());
    out.extend(collocation_checks());
    out.extend(oracle_checks());
    out
}

/// Deterministic values in `[−1, 1]`.
fn sample(k: usize) -> f64 {
    let v = ((k as f64 + 1.0) * 12.9898).sin() * 43758.5453;
    2.0 * (v - v.floor()) - 1.0
}

fn samples(seed: usize, n: usize) -> Vec<f64> {
    (0..n).map(|i| sample(seed * 97 + i)).collect()
}

/// Parameter sets used wherever a check asks for "several problems".
pub fn parameter_sets() -> Vec<ProblemSpec> {
    let raw: [(f64, f64, f64, f64, f64, f64, f64, [f64; 3]); 5] = [
        (1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0, [0.0, 1.0, 0.0]),
        (0.8, 1.1, 1.3, 0.7, 2.0, 0.4, 0.9, [0.4, 1.5, -0.3]),
        (1.5, 0.6, 0.5, 2.0, 0.7, -0.2, 0.6, [-0.2, 0.8, 0.4]),
        (0.6, 0.9, 2.2, 1.1, 1.4, 1.0, 1.3, [1.0, 2.0, 1.0]),
        (1.2, 1.2, 0.9, 0.4, 3.0, 0.0, 0.5, [0.0, -1.0, 0.2]),
    ];
    raw.iter()
        .map(|&(a1, a2, lambda1, lambda2, l_gamma, t_melt, alpha, f)| ProblemSpec {
            geometry: Geometry::Planar,
            b: 0.0,
            f_taylor: f.to_vec(),
            front: FrontExpansion::sqrt_front(alpha),
            params: PhaseParams {
                a1,
                a2,
                lambda1,
                lambda2,
                l_gamma,
                t_melt,
            },
            truncation: 4,
            trace_radius: None,
        })
        .collect()
}

pub fn spherical_example() -> ProblemSpec {
    ProblemSpec {
        geometry: Geometry::Spherical,
        b: 1.0,
        f_taylor: vec![0.0, 1.0, 0.5],
        truncation: 6,
        ..ProblemSpec::test_problem()
    }
}

// ---------------------------------------------------------------- specfun

pub fn specfun_checks() -> Vec<CheckOutcome> {
    run(
        "specfun",
        &[
            ("reflection", check_reflection),
            ("recurrence", check_recurrence),
            ("quadrature cross-check", check_quadrature),
            ("derivative O(h^2)", check_derivative),
            ("values at zero", check_zero_values),
            ("asymptotic ratio", check_asymptotic_ratio),
            ("small-time limits", check_small_time_limits),
        ],
    )
}

fn check_reflection() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for x in linspace(-6.0, 6.0, 241) {
        worst = worst.max((specfun::erfc(x)? + specfun::erfc(-x)? - 2.0).abs());
    }
    Ok((worst <= 1e-12, format!("max |erfc(x)+erfc(-x)-2| = {worst:.2e}")))
}

fn check_recurrence() -> Result<(bool, String)> {
    let sf = SpecFun::default();
    let mut worst = 0.0f64;
    for x in linspace(-4.0, 4.0, 81) {
        for n in 1..=sf.config().max_order as i32 {
            let lhs = 2.0 * n as f64 * sf.inerfc(n, x)?;
            let a = sf.inerfc(n - 2, x)?;
            let b = 2.0 * x * sf.inerfc(n - 1, x)?;
            let scale = a.abs().max(b.abs()).max(lhs.abs());
            worst = worst.max((lhs - (a - b)).abs() / scale);
        }
    }
    Ok((worst <= 1e-9, format!("max relative defect {worst:.2e}")))
}

fn check_quadrature() -> Result<(bool, String)> {
    let sf = SpecFun::default();
    let panels = sf.config().quadrature_panels;
    let mut worst = 0.0f64;
    for x in linspace(-4.0, 4.0, 17) {
        for n in 0..=12usize {
            let fast = sf.inerfc(n as i32, x)?;
            let slow = reference::inerfc(n, x, panels);
            worst = worst.max((fast - slow).abs() / slow.abs());
        }
    }
    Ok((worst <= 1e-9, format!("max relative deviation {worst:.2e}")))
}

fn check_derivative() -> Result<(bool, String)> {
    let sf = SpecFun::default();
    let mut worst_ratio = f64::INFINITY;
    for &(n, x) in &[(1, 0.3), (2, -0.7), (3, 1.4), (5, 0.0), (6, -2.0), (8, 2.5)] {
        let exact = -sf.inerfc(n - 1, x)?;
        let err = |h: f64| -> Result<f64> {
            Ok(((sf.inerfc(n, x + h)? - sf.inerfc(n, x - h)?) / (2.0 * h) - exact).abs())
        };
        let ratio = err(0.02)? / err(0.01)?;
        worst_ratio = worst_ratio.min(ratio);
    }
    Ok((
        worst_ratio >= 3.5,
        format!("smallest error reduction on halving h: {worst_ratio:.2}"),
    ))
}

fn check_zero_values() -> Result<(bool, String)> {
    let sf = SpecFun::default();
    let mut worst = 0.0f64;
    for n in 0..=8 {
        worst = worst.max((sf.inerfc(n, 0.0)? - sf.inerfc_at_zero(n)?).abs());
    }
    Ok((worst <= 1e-12, format!("max deviation {worst:.2e}")))
}

fn check_asymptotic_ratio() -> Result<(bool, String)> {
    let sf = SpecFun::default();
    let mut ok = true;
    let mut worst = 0.0f64;
    for n in 0..=6u32 {
        let devs: Vec<f64> = [50.0, 100.0, 200.0]
            .iter()
            .map(|x| sf.asymptotic_ratio(n, *x).map(|r| (r - 1.0).abs()))
            .collect::<Result<_>>()?;
        ok &= devs[0] <= 1e-2 && devs[1] <= devs[0] && devs[2] <= devs[1];
        worst = worst.max(devs[0]);
    }
    Ok((ok, format!("max |ratio-1| at x=50: {worst:.2e}")))
}

fn check_small_time_limits() -> Result<(bool, String)> {
    let sf = SpecFun::default();
    let (a, b, r): (f64, f64, f64) = (0.8, 1.0, 1.6);
    let d = r - b;
    let mut ok = true;
    let mut last = (0.0f64, 0.0f64);
    for n in 0..=6i32 {
        let target = 2.0 / specfun::factorial(n as usize) * d.powi(n);
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for k in 1..=6 {
            let t = 10f64.powi(-k);
            let w = 2.0 * a * t.sqrt();
            let plus = (w.powi(n) * sf.inerfc(n, d / w)?).abs();
            let minus = (w.powi(n) * sf.inerfc(n, -d / w)? - target).abs();
            ok &= plus <= prev.0 && minus <= prev.1;
            prev = (plus, minus);
        }
        ok &= prev.0 <= 1e-12 && prev.1 <= 1e-4;
        last = (last.0.max(prev.0), last.1.max(prev.1));
    }
    Ok((
        ok,
        format!(
            "at t=1e-6: decaying branch {:.2e}, growing branch off its limit by {:.2e}",
            last.0, last.1
        ),
    ))
}

// ---------------------------------------------------------------- jets

pub fn jets_checks() -> Vec<CheckOutcome> {
    run(
        "jets",
        &[
            ("Bell numbers", check_bell_numbers),
            ("B_k1 and B_kk", check_bell_edges),
            ("compose vs direct expansion", check_compose),
            ("product algebra", check_product_algebra),
        ],
    )
}

fn check_bell_numbers() -> Result<(bool, String)> {
    const BELL: [f64; 9] = [1.0, 1.0, 2.0, 5.0, 15.0, 52.0, 203.0, 877.0, 4140.0];
    let ones = [1.0; 8];
    let mut ok = true;
    for (k, want) in BELL.iter().enumerate().skip(1) {
        let sum: f64 = (1..=k)
            .map(|m| partial_bell(k, m, &ones[..k]))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .sum();
        ok &= sum == *want;
    }
    let b4: f64 = (1..=4)
        .map(|m| partial_bell(4, m, &ones[..4]))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .sum();
    Ok((ok, format!("sum_m B(4,m)(1,...,1) = {b4}")))
}

fn check_bell_edges() -> Result<(bool, String)> {
    let x = samples(3, 8);
    let mut worst = 0.0f64;
    for k in 1..=8 {
        worst = worst.max((partial_bell(k, 1, &x[..k])? - x[k - 1]).abs());
        let want = x[0].powi(k as i32);
        worst = worst.max((partial_bell(k, k, &x[..k])? - want).abs());
    }
    Ok((worst <= 1e-14, format!("max deviation {worst:.2e}")))
}

/// Taylor coefficients of `iⁿerfc(sign·p(τ))` from the plain power series of `iⁿerfc`
/// around `sign·p(0)` and repeated polynomial products.
fn direct_compose(sf: &SpecFun, n: i32, inner: &[f64], sign: f64) -> Result<Vec<f64>> {
    let k = inner.len() - 1;
    let x0 = sign * inner[0];
    let mut delta = vec![0.0; k + 1];
    for i in 1..=k {
        delta[i] = sign * inner[i];
    }
    let mut out = vec![0.0; k + 1];
    let mut power = vec![0.0; k + 1];
    power[0] = 1.0;
    let mut fact = 1.0;
    for j in 0..=k {
        if j > 0 {
            fact *= j as f64;
            let mut next = vec![0.0; k + 1];
            for (a, pa) in power.iter().enumerate() {
                for (b, db) in delta.iter().enumerate().take(k + 1 - a) {
                    next[a + b] += pa * db;
                }
            }
            power = next;
        }
        let deriv = if j % 2 == 0 { 1.0 } else { -1.0 } * sf.inerfc(n - j as i32, x0)?;
        for i in 0..=k {
            out[i] += deriv / fact * power[i];
        }
    }
    Ok(out)
}

fn check_compose() -> Result<(bool, String)> {
    let sf = SpecFun::default();
    let mut worst = 0.0f64;
    let mut case = 0;
    for order in 0..=5usize {
        for n in 0..=4i32 {
            for sign in [1.0, -1.0] {
                case += 1;
                let inner = samples(case, order + 1);
                let jet = jet_compose_basis(&sf, n, &Jet::new(inner.clone())?, sign)?;
                let direct = direct_compose(&sf, n, &inner, sign)?;
                for (a, b) in jet.coeffs().iter().zip(&direct) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    Ok((worst <= 1e-10, format!("{case} cases, max deviation {worst:.2e}")))
}

fn check_product_algebra() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let a = Jet::new(samples(3 * seed + 100, 7))?;
        let b = Jet::new(samples(3 * seed + 101, 7))?;
        let c = Jet::new(samples(3 * seed + 102, 7))?;
        let ab = jet_product(&a, &b)?;
        let ba = jet_product(&b, &a)?;
        let left = jet_product(&ab, &c)?;
        let right = jet_product(&a, &jet_product(&b, &c)?)?;
        for i in 0..=6 {
            worst = worst
                .max((ab.coeff(i) - ba.coeff(i)).abs())
                .max((left.coeff(i) - right.coeff(i)).abs());
        }
    }
    Ok((worst <= 1e-14, format!("max deviation {worst:.2e}")))
}

// ---------------------------------------------------------------- series

pub fn series_checks() -> Vec<CheckOutcome> {
    run(
        "series",
        &[
            ("basis heat residual O(h^2)", check_heat_residual),
            ("flux at origin vs difference quotient", check_flux_fd),
            ("initial limit", check_initial_limit),
        ],
    )
}

fn heat_residual(u: &dyn Fn(f64, f64) -> Result<f64>, a: f64, x: f64, t: f64, h: f64) -> Result<f64> {
    let ut = (u(x, t + h)? - u(x, t - h)?) / (2.0 * h);
    let uxx = (u(x + h, t)? - 2.0 * u(x, t)? + u(x - h, t)?) / (h * h);
    Ok(ut - a * a * uxx)
}

fn unit_series(a: f64, n: usize, plus: bool) -> Result<HeatSeries> {
    let mut p = vec![0.0; n + 1];
    let mut m = vec![0.0; n + 1];
    if plus {
        p[n] = 1.0;
    } else {
        m[n] = 1.0;
    }
    HeatSeries::new(a, p, m)
}

fn check_heat_residual() -> Result<(bool, String)> {
    let a = 0.7;
    let (x, t) = (0.4, 0.5);
    let mut worst_ratio = f64::INFINITY;
    for n in 0..=6 {
        for plus in [true, false] {
            let s = unit_series(a, n, plus)?;
            let u = |x: f64, t: f64| s.evaluate(x, t);
            let r1 = heat_residual(&u, a, x, t, 0.02)?.abs();
            let r2 = heat_residual(&u, a, x, t, 0.01)?.abs();
            worst_ratio = worst_ratio.min(r1 / r2);
        }
    }
    Ok((
        worst_ratio >= 3.5,
        format!("smallest residual reduction on halving h: {worst_ratio:.2}"),
    ))
}

fn check_flux_fd() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for set in 0..5 {
        let p = samples(200 + set, 4);
        let m = samples(300 + set, 4);
        let a = 0.5 + 0.1 * set as f64;
        let lambda = 1.0 + 0.3 * set as f64;
        let s = HeatSeries::new(a, p, m)?;
        let flux = s.flux_at_origin(lambda);
        for t in [0.25, 1.0] {
            let h = 1e-4;
            let fd = -lambda * (s.evaluate(h, t)? - s.evaluate(-h, t)?) / (2.0 * h);
            worst = worst.max((fd - flux.eval(t)).abs());
        }
    }
    Ok((worst <= 1e-6, format!("max deviation {worst:.2e}")))
}

fn check_initial_limit() -> Result<(bool, String)> {
    let mut ok = true;
    let mut worst = 0.0f64;
    for set in 0..4 {
        let m = samples(400 + set, 4);
        let s = HeatSeries::new(0.9, vec![0.0; 4], m)?;
        for x in [0.3, 0.8, 1.5] {
            let e4 = (s.evaluate(x, 1e-4)? - s.initial_limit(x)).abs();
            let e6 = (s.evaluate(x, 1e-6)? - s.initial_limit(x)).abs();
            ok &= e4 <= 1e-3 && e6 <= 1e-3 && e6 <= e4;
            worst = worst.max(e4);
        }
    }
    Ok((ok, format!("max deviation at t=1e-4: {worst:.2e}")))
}

// ---------------------------------------------------------------- model

pub fn model_checks() -> Vec<CheckOutcome> {
    run(
        "model",
        &[
            ("lift after reduce is the identity", check_lift_reduce),
            ("spherical heat residual O(h^2)", check_spherical_residual),
            ("spherical flux bracket", check_flux_bracket),
        ],
    )
}

fn check_lift_reduce() -> Result<(bool, String)> {
    let spec = spherical_example();
    let reduced = spherical_reduce(&spec)?;
    let sol = solve(&spec, StefanConvention::Derived)?;
    let field = sol.spherical_field().expect("spherical solution");
    let b = spec.b;
    let mut worst = 0.0f64;
    for &t in &[0.05, 0.2, 0.7] {
        for r in linspace(b, b + 2.5, 11) {
            let v = sol.temperature(r - b, t)?;
            worst = worst.max((field.temperature(r, t)? * r - v).abs());
        }
    }
    // initial data: g(x) = (x + b)·f(x + b) as Taylor polynomials
    for x in linspace(0.0, 0.5, 6) {
        let f: f64 = spec
            .f_taylor
            .iter()
            .enumerate()
            .map(|(n, c)| c * x.powi(n as i32) / specfun::factorial(n))
            .sum();
        let g: f64 = reduced
            .f_taylor
            .iter()
            .enumerate()
            .map(|(n, c)| c * x.powi(n as i32) / specfun::factorial(n))
            .sum();
        worst = worst.max(((x + b) * f - g).abs());
    }
    Ok((worst <= 1e-12, format!("max deviation {worst:.2e}")))
}

fn check_spherical_residual() -> Result<(bool, String)> {
    let spec = spherical_example();
    let sol = solve(&spec, StefanConvention::Derived)?;
    let field = sol.spherical_field().expect("spherical solution");
    let a = spec.params.a1;
    let mut worst_ratio = f64::INFINITY;
    for &(r, t) in &[(1.2, 0.5), (2.5, 0.5), (1.1, 0.2), (3.0, 0.3)] {
        let res = |h: f64| -> Result<f64> {
            let th = |r: f64, t: f64| field.temperature(r, t);
            let ut = (th(r, t + h)? - th(r, t - h)?) / (2.0 * h);
            let urr = (th(r + h, t)? - 2.0 * th(r, t)? + th(r - h, t)?) / (h * h);
            let ur = (th(r + h, t)? - th(r - h, t)?) / (2.0 * h);
            Ok((ut - a * a * (urr + 2.0 * ur / r)).abs())
        };
        worst_ratio = worst_ratio.min(res(0.02)? / res(0.01)?);
    }
    Ok((
        worst_ratio >= 3.5,
        format!("smallest residual reduction on halving h: {worst_ratio:.2}"),
    ))
}

/// The bracket series `[Aₙ₊₁ − Bₙ₊₁ + (Aₙ + Bₙ)/b]` against a one-sided difference of
/// the lifted temperature at the contact radius.
fn check_flux_bracket() -> Result<(bool, String)> {
    let spec = spherical_example();
    let sol = solve(&spec, StefanConvention::Derived)?;
    let field = sol.spherical_field().expect("spherical solution");
    let lambda = spec.params.lambda1;
    let series = field.flux_series(lambda);
    let b = spec.b;
    let h = 1e-5;
    let mut worst = 0.0f64;
    for t in [0.1, 0.4, 0.9] {
        let th = |r: f64| field.temperature(r, t);
        let dr = (-3.0 * th(b)? + 4.0 * th(b + h)? - th(b + 2.0 * h)?) / (2.0 * h);
        worst = worst
            .max((series.eval(t) + lambda * dr).abs())
            .max((series.eval(t) - field.boundary_flux(lambda, t)?).abs());
    }
    Ok((worst <= 1e-6, format!("max deviation {worst:.2e}")))
}

// ---------------------------------------------------------------- solver

pub fn solver_checks() -> Vec<CheckOutcome> {
    run(
        "solver",
        &[
            ("front residuals vanish", check_front_residuals),
            ("phase-2 closed form vs generated rows", check_phase2_closed_form),
            ("identical phases", check_identical_phases),
            ("interface relation n >= 1", check_interface_relation),
            ("generated rows k <= 1 vs hand expansion", check_hand_rows),
        ],
    )
}

fn check_front_residuals() -> Result<(bool, String)> {
    let mut problems = parameter_sets();
    let mut general = ProblemSpec::test_problem();
    general.front.alphas = vec![1.0, 0.2, -0.05];
    problems.push(general);
    problems.push(spherical_example());
    let mut worst = 0.0f64;
    for spec in &problems {
        let sol = solve(spec, StefanConvention::Derived)?;
        let work = match spec.geometry {
            Geometry::Spherical => spherical_reduce(spec)?,
            Geometry::Planar => spec.clone(),
        };
        let r = front_residual_jet(
            &sol.phase1,
            &sol.phase2,
            &work,
            work.truncation,
            StefanConvention::Derived,
        )?;
        worst = r.max_abs().iter().fold(worst, |acc, v| acc.max(*v));
    }
    Ok((
        worst <= 1e-9,
        format!("{} problems, max residual {worst:.2e}", problems.len()),
    ))
}

fn check_phase2_closed_form() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for spec in parameter_sets() {
        let closed = solve_sqrt_front(&spec, StefanConvention::Derived)?;
        let general = solve(&spec, StefanConvention::Derived)?;
        for n in 0..=spec.truncation {
            worst = worst.max((closed.phase2.plus(n) - general.phase2.plus(n)).abs());
        }
    }
    Ok((worst <= 1e-10, format!("max deviation {worst:.2e}")))
}

fn check_identical_phases() -> Result<(bool, String)> {
    let mut second = ProblemSpec::test_problem();
    second.params = PhaseParams {
        a1: 0.6,
        a2: 0.6,
        lambda1: 1.7,
        lambda2: 1.7,
        l_gamma: 0.5,
        t_melt: 0.3,
    };
    second.f_taylor = vec![0.3, 2.0];
    second.front = FrontExpansion::sqrt_front(0.8);
    let mut worst = 0.0f64;
    for spec in [ProblemSpec::test_problem(), second] {
        let s = solve_sqrt_front(&spec, StefanConvention::Derived)?;
        for n in 1..=spec.truncation {
            worst = worst
                .max((s.phase1.plus(n) - s.phase2.plus(n)).abs())
                .max((s.phase1.minus(n) - s.phase2.minus(n)).abs());
        }
    }
    Ok((worst <= 1e-9, format!("max deviation {worst:.2e}")))
}

fn check_interface_relation() -> Result<(bool, String)> {
    let sf = SpecFun::default();
    let mut worst = 0.0f64;
    for spec in parameter_sets() {
        let s = solve(&spec, StefanConvention::Derived)?;
        let xi = spec.front.alphas[0] / (2.0 * spec.params.a1);
        for n in 1..=spec.truncation {
            let (p, m) = (sf.inerfc(n as i32, xi)?, sf.inerfc(n as i32, -xi)?);
            let scale = 1.0 + (s.phase1.plus(n) * p).abs() + (s.phase1.minus(n) * m).abs();
            worst = worst.max((s.phase1.plus(n) * p + s.phase1.minus(n) * m).abs() / scale);
        }
    }
    Ok((worst <= 1e-12, format!("max defect {worst:.2e}")))
}

/// Rows of orders 0 and 1 written out by hand for a `√t` front.
pub fn hand_rows(spec: &ProblemSpec) -> Result<Vec<(Condition, usize, Vec<(Unknown, f64)>, f64)>> {
    let sf = SpecFun::default();
    let p = &spec.params;
    let alpha = spec.front.alphas[0];
    let (x1, x2) = (alpha / (2.0 * p.a1), alpha / (2.0 * p.a2));
    let d0 = 0.5 * spec.initial_derivative(0);
    let d1 = 0.5 * spec.initial_derivative(1);
    let g1 = TWO_OVER_SQRT_PI * (-x1 * x1).exp() / (2.0 * p.a1);
    let g2 = TWO_OVER_SQRT_PI * (-x2 * x2).exp() / (2.0 * p.a2);
    let i1 = |n: i32, x: f64| sf.inerfc(n, x);
    Ok(vec![
        (
            Condition::Interface1,
            0,
            vec![(Unknown::A(0), i1(0, x1)?), (Unknown::B(0), i1(0, -x1)?)],
            p.t_melt,
        ),
        (
            Condition::Interface2,
            0,
            vec![(Unknown::C(0), i1(0, x2)?)],
            p.t_melt - d0 * i1(0, -x2)?,
        ),
        (
            Condition::Stefan,
            0,
            vec![
                (Unknown::A(0), -p.lambda1 * g1),
                (Unknown::B(0), p.lambda1 * g1),
                (Unknown::C(0), p.lambda2 * g2),
            ],
            p.lambda2 * d0 * g2 - p.l_gamma * alpha / 2.0,
        ),
        (
            Condition::Interface1,
            1,
            vec![
                (Unknown::A(1), 2.0 * p.a1 * i1(1, x1)?),
                (Unknown::B(1), 2.0 * p.a1 * i1(1, -x1)?),
            ],
            0.0,
        ),
        (
            Condition::Interface2,
            1,
            vec![(Unknown::C(1), 2.0 * p.a2 * i1(1, x2)?)],
            -d1 * 2.0 * p.a2 * i1(1, -x2)?,
        ),
        (
            Condition::Stefan,
            1,
            vec![
                (Unknown::A(1), -p.lambda1 * i1(0, x1)?),
                (Unknown::B(1), p.lambda1 * i1(0, -x1)?),
                (Unknown::C(1), p.lambda2 * i1(0, x2)?),
            ],
            p.lambda2 * d1 * i1(0, -x2)?,
        ),
    ])
}

/// Largest deviation between generated rows of order ≤ 1 and [`hand_rows`].
pub fn hand_row_deviation(spec: &ProblemSpec) -> Result<f64> {
    let sys: LinearConditions = generate_conditions(spec, 1, StefanConvention::Derived)?;
    let mut worst = 0.0f64;
    for (cond, k, entries, rhs) in hand_rows(spec)? {
        let row = sys.row_index(cond, k);
        for (j, u) in sys.unknowns.iter().enumerate() {
            let want = entries
                .iter()
                .find(|(v, _)| v == u)
                .map(|(_, c)| *c)
                .unwrap_or(0.0);
            worst = worst.max((sys.matrix[(row, j)] - want).abs());
        }
        worst = worst.max((sys.rhs[row] - rhs).abs());
    }
    Ok(worst)
}

fn check_hand_rows() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for spec in parameter_sets() {
        worst = worst.max(hand_row_deviation(&spec)?);
    }
    Ok((worst <= 1e-12, format!("max deviation {worst:.2e}")))
}

// ---------------------------------------------------------------- collocation

pub fn collocation_checks() -> Vec<CheckOutcome> {
    run(
        "collocation",
        &[
            ("square-system residuals", check_collocation_residuals),
            ("more points never worsen", check_collocation_refinement),
            ("exact problem recovered", check_collocation_exact),
        ],
    )
}

fn check_collocation_residuals() -> Result<(bool, String)> {
    let mut general = ProblemSpec::test_problem();
    general.front.alphas = vec![1.0, 0.2];
    general.f_taylor = vec![0.0, 1.0, 0.5];
    let mut worst = 0.0f64;
    let mut specs = vec![ProblemSpec::test_problem(), general];
    specs.extend(parameter_sets().into_iter().skip(1));
    for spec in &specs {
        for conv in [StefanConvention::Derived, StefanConvention::Printed] {
            let s = collocate(spec, &CollocationPlan::default(), conv)?;
            worst = worst.max(s.residual_report.max());
        }
    }
    Ok((worst <= 1e-10, format!("max residual {worst:.2e}")))
}

/// Max relative flux error of collocation with `n` uniform points on `[0, 1]`.
pub fn collocation_error(spec: &ProblemSpec, n: usize, conv: StefanConvention) -> Result<f64> {
    let exact = solve(spec, conv)?;
    let plan = CollocationPlan::uniform(n, 1.0, 3);
    let approx = collocate(spec, &plan, conv)?;
    Ok(relative_error_curve(&exact.flux, &approx.flux, &plan.t_grid).max_rel_err)
}

fn check_collocation_refinement() -> Result<(bool, String)> {
    let spec = ProblemSpec::test_problem();
    let mut ok = true;
    let mut detail = Vec::new();
    for conv in [StefanConvention::Derived, StefanConvention::Printed] {
        let errs: Vec<f64> = [3, 5, 9]
            .iter()
            .map(|n| collocation_error(&spec, *n, conv))
            .collect::<Result<_>>()?;
        ok &= errs.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        detail.push(format!("{conv}: {:.1e}/{:.1e}/{:.1e}", errs[0], errs[1], errs[2]));
    }
    Ok((ok, detail.join(", ")))
}

fn check_collocation_exact() -> Result<(bool, String)> {
    let spec = ProblemSpec::test_problem();
    let exact = solve(&spec, StefanConvention::Derived)?;
    let approx = collocate(&spec, &CollocationPlan::default(), StefanConvention::Derived)?;
    let dev = (exact.phase1.plus(1) - approx.phase1.plus(1))
        .abs()
        .max((exact.phase1.minus(1) - approx.phase1.minus(1)).abs());
    Ok((dev <= 1e-8, format!("A1/B1 deviation {dev:.2e}")))
}

// ---------------------------------------------------------------- oracle

pub fn oracle_checks() -> Vec<CheckOutcome> {
    run(
        "oracle_fd",
        &[
            ("one-phase front coefficient", check_one_phase_lambda),
            ("grid convergence order", check_grid_order),
            ("energy bookkeeping", check_energy),
            ("test problem with prescribed front", check_prescribed_front),
        ],
    )
}

fn check_one_phase_lambda() -> Result<(bool, String)> {
    let sim = Similarity::new(1.0, 1.0, 1.0, 1.0, 0.0)?;
    let cfg = OracleConfig {
        nx: 100,
        ..OracleConfig::default()
    };
    let field = simulate(&sim.spec(), &sim.quasi_steady_start(cfg.t_start), &cfg)?;
    let lambda = fit_similarity_coefficient(&field.times, &field.front, 1.0, (0.5, 1.0))?;
    Ok((
        (lambda - 0.620).abs() <= 0.005,
        format!("fitted {lambda:.5}, bisection {:.5}", sim.lambda),
    ))
}

/// Temperature errors against the similarity solution away from the front.
pub fn one_phase_errors(grids: &[usize]) -> Result<Vec<f64>> {
    let sim = Similarity::new(1.0, 1.0, 1.0, 1.0, 0.0)?;
    grids
        .iter()
        .map(|&nx| {
            let cfg = OracleConfig {
                nx,
                dt_rel: 0.001,
                t_start: 0.01,
                ..OracleConfig::default()
            };
            let field = simulate(&sim.spec(), &sim.exact_start(cfg.t_start), &cfg)?;
            let snap = field.final_snapshot();
            Ok(snap
                .x1
                .iter()
                .zip(&snap.u1)
                .filter(|(x, _)| **x < 0.8 * snap.front)
                .map(|(x, u)| (u - sim.temperature(*x, snap.t)).abs())
                .fold(0.0, f64::max))
        })
        .collect()
}

fn check_grid_order() -> Result<(bool, String)> {
    let errs = one_phase_errors(&[10, 20, 40])?;
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok((
        orders.iter().all(|o| *o >= 1.8),
        format!("observed orders {orders:.2?}"),
    ))
}

fn check_energy() -> Result<(bool, String)> {
    let sim = Similarity::new(1.0, 1.0, 1.0, 1.0, 0.0)?;
    let cfg = OracleConfig {
        nx: 50,
        ..OracleConfig::default()
    };
    let e1 = simulate(&sim.spec(), &sim.quasi_steady_start(cfg.t_start), &cfg)?
        .energy
        .map_or(f64::INFINITY, |e| e.relative_defect);
    let spec = ProblemSpec::test_problem();
    let sol = solve(&spec, StefanConvention::Derived)?;
    let cfg = OracleConfig {
        nx: 100,
        t_end: 0.2,
        ..OracleConfig::default()
    };
    let bc = BoundaryData::from_solution(&sol, Drive::Temperature, &cfg)?;
    let e2 = simulate(&spec, &bc, &cfg)?
        .energy
        .map_or(f64::INFINITY, |e| e.relative_defect);
    Ok((
        e1 <= 0.01 && e2 <= 0.01,
        format!("relative defects {e1:.2e} (one-phase), {e2:.2e} (test problem)"),
    ))
}

fn check_prescribed_front() -> Result<(bool, String)> {
    let spec = ProblemSpec::test_problem();
    let sol = solve(&spec, StefanConvention::Derived)?;
    let cfg = OracleConfig {
        nx: 200,
        front_mode: FrontMode::Prescribed,
        output_times: vec![0.1, 0.5],
        ..OracleConfig::default()
    };
    let bc = BoundaryData::from_solution(&sol, Drive::Temperature, &cfg)?;
    let field = simulate(&spec, &bc, &cfg)?;
    let r = compare(&field, &sol, spec.params.lambda1, (0.1, 1.0));
    Ok((
        r.temperature_sup <= 1e-2 && r.flux_rel_sup <= 0.03,
        format!(
            "temperature {:.2e}, flux {:.2e} (relative), Stefan residual {:.2e}",
            r.temperature_sup, r.flux_rel_sup, r.stefan_sup
        ),
    ))
}
