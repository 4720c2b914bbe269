//! Approximate coefficients by collocation in time.
//!
//! The series is truncated to a few terms per sequence and the two interface
//! conditions plus the Stefan balance are imposed at a handful of instants. At
//! `t = 0` the conditions are replaced by their `τ → 0` limits (order-0 jet rows);
//! the `Dₙ` always come from the initial data. Square systems are solved exactly,
//! overdetermined ones in the least-squares sense after column equilibration.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{spherical_reduce, Geometry, ProblemSpec};
use crate::series::{front_residual_at, front_residual_jet, FluxSeries, StefanConvention};
use crate::solver::{
    initial_coefficients, reconstruct_flux, series_from_unknowns, unknown_layout,
    CoefficientSolution, ResidualReport,
};

/// Relative singular-value threshold below which a collocation system is treated as
/// rank deficient.
const RANK_TOL: f64 = 1e-12;

const REFINEMENT_STEPS: usize = 3;

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollocationPlan {
    /// Collocation instants, strictly increasing, `≥ 0`.
    pub points: Vec<f64>,
    /// Coefficients kept per sequence (indices `0..terms`).
    pub terms: usize,
    /// Sampling grid for error curves.
    pub t_grid: Vec<f64>,
}

impl Default for CollocationPlan {
    fn default() -> Self {
        Self {
            points: vec![0.0, 0.5, 1.0],
            terms: 3,
            t_grid: linspace(0.05, 1.0, 200),
        }
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

impl CollocationPlan {
    /// `n` equally spaced points on `[0, t_end]`.
    pub fn uniform(n: usize, t_end: f64, terms: usize) -> Self {
        Self {
            points: linspace(0.0, t_end, n),
            terms,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms == 0 {
            return Err(Error::Config("collocation needs at least one term".into()));
        }
        if self.points.is_empty() {
            return Err(Error::Config("collocation needs at least one point".into()));
        }
        if self.points.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::Config(
                "collocation points must be finite and non-negative".into(),
            ));
        }
        if self.points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "collocation points must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

fn condition_rows(
    work: &ProblemSpec,
    points: &[f64],
    x: &[f64],
    d: &[f64],
    convention: StefanConvention,
) -> Result<Vec<f64>> {
    let (s1, s2) = series_from_unknowns(work, x, d)?;
    let mut out = Vec::with_capacity(3 * points.len());
    for &t in points {
        if t == 0.0 {
            let r = front_residual_jet(&s1, &s2, work, 0, convention)?;
            out.extend([r.interface1.coeff(0), r.interface2.coeff(0), r.stefan.coeff(0)]);
        } else {
            out.extend(front_residual_at(&s1, &s2, work, t, convention)?);
        }
    }
    Ok(out)
}

pub fn collocate(
    spec: &ProblemSpec,
    plan: &CollocationPlan,
    convention: StefanConvention,
) -> Result<CoefficientSolution> {
    plan.validate()?;
    spec.validate()?;
    let mut work = match spec.geometry {
        Geometry::Spherical => spherical_reduce(spec)?,
        Geometry::Planar => spec.clone(),
    };
    work.truncation = plan.terms - 1;
    let d = initial_coefficients(&work);
    let unknowns = unknown_layout(work.truncation);
    let nu = unknowns.len();
    let nr = 3 * plan.points.len();
    if nr < nu {
        return Err(Error::Degeneracy(format!(
            "{nr} collocation conditions (3 at each of t = {:?}) for {nu} unknown coefficients",
            plan.points
        )));
    }

    let mut x = vec![0.0; nu];
    let base = condition_rows(&work, &plan.points, &x, &d, convention)?;
    let mut m = DMatrix::zeros(nr, nu);
    for j in 0..nu {
        x[j] = 1.0;
        let col = condition_rows(&work, &plan.points, &x, &d, convention)?;
        x[j] = 0.0;
        for i in 0..nr {
            m[(i, j)] = col[i] - base[i];
        }
    }
    let rhs = DVector::from_iterator(nr, base.iter().map(|b| -b));

    let mut scales = vec![0.0; nu];
    for j in 0..nu {
        let norm = m.column(j).norm();
        if norm == 0.0 {
            return Err(Error::Degeneracy(format!(
                "coefficient {:?} does not enter any condition at t = {:?}",
                unknowns[j], plan.points
            )));
        }
        scales[j] = norm;
        m.column_mut(j).scale_mut(1.0 / norm);
    }
    let svd = m.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= RANK_TOL * smax {
        return Err(Error::Degeneracy(format!(
            "collocation conditions {{interface1, interface2, stefan}} at t = {:?} are rank deficient (singular value ratio {:e})",
            plan.points,
            smin / smax
        )));
    }
    let y = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::Degeneracy(e.to_string()))?;
    let mut sol: Vec<f64> = y.iter().zip(&scales).map(|(v, s)| v / s).collect();

    // Iterative refinement against the directly evaluated conditions; closely spaced
    // instants make the system ill-conditioned.
    let mut res = condition_rows(&work, &plan.points, &sol, &d, convention)?;
    for _ in 0..REFINEMENT_STEPS {
        let r = DVector::from_iterator(nr, res.iter().map(|v| -v));
        let dy = svd
            .solve(&r, 0.0)
            .map_err(|e| Error::Degeneracy(e.to_string()))?;
        let trial: Vec<f64> = sol
            .iter()
            .zip(dy.iter().zip(&scales))
            .map(|(x, (v, s))| x + v / s)
            .collect();
        let trial_res = condition_rows(&work, &plan.points, &trial, &d, convention)?;
        if norm2(&trial_res) >= norm2(&res) {
            break;
        }
        sol = trial;
        res = trial_res;
    }
    let mut report = [0.0f64; 3];
    for (i, r) in res.iter().enumerate() {
        report[i % 3] = report[i % 3].max(r.abs());
    }
    let (phase1, phase2) = series_from_unknowns(&work, &sol, &d)?;
    let flux = reconstruct_flux(&phase1, &work, &[]).series;
    Ok(CoefficientSolution {
        phase1,
        phase2,
        flux,
        residual_report: ResidualReport {
            interface1: report[0],
            interface2: report[1],
            stefan: report[2],
        },
        convention,
        front: work.front.clone(),
        sphere_radius: match spec.geometry {
            Geometry::Spherical => Some(spec.b),
            Geometry::Planar => work.trace_radius,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub t: f64,
    pub exact: f64,
    pub approx: f64,
    /// `|exact − approx| / |exact|`; `None` where the exact flux vanishes.
    pub rel_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub samples: Vec<ErrorSample>,
    /// Maximum over the samples where the relative error is defined.
    pub max_rel_err: f64,
}

pub fn relative_error_curve(exact: &FluxSeries, approx: &FluxSeries, grid: &[f64]) -> ErrorCurve {
    let samples: Vec<ErrorSample> = grid
        .iter()
        .map(|&t| {
            let e = exact.eval(t);
            let a = approx.eval(t);
            let rel_err = if e == 0.0 || !e.is_finite() {
                None
            } else {
                Some((e - a).abs() / e.abs())
            };
            ErrorSample {
                t,
                exact: e,
                approx: a,
                rel_err,
            }
        })
        .collect();
    let max_rel_err = samples
        .iter()
        .filter_map(|s| s.rel_err)
        .fold(0.0, f64::max);
    ErrorCurve {
        samples,
        max_rel_err,
    }
}
