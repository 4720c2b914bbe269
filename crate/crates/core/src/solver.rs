//! Coefficient determination.
//!
//! Two routes produce the same coefficients for a planar problem with a `√t` front:
//!
//! * [`solve_sqrt_front`] uses the closed forms: `Dₙ` from the initial data, `Cₙ` from
//!   the phase-2 interface condition, `(Aₙ, Bₙ)` from a 2×2 system per order.
//! * [`solve`] generates every condition with jet arithmetic ([`generate_conditions`])
//!   and solves the resulting block-triangular system order by order. It handles
//!   arbitrary front expansions and reduced spherical problems.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{spherical_lift, spherical_reduce, FrontExpansion, Geometry, ProblemSpec, SphericalField};
use crate::series::{front_residual_jet, FluxSeries, HeatSeries, StefanConvention};
use crate::specfun::{SpecFun, TWO_OVER_SQRT_PI};

/// Absolute residual tolerance, scaled by `1 + max |coefficient|`.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub interface1: f64,
    pub interface2: f64,
    pub stefan: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.interface1.max(self.interface2).max(self.stefan)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSolution {
    /// `Aₙ`, `Bₙ` (of `v = rθ` for spherical problems).
    pub phase1: HeatSeries,
    /// `Cₙ`, `Dₙ`.
    pub phase2: HeatSeries,
    pub flux: FluxSeries,
    pub residual_report: ResidualReport,
    pub convention: StefanConvention,
    pub front: FrontExpansion,
    /// Contact radius when the solution came from a spherical problem.
    pub sphere_radius: Option<f64>,
}

impl CoefficientSolution {
    /// Reconstructed boundary flux `P(t)`.
    pub fn flux_at(&self, t: f64) -> f64 {
        self.flux.eval(t)
    }

    pub fn spherical_field(&self) -> Option<SphericalField> {
        self.sphere_radius
            .map(|b| spherical_lift(&self.phase1, &self.phase2, &self.front, b).expect("positive radius"))
    }

    /// Planar temperature at `(x, t)` (of `v` for spherical problems).
    pub fn temperature(&self, x: f64, t: f64) -> Result<f64> {
        if x <= self.front.displacement(t) {
            self.phase1.evaluate(x, t)
        } else {
            self.phase2.evaluate(x, t)
        }
    }

    fn coefficient_scale(&self) -> f64 {
        let all = self
            .phase1
            .coeff_plus
            .iter()
            .chain(&self.phase1.coeff_minus)
            .chain(&self.phase2.coeff_plus)
            .chain(&self.phase2.coeff_minus);
        1.0 + all.fold(0.0f64, |acc, c| acc.max(c.abs()))
    }
}

fn planar_problem(spec: &ProblemSpec) -> Result<ProblemSpec> {
    spec.validate()?;
    match spec.geometry {
        Geometry::Spherical => spherical_reduce(spec),
        Geometry::Planar => Ok(spec.clone()),
    }
}

/// `Dₙ = ½·f⁽ⁿ⁾(0)`, from matching the `t → 0⁺` limit with the initial data.
pub fn initial_coefficients(spec: &ProblemSpec) -> Vec<f64> {
    (0..=spec.truncation)
        .map(|n| 0.5 * spec.initial_derivative(n))
        .collect()
}

fn solve2(m: Matrix2<f64>, rhs: Vector2<f64>, what: &str) -> Result<Vector2<f64>> {
    let scale = m.abs().max();
    if scale == 0.0 || m.determinant().abs() <= 1e-14 * scale * scale {
        return Err(Error::Degeneracy(format!("singular 2x2 system for {what}")));
    }
    m.lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Degeneracy(format!("singular 2x2 system for {what}")))
}

/// Closed-form coefficients for a planar problem with a `√t` front.
pub fn solve_sqrt_front(spec: &ProblemSpec, convention: StefanConvention) -> Result<CoefficientSolution> {
    let work = planar_problem(spec)?;
    if !work.front.is_sqrt_front() {
        return Err(Error::Usage(
            "closed forms need a pure sqrt(t) front; use the general solver".into(),
        ));
    }
    if work.trace_radius.is_some() {
        return Err(Error::Usage(
            "closed forms cover planar problems only; use the general solver".into(),
        ));
    }
    let sf = SpecFun::default();
    let p = work.params;
    let n_max = work.truncation;
    let alpha = work.front.alphas[0];
    let xi = alpha / (2.0 * p.a1);
    let delta = alpha / (2.0 * p.a2);
    let u_m = work.interface_value_at_zero();

    let d = initial_coefficients(&work);
    let mut c = vec![0.0; n_max + 1];
    c[0] = 0.5 * u_m;
    for n in 1..=n_max {
        c[n] = -d[n] * sf.inerfc(n as i32, -delta)? / sf.inerfc(n as i32, delta)?;
    }

    let mut a = vec![0.0; n_max + 1];
    let mut b = vec![0.0; n_max + 1];

    // order 0: interface value and the t^{-1/2} Stefan balance
    let g1 = TWO_OVER_SQRT_PI * (-xi * xi).exp();
    let g2 = TWO_OVER_SQRT_PI * (-delta * delta).exp();
    let (g1_plus, g2_plus) = match convention {
        StefanConvention::Derived => (g1, g2),
        StefanConvention::Printed => (
            TWO_OVER_SQRT_PI * (xi * xi).exp(),
            TWO_OVER_SQRT_PI * (delta * delta).exp(),
        ),
    };
    let k1 = p.lambda1 / (2.0 * p.a1);
    let k2 = p.lambda2 / (2.0 * p.a2);
    let phase2_term = k2 * (-c[0] * g2_plus + d[0] * g2);
    let m = Matrix2::new(
        sf.inerfc(0, xi)?,
        sf.inerfc(0, -xi)?,
        -k1 * g1_plus,
        k1 * g1,
    );
    let rhs = Vector2::new(u_m, phase2_term - 0.5 * p.l_gamma * alpha);
    let ab = solve2(m, rhs, "A0, B0")?;
    a[0] = ab[0];
    b[0] = ab[1];

    for n in 1..=n_max {
        let w1 = p.lambda1 * (2.0 * p.a1).powi(n as i32 - 1);
        let w2 = p.lambda2 * (2.0 * p.a2).powi(n as i32 - 1);
        let m = Matrix2::new(
            sf.inerfc(n as i32, xi)?,
            sf.inerfc(n as i32, -xi)?,
            -w1 * sf.inerfc(n as i32 - 1, xi)?,
            w1 * sf.inerfc(n as i32 - 1, -xi)?,
        );
        let rhs = Vector2::new(
            0.0,
            w2 * (-c[n] * sf.inerfc(n as i32 - 1, delta)? + d[n] * sf.inerfc(n as i32 - 1, -delta)?),
        );
        let ab = solve2(m, rhs, &format!("A{n}, B{n}"))?;
        a[n] = ab[0];
        b[n] = ab[1];
    }

    let phase1 = HeatSeries::new(p.a1, a, b)?;
    let phase2 = HeatSeries::new(p.a2, c, d)?;
    finish(spec, &work, phase1, phase2, convention)
}

fn finish(
    original: &ProblemSpec,
    work: &ProblemSpec,
    phase1: HeatSeries,
    phase2: HeatSeries,
    convention: StefanConvention,
) -> Result<CoefficientSolution> {
    let res = front_residual_jet(&phase1, &phase2, work, work.truncation, convention)?;
    let [r1, r2, r3] = res.max_abs();
    let flux = reconstruct_flux(&phase1, work, &[]).series;
    let sol = CoefficientSolution {
        phase1,
        phase2,
        flux,
        residual_report: ResidualReport {
            interface1: r1,
            interface2: r2,
            stefan: r3,
        },
        convention,
        front: work.front.clone(),
        sphere_radius: match original.geometry {
            Geometry::Spherical => Some(original.b),
            Geometry::Planar => work.trace_radius,
        },
    };
    let tol = RESIDUAL_TOL * sol.coefficient_scale();
    if sol.residual_report.max() > tol {
        return Err(Error::Consistency(format!(
            "front residuals {:?} exceed {tol:e}",
            sol.residual_report
        )));
    }
    Ok(sol)
}

/// Which of the three front conditions a generated row expands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Interface1,
    Interface2,
    Stefan,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::Interface1, Condition::Interface2, Condition::Stefan];
}

/// Unknown coefficient in a generated system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unknown {
    A(usize),
    B(usize),
    C(usize),
}

/// Linear system `matrix · x = rhs` over the unknowns `A₀..A_N, B₀..B_N, C₀..C_N`.
/// Row `3k + j` is the coefficient of `τᵏ` of condition `Condition::ALL[j]`.
#[derive(Debug, Clone)]
pub struct LinearConditions {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub unknowns: Vec<Unknown>,
    pub rows: Vec<(Condition, usize)>,
    pub truncation: usize,
}

impl LinearConditions {
    pub fn unknown_index(&self, u: Unknown) -> usize {
        let n = self.truncation + 1;
        match u {
            Unknown::A(i) => i,
            Unknown::B(i) => n + i,
            Unknown::C(i) => 2 * n + i,
        }
    }

    pub fn row_index(&self, cond: Condition, k: usize) -> usize {
        3 * k + Condition::ALL.iter().position(|c| *c == cond).unwrap()
    }

    pub fn entry(&self, cond: Condition, k: usize, u: Unknown) -> f64 {
        self.matrix[(self.row_index(cond, k), self.unknown_index(u))]
    }
}

pub(crate) fn unknown_layout(truncation: usize) -> Vec<Unknown> {
    let r = 0..=truncation;
    r.clone()
        .map(Unknown::A)
        .chain(r.clone().map(Unknown::B))
        .chain(r.map(Unknown::C))
        .collect()
}

/// Series for a vector of unknowns laid out as in [`LinearConditions`].
pub(crate) fn series_from_unknowns(
    spec: &ProblemSpec,
    x: &[f64],
    d: &[f64],
) -> Result<(HeatSeries, HeatSeries)> {
    let n = spec.truncation + 1;
    let phase1 = HeatSeries::new(spec.params.a1, x[..n].to_vec(), x[n..2 * n].to_vec())?;
    let phase2 = HeatSeries::new(spec.params.a2, x[2 * n..3 * n].to_vec(), d.to_vec())?;
    Ok((phase1, phase2))
}

/// Expands the interface and Stefan conditions to order `k_max` in `τ` and extracts
/// the linear dependence on the unknown coefficients by probing with unit vectors.
pub fn generate_conditions(
    spec: &ProblemSpec,
    k_max: usize,
    convention: StefanConvention,
) -> Result<LinearConditions> {
    let work = planar_problem(spec)?;
    let unknowns = unknown_layout(work.truncation);
    let d = initial_coefficients(&work);
    let eval = |x: &[f64]| -> Result<Vec<f64>> {
        let (s1, s2) = series_from_unknowns(&work, x, &d)?;
        let r = front_residual_jet(&s1, &s2, &work, k_max, convention)?;
        let mut out = Vec::with_capacity(3 * (k_max + 1));
        for k in 0..=k_max {
            out.push(r.interface1.coeff(k));
            out.push(r.interface2.coeff(k));
            out.push(r.stefan.coeff(k));
        }
        Ok(out)
    };
    let nu = unknowns.len();
    let mut x = vec![0.0; nu];
    let base = eval(&x)?;
    let mut matrix = DMatrix::zeros(base.len(), nu);
    for j in 0..nu {
        x[j] = 1.0;
        let col = eval(&x)?;
        x[j] = 0.0;
        for (i, (c, b)) in col.iter().zip(&base).enumerate() {
            matrix[(i, j)] = c - b;
        }
    }
    let rhs = DVector::from_iterator(base.len(), base.iter().map(|b| -b));
    let rows = (0..=k_max)
        .flat_map(|k| Condition::ALL.iter().map(move |c| (*c, k)))
        .collect();
    Ok(LinearConditions {
        matrix,
        rhs,
        unknowns,
        rows,
        truncation: work.truncation,
    })
}

/// General solver: generated conditions, solved order by order.
///
/// The rows of order `k` involve only unknowns of index `≤ k`, so each order is a 3×3
/// system in `(A_k, B_k, C_k)` once lower orders are substituted.
pub fn solve(spec: &ProblemSpec, convention: StefanConvention) -> Result<CoefficientSolution> {
    let work = planar_problem(spec)?;
    let n_max = work.truncation;
    let sys = generate_conditions(&work, n_max, convention)?;
    let nu = sys.unknowns.len();
    let mut x = vec![0.0; nu];
    for k in 0..=n_max {
        let cols = [
            sys.unknown_index(Unknown::A(k)),
            sys.unknown_index(Unknown::B(k)),
            sys.unknown_index(Unknown::C(k)),
        ];
        let mut block = Matrix3::zeros();
        let mut rhs = Vector3::zeros();
        for (bi, cond) in Condition::ALL.iter().enumerate() {
            let row = sys.row_index(*cond, k);
            let mut r = sys.rhs[row];
            for (j, xj) in x.iter().enumerate() {
                if !cols.contains(&j) {
                    r -= sys.matrix[(row, j)] * xj;
                }
            }
            rhs[bi] = r;
            for (bj, col) in cols.iter().enumerate() {
                block[(bi, bj)] = sys.matrix[(row, *col)];
            }
        }
        let scale = block.abs().max();
        let det = block.determinant();
        if scale == 0.0 || det.abs() <= 1e-14 * scale.powi(3) {
            return Err(Error::Degeneracy(format!(
                "conditions of order {k} do not determine A{k}, B{k}, C{k}"
            )));
        }
        let sol = block
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Degeneracy(format!("order {k} block is singular")))?;
        for (bj, col) in cols.iter().enumerate() {
            x[*col] = sol[bj];
        }
    }
    let d = initial_coefficients(&work);
    let (phase1, phase2) = series_from_unknowns(&work, &x, &d)?;
    finish(spec, &work, phase1, phase2, convention)
}

/// Flux series and its samples on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxReconstruction {
    pub series: FluxSeries,
    pub samples: Vec<(f64, f64)>,
}

/// Boundary flux `P(t)` from the phase-1 coefficients.
///
/// Planar problems use `−λ₁∂ₓu₁(0, t)`. Spherical problems (or planar ones reduced from
/// a sphere, recognised by their trace radius) use `−λ₁∂θ₁/∂r(b, t)` with
/// `θ₁ = v₁/r`.
pub fn reconstruct_flux(phase1: &HeatSeries, spec: &ProblemSpec, grid: &[f64]) -> FluxReconstruction {
    let radius = match spec.geometry {
        Geometry::Spherical => Some(spec.b),
        Geometry::Planar => spec.trace_radius,
    };
    let series = match radius {
        Some(b) => SphericalField {
            phase1: phase1.clone(),
            phase2: phase1.clone(),
            front: spec.front.clone(),
            b,
        }
        .flux_series(spec.params.lambda1),
        None => phase1.flux_at_origin(spec.params.lambda1),
    };
    let samples = grid.iter().map(|t| (*t, series.eval(*t))).collect();
    FluxReconstruction { series, samples }
}
