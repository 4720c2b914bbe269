//! Finite-difference ground truth for the two-phase problem.
//!
//! Each phase is mapped onto a unit interval (front-fixing transform): `ξ = x / s(t)`
//! for the liquid and `η = (x − s) / (X − s)` for the solid, with a fixed far boundary
//! `X`. Space is discretised by central differences, the front gradients by
//! second-order one-sided differences, and time by an explicit second-order
//! Runge–Kutta–Chebyshev method whose stage count follows the spectral radius of
//! the semi-discrete system. Plain forward Euler is available with a hard
//! `dt ≤ ½·dx²/a²` check.
//!
//! Reduced spherical problems (planar specs with a trace radius) are simulated in
//! the reduced variable `v = rθ`.

use libm::erf;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FrontExpansion, Geometry, PhaseParams, ProblemSpec};
use crate::solver::CoefficientSolution;

/// Damping parameter of the RKC stability polynomial.
const RKC_DAMPING: f64 = 2.0 / 13.0;
/// Fraction of the stability interval used when choosing the stage count.
const RKC_SAFETY: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stepper {
    /// Runge–Kutta–Chebyshev, stage count from the spectral radius.
    #[default]
    Rkc,
    /// Forward Euler with a fixed step `dt`.
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontMode {
    /// The front moves by the Stefan balance.
    #[default]
    Stefan,
    /// The front follows the expansion stored in the problem spec.
    Prescribed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Grid cells per phase.
    pub nx: usize,
    /// Upper bound on the time step (the fixed step for Euler).
    pub dt: f64,
    /// RKC step bound relative to the current time, `h ≤ dt_rel·t`.
    pub dt_rel: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Position `X` of the far boundary of the solid phase.
    pub domain_length: f64,
    pub stepper: Stepper,
    pub front_mode: FrontMode,
    pub max_stages: usize,
    /// Times at which full temperature snapshots are kept, besides start and end.
    pub output_times: Vec<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            nx: 400,
            dt: 0.01,
            dt_rel: 0.01,
            t_start: 1e-4,
            t_end: 1.0,
            domain_length: 4.0,
            stepper: Stepper::Rkc,
            front_mode: FrontMode::Stefan,
            max_stages: 2000,
            output_times: Vec::new(),
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.nx < 4 {
            bad.push(format!("nx must be at least 4, got {}", self.nx));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            bad.push(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.dt_rel > 0.0 && self.dt_rel <= 0.5) {
            bad.push(format!("dt_rel must lie in (0, 0.5], got {}", self.dt_rel));
        }
        if !(self.t_start.is_finite() && self.t_start > 0.0) {
            bad.push(format!("t_start must be positive, got {}", self.t_start));
        }
        if !(self.t_end.is_finite() && self.t_end > self.t_start) {
            bad.push(format!(
                "t_end must exceed t_start = {}, got {}",
                self.t_start, self.t_end
            ));
        }
        if !(self.domain_length.is_finite() && self.domain_length > 0.0) {
            bad.push(format!(
                "domain_length must be positive, got {}",
                self.domain_length
            ));
        }
        if self.max_stages < 2 {
            bad.push(format!("max_stages must be at least 2, got {}", self.max_stages));
        }
        if let Some(t) = self
            .output_times
            .iter()
            .find(|t| !(**t > self.t_start && **t <= self.t_end))
        {
            bad.push(format!("output time {t} outside (t_start, t_end]"));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad.join("; ")))
        }
    }
}

pub type TimeFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

pub enum LeftBoundary {
    /// Temperature at `x = 0`.
    Temperature(TimeFn),
    /// Heat flux `P(t) = −λ₁·∂ₓu₁(0, t)` into the liquid.
    Flux(TimeFn),
}

/// Boundary and starting data for one simulation.
pub struct BoundaryData {
    pub left: LeftBoundary,
    /// Solid temperature at the far boundary `x = X`.
    pub far: TimeFn,
    /// Front position at `t_start`.
    pub initial_front: f64,
    /// Liquid profile on `[0, s₀]` at `t_start`.
    pub initial_u1: TimeFn,
    /// Solid profile on `[s₀, X]` at `t_start`.
    pub initial_u2: TimeFn,
}

/// How a series solution drives the oracle at `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Drive {
    Temperature,
    Flux,
}

impl std::str::FromStr for Drive {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "temperature" => Ok(Self::Temperature),
            "flux" => Ok(Self::Flux),
            other => Err(Error::Usage(format!(
                "unknown drive {other:?}, expected temperature or flux"
            ))),
        }
    }
}

impl BoundaryData {
    /// Boundary, far-field and starting data taken from a series solution.
    ///
    /// Flux driving is only available for planar solutions; the flux of a spherical
    /// solution is a Robin condition for the reduced variable.
    pub fn from_solution(
        solution: &CoefficientSolution,
        drive: Drive,
        cfg: &OracleConfig,
    ) -> Result<Self> {
        let t0 = cfg.t_start;
        let x_far = cfg.domain_length;
        let p1 = solution.phase1.clone();
        let p2 = solution.phase2.clone();
        let left = match drive {
            Drive::Temperature => {
                let p = p1.clone();
                LeftBoundary::Temperature(Box::new(move |t| p.evaluate(0.0, t).unwrap_or(f64::NAN)))
            }
            Drive::Flux => {
                if solution.sphere_radius.is_some() {
                    return Err(Error::Usage(
                        "flux driving needs a planar solution; drive spherical ones by temperature"
                            .into(),
                    ));
                }
                let flux = solution.flux.clone();
                LeftBoundary::Flux(Box::new(move |t| flux.eval(t)))
            }
        };
        let far = {
            let p = p2.clone();
            Box::new(move |t: f64| p.evaluate(x_far, t).unwrap_or(f64::NAN))
        };
        let u1 = Box::new(move |x: f64| p1.evaluate(x, t0).unwrap_or(f64::NAN));
        let u2 = Box::new(move |x: f64| p2.evaluate(x, t0).unwrap_or(f64::NAN));
        Ok(Self {
            left,
            far,
            initial_front: solution.front.displacement(t0),
            initial_u1: u1,
            initial_u2: u2,
        })
    }
}

/// Temperatures on the mapped grids at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub front: f64,
    /// Physical positions of the liquid nodes, `ξᵢ·s`.
    pub x1: Vec<f64>,
    pub u1: Vec<f64>,
    /// Physical positions of the solid nodes, `s + ηⱼ·(X − s)`.
    pub x2: Vec<f64>,
    pub u2: Vec<f64>,
}

/// Heat balance over the run: boundary heat in minus sensible heat stored minus
/// latent heat absorbed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBalance {
    pub boundary_heat: f64,
    pub far_heat: f64,
    pub sensible: f64,
    pub latent: f64,
    pub defect: f64,
    pub relative_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleField {
    pub times: Vec<f64>,
    pub front: Vec<f64>,
    /// `u₁(0, t)`.
    pub boundary_temperature: Vec<f64>,
    /// `−λ₁·∂ₓu₁(0, t)`.
    pub boundary_flux: Vec<f64>,
    /// Stefan balance `λ₁∂ₓu₁ − λ₂∂ₓu₂ + Lγ·w·ds/dt − offset` from the discrete
    /// front gradients; zero up to rounding when the balance moves the front.
    pub stefan_residual: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// `None` for prescribed fronts and reduced spherical problems.
    pub energy: Option<EnergyBalance>,
    pub steps: usize,
    pub max_stages_used: usize,
}

impl OracleField {
    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots.last().expect("at least start and end")
    }

    /// Boundary flux at step `i`; for a reduced sphere of radius `b` this is
    /// `−λ₁·∂θ/∂r(b, t)` with `θ = v/r`.
    pub fn physical_flux(&self, i: usize, sphere_radius: Option<f64>, lambda1: f64) -> f64 {
        match sphere_radius {
            Some(b) => self.boundary_flux[i] / b + lambda1 * self.boundary_temperature[i] / (b * b),
            None => self.boundary_flux[i],
        }
    }
}

struct System<'a> {
    params: PhaseParams,
    front_spec: FrontExpansion,
    trace_radius: Option<f64>,
    offset: f64,
    bc: &'a BoundaryData,
    mode: FrontMode,
    nx: usize,
    dxi: f64,
    x_far: f64,
}

impl System<'_> {
    fn len(&self) -> usize {
        2 * self.nx + 3
    }

    fn s_index(&self) -> usize {
        2 * self.nx + 2
    }

    fn trace(&self, s: f64) -> f64 {
        match self.trace_radius {
            Some(r) => (r + s) * self.params.t_melt,
            None => self.params.t_melt,
        }
    }

    fn weight(&self, s: f64) -> f64 {
        match self.trace_radius {
            Some(r) => r + s,
            None => 1.0,
        }
    }

    fn apply_bc(&self, t: f64, y: &mut [f64]) {
        let n = self.nx;
        if self.mode == FrontMode::Prescribed {
            y[self.s_index()] = self.front_spec.displacement(t);
        }
        let s = y[self.s_index()];
        if let LeftBoundary::Temperature(g) = &self.bc.left {
            y[0] = g(t);
        }
        let tr = self.trace(s);
        y[n] = tr;
        y[n + 1] = tr;
        y[2 * n + 1] = (self.bc.far)(t);
    }

    /// `(∂ₓu₁, ∂ₓu₂)` at the front.
    fn front_gradients(&self, y: &[f64]) -> (f64, f64) {
        let n = self.nx;
        let s = y[self.s_index()];
        let u1 = &y[..=n];
        let u2 = &y[n + 1..2 * n + 2];
        let g1 = (3.0 * u1[n] - 4.0 * u1[n - 1] + u1[n - 2]) / (2.0 * self.dxi * s);
        let g2 = (-3.0 * u2[0] + 4.0 * u2[1] - u2[2]) / (2.0 * self.dxi * (self.x_far - s));
        (g1, g2)
    }

    fn front_speed(&self, t: f64, y: &[f64]) -> f64 {
        match self.mode {
            FrontMode::Prescribed => self.front_spec.speed(t),
            FrontMode::Stefan => {
                let p = &self.params;
                let (g1, g2) = self.front_gradients(y);
                let s = y[self.s_index()];
                (p.lambda2 * g2 - p.lambda1 * g1 + self.offset) / (p.l_gamma * self.weight(s))
            }
        }
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.nx;
        let h = self.dxi;
        let s = y[self.s_index()];
        let l2 = self.x_far - s;
        let sdot = self.front_speed(t, y);
        let (u1, u2) = (&y[..=n], &y[n + 1..2 * n + 2]);
        let (d1, d2) = dy.split_at_mut(n + 1);
        let k1 = self.params.a1 * self.params.a1 / (s * s * h * h);
        let c1 = sdot / (s * 2.0 * h);
        d1[0] = match &self.bc.left {
            LeftBoundary::Temperature(_) => 0.0,
            LeftBoundary::Flux(p) => {
                let ghost = u1[1] + 2.0 * h * s * p(t) / self.params.lambda1;
                k1 * (u1[1] - 2.0 * u1[0] + ghost)
            }
        };
        for i in 1..n {
            let xi = i as f64 * h;
            d1[i] = k1 * (u1[i + 1] - 2.0 * u1[i] + u1[i - 1]) + xi * c1 * (u1[i + 1] - u1[i - 1]);
        }
        d1[n] = 0.0;
        let k2 = self.params.a2 * self.params.a2 / (l2 * l2 * h * h);
        let c2 = sdot / (l2 * 2.0 * h);
        d2[0] = 0.0;
        for j in 1..n {
            let eta = j as f64 * h;
            d2[j] = k2 * (u2[j + 1] - 2.0 * u2[j] + u2[j - 1])
                + (1.0 - eta) * c2 * (u2[j + 1] - u2[j - 1]);
        }
        d2[n] = 0.0;
        d2[n + 1] = sdot;
    }

    /// Gershgorin-type bound on the spectral radius of the Jacobian.
    fn spectral_radius(&self, t: f64, y: &[f64]) -> f64 {
        let p = &self.params;
        let h = self.dxi;
        let s = y[self.s_index()];
        let l2 = self.x_far - s;
        let sdot = self.front_speed(t, y).abs();
        let r1 = 4.0 * p.a1 * p.a1 / (s * h).powi(2) + sdot / (s * h);
        let r2 = 4.0 * p.a2 * p.a2 / (l2 * h).powi(2) + sdot / (l2 * h);
        let rs = match self.mode {
            FrontMode::Prescribed => 0.0,
            FrontMode::Stefan => {
                8.0 / (2.0 * h) * (p.lambda1 / s + p.lambda2 / l2) / (p.l_gamma * self.weight(s))
            }
        };
        1.05 * r1.max(r2).max(rs)
    }

    fn boundary_flux(&self, t: f64, y: &[f64]) -> f64 {
        match &self.bc.left {
            LeftBoundary::Flux(p) => p(t),
            LeftBoundary::Temperature(_) => {
                let s = y[self.s_index()];
                let g = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * self.dxi * s);
                -self.params.lambda1 * g
            }
        }
    }

    fn stefan_residual(&self, t: f64, y: &[f64]) -> f64 {
        let p = &self.params;
        let (g1, g2) = self.front_gradients(y);
        let s = y[self.s_index()];
        p.lambda1 * g1 - p.lambda2 * g2 + p.l_gamma * self.weight(s) * self.front_speed(t, y)
            - self.offset
    }

    /// `λ₂·∂ₓu₂(X, t)`, heat entering through the far boundary.
    fn far_flux(&self, y: &[f64]) -> f64 {
        let n = self.nx;
        let s = y[self.s_index()];
        let u2 = &y[n + 1..2 * n + 2];
        let g = (3.0 * u2[n] - 4.0 * u2[n - 1] + u2[n - 2]) / (2.0 * self.dxi * (self.x_far - s));
        self.params.lambda2 * g
    }

    fn snapshot(&self, t: f64, y: &[f64]) -> Snapshot {
        let n = self.nx;
        let s = y[self.s_index()];
        let l2 = self.x_far - s;
        Snapshot {
            t,
            front: s,
            x1: (0..=n).map(|i| i as f64 * self.dxi * s).collect(),
            u1: y[..=n].to_vec(),
            x2: (0..=n).map(|j| s + j as f64 * self.dxi * l2).collect(),
            u2: y[n + 1..2 * n + 2].to_vec(),
        }
    }

    /// Sensible plus latent heat content relative to the melting level.
    fn heat_content(&self, y: &[f64]) -> f64 {
        let p = &self.params;
        let n = self.nx;
        let s = y[self.s_index()];
        let trapz = |u: &[f64]| {
            self.dxi * (u.iter().sum::<f64>() - 0.5 * (u[0] + u[u.len() - 1]))
        };
        let c1 = p.lambda1 / (p.a1 * p.a1);
        let c2 = p.lambda2 / (p.a2 * p.a2);
        c1 * s * trapz(&y[..=n]) + c2 * (self.x_far - s) * trapz(&y[n + 1..2 * n + 2])
    }

    fn latent_content(&self, s: f64) -> f64 {
        let p = &self.params;
        let c1 = p.lambda1 / (p.a1 * p.a1);
        let c2 = p.lambda2 / (p.a2 * p.a2);
        (p.l_gamma - (c1 - c2) * p.t_melt) * s
    }
}

/// Coefficients of the damped second-order Chebyshev stability polynomial.
struct RkcCoefficients {
    mu: Vec<f64>,
    nu: Vec<f64>,
    mu_t: Vec<f64>,
    gamma_t: Vec<f64>,
    c: Vec<f64>,
}

fn rkc_beta(m: usize) -> f64 {
    let w0 = 1.0 + RKC_DAMPING / (m * m) as f64;
    let (mut t0, mut t1) = (1.0, w0);
    let (mut d0, mut d1) = (0.0, 1.0);
    let (mut e0, mut e1) = (0.0, 0.0);
    for _ in 2..=m {
        let t2 = 2.0 * w0 * t1 - t0;
        let d2 = 2.0 * t1 + 2.0 * w0 * d1 - d0;
        let e2 = 4.0 * d1 + 2.0 * w0 * e1 - e0;
        (t0, t1, d0, d1, e0, e1) = (t1, t2, d1, d2, e1, e2);
    }
    let w1 = d1 / e1;
    (1.0 + w0) / w1
}

fn rkc_coefficients(m: usize) -> RkcCoefficients {
    let w0 = 1.0 + RKC_DAMPING / (m * m) as f64;
    let mut t = vec![0.0; m + 1];
    let mut d = vec![0.0; m + 1];
    let mut e = vec![0.0; m + 1];
    t[0] = 1.0;
    t[1] = w0;
    d[1] = 1.0;
    for j in 2..=m {
        t[j] = 2.0 * w0 * t[j - 1] - t[j - 2];
        d[j] = 2.0 * t[j - 1] + 2.0 * w0 * d[j - 1] - d[j - 2];
        e[j] = 4.0 * d[j - 1] + 2.0 * w0 * e[j - 1] - e[j - 2];
    }
    let w1 = d[m] / e[m];
    let mut b = vec![0.0; m + 1];
    for j in 2..=m {
        b[j] = e[j] / (d[j] * d[j]);
    }
    b[0] = b[2];
    b[1] = b[2];
    let a: Vec<f64> = (0..=m).map(|j| 1.0 - b[j] * t[j]).collect();
    let mut mu = vec![0.0; m + 1];
    let mut nu = vec![0.0; m + 1];
    let mut mu_t = vec![0.0; m + 1];
    let mut gamma_t = vec![0.0; m + 1];
    let mut c = vec![0.0; m + 1];
    mu_t[1] = b[1] * w1;
    c[1] = mu_t[1];
    for j in 2..=m {
        mu[j] = 2.0 * b[j] * w0 / b[j - 1];
        nu[j] = -b[j] / b[j - 2];
        mu_t[j] = 2.0 * b[j] * w1 / b[j - 1];
        gamma_t[j] = -a[j - 1] * mu_t[j];
        c[j] = mu[j] * c[j - 1] + nu[j] * c[j - 2] + mu_t[j] + gamma_t[j];
    }
    RkcCoefficients {
        mu,
        nu,
        mu_t,
        gamma_t,
        c,
    }
}

/// Smallest stage count whose stability interval covers `h·ρ`.
fn stages_for(h_rho: f64) -> usize {
    let mut m = ((h_rho / (0.65 * RKC_SAFETY)).sqrt().ceil() as usize).max(2);
    while m > 2 && rkc_beta(m - 1) * RKC_SAFETY >= h_rho {
        m -= 1;
    }
    while rkc_beta(m) * RKC_SAFETY < h_rho {
        m += 1;
    }
    m
}

struct Workspace {
    f0: Vec<f64>,
    f: Vec<f64>,
    ym2: Vec<f64>,
    ym1: Vec<f64>,
    yj: Vec<f64>,
}

fn rkc_step(sys: &System, t: f64, h: f64, m: usize, y: &mut [f64], ws: &mut Workspace) {
    let k = rkc_coefficients(m);
    let n = y.len();
    sys.rhs(t, y, &mut ws.f0);
    ws.ym2.copy_from_slice(y);
    for i in 0..n {
        ws.ym1[i] = y[i] + k.mu_t[1] * h * ws.f0[i];
    }
    sys.apply_bc(t + k.c[1] * h, &mut ws.ym1);
    for j in 2..=m {
        sys.rhs(t + k.c[j - 1] * h, &ws.ym1, &mut ws.f);
        let (mu, nu) = (k.mu[j], k.nu[j]);
        let w = 1.0 - mu - nu;
        let (mh, gh) = (k.mu_t[j] * h, k.gamma_t[j] * h);
        for i in 0..n {
            ws.yj[i] = w * y[i] + mu * ws.ym1[i] + nu * ws.ym2[i] + mh * ws.f[i] + gh * ws.f0[i];
        }
        sys.apply_bc(t + k.c[j] * h, &mut ws.yj);
        std::mem::swap(&mut ws.ym2, &mut ws.ym1);
        std::mem::swap(&mut ws.ym1, &mut ws.yj);
    }
    y.copy_from_slice(&ws.ym1);
    sys.apply_bc(t + h, y);
}

pub fn simulate(spec: &ProblemSpec, bc: &BoundaryData, cfg: &OracleConfig) -> Result<OracleField> {
    spec.validate()?;
    cfg.validate()?;
    if spec.geometry == Geometry::Spherical {
        return Err(Error::Usage(
            "the oracle works on planar problems; reduce spherical ones first".into(),
        ));
    }
    let x_far = cfg.domain_length;
    let nx = cfg.nx;
    let sys = System {
        params: spec.params,
        front_spec: spec.front.clone(),
        trace_radius: spec.trace_radius,
        offset: spec.stefan_offset(),
        bc,
        mode: cfg.front_mode,
        nx,
        dxi: 1.0 / nx as f64,
        x_far,
    };
    let t0 = cfg.t_start;
    let s0 = match cfg.front_mode {
        FrontMode::Stefan => bc.initial_front,
        FrontMode::Prescribed => spec.front.displacement(t0),
    };
    if !(s0 > 0.0 && s0 < x_far) {
        return Err(Error::Config(format!(
            "initial front {s0} must lie inside (0, domain_length = {x_far})"
        )));
    }

    let mut y = vec![0.0; sys.len()];
    for i in 0..=nx {
        let xi = i as f64 * sys.dxi;
        y[i] = (bc.initial_u1)(xi * s0);
        y[nx + 1 + i] = (bc.initial_u2)(s0 + xi * (x_far - s0));
    }
    y[sys.s_index()] = s0;
    sys.apply_bc(t0, &mut y);
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("initial data is not finite".into()));
    }

    let euler_limit = |y: &[f64]| {
        let s = y[sys.s_index()];
        let dx = (s * sys.dxi).min((x_far - s) * sys.dxi);
        0.5 * dx * dx / spec.params.a1.powi(2).max(spec.params.a2.powi(2))
    };
    if cfg.stepper == Stepper::Euler && cfg.dt > euler_limit(&y) {
        return Err(Error::Config(format!(
            "dt = {} violates the explicit stability bound {:e} (nx = {nx})",
            cfg.dt,
            euler_limit(&y)
        )));
    }

    let mut stops: Vec<f64> = cfg.output_times.clone();
    stops.push(cfg.t_end);
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let mut field = OracleField {
        times: vec![t0],
        front: vec![s0],
        boundary_temperature: vec![y[0]],
        boundary_flux: vec![sys.boundary_flux(t0, &y)],
        stefan_residual: vec![sys.stefan_residual(t0, &y)],
        snapshots: vec![sys.snapshot(t0, &y)],
        energy: None,
        steps: 0,
        max_stages_used: 0,
    };
    let mut far_flux = vec![sys.far_flux(&y)];
    let sensible0 = sys.heat_content(&y);
    let mut ws = Workspace {
        f0: vec![0.0; y.len()],
        f: vec![0.0; y.len()],
        ym2: vec![0.0; y.len()],
        ym1: vec![0.0; y.len()],
        yj: vec![0.0; y.len()],
    };

    let mut t = t0;
    for stop in stops {
        while stop - t > 1e-12 * stop {
            let h = match cfg.stepper {
                Stepper::Rkc => {
                    let mut h = cfg.dt.min(cfg.dt_rel * t).min(stop - t);
                    let rho = sys.spectral_radius(t, &y);
                    let mut m = stages_for(h * rho);
                    if m > cfg.max_stages {
                        m = cfg.max_stages;
                        h = RKC_SAFETY * rkc_beta(m) / rho;
                    }
                    rkc_step(&sys, t, h, m, &mut y, &mut ws);
                    field.max_stages_used = field.max_stages_used.max(m);
                    h
                }
                Stepper::Euler => {
                    let h = cfg.dt.min(stop - t);
                    if h > euler_limit(&y) {
                        return Err(Error::Config(format!(
                            "dt = {h} violates the explicit stability bound {:e} at t = {t}",
                            euler_limit(&y)
                        )));
                    }
                    sys.rhs(t, &y, &mut ws.f0);
                    for (v, d) in y.iter_mut().zip(&ws.f0) {
                        *v += h * d;
                    }
                    sys.apply_bc(t + h, &mut y);
                    field.max_stages_used = 1;
                    h
                }
            };
            t += h;
            field.steps += 1;
            let s = y[sys.s_index()];
            if !(s > 0.0 && s < x_far) || y.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!(
                    "simulation left the computational domain at t = {t} (front {s})"
                )));
            }
            field.times.push(t);
            field.front.push(s);
            field.boundary_temperature.push(y[0]);
            field.boundary_flux.push(sys.boundary_flux(t, &y));
            field.stefan_residual.push(sys.stefan_residual(t, &y));
            far_flux.push(sys.far_flux(&y));
        }
        t = stop;
        field.snapshots.push(sys.snapshot(t, &y));
    }

    if cfg.front_mode == FrontMode::Stefan && spec.trace_radius.is_none() {
        let integrate = |v: &[f64]| {
            field
                .times
                .windows(2)
                .zip(v.windows(2))
                .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
                .sum::<f64>()
        };
        let boundary_heat = integrate(&field.boundary_flux);
        let far_heat = integrate(&far_flux);
        let s_end = y[sys.s_index()];
        let sensible = sys.heat_content(&y) - sensible0;
        let latent = sys.latent_content(s_end) - sys.latent_content(s0);
        let defect = boundary_heat + far_heat - sensible - latent;
        let scale = boundary_heat
            .abs()
            .max(far_heat.abs())
            .max(sensible.abs())
            .max(latent.abs())
            .max(f64::MIN_POSITIVE);
        field.energy = Some(EnergyBalance {
            boundary_heat,
            far_heat,
            sensible,
            latent,
            defect,
            relative_defect: defect.abs() / scale,
        });
    }
    Ok(field)
}

/// Sup-norm deviations between an oracle run and a series solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    /// Over all snapshot nodes inside the window, each phase against its own series.
    pub temperature_sup: f64,
    pub front_sup: f64,
    pub flux_sup: f64,
    /// `max |ΔP| / |P_exact|` over the window, skipping instants with `P_exact = 0`.
    pub flux_rel_sup: f64,
    /// Largest discrete Stefan residual of the oracle field over the window.
    pub stefan_sup: f64,
}

impl OracleReport {
    pub fn max(&self) -> f64 {
        self.temperature_sup
            .max(self.front_sup)
            .max(self.flux_sup)
            .max(self.stefan_sup)
    }
}

/// Compares an oracle run with a series solution over `window` (inclusive).
///
/// Spherical solutions are compared in the reduced variable, and the oracle flux is
/// converted to `−λ₁·∂θ/∂r(b, t)` with `θ = v/r`.
pub fn compare(
    field: &OracleField,
    solution: &CoefficientSolution,
    lambda1: f64,
    window: (f64, f64),
) -> OracleReport {
    let inside = |t: f64| t >= window.0 && t <= window.1;
    let mut report = OracleReport {
        temperature_sup: 0.0,
        front_sup: 0.0,
        flux_sup: 0.0,
        flux_rel_sup: 0.0,
        stefan_sup: 0.0,
    };
    for snap in field.snapshots.iter().filter(|s| inside(s.t)) {
        for (x, u) in snap.x1.iter().zip(&snap.u1) {
            if let Ok(v) = solution.phase1.evaluate(*x, snap.t) {
                report.temperature_sup = report.temperature_sup.max((u - v).abs());
            }
        }
        for (x, u) in snap.x2.iter().zip(&snap.u2) {
            if let Ok(v) = solution.phase2.evaluate(*x, snap.t) {
                report.temperature_sup = report.temperature_sup.max((u - v).abs());
            }
        }
    }
    for (i, &t) in field.times.iter().enumerate() {
        if !inside(t) {
            continue;
        }
        report.front_sup = report
            .front_sup
            .max((field.front[i] - solution.front.displacement(t)).abs());
        report.stefan_sup = report.stefan_sup.max(field.stefan_residual[i].abs());
        let oracle = field.physical_flux(i, solution.sphere_radius, lambda1);
        let exact = solution.flux_at(t);
        let dev = (oracle - exact).abs();
        report.flux_sup = report.flux_sup.max(dev);
        if exact != 0.0 {
            report.flux_rel_sup = report.flux_rel_sup.max(dev / exact.abs());
        }
    }
    report
}

/// Root of `√π·λ·e^{λ²}·erf(λ) = St` by bisection.
pub fn neumann_lambda(stefan: f64) -> Result<f64> {
    if !(stefan.is_finite() && stefan > 0.0) {
        return Err(Error::Domain(format!(
            "Stefan number must be positive, got {stefan}"
        )));
    }
    let g = |l: f64| std::f64::consts::PI.sqrt() * l * (l * l).exp() * erf(l) - stefan;
    let (mut lo, mut hi) = (0.0, 1.0);
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Classical one-phase melting solution: liquid on `[0, 2λa√t]` driven by a fixed
/// surface temperature, solid resting at the melting temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub a: f64,
    pub conductivity: f64,
    pub l_gamma: f64,
    pub surface: f64,
    pub melt: f64,
    pub lambda: f64,
}

impl Similarity {
    pub fn new(a: f64, conductivity: f64, l_gamma: f64, surface: f64, melt: f64) -> Result<Self> {
        let lambda = neumann_lambda(conductivity * (surface - melt) / (a * a * l_gamma))?;
        Ok(Self {
            a,
            conductivity,
            l_gamma,
            surface,
            melt,
            lambda,
        })
    }

    pub fn stefan_number(&self) -> f64 {
        self.conductivity * (self.surface - self.melt) / (self.a * self.a * self.l_gamma)
    }

    pub fn front(&self, t: f64) -> f64 {
        2.0 * self.lambda * self.a * t.sqrt()
    }

    pub fn temperature(&self, x: f64, t: f64) -> f64 {
        if x >= self.front(t) {
            return self.melt;
        }
        let z = x / (2.0 * self.a * t.sqrt());
        self.melt + (self.surface - self.melt) * (1.0 - erf(z) / erf(self.lambda))
    }

    /// Problem spec for the oracle; both phases share `a` and the conductivity.
    pub fn spec(&self) -> ProblemSpec {
        ProblemSpec {
            geometry: Geometry::Planar,
            b: 0.0,
            f_taylor: vec![self.melt],
            front: FrontExpansion::sqrt_front(2.0 * self.lambda * self.a),
            params: PhaseParams {
                a1: self.a,
                a2: self.a,
                lambda1: self.conductivity,
                lambda2: self.conductivity,
                l_gamma: self.l_gamma,
                t_melt: self.melt,
            },
            truncation: 1,
            trace_radius: None,
        }
    }

    /// Starts from the exact profile at `t0`.
    pub fn exact_start(&self, t0: f64) -> BoundaryData {
        let me = *self;
        BoundaryData {
            left: LeftBoundary::Temperature(Box::new(move |_| me.surface)),
            far: Box::new(move |_| me.melt),
            initial_front: self.front(t0),
            initial_u1: Box::new(move |x| me.temperature(x, t0)),
            initial_u2: Box::new(move |_| me.melt),
        }
    }

    /// Starts from the quasi-steady linear profile with `s₀² = 2·St·a²·t0`, which
    /// does not use `λ`.
    pub fn quasi_steady_start(&self, t0: f64) -> BoundaryData {
        let me = *self;
        let s0 = self.a * (2.0 * self.stefan_number() * t0).sqrt();
        BoundaryData {
            left: LeftBoundary::Temperature(Box::new(move |_| me.surface)),
            far: Box::new(move |_| me.melt),
            initial_front: s0,
            initial_u1: Box::new(move |x| me.surface + (me.melt - me.surface) * x / s0),
            initial_u2: Box::new(move |_| me.melt),
        }
    }
}

fn samples_in(times: &[f64], values: &[f64], window: (f64, f64)) -> Vec<(f64, f64)> {
    times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, v)| (*t, *v))
        .collect()
}

fn least_squares_line(pts: &[(f64, f64)]) -> Result<(f64, f64)> {
    if pts.len() < 2 {
        return Err(Error::Degeneracy(
            "need at least two samples for a fit".into(),
        ));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Degeneracy("fit samples share one abscissa".into()));
    }
    let slope = sxy / sxx;
    Ok((my - slope * mx, slope))
}

/// `λ` of a front `s = 2λa√t`, from the slope of `s²` against `t` over `window`.
pub fn fit_similarity_coefficient(
    times: &[f64],
    front: &[f64],
    a: f64,
    window: (f64, f64),
) -> Result<f64> {
    let pts: Vec<_> = samples_in(times, front, window)
        .into_iter()
        .map(|(t, s)| (t, s * s))
        .collect();
    let (_, slope) = least_squares_line(&pts)?;
    Ok(slope.max(0.0).sqrt() / (2.0 * a))
}

/// `(c, p)` of `s ≈ c·tᵖ` by log-log regression over `window`.
pub fn fit_power_law(times: &[f64], front: &[f64], window: (f64, f64)) -> Result<(f64, f64)> {
    let pts: Vec<_> = samples_in(times, front, window)
        .into_iter()
        .filter(|(t, s)| *t > 0.0 && *s > 0.0)
        .map(|(t, s)| (t.ln(), s.ln()))
        .collect();
    let (icpt, slope) = least_squares_line(&pts)?;
    Ok((icpt.exp(), slope))
}
