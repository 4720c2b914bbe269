//! Problem definitions for the planar and spherical two-phase melting problem.
//!
//! Phase 1 (liquid) occupies `b < r < α(t)`, phase 2 (solid) `α(t) < r < ∞`. The
//! heat flux entering at `r = b` is the unknown to be reconstructed. The front is
//! prescribed as `α(t) = b + Σ αₙ t^{n/2}`.
//!
//! A spherical problem is solved through `v = r·θ`, which turns the radial equation
//! into the planar heat equation in `x = r − b`. The price is an interface value that
//! depends on time, `v(α(t), t) = α(t)·T_m`, and an extra term in the Stefan balance;
//! both are carried by [`ProblemSpec::trace_radius`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::jets::Jet;
use crate::series::{FluxSeries, HeatSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Planar,
    Spherical,
}

/// Material constants. `a1`, `a2` are the square roots of the diffusivities, i.e. the
/// `a` in the similarity argument `x/(2a√t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseParams {
    pub a1: f64,
    pub a2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Latent heat times density.
    pub l_gamma: f64,
    /// Melting temperature.
    pub t_melt: f64,
}

impl PhaseParams {
    fn violations(&self, out: &mut Vec<Violation>) {
        let positive = [
            ("params.a1", self.a1),
            ("params.a2", self.a2),
            ("params.lambda1", self.lambda1),
            ("params.lambda2", self.lambda2),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                out.push(Violation {
                    field,
                    message: format!("must be positive and finite, got {v}"),
                });
            }
        }
        if !(self.l_gamma.is_finite() && self.l_gamma >= 0.0) {
            out.push(Violation {
                field: "params.l_gamma",
                message: format!("must be non-negative and finite, got {}", self.l_gamma),
            });
        }
        if !self.t_melt.is_finite() {
            out.push(Violation {
                field: "params.t_melt",
                message: format!("must be finite, got {}", self.t_melt),
            });
        }
    }
}

/// Coefficients `α₁, α₂, …` of the front displacement `s(t) = Σ αₙ t^{n/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontExpansion {
    pub alphas: Vec<f64>,
}

impl FrontExpansion {
    pub fn sqrt_front(alpha: f64) -> Self {
        Self {
            alphas: vec![alpha],
        }
    }

    /// Displacement `s(t)` from the initial position.
    pub fn displacement(&self, t: f64) -> f64 {
        let tau = t.sqrt();
        self.alphas
            .iter()
            .rev()
            .fold(0.0, |acc, a| (acc + a) * tau)
    }

    /// `√t · ds/dt = Σ (n/2)·αₙ·t^{(n−1)/2}`, finite at `t = 0`.
    pub fn scaled_speed(&self, t: f64) -> f64 {
        let tau = t.sqrt();
        self.alphas
            .iter()
            .enumerate()
            .map(|(i, a)| 0.5 * (i + 1) as f64 * a * tau.powi(i as i32))
            .sum()
    }

    pub fn speed(&self, t: f64) -> f64 {
        self.scaled_speed(t) / t.sqrt()
    }

    /// Jet of `s` as a function of `τ`: `[0, α₁, α₂, …]`.
    pub fn displacement_jet(&self, order: usize) -> Jet {
        let mut c = vec![0.0; order + 1];
        for (i, a) in self.alphas.iter().enumerate() {
            if i < order {
                c[i + 1] = *a;
            }
        }
        Jet::from_prefix(&c, order).expect("finite front coefficients")
    }

    /// Jet of `s(τ)/(2aτ) = Σ αₙ τ^{n−1} / (2a)`, the basis-function argument on the
    /// front.
    pub fn argument_jet(&self, a: f64, order: usize) -> Jet {
        let c: Vec<f64> = self.alphas.iter().map(|al| al / (2.0 * a)).collect();
        Jet::from_prefix(&c, order).expect("finite front coefficients")
    }

    /// Jet of `τ·ds/dt = Σ (n/2)·αₙ·τ^{n−1}`.
    pub fn scaled_speed_jet(&self, order: usize) -> Jet {
        let c: Vec<f64> = self
            .alphas
            .iter()
            .enumerate()
            .map(|(i, a)| 0.5 * (i + 1) as f64 * a)
            .collect();
        Jet::from_prefix(&c, order).expect("finite front coefficients")
    }

    /// True when only `α₁` is nonzero.
    pub fn is_sqrt_front(&self) -> bool {
        self.alphas.iter().skip(1).all(|a| *a == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub geometry: Geometry,
    /// Contact radius; zero for planar problems.
    #[serde(default)]
    pub b: f64,
    /// Derivatives `f⁽ⁿ⁾(b)` of the initial temperature of phase 2.
    pub f_taylor: Vec<f64>,
    pub front: FrontExpansion,
    pub params: PhaseParams,
    /// Highest series index kept (coefficients `0..=truncation`).
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    /// Set on planar problems obtained from a spherical one: the original contact
    /// radius. The interface value becomes `(radius + s(t))·t_melt`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_radius: Option<f64>,
}

fn default_truncation() -> usize {
    3
}

impl ProblemSpec {
    /// `f(x) = x`, `u_m = 0`, unit constants, front `√t`.
    pub fn test_problem() -> Self {
        Self {
            geometry: Geometry::Planar,
            b: 0.0,
            f_taylor: vec![0.0, 1.0],
            front: FrontExpansion::sqrt_front(1.0),
            params: PhaseParams {
                a1: 1.0,
                a2: 1.0,
                lambda1: 1.0,
                lambda2: 1.0,
                l_gamma: 1.0,
                t_melt: 0.0,
            },
            truncation: 3,
            trace_radius: None,
        }
    }

    /// Returns the spec unchanged when valid, or every violated invariant.
    pub fn validate(&self) -> Result<&Self> {
        let mut v = Vec::new();
        self.params.violations(&mut v);
        if !(self.b.is_finite() && self.b >= 0.0) {
            v.push(Violation {
                field: "b",
                message: format!("must be non-negative and finite, got {}", self.b),
            });
        }
        match self.geometry {
            Geometry::Spherical => {
                if !(self.b > 0.0) {
                    v.push(Violation {
                        field: "b",
                        message: "spherical geometry needs a positive contact radius".into(),
                    });
                }
                if self.trace_radius.is_some() {
                    v.push(Violation {
                        field: "trace_radius",
                        message: "only reduced planar problems carry a trace radius".into(),
                    });
                }
            }
            Geometry::Planar => {
                if self.b != 0.0 {
                    v.push(Violation {
                        field: "b",
                        message: format!("planar problems start at x = 0, got b = {}", self.b),
                    });
                }
                if let Some(r) = self.trace_radius {
                    if !(r.is_finite() && r > 0.0) {
                        v.push(Violation {
                            field: "trace_radius",
                            message: format!("must be positive and finite, got {r}"),
                        });
                    }
                }
            }
        }
        if self.f_taylor.is_empty() {
            v.push(Violation {
                field: "f_taylor",
                message: "needs at least f(b)".into(),
            });
        } else if let Some(i) = self.f_taylor.iter().position(|c| !c.is_finite()) {
            v.push(Violation {
                field: "f_taylor",
                message: format!("entry {i} is not finite"),
            });
        } else if self.params.t_melt.is_finite() {
            let want = self.interface_value_at_zero();
            let got = self.f_taylor[0];
            if (got - want).abs() > 1e-12 * (1.0 + want.abs()) {
                v.push(Violation {
                    field: "f_taylor",
                    message: format!(
                        "compatibility f(b) = melting level violated: f(b) = {got}, expected {want}"
                    ),
                });
            }
        }
        if self.front.alphas.is_empty() {
            v.push(Violation {
                field: "front.alphas",
                message: "needs at least alpha_1".into(),
            });
        } else {
            if let Some(i) = self.front.alphas.iter().position(|c| !c.is_finite()) {
                v.push(Violation {
                    field: "front.alphas",
                    message: format!("entry {i} is not finite"),
                });
            }
            if !(self.front.alphas[0] > 0.0) {
                v.push(Violation {
                    field: "front.alphas",
                    message: format!(
                        "alpha_1 must be positive (front moves into the solid), got {}",
                        self.front.alphas[0]
                    ),
                });
            }
        }
        if self.truncation < 1 {
            v.push(Violation {
                field: "truncation",
                message: "must be at least 1".into(),
            });
        }
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::Invalid(v))
        }
    }

    /// `f⁽ⁿ⁾(b)`, zero beyond the given data.
    pub fn initial_derivative(&self, n: usize) -> f64 {
        self.f_taylor.get(n).copied().unwrap_or(0.0)
    }

    /// Interface value at `t = 0`.
    pub fn interface_value_at_zero(&self) -> f64 {
        match self.trace_radius {
            Some(r) => r * self.params.t_melt,
            None => self.params.t_melt,
        }
    }

    /// Value both phases take on the front at time `t`.
    pub fn interface_value(&self, t: f64) -> f64 {
        match self.trace_radius {
            Some(r) => (r + self.front.displacement(t)) * self.params.t_melt,
            None => self.params.t_melt,
        }
    }

    pub fn interface_value_jet(&self, order: usize) -> Jet {
        match self.trace_radius {
            Some(r) => {
                let s = self.front.displacement_jet(order);
                &Jet::constant(r * self.params.t_melt, order) + &s.scale(self.params.t_melt)
            }
            None => Jet::constant(self.params.t_melt, order),
        }
    }

    /// Factor multiplying `Lγ·ds/dt` in the Stefan balance: 1 for planar problems,
    /// `radius + s` for reduced spherical ones.
    pub fn latent_weight(&self, t: f64) -> f64 {
        match self.trace_radius {
            Some(r) => r + self.front.displacement(t),
            None => 1.0,
        }
    }

    pub fn latent_weight_jet(&self, order: usize) -> Jet {
        match self.trace_radius {
            Some(r) => &Jet::constant(r, order) + &self.front.displacement_jet(order),
            None => Jet::constant(1.0, order),
        }
    }

    /// Constant subtracted from the Stefan balance of a reduced spherical problem,
    /// `(λ₁ − λ₂)·T_m`; zero for planar problems.
    pub fn stefan_offset(&self) -> f64 {
        match self.trace_radius {
            Some(_) => (self.params.lambda1 - self.params.lambda2) * self.params.t_melt,
            None => 0.0,
        }
    }

    /// True when the interface value does not depend on time.
    pub fn has_constant_interface(&self) -> bool {
        self.trace_radius.is_none() || self.params.t_melt == 0.0
    }
}

/// Planar problem for `v(x, t) = (x + b)·θ(x + b, t)`.
///
/// Initial data `g⁽ⁿ⁾(0) = b·f⁽ⁿ⁾(b) + n·f⁽ⁿ⁻¹⁾(b)`; the front keeps its expansion
/// but starts at `x = 0`.
pub fn spherical_reduce(spec: &ProblemSpec) -> Result<ProblemSpec> {
    if spec.geometry != Geometry::Spherical {
        return Err(Error::Usage(
            "spherical_reduce needs a spherical problem".into(),
        ));
    }
    spec.validate()?;
    let b = spec.b;
    let len = spec.f_taylor.len() + 1;
    let g = (0..len)
        .map(|n| {
            let here = b * spec.initial_derivative(n);
            let below = if n > 0 {
                n as f64 * spec.initial_derivative(n - 1)
            } else {
                0.0
            };
            here + below
        })
        .collect();
    Ok(ProblemSpec {
        geometry: Geometry::Planar,
        b: 0.0,
        f_taylor: g,
        front: spec.front.clone(),
        params: spec.params,
        truncation: spec.truncation,
        trace_radius: Some(b),
    })
}

/// Spherical temperature field rebuilt from the planar series of `v = r·θ`.
#[derive(Debug, Clone)]
pub struct SphericalField {
    pub phase1: HeatSeries,
    pub phase2: HeatSeries,
    pub front: FrontExpansion,
    pub b: f64,
}

impl SphericalField {
    /// Position of the front, `α(t) = b + s(t)`.
    pub fn front_radius(&self, t: f64) -> f64 {
        self.b + self.front.displacement(t)
    }

    pub fn temperature(&self, r: f64, t: f64) -> Result<f64> {
        if !(r >= self.b) {
            return Err(Error::Domain(format!(
                "radius {r} lies inside the contact sphere of radius {}",
                self.b
            )));
        }
        let x = r - self.b;
        let v = if x <= self.front.displacement(t) {
            self.phase1.evaluate(x, t)?
        } else {
            self.phase2.evaluate(x, t)?
        };
        Ok(v / r)
    }

    /// `P(t) = −λ₁·∂θ₁/∂r (b, t) = −λ₁·[b·∂ₓv(0, t) − v(0, t)] / b²`.
    pub fn boundary_flux(&self, lambda1: f64, t: f64) -> Result<f64> {
        let v = self.phase1.evaluate(0.0, t)?;
        let vx = self.phase1.derivative_x(0.0, t)?;
        Ok(-lambda1 * (vx * self.b - v) / (self.b * self.b))
    }

    /// Flux series of [`Self::boundary_flux`] in powers of `√t`: with
    /// `Δₙ = Aₙ − Bₙ` and `Σₙ = Aₙ + Bₙ`,
    /// `Pₙ = (λ₁/b)(2a)ⁿ iⁿerfc(0)·[Δₙ₊₁ + Σₙ/b]` plus the `t^{−1/2}` term from `Δ₀`.
    pub fn flux_series(&self, lambda1: f64) -> FluxSeries {
        let s = &self.phase1;
        let a = s.scale_a;
        let b = self.b;
        let n_max = s.truncation();
        let p = (0..=n_max)
            .map(|n| {
                let (ap, bp) = (s.plus(n + 1), s.minus(n + 1));
                let bracket = ap - bp + (s.plus(n) + s.minus(n)) / b;
                lambda1 / b
                    * (2.0 * a).powi(n as i32)
                    * crate::specfun::value_at_zero(n)
                    * bracket
            })
            .collect();
        let singular = lambda1 / b * (s.plus(0) - s.minus(0)) * crate::specfun::TWO_OVER_SQRT_PI
            / (2.0 * a);
        FluxSeries { singular, p }
    }
}

/// Lifts the series of a reduced problem back to spherical temperatures.
pub fn spherical_lift(
    phase1: &HeatSeries,
    phase2: &HeatSeries,
    front: &FrontExpansion,
    b: f64,
) -> Result<SphericalField> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::Domain(format!(
            "contact radius must be positive, got {b}"
        )));
    }
    Ok(SphericalField {
        phase1: phase1.clone(),
        phase2: phase2.clone(),
        front: front.clone(),
        b,
    })
}
