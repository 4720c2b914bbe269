//! One-phase series solutions
//!
//! `u(x, t) = Σₙ (2a√t)ⁿ [Aₙ iⁿerfc(x/(2a√t)) + Bₙ iⁿerfc(−x/(2a√t))]`
//!
//! Every term solves `u_t = a²·u_xx`. The `Aₙ` terms vanish as `t → 0⁺` for `x > 0`,
//! the `Bₙ` terms tend to `(2/n!)·Bₙ·xⁿ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{jet_compose_basis, jet_reversed_gaussian, Jet};
use crate::model::ProblemSpec;
use crate::specfun::{value_at_zero, SpecFun, TWO_OVER_SQRT_PI};

/// How the `t^{−1/2}` part of the Stefan balance treats the Gaussian factor of the
/// `Aₙ`/`Cₙ` terms.
///
/// `Derived` differentiates the series: both `A₀` and `B₀` carry `e^{−ξ²}`.
/// `Printed` uses `e^{+ξ²}` on the `A₀` and `C₀` terms, a widely quoted form of that
/// balance that does not follow from the series but reproduces tabulated values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StefanConvention {
    #[default]
    Derived,
    Printed,
}

impl std::str::FromStr for StefanConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "derived" => Ok(Self::Derived),
            "printed" => Ok(Self::Printed),
            other => Err(Error::Usage(format!(
                "unknown convention {other:?}, expected derived or printed"
            ))),
        }
    }
}

impl std::fmt::Display for StefanConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Derived => "derived",
            Self::Printed => "printed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatSeries {
    pub scale_a: f64,
    /// `Aₙ` (or `Cₙ`), multiplying `iⁿerfc(+x/(2a√t))`.
    pub coeff_plus: Vec<f64>,
    /// `Bₙ` (or `Dₙ`), multiplying `iⁿerfc(−x/(2a√t))`.
    pub coeff_minus: Vec<f64>,
}

impl HeatSeries {
    pub fn new(scale_a: f64, coeff_plus: Vec<f64>, coeff_minus: Vec<f64>) -> Result<Self> {
        if !(scale_a > 0.0 && scale_a.is_finite()) {
            return Err(Error::Domain(format!("scale must be positive, got {scale_a}")));
        }
        if coeff_plus.len() != coeff_minus.len() || coeff_plus.is_empty() {
            return Err(Error::Usage(format!(
                "coefficient sequences need equal nonzero length, got {} and {}",
                coeff_plus.len(),
                coeff_minus.len()
            )));
        }
        if coeff_plus.iter().chain(&coeff_minus).any(|c| !c.is_finite()) {
            return Err(Error::Domain("series coefficients must be finite".into()));
        }
        Ok(Self {
            scale_a,
            coeff_plus,
            coeff_minus,
        })
    }

    pub fn zero(scale_a: f64, truncation: usize) -> Self {
        Self {
            scale_a,
            coeff_plus: vec![0.0; truncation + 1],
            coeff_minus: vec![0.0; truncation + 1],
        }
    }

    /// Highest index kept.
    pub fn truncation(&self) -> usize {
        self.coeff_plus.len() - 1
    }

    pub fn plus(&self, n: usize) -> f64 {
        self.coeff_plus.get(n).copied().unwrap_or(0.0)
    }

    pub fn minus(&self, n: usize) -> f64 {
        self.coeff_minus.get(n).copied().unwrap_or(0.0)
    }

    fn scaled_argument(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!(
                "series evaluation needs t > 0, got {t}; use initial_limit at t = 0"
            )));
        }
        if !x.is_finite() {
            return Err(Error::Domain(format!("x must be finite, got {x}")));
        }
        let width = 2.0 * self.scale_a * t.sqrt();
        Ok((x / width, width))
    }

    pub fn evaluate(&self, x: f64, t: f64) -> Result<f64> {
        let (z, width) = self.scaled_argument(x, t)?;
        let sf = SpecFun::default();
        let n = self.truncation();
        let pos = sf.inerfc_all(n, z)?;
        let neg = sf.inerfc_all(n, -z)?;
        let mut sum = 0.0;
        let mut w = 1.0;
        for k in 0..=n {
            sum += w * (self.coeff_plus[k] * pos[k] + self.coeff_minus[k] * neg[k]);
            w *= width;
        }
        Ok(sum)
    }

    pub fn derivative_x(&self, x: f64, t: f64) -> Result<f64> {
        self.derivative_x_with(x, t, StefanConvention::Derived)
    }

    /// `∂ₓu`, with the `n = 0` Gaussian of the `A₀` term optionally reversed.
    pub fn derivative_x_with(&self, x: f64, t: f64, convention: StefanConvention) -> Result<f64> {
        let (z, width) = self.scaled_argument(x, t)?;
        let sf = SpecFun::default();
        let n = self.truncation();
        // i^{k-1}erfc(±z) for k = 0..=n
        let pos = sf.inerfc_all(n.saturating_sub(1), z)?;
        let neg = sf.inerfc_all(n.saturating_sub(1), -z)?;
        let gauss = TWO_OVER_SQRT_PI * (-z * z).exp();
        let gauss_plus = match convention {
            StefanConvention::Derived => gauss,
            StefanConvention::Printed => TWO_OVER_SQRT_PI * (z * z).exp(),
        };
        let mut sum =
            (-self.coeff_plus[0] * gauss_plus + self.coeff_minus[0] * gauss) / width;
        let mut w = 1.0;
        for k in 1..=n {
            sum += w * (-self.coeff_plus[k] * pos[k - 1] + self.coeff_minus[k] * neg[k - 1]);
            w *= width;
        }
        Ok(sum)
    }

    /// Limit as `t → 0⁺`: `Σ (2/n!)·Bₙ·xⁿ`.
    pub fn initial_limit(&self, x: f64) -> f64 {
        let mut sum = 0.0;
        let mut term = 2.0; // 2·xⁿ/n!
        for (n, b) in self.coeff_minus.iter().enumerate() {
            if n > 0 {
                term *= x / n as f64;
            }
            sum += b * term;
        }
        sum
    }

    /// `−λ·∂ₓu(0, t)` in powers of `√t`:
    /// `Pₙ₋₁ = λ(2a)ⁿ⁻¹(Aₙ − Bₙ)·iⁿ⁻¹erfc(0)`, plus the `t^{−1/2}` term of `n = 0`.
    pub fn flux_at_origin(&self, lambda: f64) -> FluxSeries {
        let a = self.scale_a;
        let p = (1..=self.truncation())
            .map(|n| {
                lambda
                    * (2.0 * a).powi(n as i32 - 1)
                    * (self.coeff_plus[n] - self.coeff_minus[n])
                    * value_at_zero(n - 1)
            })
            .collect();
        let singular =
            lambda * (self.coeff_plus[0] - self.coeff_minus[0]) * TWO_OVER_SQRT_PI / (2.0 * a);
        FluxSeries { singular, p }
    }
}

/// `P(t) = P₋₁·t^{−1/2} + Σₙ Pₙ·t^{n/2}`.
///
/// `P₋₁` is nonzero whenever `A₀ ≠ B₀`; the regular coefficients `p` are the ones
/// usually tabulated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxSeries {
    pub singular: f64,
    pub p: Vec<f64>,
}

impl FluxSeries {
    pub fn eval(&self, t: f64) -> f64 {
        let tau = t.sqrt();
        let regular = self.p.iter().rev().fold(0.0, |acc, c| acc * tau + c);
        regular + self.singular / tau
    }

    pub fn regular(&self, t: f64) -> f64 {
        let tau = t.sqrt();
        self.p.iter().rev().fold(0.0, |acc, c| acc * tau + c)
    }

    pub fn coeff(&self, n: usize) -> f64 {
        self.p.get(n).copied().unwrap_or(0.0)
    }
}

/// Jets (in `τ`) of one phase's value and of `τ·∂ₓu` on the front.
pub(crate) fn phase_front_jets(
    series: &HeatSeries,
    spec: &ProblemSpec,
    order: usize,
    convention: StefanConvention,
) -> Result<(Jet, Jet)> {
    let sf = SpecFun::default();
    let a = series.scale_a;
    let xi = spec.front.argument_jet(a, order);
    let mut value = Jet::zero(order);
    let mut flux = Jet::zero(order);
    for n in 0..=series.truncation().min(order) {
        let (cp, cm) = (series.plus(n), series.minus(n));
        let w = (2.0 * a).powi(n as i32);
        if cp != 0.0 || cm != 0.0 {
            let p = jet_compose_basis(&sf, n as i32, &xi, 1.0)?;
            let m = jet_compose_basis(&sf, n as i32, &xi, -1.0)?;
            value = &value + &(&p.scale(cp) + &m.scale(cm)).shift(n).scale(w);
            let dp = if n == 0 && convention == StefanConvention::Printed {
                jet_reversed_gaussian(&xi)
            } else {
                jet_compose_basis(&sf, n as i32 - 1, &xi, 1.0)?
            };
            let dm = jet_compose_basis(&sf, n as i32 - 1, &xi, -1.0)?;
            let term = &dm.scale(cm) - &dp.scale(cp);
            flux = &flux + &term.shift(n).scale(w / (2.0 * a));
        }
    }
    Ok((value, flux))
}

/// Residual jets of the three front conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontResiduals {
    /// `u₁(s(t), t) − interface value`
    pub interface1: Jet,
    /// `u₂(s(t), t) − interface value`
    pub interface2: Jet,
    /// `√t·[λ₁∂ₓu₁ − λ₂∂ₓu₂ + Lγ·w·ds/dt − offset]` on the front.
    pub stefan: Jet,
}

impl FrontResiduals {
    /// The k-th `τ`-derivatives at zero, `k = 0..=order`, of each condition.
    pub fn derivatives(&self) -> [Vec<f64>; 3] {
        let d = |j: &Jet| (0..=j.order()).map(|k| j.derivative_at_zero(k)).collect();
        [d(&self.interface1), d(&self.interface2), d(&self.stefan)]
    }

    pub fn max_abs(&self) -> [f64; 3] {
        let m = |j: &Jet| j.coeffs().iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
        [m(&self.interface1), m(&self.interface2), m(&self.stefan)]
    }
}

/// Interface and Stefan conditions expanded as jets in `τ = √t` up to order `k`.
///
/// The Stefan balance is multiplied by `√t` so that the `n = 0` terms, which scale as
/// `t^{−1/2}`, become regular.
pub fn front_residual_jet(
    series1: &HeatSeries,
    series2: &HeatSeries,
    spec: &ProblemSpec,
    k: usize,
    convention: StefanConvention,
) -> Result<FrontResiduals> {
    let p = &spec.params;
    let (v1, f1) = phase_front_jets(series1, spec, k, convention)?;
    let (v2, f2) = phase_front_jets(series2, spec, k, convention)?;
    let trace = spec.interface_value_jet(k);
    let latent = spec
        .latent_weight_jet(k)
        .product(&spec.front.scaled_speed_jet(k))?
        .scale(p.l_gamma);
    let offset = Jet::variable(k).scale(spec.stefan_offset());
    let stefan = &(&(&f1.scale(p.lambda1) - &f2.scale(p.lambda2)) + &latent) - &offset;
    Ok(FrontResiduals {
        interface1: &v1 - &trace,
        interface2: &v2 - &trace,
        stefan,
    })
}

/// The same three conditions evaluated pointwise at `t > 0`.
pub fn front_residual_at(
    series1: &HeatSeries,
    series2: &HeatSeries,
    spec: &ProblemSpec,
    t: f64,
    convention: StefanConvention,
) -> Result<[f64; 3]> {
    let p = &spec.params;
    let x = spec.front.displacement(t);
    let trace = spec.interface_value(t);
    let r1 = series1.evaluate(x, t)? - trace;
    let r2 = series2.evaluate(x, t)? - trace;
    let d1 = series1.derivative_x_with(x, t, convention)?;
    let d2 = series2.derivative_x_with(x, t, convention)?;
    let tau = t.sqrt();
    let r3 = tau * (p.lambda1 * d1 - p.lambda2 * d2 - spec.stefan_offset())
        + p.l_gamma * spec.latent_weight(t) * spec.front.scaled_speed(t);
    Ok([r1, r2, r3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single(plus: &[f64], minus: &[f64]) -> HeatSeries {
        HeatSeries::new(1.0, plus.to_vec(), minus.to_vec()).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let s = single(&[1.0], &[0.0]);
        assert_relative_eq!(s.evaluate(0.0, 0.3).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(
            s.evaluate(1.0, 0.25).unwrap(),
            0.157_299_207_050_285_13,
            max_relative = 1e-14
        );
        let s = single(&[0.0, 0.0], &[0.0, 0.5]);
        assert_relative_eq!(s.evaluate(0.0, 1.0).unwrap(), 0.564_189_583_547_756_3, epsilon = 1e-15);
        assert!(matches!(s.evaluate(0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(s.evaluate(0.0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn initial_limit_examples() {
        assert_relative_eq!(single(&[0.0, 0.0], &[0.0, 0.5]).initial_limit(0.7), 0.7, epsilon = 1e-15);
        assert_eq!(single(&[0.0], &[1.5]).initial_limit(12.0), 3.0);
        assert_eq!(single(&[0.0; 3], &[0.0, 0.0, 1.0]).initial_limit(2.0), 4.0);
    }

    #[test]
    fn flux_examples() {
        let f = single(&[0.0, 1.0], &[0.0, 0.0]).flux_at_origin(1.0);
        assert_relative_eq!(f.p[0], 1.0, epsilon = 1e-15);
        assert_eq!(f.singular, 0.0);
        let f = single(&[0.0, -3.004493], &[0.0, 0.5]).flux_at_origin(1.0);
        assert_relative_eq!(f.p[0], -3.504493, epsilon = 1e-12);
        let f = single(&[0.0, 1.0, 0.0], &[0.0, 2.0, 0.0]).flux_at_origin(1.0);
        assert_eq!(f.p[1], 0.0);
    }

    #[test]
    fn convention_parsing() {
        assert_eq!("printed".parse::<StefanConvention>().unwrap(), StefanConvention::Printed);
        assert!("other".parse::<StefanConvention>().is_err());
        assert_eq!(StefanConvention::default().to_string(), "derived");
    }

    #[test]
    fn new_checks_shapes() {
        assert!(HeatSeries::new(1.0, vec![1.0], vec![]).is_err());
        assert!(HeatSeries::new(0.0, vec![1.0], vec![1.0]).is_err());
        assert!(HeatSeries::new(1.0, vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn empty_series_leave_only_latent_term() {
        let spec = ProblemSpec::test_problem();
        let z = HeatSeries::zero(1.0, 3);
        let r = front_residual_jet(&z, &z, &spec, 3, StefanConvention::Derived).unwrap();
        assert!(r.interface1.coeffs().iter().all(|c| *c == 0.0));
        assert!(r.interface2.coeffs().iter().all(|c| *c == 0.0));
        assert_eq!(r.stefan.coeffs(), &[0.5, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn residual_is_linear_in_b1() {
        let spec = ProblemSpec::test_problem();
        let base = HeatSeries::new(1.0, vec![0.1, -0.2, 0.3], vec![0.4, 0.5, -0.6]).unwrap();
        let mut pert = base.clone();
        let eps = 1e-3;
        pert.coeff_minus[1] += eps;
        let r0 = front_residual_jet(&base, &base, &spec, 2, StefanConvention::Derived).unwrap();
        let r1 = front_residual_jet(&pert, &base, &spec, 2, StefanConvention::Derived).unwrap();
        let want = eps * crate::specfun::inerfc(1, -0.5).unwrap() * 2.0;
        assert_relative_eq!(
            r1.interface1.coeff(1) - r0.interface1.coeff(1),
            want,
            max_relative = 1e-10
        );
    }
}
