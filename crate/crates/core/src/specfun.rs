//! Complementary error function and its repeated integrals.
//!
//! The family is indexed by `n`:
//!
//! * `i⁰erfc = erfc`
//! * `iⁿerfc(x) = ∫ₓ^∞ iⁿ⁻¹erfc(s) ds` for `n ≥ 1`
//! * `i⁻¹erfc(x) = (2/√π)·e^{−x²}`, and more generally
//!   `i^{−k−1}erfc(x) = (2/√π)·H_k(x)·e^{−x²}` with `H_k` the physicists' Hermite
//!   polynomial, so that `d/dx iⁿerfc = −iⁿ⁻¹erfc` holds for every index.
//!
//! For `x ≤ 0` the upward three-term recurrence
//! `2n·iⁿerfc = iⁿ⁻²erfc − 2x·iⁿ⁻¹erfc` only adds positive terms and is used directly.
//! For `x > 0` the wanted solution is the recessive one and upward recursion cancels.
//! Up to `x = 1` the loss stays below five digits for `n ≤ 12`, so upward recursion is
//! still used there. Beyond that the ratios `iⁿerfc/iⁿ⁻¹erfc` come from backward
//! recursion and are multiplied onto `erfc(x)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// 2/√π
pub const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Extra depth of the backward ratio recursion beyond the requested order.
const BACKWARD_DEPTH: usize = 600;

/// Largest positive argument still served by upward recursion.
const UPWARD_LIMIT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecFunConfig {
    /// Largest `n` for which `iⁿerfc` is served.
    pub max_order: usize,
    pub abs_tol: f64,
    /// Panels of the composite Gauss-Legendre rule used by [`reference`].
    pub quadrature_panels: usize,
}

impl Default for SpecFunConfig {
    fn default() -> Self {
        Self {
            max_order: 12,
            abs_tol: 1e-12,
            quadrature_panels: 2048,
        }
    }
}

impl SpecFunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_order < 2 {
            return Err(Error::Config(format!(
                "max_order must be at least 2, got {}",
                self.max_order
            )));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::Config(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if self.quadrature_panels == 0 {
            return Err(Error::Config("quadrature_panels must be positive".into()));
        }
        Ok(())
    }

    /// Lowest (most negative) index served. Negative indices are derivatives of the
    /// Gaussian and are needed when basis functions are composed with non-constant
    /// arguments.
    pub fn min_order(&self) -> i32 {
        -(self.max_order as i32) - 1
    }
}

/// Evaluator bound to a configuration. The free functions of this module use
/// [`SpecFunConfig::default`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SpecFun {
    cfg: SpecFunConfig,
}

impl SpecFun {
    pub fn new(cfg: SpecFunConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg })
    }

    pub fn config(&self) -> &SpecFunConfig {
        &self.cfg
    }

    pub fn inerfc(&self, n: i32, x: f64) -> Result<f64> {
        check_finite(x)?;
        if n > self.cfg.max_order as i32 {
            return Err(Error::Capability(format!(
                "i^{n}erfc requested but max_order is {}",
                self.cfg.max_order
            )));
        }
        if n < self.cfg.min_order() {
            return Err(Error::Capability(format!(
                "i^{n}erfc is below the supported index {}",
                self.cfg.min_order()
            )));
        }
        Ok(match n {
            n if n < 0 => gaussian_family((-n - 1) as usize, x),
            0 => libm::erfc(x),
            n if x <= UPWARD_LIMIT => upward(n as usize, x),
            n => backward(n as usize, x),
        })
    }

    /// All values `i⁰erfc(x) .. iⁿerfc(x)` in one pass.
    pub fn inerfc_all(&self, n: usize, x: f64) -> Result<Vec<f64>> {
        check_finite(x)?;
        if n > self.cfg.max_order {
            return Err(Error::Capability(format!(
                "i^{n}erfc requested but max_order is {}",
                self.cfg.max_order
            )));
        }
        if x <= UPWARD_LIMIT {
            let mut out = Vec::with_capacity(n + 1);
            let mut prev = TWO_OVER_SQRT_PI * (-x * x).exp();
            let mut cur = libm::erfc(x);
            out.push(cur);
            for k in 1..=n {
                let next = (prev - 2.0 * x * cur) / (2.0 * k as f64);
                prev = cur;
                cur = next;
                out.push(cur);
            }
            Ok(out)
        } else {
            let ratios = backward_ratios(n, x);
            let mut out = Vec::with_capacity(n + 1);
            let mut cur = libm::erfc(x);
            out.push(cur);
            for r in ratios.iter().take(n) {
                cur *= r;
                out.push(cur);
            }
            Ok(out)
        }
    }

    pub fn inerfc_at_zero(&self, n: i32) -> Result<f64> {
        if n < 0 {
            return Err(Error::Domain(format!(
                "i^n erfc(0) is defined here for n >= 0, got {n}"
            )));
        }
        if n > self.cfg.max_order as i32 {
            return Err(Error::Capability(format!(
                "i^{n}erfc(0) requested but max_order is {}",
                self.cfg.max_order
            )));
        }
        Ok(value_at_zero(n as usize))
    }

    /// `d^m/dx^m iⁿerfc(x) = (−1)^m · i^{n−m}erfc(x)`.
    pub fn inerfc_deriv(&self, n: i32, m: u32, x: f64) -> Result<f64> {
        if n < 0 {
            return Err(Error::Domain(format!("basis index must be >= 0, got {n}")));
        }
        let idx = n - m as i32;
        if idx < self.cfg.min_order() {
            return Err(Error::Capability(format!(
                "derivative {m} of i^{n}erfc needs i^{idx}erfc, below supported index {}",
                self.cfg.min_order()
            )));
        }
        let v = self.inerfc(idx, x)?;
        Ok(if m % 2 == 0 { v } else { -v })
    }

    /// `n!·iⁿerfc(−x) / (2xⁿ)`, which tends to 1 as `x → ∞`.
    pub fn asymptotic_ratio(&self, n: u32, x: f64) -> Result<f64> {
        check_finite(x)?;
        if x <= 0.0 {
            return Err(Error::Domain(format!(
                "asymptotic ratio needs x > 0, got {x}"
            )));
        }
        let v = self.inerfc(n as i32, -x)?;
        Ok(factorial(n as usize) * v / (2.0 * x.powi(n as i32)))
    }
}

pub fn erfc(x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(libm::erfc(x))
}

pub fn inerfc(n: i32, x: f64) -> Result<f64> {
    SpecFun::default().inerfc(n, x)
}

pub fn inerfc_at_zero(n: i32) -> Result<f64> {
    SpecFun::default().inerfc_at_zero(n)
}

pub fn inerfc_deriv(n: i32, m: u32, x: f64) -> Result<f64> {
    SpecFun::default().inerfc_deriv(n, m, x)
}

pub fn asymptotic_ratio(n: u32, x: f64) -> Result<f64> {
    SpecFun::default().asymptotic_ratio(n, x)
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("argument must be finite, got {x}")))
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn double_factorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

/// `Γ((n+1)/2) / (n!·√π)` from exact half-integer Gamma values.
pub(crate) fn value_at_zero(n: usize) -> f64 {
    if n % 2 == 1 {
        // Γ(k) = (k-1)! with k = (n+1)/2
        let k = (n + 1) / 2;
        factorial(k - 1) / (factorial(n) * PI.sqrt())
    } else {
        // Γ(m + 1/2) = (2m-1)!!·√π / 2^m with m = n/2
        let m = n / 2;
        double_factorial(2 * m as i64 - 1) / (2f64.powi(m as i32) * factorial(n))
    }
}

/// `(2/√π)·H_k(x)·e^{−x²}`, i.e. `i^{−k−1}erfc(x)`.
fn gaussian_family(k: usize, x: f64) -> f64 {
    let mut h_prev = 1.0;
    let mut h = 2.0 * x;
    if k == 0 {
        h = 1.0;
    } else {
        for j in 1..k {
            let next = 2.0 * x * h - 2.0 * j as f64 * h_prev;
            h_prev = h;
            h = next;
        }
    }
    TWO_OVER_SQRT_PI * h * (-x * x).exp()
}

fn upward(n: usize, x: f64) -> f64 {
    let mut prev = TWO_OVER_SQRT_PI * (-x * x).exp();
    let mut cur = libm::erfc(x);
    for k in 1..=n {
        let next = (prev - 2.0 * x * cur) / (2.0 * k as f64);
        prev = cur;
        cur = next;
    }
    cur
}

/// Ratios `r_j = i^j erfc / i^{j−1} erfc` for `j = 1..=n`, by backward recursion
/// `r_{j−1} = 1 / (2x + 2j·r_j)` started from the large-`j` fixed point well above `n`.
fn backward_ratios(n: usize, x: f64) -> Vec<f64> {
    let mut ratios = vec![0.0; n];
    let top = n + BACKWARD_DEPTH;
    // fixed point of r = 1/(2x + 2(j+1)r) for large j
    let jp = (top + 1) as f64;
    let mut r = (-x + (x * x + 2.0 * jp).sqrt()) / (2.0 * jp);
    for j in (2..=top).rev() {
        // r holds r_j; step to r_{j-1}
        r = 1.0 / (2.0 * x + 2.0 * j as f64 * r);
        if j - 1 <= n {
            ratios[j - 2] = r;
        }
    }
    ratios
}

fn backward(n: usize, x: f64) -> f64 {
    let ratios = backward_ratios(n, x);
    ratios.iter().fold(libm::erfc(x), |acc, r| acc * r)
}

/// Slow quadrature evaluations, independent of the recurrences above.
pub mod reference {
    use super::{factorial, TWO_OVER_SQRT_PI};

    const GL_NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const GL_WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];

    pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize) -> f64 {
        let h = (hi - lo) / panels as f64;
        let mut sum = 0.0;
        for p in 0..panels {
            let mid = lo + (p as f64 + 0.5) * h;
            let half = 0.5 * h;
            for (node, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
                sum += w * f(mid + half * node);
            }
        }
        sum * 0.5 * h
    }

    /// `(2/(n!√π)) ∫ₓ^∞ (s−x)ⁿ e^{−s²} ds`.
    pub fn inerfc(n: usize, x: f64, panels: usize) -> f64 {
        let hi = x.max(0.0) + 10.0;
        let integral = gauss_legendre(
            |s| (s - x).powi(n as i32) * (-s * s).exp(),
            x,
            hi,
            panels,
        );
        TWO_OVER_SQRT_PI * integral / factorial(n)
    }

    /// `erfc(x)` as `1 − (2/√π)∫₀^x e^{−s²} ds` (or the tail integral for large x).
    pub fn erfc(x: f64, panels: usize) -> f64 {
        if x > 2.0 {
            TWO_OVER_SQRT_PI * gauss_legendre(|s| (-s * s).exp(), x, x + 10.0, panels)
        } else {
            1.0 - TWO_OVER_SQRT_PI * gauss_legendre(|s| (-s * s).exp(), 0.0, x, panels)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn erfc_values() {
        assert_eq!(erfc(0.0).unwrap(), 1.0);
        assert_relative_eq!(erfc(0.5).unwrap(), 0.479_500_122_186_953_5, epsilon = 1e-15);
        assert_relative_eq!(erfc(-0.5).unwrap(), 1.520_499_877_813_046_5, epsilon = 1e-15);
        assert!(matches!(erfc(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(erfc(f64::INFINITY), Err(Error::Domain(_))));
    }

    #[test]
    fn inerfc_examples() {
        assert_relative_eq!(inerfc(1, 0.0).unwrap(), 0.564_189_583_547_756_3, epsilon = 1e-15);
        assert_relative_eq!(inerfc(1, 0.5).unwrap(), 0.199_641_228_374_245_67, max_relative = 1e-14);
        assert_relative_eq!(inerfc(1, -0.5).unwrap(), 1.199_641_228_374_245_7, max_relative = 1e-14);
        assert_relative_eq!(inerfc(2, 0.0).unwrap(), 0.25, epsilon = 1e-15);
        assert_relative_eq!(
            inerfc(-1, 0.3).unwrap(),
            TWO_OVER_SQRT_PI * (-0.09f64).exp(),
            max_relative = 1e-15
        );
    }

    // Values from 30-digit quadrature of (2/(n!√π))∫ₓ^∞ (s−x)ⁿ e^{−s²} ds.
    #[test]
    fn inerfc_against_frozen_high_precision() {
        let cases = [
            (2, 0.7, 0.038_515_308_478_633_61),
            (3, 0.7, 0.011_029_472_336_895_863),
            (12, 4.0, 2.893_286_266_153_314_5e-20),
            (12, -4.0, 0.349_350_530_026_935_2),
            (6, 1.3, 8.997_117_894_345_783e-6),
            (4, -2.2, 3.224_631_396_866_082),
            (8, 6.0, 2.922_581_532_942_636e-26),
        ];
        for (n, x, want) in cases {
            let got = inerfc(n, x).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn capability_limits() {
        assert!(matches!(inerfc(13, 0.0), Err(Error::Capability(_))));
        assert!(matches!(inerfc(-14, 0.0), Err(Error::Capability(_))));
        assert!(matches!(inerfc(1, f64::NAN), Err(Error::Domain(_))));
        let sf = SpecFun::new(SpecFunConfig { max_order: 4, ..Default::default() }).unwrap();
        assert!(sf.inerfc(5, 0.1).is_err());
        assert!(SpecFun::new(SpecFunConfig { max_order: 1, ..Default::default() }).is_err());
        assert!(SpecFun::new(SpecFunConfig { abs_tol: 0.0, ..Default::default() }).is_err());
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(inerfc_at_zero(0).unwrap(), 1.0);
        assert_relative_eq!(inerfc_at_zero(1).unwrap(), 1.0 / PI.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(inerfc_at_zero(2).unwrap(), 0.25, epsilon = 1e-15);
        assert!(matches!(inerfc_at_zero(-1), Err(Error::Domain(_))));
        for n in 0..=8 {
            assert_relative_eq!(
                inerfc(n, 0.0).unwrap(),
                inerfc_at_zero(n).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(
            inerfc_deriv(3, 1, 0.7).unwrap(),
            -inerfc(2, 0.7).unwrap()
        );
        assert_relative_eq!(inerfc_deriv(2, 2, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        // second derivative of i¹erfc is the Gaussian 2/√π·e^{−x²}, positive at 0
        assert_relative_eq!(inerfc_deriv(1, 2, 0.0).unwrap(), 1.128_379_167_095_512_6, epsilon = 1e-15);
        assert!(matches!(inerfc_deriv(0, 14, 0.0), Err(Error::Capability(_))));
    }

    #[test]
    fn gaussian_family_is_derivative_chain() {
        let x = 0.37;
        let h = 1e-5;
        for n in -6..=-1 {
            let fd = (inerfc(n + 1, x + h).unwrap() - inerfc(n + 1, x - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(fd, -inerfc(n, x).unwrap(), epsilon = 1e-8);
        }
    }

    #[test]
    fn asymptotic_examples() {
        assert_relative_eq!(asymptotic_ratio(0, 50.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(asymptotic_ratio(1, 50.0).unwrap(), 1.0, epsilon = 1e-4);
        assert_relative_eq!(asymptotic_ratio(2, 50.0).unwrap(), 1.0, epsilon = 2e-4);
        assert!(matches!(asymptotic_ratio(1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(asymptotic_ratio(1, -2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn all_matches_single() {
        let sf = SpecFun::default();
        for &x in &[-3.0, -0.2, 0.0, 0.4, 2.5] {
            let all = sf.inerfc_all(9, x).unwrap();
            for (n, v) in all.iter().enumerate() {
                assert_relative_eq!(*v, sf.inerfc(n as i32, x).unwrap(), max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn reference_quadrature_agrees() {
        for &(n, x) in &[(0usize, 0.5), (1, 0.5), (3, -1.0), (5, 2.0)] {
            let r = reference::inerfc(n, x, 2048);
            assert_relative_eq!(r, inerfc(n as i32, x).unwrap(), max_relative = 1e-11);
        }
        assert_relative_eq!(reference::erfc(0.5, 2048), 0.479_500_122_186_953_5, epsilon = 1e-14);
    }
}
