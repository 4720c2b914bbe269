//! Truncated power series ("jets") in `τ = √t`.
//!
//! A jet of order `K` stores the Taylor coefficients `c₀..c_K` of a function of `τ`
//! about `τ = 0`. The k-th derivative at zero is `k!·c_k`, so every "differentiate
//! k times and set τ = 0" step on a condition reduces to reading coefficient `k` of
//! the jet built from that condition.
//!
//! Composition with the `iⁿerfc` family goes through Faà di Bruno's formula written
//! with partial exponential Bell polynomials.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::specfun::{factorial, SpecFun, TWO_OVER_SQRT_PI};

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Usage("a jet needs at least one coefficient".into()));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::Domain(format!(
                "jet coefficient {i} is not finite: {}",
                coeffs[i]
            )));
        }
        Ok(Self { coeffs })
    }

    /// Builds a jet from a prefix of coefficients, padding with zeros (or truncating)
    /// to `order`.
    pub fn from_prefix(prefix: &[f64], order: usize) -> Result<Self> {
        let mut coeffs = vec![0.0; order + 1];
        for (dst, src) in coeffs.iter_mut().zip(prefix) {
            *dst = *src;
        }
        Self::new(coeffs)
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![0.0; order + 1],
        }
    }

    pub fn constant(value: f64, order: usize) -> Self {
        let mut j = Self::zero(order);
        j.coeffs[0] = value;
        j
    }

    /// The identity jet `τ`.
    pub fn variable(order: usize) -> Self {
        let mut j = Self::zero(order);
        if order >= 1 {
            j.coeffs[1] = 1.0;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// k-th derivative with respect to `τ` at `τ = 0`.
    pub fn derivative_at_zero(&self, k: usize) -> f64 {
        factorial(k) * self.coeff(k)
    }

    pub fn value_at_zero(&self) -> f64 {
        self.coeffs[0]
    }

    /// Evaluates the truncated polynomial at `tau`.
    pub fn eval(&self, tau: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * tau + c)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|c| *c == 0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Multiplies by `τⁿ`, dropping what falls beyond the order.
    pub fn shift(&self, n: usize) -> Self {
        let k = self.order();
        let mut out = Self::zero(k);
        for i in n..=k {
            out.coeffs[i] = self.coeffs[i - n];
        }
        out
    }

    fn check_same_order(&self, other: &Jet) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::Usage(format!(
                "jet orders differ: {} vs {}",
                self.order(),
                other.order()
            )));
        }
        Ok(())
    }

    /// Cauchy product truncated at the common order.
    pub fn product(&self, other: &Jet) -> Result<Self> {
        self.check_same_order(other)?;
        let k = self.order();
        let mut out = vec![0.0; k + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.coeffs[..=k - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Ok(Self { coeffs: out })
    }

    pub fn reciprocal(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if a0 == 0.0 {
            return Err(Error::Singularity(
                "reciprocal of a jet with zero constant term".into(),
            ));
        }
        let k = self.order();
        let mut r = vec![0.0; k + 1];
        r[0] = 1.0 / a0;
        for n in 1..=k {
            let s: f64 = (1..=n).map(|i| self.coeffs[i] * r[n - i]).sum();
            r[n] = -s / a0;
        }
        Ok(Self { coeffs: r })
    }

    /// `exp` of a jet via `k·y_k = Σ_{j=1..k} j·a_j·y_{k−j}`.
    pub fn exp(&self) -> Self {
        let k = self.order();
        let mut y = vec![0.0; k + 1];
        y[0] = self.coeffs[0].exp();
        for n in 1..=k {
            let s: f64 = (1..=n)
                .map(|j| j as f64 * self.coeffs[j] * y[n - j])
                .sum();
            y[n] = s / n as f64;
        }
        Self { coeffs: y }
    }

    /// Formal derivative `d/dτ`, keeping the order (top coefficient becomes zero).
    pub fn derivative(&self) -> Self {
        let k = self.order();
        let mut out = Self::zero(k);
        for i in 1..=k {
            out.coeffs[i - 1] = i as f64 * self.coeffs[i];
        }
        out
    }

    /// `g ∘ inner`, given `outer_derivs[m] = g^{(m)}(inner(0))` for `m = 0..=K`.
    ///
    /// Only as many derivatives as the inner jet actually needs are read: a constant
    /// inner jet only uses `outer_derivs[0]`.
    pub fn compose(outer_derivs: &[f64], inner: &Jet) -> Result<Self> {
        let k = inner.order();
        let needed = if inner.is_constant() { 0 } else { k };
        if outer_derivs.len() <= needed {
            return Err(Error::Usage(format!(
                "composition of order {k} needs {} outer derivatives, got {}",
                needed + 1,
                outer_derivs.len()
            )));
        }
        let mut out = Self::zero(k);
        out.coeffs[0] = outer_derivs[0];
        if needed == 0 {
            return Ok(out);
        }
        // derivatives of the inner function at zero
        let d: Vec<f64> = (1..=k).map(|j| inner.derivative_at_zero(j)).collect();
        let table = bell_table(k, &d);
        for n in 1..=k {
            let s: f64 = (1..=n).map(|m| outer_derivs[m] * table[n][m]).sum();
            out.coeffs[n] = s / factorial(n);
        }
        Ok(out)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        assert_eq!(self.order(), rhs.order(), "jet orders differ");
        Jet {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        assert_eq!(self.order(), rhs.order(), "jet orders differ");
        Jet {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

/// Jet product; panics on order mismatch. Use [`Jet::product`] for a checked version.
impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.product(rhs).expect("jet orders differ")
    }
}

pub fn jet_product(a: &Jet, b: &Jet) -> Result<Jet> {
    a.product(b)
}

pub fn jet_reciprocal(a: &Jet) -> Result<Jet> {
    a.reciprocal()
}

/// `(k, m)` index of a partial Bell polynomial, `1 ≤ m ≤ k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BellIndex {
    k: usize,
    m: usize,
}

impl BellIndex {
    pub fn new(k: usize, m: usize) -> Result<Self> {
        if m < 1 || m > k {
            return Err(Error::Usage(format!(
                "Bell index needs 1 <= m <= k, got k={k}, m={m}"
            )));
        }
        Ok(Self { k, m })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of arguments `x₁..x_{k−m+1}` the polynomial depends on.
    pub fn arity(&self) -> usize {
        self.k - self.m + 1
    }
}

/// `table[n][m] = B_{n,m}(x₁, x₂, …)` for `0 ≤ m ≤ n ≤ k_max`, with `x[0] = x₁`.
///
/// Uses `B_{n,m} = Σ_{i=1}^{n−m+1} C(n−1, i−1)·x_i·B_{n−i,m−1}`.
fn bell_table(k_max: usize, x: &[f64]) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; k_max + 1]; k_max + 1];
    t[0][0] = 1.0;
    for n in 1..=k_max {
        for m in 1..=n {
            let mut s = 0.0;
            let mut binom = 1.0; // C(n-1, i-1)
            for i in 1..=(n - m + 1) {
                if i > 1 {
                    binom *= (n - i + 1) as f64 / (i - 1) as f64;
                }
                let xi = x.get(i - 1).copied().unwrap_or(0.0);
                s += binom * xi * t[n - i][m - 1];
            }
            t[n][m] = s;
        }
    }
    t
}

/// Partial exponential Bell polynomial `B_{k,m}(x₁, …, x_{k−m+1})`.
pub fn partial_bell(k: usize, m: usize, x: &[f64]) -> Result<f64> {
    let idx = BellIndex::new(k, m)?;
    if x.len() < idx.arity() {
        return Err(Error::Usage(format!(
            "B_{{{k},{m}}} needs {} arguments, got {}",
            idx.arity(),
            x.len()
        )));
    }
    Ok(bell_table(k, &x[..idx.arity()])[k][m])
}

/// Jet of `τ ↦ iⁿerfc(sign·inner(τ))`.
///
/// The outer derivatives are `d^m/dx^m iⁿerfc(σx) = σ^m(−1)^m i^{n−m}erfc(σx)`; the
/// index `n` may be negative (Gaussian derivatives).
pub fn jet_compose_basis(sf: &SpecFun, n: i32, inner: &Jet, sign: f64) -> Result<Jet> {
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::Usage(format!("sign must be +1 or -1, got {sign}")));
    }
    let x0 = sign * inner.value_at_zero();
    let depth = if inner.is_constant() { 0 } else { inner.order() };
    let mut derivs = Vec::with_capacity(depth + 1);
    for m in 0..=depth {
        let v = sf.inerfc(n - m as i32, x0).map_err(|e| match e {
            Error::Capability(msg) => Error::Capability(format!(
                "derivative family exhausted composing i^{n}erfc to order {}: {msg}",
                inner.order()
            )),
            other => other,
        })?;
        // (−σ)^m
        let s = if m % 2 == 0 { 1.0 } else { -sign };
        derivs.push(s * v);
    }
    Jet::compose(&derivs, inner)
}

/// Jet of `τ ↦ (2/√π)·exp(+inner(τ)²)`, the Gaussian factor with its exponent sign
/// reversed.
pub fn jet_reversed_gaussian(inner: &Jet) -> Jet {
    let sq = inner * inner;
    sq.exp().scale(TWO_OVER_SQRT_PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn jet(c: &[f64]) -> Jet {
        Jet::new(c.to_vec()).unwrap()
    }

    #[test]
    fn product_examples() {
        let p = jet(&[1.0, 1.0, 0.0]).product(&jet(&[1.0, -1.0, 0.0])).unwrap();
        assert_eq!(p.coeffs(), &[1.0, 0.0, -1.0]);
        let t = Jet::variable(2);
        assert_eq!((&t * &t).coeffs(), &[0.0, 0.0, 1.0]);
        let p = jet(&[1.0, 2.0, 3.0]).product(&jet(&[4.0, 5.0, 0.0])).unwrap();
        assert_eq!(p.coeffs(), &[4.0, 13.0, 22.0]);
        assert!(matches!(
            jet(&[1.0, 2.0]).product(&jet(&[1.0])),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn reciprocal_examples() {
        let r = jet(&[1.0, 1.0, 0.0, 0.0]).reciprocal().unwrap();
        assert_eq!(r.coeffs(), &[1.0, -1.0, 1.0, -1.0]);
        assert_eq!(Jet::constant(2.0, 3).reciprocal().unwrap().coeff(0), 0.5);
        let r = jet(&[1.0, 2.0, 1.0, 0.0]).reciprocal().unwrap();
        assert_eq!(r.coeffs(), &[1.0, -2.0, 3.0, -4.0]);
        assert!(matches!(
            jet(&[0.0, 1.0]).reciprocal(),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn new_rejects_bad_input() {
        assert!(Jet::new(vec![]).is_err());
        assert!(Jet::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn bell_examples() {
        assert_eq!(partial_bell(3, 2, &[1.0, 2.0]).unwrap(), 6.0);
        assert_eq!(partial_bell(4, 4, &[2.0]).unwrap(), 16.0);
        assert_eq!(partial_bell(4, 2, &[1.0, 1.0, 1.0]).unwrap(), 7.0);
        assert!(matches!(partial_bell(3, 0, &[1.0; 4]), Err(Error::Usage(_))));
        assert!(matches!(partial_bell(3, 4, &[1.0; 4]), Err(Error::Usage(_))));
        assert!(matches!(partial_bell(4, 2, &[1.0, 1.0]), Err(Error::Usage(_))));
    }

    #[test]
    fn exp_matches_series() {
        let e = Jet::variable(6).exp();
        for k in 0..=6 {
            assert_relative_eq!(e.coeff(k), 1.0 / factorial(k), epsilon = 1e-15);
        }
    }

    #[test]
    fn compose_basis_examples() {
        let sf = SpecFun::default();
        let j = jet_compose_basis(&sf, 0, &Jet::variable(4), 1.0).unwrap();
        assert_relative_eq!(j.coeff(0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(j.coeff(1), -1.128_379_167_095_512_6, epsilon = 1e-15);

        let j = jet_compose_basis(&sf, 1, &Jet::constant(0.5, 3), -1.0).unwrap();
        assert_relative_eq!(j.coeff(0), 1.199_641_228_374_245_7, max_relative = 1e-14);
        assert!(j.coeffs()[1..].iter().all(|c| *c == 0.0));

        let j = jet_compose_basis(&sf, 0, &jet(&[0.0, 1.0, 1.0, 0.0]), 1.0).unwrap();
        assert_relative_eq!(j.coeff(1), -1.128_379_167_095_512_6, epsilon = 1e-15);
        assert_relative_eq!(j.coeff(2), -1.128_379_167_095_512_6, epsilon = 1e-14);
    }

    #[test]
    fn compose_basis_reports_exhausted_family() {
        let sf = SpecFun::new(crate::specfun::SpecFunConfig {
            max_order: 2,
            ..Default::default()
        })
        .unwrap();
        let inner = jet(&[0.1, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            jet_compose_basis(&sf, 0, &inner, 1.0),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn reversed_gaussian_coefficients() {
        // (2/√π)e^{(a+τ)²} = (2/√π)e^{a²}(1 + 2aτ + (1+2a²)τ² + …)
        let a = 0.5;
        let g = jet_reversed_gaussian(&jet(&[a, 1.0, 0.0]));
        let base = TWO_OVER_SQRT_PI * (a * a).exp();
        assert_relative_eq!(g.coeff(0), base, epsilon = 1e-14);
        assert_relative_eq!(g.coeff(1), base * 2.0 * a, epsilon = 1e-14);
        assert_relative_eq!(g.coeff(2), base * (1.0 + 2.0 * a * a), epsilon = 1e-14);
    }

    #[test]
    fn shift_and_eval() {
        let j = jet(&[1.0, 2.0, 3.0]);
        assert_eq!(j.shift(1).coeffs(), &[0.0, 1.0, 2.0]);
        assert_eq!(j.eval(2.0), 17.0);
        assert_eq!(j.derivative().coeffs(), &[2.0, 6.0, 0.0]);
    }
}
