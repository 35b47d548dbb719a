use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{NessError, Result};
use crate::lattice::{LatticeModel, LindbladGenerator};

/// Relative magnitude below which coefficients are dropped.
pub const TRIM_TOL: f64 = 1e-14;

/// Finite Laurent series `Σ_k a_k z^k`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LaurentPolynomial {
    pub coefficients: BTreeMap<i32, C64>,
}

impl LaurentPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C64) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(k: i32, c: C64) -> Self {
        let mut coefficients = BTreeMap::new();
        coefficients.insert(k, c);
        Self { coefficients }.trimmed()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (i32, C64)>) -> Self {
        let mut p = Self::zero();
        for (k, c) in pairs {
            *p.coefficients.entry(k).or_default() += c;
        }
        p.trimmed()
    }

    /// `(z + 1/z)/2`.
    pub fn cos_phi() -> Self {
        Self::from_pairs([(1, C64::new(0.5, 0.0)), (-1, C64::new(0.5, 0.0))])
    }

    /// `(z - 1/z)/(2i)`.
    pub fn sin_phi() -> Self {
        Self::from_pairs([(1, C64::new(0.0, -0.5)), (-1, C64::new(0.0, 0.5))])
    }

    pub fn coeff(&self, k: i32) -> C64 {
        self.coefficients.get(&k).copied().unwrap_or_default()
    }

    pub fn max_abs(&self) -> f64 {
        self.coefficients.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops coefficients below `TRIM_TOL` relative to the largest one.
    pub fn trimmed(mut self) -> Self {
        let cut = TRIM_TOL * self.max_abs();
        self.coefficients.retain(|_, c| c.norm() > cut);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.coefficients.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i32> {
        self.coefficients.keys().next_back().copied()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coefficients.iter().map(|(&k, &c)| c * z.powi(k)).sum()
    }

    pub fn eval_on_circle(&self, phi: f64) -> C64 {
        self.coefficients
            .iter()
            .map(|(&k, &c)| c * C64::from_polar(1.0, phi * k as f64))
            .sum()
    }

    /// `d/dz`.
    pub fn derivative(&self) -> Self {
        Self::from_pairs(
            self.coefficients
                .iter()
                .filter(|(&k, _)| k != 0)
                .map(|(&k, &c)| (k - 1, c * k as f64)),
        )
    }

    /// `p(1/z)`.
    pub fn reflect(&self) -> Self {
        Self::from_pairs(self.coefficients.iter().map(|(&k, &c)| (-k, c)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_pairs(self.coefficients.iter().map(|(&k, &c)| (k, c * s)))
    }

    pub fn powi(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(C64::new(1.0, 0.0)), |acc, _| &acc * self)
    }

    /// Ascending coefficients of `z^K p(z)` with `K = -min_exponent`, and `K`.
    pub fn cleared(&self) -> (Vec<C64>, i32) {
        match (self.min_exponent(), self.max_exponent()) {
            (Some(lo), Some(hi)) => (((lo)..=hi).map(|k| self.coeff(k)).collect(), -lo),
            _ => (Vec::new(), 0),
        }
    }
}

impl Add for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn add(self, rhs: Self) -> LaurentPolynomial {
        LaurentPolynomial::from_pairs(
            self.coefficients
                .iter()
                .chain(rhs.coefficients.iter())
                .map(|(&k, &c)| (k, c)),
        )
    }
}

impl Neg for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn neg(self) -> LaurentPolynomial {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Sub for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn sub(self, rhs: Self) -> LaurentPolynomial {
        self + &(-rhs)
    }
}

impl Mul for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn mul(self, rhs: Self) -> LaurentPolynomial {
        let mut out = BTreeMap::new();
        for (&i, &a) in &self.coefficients {
            for (&j, &b) in &rhs.coefficients {
                *out.entry(i + j).or_insert(C64::new(0.0, 0.0)) += a * b;
            }
        }
        LaurentPolynomial { coefficients: out }.trimmed()
    }
}

/// `γ₁₁(z) = n(z)/d(z)` on `z = e^{iφ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolFraction {
    pub numerator: LaurentPolynomial,
    pub denominator: LaurentPolynomial,
}

impl SymbolFraction {
    pub fn new(numerator: LaurentPolynomial, denominator: LaurentPolynomial) -> Result<Self> {
        if denominator.is_zero() {
            return Err(NessError::InvalidArgument(
                "symbol denominator is identically zero".into(),
            ));
        }
        Ok(Self {
            numerator,
            denominator,
        })
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.numerator.eval(z) / self.denominator.eval(z)
    }

    pub fn eval_on_circle(&self, phi: f64) -> Result<C64> {
        let d = self.denominator.eval_on_circle(phi);
        if d.norm() <= 1e-14 * self.denominator.max_abs() {
            return Err(NessError::SingularSymbol { phi });
        }
        Ok(self.numerator.eval_on_circle(phi) / d)
    }

    /// Minimum of `Re d(e^{iφ})` over a uniform grid.
    pub fn min_denominator_sampled(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|k| {
                self.denominator
                    .eval_on_circle(2.0 * PI * k as f64 / samples as f64)
                    .re
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn require_odd_only(gen: &LindbladGenerator) -> Result<()> {
    gen.validate()?;
    if gen.is_odd_only() {
        Ok(())
    } else {
        Err(NessError::UnsupportedGenerator(
            "closed-form symbol needs a generator built from odd Majorana operators".into(),
        ))
    }
}

/// `(Σ c_{jl}(z^{l-j} - z^{j-l}), Σ c_{jl}(z^{j-l} + z^{l-j}))` with
/// `c_{jl} = s_j conj(s_l)`, i.e. `r(φ) - r(-φ)` and `r(φ) + r(-φ)`.
fn raw_parts(gen: &LindbladGenerator) -> (LaurentPolynomial, LaurentPolynomial) {
    let s = gen.odd_values();
    let mut n = Vec::new();
    let mut d = Vec::new();
    for (j, sj) in s.iter().enumerate() {
        for (l, sl) in s.iter().enumerate() {
            let c = sj * sl.conj();
            let k = j as i32 - l as i32;
            n.push((-k, c));
            n.push((k, -c));
            d.push((k, c));
            d.push((-k, c));
        }
    }
    (LaurentPolynomial::from_pairs(n), LaurentPolynomial::from_pairs(d))
}

/// Rational form of the odd-only correlation symbol `γ₁₁ = n/d`.
pub fn to_symbol_fraction(gen: &LindbladGenerator) -> Result<SymbolFraction> {
    require_odd_only(gen)?;
    let (n, d) = raw_parts(gen);
    SymbolFraction::new(n, d)
}

/// Same as [`to_symbol_fraction`] with `r` summed over all generator
/// families of a model without Hamiltonian.
pub fn to_model_symbol_fraction(model: &LatticeModel) -> Result<SymbolFraction> {
    if model.hamiltonian.is_some() {
        return Err(NessError::UnsupportedGenerator(
            "closed-form symbol is only available without a Hamiltonian".into(),
        ));
    }
    let mut n = LaurentPolynomial::zero();
    let mut d = LaurentPolynomial::zero();
    for gen in &model.generators {
        require_odd_only(gen)?;
        let (gn, gd) = raw_parts(gen);
        n = &n + &gn;
        d = &d + &gd;
    }
    SymbolFraction::new(n, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::reservoir_symbol;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn single_site() {
        let gen = LindbladGenerator::odd_only(&[c(1.0, 0.0)]).unwrap();
        let f = to_symbol_fraction(&gen).unwrap();
        assert!(f.numerator.is_zero());
        assert_eq!(f.denominator.coefficients.len(), 1);
        assert_eq!(f.denominator.coeff(0), c(2.0, 0.0));
    }

    #[test]
    fn two_site_coefficients() {
        let (nu, g) = (0.7, 0.4);
        let gen = LindbladGenerator::odd_only(&[c(1.0, 0.0), C64::from_polar(nu, g)]).unwrap();
        let d = to_symbol_fraction(&gen).unwrap().denominator;
        assert!((d.coeff(0) - c(2.0 * (1.0 + nu * nu), 0.0)).norm() < 1e-15);
        assert!((d.coeff(1) - c(2.0 * nu * g.cos(), 0.0)).norm() < 1e-15);
        assert!((d.coeff(-1) - c(2.0 * nu * g.cos(), 0.0)).norm() < 1e-15);
        assert_eq!(d.coefficients.len(), 3);
    }

    #[test]
    fn denominator_is_r_plus_r_reflected() {
        let gen = LindbladGenerator::odd_only(&[
            c(1.0, 0.0),
            C64::from_polar(0.4, 2.0),
            C64::from_polar(1.3, -0.3),
            C64::from_polar(0.2, 1.0),
        ])
        .unwrap();
        let f = to_symbol_fraction(&gen).unwrap();
        for k in 0..100 {
            let phi = 0.0628 * k as f64 - 3.0;
            let rp = reservoir_symbol(&gen, phi).unwrap();
            let rm = reservoir_symbol(&gen, -phi).unwrap();
            assert!((f.denominator.eval_on_circle(phi) - c(rp + rm, 0.0)).norm() < 1e-12);
            assert!((f.numerator.eval_on_circle(phi) - c(rp - rm, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn arithmetic() {
        let cos = LaurentPolynomial::cos_phi();
        let sin = LaurentPolynomial::sin_phi();
        let one = &(&cos * &cos) + &(&sin * &sin);
        assert_eq!(one.coefficients.len(), 1);
        assert!((one.coeff(0) - c(1.0, 0.0)).norm() < 1e-15);
        let p = LaurentPolynomial::from_pairs([(-2, c(1.0, 0.0)), (1, c(3.0, 0.0))]);
        let (coeffs, k) = p.cleared();
        assert_eq!(k, 2);
        assert_eq!(coeffs, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)]);
        let dp = p.derivative();
        assert_eq!(dp.coeff(-3), c(-2.0, 0.0));
        assert_eq!(dp.coeff(0), c(3.0, 0.0));
    }

    #[test]
    fn mixed_generator_rejected() {
        let gen = LindbladGenerator::from_fermion_ops(&[c(1.0, 0.0)], &[c(0.0, 0.0)]).unwrap();
        assert!(matches!(
            to_symbol_fraction(&gen),
            Err(NessError::UnsupportedGenerator(_))
        ));
    }
}
