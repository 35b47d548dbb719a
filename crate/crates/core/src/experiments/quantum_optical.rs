//! Two-site pump/decay reservoir: `L^pump_j = χ(c_j^† + ν c_{j+1}^†)` and
//! `L^decay_j = c_j + ν e^{ig} c_{j+1}`.
//!
//! The closed form below is written as the symbol of `Γ` itself,
//! `(1/d)[[n₁₁, n₁₂], [-n₁₂, n₁₁]]`; the [`Symbol`] implementation returns
//! `-i` times it to match the `-iΓ` convention used elsewhere.

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;

use crate::criticality::{factored_denominator_roots, LaurentPolynomial, RootSet, SymbolFraction};
use crate::error::{NessError, Result};
use crate::lattice::{Chain, LatticeModel, LindbladGenerator};
use crate::ness::Symbol;

fn check(chi: f64, nu: f64, g: f64) -> Result<()> {
    if !(chi.is_finite() && chi > 0.0) {
        return Err(NessError::InvalidArgument(format!("chi must be positive, got {chi}")));
    }
    if !(nu.is_finite() && nu >= 0.0) {
        return Err(NessError::InvalidArgument(format!("nu must be nonnegative, got {nu}")));
    }
    if !g.is_finite() {
        return Err(NessError::InvalidArgument(format!("g must be finite, got {g}")));
    }
    Ok(())
}

/// Decay and pump generator families.
pub fn quantum_optical_generators(chi: f64, nu: f64, g: f64) -> Result<Vec<LindbladGenerator>> {
    check(chi, nu, g)?;
    let zero = C64::new(0.0, 0.0);
    let decay = LindbladGenerator::from_fermion_ops(
        &[C64::new(1.0, 0.0), C64::from_polar(nu, g)],
        &[zero, zero],
    )?;
    let pump = LindbladGenerator::from_fermion_ops(
        &[zero, zero],
        &[C64::new(chi, 0.0), C64::new(chi * nu, 0.0)],
    )?;
    Ok(vec![decay, pump])
}

pub fn quantum_optical_model(chi: f64, nu: f64, g: f64, chain: Chain) -> Result<LatticeModel> {
    LatticeModel::new(quantum_optical_generators(chi, nu, g)?, None, chain)
}

/// Closed-form symbol of the pump/decay model.
#[derive(Debug, Clone)]
pub struct QuantumOpticalSymbol {
    pub chi: f64,
    pub nu: f64,
    pub g: f64,
    n11: LaurentPolynomial,
    n12: LaurentPolynomial,
    /// `a - b` and `a + b` with `d = a² - b²`.
    factors: [LaurentPolynomial; 2],
    /// `γ₁₁` in the `-iΓ` convention.
    fraction: SymbolFraction,
}

pub fn quantum_optical_reference(chi: f64, nu: f64, g: f64) -> Result<QuantumOpticalSymbol> {
    check(chi, nu, g)?;
    let c = |v: f64| LaurentPolynomial::constant(C64::new(v, 0.0));
    let cos = LaurentPolynomial::cos_phi();
    let sin = LaurentPolynomial::sin_phi();
    let (sg, cg) = g.sin_cos();
    let chi2 = chi * chi;
    let nu2 = nu * nu;

    let pump_band = &c(1.0 + nu2) + &cos.scale(C64::new(2.0 * nu, 0.0));
    let n11 = (&pump_band * &sin).scale(C64::new(0.0, 4.0 * nu * chi2 * sg));
    let b = sin.scale(C64::new(2.0 * nu * sg, 0.0));
    let sin_term = &b * &b;
    let decay_band = &c(1.0 + nu2) + &cos.scale(C64::new(2.0 * nu * cg, 0.0));
    let n12 = &(&(&decay_band * &decay_band) - &sin_term)
        - &(&pump_band * &pump_band).scale(C64::new(chi2 * chi2, 0.0));
    let a = &c((1.0 + nu2) * (1.0 + chi2)) + &cos.scale(C64::new(2.0 * nu * (chi2 + cg), 0.0));
    let d = &(&a * &a) - &sin_term;
    let factors = [&a - &b, &a + &b];
    let fraction = SymbolFraction::new(n11.scale(C64::new(0.0, -1.0)), d)?;
    Ok(QuantumOpticalSymbol {
        chi,
        nu,
        g,
        n11,
        n12,
        factors,
        fraction,
    })
}

impl QuantumOpticalSymbol {
    pub fn n11(&self, phi: f64) -> C64 {
        self.n11.eval_on_circle(phi)
    }

    pub fn n12(&self, phi: f64) -> f64 {
        self.n12.eval_on_circle(phi).re
    }

    pub fn d(&self, phi: f64) -> f64 {
        self.fraction.denominator.eval_on_circle(phi).re
    }

    /// The closed form as the symbol of `Γ`.
    pub fn gamma_matrix(&self, phi: f64) -> Matrix2<C64> {
        let d = self.d(phi);
        let n11 = self.n11(phi);
        let n12 = C64::new(self.n12(phi), 0.0);
        Matrix2::new(n11, n12, -n12, n11) / C64::new(d, 0.0)
    }

    /// Denominator roots from the factorisation `d = (a - b)(a + b)`, which
    /// resolves the four roots that merge at the critical point far better
    /// than the expanded polynomial.
    pub fn denominator_roots(&self) -> Result<RootSet> {
        factored_denominator_roots(&self.factors)
    }

    pub fn correlation_length(&self) -> Result<f64> {
        let roots = self.denominator_roots()?;
        if !roots.on_circle().is_empty() {
            return Ok(0.0);
        }
        Ok(match roots.closest_inside_modulus() {
            Some(r) if r > 0.0 => -r.ln(),
            _ => f64::INFINITY,
        })
    }

    pub fn fraction_owned(&self) -> SymbolFraction {
        self.fraction.clone()
    }

    pub fn model(&self, chain: Chain) -> Result<LatticeModel> {
        quantum_optical_model(self.chi, self.nu, self.g, chain)
    }
}

impl Symbol for QuantumOpticalSymbol {
    fn eval(&self, phi: f64) -> Result<Matrix2<C64>> {
        if self.d(phi).abs() <= 1e-14 * self.fraction.denominator.max_abs() {
            return Err(NessError::SingularSymbol { phi });
        }
        Ok(self.gamma_matrix(phi) * C64::new(0.0, -1.0))
    }

    fn fraction(&self) -> Option<&SymbolFraction> {
        Some(&self.fraction)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ness::solve_symbol_pointwise;
    use std::f64::consts::PI;

    #[test]
    fn trivial_limits() {
        let r = quantum_optical_reference(1.0, 0.7, 0.0).unwrap();
        for k in 0..20 {
            assert!(r.n11(0.3 * k as f64).norm() < 1e-14);
        }
        let r = quantum_optical_reference(1.5, 0.0, 0.3).unwrap();
        for k in 0..20 {
            assert!((r.d(0.3 * k as f64) - 3.25f64.powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_pointwise_solve() {
        let r = quantum_optical_reference(1.0, 0.7, 0.4).unwrap();
        let model = r.model(Chain::Infinite).unwrap();
        for k in 0..1000 {
            let phi = -PI + 2.0 * PI * (k as f64 + 0.5) / 1000.0;
            let a = solve_symbol_pointwise(&model, phi).unwrap();
            let b = r.eval(phi).unwrap();
            assert!((a - b).iter().all(|z| z.norm() < 1e-10), "phi = {phi}");
        }
    }

    #[test]
    fn factors_multiply_to_the_denominator() {
        let r = quantum_optical_reference(0.8, 0.9, 0.3).unwrap();
        let prod = &r.factors[0] * &r.factors[1];
        let diff = &prod - &r.fraction.denominator;
        assert!(diff.max_abs() < 1e-13);
    }

    #[test]
    fn factored_roots_resolve_the_near_critical_quartet() {
        for g in [1e-2, 1e-3, 1e-4] {
            let r = quantum_optical_reference(1.0, 1.0, g).unwrap();
            let roots = r.denominator_roots().unwrap();
            assert_eq!(roots.total_multiplicity(), 4);
            assert!(roots.on_circle().is_empty());
            let xi = r.correlation_length().unwrap();
            assert!((xi / g - 0.5).abs() < 1e-3, "g = {g}: {xi}");
        }
    }

    #[test]
    fn critical_point_is_singular_at_pi() {
        let r = quantum_optical_reference(1.0, 1.0, 0.0).unwrap();
        assert!(r.d(PI).abs() < 1e-14);
    }
}
