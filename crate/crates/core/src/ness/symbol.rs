//! Infinite-chain steady state in momentum space and real-space correlations
//! by periodic quadrature.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::criticality::{to_model_symbol_fraction, SymbolFraction};
use crate::error::{NessError, Result};
use crate::lattice::{symbols_unchecked, LatticeModel, Species};
use crate::ness::correlation::CorrelationProfile;

/// Momentum-space correlation kernel `γ(φ)` (the symbol of `-iΓ`).
pub trait Symbol: Sync {
    fn eval(&self, phi: f64) -> Result<Matrix2<C64>>;

    /// Closed-form rational representation of `γ₁₁`, when known.
    fn fraction(&self) -> Option<&SymbolFraction> {
        None
    }
}

/// Pointwise solution of the 2×2 symbol equation for a model.
pub struct ModelSymbol {
    model: LatticeModel,
}

impl ModelSymbol {
    pub fn new(model: LatticeModel) -> Self {
        Self { model }
    }
}

impl Symbol for ModelSymbol {
    fn eval(&self, phi: f64) -> Result<Matrix2<C64>> {
        solve_symbol_pointwise(&self.model, phi)
    }
}

/// `γ(φ) = [(r(φ) - r(-φ))/(r(φ) + r(-φ))]·𝟙` for reservoirs built from odd
/// Majorana operators, with `r` summed over generator families.
pub struct OddOnlySymbol {
    fraction: SymbolFraction,
}

impl OddOnlySymbol {
    pub fn new(model: &LatticeModel) -> Result<Self> {
        Ok(Self {
            fraction: to_model_symbol_fraction(model)?,
        })
    }
}

impl Symbol for OddOnlySymbol {
    fn eval(&self, phi: f64) -> Result<Matrix2<C64>> {
        let v = self.fraction.eval_on_circle(phi)?;
        Ok(Matrix2::identity() * v)
    }

    fn fraction(&self) -> Option<&SymbolFraction> {
        Some(&self.fraction)
    }
}

/// Symbol given by a closure; mostly for tests and synthetic checks.
pub struct FnSymbol<F>(pub F);

impl<F> Symbol for FnSymbol<F>
where
    F: Fn(f64) -> Matrix2<C64> + Sync,
{
    fn eval(&self, phi: f64) -> Result<Matrix2<C64>> {
        Ok((self.0)(phi))
    }
}

/// Solves `x(-φ)ᵀ γ + γ x(φ) = y(φ)` at a single momentum.
///
/// A species with no coupling at all (the even species of an odd-only
/// reservoir without Hamiltonian) leaves the equation singular; the active
/// species is solved alone and its value copied onto the decoupled one,
/// which yields the scalar-identity form of the odd-only solution.
pub fn solve_symbol_pointwise(model: &LatticeModel, phi: f64) -> Result<Matrix2<C64>> {
    let (x, y) = symbols_unchecked(model, phi);
    let (x_m, _) = symbols_unchecked(model, -phi);
    let a = x_m.transpose();
    let scale = 1.0 + x.iter().chain(y.iter()).map(|z| z.norm()).fold(0.0, f64::max);

    let decoupled = model.decoupled_species();
    match decoupled.as_slice() {
        [] => {}
        [Species::Odd, Species::Even] => return Ok(Matrix2::zeros()),
        [s] => {
            let k = 1 - s.offset();
            let coeff = a[(k, k)] + x[(k, k)];
            if coeff.norm() < 1e-13 * scale {
                return Err(NessError::SingularSymbol { phi });
            }
            let v = y[(k, k)] / coeff;
            let v = C64::new(v.re, 0.0);
            return Ok(Matrix2::identity() * v);
        }
        _ => unreachable!(),
    }

    // row-major vec: γ_{ij} -> 2i + j
    let mut m = Matrix4::<C64>::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                m[(2 * i + j, 2 * k + j)] += a[(i, k)];
                m[(2 * i + j, 2 * i + k)] += x[(k, j)];
            }
        }
    }
    let sv = m.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if smin <= 1e-13 * smax.max(1.0) {
        return Err(NessError::SingularSymbol { phi });
    }
    let rhs = Vector4::new(y[(0, 0)], y[(0, 1)], y[(1, 0)], y[(1, 1)]);
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or(NessError::SingularSymbol { phi })?;
    let gamma = Matrix2::new(sol[0], sol[1], sol[2], sol[3]);
    // γ is Hermitian as the symbol of the Hermitian matrix -iΓ
    let herm = (gamma + gamma.adjoint()) * C64::new(0.5, 0.0);
    let dev = (gamma - herm).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > 1e-10 * (1.0 + herm.iter().map(|z| z.norm()).fold(0.0, f64::max)) {
        return Err(NessError::ToleranceNotMet {
            requested: 1e-10,
            achieved: dev,
        });
    }
    Ok(herm)
}

/// Options for [`correlations_quadrature_with`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    /// Symbol entry `(α, β)` to transform.
    pub entry: (usize, usize),
    /// Absolute target accuracy of every returned value.
    pub tol: f64,
    /// Largest grid size tried before giving up.
    pub max_points: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            entry: (0, 0),
            tol: 1e-12,
            max_points: 1 << 21,
        }
    }
}

/// `⟨w₁ w_{1+2d}⟩` for `d = 0..=dmax` by periodic trapezoidal quadrature of
/// `γ₁₁`, target accuracy `1e-12`.
pub fn correlations_quadrature(symbol: &dyn Symbol, dmax: usize) -> Result<CorrelationProfile> {
    correlations_quadrature_with(symbol, dmax, &QuadratureOptions::default())
}

/// Fourier coefficients on a uniform grid `φ_k = 2π(k + θ)/n`.
fn trapezoid(
    symbol: &dyn Symbol,
    entry: (usize, usize),
    n: usize,
    theta: f64,
    dmax: usize,
) -> Result<Vec<C64>> {
    let samples: Vec<(f64, C64)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let phi = 2.0 * PI * (k as f64 + theta) / n as f64;
            symbol.eval(phi).map(|g| (phi, g[entry]))
        })
        .collect::<Result<_>>()?;
    let mut acc = vec![C64::new(0.0, 0.0); dmax + 1];
    for (phi, f) in samples {
        let step = C64::from_polar(1.0, phi);
        let mut w = f;
        for a in acc.iter_mut() {
            *a += w;
            w *= step;
        }
    }
    Ok(acc.into_iter().map(|a| a / n as f64).collect())
}

/// Grid doubling until two successive estimates agree to `opts.tol`.
///
/// A singular momentum hit by the grid is avoided by shifting the grid off
/// the symmetric points; if the symbol is not smooth enough to converge the
/// best estimate is discarded and the achieved accuracy reported.
pub fn correlations_quadrature_with(
    symbol: &dyn Symbol,
    dmax: usize,
    opts: &QuadratureOptions,
) -> Result<CorrelationProfile> {
    let mut n = (4 * (dmax + 1)).next_power_of_two().max(64);
    let mut theta = 0.0;
    let shifted = 0.5 * (5f64.sqrt() - 1.0);
    let mut prev: Option<Vec<C64>> = None;
    let mut achieved = f64::INFINITY;
    loop {
        let cur = match trapezoid(symbol, opts.entry, n, theta, dmax) {
            Ok(v) => v,
            Err(NessError::SingularSymbol { phi }) => {
                if theta != 0.0 {
                    return Err(NessError::SingularSymbol { phi });
                }
                theta = shifted;
                prev = None;
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some(p) = &prev {
            achieved = p
                .iter()
                .zip(&cur)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if achieved <= opts.tol {
                let mut values = cur;
                if opts.entry.0 == opts.entry.1 {
                    values[0] = C64::new(1.0, 0.0);
                }
                return Ok(CorrelationProfile {
                    entry: opts.entry,
                    distances: (0..=dmax as i64).collect(),
                    values,
                    achieved_tolerance: Some(achieved),
                });
            }
        }
        if 2 * n > opts.max_points {
            return Err(NessError::ToleranceNotMet {
                requested: opts.tol,
                achieved,
            });
        }
        prev = Some(cur);
        n *= 2;
    }
}

/// Mean density `⟨c^† c⟩` of the translation-invariant steady state.
pub fn occupation_from_symbol(symbol: &dyn Symbol) -> Result<f64> {
    let opts = QuadratureOptions {
        entry: (0, 1),
        ..QuadratureOptions::default()
    };
    let prof = correlations_quadrature_with(symbol, 0, &opts)?;
    // Γ_{oe} = i ⟨w_o w_e⟩ at d = 0
    let gamma_oe = C64::i() * prof.values[0];
    Ok(0.5 * (1.0 - gamma_oe.re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{reservoir_symbol, Chain, LindbladGenerator};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn infinite(gen: LindbladGenerator) -> LatticeModel {
        LatticeModel::new(vec![gen], None, Chain::Infinite).unwrap()
    }

    #[test]
    fn odd_only_pointwise_matches_closed_form() {
        let gen = LindbladGenerator::odd_only(&[c(1.0, 0.0), C64::from_polar(0.7, 0.4), C64::from_polar(0.3, -2.0)])
            .unwrap();
        let model = infinite(gen.clone());
        for k in 0..50 {
            let phi = -PI + 2.0 * PI * (k as f64 + 0.3) / 50.0;
            let g = solve_symbol_pointwise(&model, phi).unwrap();
            let rp = reservoir_symbol(&gen, phi).unwrap();
            let rm = reservoir_symbol(&gen, -phi).unwrap();
            let expected = (rp - rm) / (rp + rm);
            assert!((g[(0, 0)] - c(expected, 0.0)).norm() < 1e-12);
            assert!((g[(1, 1)] - c(expected, 0.0)).norm() < 1e-12);
            assert!(g[(0, 1)].norm() < 1e-15);
        }
    }

    #[test]
    fn single_site_is_completely_mixed() {
        let model = infinite(LindbladGenerator::odd_only(&[c(1.0, 0.0)]).unwrap());
        let g = solve_symbol_pointwise(&model, 0.8).unwrap();
        assert!(g.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn sine_symbol_has_two_fourier_coefficients() {
        let sym = FnSymbol(|phi: f64| Matrix2::identity() * c(phi.sin(), 0.0));
        let prof = correlations_quadrature(&sym, 4).unwrap();
        assert_eq!(prof.values[0], c(1.0, 0.0));
        // (1/2π)∫ e^{iφ} sin φ dφ = -1/(2i) = i/2
        assert!((prof.values[1] - c(0.0, 0.5)).norm() < 1e-14);
        for d in 2..=4 {
            assert!(prof.values[d].norm() < 1e-14);
        }
    }

    #[test]
    fn zero_symbol_gives_local_correlations_only() {
        let sym = FnSymbol(|_| Matrix2::zeros());
        let prof = correlations_quadrature(&sym, 5).unwrap();
        assert_eq!(prof.values[0], c(1.0, 0.0));
        assert!(prof.values[1..].iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn two_site_decay_ratio() {
        let g = 0.1;
        let gen = LindbladGenerator::odd_only(&[c(1.0, 0.0), C64::from_polar(1.0, g)]).unwrap();
        let sym = OddOnlySymbol::new(&infinite(gen)).unwrap();
        let prof = correlations_quadrature(&sym, 40).unwrap();
        let ratio = (1.0 - g.sin()) / g.cos();
        for d in 20..40 {
            let r = prof.values[d + 1].norm() / prof.values[d].norm();
            assert!((r - ratio).abs() < 1e-8, "d = {d}: {r}");
        }
        assert!((ratio - 0.904686).abs() < 1e-6);
    }

    #[test]
    fn odd_only_occupation_is_one_half() {
        let gen = LindbladGenerator::odd_only(&[c(1.0, 0.0), C64::from_polar(0.5, 1.0)]).unwrap();
        let n = occupation_from_symbol(&ModelSymbol::new(infinite(gen))).unwrap();
        assert!((n - 0.5).abs() < 1e-12);
    }

    #[test]
    fn loss_and_pump_occupations() {
        let loss = LindbladGenerator::from_fermion_ops(&[c(1.0, 0.0)], &[c(0.0, 0.0)]).unwrap();
        let n = occupation_from_symbol(&ModelSymbol::new(infinite(loss))).unwrap();
        assert!(n.abs() < 1e-12);
        let pump = LindbladGenerator::from_fermion_ops(&[c(0.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        let n = occupation_from_symbol(&ModelSymbol::new(infinite(pump))).unwrap();
        assert!((n - 1.0).abs() < 1e-12);
    }
}
