//! Rational structure of the odd-only correlation symbol: denominator roots,
//! residue correlations, correlation length, damping gap, criticality
//! conditions and exponent prediction.
//!
//! With `c_{jl} = s_j conj(s_l)` the correlation symbol is
//! `γ₁₁(z) = n(z)/d(z)` where
//!
//! ```text
//! n(z) = Σ c_{jl} (z^{l-j} - z^{j-l})
//! d(z) = Σ c_{jl} (z^{j-l} + z^{l-j})
//! ```
//!
//! so that on the unit circle `n = r(φ) - r(-φ)` and `d = r(φ) + r(-φ)`.

mod analysis;
mod conditions;
mod laurent;
mod roots;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use analysis::{
    correlation_length, damping_gap, damping_gap_finite, damping_gap_symbol, damping_spectrum,
    residue_correlations, CIRCLE_SAMPLES,
};
pub use conditions::{
    criticality_conditions, empirical_manifold_dimension, moment_conditions, moment_order,
    predict_exponents, solve_critical_parameters, CriticalFamily, ManifoldDimension, MOMENT_TOL,
};
pub use laurent::{to_model_symbol_fraction, to_symbol_fraction, LaurentPolynomial, SymbolFraction};
pub use roots::{denominator_roots, factored_denominator_roots, Root, RootLocation, RootSet, MERGE_RADIUS, TAU_CIRCLE};

/// One unit-circle root of the denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CriticalCandidate {
    pub z0: C64,
    /// `M`: number of vanishing moment-equation pairs.
    pub moment_order: Option<usize>,
    /// `κ_c`: multiplicity of the merged root at `z0`.
    pub merging_root_count: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CriticalityReport {
    pub span: Option<usize>,
    /// Overall factor `s₀` removed before the analysis.
    pub normalization: Option<C64>,
    pub critical: bool,
    pub z0_candidates: Vec<CriticalCandidate>,
    pub moment_order: Option<usize>,
    pub predicted_lambda: Option<f64>,
    pub predicted_manifold_dim: Option<i64>,
    pub merging_root_count: Option<usize>,
    /// `ξ⁻¹`; `None` for strictly local correlations.
    pub xi_inv: Option<f64>,
}
