//! Steady-state correlation matrices: finite Lyapunov solves and time
//! evolution, momentum-space solves, quadrature and Wick contractions.

pub mod correlation;
pub mod lyapunov;
pub mod symbol;

pub use correlation::{occupation, wick_four_point, CorrelationMatrix, CorrelationProfile};
pub use lyapunov::{
    evolve_finite, evolve_finite_exact, evolve_finite_with, lyapunov_residual, solve_lyapunov_finite,
    LYAPUNOV_RESIDUAL_TOL,
};
pub use symbol::{
    correlations_quadrature, correlations_quadrature_with, occupation_from_symbol,
    solve_symbol_pointwise, FnSymbol, ModelSymbol, OddOnlySymbol, QuadratureOptions, Symbol,
};
