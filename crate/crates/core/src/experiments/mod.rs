//! Sweeps, exponent fits, figure data and an exact Liouvillian oracle.

mod figures;
mod fit;
mod oracle;
mod quantum_optical;
mod sweep;

pub use figures::{
    fig2_model, reproduce_figure_data, three_site_left, three_site_left_outer, three_site_right, FigureBundle, FigureFile,
    FigureId,
};
pub use fit::{
    fit_dynamical_exponent, fit_power_law, fit_static_exponent, ExponentFit, FitKind,
    DEFAULT_WINDOW, MIN_FIT_POINTS,
};
pub use oracle::{
    exact_liouvillian_oracle, liouvillian, majorana_operators, OracleReport, OracleResult,
    KERNEL_TOL, ORACLE_MAX_SITES,
};
pub use quantum_optical::{
    quantum_optical_generators, quantum_optical_model, quantum_optical_reference,
    QuantumOpticalSymbol,
};
pub use sweep::{
    model_at, sweep, sweep_point, Grid, GridKind, SpeciesSelector, SweepField, SweepPoint,
    SweepResult, SweepSpec, SweepTarget, MIN_SWEEP_POINTS,
};
