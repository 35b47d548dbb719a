//! Log-log power-law fits of sweep data.

use serde::{Deserialize, Serialize};

use crate::error::{NessError, Result};
use crate::experiments::sweep::SweepResult;

pub const DEFAULT_WINDOW: (f64, f64) = (1e-4, 1e-2);
pub const MIN_FIT_POINTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitKind {
    Static,
    Dynamical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExponentFit {
    pub kind: FitKind,
    /// `|p - p_c|` of the points used.
    pub abscissa: Vec<f64>,
    /// `ξ⁻¹` or `Δ` of the points used.
    pub ordinate: Vec<f64>,
    pub exponent: f64,
    /// Intercept of the log-log line.
    pub intercept: f64,
    /// Regression standard error of the slope.
    pub std_error: f64,
    pub window: (f64, f64),
    /// `z = exponent / λ` for dynamical fits.
    pub z: Option<f64>,
}

/// Ordinary least squares of `ln y` against `ln x`, restricted to
/// `window.0 ≤ x ≤ window.1` and `y > 0`.
pub fn fit_power_law(x: &[f64], y: &[f64], window: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>, f64, f64, f64)> {
    if !(window.0 > 0.0 && window.1 > window.0) {
        return Err(NessError::InvalidArgument(format!(
            "fit window must satisfy 0 < lo < hi, got {window:?}"
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|&(&a, &b)| a >= window.0 && a <= window.1 && b > 0.0 && b.is_finite())
        .map(|(&a, &b)| (a, b))
        .unzip();
    let n = xs.len();
    if n < MIN_FIT_POINTS {
        return Err(NessError::FitWindow {
            found: n,
            needed: MIN_FIT_POINTS,
        });
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n as f64;
    let my = ly.iter().sum::<f64>() / n as f64;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx <= 0.0 {
        return Err(NessError::FitWindow {
            found: 1,
            needed: MIN_FIT_POINTS,
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let se = (ssr / (n as f64 - 2.0) / sxx).sqrt();
    Ok((xs, ys, slope, intercept, se))
}

fn fit_column(
    sweep: &SweepResult,
    p_c: f64,
    window: (f64, f64),
    column: impl Fn(&crate::experiments::sweep::SweepPoint) -> Option<f64>,
) -> Result<(Vec<f64>, Vec<f64>, f64, f64, f64)> {
    let (x, y): (Vec<f64>, Vec<f64>) = sweep
        .points
        .iter()
        .filter(|p| p.error.is_none())
        .filter_map(|p| column(p).map(|v| ((p.param - p_c).abs(), v)))
        .unzip();
    fit_power_law(&x, &y, window)
}

/// `λ` from `ξ⁻¹ ~ |p - p_c|^λ`.
pub fn fit_static_exponent(sweep: &SweepResult, p_c: f64, window: Option<(f64, f64)>) -> Result<ExponentFit> {
    let window = window.unwrap_or(DEFAULT_WINDOW);
    let (abscissa, ordinate, exponent, intercept, std_error) =
        fit_column(sweep, p_c, window, |p| p.xi_inv)?;
    Ok(ExponentFit {
        kind: FitKind::Static,
        abscissa,
        ordinate,
        exponent,
        intercept,
        std_error,
        window,
        z: None,
    })
}

/// `κ_c λ` from `Δ ~ |p - p_c|^{κ_c λ}`, with `z = κ_c λ / λ`.
pub fn fit_dynamical_exponent(
    sweep: &SweepResult,
    p_c: f64,
    lambda: f64,
    window: Option<(f64, f64)>,
) -> Result<ExponentFit> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(NessError::InvalidArgument(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let window = window.unwrap_or(DEFAULT_WINDOW);
    let (abscissa, ordinate, exponent, intercept, std_error) =
        fit_column(sweep, p_c, window, |p| p.gap)?;
    Ok(ExponentFit {
        kind: FitKind::Dynamical,
        abscissa,
        ordinate,
        exponent,
        intercept,
        std_error,
        window,
        z: Some(exponent / lambda),
    })
}
