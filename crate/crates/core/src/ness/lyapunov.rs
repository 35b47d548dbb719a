//! Finite-chain steady state and time evolution of the correlation matrix.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{NessError, Result};
use crate::lattice::DampingMatrices;
use crate::linalg::{max_abs, solve_sylvester_general, solve_sylvester_symmetric};
use crate::ness::correlation::CorrelationMatrix;

/// Residual bound for every successful Lyapunov solve, relative to `max(1, ‖Y‖)`.
pub const LYAPUNOV_RESIDUAL_TOL: f64 = 1e-10;

/// `‖XᵀΓ + ΓX - Y‖_max`.
pub fn lyapunov_residual(x: &DMatrix<f64>, y: &DMatrix<f64>, gamma: &DMatrix<f64>) -> f64 {
    (x.transpose() * gamma + gamma * x - y).amax()
}

/// Indices whose rows and columns of `X` and rows of `Y` vanish: modes that
/// are neither damped nor driven.
fn decoupled_modes(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Vec<usize> {
    let n = x.nrows();
    let tol = 1e-14 * (1.0 + x.amax().max(y.amax()));
    (0..n)
        .filter(|&k| (0..n).all(|i| x[(k, i)].abs() <= tol && x[(i, k)].abs() <= tol && y[(k, i)].abs() <= tol))
        .collect()
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    let tol = 1e-14 * (1.0 + m.amax());
    (m - m.transpose()).amax() <= tol
}

fn select(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// Steady state `XᵀΓ₀ + Γ₀X = Y`.
///
/// Modes decoupled from both dissipation and Hamiltonian make the solution
/// non-unique. They are excluded from the solve; when they are exactly the
/// even species the even block copies the odd one (the scalar-identity
/// symbol of an odd-only reservoir), otherwise they are left completely
/// mixed. Either way the result is flagged degenerate.
pub fn solve_lyapunov_finite(dm: &DampingMatrices) -> Result<CorrelationMatrix> {
    let (x, y) = dm.real_parts()?;
    let n = x.nrows();
    let decoupled = decoupled_modes(&x, &y);
    let active: Vec<usize> = (0..n).filter(|k| !decoupled.contains(k)).collect();

    let mut gamma = DMatrix::zeros(n, n);
    if !active.is_empty() {
        let xa = select(&x, &active);
        let ya = select(&y, &active);
        let ga = if is_symmetric(&xa) {
            solve_sylvester_symmetric(&xa, &ya)?
        } else {
            let xc = xa.map(|v| C64::new(v, 0.0));
            let yc = ya.map(|v| C64::new(v, 0.0));
            let g = solve_sylvester_general(&xc, &yc)?;
            let imag = g.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            if imag > 1e-9 * (1.0 + max_abs(&g)) {
                return Err(NessError::Linalg(format!(
                    "steady state has imaginary part {imag:.3e}"
                )));
            }
            g.map(|z| z.re)
        };
        for (i, &a) in active.iter().enumerate() {
            for (j, &b) in active.iter().enumerate() {
                gamma[(a, b)] = ga[(i, j)];
            }
        }
    }
    let mirror_even = !decoupled.is_empty()
        && decoupled.len() * 2 == n
        && decoupled.iter().all(|k| k % 2 == 1);
    if mirror_even {
        let sites = n / 2;
        for j in 0..sites {
            for k in 0..sites {
                gamma[(2 * j + 1, 2 * k + 1)] = gamma[(2 * j, 2 * k)];
            }
        }
    }
    let out = CorrelationMatrix::new(gamma)?.with_degenerate(!decoupled.is_empty());
    let res = lyapunov_residual(&x, &y, out.gamma());
    let bound = LYAPUNOV_RESIDUAL_TOL * y.amax().max(1.0);
    if res > bound {
        return Err(NessError::ToleranceNotMet {
            requested: bound,
            achieved: res,
        });
    }
    Ok(out)
}

fn rhs(x: &DMatrix<f64>, y: &DMatrix<f64>, g: &DMatrix<f64>) -> DMatrix<f64> {
    x.transpose() * g + g * x - y
}

/// Integrates `dΓ/dt = XᵀΓ + ΓX - Y` from `gamma0` over `[0, t]` with an
/// adaptive Dormand–Prince 5(4) scheme; `dt` is the initial step.
pub fn evolve_finite(
    dm: &DampingMatrices,
    gamma0: &CorrelationMatrix,
    t: f64,
    dt: f64,
) -> Result<CorrelationMatrix> {
    evolve_finite_with(dm, gamma0, t, dt, 1e-9, 1e-12)
}

pub fn evolve_finite_with(
    dm: &DampingMatrices,
    gamma0: &CorrelationMatrix,
    t_end: f64,
    dt: f64,
    rtol: f64,
    atol: f64,
) -> Result<CorrelationMatrix> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(NessError::InvalidArgument(format!("step must be positive, got {dt}")));
    }
    if t_end < 0.0 {
        return Err(NessError::InvalidArgument(format!("negative final time {t_end}")));
    }
    let (x, y) = dm.real_parts()?;
    if gamma0.gamma().nrows() != x.nrows() {
        return Err(NessError::InvalidArgument("initial state has wrong dimension".into()));
    }

    // Dormand–Prince tableau
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let _ = C;

    let mut g = gamma0.gamma().clone();
    let mut t = 0.0;
    let mut h = dt.min(t_end.max(f64::MIN_POSITIVE));
    let mut k1 = rhs(&x, &y, &g);
    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        if h < 1e-14 * t_end.max(1.0) {
            if t_end - t < 1e-14 * t_end.max(1.0) {
                break;
            }
            return Err(NessError::IntegrationFailure {
                t,
                reason: format!("step size underflow (h = {h:.3e})"),
            });
        }
        let mut ks: Vec<DMatrix<f64>> = Vec::with_capacity(7);
        ks.push(k1.clone());
        for s in 1..7 {
            let mut stage = g.clone();
            for (j, kj) in ks.iter().enumerate() {
                if A[s][j] != 0.0 {
                    stage += kj * (h * A[s][j]);
                }
            }
            ks.push(rhs(&x, &y, &stage));
        }
        let mut g5 = g.clone();
        let mut err = DMatrix::zeros(g.nrows(), g.ncols());
        for s in 0..7 {
            if B5[s] != 0.0 {
                g5 += &ks[s] * (h * B5[s]);
            }
            let e = B5[s] - B4[s];
            if e != 0.0 {
                err += &ks[s] * (h * e);
            }
        }
        let mut ratio: f64 = 0.0;
        for ((e, a), b) in err.iter().zip(g.iter()).zip(g5.iter()) {
            let sc = atol + rtol * a.abs().max(b.abs());
            ratio = ratio.max(e.abs() / sc);
        }
        if !ratio.is_finite() {
            return Err(NessError::IntegrationFailure {
                t,
                reason: "non-finite error estimate".into(),
            });
        }
        if ratio <= 1.0 {
            t += h;
            g = g5;
            k1 = ks.swap_remove(6);
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Ok(CorrelationMatrix::new(g)?.with_degenerate(gamma0.is_degenerate()))
}

/// Exact propagation `Γ(t) = Γ₀ + e^{Xᵀt}(Γ(0) - Γ₀)e^{Xt}` through the matrix
/// exponential, for validating the integrator.
pub fn evolve_finite_exact(
    dm: &DampingMatrices,
    gamma0: &CorrelationMatrix,
    t: f64,
) -> Result<CorrelationMatrix> {
    let (x, _) = dm.real_parts()?;
    let stationary = solve_lyapunov_finite(dm)?;
    let e = (&x * t).exp();
    let dev = gamma0.gamma() - stationary.gamma();
    let g = stationary.gamma() + e.transpose() * dev * &e;
    CorrelationMatrix::new(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_damping_matrices, Chain, LatticeModel, LindbladGenerator};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn loss_model(sites: usize) -> LatticeModel {
        let gen = LindbladGenerator::from_fermion_ops(&[c(1.0, 0.0)], &[c(0.0, 0.0)]).unwrap();
        LatticeModel::new(vec![gen], None, Chain::Finite { sites, periodic: false }).unwrap()
    }

    fn pump_model(sites: usize) -> LatticeModel {
        let gen = LindbladGenerator::from_fermion_ops(&[c(0.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        LatticeModel::new(vec![gen], None, Chain::Finite { sites, periodic: false }).unwrap()
    }

    fn two_site(g: f64, sites: usize) -> LatticeModel {
        let gen = LindbladGenerator::odd_only(&[c(1.0, 0.0), C64::from_polar(1.0, g)]).unwrap();
        LatticeModel::new(vec![gen], None, Chain::Finite { sites, periodic: true }).unwrap()
    }

    #[test]
    fn pure_loss_gives_vacuum() {
        let dm = build_damping_matrices(&loss_model(4)).unwrap();
        let g = solve_lyapunov_finite(&dm).unwrap();
        assert!(g.max_abs_diff(&CorrelationMatrix::vacuum(4)) < 1e-12);
        assert!(!g.is_degenerate());
    }

    #[test]
    fn pure_pump_gives_filled_state() {
        let dm = build_damping_matrices(&pump_model(4)).unwrap();
        let g = solve_lyapunov_finite(&dm).unwrap();
        assert!(g.max_abs_diff(&CorrelationMatrix::filled(4)) < 1e-12);
    }

    #[test]
    fn odd_only_generator_is_flagged_degenerate() {
        let dm = build_damping_matrices(&two_site(0.3, 8)).unwrap();
        let g = solve_lyapunov_finite(&dm).unwrap();
        assert!(g.is_degenerate());
        // even block mirrors the odd block, cross block vanishes
        for j in 0..8 {
            for k in 0..8 {
                assert_eq!(g.gamma()[(2 * j + 1, 2 * k + 1)], g.gamma()[(2 * j, 2 * k)]);
                assert_eq!(g.gamma()[(2 * j, 2 * k + 1)], 0.0);
            }
        }
    }

    #[test]
    fn steady_state_is_a_fixed_point() {
        let dm = build_damping_matrices(&two_site(0.3, 6)).unwrap();
        let g0 = solve_lyapunov_finite(&dm).unwrap();
        let g1 = evolve_finite(&dm, &g0, 5.0, 0.01).unwrap();
        assert!(g1.max_abs_diff(&g0) < 1e-12);
    }

    #[test]
    fn evolution_converges_to_steady_state() {
        let dm = build_damping_matrices(&two_site(0.5, 6)).unwrap();
        let g0 = solve_lyapunov_finite(&dm).unwrap();
        // start from the mixed state so the undamped even block is unaffected
        let start = CorrelationMatrix::completely_mixed(6);
        // slowest rate is twice the gap 8 sin²(g/2) at φ = π
        let g1 = evolve_finite(&dm, &start, 60.0, 0.01).unwrap();
        let odd = |m: &CorrelationMatrix| {
            DMatrix::from_fn(6, 6, |j, k| m.gamma()[(2 * j, 2 * k)])
        };
        assert!((odd(&g1) - odd(&g0)).amax() < 1e-8);
    }

    #[test]
    fn integrator_matches_matrix_exponential() {
        let dm = build_damping_matrices(&loss_model(3)).unwrap();
        let start = CorrelationMatrix::filled(3);
        let a = evolve_finite(&dm, &start, 0.7, 0.05).unwrap();
        let b = evolve_finite_exact(&dm, &start, 0.7).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-9);
    }

    #[test]
    fn rejects_bad_step() {
        let dm = build_damping_matrices(&loss_model(2)).unwrap();
        let start = CorrelationMatrix::filled(2);
        assert!(evolve_finite(&dm, &start, 1.0, 0.0).is_err());
    }
}
