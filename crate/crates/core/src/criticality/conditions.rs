use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::criticality::analysis::xi_inv_from_roots;
use crate::criticality::laurent::to_symbol_fraction;
use crate::criticality::roots::{denominator_roots, TAU_CIRCLE};
use crate::criticality::{CriticalCandidate, CriticalityReport};
use crate::error::{NessError, Result};
use crate::lattice::LindbladGenerator;

/// Relative size below which a moment residual counts as zero.
pub const MOMENT_TOL: f64 = 1e-8;

fn require_circle(z0: C64) -> Result<()> {
    if (z0.norm() - 1.0).abs() > TAU_CIRCLE {
        return Err(NessError::InvalidArgument(format!(
            "z0 = {z0} is not on the unit circle"
        )));
    }
    Ok(())
}

fn normalized_odd(gen: &LindbladGenerator) -> Result<(Vec<C64>, C64)> {
    gen.validate()?;
    if !gen.is_odd_only() {
        return Err(NessError::UnsupportedGenerator(
            "criticality analysis needs a generator built from odd Majorana operators".into(),
        ));
    }
    let (norm, s0) = gen.normalized()?;
    Ok((norm.odd_values(), s0))
}

fn moment(s: &[C64], z: C64, m: u32) -> C64 {
    s.iter()
        .enumerate()
        .map(|(j, sj)| sj * (j as f64).powi(m as i32) * z.powi(j as i32))
        .sum()
}

fn moment_scale(s: &[C64], m: u32) -> f64 {
    s.iter()
        .enumerate()
        .map(|(j, sj)| sj.norm() * (j as f64).powi(m as i32))
        .sum::<f64>()
        .max(1.0)
}

/// `(1 + Σ s_j z0^j, 1 + Σ s_j conj(z0)^j)` after rescaling to `s₀ = 1`.
pub fn criticality_conditions(gen: &LindbladGenerator, z0: C64) -> Result<(C64, C64)> {
    require_circle(z0)?;
    let (s, _) = normalized_odd(gen)?;
    Ok((moment(&s, z0, 0), moment(&s, z0.conj(), 0)))
}

/// Residual pairs `(Σ j^m s_j z0^j, Σ j^m s_j conj(z0)^j)` for `m = 0..=m_max`.
pub fn moment_conditions(gen: &LindbladGenerator, z0: C64, m_max: usize) -> Result<Vec<(C64, C64)>> {
    require_circle(z0)?;
    let (s, _) = normalized_odd(gen)?;
    Ok((0..=m_max as u32)
        .map(|m| (moment(&s, z0, m), moment(&s, z0.conj(), m)))
        .collect())
}

fn order_of(s: &[C64], z0: C64) -> Result<usize> {
    let n = s.len();
    for m in 0..n as u32 {
        let tol = MOMENT_TOL * moment_scale(s, m);
        if moment(s, z0, m).norm() > tol || moment(s, z0.conj(), m).norm() > tol {
            return Ok(m as usize);
        }
    }
    Err(NessError::DegenerateGenerator { order: n - 1 })
}

/// Smallest `m` with a nonzero moment residual; `0` when `z0` is not critical.
pub fn moment_order(gen: &LindbladGenerator, z0: C64) -> Result<usize> {
    require_circle(z0)?;
    let (s, _) = normalized_odd(gen)?;
    order_of(&s, z0)
}

/// Exact-structure exponent prediction from the on-circle denominator roots.
pub fn predict_exponents(gen: &LindbladGenerator) -> Result<CriticalityReport> {
    let (s, s0) = normalized_odd(gen)?;
    let norm = LindbladGenerator::odd_only(&s)?;
    let roots = denominator_roots(&to_symbol_fraction(&norm)?)?;
    let n = gen.span;
    let mut candidates = Vec::new();
    for root in roots.on_circle() {
        let z0 = root.z / root.z.norm();
        let m = order_of(&s, z0)?;
        if m == 0 {
            continue;
        }
        candidates.push(CriticalCandidate {
            z0,
            moment_order: Some(m),
            merging_root_count: root.multiplicity,
        });
    }
    let best = candidates
        .iter()
        .max_by_key(|c| (c.moment_order, c.merging_root_count))
        .cloned();
    let xi = xi_inv_from_roots(&roots);
    Ok(CriticalityReport {
        span: Some(n),
        normalization: Some(s0),
        critical: best.is_some(),
        moment_order: best.as_ref().and_then(|c| c.moment_order),
        predicted_lambda: best
            .as_ref()
            .and_then(|c| c.moment_order)
            .map(|m| 1.0 / m as f64),
        predicted_manifold_dim: best
            .as_ref()
            .and_then(|c| c.moment_order)
            .map(|m| 2 * (n as i64 - 1 - m as i64)),
        merging_root_count: best.as_ref().map(|c| c.merging_root_count),
        xi_inv: if best.is_some() {
            Some(0.0)
        } else if xi.is_finite() {
            Some(xi)
        } else {
            None
        },
        z0_candidates: candidates,
    })
}

/// Affine family `s = particular + Σ c_k directions[k]` of critical
/// generators (with `s₀ = 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CriticalFamily {
    pub span: usize,
    pub order: usize,
    pub z0: C64,
    pub particular: Vec<C64>,
    pub directions: Vec<Vec<C64>>,
}

impl CriticalFamily {
    /// Coefficients at a point of the family.
    pub fn point(&self, coords: &[C64]) -> Result<Vec<C64>> {
        if coords.len() != self.directions.len() {
            return Err(NessError::InvalidArgument(format!(
                "family has {} free directions, got {} coordinates",
                self.directions.len(),
                coords.len()
            )));
        }
        let mut s = self.particular.clone();
        for (c, dir) in coords.iter().zip(&self.directions) {
            for (sj, dj) in s.iter_mut().zip(dir) {
                *sj += c * dj;
            }
        }
        Ok(s)
    }

    pub fn generator(&self, coords: &[C64]) -> Result<LindbladGenerator> {
        LindbladGenerator::odd_only(&self.point(coords)?)
    }
}

/// Solves the first `order` moment-equation pairs at `z0` for the free
/// coefficients `s_1..s_{N-1}` (least-norm particular solution plus a
/// null-space basis). `fixed` pins individual coefficients.
pub fn solve_critical_parameters(
    span: usize,
    order: usize,
    z0: C64,
    fixed: &[(usize, C64)],
) -> Result<CriticalFamily> {
    require_circle(z0)?;
    if span < 2 {
        return Err(NessError::InvalidArgument(
            "single-site reservoirs cannot be critical".into(),
        ));
    }
    if order == 0 || order > span - 1 {
        return Err(NessError::InvalidArgument(format!(
            "moment order must lie in 1..={}, got {order}",
            span - 1
        )));
    }
    let mut known: Vec<Option<C64>> = vec![None; span];
    known[0] = Some(C64::new(1.0, 0.0));
    for &(j, v) in fixed {
        if j == 0 || j >= span {
            return Err(NessError::InvalidArgument(format!(
                "fixed coefficient index {j} outside 1..{span}"
            )));
        }
        known[j] = Some(v);
    }
    let free: Vec<usize> = (0..span).filter(|&j| known[j].is_none()).collect();
    let points: Vec<C64> = if z0.im.abs() < 1e-15 {
        vec![z0]
    } else {
        vec![z0, z0.conj()]
    };
    let rows = order * points.len();
    let cols = free.len();
    let mut a = DMatrix::from_element(rows.max(cols), cols, C64::new(0.0, 0.0));
    let mut b = nalgebra::DVector::from_element(rows.max(cols), C64::new(0.0, 0.0));
    let mut r = 0;
    for m in 0..order as i32 {
        for &w in &points {
            let term = |j: usize| w.powi(j as i32) * (j as f64).powi(m);
            for (c, &j) in free.iter().enumerate() {
                a[(r, c)] = term(j);
            }
            b[r] = -(0..span)
                .filter_map(|j| known[j].map(|v| v * term(j)))
                .sum::<C64>();
            r += 1;
        }
    }
    let mut s: Vec<C64> = known.iter().map(|k| k.unwrap_or_default()).collect();
    let mut directions = Vec::new();
    if cols > 0 {
        let svd = a.clone().svd(true, true);
        let u = svd.u.as_ref().expect("requested U");
        let vt = svd.v_t.as_ref().expect("requested V^T");
        let smax = svd.singular_values.max();
        let cut = 1e-10 * smax.max(1.0);
        let mut x = nalgebra::DVector::from_element(cols, C64::new(0.0, 0.0));
        for (k, &sv) in svd.singular_values.iter().enumerate() {
            if sv > cut {
                let coeff = (u.column(k).adjoint() * &b)[(0, 0)] / sv;
                x += vt.row(k).adjoint() * coeff;
            } else {
                let mut dir = vec![C64::new(0.0, 0.0); span];
                for (c, &j) in free.iter().enumerate() {
                    dir[j] = vt[(k, c)].conj();
                }
                directions.push(dir);
            }
        }
        for (c, &j) in free.iter().enumerate() {
            s[j] = x[c];
        }
    }
    // consistency and verification against the moment equations
    for m in 0..order as u32 {
        let tol = 1e-9 * moment_scale(&s, m);
        for &w in &points {
            let res = moment(&s, w, m);
            if res.norm() > tol {
                return Err(NessError::NoSolution(format!(
                    "moment equation m = {m} at z = {w} left with residual {:.3e}",
                    res.norm()
                )));
            }
        }
    }
    Ok(CriticalFamily {
        span,
        order,
        z0,
        particular: s,
        directions,
    })
}

/// Result of [`empirical_manifold_dimension`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ManifoldDimension {
    pub dimension: usize,
    pub rank: usize,
    /// Real parameters including the circle coordinate of `z0`.
    pub parameters: usize,
    pub z0: C64,
    pub moment_order: usize,
    pub singular_values: Vec<f64>,
}

/// Jacobian of the real and imaginary parts of the active moment equations
/// with respect to `(Re s_j, Im s_j)_{j≥1}` and `θ` with `z0 = e^{iθ}`.
fn constraint_jacobian(s: &[C64], theta: f64, order: usize) -> DMatrix<f64> {
    let n = s.len();
    let cols = 2 * (n - 1) + 1;
    let mut jac = DMatrix::zeros(4 * order, cols);
    let z = C64::from_polar(1.0, theta);
    let i = C64::i();
    for m in 0..order as u32 {
        for (k, (w, sign)) in [(z, 1.0), (z.conj(), -1.0)].into_iter().enumerate() {
            let row = 4 * m as usize + 2 * k;
            for j in 1..n {
                let p = w.powi(j as i32) * (j as f64).powi(m as i32);
                for (col, v) in [(2 * (j - 1), p), (2 * (j - 1) + 1, i * p)] {
                    jac[(row, col)] = v.re;
                    jac[(row + 1, col)] = v.im;
                }
            }
            let dtheta = i * sign * moment(s, w, m + 1);
            jac[(row, cols - 1)] = dtheta.re;
            jac[(row + 1, cols - 1)] = dtheta.im;
        }
    }
    jac
}

fn rank(sv: &[f64], cut: f64) -> usize {
    sv.iter().filter(|&&v| v > cut).count()
}

/// Numerical dimension of the critical manifold through a critical
/// generator: `(#real parameters + 1) - rank J`.
pub fn empirical_manifold_dimension(gen: &LindbladGenerator) -> Result<ManifoldDimension> {
    let (s, _) = normalized_odd(gen)?;
    let report = predict_exponents(gen)?;
    let cand = report
        .z0_candidates
        .iter()
        .max_by_key(|c| c.moment_order)
        .ok_or_else(|| NessError::InvalidArgument("generator is not critical".into()))?;
    let order = cand.moment_order.unwrap_or(1);
    let theta = cand.z0.arg();
    let jac = constraint_jacobian(&s, theta, order);
    let sv: Vec<f64> = jac.clone().singular_values().iter().copied().collect();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let r0 = rank(&sv, 1e-8 * smax);

    // the rank must survive a small perturbation of the point
    let eps = 1e-6;
    let s_pert: Vec<C64> = s
        .iter()
        .enumerate()
        .map(|(j, v)| if j == 0 { *v } else { v + C64::new(eps, -0.5 * eps) * (j as f64) })
        .collect();
    let jac_p = constraint_jacobian(&s_pert, theta + eps, order);
    let sv_p: Vec<f64> = jac_p.singular_values().iter().copied().collect();
    let smax_p = sv_p.iter().copied().fold(0.0, f64::max);
    let r1 = rank(&sv_p, (1e-8 * smax_p).max(10.0 * eps * smax_p));
    if r0 != r1 {
        return Err(NessError::IllConditioned(format!(
            "Jacobian rank {r0} at the point but {r1} after a {eps:e} perturbation"
        )));
    }
    let parameters = 2 * (s.len() - 1) + 1;
    Ok(ManifoldDimension {
        dimension: parameters - r0,
        rank: r0,
        parameters,
        z0: cand.z0,
        moment_order: order,
        singular_values: sv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn odd(s: &[C64]) -> LindbladGenerator {
        LindbladGenerator::odd_only(s).unwrap()
    }

    fn staircase() -> LindbladGenerator {
        odd(&[
            C64::from_polar(1.0, -2.0 * PI / 3.0),
            c(1.0, 0.0),
            C64::from_polar(1.0, 2.0 * PI / 3.0),
        ])
    }

    #[test]
    fn conditions_examples() {
        let (a, b) = criticality_conditions(&odd(&[c(1.0, 0.0), c(-1.0, 0.0)]), c(1.0, 0.0)).unwrap();
        assert!(a.norm() < 1e-15 && b.norm() < 1e-15);
        let (a, b) =
            criticality_conditions(&odd(&[c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]), c(-1.0, 0.0)).unwrap();
        assert!(a.norm() < 1e-15 && b.norm() < 1e-15);
        let (a, _) = criticality_conditions(&odd(&[c(1.0, 0.0)]), C64::from_polar(1.0, 0.3)).unwrap();
        assert!((a - c(1.0, 0.0)).norm() < 1e-15);
        assert!(criticality_conditions(&odd(&[c(1.0, 0.0)]), c(0.5, 0.0)).is_err());
    }

    #[test]
    fn moment_examples() {
        let gen = odd(&[c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
        let mc = moment_conditions(&gen, c(-1.0, 0.0), 2).unwrap();
        assert!(mc[0].0.norm() < 1e-15 && mc[1].0.norm() < 1e-15);
        assert!((mc[2].0 - c(2.0, 0.0)).norm() < 1e-15);
        assert_eq!(moment_order(&gen, c(-1.0, 0.0)).unwrap(), 2);
        assert_eq!(moment_order(&staircase(), c(1.0, 0.0)).unwrap(), 1);
        let gen = odd(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let mc = moment_conditions(&gen, c(0.0, 1.0), 1).unwrap();
        assert!((mc[1].0 - c(-2.0, 0.0)).norm() < 1e-15);
        assert_eq!(moment_order(&gen, c(0.0, 1.0)).unwrap(), 1);
    }

    #[test]
    fn predictions() {
        let r = predict_exponents(&odd(&[c(1.0, 0.0), c(-1.0, 0.0)])).unwrap();
        assert_eq!(r.predicted_lambda, Some(1.0));
        assert_eq!(r.merging_root_count, Some(2));
        assert_eq!(r.predicted_manifold_dim, Some(0));

        let r = predict_exponents(&odd(&[c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)])).unwrap();
        assert_eq!(r.predicted_lambda, Some(0.5));
        assert_eq!(r.merging_root_count, Some(4));
        assert_eq!(r.predicted_manifold_dim, Some(0));

        let r = predict_exponents(&staircase()).unwrap();
        assert_eq!(r.predicted_lambda, Some(1.0));
        assert_eq!(r.predicted_manifold_dim, Some(2));
        assert_eq!(r.merging_root_count, Some(2));

        let r = predict_exponents(&odd(&[c(1.0, 0.0), C64::from_polar(1.0, 0.1)])).unwrap();
        assert!(!r.critical);
        assert!((r.xi_inv.unwrap() - 0.100167).abs() < 1e-6);
    }

    #[test]
    fn solve_examples() {
        let f = solve_critical_parameters(2, 1, c(-1.0, 0.0), &[]).unwrap();
        assert!((f.particular[1] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(f.directions.is_empty());
        let f = solve_critical_parameters(3, 2, c(-1.0, 0.0), &[]).unwrap();
        assert!((f.particular[1] - c(2.0, 0.0)).norm() < 1e-12);
        assert!((f.particular[2] - c(1.0, 0.0)).norm() < 1e-12);
        let f = solve_critical_parameters(3, 1, c(0.0, 1.0), &[]).unwrap();
        assert!(f.particular[1].norm() < 1e-12);
        assert!((f.particular[2] - c(1.0, 0.0)).norm() < 1e-12);
        // two complex equations, one unknown
        assert!(matches!(
            solve_critical_parameters(2, 1, c(0.0, 1.0), &[]),
            Err(NessError::NoSolution(_))
        ));
        assert!(solve_critical_parameters(3, 3, c(1.0, 0.0), &[]).is_err());
    }

    #[test]
    fn family_points_stay_critical() {
        let f = solve_critical_parameters(4, 1, c(1.0, 0.0), &[]).unwrap();
        assert_eq!(f.directions.len(), 2);
        let gen = f.generator(&[c(0.3, -0.2), c(0.1, 0.4)]).unwrap();
        let r = predict_exponents(&gen).unwrap();
        assert!(r.critical);
        assert_eq!(r.predicted_lambda, Some(1.0));
    }

    #[test]
    fn manifold_dimensions() {
        let d = empirical_manifold_dimension(&odd(&[c(1.0, 0.0), c(-1.0, 0.0)])).unwrap();
        assert_eq!(d.dimension, 0);
        let d = empirical_manifold_dimension(&staircase()).unwrap();
        assert_eq!(d.dimension, 2);
    }
}
