//! Dense linear-algebra kernels: transposed Sylvester solves and
//! companion-matrix polynomial roots.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64 as C64;

use crate::error::{NessError, Result};

pub(crate) fn max_abs<T: nalgebra::ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.iter().map(|z| z.clone().abs()).fold(0.0, f64::max)
}

/// Solves `Xᵀ G + G X = Y` for real symmetric `X` using `X = V Λ Vᵀ`.
pub fn solve_sylvester_symmetric(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    let eig = x.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let lambda = &eig.eigenvalues;
    let w = v.transpose() * y * v;
    let tol = 1e-12 * max_abs(x).max(1.0);
    let mut z = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let s = lambda[i] + lambda[j];
            if s.abs() < tol {
                return Err(NessError::DegenerateSteadyState {
                    first: C64::new(lambda[i], 0.0),
                    second: C64::new(lambda[j], 0.0),
                    sum: s.abs(),
                });
            }
            z[(i, j)] = w[(i, j)] / s;
        }
    }
    Ok(v * z * v.transpose())
}

/// Solves `Xᵀ G + G X = Y` for general complex `X` (Bartels–Stewart on the
/// complex Schur form `X = Q T Q^H`).
///
/// With `Z = Qᵀ G Q` the equation becomes `Tᵀ Z + Z T = Qᵀ Y Q`, which is
/// solved entry by entry in row-major order.
pub fn solve_sylvester_general(x: &DMatrix<C64>, y: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = x.nrows();
    let schur = Schur::try_new(x.clone(), 1e-15, 10_000)
        .ok_or_else(|| NessError::Linalg("Schur decomposition did not converge".into()))?;
    let (q, t) = schur.unpack();
    let w = q.transpose() * y * &q;
    let tol = 1e-12 * max_abs(x).max(1.0);
    let mut z = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            let mut acc = w[(i, j)];
            for k in 0..i {
                acc -= t[(k, i)] * z[(k, j)];
            }
            for k in 0..j {
                acc -= z[(i, k)] * t[(k, j)];
            }
            let s = t[(i, i)] + t[(j, j)];
            if s.norm() < tol {
                return Err(NessError::DegenerateSteadyState {
                    first: t[(i, i)],
                    second: t[(j, j)],
                    sum: s.norm(),
                });
            }
            z[(i, j)] = acc / s;
        }
    }
    let q_conj = q.map(|c| c.conj());
    Ok(q_conj * z * q.adjoint())
}

/// Roots of `Σ_k coeffs[k] z^k` from the eigenvalues of the companion
/// matrix. Leading zeros are stripped; zero roots are returned explicitly.
pub fn companion_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(NessError::InvalidArgument("zero polynomial has no roots".into()));
    }
    let mut top = coeffs.len() - 1;
    while coeffs[top].norm() <= 1e-14 * scale {
        top -= 1;
    }
    let mut low = 0;
    while coeffs[low].norm() <= 1e-14 * scale && low < top {
        low += 1;
    }
    let mut roots = vec![C64::new(0.0, 0.0); low];
    let poly = &coeffs[low..=top];
    let deg = poly.len() - 1;
    if deg == 0 {
        return Ok(roots);
    }
    let lead = poly[deg];
    let mut comp = DMatrix::from_element(deg, deg, C64::new(0.0, 0.0));
    for i in 1..deg {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -poly[i] / lead;
    }
    balance(&mut comp);
    let schur = Schur::try_new(comp, 1e-16, 100_000)
        .ok_or_else(|| NessError::Linalg("companion Schur form did not converge".into()))?;
    let (_, t) = schur.unpack();
    roots.extend((0..deg).map(|i| t[(i, i)]));
    Ok(roots)
}

/// Parlett–Reinsch diagonal balancing (powers of two, similarity preserving).
fn balance(a: &mut DMatrix<C64>) {
    let n = a.nrows();
    let radix = 2.0f64;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].norm();
                    r += a[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let rr = r;
            while cc < rr / radix {
                cc *= radix;
                f *= radix;
            }
            while cc > rr * radix {
                cc /= radix;
                f /= radix;
            }
            if (cc + rr / f) < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(x: &DMatrix<C64>, y: &DMatrix<C64>, g: &DMatrix<C64>) -> f64 {
        max_abs(&(x.transpose() * g + g * x - y))
    }

    #[test]
    fn general_solver_satisfies_equation() {
        let n = 7;
        let x = DMatrix::from_fn(n, n, |i, j| {
            let v = ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.5;
            C64::new(v - if i == j { 3.0 } else { 0.0 }, 0.1 * (i as f64 - j as f64))
        });
        let y = DMatrix::from_fn(n, n, |i, j| C64::new((i as f64 - j as f64).sin(), 0.2 * (i + j) as f64));
        let g = solve_sylvester_general(&x, &y).unwrap();
        assert!(residual(&x, &y, &g) < 1e-11);
    }

    #[test]
    fn symmetric_solver_matches_general() {
        let n = 6;
        let xs = DMatrix::from_fn(n, n, |i, j| {
            -(if i == j { 4.0 } else { 0.0 }) + 1.0 / (1.0 + (i + j) as f64)
        });
        let ys = DMatrix::from_fn(n, n, |i, j| (i as f64 - j as f64) * 0.3);
        let a = solve_sylvester_symmetric(&xs, &ys).unwrap();
        let b = solve_sylvester_general(&xs.map(|v| C64::new(v, 0.0)), &ys.map(|v| C64::new(v, 0.0)))
            .unwrap();
        for (u, v) in a.iter().zip(b.iter()) {
            assert!((C64::new(*u, 0.0) - v).norm() < 1e-11);
        }
    }

    #[test]
    fn singular_operator_is_reported() {
        let x = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 0.0]));
        let y = DMatrix::zeros(2, 2);
        assert!(matches!(
            solve_sylvester_symmetric(&x, &y),
            Err(NessError::DegenerateSteadyState { .. })
        ));
    }

    #[test]
    fn companion_roots_of_known_polynomials() {
        // (z - 2)(z + 0.5)(z - i) = z³ - (1.5 + i) z² + (-1 + 1.5i) z + i
        let c = |re, im| C64::new(re, im);
        let coeffs = [c(0.0, 1.0), c(-1.0, 1.5), c(-1.5, -1.0), c(1.0, 0.0)];
        let mut roots = companion_roots(&coeffs).unwrap();
        roots.sort_by(|a, b| a.re.total_cmp(&b.re));
        let expected = [c(-0.5, 0.0), c(0.0, 1.0), c(2.0, 0.0)];
        for (r, e) in roots.iter().zip(&expected) {
            assert!((r - e).norm() < 1e-12, "{r} vs {e}");
        }
        // z² (z - 1): two explicit zero roots
        let roots = companion_roots(&[c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(roots.len(), 3);
        assert_eq!(roots.iter().filter(|r| r.norm() == 0.0).count(), 2);
    }
}
