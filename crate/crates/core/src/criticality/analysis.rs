use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::criticality::laurent::{LaurentPolynomial, SymbolFraction};
use crate::criticality::roots::{denominator_roots, taylor_coefficients, RootSet};
use crate::criticality::{CriticalCandidate, CriticalityReport};
use crate::error::{NessError, Result};
use crate::lattice::{dissipative_symbol, reservoir_symbol, DampingMatrices, LatticeModel, LindbladGenerator};
use crate::ness::correlation::CorrelationProfile;

/// Number of unit-circle samples used by minimum searches.
pub const CIRCLE_SAMPLES: usize = 4096;

type Series = Vec<C64>;

fn series_mul(a: &[C64], b: &[C64], len: usize) -> Series {
    let mut out = vec![C64::new(0.0, 0.0); len];
    for (i, x) in a.iter().enumerate().take(len) {
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `(a + t)^e` around `t = 0`, any integer `e`, `a ≠ 0`.
fn series_pow(a: C64, e: i32, len: usize) -> Series {
    let mut out = Vec::with_capacity(len);
    let mut binom = 1.0;
    let base = a.powi(e);
    for k in 0..len {
        out.push(base * binom / a.powi(k as i32));
        binom *= (e as f64 - k as f64) / (k as f64 + 1.0);
    }
    out
}

fn critical_report_from_roots(roots: &RootSet) -> CriticalityReport {
    let candidates: Vec<CriticalCandidate> = roots
        .on_circle()
        .iter()
        .map(|r| CriticalCandidate {
            z0: r.z / r.z.norm(),
            moment_order: None,
            merging_root_count: r.multiplicity,
        })
        .collect();
    CriticalityReport {
        merging_root_count: candidates.iter().map(|c| c.merging_root_count).max(),
        z0_candidates: candidates,
        critical: true,
        xi_inv: Some(0.0),
        ..CriticalityReport::default()
    }
}

/// `⟨w₁ w_{1+2d}⟩`, `d = 0..=dmax`, from the residues of `z^{d-1} n(z)/d(z)`
/// inside the unit circle.
pub fn residue_correlations(frac: &SymbolFraction, dmax: usize) -> Result<CorrelationProfile> {
    let roots = denominator_roots(frac)?;
    let on = roots.on_circle();
    if !on.is_empty() {
        return Err(NessError::Critical {
            count: on.len(),
            report: Box::new(critical_report_from_roots(&roots)),
        });
    }
    let mut values = vec![C64::new(0.0, 0.0); dmax + 1];
    values[0] = C64::new(1.0, 0.0);
    if frac.numerator.is_zero() {
        return Ok(profile(values));
    }
    let (num, kn) = frac.numerator.cleared();
    let (den, kd) = frac.denominator.cleared();
    let lead = *den.last().expect("non-zero denominator");
    let dprime = crate::criticality::roots::poly_derivative(&den);
    let inside = roots.inside();

    for (d, slot) in values.iter_mut().enumerate().skip(1) {
        let e = d as i32 - 1 + kd - kn;
        let mut acc = C64::new(0.0, 0.0);
        for root in &inside {
            let (a, m) = (root.z, root.multiplicity);
            if m == 1 {
                let dp = crate::criticality::roots::poly_eval(&dprime, a);
                acc += a.powi(e) * crate::criticality::roots::poly_eval(&num, a) / dp;
                continue;
            }
            // [t^{m-1}] (a+t)^e N(a+t) / (lead Π_{b≠a} (a-b+t)^{m_b})
            let mut g = series_pow(a, e, m);
            let nt: Vec<C64> = taylor_coefficients(&num, a).into_iter().take(m).collect();
            g = series_mul(&g, &nt, m);
            for other in &roots.roots {
                if other.z == a {
                    continue;
                }
                let inv = series_pow(a - other.z, -(other.multiplicity as i32), m);
                g = series_mul(&g, &inv, m);
            }
            acc += g[m - 1] / lead;
        }
        if e < 0 {
            // pole of order -e at the origin: [z^{-e-1}] N/D
            let p = (-e) as usize;
            let mut inv = vec![C64::new(0.0, 0.0); p];
            inv[0] = C64::new(1.0, 0.0) / den[0];
            for k in 1..p {
                let mut s = C64::new(0.0, 0.0);
                for i in 1..=k.min(den.len() - 1) {
                    s += den[i] * inv[k - i];
                }
                inv[k] = -s / den[0];
            }
            acc += series_mul(&num, &inv, p)[p - 1];
        }
        *slot = acc;
    }
    Ok(profile(values))
}

fn profile(values: Vec<C64>) -> CorrelationProfile {
    CorrelationProfile {
        entry: (0, 0),
        distances: (0..values.len() as i64).collect(),
        values,
        achieved_tolerance: None,
    }
}

/// Inverse correlation length `-ln|z₀|` for the inside root closest to the
/// circle; `0` at criticality and `+∞` for strictly local correlations.
pub fn correlation_length(frac: &SymbolFraction) -> Result<f64> {
    let roots = denominator_roots(frac)?;
    Ok(xi_inv_from_roots(&roots))
}

pub(crate) fn xi_inv_from_roots(roots: &RootSet) -> f64 {
    if !roots.on_circle().is_empty() {
        return 0.0;
    }
    match roots.closest_inside_modulus() {
        Some(r) if r > 0.0 => -r.ln(),
        _ => f64::INFINITY,
    }
}

/// Relaxation-rate band `-r(φ) - r(-φ)` on the given momenta.
pub fn damping_spectrum(gen: &LindbladGenerator, phis: &[f64]) -> Result<Vec<f64>> {
    phis.iter()
        .map(|&phi| Ok(-(reservoir_symbol(gen, phi)? + reservoir_symbol(gen, -phi)?)))
        .collect()
}

/// Golden-section refinement of a sampled minimum of `f` on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd)
}

/// Minimum of `f` over `[0, 2π)` by dense sampling and local polishing of
/// every sampled local minimum.
fn circle_min(f: impl Fn(f64) -> f64 + Copy, polish: impl Fn(f64) -> f64) -> f64 {
    let n = CIRCLE_SAMPLES;
    let h = 2.0 * PI / n as f64;
    let vals: Vec<f64> = (0..n).map(|k| f(k as f64 * h)).collect();
    let mut best = vals.iter().copied().fold(f64::INFINITY, f64::min);
    for k in 0..n {
        let (l, r) = (vals[(k + n - 1) % n], vals[(k + 1) % n]);
        if vals[k] <= l && vals[k] <= r {
            best = best.min(polish(k as f64 * h));
        }
    }
    best
}

/// `Δ = min_{|z|=1} d(z)`, clamped at zero.
pub fn damping_gap(frac: &SymbolFraction) -> f64 {
    let d = &frac.denominator;
    let d1 = d.derivative();
    let d2 = d1.derivative();
    let f = |phi: f64| d.eval_on_circle(phi).re;
    let h = 2.0 * PI / CIRCLE_SAMPLES as f64;
    let polish = |phi0: f64| newton_min(d, &d1, &d2, phi0, h);
    circle_min(f, polish).max(0.0)
}

/// Newton iteration on `f'(φ)` for `f(φ) = Re d(e^{iφ})`.
fn newton_min(
    d: &LaurentPolynomial,
    d1: &LaurentPolynomial,
    d2: &LaurentPolynomial,
    phi0: f64,
    h: f64,
) -> f64 {
    let f = |phi: f64| d.eval_on_circle(phi).re;
    let mut phi = phi0;
    let mut best = f(phi);
    for _ in 0..60 {
        let z = C64::from_polar(1.0, phi);
        let dz = d1.eval(z);
        let fp = (C64::i() * z * dz).re;
        let fpp = (-z * dz - z * z * d2.eval(z)).re;
        if fpp <= 0.0 {
            return golden_min(f, phi0 - h, phi0 + h).min(best);
        }
        let next = phi - fp / fpp;
        if (next - phi0).abs() > h {
            return golden_min(f, phi0 - h, phi0 + h).min(best);
        }
        let fv = f(next);
        if fv > best {
            break;
        }
        best = fv;
        if (next - phi).abs() < 1e-15 {
            break;
        }
        phi = next;
    }
    best
}

fn eigen_2x2_hermitian(m: &nalgebra::Matrix2<C64>) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let c = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b.norm_sqr()).sqrt();
    [mean - rad, mean + rad]
}

/// Smallest relaxation rate from the eigenvalues of the symbol of `R + R^*`.
/// Bands that vanish identically (decoupled species) are skipped.
pub fn damping_gap_symbol(model: &LatticeModel) -> f64 {
    let n = CIRCLE_SAMPLES;
    let h = 2.0 * PI / n as f64;
    let bands: Vec<[f64; 2]> = (0..n)
        .map(|k| eigen_2x2_hermitian(&dissipative_symbol(model, k as f64 * h)))
        .collect();
    let scale = bands.iter().map(|b| b[1].abs()).fold(0.0, f64::max).max(1e-300);
    let lower_dead = bands.iter().all(|b| b[0].abs() <= 1e-12 * scale);
    let band = usize::from(lower_dead);
    let f = move |phi: f64| eigen_2x2_hermitian(&dissipative_symbol(model, phi))[band];
    circle_min(f, |phi0| golden_min(f, phi0 - h, phi0 + h)).max(0.0)
}

/// Smallest nonzero eigenvalue of `R + R^*` for a finite chain.
pub fn damping_gap_finite(dm: &DampingMatrices) -> f64 {
    let ev = dm.dissipative_part().symmetric_eigenvalues();
    let max = ev.iter().copied().fold(0.0, f64::max);
    let cut = 1e-10 * max.max(1.0);
    ev.iter()
        .copied()
        .filter(|&v| v > cut)
        .reduce(f64::min)
        .unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criticality::laurent::to_symbol_fraction;
    use crate::lattice::{build_damping_matrices, Chain};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn two_site(nu: f64, g: f64) -> LindbladGenerator {
        LindbladGenerator::odd_only(&[c(1.0, 0.0), C64::from_polar(nu, g)]).unwrap()
    }

    #[test]
    fn two_site_length_and_gap() {
        let g = 0.1f64;
        let f = to_symbol_fraction(&two_site(1.0, g)).unwrap();
        let xi = correlation_length(&f).unwrap();
        assert!((xi + ((1.0 - g.sin()) / g.cos()).ln()).abs() < 1e-13);
        assert!((xi - 0.100167).abs() < 1e-6);
        let gap = damping_gap(&f);
        assert!((gap - 8.0 * (0.05f64).sin().powi(2)).abs() < 1e-13);
    }

    #[test]
    fn local_and_single_site() {
        let f = to_symbol_fraction(&two_site(1.0, PI / 2.0)).unwrap();
        assert_eq!(correlation_length(&f).unwrap(), f64::INFINITY);
        let single = LindbladGenerator::odd_only(&[c(1.0, 0.0)]).unwrap();
        let f = to_symbol_fraction(&single).unwrap();
        assert!((damping_gap(&f) - 2.0).abs() < 1e-14);
        assert_eq!(correlation_length(&f).unwrap(), f64::INFINITY);
        let spec = damping_spectrum(&single, &[0.0, 1.0, 2.0]).unwrap();
        assert!(spec.iter().all(|&v| (v + 2.0).abs() < 1e-15));
    }

    #[test]
    fn critical_gap_and_length() {
        let f = to_symbol_fraction(&two_site(1.0, 0.0)).unwrap();
        assert_eq!(correlation_length(&f).unwrap(), 0.0);
        assert!(damping_gap(&f) < 1e-14);
        assert!(matches!(
            residue_correlations(&f, 3),
            Err(NessError::Critical { count: 1, .. })
        ));
    }

    #[test]
    fn spectrum_of_two_site_band() {
        let gen = two_site(1.0, 0.0);
        let phis = [0.0, 1.0, PI];
        let s = damping_spectrum(&gen, &phis).unwrap();
        for (v, phi) in s.iter().zip(phis) {
            assert!((v + 4.0 * (1.0 + phi.cos())).abs() < 1e-13);
        }
    }

    #[test]
    fn finite_gap_close_to_symbol_gap() {
        let gen = two_site(1.0, 0.1);
        let f = to_symbol_fraction(&gen).unwrap();
        let model = LatticeModel::new(
            vec![gen],
            None,
            Chain::Finite {
                sites: 64,
                periodic: true,
            },
        )
        .unwrap();
        let dm = build_damping_matrices(&model).unwrap();
        assert!((damping_gap_finite(&dm) - damping_gap(&f)).abs() < 1e-3);
        assert!((damping_gap_symbol(&model) - damping_gap(&f)).abs() < 1e-12);
    }

    #[test]
    fn series_helpers() {
        // (2 + t)^-1 = 1/2 - t/4 + t^2/8
        let s = series_pow(c(2.0, 0.0), -1, 3);
        assert!((s[0] - c(0.5, 0.0)).norm() < 1e-16);
        assert!((s[1] - c(-0.25, 0.0)).norm() < 1e-16);
        assert!((s[2] - c(0.125, 0.0)).norm() < 1e-16);
    }
}
