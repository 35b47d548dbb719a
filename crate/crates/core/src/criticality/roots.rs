use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::criticality::laurent::{LaurentPolynomial, SymbolFraction};
use crate::error::Result;
use crate::linalg::companion_roots;

/// `||z| - 1|` below which a root counts as lying on the unit circle.
pub const TAU_CIRCLE: f64 = 1e-9;
/// Roots closer than this are always merged.
pub const MERGE_RADIUS: f64 = 1e-7;
const CLUSTER_START: f64 = 5e-2;
/// Backward-error level at which a cluster is indistinguishable from a
/// multiple root.
const MULTIPLE_ROOT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootLocation {
    Inside,
    OnCircle,
    Outside,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub z: C64,
    pub multiplicity: usize,
    pub classification: RootLocation,
}

/// Roots of the exponent-cleared denominator `z^K d(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
    /// Degree of the cleared polynomial.
    pub degree: usize,
    /// The clearing exponent `K`.
    pub shift: i32,
}

impl RootSet {
    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn with_location(&self, loc: RootLocation) -> impl Iterator<Item = &Root> {
        self.roots.iter().filter(move |r| r.classification == loc)
    }

    pub fn on_circle(&self) -> Vec<&Root> {
        self.with_location(RootLocation::OnCircle).collect()
    }

    pub fn inside(&self) -> Vec<&Root> {
        self.with_location(RootLocation::Inside).collect()
    }

    /// Largest modulus among the inside roots.
    pub fn closest_inside_modulus(&self) -> Option<f64> {
        self.inside().iter().map(|r| r.z.norm()).reduce(f64::max)
    }
}

pub(crate) fn poly_eval(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

pub(crate) fn poly_derivative(coeffs: &[C64]) -> Vec<C64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// Taylor coefficients `t_k = p^{(k)}(c)/k!` by repeated synthetic division.
pub(crate) fn taylor_coefficients(coeffs: &[C64], c: C64) -> Vec<C64> {
    let mut work = coeffs.to_vec();
    let n = work.len();
    for k in 0..n {
        for i in (k..n - 1).rev() {
            let carry = work[i + 1] * c;
            work[i] += carry;
        }
    }
    work
}

/// Scale of `p` near `c` used for relative tests.
fn local_scale(coeffs: &[C64], c: C64) -> f64 {
    let r = c.norm().max(1.0);
    coeffs
        .iter()
        .enumerate()
        .map(|(i, a)| a.norm() * r.powi(i as i32))
        .sum()
}

fn looks_multiple(coeffs: &[C64], c: C64, m: usize) -> bool {
    let t = taylor_coefficients(coeffs, c);
    let s = local_scale(coeffs, c);
    (0..m).all(|k| {
        let bound = MULTIPLE_ROOT_TOL.powf((m - k) as f64 / m as f64) * s;
        t.get(k).map_or(true, |tk| tk.norm() <= bound)
    })
}

/// Single-linkage groups of `pts` at distance `radius`.
fn link(pts: &[C64], radius: f64) -> Vec<Vec<C64>> {
    let n = pts.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (pts[i] - pts[j]).norm() < radius {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<C64>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut label, i);
        match groups.iter_mut().find(|(k, _)| *k == r) {
            Some((_, g)) => g.push(pts[i]),
            None => groups.push((r, vec![pts[i]])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

fn cluster(coeffs: &[C64], pts: &[C64], radius: f64, out: &mut Vec<(C64, usize)>) {
    for group in link(pts, radius) {
        let m = group.len();
        let centroid = group.iter().sum::<C64>() / m as f64;
        if m == 1 || radius <= MERGE_RADIUS || looks_multiple(coeffs, centroid, m) {
            out.push((centroid, m));
        } else {
            cluster(coeffs, &group, (radius * 0.1).max(MERGE_RADIUS), out);
        }
    }
}

/// Newton on `p^{(m-1)}`, which has a simple root where `p` has an `m`-fold
/// one. Steps that do not reduce the residual are rejected.
fn polish(coeffs: &[C64], z0: C64, m: usize, max_step: f64) -> C64 {
    let mut p = coeffs.to_vec();
    for _ in 1..m {
        p = poly_derivative(&p);
    }
    let dp = poly_derivative(&p);
    let mut z = z0;
    let mut fz = poly_eval(&p, z).norm();
    for _ in 0..50 {
        let d = poly_eval(&dp, z);
        if d.norm() == 0.0 {
            break;
        }
        let step = poly_eval(&p, z) / d;
        let cand = z - step;
        let fc = poly_eval(&p, cand).norm();
        if fc >= fz || (cand - z0).norm() > max_step {
            break;
        }
        z = cand;
        fz = fc;
        if step.norm() <= 1e-16 * z.norm().max(1.0) {
            break;
        }
    }
    z
}

fn classify(z: C64) -> RootLocation {
    let r = z.norm();
    if (r - 1.0).abs() < TAU_CIRCLE {
        RootLocation::OnCircle
    } else if r < 1.0 {
        RootLocation::Inside
    } else {
        RootLocation::Outside
    }
}

/// Roots of an ascending coefficient list with multiplicities.
pub(crate) fn polynomial_roots(coeffs: &[C64]) -> Result<Vec<(C64, usize)>> {
    if coeffs.len() <= 1 {
        return Ok(Vec::new());
    }
    let raw = companion_roots(coeffs)?;
    let mut clusters = Vec::new();
    cluster(coeffs, &raw, CLUSTER_START, &mut clusters);
    let centres: Vec<C64> = clusters.iter().map(|c| c.0).collect();
    let polished = clusters
        .iter()
        .enumerate()
        .map(|(i, &(z, m))| {
            let gap = centres
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, w)| (w - z).norm())
                .fold(f64::INFINITY, f64::min);
            (polish(coeffs, z, m, 0.25 * gap.min(1.0)), m)
        })
        .collect();
    Ok(polished)
}

/// Roots of `z^K d(z)`, clustered into multiplicities and classified
/// relative to the unit circle. Sorted by modulus, then argument.
pub fn denominator_roots(frac: &SymbolFraction) -> Result<RootSet> {
    let (coeffs, shift) = frac.denominator.cleared();
    let degree = coeffs.len().saturating_sub(1);
    Ok(root_set(polynomial_roots(&coeffs)?, degree, shift))
}

fn root_set(found: Vec<(C64, usize)>, degree: usize, shift: i32) -> RootSet {
    let mut roots: Vec<Root> = found
        .into_iter()
        .map(|(z, multiplicity)| Root {
            z,
            multiplicity,
            classification: classify(z),
        })
        .collect();
    roots.sort_by(|a, b| {
        a.z.norm()
            .total_cmp(&b.z.norm())
            .then(a.z.arg().total_cmp(&b.z.arg()))
    });
    RootSet {
        roots,
        degree,
        shift,
    }
}

/// Roots of a denominator given as a product of Laurent factors. Each factor
/// is solved on its own, which keeps nearby roots of different factors
/// resolvable; roots of different factors closer than [`MERGE_RADIUS`] are
/// combined.
pub fn factored_denominator_roots(factors: &[LaurentPolynomial]) -> Result<RootSet> {
    let mut found: Vec<(C64, usize)> = Vec::new();
    let mut degree = 0;
    let mut shift = 0;
    for f in factors {
        let (coeffs, k) = f.cleared();
        degree += coeffs.len().saturating_sub(1);
        shift += k;
        for (z, m) in polynomial_roots(&coeffs)? {
            match found
                .iter_mut()
                .find(|(w, _)| (w - z).norm() < MERGE_RADIUS * z.norm().max(1.0))
            {
                Some((w, n)) => {
                    *w = (*w * *n as f64 + z * m as f64) / (*n + m) as f64;
                    *n += m;
                }
                None => found.push((z, m)),
            }
        }
    }
    Ok(root_set(found, degree, shift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criticality::laurent::to_symbol_fraction;
    use crate::lattice::LindbladGenerator;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn roots_of(s: &[C64]) -> RootSet {
        let gen = LindbladGenerator::odd_only(s).unwrap();
        denominator_roots(&to_symbol_fraction(&gen).unwrap()).unwrap()
    }

    #[test]
    fn two_site_quadratic() {
        let g = 0.1f64;
        let rs = roots_of(&[c(1.0, 0.0), C64::from_polar(1.0, g)]);
        assert_eq!(rs.degree, 2);
        assert_eq!(rs.roots.len(), 2);
        let inside = (-1.0 + g.sin()) / g.cos();
        let outside = (-1.0 - g.sin()) / g.cos();
        assert!((rs.roots[0].z - c(inside, 0.0)).norm() < 1e-14);
        assert!((rs.roots[1].z - c(outside, 0.0)).norm() < 1e-14);
        assert_eq!(rs.roots[0].classification, RootLocation::Inside);
        assert!((rs.closest_inside_modulus().unwrap() - 0.904686).abs() < 1e-6);
    }

    #[test]
    fn three_site_quadruple_root() {
        let rs = roots_of(&[c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(rs.roots.len(), 1);
        assert_eq!(rs.roots[0].multiplicity, 4);
        assert_eq!(rs.roots[0].classification, RootLocation::OnCircle);
        assert!((rs.roots[0].z - c(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn two_site_critical_double_root() {
        let rs = roots_of(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert_eq!(rs.roots.len(), 1);
        assert_eq!(rs.roots[0].multiplicity, 2);
        assert!((rs.roots[0].z - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn constant_denominator_has_no_roots() {
        let rs = roots_of(&[c(1.0, 0.0), C64::from_polar(1.0, std::f64::consts::FRAC_PI_2)]);
        assert!(rs.is_empty());
        assert_eq!(rs.degree, 0);
    }

    #[test]
    fn near_critical_roots_stay_separate() {
        let g = 1e-4;
        let rs = roots_of(&[c(1.0, 0.0), C64::from_polar(2.0, g), c(1.0, 0.0)]);
        assert_eq!(rs.total_multiplicity(), 4);
        assert!(rs.on_circle().is_empty());
        assert_eq!(rs.roots.len(), 4);
    }

    #[test]
    fn taylor_coefficients_shift() {
        // (z - 2)^2 = 4 - 4z + z^2 around 2 is t^2
        let t = taylor_coefficients(&[c(4.0, 0.0), c(-4.0, 0.0), c(1.0, 0.0)], c(2.0, 0.0));
        assert!(t[0].norm() < 1e-15 && t[1].norm() < 1e-15);
        assert!((t[2] - c(1.0, 0.0)).norm() < 1e-15);
    }
}
