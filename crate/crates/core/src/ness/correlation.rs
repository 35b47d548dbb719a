//! Gaussian-state correlation data and the convention table linking it to
//! operator expectation values.
//!
//! | expectation | in terms of `Γ` |
//! |---|---|
//! | `Γ_{jk}` | `(i/2)⟨[w_j, w_k]⟩`, real antisymmetric |
//! | `⟨w_j w_k⟩` | `δ_{jk} - iΓ_{jk}` |
//! | `⟨c_j^† c_j⟩` | `(1 - Γ_{(j,odd),(j,even)})/2` |
//! | vacuum block | `[[0, 1], [-1, 0]]` |
//! | filled block | `[[0, -1], [1, 0]]` |
//!
//! The correlation symbol `γ(φ)` is the symbol of `-iΓ`, so that
//! `⟨w_{(0,α)} w_{(d,β)}⟩ = δ_{d0}δ_{αβ} + (1/2π)∫ e^{iφd} γ_{αβ}(φ) dφ`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{NessError, Result};
use crate::lattice::{majorana_index, Species};

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    sites: usize,
    gamma: DMatrix<f64>,
    degenerate: bool,
}

impl CorrelationMatrix {
    /// Wraps `gamma`, projecting it onto the antisymmetric matrices.
    pub fn new(gamma: DMatrix<f64>) -> Result<Self> {
        let n = gamma.nrows();
        if n != gamma.ncols() || n % 2 != 0 {
            return Err(NessError::InvalidArgument(format!(
                "correlation matrix must be 2L x 2L, got {} x {}",
                n,
                gamma.ncols()
            )));
        }
        let skew = (&gamma - gamma.transpose()) * 0.5;
        Ok(Self {
            sites: n / 2,
            gamma: skew,
            degenerate: false,
        })
    }

    pub(crate) fn with_degenerate(mut self, degenerate: bool) -> Self {
        self.degenerate = degenerate;
        self
    }

    fn from_site_block(sites: usize, block: f64) -> Self {
        let mut g = DMatrix::zeros(2 * sites, 2 * sites);
        for j in 0..sites {
            g[(2 * j, 2 * j + 1)] = block;
            g[(2 * j + 1, 2 * j)] = -block;
        }
        Self {
            sites,
            gamma: g,
            degenerate: false,
        }
    }

    pub fn vacuum(sites: usize) -> Self {
        Self::from_site_block(sites, 1.0)
    }

    pub fn filled(sites: usize) -> Self {
        Self::from_site_block(sites, -1.0)
    }

    pub fn completely_mixed(sites: usize) -> Self {
        Self::from_site_block(sites, 0.0)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn into_gamma(self) -> DMatrix<f64> {
        self.gamma
    }

    /// True when the steady state is not unique and a decoupled sector was
    /// filled by convention.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// `⟨w_j w_k⟩`.
    pub fn two_point(&self, j: usize, k: usize) -> C64 {
        if j == k {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, -self.gamma[(j, k)])
        }
    }

    /// Full matrix of `⟨w_j w_k⟩`.
    pub fn two_point_matrix(&self) -> DMatrix<C64> {
        let n = 2 * self.sites;
        DMatrix::from_fn(n, n, |j, k| self.two_point(j, k))
    }

    /// `⟨c_j^† c_j⟩`.
    pub fn site_occupation(&self, site: usize) -> f64 {
        let o = majorana_index(site, Species::Odd);
        let e = majorana_index(site, Species::Even);
        0.5 * (1.0 - self.gamma[(o, e)])
    }

    /// Eigenvalues of the Hermitian matrix `iΓ`, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        let herm = self.gamma.map(|v| C64::new(0.0, v));
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `max |λ(iΓ)|`; at most one for a physical state.
    pub fn spectral_radius(&self) -> f64 {
        self.spectrum().iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.gamma - &other.gamma).amax()
    }
}

/// Mean density per site.
pub fn occupation(gamma: &CorrelationMatrix) -> f64 {
    (0..gamma.sites())
        .map(|j| gamma.site_occupation(j))
        .sum::<f64>()
        / gamma.sites() as f64
}

/// `⟨w_a w_b w_c w_d⟩` by Wick's theorem.
///
/// Repeated indices are first removed with `w² = 1` and anticommutation,
/// then the remaining distinct product is contracted as the Pfaffian of its
/// two-point matrix.
pub fn wick_four_point(gamma: &CorrelationMatrix, indices: (usize, usize, usize, usize)) -> Result<C64> {
    let n = 2 * gamma.sites();
    let idx = [indices.0, indices.1, indices.2, indices.3];
    if let Some(bad) = idx.iter().find(|&&i| i >= n) {
        return Err(NessError::InvalidArgument(format!(
            "Majorana index {bad} out of range for {n} operators"
        )));
    }
    let (sign, reduced) = reduce_product(&idx);
    let c = |a: usize, b: usize| gamma.two_point(a, b);
    let value = match reduced.as_slice() {
        [] => C64::new(1.0, 0.0),
        [a, b] => c(*a, *b),
        [a, b, cc, d] => c(*a, *b) * c(*cc, *d) - c(*a, *cc) * c(*b, *d) + c(*a, *d) * c(*b, *cc),
        _ => C64::new(0.0, 0.0),
    };
    Ok(value * sign)
}

/// Normal-orders a Majorana monomial: returns the sign and the sorted list of
/// indices occurring an odd number of times.
fn reduce_product(idx: &[usize]) -> (f64, Vec<usize>) {
    let mut ops = idx.to_vec();
    let mut sign = 1.0;
    // bubble sort; each swap of distinct operators flips the sign
    for i in 0..ops.len() {
        for j in 0..ops.len() - 1 - i {
            if ops[j] > ops[j + 1] {
                ops.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    let mut out: Vec<usize> = Vec::with_capacity(ops.len());
    for op in ops {
        if out.last() == Some(&op) {
            out.pop();
        } else {
            out.push(op);
        }
    }
    (sign, out)
}

/// Correlations `⟨w_{(0,α)} w_{(d,β)}⟩` as a function of distance `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationProfile {
    pub entry: (usize, usize),
    pub distances: Vec<i64>,
    pub values: Vec<C64>,
    /// Achieved absolute accuracy, when the method produces an estimate.
    pub achieved_tolerance: Option<f64>,
}

impl CorrelationProfile {
    pub fn value_at(&self, d: i64) -> Option<C64> {
        self.distances
            .iter()
            .position(|&x| x == d)
            .map(|i| self.values[i])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.distances
            .iter()
            .zip(&self.values)
            .filter_map(|(d, v)| other.value_at(*d).map(|w| (v - w).norm()))
            .fold(0.0, f64::max)
    }

    /// Bulk correlations of a finite periodic chain, read off around `site`.
    pub fn from_finite(
        gamma: &CorrelationMatrix,
        site: usize,
        entry: (usize, usize),
        dmax: usize,
    ) -> Self {
        let l = gamma.sites();
        let distances: Vec<i64> = (0..=dmax as i64).collect();
        let values = distances
            .iter()
            .map(|&d| {
                let a = 2 * site + entry.0;
                let b = 2 * ((site + d as usize) % l) + entry.1;
                gamma.two_point(a, b)
            })
            .collect();
        Self {
            entry,
            distances,
            values,
            achieved_tolerance: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_and_filled_occupation() {
        assert_eq!(occupation(&CorrelationMatrix::vacuum(4)), 0.0);
        assert_eq!(occupation(&CorrelationMatrix::filled(4)), 1.0);
        assert_eq!(occupation(&CorrelationMatrix::completely_mixed(2)), 0.5);
    }

    #[test]
    fn mixed_state_four_point_vanishes() {
        let g = CorrelationMatrix::completely_mixed(3);
        assert_eq!(wick_four_point(&g, (0, 2, 3, 5)).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn vacuum_disconnected_pairs() {
        // ⟨w1 w2⟩ = -i in the vacuum, so ⟨w1 w2 w3 w4⟩ = (-i)(-i) = -1
        let g = CorrelationMatrix::vacuum(2);
        assert_eq!(g.two_point(0, 1), C64::new(0.0, -1.0));
        let v = wick_four_point(&g, (0, 1, 2, 3)).unwrap();
        assert!((v - C64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn repeated_indices_reduce() {
        let g = CorrelationMatrix::vacuum(2);
        // w1 w1 w3 w4 = w3 w4
        let v = wick_four_point(&g, (0, 0, 2, 3)).unwrap();
        assert_eq!(v, g.two_point(2, 3));
        // w1 w3 w1 w4 = -w3 w4
        let v = wick_four_point(&g, (0, 2, 0, 3)).unwrap();
        assert_eq!(v, -g.two_point(2, 3));
        // w2 w2 w2 w2 = 1
        assert_eq!(wick_four_point(&g, (1, 1, 1, 1)).unwrap(), C64::new(1.0, 0.0));
    }

    #[test]
    fn pure_states_have_unit_spectrum() {
        let v = CorrelationMatrix::vacuum(3);
        for e in v.spectrum() {
            assert!((e.abs() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn projection_makes_antisymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[0.3, 0.4, -0.2, 0.1]);
        let g = CorrelationMatrix::new(m).unwrap();
        assert_eq!(g.gamma()[(0, 0)], 0.0);
        assert!((g.gamma()[(0, 1)] + g.gamma()[(1, 0)]).abs() < 1e-16);
    }
}
