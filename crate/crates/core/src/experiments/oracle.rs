//! Exact steady state of a tiny chain from the full Liouvillian.
//!
//! Fock basis convention:
//!
//! | item              | choice                                                   |
//! |-------------------|----------------------------------------------------------|
//! | basis index       | bit `j` of the index is the occupation `n_j` of site `j` |
//! | `c_j`             | `(-1)^{n_0 + … + n_{j-1}} |n - e_j⟩` if `n_j = 1`        |
//! | Majoranas         | `w_{2j} = c_j^† + c_j`, `w_{2j+1} = i(c_j - c_j^†)`       |
//! | Hamiltonian       | `H = Σ_{jk} H_{jk} w_j w_k`                              |
//! | Lindblad operator | `L_μ = Σ_k (l_μ)_k w_k`                                  |
//! | vectorisation     | column stacking, `vec(AρB) = (Bᵀ ⊗ A) vec ρ`             |

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{NessError, Result};
use crate::lattice::{build_damping_matrices, build_generator_vectors, LatticeModel};
use crate::ness::CorrelationMatrix;

/// Largest chain the oracle accepts.
pub const ORACLE_MAX_SITES: usize = 4;
/// Relative singular-value level below which a Liouvillian direction counts
/// as part of the kernel.
pub const KERNEL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub sites: usize,
    pub rho: DMatrix<C64>,
    /// `⟨w_j w_k⟩`.
    pub two_point: DMatrix<C64>,
    pub gamma: CorrelationMatrix,
    /// Two smallest singular values of the Liouvillian relative to the largest.
    pub kernel_singular_values: (f64, f64),
    majoranas: Vec<DMatrix<C64>>,
}

impl OracleResult {
    /// `Tr(ρ w_a w_b w_c w_d)`.
    pub fn four_point(&self, idx: (usize, usize, usize, usize)) -> Result<C64> {
        let n = self.majoranas.len();
        let (a, b, c, d) = idx;
        if [a, b, c, d].iter().any(|&i| i >= n) {
            return Err(NessError::InvalidArgument(format!(
                "Majorana index out of range for {n} operators"
            )));
        }
        let w = &self.majoranas;
        let prod = &w[a] * &w[b] * &w[c] * &w[d];
        Ok((&self.rho * prod).trace())
    }

    pub fn report(&self) -> OracleReport {
        let n = self.gamma.gamma().nrows();
        OracleReport {
            sites: self.sites,
            gamma: (0..n)
                .map(|i| (0..n).map(|j| self.gamma.gamma()[(i, j)]).collect())
                .collect(),
            trace: self.rho.trace().re,
            kernel_singular_values: [self.kernel_singular_values.0, self.kernel_singular_values.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OracleReport {
    pub sites: usize,
    pub gamma: Vec<Vec<f64>>,
    pub trace: f64,
    pub kernel_singular_values: [f64; 2],
}

/// `c_j` in the Fock basis.
fn annihilator(sites: usize, j: usize) -> DMatrix<C64> {
    let dim = 1usize << sites;
    let mut c = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        if n >> j & 1 == 1 {
            let parity = (n & ((1 << j) - 1)).count_ones();
            let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
            c[(n ^ (1 << j), n)] = C64::new(sign, 0.0);
        }
    }
    c
}

pub fn majorana_operators(sites: usize) -> Vec<DMatrix<C64>> {
    let i = C64::i();
    (0..sites)
        .flat_map(|j| {
            let c = annihilator(sites, j);
            let cd = c.adjoint();
            [&cd + &c, (&c - &cd) * i]
        })
        .collect()
}

pub fn liouvillian(model: &LatticeModel, w: &[DMatrix<C64>]) -> Result<DMatrix<C64>> {
    let dim = w[0].nrows();
    let eye = DMatrix::<C64>::identity(dim, dim);
    let dm = build_damping_matrices(model)?;
    let mut h = DMatrix::zeros(dim, dim);
    for j in 0..w.len() {
        for k in 0..w.len() {
            let hjk = dm.h[(j, k)];
            if hjk != C64::new(0.0, 0.0) {
                h += &w[j] * &w[k] * hjk;
            }
        }
    }
    let i = C64::i();
    let mut liou = (eye.kronecker(&h) - h.transpose().kronecker(&eye)) * (-i);
    for l in build_generator_vectors(model)? {
        let op = w
            .iter()
            .zip(l.iter())
            .fold(DMatrix::zeros(dim, dim), |acc: DMatrix<C64>, (wk, lk)| acc + wk * *lk);
        let ldl = op.adjoint() * &op;
        liou += op.map(|z| z.conj()).kronecker(&op);
        liou -= eye.kronecker(&ldl) * C64::new(0.5, 0.0);
        liou -= ldl.transpose().kronecker(&eye) * C64::new(0.5, 0.0);
    }
    Ok(liou)
}

/// Unique steady state of a finite chain with at most four sites.
pub fn exact_liouvillian_oracle(model: &LatticeModel) -> Result<OracleResult> {
    let sites = model
        .sites()
        .ok_or(NessError::WrongChain { expected: "finite" })?;
    if sites > ORACLE_MAX_SITES {
        return Err(NessError::InvalidArgument(format!(
            "oracle supports at most {ORACLE_MAX_SITES} sites, got {sites}"
        )));
    }
    let w = majorana_operators(sites);
    let liou = liouvillian(model, &w)?;
    let dim = 1usize << sites;

    let svd = liou.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| NessError::Linalg("SVD did not return V".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let smax = svd.singular_values.max().max(1e-300);
    let s0 = svd.singular_values[order[0]] / smax;
    let s1 = svd.singular_values[order[1]] / smax;
    if s1 < KERNEL_TOL {
        let dim = order
            .iter()
            .filter(|&&k| svd.singular_values[k] < KERNEL_TOL * smax)
            .count();
        return Err(NessError::DegenerateKernel { dim });
    }
    let v: DVector<C64> = v_t.row(order[0]).adjoint();
    let mut rho = DMatrix::from_column_slice(dim, dim, v.as_slice());
    let tr = rho.trace();
    rho /= tr;
    rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);

    let n = w.len();
    let two_point = DMatrix::from_fn(n, n, |j, k| (&rho * &w[j] * &w[k]).trace());
    // Γ_jk = (i/2)⟨[w_j, w_k]⟩
    let gamma = DMatrix::from_fn(n, n, |j, k| {
        (C64::i() * 0.5 * (two_point[(j, k)] - two_point[(k, j)])).re
    });
    Ok(OracleResult {
        sites,
        rho,
        two_point,
        gamma: CorrelationMatrix::new(gamma)?,
        kernel_singular_values: (s0, s1),
        majoranas: w,
    })
}
