//! Reservoir-coupled chain models, finite damping matrices and their
//! momentum-space symbols.
//!
//! # Conventions
//!
//! Indices are zero-based. Site `j` owns the Majorana operators
//! `2j` (odd species, `c_j^† + c_j`) and `2j + 1` (even species,
//! `i(c_j - c_j^†)`); in one-based notation these are `w_{2j-1}` and `w_{2j}`.
//! A generator term `m` couples site `j + m`.
//!
//! | quantity | definition |
//! |---|---|
//! | `R` | `Σ_μ l_μ ⊗ l_μ^*`, i.e. `R_{jk} = Σ_μ l_{μ,j} conj(l_{μ,k})` |
//! | Hamiltonian | `H_S = Σ_{jk} H_{jk} w_j w_k`, `H = iA/2` with `A` real antisymmetric |
//! | stencil term `(o, a, b, c)` | adds `i c w_{(j,a)} w_{(j+o,b)}` to `H_S` for every `j` |
//! | `X` | `4iH - (R + R^*)` |
//! | `Y` | `2i(R - R^*)` |
//! | `x(φ)` | `Σ_d X_{(0,·),(d,·)} e^{-iφd}` |
//! | `y(φ)` | `Σ_d (-iY)_{(0,·),(d,·)} e^{-iφd}` |
//!
//! With these, `dΓ/dt = XᵀΓ + ΓX - Y` and the symbol equation reads
//! `x(-φ)ᵀ γ(φ) + γ(φ) x(φ) = y(φ)` for `γ` the symbol of `-iΓ`.
//! The sign of the Hamiltonian block is the one reproduced by the exact
//! Liouvillian in `experiments::oracle`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{NessError, Result};

/// Majorana species within a site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Odd,
    Even,
}

impl Species {
    pub fn offset(self) -> usize {
        match self {
            Species::Odd => 0,
            Species::Even => 1,
        }
    }
}

/// Zero-based Majorana index of `species` at `site`.
pub fn majorana_index(site: usize, species: Species) -> usize {
    2 * site + species.offset()
}

/// Complex coupling `nu · e^{i g}` with `nu ≥ 0` and `g ∈ (-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexAmplitude {
    pub nu: f64,
    pub g: f64,
}

fn canonical_phase(g: f64) -> f64 {
    let mut p = g.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

impl ComplexAmplitude {
    pub fn new(nu: f64, g: f64) -> Result<Self> {
        if !(nu.is_finite() && g.is_finite()) {
            return Err(NessError::InvalidModel(format!(
                "non-finite amplitude (nu = {nu}, g = {g})"
            )));
        }
        if nu < 0.0 {
            return Err(NessError::InvalidModel(format!(
                "amplitude magnitude must be nonnegative, got {nu}"
            )));
        }
        Ok(Self {
            nu,
            g: canonical_phase(g),
        })
    }

    pub fn zero() -> Self {
        Self { nu: 0.0, g: 0.0 }
    }

    pub fn from_complex(z: C64) -> Self {
        let nu = z.norm();
        if nu == 0.0 {
            return Self::zero();
        }
        Self {
            nu,
            g: canonical_phase(z.arg()),
        }
    }

    pub fn value(&self) -> C64 {
        C64::from_polar(self.nu, self.g)
    }

    pub fn is_zero(&self) -> bool {
        self.nu == 0.0
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.nu, self.g).map(|_| ())
    }
}

/// One local reservoir: `L_j = Σ_m odd[m] w_{(j+m, odd)} + even[m] w_{(j+m, even)}`,
/// translated over every site of the chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladGenerator {
    pub span: usize,
    pub odd: Vec<ComplexAmplitude>,
    pub even: Vec<ComplexAmplitude>,
}

impl LindbladGenerator {
    pub fn new(odd: Vec<ComplexAmplitude>, even: Vec<ComplexAmplitude>) -> Result<Self> {
        let gen = Self {
            span: odd.len(),
            odd,
            even,
        };
        gen.validate()?;
        Ok(gen)
    }

    /// Generator with complex Majorana coefficients.
    pub fn from_values(odd: &[C64], even: &[C64]) -> Result<Self> {
        Self::new(
            odd.iter().copied().map(ComplexAmplitude::from_complex).collect(),
            even.iter().copied().map(ComplexAmplitude::from_complex).collect(),
        )
    }

    /// Generator coupling only odd Majorana operators, `s_m = odd[m]`.
    pub fn odd_only(odd: &[C64]) -> Result<Self> {
        Self::from_values(odd, &vec![C64::new(0.0, 0.0); odd.len()])
    }

    /// Generator written in fermion operators,
    /// `L_j = Σ_m annihilation[m] c_{j+m} + creation[m] c_{j+m}^†`.
    ///
    /// Uses `c = (w_odd - i w_even)/2` and `c^† = (w_odd + i w_even)/2`.
    pub fn from_fermion_ops(annihilation: &[C64], creation: &[C64]) -> Result<Self> {
        if annihilation.len() != creation.len() {
            return Err(NessError::InvalidModel(
                "annihilation and creation coefficient lists differ in length".into(),
            ));
        }
        let i = C64::i();
        let odd: Vec<C64> = annihilation
            .iter()
            .zip(creation)
            .map(|(a, b)| (a + b) * 0.5)
            .collect();
        let even: Vec<C64> = annihilation
            .iter()
            .zip(creation)
            .map(|(a, b)| i * (b - a) * 0.5)
            .collect();
        Self::from_values(&odd, &even)
    }

    pub fn validate(&self) -> Result<()> {
        if self.span == 0 {
            return Err(NessError::InvalidModel(
                "generator span must be a positive integer".into(),
            ));
        }
        if self.odd.len() != self.span || self.even.len() != self.span {
            return Err(NessError::InvalidModel(format!(
                "generator span {} does not match coefficient counts (odd {}, even {})",
                self.span,
                self.odd.len(),
                self.even.len()
            )));
        }
        for a in self.odd.iter().chain(&self.even) {
            a.validate()?;
        }
        if self.odd.iter().chain(&self.even).all(ComplexAmplitude::is_zero) {
            return Err(NessError::InvalidModel(
                "generator has no nonzero coefficient".into(),
            ));
        }
        Ok(())
    }

    pub fn odd_values(&self) -> Vec<C64> {
        self.odd.iter().map(ComplexAmplitude::value).collect()
    }

    pub fn even_values(&self) -> Vec<C64> {
        self.even.iter().map(ComplexAmplitude::value).collect()
    }

    pub fn is_odd_only(&self) -> bool {
        self.even.iter().all(ComplexAmplitude::is_zero)
    }

    /// `s₀ = 1` exactly.
    pub fn is_normalized(&self) -> bool {
        self.odd[0].nu == 1.0 && self.odd[0].g == 0.0
    }

    /// Rescales so that `s₀ = 1`; returns the new generator and the removed
    /// factor `s₀` (which only sets the overall time scale).
    pub fn normalized(&self) -> Result<(Self, C64)> {
        let s0 = self.odd[0].value();
        if self.odd[0].is_zero() {
            return Err(NessError::UnsupportedGenerator(
                "cannot normalize a generator with s0 = 0".into(),
            ));
        }
        let scale = |v: &[ComplexAmplitude]| -> Vec<ComplexAmplitude> {
            v.iter()
                .map(|a| ComplexAmplitude::from_complex(a.value() / s0))
                .collect()
        };
        let mut odd = scale(&self.odd);
        odd[0] = ComplexAmplitude { nu: 1.0, g: 0.0 };
        let gen = Self {
            span: self.span,
            odd,
            even: scale(&self.even),
        };
        Ok((gen, s0))
    }
}

/// One translation-invariant Hamiltonian term, see the module table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StencilTerm {
    pub offset: usize,
    pub a: Species,
    pub b: Species,
    pub coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianStencil {
    pub terms: Vec<StencilTerm>,
}

impl HamiltonianStencil {
    /// Largest site offset of any term.
    pub fn range(&self) -> usize {
        self.terms.iter().map(|t| t.offset).max().unwrap_or(0)
    }

    /// `Σ_j μ c_j^† c_j` (up to a constant).
    pub fn chemical_potential(mu: f64) -> Self {
        // c†c = (1 - i w_odd w_even)/2
        Self {
            terms: vec![StencilTerm {
                offset: 0,
                a: Species::Odd,
                b: Species::Even,
                coeff: -mu / 2.0,
            }],
        }
    }

    /// `Σ_j t (c_j^† c_{j+1} + h.c.)`.
    pub fn hopping(t: f64) -> Self {
        // c_j†c_{j+1} + h.c. = (i/2)(w_{j,e} w_{j+1,o} - w_{j,o} w_{j+1,e})
        Self {
            terms: vec![
                StencilTerm {
                    offset: 1,
                    a: Species::Odd,
                    b: Species::Even,
                    coeff: -t / 2.0,
                },
                StencilTerm {
                    offset: 1,
                    a: Species::Even,
                    b: Species::Odd,
                    coeff: t / 2.0,
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.terms {
            if !t.coeff.is_finite() {
                return Err(NessError::InvalidModel(
                    "non-finite Hamiltonian coefficient".into(),
                ));
            }
            if t.offset == 0 && t.a == t.b {
                return Err(NessError::InvalidModel(
                    "Hamiltonian term couples a Majorana operator to itself".into(),
                ));
            }
        }
        Ok(())
    }

    /// Entries `(d, α, β, h)` of the `H` stencil: `H_{(j,α),(j+d,β)} += h`.
    fn entries(&self) -> Vec<(i64, usize, usize, C64)> {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            let h = C64::new(0.0, t.coeff / 2.0);
            out.push((t.offset as i64, t.a.offset(), t.b.offset(), h));
            out.push((-(t.offset as i64), t.b.offset(), t.a.offset(), -h));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Chain {
    Infinite,
    Finite {
        #[serde(rename = "L")]
        sites: usize,
        periodic: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeModel {
    pub generators: Vec<LindbladGenerator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianStencil>,
    pub chain: Chain,
}

impl LatticeModel {
    pub fn new(
        generators: Vec<LindbladGenerator>,
        hamiltonian: Option<HamiltonianStencil>,
        chain: Chain,
    ) -> Result<Self> {
        let model = Self {
            generators,
            hamiltonian,
            chain,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        for g in &self.generators {
            g.validate()?;
        }
        if let Some(h) = &self.hamiltonian {
            h.validate()?;
        }
        if let Chain::Finite { sites, periodic } = self.chain {
            if sites == 0 {
                return Err(NessError::InvalidModel("chain has no sites".into()));
            }
            for g in &self.generators {
                if g.span > sites {
                    return Err(NessError::ModelTooSmall {
                        span: g.span,
                        sites,
                    });
                }
            }
            if let Some(h) = &self.hamiltonian {
                let r = h.range();
                if periodic && r >= sites && !h.terms.is_empty() {
                    return Err(NessError::ModelTooSmall {
                        span: r + 1,
                        sites,
                    });
                }
            }
        }
        Ok(())
    }

    /// Parses and validates a model document.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut model: Self = serde_json::from_str(text)?;
        model.validate()?;
        for g in &mut model.generators {
            for a in g.odd.iter_mut().chain(g.even.iter_mut()) {
                *a = ComplexAmplitude::new(a.nu, a.g)?;
            }
        }
        Ok(model)
    }

    /// Canonical serialization (phases already canonical after validation).
    pub fn to_canonical_json(&self) -> Result<String> {
        let mut canon = self.clone();
        for g in &mut canon.generators {
            for a in g.odd.iter_mut().chain(g.even.iter_mut()) {
                *a = if a.is_zero() {
                    ComplexAmplitude::zero()
                } else {
                    ComplexAmplitude::new(a.nu, a.g)?
                };
            }
        }
        Ok(serde_json::to_string_pretty(&canon)?)
    }

    pub fn with_chain(&self, chain: Chain) -> Result<Self> {
        Self::new(self.generators.clone(), self.hamiltonian.clone(), chain)
    }

    pub fn sites(&self) -> Option<usize> {
        match self.chain {
            Chain::Finite { sites, .. } => Some(sites),
            Chain::Infinite => None,
        }
    }

    pub fn is_odd_only(&self) -> bool {
        self.generators.iter().all(LindbladGenerator::is_odd_only)
    }

    /// Species with no dissipative and no Hamiltonian coupling at all.
    pub fn decoupled_species(&self) -> Vec<Species> {
        [Species::Odd, Species::Even]
            .into_iter()
            .filter(|&s| {
                let coeffs_zero = self.generators.iter().all(|g| {
                    let v = match s {
                        Species::Odd => &g.odd,
                        Species::Even => &g.even,
                    };
                    v.iter().all(ComplexAmplitude::is_zero)
                });
                let ham_zero = self.hamiltonian.as_ref().map_or(true, |h| {
                    h.terms
                        .iter()
                        .all(|t| t.coeff == 0.0 || (t.a != s && t.b != s))
                });
                coeffs_zero && ham_zero
            })
            .collect()
    }
}

fn finite_dims(model: &LatticeModel) -> Result<(usize, bool)> {
    match model.chain {
        Chain::Finite { sites, periodic } => Ok((sites, periodic)),
        Chain::Infinite => Err(NessError::WrongChain { expected: "finite" }),
    }
}

/// Coefficient vectors `l_μ` (length `2L`), one per generator family and
/// translation. Non-periodic chains drop translations that would leave the
/// chain.
pub fn build_generator_vectors(model: &LatticeModel) -> Result<Vec<DVector<C64>>> {
    let (sites, periodic) = finite_dims(model)?;
    let mut out = Vec::new();
    for gen in &model.generators {
        if gen.span > sites {
            return Err(NessError::ModelTooSmall {
                span: gen.span,
                sites,
            });
        }
        let odd = gen.odd_values();
        let even = gen.even_values();
        for j in 0..sites {
            if !periodic && j + gen.span > sites {
                continue;
            }
            let mut l = DVector::from_element(2 * sites, C64::new(0.0, 0.0));
            for m in 0..gen.span {
                let site = (j + m) % sites;
                l[majorana_index(site, Species::Odd)] += odd[m];
                l[majorana_index(site, Species::Even)] += even[m];
            }
            out.push(l);
        }
    }
    Ok(out)
}

/// Finite-chain matrices of the correlation dynamics `dΓ/dt = XᵀΓ + ΓX - Y`.
#[derive(Debug, Clone)]
pub struct DampingMatrices {
    pub x: DMatrix<C64>,
    pub y: DMatrix<C64>,
    pub r: DMatrix<C64>,
    pub h: DMatrix<C64>,
}

impl DampingMatrices {
    pub fn dim(&self) -> usize {
        self.x.nrows()
    }

    pub fn sites(&self) -> usize {
        self.x.nrows() / 2
    }

    /// Real parts of `X` and `Y`; both are real for every valid model.
    pub fn real_parts(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let scale = 1.0
            + self
                .x
                .iter()
                .chain(self.y.iter())
                .map(|z| z.norm())
                .fold(0.0, f64::max);
        let imag = self
            .x
            .iter()
            .chain(self.y.iter())
            .map(|z| z.im.abs())
            .fold(0.0, f64::max);
        if imag > 1e-12 * scale {
            return Err(NessError::Linalg(format!(
                "damping matrices have imaginary part {imag:.3e}"
            )));
        }
        Ok((self.x.map(|z| z.re), self.y.map(|z| z.re)))
    }

    /// `R + R^*`, the (real symmetric) dissipative part of `-X`.
    pub fn dissipative_part(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| 2.0 * self.r[(i, j)].re)
    }
}

pub fn build_damping_matrices(model: &LatticeModel) -> Result<DampingMatrices> {
    let (sites, periodic) = finite_dims(model)?;
    let n = 2 * sites;
    let zero = C64::new(0.0, 0.0);
    let mut r = DMatrix::from_element(n, n, zero);
    for l in build_generator_vectors(model)? {
        r += &l * l.adjoint();
    }
    let mut h = DMatrix::from_element(n, n, zero);
    if let Some(stencil) = &model.hamiltonian {
        for (d, a, b, val) in stencil.entries() {
            for j in 0..sites {
                let k = j as i64 + d;
                let k = if periodic {
                    k.rem_euclid(sites as i64) as usize
                } else if k < 0 || k >= sites as i64 {
                    continue;
                } else {
                    k as usize
                };
                h[(2 * j + a, 2 * k + b)] += val;
            }
        }
    }
    let r_conj = r.map(|z| z.conj());
    let i = C64::i();
    let x = h.map(|z| i * 4.0 * z) - (&r + &r_conj);
    let y = (&r - &r_conj).map(|z| i * 2.0 * z);
    Ok(DampingMatrices { x, y, r, h })
}

/// `U^α(φ) = Σ_m u^α_m e^{iφm}` for both species.
fn generator_transforms(gen: &LindbladGenerator, phi: f64) -> [C64; 2] {
    let mut u = [C64::new(0.0, 0.0); 2];
    for m in 0..gen.span {
        let e = C64::from_polar(1.0, phi * m as f64);
        u[0] += gen.odd[m].value() * e;
        u[1] += gen.even[m].value() * e;
    }
    u
}

/// Symbol of the reservoir matrix `R`: `r̂_{αβ}(φ) = Σ_μ U^α(φ) conj(U^β(φ))`.
pub(crate) fn reservoir_matrix_symbol(model: &LatticeModel, phi: f64) -> Matrix2<C64> {
    let mut r = Matrix2::zeros();
    for gen in &model.generators {
        let u = generator_transforms(gen, phi);
        for a in 0..2 {
            for b in 0..2 {
                r[(a, b)] += u[a] * u[b].conj();
            }
        }
    }
    r
}

fn hamiltonian_symbol(model: &LatticeModel, phi: f64) -> Matrix2<C64> {
    let mut h = Matrix2::zeros();
    if let Some(stencil) = &model.hamiltonian {
        for (d, a, b, val) in stencil.entries() {
            h[(a, b)] += val * C64::from_polar(1.0, -phi * d as f64);
        }
    }
    h
}

/// Symbol of `R + R^*` at `φ`; Hermitian and positive semidefinite.
pub fn dissipative_symbol(model: &LatticeModel, phi: f64) -> Matrix2<C64> {
    let r = reservoir_matrix_symbol(model, phi);
    let r_m = reservoir_matrix_symbol(model, -phi);
    r + r_m.map(|z| z.conj())
}

/// Momentum-space symbols `(x(φ), y(φ))` in the `(odd, even)` basis.
pub fn build_symbol_matrices(model: &LatticeModel, phi: f64) -> Result<(Matrix2<C64>, Matrix2<C64>)> {
    if model.chain != Chain::Infinite {
        return Err(NessError::WrongChain {
            expected: "infinite",
        });
    }
    Ok(symbols_unchecked(model, phi))
}

pub(crate) fn symbols_unchecked(model: &LatticeModel, phi: f64) -> (Matrix2<C64>, Matrix2<C64>) {
    let r = reservoir_matrix_symbol(model, phi);
    let r_star = reservoir_matrix_symbol(model, -phi).map(|z| z.conj());
    let h = hamiltonian_symbol(model, phi);
    let i = C64::i();
    let x = h.map(|z| i * 4.0 * z) - (r + r_star);
    let y = (r - r_star) * C64::new(2.0, 0.0);
    (x, y)
}

/// `r(φ) = |Σ_m s_m e^{-iφm}|²` for a generator built from odd operators.
pub fn reservoir_symbol(gen: &LindbladGenerator, phi: f64) -> Result<f64> {
    if !gen.is_odd_only() {
        return Err(NessError::UnsupportedGenerator(
            "reservoir_symbol needs an odd-only generator; use build_symbol_matrices".into(),
        ));
    }
    let s: C64 = gen
        .odd
        .iter()
        .enumerate()
        .map(|(m, a)| a.value() * C64::from_polar(1.0, -phi * m as f64))
        .sum();
    Ok(s.norm_sqr())
}
