//! Parameter sweeps over independent steady-state solves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criticality::{
    damping_gap, damping_gap_symbol, denominator_roots, to_model_symbol_fraction, RootSet,
    SymbolFraction,
};
use crate::error::{NessError, Result};
use crate::experiments::quantum_optical::{quantum_optical_model, quantum_optical_reference};
use crate::lattice::{Chain, ComplexAmplitude, LatticeModel};

/// Smallest grid usable for an exponent fit.
pub const MIN_SWEEP_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepField {
    Nu,
    G,
}

impl SweepField {
    pub fn name(self) -> &'static str {
        match self {
            SweepField::Nu => "nu",
            SweepField::G => "g",
        }
    }
}

/// Which Majorana species of a coefficient the sweep writes to. `Both`
/// keeps the ratio between the odd and even amplitudes fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeciesSelector {
    #[default]
    Odd,
    Even,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepTarget {
    Model {
        model: LatticeModel,
        generator: usize,
        coefficient: usize,
        #[serde(default)]
        species: SpeciesSelector,
        field: SweepField,
    },
    QuantumOptical {
        chi: f64,
        nu: f64,
        g: f64,
        field: SweepField,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    Linear,
    /// `start` and `stop` are offsets from the critical value with a common
    /// sign; points are log-spaced in the offset.
    LogTowardCritical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub kind: GridKind,
}

impl Grid {
    pub fn linear(start: f64, stop: f64, count: usize) -> Self {
        Self {
            start,
            stop,
            count,
            kind: GridKind::Linear,
        }
    }

    pub fn log_toward_critical(start: f64, stop: f64, count: usize) -> Self {
        Self {
            start,
            stop,
            count,
            kind: GridKind::LogTowardCritical,
        }
    }

    pub fn values(&self, critical: Option<f64>) -> Result<Vec<f64>> {
        if self.count < 2 || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(NessError::InvalidArgument(
                "grid needs finite end points and at least 2 points".into(),
            ));
        }
        let t = |k: usize| k as f64 / (self.count - 1) as f64;
        let vals: Vec<f64> = match self.kind {
            GridKind::Linear => (0..self.count)
                .map(|k| self.start + (self.stop - self.start) * t(k))
                .collect(),
            GridKind::LogTowardCritical => {
                let pc = critical.ok_or_else(|| {
                    NessError::InvalidArgument("log grid needs a critical value".into())
                })?;
                if self.start * self.stop <= 0.0 {
                    return Err(NessError::InvalidArgument(
                        "log grid offsets must be nonzero with a common sign".into(),
                    ));
                }
                let sign = self.start.signum();
                let (a, b) = (self.start.abs().ln(), self.stop.abs().ln());
                (0..self.count)
                    .map(|k| pc + sign * (a + (b - a) * t(k)).exp())
                    .collect()
            }
        };
        let up = vals.windows(2).all(|w| w[1] > w[0]);
        let down = vals.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(NessError::InvalidArgument("grid is not strictly monotone".into()));
        }
        Ok(vals)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub target: SweepTarget,
    pub grid: Grid,
    #[serde(default)]
    pub critical_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param: f64,
    pub xi_inv: Option<f64>,
    pub gap: Option<f64>,
    /// Modulus of the inside denominator root closest to the circle.
    pub root_mod: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub field: SweepField,
    pub critical_value: Option<f64>,
    pub points: Vec<SweepPoint>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<Vec<f64>> {
        if self.grid.count < MIN_SWEEP_POINTS {
            return Err(NessError::InvalidArgument(format!(
                "sweep needs at least {MIN_SWEEP_POINTS} points, got {}",
                self.grid.count
            )));
        }
        if let SweepTarget::Model {
            model,
            generator,
            coefficient,
            ..
        } = &self.target
        {
            model.validate()?;
            let gen = model.generators.get(*generator).ok_or_else(|| {
                NessError::InvalidArgument(format!("no generator with index {generator}"))
            })?;
            if *coefficient >= gen.span {
                return Err(NessError::InvalidArgument(format!(
                    "coefficient {coefficient} outside span {}",
                    gen.span
                )));
            }
        }
        self.grid.values(self.critical_value)
    }

    fn field(&self) -> SweepField {
        match &self.target {
            SweepTarget::Model { field, .. } | SweepTarget::QuantumOptical { field, .. } => *field,
        }
    }
}

fn set_field(a: &mut ComplexAmplitude, field: SweepField, value: f64) -> Result<()> {
    *a = match field {
        SweepField::Nu => ComplexAmplitude::new(value, a.g)?,
        SweepField::G => ComplexAmplitude::new(a.nu, value)?,
    };
    Ok(())
}

/// Template model with the swept parameter set to `value`.
pub fn model_at(target: &SweepTarget, value: f64) -> Result<LatticeModel> {
    match target {
        SweepTarget::Model {
            model,
            generator,
            coefficient,
            species,
            field,
        } => {
            let mut m = model.clone();
            let gen = m.generators.get_mut(*generator).ok_or_else(|| {
                NessError::InvalidArgument(format!("no generator with index {generator}"))
            })?;
            let k = *coefficient;
            match species {
                SpeciesSelector::Odd => set_field(&mut gen.odd[k], *field, value)?,
                SpeciesSelector::Even => set_field(&mut gen.even[k], *field, value)?,
                SpeciesSelector::Both => {
                    let (o, e) = (gen.odd[k].value(), gen.even[k].value());
                    let lead = if o.norm() > 0.0 { o } else { e };
                    let mut a = ComplexAmplitude::from_complex(lead);
                    set_field(&mut a, *field, value)?;
                    let scale = if lead.norm() > 0.0 {
                        a.value() / lead
                    } else {
                        a.value()
                    };
                    gen.odd[k] = ComplexAmplitude::from_complex(o * scale);
                    gen.even[k] = ComplexAmplitude::from_complex(e * scale);
                }
            }
            m.validate()?;
            Ok(m)
        }
        SweepTarget::QuantumOptical { chi, nu, g, field } => {
            let (nu, g) = match field {
                SweepField::Nu => (value, *g),
                SweepField::G => (*nu, value),
            };
            quantum_optical_model(*chi, nu, g, Chain::Infinite)
        }
    }
}

/// Symbol fraction and denominator roots at one grid value.
fn analyse(target: &SweepTarget, model: &LatticeModel, value: f64) -> Result<(SymbolFraction, RootSet)> {
    match target {
        SweepTarget::QuantumOptical { chi, nu, g, field } => {
            let (nu, g) = match field {
                SweepField::Nu => (value, *g),
                SweepField::G => (*nu, value),
            };
            let r = quantum_optical_reference(*chi, nu, g)?;
            Ok((r.fraction_owned(), r.denominator_roots()?))
        }
        SweepTarget::Model { .. } => {
            let frac = to_model_symbol_fraction(&model.with_chain(Chain::Infinite)?)?;
            let roots = denominator_roots(&frac)?;
            Ok((frac, roots))
        }
    }
}

fn xi_and_mod(roots: &RootSet) -> (f64, Option<f64>) {
    if !roots.on_circle().is_empty() {
        return (0.0, Some(1.0));
    }
    match roots.closest_inside_modulus() {
        Some(r) if r > 0.0 => (-r.ln(), Some(r)),
        _ => (f64::INFINITY, None),
    }
}

/// One sweep point. Never fails; problems land in `error`.
pub fn sweep_point(target: &SweepTarget, value: f64) -> SweepPoint {
    let mut point = SweepPoint {
        param: value,
        xi_inv: None,
        gap: None,
        root_mod: None,
        error: None,
    };
    let model = match model_at(target, value) {
        Ok(m) => m,
        Err(e) => {
            point.error = Some(e.to_string());
            return point;
        }
    };
    match analyse(target, &model, value) {
        Ok((frac, roots)) => {
            if matches!(target, SweepTarget::Model { .. }) {
                point.gap = Some(damping_gap(&frac));
            }
            let (xi, r) = xi_and_mod(&roots);
            point.xi_inv = Some(xi);
            point.root_mod = r;
        }
        Err(e) => point.error = Some(e.to_string()),
    }
    if point.gap.is_none() {
        match model.with_chain(Chain::Infinite) {
            Ok(m) => point.gap = Some(damping_gap_symbol(&m)),
            Err(e) => point.error = point.error.or(Some(e.to_string())),
        }
    }
    point
}

/// Runs every grid point independently on the current rayon pool. Output
/// order follows the grid.
pub fn sweep(spec: &SweepSpec) -> Result<SweepResult> {
    let values = spec.validate()?;
    let points = values
        .par_iter()
        .map(|&v| sweep_point(&spec.target, v))
        .collect();
    Ok(SweepResult {
        field: spec.field(),
        critical_value: spec.critical_value,
        points,
    })
}

fn fmt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_infinite() => "inf".into(),
        Some(x) => format!("{x:e}"),
        None => "nan".into(),
    }
}

impl SweepResult {
    /// CSV with header `<field>,xi_inv,gap,root_mod`.
    pub fn to_csv(&self) -> String {
        let mut s = format!("{},xi_inv,gap,root_mod\n", self.field.name());
        for p in &self.points {
            s.push_str(&format!(
                "{},{},{},{}\n",
                fmt(Some(p.param)),
                fmt(p.xi_inv),
                fmt(p.gap),
                fmt(p.root_mod)
            ));
        }
        s
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.error.is_some()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LindbladGenerator;
    use num_complex::Complex64 as C64;

    fn odd_model(s: &[C64]) -> LatticeModel {
        LatticeModel::new(vec![LindbladGenerator::odd_only(s).unwrap()], None, Chain::Infinite)
            .unwrap()
    }

    #[test]
    fn grids_are_monotone() {
        let v = Grid::log_toward_critical(1e-2, 1e-4, 25).values(Some(0.0)).unwrap();
        assert_eq!(v.len(), 25);
        assert!((v[0] - 1e-2).abs() < 1e-15 && (v[24] - 1e-4).abs() < 1e-17);
        assert!(Grid::linear(1.0, 1.0, 10).values(None).is_err());
        assert!(Grid::log_toward_critical(1e-2, -1e-4, 10).values(Some(0.0)).is_err());
    }

    #[test]
    fn single_site_sweep_is_flat() {
        let spec = SweepSpec {
            target: SweepTarget::Model {
                model: odd_model(&[C64::new(1.0, 0.0)]),
                generator: 0,
                coefficient: 0,
                species: SpeciesSelector::Odd,
                field: SweepField::G,
            },
            grid: Grid::linear(-1.0, 1.0, 9),
            critical_value: None,
        };
        let out = sweep(&spec).unwrap();
        for p in &out.points {
            assert!((p.gap.unwrap() - 2.0).abs() < 1e-12);
            assert_eq!(p.xi_inv, Some(f64::INFINITY));
        }
        assert!(out.to_csv().starts_with("g,xi_inv,gap,root_mod\n-1e0,inf,2e0,nan\n"));
    }

    #[test]
    fn failures_are_recorded_per_point() {
        let spec = SweepSpec {
            target: SweepTarget::Model {
                model: odd_model(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]),
                generator: 0,
                coefficient: 1,
                species: SpeciesSelector::Odd,
                field: SweepField::Nu,
            },
            grid: Grid::linear(-1.0, 1.0, 9),
            critical_value: None,
        };
        let out = sweep(&spec).unwrap();
        assert_eq!(out.failures(), 4);
        assert!(out.points[8].xi_inv.is_some());
    }

    #[test]
    fn both_species_keep_their_ratio() {
        let gen = LindbladGenerator::from_fermion_ops(
            &[C64::new(1.0, 0.0), C64::new(1.0, 0.0)],
            &[C64::new(0.0, 0.0); 2],
        )
        .unwrap();
        let target = SweepTarget::Model {
            model: LatticeModel::new(vec![gen], None, Chain::Infinite).unwrap(),
            generator: 0,
            coefficient: 1,
            species: SpeciesSelector::Both,
            field: SweepField::G,
        };
        let m = model_at(&target, 0.3).unwrap();
        let want = LindbladGenerator::from_fermion_ops(
            &[C64::new(1.0, 0.0), C64::from_polar(1.0, 0.3)],
            &[C64::new(0.0, 0.0); 2],
        )
        .unwrap();
        for k in 0..2 {
            assert!((m.generators[0].odd[k].value() - want.odd[k].value()).norm() < 1e-14);
            assert!((m.generators[0].even[k].value() - want.even[k].value()).norm() < 1e-14);
        }
    }
}
