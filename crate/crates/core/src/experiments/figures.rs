//! Figure data as CSV bundles with a gnuplot script stub.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::criticality::{residue_correlations, to_symbol_fraction};
use crate::error::{NessError, Result};
use crate::experiments::fit::{fit_dynamical_exponent, fit_static_exponent, ExponentFit};
use crate::experiments::quantum_optical::quantum_optical_model;
use crate::experiments::sweep::{
    sweep, Grid, SpeciesSelector, SweepField, SweepResult, SweepSpec, SweepTarget,
};
use crate::lattice::{Chain, LatticeModel, LindbladGenerator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig2,
    Fig4,
}

impl std::str::FromStr for FigureId {
    type Err = NessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(FigureId::Fig2),
            "fig4" => Ok(FigureId::Fig4),
            _ => Err(NessError::InvalidArgument(format!("unknown figure id {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureBundle {
    pub id: FigureId,
    pub files: Vec<FigureFile>,
}

impl FigureBundle {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|f| f.name == name)
            .map(|f| f.contents.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for f in &self.files {
            std::fs::write(dir.join(&f.name), &f.contents)?;
        }
        Ok(())
    }
}

const LINEAR_POINTS: usize = 200;
const LOG_POINTS: usize = 25;
const HEATMAP_G: usize = 80;
const HEATMAP_DMAX: usize = 30;

/// `(1, 2e^{ig}, 1)`: the `λ = 1/2` family.
pub fn three_site_left(g: f64) -> Result<LindbladGenerator> {
    LindbladGenerator::odd_only(&[C64::new(1.0, 0.0), C64::from_polar(2.0, g), C64::new(1.0, 0.0)])
}

/// `(1, 2, e^{ig})`: the same critical point approached through an outer
/// phase. Varying the middle phase keeps `s` palindromic, which makes every
/// odd-odd correlation vanish identically.
pub fn three_site_left_outer(g: f64) -> Result<LindbladGenerator> {
    LindbladGenerator::odd_only(&[C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::from_polar(1.0, g)])
}

/// Staircase phases `(-2π/3, g, 2π/3)` with unit magnitudes: a `λ = 1` family.
pub fn three_site_right(g: f64) -> Result<LindbladGenerator> {
    LindbladGenerator::odd_only(&[
        C64::from_polar(1.0, -2.0 * PI / 3.0),
        C64::from_polar(1.0, g),
        C64::from_polar(1.0, 2.0 * PI / 3.0),
    ])
}

fn odd_target(gen: LindbladGenerator, coefficient: usize) -> Result<SweepTarget> {
    Ok(SweepTarget::Model {
        model: LatticeModel::new(vec![gen], None, Chain::Infinite)?,
        generator: 0,
        coefficient,
        species: SpeciesSelector::Odd,
        field: SweepField::G,
    })
}

fn run(target: SweepTarget, grid: Grid, critical: Option<f64>) -> Result<SweepResult> {
    sweep(&SweepSpec {
        target,
        grid,
        critical_value: critical,
    })
}

fn fits_json(fits: &[(&str, Result<ExponentFit>)]) -> Result<String> {
    let map: serde_json::Map<String, serde_json::Value> = fits
        .iter()
        .map(|(name, f)| {
            let v = match f {
                Ok(f) => serde_json::to_value(f),
                Err(e) => Ok(serde_json::json!({ "error": e.to_string() })),
            };
            v.map(|v| (name.to_string(), v))
        })
        .collect::<std::result::Result<_, _>>()?;
    Ok(serde_json::to_string_pretty(&map)? + "\n")
}

fn heatmap(family: impl Fn(f64) -> Result<LindbladGenerator>) -> Result<String> {
    let grid = Grid::linear(-0.2, 0.2, HEATMAP_G).values(None)?;
    let mut s = String::from("g,d,abs_corr\n");
    for g in grid {
        let frac = to_symbol_fraction(&family(g)?)?;
        let prof = residue_correlations(&frac, HEATMAP_DMAX)?;
        for (d, v) in prof.distances.iter().zip(&prof.values).skip(1) {
            s.push_str(&format!("{g:e},{d},{:e}\n", v.norm()));
        }
    }
    Ok(s)
}

fn fig2() -> Result<FigureBundle> {
    let target = SweepTarget::QuantumOptical {
        chi: 1.0,
        nu: 1.0,
        g: 0.0,
        field: SweepField::G,
    };
    let lin = run(target.clone(), Grid::linear(-0.5, 0.5, LINEAR_POINTS), None)?;
    let log = run(target, Grid::log_toward_critical(1e-1, 1e-5, LOG_POINTS), Some(0.0))?;
    let stat = fit_static_exponent(&log, 0.0, None);
    let lambda = stat.as_ref().map(|f| f.exponent).unwrap_or(1.0);
    let dynm = fit_dynamical_exponent(&log, 0.0, lambda, None);
    let script = "set datafile separator ','\n\
set multiplot layout 1,2\n\
set xlabel 'g'\n\
set ylabel 'inverse correlation length'\n\
plot 'fig2_linear.csv' using 1:2 with lines notitle\n\
set ylabel 'damping gap'\n\
plot 'fig2_linear.csv' using 1:3 with lines notitle\n\
unset multiplot\n";
    Ok(FigureBundle {
        id: FigureId::Fig2,
        files: vec![
            FigureFile {
                name: "fig2_linear.csv".into(),
                contents: lin.to_csv(),
            },
            FigureFile {
                name: "fig2_log.csv".into(),
                contents: log.to_csv(),
            },
            FigureFile {
                name: "fig2_fits.json".into(),
                contents: fits_json(&[("static", stat), ("dynamical", dynm)])?,
            },
            FigureFile {
                name: "fig2.gp".into(),
                contents: script.into(),
            },
        ],
    })
}

fn fig4() -> Result<FigureBundle> {
    let mut files = Vec::new();
    let mut fits = Vec::new();
    for (side, family, coefficient) in [
        ("left", three_site_left_outer as fn(f64) -> Result<LindbladGenerator>, 2),
        ("right", three_site_right, 1),
    ] {
        files.push(FigureFile {
            name: format!("fig4_{side}_heatmap.csv"),
            contents: heatmap(family)?,
        });
        let target = odd_target(family(0.0)?, coefficient)?;
        let lin = run(target.clone(), Grid::linear(-0.2, 0.2, LINEAR_POINTS), None)?;
        let log = run(target, Grid::log_toward_critical(1e-1, 1e-5, LOG_POINTS), Some(0.0))?;
        files.push(FigureFile {
            name: format!("fig4_{side}_xi.csv"),
            contents: lin.to_csv(),
        });
        files.push(FigureFile {
            name: format!("fig4_{side}_log.csv"),
            contents: log.to_csv(),
        });
        fits.push((side, fit_static_exponent(&log, 0.0, None)));
    }
    files.push(FigureFile {
        name: "fig4_fits.json".into(),
        contents: fits_json(&fits)?,
    });
    files.push(FigureFile {
        name: "fig4.gp".into(),
        contents: "set datafile separator ','\n\
set logscale cb\n\
set xlabel 'g'\n\
set ylabel 'd'\n\
set multiplot layout 2,2\n\
plot 'fig4_left_heatmap.csv' using 1:2:3 with image notitle\n\
plot 'fig4_right_heatmap.csv' using 1:2:3 with image notitle\n\
set logscale xy\n\
set ylabel 'inverse correlation length'\n\
plot 'fig4_left_log.csv' using 1:2 with linespoints notitle\n\
plot 'fig4_right_log.csv' using 1:2 with linespoints notitle\n\
unset multiplot\n"
            .into(),
    });
    Ok(FigureBundle {
        id: FigureId::Fig4,
        files,
    })
}

pub fn reproduce_figure_data(id: FigureId) -> Result<FigureBundle> {
    match id {
        FigureId::Fig2 => fig2(),
        FigureId::Fig4 => fig4(),
    }
}

/// The two-site pump/decay model at the figure's parameters.
pub fn fig2_model(g: f64) -> Result<LatticeModel> {
    quantum_optical_model(1.0, 1.0, g, Chain::Infinite)
}
