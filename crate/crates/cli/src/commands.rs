use std::path::Path;

use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::{json, Value};

use ness_core::criticality::{
    criticality_conditions, moment_order, predict_exponents, residue_correlations,
    solve_critical_parameters, to_model_symbol_fraction, damping_gap_finite, damping_gap_symbol,
    MOMENT_TOL,
};
use ness_core::experiments::{
    exact_liouvillian_oracle, fit_dynamical_exponent, fit_static_exponent, reproduce_figure_data,
    sweep, FigureId, SweepField, SweepPoint, SweepResult, SweepSpec,
};
use ness_core::ness::{
    correlations_quadrature_with, lyapunov_residual, occupation, solve_lyapunov_finite,
    ModelSymbol, QuadratureOptions,
};
use ness_core::{
    build_damping_matrices, Chain, CorrelationMatrix, CorrelationProfile, LatticeModel,
    LindbladGenerator, NessError,
};

use crate::args::*;
use crate::output::{meta_path, CliError, CliResult, Sink};

pub fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::invalid("--workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::invalid(e.to_string()))?;
    }
    let meta = !cli.no_meta;
    let sink = |out: OutputArgs| Sink {
        path: out.output,
        meta,
    };
    match cli.command {
        Command::Model(ModelCommand::Validate { model, out }) => {
            let m = load_model(&model)?;
            sink(out).emit(
                &(m.to_canonical_json()? + "\n"),
                "model validate",
                json!({ "valid": true }),
            )
        }
        Command::Ness(NessCommand::Correlations {
            model,
            method,
            dmax,
            entry,
            site,
            tol,
            out,
        }) => {
            let m = load_model(&model)?;
            let entry = parse_entry(&entry)?;
            positive("tol", tol)?;
            let (prof, meta) = correlations(&m, method, dmax, entry, site, tol)?;
            sink(out).emit(&profile_csv(&prof), "ness correlations", meta)
        }
        Command::Ness(NessCommand::Occupation { model, tol, out }) => {
            let m = load_model(&model)?;
            positive("tol", tol)?;
            let (n, achieved, method) = match m.chain {
                Chain::Infinite => {
                    let opts = QuadratureOptions {
                        entry: (0, 1),
                        tol,
                        ..QuadratureOptions::default()
                    };
                    let prof = correlations_quadrature_with(&ModelSymbol::new(m), 0, &opts)?;
                    let g = C64::i() * prof.values[0];
                    (0.5 * (1.0 - g.re), prof.achieved_tolerance, "quadrature")
                }
                Chain::Finite { .. } => {
                    let (gamma, residual) = finite_solve(&m)?;
                    (occupation(&gamma), Some(residual), "finite")
                }
            };
            let meta = json!({ "method": method, "achievedTolerance": achieved });
            sink(out).emit(
                &pretty(&json!({ "occupation": n, "method": method }))?,
                "ness occupation",
                meta,
            )
        }
        Command::Gap(GapArgs { model, method, out }) => {
            let m = load_model(&model)?;
            let (gap, name) = match method {
                GapMethod::Symbol => (damping_gap_symbol(&m), "symbol"),
                GapMethod::Finite => {
                    require_finite(&m)?;
                    (damping_gap_finite(&build_damping_matrices(&m)?), "finite")
                }
            };
            sink(out).emit(
                &pretty(&json!({ "gap": gap, "method": name }))?,
                "gap",
                json!({ "method": name, "achievedTolerance": Value::Null }),
            )
        }
        Command::Critical(CriticalCommand::Check {
            model,
            z0,
            generator,
            out,
        }) => {
            let m = load_model(&model)?;
            let gen = pick_generator(&m, generator)?;
            let z0 = parse_complex(&z0)?;
            let (a, b) = criticality_conditions(gen, z0)?;
            let order = moment_order(gen, z0)?;
            let residual = a.norm().max(b.norm());
            let report = json!({
                "z0": [z0.re, z0.im],
                "conditions": [[a.re, a.im], [b.re, b.im]],
                "critical": order > 0,
                "momentOrder": order,
            });
            sink(out).emit(
                &pretty(&report)?,
                "critical check",
                json!({ "momentTolerance": MOMENT_TOL, "conditionResidual": residual }),
            )
        }
        Command::Critical(CriticalCommand::Solve {
            sites,
            order,
            z0,
            fixed,
            out,
        }) => {
            let z0 = parse_complex(&z0)?;
            let fixed = fixed
                .iter()
                .map(|f| parse_fixed(f))
                .collect::<CliResult<Vec<_>>>()?;
            let family = solve_critical_parameters(sites, order, z0, &fixed)?;
            let gen = family.generator(&vec![C64::new(0.0, 0.0); family.directions.len()])?;
            let achieved = moment_residual(&gen, z0, order)?;
            sink(out).emit(
                &pretty(&family)?,
                "critical solve",
                json!({ "momentTolerance": MOMENT_TOL, "achievedTolerance": achieved }),
            )
        }
        Command::Critical(CriticalCommand::Predict {
            model,
            generator,
            out,
        }) => {
            let m = load_model(&model)?;
            let report = predict_exponents(pick_generator(&m, generator)?)?;
            sink(out).emit(
                &pretty(&report)?,
                "critical predict",
                json!({ "momentTolerance": MOMENT_TOL }),
            )
        }
        Command::Sweep(SweepArgs { spec, out }) => {
            let spec: SweepSpec = serde_json::from_str(&read(&spec)?)?;
            let result = sweep(&spec)?;
            let failures: Vec<Value> = result
                .points
                .iter()
                .filter_map(|p| p.error.as_ref().map(|e| json!({ "param": p.param, "error": e })))
                .collect();
            sink(out).emit(
                &result.to_csv(),
                "sweep",
                json!({
                    "points": result.points.len(),
                    "failures": failures,
                    "achievedTolerance": Value::Null,
                }),
            )
        }
        Command::Fit(args) => fit(args, meta),
        Command::Figure(FigureArgs { id, out_dir }) => {
            let id = match id {
                FigureArg::Fig2 => FigureId::Fig2,
                FigureArg::Fig4 => FigureId::Fig4,
            };
            let bundle = reproduce_figure_data(id)?;
            bundle.write_to(&out_dir)?;
            if meta {
                let name = match id {
                    FigureId::Fig2 => "fig2",
                    FigureId::Fig4 => "fig4",
                };
                let files: Vec<&str> = bundle.files.iter().map(|f| f.name.as_str()).collect();
                let record = json!({
                    "command": "figure",
                    "version": env!("CARGO_PKG_VERSION"),
                    "metadata": { "figureId": name, "files": files },
                });
                std::fs::write(
                    meta_path(&out_dir.join(name)),
                    pretty(&record)?,
                )?;
            }
            Ok(())
        }
        Command::Oracle(OracleArgs {
            model,
            sites,
            open,
            out,
        }) => {
            let mut m = load_model(&model)?;
            if let Some(l) = sites {
                m = m.with_chain(Chain::Finite {
                    sites: l,
                    periodic: !open,
                })?;
            }
            let report = exact_liouvillian_oracle(&m)?.report();
            let meta = json!({
                "kernelSingularValues": report.kernel_singular_values,
                "traceDeviation": (report.trace - 1.0).abs(),
            });
            sink(out).emit(&pretty(&report)?, "oracle", meta)
        }
    }
}

fn fit(args: FitArgs, meta: bool) -> CliResult<()> {
    let window = parse_pair(&args.window)?;
    if !(window.0 > 0.0 && window.1 > window.0) {
        return Err(CliError::invalid(format!(
            "window must satisfy 0 < lo < hi, got {},{}",
            window.0, window.1
        )));
    }
    let result = read_sweep_csv(&read(&args.sweep)?)?;
    let fit = match args.kind {
        FitKindArg::Static => fit_static_exponent(&result, args.pc, Some(window))?,
        FitKindArg::Dynamical => {
            let lambda = args
                .lambda
                .ok_or_else(|| CliError::invalid("dynamical fits need --lambda"))?;
            fit_dynamical_exponent(&result, args.pc, lambda, Some(window))?
        }
    };
    Sink {
        path: args.out.output,
        meta,
    }
    .emit(
        &pretty(&fit)?,
        "fit",
        json!({ "stdError": fit.std_error, "points": fit.abscissa.len() }),
    )
}

fn correlations(
    m: &LatticeModel,
    method: CorrelationMethod,
    dmax: usize,
    entry: (usize, usize),
    site: usize,
    tol: f64,
) -> CliResult<(CorrelationProfile, Value)> {
    match method {
        CorrelationMethod::Residue => {
            if !m.is_odd_only() {
                return Err(NessError::UnsupportedGenerator(
                    "the residue method needs odd-only generators".into(),
                )
                .into());
            }
            if entry.0 != entry.1 {
                return Err(CliError::invalid(
                    "the residue method covers the diagonal entries only",
                ));
            }
            let frac = to_model_symbol_fraction(m)?;
            let mut prof = residue_correlations(&frac, dmax)?;
            prof.entry = entry;
            Ok((prof, json!({ "method": "residue", "achievedTolerance": Value::Null })))
        }
        CorrelationMethod::Quadrature => {
            let opts = QuadratureOptions {
                entry,
                tol,
                ..QuadratureOptions::default()
            };
            let prof = correlations_quadrature_with(&ModelSymbol::new(m.clone()), dmax, &opts)?;
            let meta = json!({
                "method": "quadrature",
                "requestedTolerance": tol,
                "achievedTolerance": prof.achieved_tolerance,
            });
            Ok((prof, meta))
        }
        CorrelationMethod::Finite => {
            let (gamma, residual) = finite_solve(m)?;
            if site >= gamma.sites() {
                return Err(CliError::invalid(format!(
                    "site {site} outside a chain of {} sites",
                    gamma.sites()
                )));
            }
            if dmax >= gamma.sites() {
                return Err(CliError::invalid(format!(
                    "dmax {dmax} must be smaller than the chain length {}",
                    gamma.sites()
                )));
            }
            let prof = CorrelationProfile::from_finite(&gamma, site, entry, dmax);
            let meta = json!({
                "method": "finite",
                "lyapunovResidual": residual,
                "achievedTolerance": residual,
                "degenerate": gamma.is_degenerate(),
            });
            Ok((prof, meta))
        }
    }
}

fn finite_solve(m: &LatticeModel) -> CliResult<(CorrelationMatrix, f64)> {
    require_finite(m)?;
    let dm = build_damping_matrices(m)?;
    let gamma = solve_lyapunov_finite(&dm)?;
    let (x, y) = dm.real_parts()?;
    let residual = lyapunov_residual(&x, &y, gamma.gamma());
    Ok((gamma, residual))
}

fn moment_residual(gen: &LindbladGenerator, z0: C64, order: usize) -> CliResult<f64> {
    let conds = ness_core::criticality::moment_conditions(gen, z0, order)?;
    Ok(conds
        .iter()
        .map(|(a, b)| a.norm().max(b.norm()))
        .fold(0.0, f64::max))
}

fn require_finite(m: &LatticeModel) -> CliResult<()> {
    match m.chain {
        Chain::Finite { .. } => Ok(()),
        Chain::Infinite => Err(NessError::WrongChain { expected: "finite" }.into()),
    }
}

fn pick_generator(m: &LatticeModel, index: usize) -> CliResult<&LindbladGenerator> {
    m.generators
        .get(index)
        .ok_or_else(|| CliError::invalid(format!("no generator with index {index}")))
}

fn positive(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::invalid(format!("{name} must be positive, got {v}")))
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| {
        CliError::from(NessError::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        )))
    })
}

fn load_model(path: &Path) -> CliResult<LatticeModel> {
    Ok(LatticeModel::from_json(&read(path)?)?)
}

fn pretty<T: Serialize>(v: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn profile_csv(p: &CorrelationProfile) -> String {
    let mut s = String::from("d,re,im\n");
    for (d, v) in p.distances.iter().zip(&p.values) {
        s.push_str(&format!("{d},{:e},{:e}\n", v.re, v.im));
    }
    s
}

fn parse_f64(s: &str) -> CliResult<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::invalid(format!("not a number: {s:?}")))
}

fn parse_pair(s: &str) -> CliResult<(f64, f64)> {
    match s.split_once(',') {
        Some((a, b)) => Ok((parse_f64(a)?, parse_f64(b)?)),
        None => Err(CliError::invalid(format!("expected two comma-separated values, got {s:?}"))),
    }
}

/// `re,im` or a bare real number.
fn parse_complex(s: &str) -> CliResult<C64> {
    if s.contains(',') {
        let (re, im) = parse_pair(s)?;
        Ok(C64::new(re, im))
    } else {
        Ok(C64::new(parse_f64(s)?, 0.0))
    }
}

fn parse_fixed(s: &str) -> CliResult<(usize, C64)> {
    let (j, v) = s
        .split_once(':')
        .ok_or_else(|| CliError::invalid(format!("expected j:re,im, got {s:?}")))?;
    let j = j
        .trim()
        .parse()
        .map_err(|_| CliError::invalid(format!("bad coefficient index in {s:?}")))?;
    Ok((j, parse_complex(v)?))
}

fn parse_entry(s: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::invalid(format!("entry must be a,b with a,b in {{0,1}}, got {s:?}"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a > 1 || b > 1 {
        return Err(bad());
    }
    Ok((a, b))
}

fn read_sweep_csv(text: &str) -> CliResult<SweepResult> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| CliError::invalid("empty sweep file"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() != 4 || cols[1..] != ["xi_inv", "gap", "root_mod"] {
        return Err(CliError::invalid(format!("unexpected sweep header {header:?}")));
    }
    let field = match cols[0] {
        "g" => SweepField::G,
        "nu" => SweepField::Nu,
        other => return Err(CliError::invalid(format!("unknown sweep field {other:?}"))),
    };
    let cell = |s: &str| -> CliResult<Option<f64>> {
        if s == "nan" {
            Ok(None)
        } else {
            parse_f64(s).map(Some)
        }
    };
    let mut points = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let v: Vec<&str> = line.split(',').collect();
        if v.len() != 4 {
            return Err(CliError::invalid(format!("malformed sweep row {line:?}")));
        }
        points.push(SweepPoint {
            param: parse_f64(v[0])?,
            xi_inv: cell(v[1])?,
            gap: cell(v[2])?,
            root_mod: cell(v[3])?,
            error: None,
        });
    }
    Ok(SweepResult {
        field,
        critical_value: None,
        points,
    })
}
