use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use kgflow::{
    covariance_check, emt_sample, find_potential_for_reflection, integrate_bundle, match_boundaries, scan_transmission,
    seeds_lambda_weighted, seeds_uniform, Error, ReflectionMeasure, ScatteringSolution, StationaryField, Trajectory,
    VelocityField, VelocityLaw, COVARIANCE_TOLERANCE,
};

use crate::config::{linspace, Format, RunConfig, Seeding};
use crate::error::{CliError, CliResult};
use crate::io::{
    scan_rows, write_boost_csv, write_field_csv, write_find_csv, write_json, write_scan_csv, write_solve_csv,
    write_traj_csv, BoostReport, FieldRow, FindReport, RapidityResult, ScanReport, SolveReport, TrajBundle,
    TrajSummary,
};

fn open_output(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match out {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => {
            let f =
                File::create(p).map_err(|e| CliError::config("out", format!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

fn write_failed(e: impl std::fmt::Display) -> CliError {
    CliError::config("out", format!("write failed: {e}"))
}

fn emit_json<T: serde::Serialize>(out: Option<&Path>, value: &T) -> CliResult<()> {
    let mut w = open_output(out)?;
    write_json(&mut w, value).map_err(write_failed)?;
    w.flush().map_err(write_failed)
}

fn emit_csv(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> csv::Result<()>) -> CliResult<()> {
    let mut w = open_output(out)?;
    write(&mut w).map_err(write_failed)?;
    w.flush().map_err(write_failed)
}

pub fn solve(cfg: &RunConfig) -> CliResult<()> {
    let format = cfg.output_format(Format::Json)?;
    let sol = match_boundaries(&cfg.barrier()?)?;
    let report = SolveReport::new(&sol);
    match format {
        Format::Json => emit_json(cfg.out.as_deref(), &report),
        Format::Csv => emit_csv(cfg.out.as_deref(), |w| write_solve_csv(w, &report)),
    }
}

pub fn scan(cfg: &RunConfig) -> CliResult<()> {
    let format = cfg.output_format(Format::Csv)?;
    let omega = cfg.frequency()?;
    let m = cfg.mass()?;
    let kind = match &cfg.kind {
        Some(s) => s.parse().map_err(CliError::from)?,
        None => {
            return Err(CliError::config(
                "kind",
                "required for a scan (scalar or electrostatic)",
            ))
        }
    };
    let potentials = linspace(
        "v_max",
        cfg.v_min.unwrap_or(0.0),
        cfg.v_max.unwrap_or(3.0),
        cfg.v_steps.unwrap_or(61),
    )?;
    let widths = linspace(
        "a_max",
        cfg.a_min.unwrap_or(1.0),
        cfg.a_max.unwrap_or(12.0),
        cfg.a_steps.unwrap_or(12),
    )?;
    let grid = scan_transmission(omega, m, kind, &potentials, &widths)?;
    match format {
        Format::Csv => emit_csv(cfg.out.as_deref(), |w| write_scan_csv(w, &scan_rows(&grid))),
        Format::Json => emit_json(cfg.out.as_deref(), &ScanReport::new(&grid)),
    }
}

pub fn field_rows(sol: &ScatteringSolution, t: f64, xs: &[f64]) -> Vec<FieldRow> {
    xs.iter()
        .map(|&x| match emt_sample(sol, t, x) {
            Ok(s) => FieldRow {
                x,
                absphi2: s.field.absphi2,
                lambda: Some(s.lambda_time),
                v_s: s.v_s,
                v_db: s.v_db,
                v_e: s.v_e,
            },
            Err(_) => {
                let f = sol.evaluate(t, x);
                FieldRow {
                    x,
                    absphi2: f.absphi2,
                    lambda: None,
                    v_s: f.polar.map(|p| p.s.x),
                    v_db: None,
                    v_e: None,
                }
            }
        })
        .collect()
}

pub fn field(cfg: &RunConfig) -> CliResult<()> {
    let format = cfg.output_format(Format::Csv)?;
    let sol = match_boundaries(&cfg.barrier()?)?;
    let t = cfg.t.unwrap_or(0.0);
    if !t.is_finite() {
        return Err(CliError::config("t", "must be finite"));
    }
    let xs = linspace(
        "x_max",
        cfg.x_min.unwrap_or(-40.0),
        cfg.x_max.unwrap_or(sol.spec.width + 10.0),
        cfg.x_steps.unwrap_or(1001),
    )?;
    let rows = field_rows(&sol, t, &xs);
    match format {
        Format::Csv => emit_csv(cfg.out.as_deref(), |w| write_field_csv(w, &rows)),
        Format::Json => emit_json(cfg.out.as_deref(), &rows),
    }
}

fn seeds(cfg: &RunConfig, sol: &ScatteringSolution, t0: f64) -> CliResult<Vec<f64>> {
    if let Some(explicit) = &cfg.seeds {
        if let Some(bad) = explicit.iter().find(|x| !x.is_finite()) {
            return Err(CliError::config("seeds", format!("seed {bad} is not finite")));
        }
        return Ok(explicit.clone());
    }
    let lo = cfg.seed_min.unwrap_or(-40.0);
    let hi = cfg.seed_max.unwrap_or(-1.0);
    let n = cfg.seed_count.unwrap_or(20);
    if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
        return Err(CliError::config(
            "seed_max",
            format!("seed interval [{lo}, {hi}] is invalid"),
        ));
    }
    match cfg.seeding()? {
        Seeding::Uniform => Ok(seeds_uniform(lo, hi, n)),
        Seeding::Lambda => Ok(seeds_lambda_weighted(sol, t0, lo, hi, n)?),
    }
}

fn check_seeds(field: &StationaryField<'_>, seeds: &[f64], t0: f64) -> CliResult<()> {
    for &x0 in seeds {
        if let Err(Error::Node { .. }) = field.velocity(t0, x0) {
            return Err(CliError::config(
                "seeds",
                format!(
                    "seed x0 = {x0} sits on a node, where the {} law is undefined",
                    field.law
                ),
            ));
        }
    }
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.summary.json"))
}

pub fn traj(cfg: &RunConfig) -> CliResult<()> {
    let format = cfg.output_format(Format::Csv)?;
    let law = cfg.velocity_law()?;
    let step = cfg.step()?;
    let (t0, t_end) = cfg.time_span(60.0)?;
    let sol = match_boundaries(&cfg.barrier()?)?;
    let mut seeds = seeds(cfg, &sol, t0)?;
    seeds.sort_by(f64::total_cmp);
    let field = StationaryField::new(&sol, law);
    check_seeds(&field, &seeds, t0)?;

    let bundle: Vec<Trajectory> = integrate_bundle(&field, &seeds, t0, t_end, step)
        .into_iter()
        .collect::<Result<_, _>>()?;
    let summary = TrajSummary::new(&bundle, law.as_str(), t0, t_end, step.dt, step.adaptive);
    match format {
        Format::Csv => {
            emit_csv(cfg.out.as_deref(), |w| write_traj_csv(w, &bundle))?;
            match cfg.out.as_deref() {
                Some(p) => emit_json(Some(&sidecar_path(p)), &summary),
                None => {
                    let stopped = summary
                        .trajectories
                        .iter()
                        .filter(|t| t.termination != "completed")
                        .count();
                    eprintln!("{} trajectories, {stopped} stopped early", bundle.len());
                    Ok(())
                }
            }
        }
        Format::Json => emit_json(cfg.out.as_deref(), &TrajBundle::new(summary, &bundle)),
    }
}

pub fn boost_check(cfg: &RunConfig) -> CliResult<()> {
    let format = cfg.output_format(Format::Json)?;
    let step = cfg.step()?;
    let (t0, t_end) = cfg.time_span(40.0)?;
    let rapidities = cfg.rapidities.clone().unwrap_or_else(|| vec![0.1, 0.3, 1.0]);
    if let Some(bad) = rapidities.iter().find(|r| !r.is_finite()) {
        return Err(CliError::config("rapidities", format!("rapidity {bad} is not finite")));
    }
    let sol = match_boundaries(&cfg.barrier()?)?;
    let mut seeds = seeds(cfg, &sol, t0)?;
    seeds.sort_by(f64::total_cmp);
    check_seeds(&StationaryField::new(&sol, VelocityLaw::Eigen), &seeds, t0)?;

    let results = rapidities
        .iter()
        .map(|&alpha| {
            let c = covariance_check(&sol, &seeds, t0, t_end, step, alpha)?;
            Ok(RapidityResult {
                rapidity: c.rapidity,
                max_chord: c.max_chord,
                max_deviation: c.max_deviation,
                pass: c.pass,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let pass = results.iter().all(|r| r.pass);
    let s = &sol.spec;
    let report = BoostReport {
        kind: s.kind.to_string(),
        omega: s.omega,
        v: s.potential,
        a: s.width,
        seeds,
        t0,
        t_end,
        dt: step.dt,
        tolerance: COVARIANCE_TOLERANCE,
        results,
        pass,
    };
    match format {
        Format::Json => emit_json(cfg.out.as_deref(), &report)?,
        Format::Csv => emit_csv(cfg.out.as_deref(), |w| write_boost_csv(w, &report))?,
    }
    if pass {
        Ok(())
    } else {
        let failed: Vec<String> = report
            .results
            .iter()
            .filter(|r| !r.pass)
            .map(|r| {
                format!(
                    "rapidity {} (chord {:.6}, deviation {:.3e})",
                    r.rapidity, r.max_chord, r.max_deviation
                )
            })
            .collect();
        Err(CliError::Covariance(failed.join("; ")))
    }
}

/// First interval of a uniform scan on which the reflection crosses `target`.
fn auto_bracket(cfg: &RunConfig, target: f64, measure: ReflectionMeasure) -> CliResult<(f64, f64)> {
    let omega = cfg.frequency()?;
    let m = cfg.mass()?;
    let kind = cfg.potential_kind()?;
    let hi = omega + m + 8.0;
    let n = 8000;
    let refl = |v: f64| -> CliResult<f64> {
        let spec = kgflow::BarrierSpec::new(m, omega, v, cfg.width(), kind)?;
        let (r2, _) = kgflow::closed_form_rt(&spec)?;
        Ok(match measure {
            ReflectionMeasure::Amplitude => r2.sqrt(),
            ReflectionMeasure::Probability => r2,
        })
    };
    let mut prev = (0.0, refl(0.0)? - target);
    for i in 1..=n {
        let v = hi * i as f64 / n as f64;
        let d = refl(v)? - target;
        if d.signum() != prev.1.signum() {
            return Ok((prev.0, v));
        }
        prev = (v, d);
    }
    Err(CliError::Solver(Error::NoBracket {
        lo: 0.0,
        hi,
        abs_r_lo: refl(0.0)?,
        abs_r_hi: refl(hi)?,
        target,
    }))
}

pub fn find_v(cfg: &RunConfig) -> CliResult<()> {
    let format = cfg.output_format(Format::Json)?;
    let target = cfg.reflection_target()?;
    let measure = cfg.measure()?;
    let spec = cfg.barrier()?;
    let bracket = match (cfg.v_lo, cfg.v_hi) {
        (Some(lo), Some(hi)) => (lo, hi),
        (None, None) => auto_bracket(cfg, target, measure)?,
        (None, Some(_)) => return Err(CliError::config("v_lo", "give both ends of the bracket or neither")),
        (Some(_), None) => return Err(CliError::config("v_hi", "give both ends of the bracket or neither")),
    };
    let v = find_potential_for_reflection(spec.omega, spec.m0, spec.width, spec.kind, target, bracket, measure)?;
    let sol = match_boundaries(&kgflow::BarrierSpec::new(
        spec.m0, spec.omega, v, spec.width, spec.kind,
    )?)?;
    let report = FindReport {
        kind: spec.kind.to_string(),
        omega: spec.omega,
        a: spec.width,
        target,
        measure: match measure {
            ReflectionMeasure::Amplitude => "amplitude",
            ReflectionMeasure::Probability => "probability",
        }
        .to_string(),
        bracket: [bracket.0, bracket.1],
        v,
        abs_r: sol.r.norm(),
        refl2: sol.refl2,
    };
    match format {
        Format::Json => emit_json(cfg.out.as_deref(), &report),
        Format::Csv => emit_csv(cfg.out.as_deref(), |w| write_find_csv(w, &report)),
    }
}
