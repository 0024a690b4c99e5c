//! Run configuration: an optional JSON file overlaid by command-line flags,
//! validated before any computation.

use std::fs;
use std::path::{Path, PathBuf};

use kgflow::{BarrierSpec, PotentialKind, ReflectionMeasure, StepConfig, VelocityLaw};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_WIDTH: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seeding {
    Uniform,
    Lambda,
}

/// Every key is optional; unset keys take per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub k: Option<f64>,
    pub omega: Option<f64>,
    pub m: Option<f64>,
    #[serde(rename = "V")]
    pub v: Option<f64>,
    pub a: Option<f64>,
    pub kind: Option<String>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,

    pub v_min: Option<f64>,
    pub v_max: Option<f64>,
    pub v_steps: Option<usize>,
    pub a_min: Option<f64>,
    pub a_max: Option<f64>,
    pub a_steps: Option<usize>,

    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub x_steps: Option<usize>,
    pub t: Option<f64>,

    pub law: Option<String>,
    pub seeds: Option<Vec<f64>>,
    pub seed_min: Option<f64>,
    pub seed_max: Option<f64>,
    pub seed_count: Option<usize>,
    pub seeding: Option<String>,
    pub t0: Option<f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub adaptive: Option<bool>,

    pub rapidities: Option<Vec<f64>>,

    pub target: Option<f64>,
    pub measure: Option<String>,
    pub v_lo: Option<f64>,
    pub v_hi: Option<f64>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),* $(,)?) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))
    }

    /// `top` wins wherever it is set. Setting either of `k`/`omega` in `top`
    /// clears the other from `self`.
    pub fn overlay(mut self, top: RunConfig) -> Self {
        if top.k.is_some() {
            self.omega = None;
        }
        if top.omega.is_some() {
            self.k = None;
        }
        overlay_fields!(self, top;
            k, omega, m, v, a, kind, format, out,
            v_min, v_max, v_steps, a_min, a_max, a_steps,
            x_min, x_max, x_steps, t,
            law, seeds, seed_min, seed_max, seed_count, seeding, t0, t_end, dt, adaptive,
            rapidities, target, measure, v_lo, v_hi,
        );
        self
    }

    pub fn mass(&self) -> CliResult<f64> {
        let m = self.m.unwrap_or(1.0);
        if !(m.is_finite() && m > 0.0) {
            return Err(CliError::config("m", format!("rest mass must be positive, got {m}")));
        }
        Ok(m)
    }

    pub fn frequency(&self) -> CliResult<f64> {
        let m = self.mass()?;
        match (self.k, self.omega) {
            (Some(_), Some(_)) => Err(CliError::config("k", "`k` and `omega` are mutually exclusive")),
            (Some(k), None) => {
                if !(k.is_finite() && k > 0.0) {
                    return Err(CliError::config(
                        "k",
                        format!("incident momentum must be positive, got {k}"),
                    ));
                }
                Ok((k * k + m * m).sqrt())
            }
            (None, Some(omega)) => Ok(omega),
            (None, None) => Err(CliError::config("k", "one of `k` or `omega` is required")),
        }
    }

    pub fn potential_kind(&self) -> CliResult<PotentialKind> {
        match (&self.kind, self.v.unwrap_or(0.0)) {
            (Some(s), _) => s.parse().map_err(CliError::from),
            (None, v) if v == 0.0 => Ok(PotentialKind::Scalar),
            (None, _) => Err(CliError::config(
                "kind",
                "required when V > 0 (scalar or electrostatic)",
            )),
        }
    }

    pub fn width(&self) -> f64 {
        self.a.unwrap_or(DEFAULT_WIDTH)
    }

    pub fn barrier(&self) -> CliResult<BarrierSpec> {
        let omega = self.frequency()?;
        let kind = self.potential_kind()?;
        Ok(BarrierSpec::new(
            self.mass()?,
            omega,
            self.v.unwrap_or(0.0),
            self.width(),
            kind,
        )?)
    }

    pub fn output_format(&self, default: Format) -> CliResult<Format> {
        match self.format.as_deref() {
            None => Ok(default),
            Some("csv") => Ok(Format::Csv),
            Some("json") => Ok(Format::Json),
            Some(other) => Err(CliError::config(
                "format",
                format!("expected csv or json, got `{other}`"),
            )),
        }
    }

    pub fn velocity_law(&self) -> CliResult<VelocityLaw> {
        Ok(self.law.as_deref().unwrap_or("eigen").parse()?)
    }

    pub fn seeding(&self) -> CliResult<Seeding> {
        match self.seeding.as_deref() {
            None | Some("uniform") => Ok(Seeding::Uniform),
            Some("lambda") => Ok(Seeding::Lambda),
            Some(other) => Err(CliError::config(
                "seeding",
                format!("expected uniform or lambda, got `{other}`"),
            )),
        }
    }

    pub fn step(&self) -> CliResult<StepConfig> {
        let dt = self.dt.unwrap_or(0.05);
        if !(dt.is_finite() && dt > 0.0) {
            return Err(CliError::config("dt", format!("time step must be positive, got {dt}")));
        }
        Ok(StepConfig {
            dt,
            adaptive: self.adaptive.unwrap_or(true),
            ..StepConfig::default()
        })
    }

    /// `(t0, t_end)` with `t_end ≥ t0`.
    pub fn time_span(&self, default_end: f64) -> CliResult<(f64, f64)> {
        let t0 = finite("t0", self.t0.unwrap_or(0.0))?;
        let t_end = finite("t_end", self.t_end.unwrap_or(default_end))?;
        if t_end < t0 {
            return Err(CliError::config(
                "t_end",
                format!("end time {t_end} precedes t0 = {t0}"),
            ));
        }
        Ok((t0, t_end))
    }

    pub fn measure(&self) -> CliResult<ReflectionMeasure> {
        match self.measure.as_deref() {
            None | Some("amplitude") => Ok(ReflectionMeasure::Amplitude),
            Some("probability") => Ok(ReflectionMeasure::Probability),
            Some(other) => Err(CliError::config(
                "measure",
                format!("expected amplitude or probability, got `{other}`"),
            )),
        }
    }

    pub fn reflection_target(&self) -> CliResult<f64> {
        let target = self
            .target
            .ok_or_else(|| CliError::config("target", "a reflection target in (0, 1) is required"))?;
        if !(target > 0.0 && target < 1.0) {
            return Err(CliError::config("target", format!("must lie in (0, 1), got {target}")));
        }
        Ok(target)
    }
}

fn finite(field: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(field, format!("must be finite, got {v}")))
    }
}

/// `steps` equally spaced points on `[lo, hi]`.
pub fn linspace(field: &str, lo: f64, hi: f64, steps: usize) -> CliResult<Vec<f64>> {
    finite(field, lo)?;
    finite(field, hi)?;
    if hi < lo {
        return Err(CliError::config(
            field,
            format!("upper bound {hi} is below lower bound {lo}"),
        ));
    }
    Ok(match steps {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    })
}
