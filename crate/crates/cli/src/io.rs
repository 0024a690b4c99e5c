//! Output schemas and their readers.
//!
//! CSV floats are written with 17 significant digits (`NaN` for failed scan
//! cells, an empty cell where a quantity is undefined) so every file reads
//! back bit-identically.

use std::io::{Read, Write};

use kgflow::{ScanGrid, ScatteringSolution, Trajectory};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type IoResult<T> = std::result::Result<T, Box<dyn std::error::Error + Send + Sync>>;

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub kind: String,
    pub m: f64,
    pub omega: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub a: f64,
    pub k1: f64,
    pub k2: ComplexValue,
    #[serde(rename = "R")]
    pub r: ComplexValue,
    #[serde(rename = "G")]
    pub g: ComplexValue,
    #[serde(rename = "H")]
    pub h: ComplexValue,
    #[serde(rename = "J")]
    pub j: ComplexValue,
    pub abs_r: f64,
    pub refl2: f64,
    pub trans2: f64,
    pub regime: String,
}

impl SolveReport {
    pub fn new(sol: &ScatteringSolution) -> Self {
        let s = &sol.spec;
        Self {
            kind: s.kind.to_string(),
            m: s.m0,
            omega: s.omega,
            v: s.potential,
            a: s.width,
            k1: sol.k1,
            k2: sol.k2.into(),
            r: sol.r.into(),
            g: sol.g.into(),
            h: sol.h.into(),
            j: sol.j.into(),
            abs_r: sol.r.norm(),
            refl2: sol.refl2,
            trans2: sol.trans2,
            regime: sol.regime().as_str().to_string(),
        }
    }
}

const SOLVE_HEADER: [&str; 20] = [
    "kind", "m", "omega", "V", "a", "k1", "k2_re", "k2_im", "R_re", "R_im", "G_re", "G_im", "H_re", "H_im", "J_re",
    "J_im", "abs_r", "refl2", "trans2", "regime",
];

pub fn write_solve_csv<W: Write>(w: W, rep: &SolveReport) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SOLVE_HEADER)?;
    let mut row = vec![rep.kind.clone()];
    let nums = [
        rep.m, rep.omega, rep.v, rep.a, rep.k1, rep.k2.re, rep.k2.im, rep.r.re, rep.r.im, rep.g.re, rep.g.im, rep.h.re,
        rep.h.im, rep.j.re, rep.j.im, rep.abs_r, rep.refl2, rep.trans2,
    ];
    row.extend(nums.iter().map(|&v| fmt_f64(v)));
    row.push(rep.regime.clone());
    out.write_record(&row)?;
    out.flush()?;
    Ok(())
}

pub fn read_solve_csv<R: Read>(r: R) -> IoResult<SolveReport> {
    let mut rdr = csv::Reader::from_reader(r);
    let rec = rdr.records().next().ok_or("missing solve row")??;
    let f = |i: usize| -> IoResult<f64> { Ok(rec[i].parse::<f64>()?) };
    let c = |i: usize| -> IoResult<ComplexValue> {
        Ok(ComplexValue {
            re: f(i)?,
            im: f(i + 1)?,
        })
    };
    Ok(SolveReport {
        kind: rec[0].to_string(),
        m: f(1)?,
        omega: f(2)?,
        v: f(3)?,
        a: f(4)?,
        k1: f(5)?,
        k2: c(6)?,
        r: c(8)?,
        g: c(10)?,
        h: c(12)?,
        j: c(14)?,
        abs_r: f(16)?,
        refl2: f(17)?,
        trans2: f(18)?,
        regime: rec[19].to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    #[serde(rename = "V")]
    pub v: f64,
    pub a: f64,
    pub trans2: f64,
}

pub fn scan_rows(grid: &ScanGrid) -> Vec<ScanRow> {
    let na = grid.widths.len();
    grid.potentials
        .iter()
        .enumerate()
        .flat_map(|(iv, &v)| {
            grid.widths.iter().enumerate().map(move |(ia, &a)| ScanRow {
                v,
                a,
                trans2: grid.trans2[iv * na + ia],
            })
        })
        .collect()
}

pub fn write_scan_csv<W: Write>(w: W, rows: &[ScanRow]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["V", "a", "trans2"])?;
    for r in rows {
        out.write_record([fmt_f64(r.v), fmt_f64(r.a), fmt_f64(r.trans2)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_scan_csv<R: Read>(r: R) -> IoResult<Vec<ScanRow>> {
    Ok(csv::Reader::from_reader(r).deserialize().collect::<csv::Result<_>>()?)
}

/// JSON form of a scan; failed cells are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub kind: String,
    pub m: f64,
    pub omega: f64,
    #[serde(rename = "V")]
    pub potentials: Vec<f64>,
    pub a: Vec<f64>,
    pub trans2: Vec<Option<f64>>,
    pub failed: usize,
}

impl ScanReport {
    pub fn new(grid: &ScanGrid) -> Self {
        Self {
            kind: grid.kind.to_string(),
            m: grid.m0,
            omega: grid.omega,
            potentials: grid.potentials.clone(),
            a: grid.widths.clone(),
            trans2: grid.trans2.iter().map(|&t| (!t.is_nan()).then_some(t)).collect(),
            failed: grid.failed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldRow {
    pub x: f64,
    pub absphi2: f64,
    pub lambda: Option<f64>,
    #[serde(rename = "v_S")]
    pub v_s: Option<f64>,
    #[serde(rename = "v_dB")]
    pub v_db: Option<f64>,
    pub v_e: Option<f64>,
}

pub fn write_field_csv<W: Write>(w: W, rows: &[FieldRow]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "absphi2", "lambda", "v_S", "v_dB", "v_e"])?;
    for r in rows {
        out.write_record([
            fmt_f64(r.x),
            fmt_f64(r.absphi2),
            fmt_opt(r.lambda),
            fmt_opt(r.v_s),
            fmt_opt(r.v_db),
            fmt_opt(r.v_e),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_field_csv<R: Read>(r: R) -> IoResult<Vec<FieldRow>> {
    Ok(csv::Reader::from_reader(r).deserialize().collect::<csv::Result<_>>()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajRow {
    pub traj_id: usize,
    pub t: f64,
    pub x: f64,
}

pub fn write_traj_csv<W: Write>(w: W, bundle: &[Trajectory]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["traj_id", "t", "x"])?;
    for (id, tr) in bundle.iter().enumerate() {
        for p in &tr.points {
            out.write_record([id.to_string(), fmt_f64(p.t), fmt_f64(p.x)])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_traj_csv<R: Read>(r: R) -> IoResult<Vec<TrajRow>> {
    Ok(csv::Reader::from_reader(r).deserialize().collect::<csv::Result<_>>()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventValue {
    pub t: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajSummaryEntry {
    pub traj_id: usize,
    pub x0: f64,
    pub points: usize,
    pub termination: String,
    /// Where the world line stopped early, if it did.
    pub stopped_at: Option<EventValue>,
    pub stagnation: Option<EventValue>,
    pub max_chord: f64,
}

/// Sidecar for a trajectory bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajSummary {
    pub law: String,
    pub method: String,
    pub dt: f64,
    pub adaptive: bool,
    pub t0: f64,
    pub t_end: f64,
    pub trajectories: Vec<TrajSummaryEntry>,
}

impl TrajSummary {
    pub fn new(bundle: &[Trajectory], law: &str, t0: f64, t_end: f64, dt: f64, adaptive: bool) -> Self {
        use kgflow::Termination as T;
        Self {
            law: law.to_string(),
            method: bundle.first().map_or("rk4-halving", |t| t.method).to_string(),
            dt,
            adaptive,
            t0,
            t_end,
            trajectories: bundle
                .iter()
                .enumerate()
                .map(|(id, tr)| TrajSummaryEntry {
                    traj_id: id,
                    x0: tr.x0,
                    points: tr.points.len(),
                    termination: tr.termination.as_str().to_string(),
                    stopped_at: match tr.termination {
                        T::Completed => None,
                        T::NodeApproach { t, x } | T::BoundarySink { t, x } => Some(EventValue { t, x }),
                    },
                    stagnation: tr.stagnation.map(|p| EventValue { t: p.t, x: p.x }),
                    max_chord: tr.max_chord_speed(),
                })
                .collect(),
        }
    }
}

/// JSON form of a trajectory bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajBundle {
    pub summary: TrajSummary,
    /// `[t, x]` pairs per trajectory, in `traj_id` order.
    pub points: Vec<Vec<[f64; 2]>>,
}

impl TrajBundle {
    pub fn new(summary: TrajSummary, bundle: &[Trajectory]) -> Self {
        Self {
            summary,
            points: bundle
                .iter()
                .map(|tr| tr.points.iter().map(|p| [p.t, p.x]).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RapidityResult {
    pub rapidity: f64,
    pub max_chord: f64,
    pub max_deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostReport {
    pub kind: String,
    pub omega: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub a: f64,
    pub seeds: Vec<f64>,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub tolerance: f64,
    pub results: Vec<RapidityResult>,
    pub pass: bool,
}

pub fn write_boost_csv<W: Write>(w: W, rep: &BoostReport) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["rapidity", "max_chord", "max_deviation", "pass"])?;
    for r in &rep.results {
        out.write_record([
            fmt_f64(r.rapidity),
            fmt_f64(r.max_chord),
            fmt_f64(r.max_deviation),
            r.pass.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_boost_csv<R: Read>(r: R) -> IoResult<Vec<RapidityResult>> {
    Ok(csv::Reader::from_reader(r).deserialize().collect::<csv::Result<_>>()?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindReport {
    pub kind: String,
    pub omega: f64,
    pub a: f64,
    pub target: f64,
    pub measure: String,
    pub bracket: [f64; 2],
    #[serde(rename = "V")]
    pub v: f64,
    pub abs_r: f64,
    pub refl2: f64,
}

pub fn write_find_csv<W: Write>(w: W, rep: &FindReport) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "kind", "omega", "a", "target", "measure", "V_lo", "V_hi", "V", "abs_r", "refl2",
    ])?;
    out.write_record([
        rep.kind.clone(),
        fmt_f64(rep.omega),
        fmt_f64(rep.a),
        fmt_f64(rep.target),
        rep.measure.clone(),
        fmt_f64(rep.bracket[0]),
        fmt_f64(rep.bracket[1]),
        fmt_f64(rep.v),
        fmt_f64(rep.abs_r),
        fmt_f64(rep.refl2),
    ])?;
    out.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).map_err(serde_json::Error::io)
}

pub fn read_json<R: Read, T: for<'de> Deserialize<'de>>(r: R) -> serde_json::Result<T> {
    serde_json::from_reader(r)
}
