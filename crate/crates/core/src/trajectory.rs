//! World lines through the stationary velocity fields, direction fields and
//! Lorentz re-coordinatisation of world lines.
//!
//! Velocity fields are piecewise smooth: each barrier region has its own
//! analytic field and the pieces meet at `x = 0` and `x = a`. The integrator
//! keeps a step inside one piece (evaluating that piece's analytic
//! continuation), locates the crossing by bisection and restarts in the next
//! piece. If the new piece's velocity sends the trajectory straight back, the
//! boundary is a sink and the world line ends there.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::emt::{
    eigen_numeric, emt_sample, kinetic_gradient, tensor_from_gradient, velocity_debroglie, velocity_eigen,
};
use crate::error::{Error, Result};
use crate::field::{polar_gradients, Region};
use crate::fourvec::FourVector;
use crate::scattering::ScatteringSolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VelocityLaw {
    /// `Im(ψ′/ψ)`, the non-relativistic guidance law.
    Schrodinger,
    /// `∂_xS / −(∂_tS + eV)`.
    DeBroglie,
    /// Time-like eigenvector of the energy-momentum tensor.
    Eigen,
}

impl VelocityLaw {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Schrodinger => "schrodinger",
            Self::DeBroglie => "debroglie",
            Self::Eigen => "eigen",
        }
    }

    pub fn is_subluminal(self) -> bool {
        self == Self::Eigen
    }
}

impl fmt::Display for VelocityLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VelocityLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "schrodinger" => Ok(Self::Schrodinger),
            "debroglie" => Ok(Self::DeBroglie),
            "eigen" => Ok(Self::Eigen),
            other => Err(Error::InvalidParameter {
                field: "law",
                reason: format!("unknown velocity law `{other}` (expected schrodinger, debroglie or eigen)"),
            }),
        }
    }
}

/// A piecewise-smooth velocity field `dx/dt = v(t, x)`.
pub trait VelocityField: Sync {
    fn law(&self) -> VelocityLaw;

    /// Which smooth piece contains the event.
    fn piece_at(&self, t: f64, x: f64) -> Region;

    /// Velocity from the analytic continuation of `piece`.
    fn velocity_in(&self, piece: Region, t: f64, x: f64) -> Result<f64>;

    fn velocity(&self, t: f64, x: f64) -> Result<f64> {
        self.velocity_in(self.piece_at(t, x), t, x)
    }
}

/// Velocity law applied to a stationary solution in the barrier rest frame.
#[derive(Debug, Clone, Copy)]
pub struct StationaryField<'a> {
    pub sol: &'a ScatteringSolution,
    pub law: VelocityLaw,
}

impl<'a> StationaryField<'a> {
    pub fn new(sol: &'a ScatteringSolution, law: VelocityLaw) -> Self {
        Self { sol, law }
    }
}

impl VelocityField for StationaryField<'_> {
    fn law(&self) -> VelocityLaw {
        self.law
    }

    fn piece_at(&self, _t: f64, x: f64) -> Region {
        Region::of(x, self.sol.spec.width)
    }

    fn velocity_in(&self, piece: Region, t: f64, x: f64) -> Result<f64> {
        let sample = self.sol.evaluate_in(piece, t, x);
        let coupling = self.sol.coupling(piece);
        match self.law {
            VelocityLaw::Schrodinger => Ok(polar_gradients(&sample)?.s.x),
            VelocityLaw::DeBroglie => velocity_debroglie(&sample, &coupling),
            VelocityLaw::Eigen => velocity_eigen(&sample, &coupling),
        }
    }
}

/// The same physical field described in a frame moving with velocity
/// `tanh(rapidity)` relative to the barrier.
///
/// For the eigen law the field gradient is transformed as a covector and the
/// tensor is rebuilt and re-diagonalised in the moving frame; the other laws
/// compose their rest-frame velocity with the frame velocity.
#[derive(Debug, Clone, Copy)]
pub struct BoostedField<'a> {
    pub rest: StationaryField<'a>,
    pub rapidity: f64,
}

impl BoostedField<'_> {
    fn rest_event(&self, t: f64, x: f64) -> FourVector {
        FourVector::new(t, x).boost(-self.rapidity)
    }
}

impl VelocityField for BoostedField<'_> {
    fn law(&self) -> VelocityLaw {
        self.rest.law
    }

    fn piece_at(&self, t: f64, x: f64) -> Region {
        let e = self.rest_event(t, x);
        self.rest.piece_at(e.t, e.x)
    }

    fn velocity_in(&self, piece: Region, t: f64, x: f64) -> Result<f64> {
        let e = self.rest_event(t, x);
        if self.rest.law != VelocityLaw::Eigen {
            let v = self.rest.velocity_in(piece, e.t, e.x)?;
            return Ok(boost_velocity(v, self.rapidity.tanh()));
        }
        let sol = self.rest.sol;
        let sample = sol.evaluate_in(piece, e.t, e.x);
        let coupling = sol.coupling(piece);
        let [ut, ux] = kinetic_gradient(&sample, &coupling);
        let (sh, ch) = (self.rapidity.sinh(), self.rapidity.cosh());
        let moving: [Complex64; 2] = [ut * ch + ux * sh, ut * sh + ux * ch];
        let tensor = tensor_from_gradient(moving, sample.absphi2, coupling.effective_mass());
        Ok(eigen_numeric(&tensor)?.w_time.three_velocity())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WorldPoint {
    pub t: f64,
    pub x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// Reached the requested end time.
    Completed,
    /// A velocity law undefined at nodes was driven into (or unresolvably
    /// close to) a node.
    NodeApproach { t: f64, x: f64 },
    /// Reached a region boundary whose far side points back.
    BoundarySink { t: f64, x: f64 },
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Completed => "completed",
            Self::NodeApproach { .. } => "node_approach",
            Self::BoundarySink { .. } => "boundary_sink",
        }
    }
}

/// Fixed-step RK4 with local halving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    /// Halve a step while the stage velocities spread by more than
    /// `change_tol` relative to their largest magnitude.
    pub adaptive: bool,
    pub change_tol: f64,
    pub max_halvings: u32,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            adaptive: true,
            change_tol: 0.1,
            max_halvings: 12,
        }
    }
}

impl StepConfig {
    pub fn with_dt(dt: f64) -> Self {
        Self { dt, ..Self::default() }
    }
}

const STAGNATION_SPEED: f64 = 1e-8;
const STAGNATION_STEPS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub law: VelocityLaw,
    pub t0: f64,
    pub x0: f64,
    /// Strictly increasing in `t`.
    pub points: Vec<WorldPoint>,
    pub method: &'static str,
    pub dt: f64,
    pub adaptive: bool,
    pub termination: Termination,
    /// First event of a sustained `|v| < 1e-8` stretch (eigen law only).
    pub stagnation: Option<WorldPoint>,
}

impl Trajectory {
    pub fn end(&self) -> WorldPoint {
        *self.points.last().expect("trajectory has at least its seed point")
    }

    /// Largest `|Δx/Δt|` between consecutive points.
    pub fn max_chord_speed(&self) -> f64 {
        max_chord(&self.points)
    }
}

fn max_chord(points: &[WorldPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| ((w[1].x - w[0].x) / (w[1].t - w[0].t)).abs())
        .fold(0.0, f64::max)
}

struct Integrator<'f, F: VelocityField + ?Sized> {
    field: &'f F,
    cfg: StepConfig,
    t: f64,
    x: f64,
    piece: Region,
    stagnant_run: usize,
    stagnation: Option<WorldPoint>,
}

struct Rk4Step {
    x: f64,
    v_start: f64,
    spread: f64,
    vmax: f64,
}

impl<'f, F: VelocityField + ?Sized> Integrator<'f, F> {
    fn new(field: &'f F, cfg: StepConfig, t0: f64, x0: f64) -> Self {
        Self {
            field,
            cfg,
            t: t0,
            x: x0,
            piece: field.piece_at(t0, x0),
            stagnant_run: 0,
            stagnation: None,
        }
    }

    fn rk4(&self, h: f64) -> Result<Rk4Step> {
        let (t, x, p) = (self.t, self.x, self.piece);
        let f = |t: f64, x: f64| self.field.velocity_in(p, t, x);
        let k1 = f(t, x)?;
        let k2 = f(t + 0.5 * h, x + 0.5 * h * k1)?;
        let k3 = f(t + 0.5 * h, x + 0.5 * h * k2)?;
        let k4 = f(t + h, x + h * k3)?;
        let ks = [k1, k2, k3, k4];
        let lo = ks.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Rk4Step {
            x: x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4),
            v_start: k1,
            spread: hi - lo,
            vmax: lo.abs().max(hi.abs()),
        })
    }

    fn node_stop(&self) -> Termination {
        Termination::NodeApproach { t: self.t, x: self.x }
    }

    /// Advance to `target`, pushing every accepted point into `out` when given.
    fn advance_to(&mut self, target: f64, mut out: Option<&mut Vec<WorldPoint>>) -> Result<Option<Termination>> {
        while self.t < target {
            let remaining = target - self.t;
            let limited = remaining <= self.cfg.dt;
            let mut h = if limited { remaining } else { self.cfg.dt };
            let mut halvings = 0;
            let step = loop {
                let step = match self.rk4(h) {
                    Ok(s) => s,
                    Err(Error::Node { .. }) => return Ok(Some(self.node_stop())),
                    Err(e) => return Err(e),
                };
                if self.cfg.adaptive && step.spread > self.cfg.change_tol * step.vmax + 1e-12 {
                    if halvings < self.cfg.max_halvings {
                        h *= 0.5;
                        halvings += 1;
                        continue;
                    }
                    if !self.field.law().is_subluminal() && step.vmax > 1.0 {
                        return Ok(Some(self.node_stop()));
                    }
                }
                break step;
            };

            let t_new = if limited && halvings == 0 { target } else { self.t + h };
            if self.field.piece_at(t_new, step.x) != self.piece {
                // Restart from the crossing event; it is only recorded when the
                // world line ends there.
                if let Some(stop) = self.cross(h)? {
                    if let Some(out) = out.as_deref_mut() {
                        self.record(out);
                    }
                    return Ok(Some(stop));
                }
                continue;
            }
            self.t = t_new;
            self.x = step.x;
            self.track_stagnation(step.v_start);
            if let Some(out) = out.as_deref_mut() {
                self.record(out);
            }
        }
        if let Some(out) = out {
            if out.last().is_none_or(|p| p.t < self.t) {
                self.record(out);
            }
        }
        Ok(None)
    }

    /// Push the current event, replacing the previous one when the two are
    /// too close in time for a meaningful chord.
    fn record(&self, out: &mut Vec<WorldPoint>) {
        let p = WorldPoint { t: self.t, x: self.x };
        let n = out.len();
        if n > 1 && p.t - out[n - 1].t < 1e-6 * self.cfg.dt {
            out[n - 1] = p;
        } else {
            out.push(p);
        }
    }

    /// Locate the boundary crossing inside a step of length `h` and move
    /// just past it. Returns a termination if the far side is a sink.
    fn cross(&mut self, h: f64) -> Result<Option<Termination>> {
        let min_h = 4.0 * f64::EPSILON * self.t.abs().max(1.0);
        let (mut lo, mut hi) = (0.0, h);
        let mut x_hi = self.rk4(h)?.x;
        while hi - lo > min_h {
            let mid = 0.5 * (lo + hi);
            let x_mid = self.rk4(mid)?.x;
            if self.field.piece_at(self.t + mid, x_mid) == self.piece {
                lo = mid;
            } else {
                hi = mid;
                x_hi = x_mid;
            }
        }
        self.t += hi;
        self.x = x_hi;
        self.piece = self.field.piece_at(self.t, self.x);

        let v = match self.field.velocity_in(self.piece, self.t, self.x) {
            Ok(v) => v,
            Err(Error::Node { .. }) => return Ok(Some(self.node_stop())),
            Err(e) => return Err(e),
        };
        let eps = 1e-9 * self.t.abs().max(1.0);
        if self.field.piece_at(self.t + eps, self.x + v * eps) != self.piece {
            return Ok(Some(Termination::BoundarySink { t: self.t, x: self.x }));
        }
        Ok(None)
    }

    fn track_stagnation(&mut self, v: f64) {
        if self.field.law() != VelocityLaw::Eigen {
            return;
        }
        if v.abs() < STAGNATION_SPEED {
            self.stagnant_run += 1;
            if self.stagnant_run >= STAGNATION_STEPS && self.stagnation.is_none() {
                self.stagnation = Some(WorldPoint { t: self.t, x: self.x });
            }
        } else {
            self.stagnant_run = 0;
        }
    }
}

fn check_step(t0: f64, x0: f64, cfg: &StepConfig) -> Result<()> {
    if !(cfg.dt.is_finite() && cfg.dt > 0.0) {
        return Err(Error::InvalidParameter {
            field: "dt",
            reason: format!("time step must be positive, got {}", cfg.dt),
        });
    }
    if !(t0.is_finite() && x0.is_finite()) {
        return Err(Error::InvalidParameter {
            field: "x0",
            reason: format!("seed event must be finite, got ({t0}, {x0})"),
        });
    }
    Ok(())
}

/// Integrate `dx/dt = v(t, x)` from `(t0, x0)` to `t_end`.
///
/// Errors only on invalid input, including a seed placed on a node for a law
/// that is undefined there. Early terminations are reported in
/// [`Trajectory::termination`] with the world line computed so far.
pub fn integrate_trajectory<F: VelocityField + ?Sized>(
    field: &F,
    x0: f64,
    t0: f64,
    t_end: f64,
    cfg: StepConfig,
) -> Result<Trajectory> {
    check_step(t0, x0, &cfg)?;
    if !(t_end >= t0) {
        return Err(Error::InvalidParameter {
            field: "t_end",
            reason: format!("end time {t_end} precedes start time {t0}"),
        });
    }
    field.velocity(t0, x0)?;
    let mut integ = Integrator::new(field, cfg, t0, x0);
    let mut points = vec![WorldPoint { t: t0, x: x0 }];
    let termination = integ
        .advance_to(t_end, Some(&mut points))?
        .unwrap_or(Termination::Completed);
    Ok(Trajectory {
        law: field.law(),
        t0,
        x0,
        points,
        method: "rk4-halving",
        dt: cfg.dt,
        adaptive: cfg.adaptive,
        termination,
        stagnation: integ.stagnation,
    })
}

/// Integrate from `(t0, x0)` and report the position at each of the
/// increasing `times`. Stops early (returning fewer points) on termination.
pub fn integrate_at_times<F: VelocityField + ?Sized>(
    field: &F,
    x0: f64,
    t0: f64,
    times: &[f64],
    cfg: StepConfig,
) -> Result<(Vec<WorldPoint>, Termination)> {
    check_step(t0, x0, &cfg)?;
    field.velocity(t0, x0)?;
    let mut integ = Integrator::new(field, cfg, t0, x0);
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if let Some(stop) = integ.advance_to(target, None)? {
            return Ok((out, stop));
        }
        out.push(WorldPoint { t: integ.t, x: integ.x });
    }
    Ok((out, Termination::Completed))
}

/// Independent trajectories for each seed, ordered by `x0`.
pub fn integrate_bundle<F: VelocityField + ?Sized>(
    field: &F,
    seeds: &[f64],
    t0: f64,
    t_end: f64,
    cfg: StepConfig,
) -> Vec<Result<Trajectory>> {
    let mut sorted = seeds.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .par_iter()
        .map(|&x0| integrate_trajectory(field, x0, t0, t_end, cfg))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionSample {
    pub t: f64,
    pub x: f64,
    /// `None` where the law is undefined.
    pub v: Option<f64>,
}

/// Velocity on a `t × x` grid, `t` as the slow index.
pub fn direction_field<F: VelocityField + ?Sized>(
    field: &F,
    t_grid: &[f64],
    x_grid: &[f64],
) -> Result<Vec<DirectionSample>> {
    let monotone = |g: &[f64]| g.windows(2).all(|w| w[0] <= w[1]) || g.windows(2).all(|w| w[0] >= w[1]);
    if !monotone(t_grid) {
        return Err(Error::NonMonotoneGrid { name: "t" });
    }
    if !monotone(x_grid) {
        return Err(Error::NonMonotoneGrid { name: "x" });
    }
    Ok(t_grid
        .iter()
        .flat_map(|&t| {
            x_grid.iter().map(move |&x| DirectionSample {
                t,
                x,
                v: field.velocity(t, x).ok(),
            })
        })
        .collect())
}

/// Velocity `v` seen from a frame moving with velocity `beta`.
pub fn boost_velocity(v: f64, beta: f64) -> f64 {
    (v - beta) / (1.0 - v * beta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostedTrajectory {
    pub trajectory: Trajectory,
    pub rapidity: f64,
    pub max_chord: f64,
    /// Set when an eigen-law world line acquires a chord with `|Δx/Δt| ≥ 1`.
    pub causality_violation: bool,
}

/// Passive Lorentz re-coordinatisation of every event of a world line,
/// re-sorted by the new time coordinate.
pub fn boost_trajectory(traj: &Trajectory, rapidity: f64) -> BoostedTrajectory {
    let mut points: Vec<WorldPoint> = traj
        .points
        .iter()
        .map(|p| {
            let e = FourVector::new(p.t, p.x).boost(rapidity);
            WorldPoint { t: e.t, x: e.x }
        })
        .collect();
    points.sort_by(|a, b| a.t.total_cmp(&b.t));
    let seed = FourVector::new(traj.t0, traj.x0).boost(rapidity);
    let map = |p: WorldPoint| {
        let e = FourVector::new(p.t, p.x).boost(rapidity);
        WorldPoint { t: e.t, x: e.x }
    };
    let termination = match traj.termination {
        Termination::Completed => Termination::Completed,
        Termination::NodeApproach { t, x } => {
            let p = map(WorldPoint { t, x });
            Termination::NodeApproach { t: p.t, x: p.x }
        }
        Termination::BoundarySink { t, x } => {
            let p = map(WorldPoint { t, x });
            Termination::BoundarySink { t: p.t, x: p.x }
        }
    };
    let max_chord = max_chord(&points);
    BoostedTrajectory {
        trajectory: Trajectory {
            t0: seed.t,
            x0: seed.x,
            points,
            termination,
            stagnation: traj.stagnation.map(map),
            ..traj.clone()
        },
        rapidity,
        max_chord,
        causality_violation: traj.law == VelocityLaw::Eigen && max_chord >= 1.0,
    }
}

/// Integrate-then-boost against boost-then-integrate for eigen-law world lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceCheck {
    pub rapidity: f64,
    pub max_chord: f64,
    pub max_deviation: f64,
    pub pass: bool,
}

pub const COVARIANCE_TOLERANCE: f64 = 1e-4;

/// For each seed, integrate the eigen-law world line in the barrier frame
/// and boost it, then integrate again from the boosted seed event in the
/// moving frame (where the tensor is re-diagonalised) and compare positions at
/// the boosted event times.
pub fn covariance_check(
    sol: &ScatteringSolution,
    seeds: &[f64],
    t0: f64,
    t_end: f64,
    cfg: StepConfig,
    rapidity: f64,
) -> Result<CovarianceCheck> {
    let rest = StationaryField::new(sol, VelocityLaw::Eigen);
    let moving = BoostedField { rest, rapidity };
    let per_seed: Vec<Result<(f64, f64)>> = seeds
        .par_iter()
        .map(|&x0| {
            let traj = integrate_trajectory(&rest, x0, t0, t_end, cfg)?;
            let boosted = boost_trajectory(&traj, rapidity);
            let pts = &boosted.trajectory.points;
            let times: Vec<f64> = pts[1..].iter().map(|p| p.t).collect();
            let (re, _) = integrate_at_times(&moving, boosted.trajectory.x0, boosted.trajectory.t0, &times, cfg)?;
            let dev = re
                .iter()
                .zip(&pts[1..])
                .map(|(a, b)| (a.x - b.x).abs())
                .fold(0.0, f64::max);
            Ok((boosted.max_chord, dev))
        })
        .collect();
    let mut max_chord = 0.0f64;
    let mut max_deviation = 0.0f64;
    for r in per_seed {
        let (c, d) = r?;
        max_chord = max_chord.max(c);
        max_deviation = max_deviation.max(d);
    }
    Ok(CovarianceCheck {
        rapidity,
        max_chord,
        max_deviation,
        pass: max_chord < 1.0 && max_deviation < COVARIANCE_TOLERANCE,
    })
}

/// `n` equally spaced seeds on `[x_min, x_max]`.
pub fn seeds_uniform(x_min: f64, x_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (x_min + x_max)],
        _ => (0..n)
            .map(|i| x_min + (x_max - x_min) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `n` seeds at the mid-quantiles of the distribution with density `λ(x)`
/// on `[x_min, x_max]` at time `t0`.
pub fn seeds_lambda_weighted(sol: &ScatteringSolution, t0: f64, x_min: f64, x_max: f64, n: usize) -> Result<Vec<f64>> {
    const CELLS: usize = 4096;
    if !(x_max > x_min) {
        return Err(Error::InvalidParameter {
            field: "x_max",
            reason: format!("seed interval [{x_min}, {x_max}] is empty"),
        });
    }
    let xs: Vec<f64> = (0..=CELLS)
        .map(|i| x_min + (x_max - x_min) * i as f64 / CELLS as f64)
        .collect();
    let lam: Vec<f64> = xs
        .iter()
        .map(|&x| emt_sample(sol, t0, x).map_or(0.0, |s| s.lambda_time.max(0.0)))
        .collect();
    let mut cdf = vec![0.0; CELLS + 1];
    for i in 0..CELLS {
        cdf[i + 1] = cdf[i] + 0.5 * (lam[i] + lam[i + 1]) * (xs[i + 1] - xs[i]);
    }
    let total = cdf[CELLS];
    Ok((0..n)
        .map(|i| {
            let q = total * (i as f64 + 0.5) / n as f64;
            let j = cdf.partition_point(|&c| c < q).clamp(1, CELLS);
            let (c0, c1) = (cdf[j - 1], cdf[j]);
            let f = if c1 > c0 { (q - c0) / (c1 - c0) } else { 0.5 };
            xs[j - 1] + f * (xs[j] - xs[j - 1])
        })
        .collect())
}
