//! Three-region stationary field, its exact gradients and the polar
//! decomposition `φ = exp(P + iS)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourvec::FourVector;
use crate::scattering::ScatteringSolution;

/// Relative density below which a sample is flagged as a node. The reference
/// density is the solution's upper envelope of `|ψ|²`.
pub const NODE_EPS: f64 = 1e-10;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PotentialKind {
    /// Couples to the mass: `m0 → m0 + V`.
    Scalar,
    /// Couples to the frequency (unit positive charge): `ω → ω − V`.
    Electrostatic,
}

impl PotentialKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Scalar => "scalar",
            Self::Electrostatic => "electrostatic",
        }
    }
}

impl fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PotentialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scalar" => Ok(Self::Scalar),
            "electrostatic" => Ok(Self::Electrostatic),
            other => Err(Error::InvalidParameter {
                field: "kind",
                reason: format!("unknown potential kind `{other}` (expected scalar or electrostatic)"),
            }),
        }
    }
}

/// A square barrier of height `potential` on `0 ≤ x ≤ width`, probed by a
/// stationary wave of frequency `omega` and rest mass `m0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec {
    pub m0: f64,
    pub omega: f64,
    pub potential: f64,
    pub width: f64,
    pub kind: PotentialKind,
}

impl BarrierSpec {
    pub fn new(m0: f64, omega: f64, potential: f64, width: f64, kind: PotentialKind) -> Result<Self> {
        let spec = Self {
            m0,
            omega,
            potential,
            width,
            kind,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Build from the incident momentum `k1` via `ω = √(k1² + m0²)`.
    pub fn from_momentum(k1: f64, m0: f64, potential: f64, width: f64, kind: PotentialKind) -> Result<Self> {
        if !(k1.is_finite() && k1 > 0.0) {
            return Err(Error::InvalidParameter {
                field: "k",
                reason: format!("incident momentum must be positive and finite, got {k1}"),
            });
        }
        Self::new(m0, k1.hypot(m0), potential, width, kind)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m0.is_finite() && self.m0 > 0.0) {
            return Err(invalid("m", format!("rest mass must be positive, got {}", self.m0)));
        }
        if !self.omega.is_finite() {
            return Err(invalid(
                "omega",
                format!("frequency must be finite, got {}", self.omega),
            ));
        }
        if self.omega <= self.m0 {
            return Err(Error::SubThreshold {
                omega: self.omega,
                m0: self.m0,
            });
        }
        if !(self.potential.is_finite() && self.potential >= 0.0) {
            return Err(invalid(
                "V",
                format!("potential must be non-negative, got {}", self.potential),
            ));
        }
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(invalid(
                "a",
                format!("barrier width must be positive, got {}", self.width),
            ));
        }
        Ok(())
    }

    pub fn incident_momentum(&self) -> f64 {
        ((self.omega - self.m0) * (self.omega + self.m0)).sqrt()
    }
}

fn invalid(field: &'static str, reason: String) -> Error {
    Error::InvalidParameter { field, reason }
}

/// I: `x < 0`, II: `0 ≤ x ≤ a`, III: `x > a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Incident,
    Barrier,
    Transmitted,
}

impl Region {
    pub fn of(x: f64, width: f64) -> Self {
        if x < 0.0 {
            Self::Incident
        } else if x <= width {
            Self::Barrier
        } else {
            Self::Transmitted
        }
    }

    pub fn index(self) -> usize {
        match self {
            Self::Incident => 0,
            Self::Barrier => 1,
            Self::Transmitted => 2,
        }
    }
}

/// Spatial part of the field in one region:
/// `amp_plus·e^{ik(x − anchor_plus)} + amp_minus·e^{−ik(x − anchor_minus)}`.
///
/// Each basis function is anchored where it is largest inside its region, so
/// for an evanescent barrier (`Im k > 0`) neither term overflows however wide
/// the barrier is. Region I is anchored at 0 with `amp_plus = 1`, `amp_minus = R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionWave {
    pub region: Region,
    pub amp_plus: Complex64,
    pub amp_minus: Complex64,
    pub anchor_plus: f64,
    pub anchor_minus: f64,
    pub k: Complex64,
    pub omega: f64,
    pub potential: f64,
}

impl RegionWave {
    /// `[ψ, ψ′, ψ″]` at `x`, differentiating the plane-wave forms.
    pub fn psi(&self, x: f64) -> [Complex64; 3] {
        let fwd = self.amp_plus * (I * self.k * (x - self.anchor_plus)).exp();
        let bwd = self.amp_minus * (-I * self.k * (x - self.anchor_minus)).exp();
        let psi = fwd + bwd;
        let dpsi = I * self.k * (fwd - bwd);
        let d2psi = -self.k * self.k * psi;
        [psi, dpsi, d2psi]
    }
}

/// Mass and potential seen by the field at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalCoupling {
    pub m0: f64,
    pub potential: f64,
    pub kind: PotentialKind,
}

impl LocalCoupling {
    pub fn effective_mass(&self) -> f64 {
        match self.kind {
            PotentialKind::Scalar => self.m0 + self.potential,
            PotentialKind::Electrostatic => self.m0,
        }
    }

    /// Kinetic frequency: `ω − V` for electrostatic coupling, `ω` otherwise.
    pub fn kinetic_frequency(&self, omega: f64) -> f64 {
        match self.kind {
            PotentialKind::Scalar => omega,
            PotentialKind::Electrostatic => omega - self.potential,
        }
    }

    /// Shift added to `∂_t S` by minimal coupling.
    pub fn time_shift(&self) -> f64 {
        match self.kind {
            PotentialKind::Scalar => 0.0,
            PotentialKind::Electrostatic => self.potential,
        }
    }
}

/// Log-gradients of the field: `∂_μφ = φ(P_μ + iS_μ)`, covariant components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarGradients {
    pub p: FourVector,
    pub s: FourVector,
}

/// The field and its exact derivatives at one event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub t: f64,
    pub x: f64,
    pub region: Region,
    /// Potential height in the evaluated region.
    pub potential: f64,
    pub phi: Complex64,
    /// `(∂_t φ, ∂_x φ)`.
    pub dphi: [Complex64; 2],
    /// `(∂_t² φ, ∂_x² φ)`.
    pub ddphi: [Complex64; 2],
    pub absphi2: f64,
    /// `None` at nodes.
    pub polar: Option<PolarGradients>,
    pub at_node: bool,
}

impl ScatteringSolution {
    /// Field at `(t, x)` using the wave of the region containing `x`.
    pub fn evaluate(&self, t: f64, x: f64) -> FieldSample {
        self.evaluate_in(Region::of(x, self.spec.width), t, x)
    }

    /// Field at `(t, x)` using the analytic continuation of `region`'s wave.
    pub fn evaluate_in(&self, region: Region, t: f64, x: f64) -> FieldSample {
        let wave = &self.waves[region.index()];
        let [psi, dpsi, d2psi] = wave.psi(x);
        let omega = self.spec.omega;
        let phase = Complex64::from_polar(1.0, -omega * t);
        let phi = psi * phase;
        let dphi = [-I * omega * phi, dpsi * phase];
        let ddphi = [-omega * omega * phi, d2psi * phase];
        let absphi2 = phi.norm_sqr();
        let at_node = absphi2 < NODE_EPS * self.density_scale;
        let polar = (!at_node).then(|| {
            let zt = dphi[0] / phi;
            let zx = dphi[1] / phi;
            PolarGradients {
                p: FourVector::new(zt.re, zx.re),
                s: FourVector::new(zt.im, zx.im),
            }
        });
        FieldSample {
            t,
            x,
            region,
            potential: wave.potential,
            phi,
            dphi,
            ddphi,
            absphi2,
            polar,
            at_node,
        }
    }

    pub fn coupling(&self, region: Region) -> LocalCoupling {
        LocalCoupling {
            m0: self.spec.m0,
            potential: self.waves[region.index()].potential,
            kind: self.spec.kind,
        }
    }
}

/// `P_μ = Re(∂_μφ/φ)`, `S_μ = Im(∂_μφ/φ)`.
pub fn polar_gradients(sample: &FieldSample) -> Result<PolarGradients> {
    sample.polar.ok_or(Error::Node {
        t: sample.t,
        x: sample.x,
    })
}

/// `∂_μS ∂^μS − □R/R − m0²` with `R = |φ|`, everything from exact derivatives.
///
/// Only meaningful where the potential vanishes.
pub fn hj_residual(sample: &FieldSample, m0: f64) -> Result<f64> {
    if sample.potential != 0.0 {
        return Err(Error::NotFreeRegion {
            potential: sample.potential,
        });
    }
    let pg = polar_gradients(sample)?;
    let zt = sample.dphi[0] / sample.phi;
    let zx = sample.dphi[1] / sample.phi;
    // ∂_μ∂_μ P = Re(∂_μ²φ/φ − (∂_μφ/φ)²)
    let p_tt = (sample.ddphi[0] / sample.phi - zt * zt).re;
    let p_xx = (sample.ddphi[1] / sample.phi - zx * zx).re;
    let box_r_over_r = (p_tt - p_xx) + pg.p.norm2();
    Ok(pg.s.norm2() - box_r_over_r - m0 * m0)
}

/// Stationary current `j(x) = Im(ψ* ∂_xψ)`.
pub fn conserved_current(sol: &ScatteringSolution, x: f64) -> f64 {
    let wave = &sol.waves[Region::of(x, sol.spec.width).index()];
    let [psi, dpsi, _] = wave.psi(x);
    (psi.conj() * dpsi).im
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::match_boundaries;

    fn solve(k: f64, v: f64, a: f64, kind: PotentialKind) -> ScatteringSolution {
        match_boundaries(&BarrierSpec::from_momentum(k, 1.0, v, a, kind).unwrap()).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(
            BarrierSpec::new(1.0, 0.5, 0.0, 1.0, PotentialKind::Scalar),
            Err(Error::SubThreshold { .. })
        ));
        assert!(matches!(
            BarrierSpec::new(1.0, 1.0, 0.0, 1.0, PotentialKind::Scalar),
            Err(Error::SubThreshold { .. })
        ));
        assert!(BarrierSpec::new(1.0, 1.5, 0.0, 0.0, PotentialKind::Scalar).is_err());
        assert!(BarrierSpec::new(1.0, 1.5, -0.1, 1.0, PotentialKind::Scalar).is_err());
        assert!(BarrierSpec::new(0.0, 1.5, 0.1, 1.0, PotentialKind::Scalar).is_err());
        assert!("vector".parse::<PotentialKind>().is_err());
        assert_eq!("scalar".parse::<PotentialKind>().unwrap(), PotentialKind::Scalar);
    }

    #[test]
    fn free_solution_is_a_plane_wave() {
        let sol = solve(0.95, 0.0, 12.0, PotentialKind::Scalar);
        let omega = sol.spec.omega;
        for &(t, x) in &[(0.0, -3.0), (1.7, 0.4), (-2.0, 20.0), (5.5, 6.0)] {
            let s = sol.evaluate(t, x);
            let expect = Complex64::from_polar(1.0, 0.95 * x - omega * t);
            assert!((s.phi - expect).norm() < 1e-12, "{t} {x}");
            assert!((s.absphi2 - 1.0).abs() < 1e-12);
            let pg = polar_gradients(&s).unwrap();
            assert!(pg.p.t.abs() < 1e-12 && pg.p.x.abs() < 1e-12);
            assert!((pg.s.t + omega).abs() < 1e-12);
            assert!((pg.s.x - 0.95).abs() < 1e-12);
            assert!(hj_residual(&s, 1.0).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn evanescent_decay_polar_gradients() {
        // Pure decay e^{-κx}e^{-iωt} as a region wave.
        let kappa = 0.8;
        let wave = RegionWave {
            region: Region::Barrier,
            amp_plus: Complex64::new(1.0, 0.0),
            amp_minus: Complex64::new(0.0, 0.0),
            anchor_plus: 0.0,
            anchor_minus: 0.0,
            k: Complex64::new(0.0, kappa),
            omega: 1.3,
            potential: 1.0,
        };
        let [psi, dpsi, _] = wave.psi(0.7);
        let z = dpsi / psi;
        assert!((z.re + kappa).abs() < 1e-14);
        assert!(z.im.abs() < 1e-14);
        assert!((psi.re - (-kappa * 0.7f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn gradients_match_central_differences_of_log_phi() {
        let sol = solve(0.95, 0.36, 12.0, PotentialKind::Electrostatic);
        for &(t, x) in &[(0.3, -1.1), (2.0, -7.25), (0.0, 4.0), (1.0, 13.0)] {
            let s = sol.evaluate(t, x);
            let pg = polar_gradients(&s).unwrap();
            let h = 1e-5;
            let ln = |t: f64, x: f64| sol.evaluate(t, x).phi.ln();
            let dt = (ln(t + h, x) - ln(t - h, x)) / (2.0 * h);
            let dx = (ln(t, x + h) - ln(t, x - h)) / (2.0 * h);
            // The imaginary part of ln may wrap by 2π; the wrap never happens
            // for these points at this step size.
            assert!((dt.re - pg.p.t).abs() < 1e-6);
            assert!((dt.im - pg.s.t).abs() < 1e-6);
            assert!((dx.re - pg.p.x).abs() < 1e-6);
            assert!((dx.im - pg.s.x).abs() < 1e-6);
        }
    }

    #[test]
    fn gradient_identity_holds_off_nodes() {
        let sol = solve(0.95, 0.36, 12.0, PotentialKind::Electrostatic);
        for i in 0..200 {
            let x = -20.0 + 0.17 * i as f64;
            let s = sol.evaluate(0.37 * i as f64, x);
            let pg = polar_gradients(&s).unwrap();
            for (mu, (p, sv)) in [(pg.p.t, pg.s.t), (pg.p.x, pg.s.x)].into_iter().enumerate() {
                let rebuilt = s.phi * Complex64::new(p, sv);
                assert!((rebuilt - s.dphi[mu]).norm() <= 1e-12 * s.dphi[mu].norm().max(1e-300));
            }
        }
    }

    #[test]
    fn node_flag_and_error() {
        // Opaque barrier: |R| = 1 to machine precision, so region I has true nodes.
        let sol = solve(0.95, 1.3793, 40.0, PotentialKind::Electrostatic);
        let k1 = sol.k1;
        let x_node = (sol.r.arg() - std::f64::consts::PI) / (2.0 * k1);
        let s = sol.evaluate(0.0, x_node);
        assert!(s.at_node, "absphi2 = {}", s.absphi2);
        assert!(matches!(polar_gradients(&s), Err(Error::Node { .. })));
        assert!(matches!(hj_residual(&s, 1.0), Err(Error::Node { .. })));
    }

    #[test]
    fn hj_residual_rejects_barrier_points() {
        let sol = solve(0.95, 0.36, 12.0, PotentialKind::Scalar);
        let s = sol.evaluate(0.0, 5.0);
        assert!(matches!(hj_residual(&s, 1.0), Err(Error::NotFreeRegion { .. })));
    }

    #[test]
    fn hj_residual_vanishes_for_superposition() {
        let sol = solve(0.95, 0.36, 12.0, PotentialKind::Electrostatic);
        for i in 0..50 {
            let x = -30.0 + 0.6 * i as f64;
            let s = sol.evaluate(0.1 * i as f64, x);
            assert!(hj_residual(&s, 1.0).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn current_free_and_total_reflection() {
        let free = solve(0.95, 0.0, 12.0, PotentialKind::Electrostatic);
        for x in [-5.0, 3.0, 20.0] {
            assert!((conserved_current(&free, x) - 0.95).abs() < 1e-12);
        }
        let opaque = solve(0.95, 1.3793, 40.0, PotentialKind::Electrostatic);
        for x in [-5.0, -0.3, 2.0, 39.0, 45.0] {
            assert!(conserved_current(&opaque, x).abs() < 1e-12);
        }
    }
}
