//! Energy-momentum tensor of the stationary field and its time-like eigenflow.
//!
//! The tensor is normalised as
//!
//! ```text
//! T_μν = ½(D_μφ* D_νφ + D_νφ* D_μφ) − ½η_μν(D^αφ* D_αφ − m²|φ|²)
//! ```
//!
//! with `D_t = ∂_t + iV` for an electrostatic barrier and `m = m0 + V` for a
//! scalar one. In polar variables this reads
//! `T^μ_ν = ½|φ|²[m² − (P·P + S·S)]δ^μ_ν + |φ|²(P^μP_ν + S^μS_ν)`, so the
//! time-like eigenvalue is `λ = ½|φ|²[m² + √((P·P − S·S)² + 4(P·S)²)]`,
//! equivalently `½[m²|φ|² + |D_μφ D^μφ|]`. A plane wave has `λ = m²|φ|²`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{FieldSample, LocalCoupling, PolarGradients, Region, NODE_EPS};
use crate::fourvec::FourVector;
use crate::scattering::ScatteringSolution;

/// Mixed components `T^μ_ν`; rows are the upper index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedTensor {
    pub tt: f64,
    pub tx: f64,
    pub xt: f64,
    pub xx: f64,
}

impl MixedTensor {
    /// `T^μ_ν w^ν` for a contravariant `w`.
    pub fn apply(&self, w: FourVector) -> FourVector {
        FourVector::new(self.tt * w.t + self.tx * w.x, self.xt * w.t + self.xx * w.x)
    }

    pub fn max_abs(&self) -> f64 {
        [self.tt, self.tx, self.xt, self.xx]
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max)
    }
}

/// Time-like and space-like eigenvectors (contravariant, unit norm) with
/// their eigenvalues. `w_time.t > 0`; `w_space.x ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenFlow {
    pub w_time: FourVector,
    pub w_space: FourVector,
    pub lambda_time: f64,
    pub lambda_space: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticEigen {
    pub theta: f64,
    pub flow: EigenFlow,
}

/// Gauge-covariant gradient `(D_t φ, D_x φ)`.
pub fn kinetic_gradient(sample: &FieldSample, coupling: &LocalCoupling) -> [Complex64; 2] {
    let shift = Complex64::new(0.0, coupling.time_shift());
    [sample.dphi[0] + shift * sample.phi, sample.dphi[1]]
}

/// Polar gradients with `S_t` shifted by the electrostatic potential.
pub fn kinetic_polar(sample: &FieldSample, coupling: &LocalCoupling) -> Result<PolarGradients> {
    let mut pg = crate::field::polar_gradients(sample)?;
    pg.s.t += coupling.time_shift();
    Ok(pg)
}

/// Tensor from a covariant (kinetic) gradient. Contains no division, so it is
/// finite at nodes.
pub fn tensor_from_gradient(gradient: [Complex64; 2], absphi2: f64, m_eff: f64) -> MixedTensor {
    let [ut, ux] = gradient;
    let (nt, nx) = (ut.norm_sqr(), ux.norm_sqr());
    let mass = m_eff * m_eff * absphi2;
    let t_tt = 0.5 * (nt + nx + mass);
    let t_xx = 0.5 * (nt + nx - mass);
    let t_tx = (ut.conj() * ux).re;
    MixedTensor {
        tt: t_tt,
        tx: t_tx,
        xt: -t_tx,
        xx: -t_xx,
    }
}

/// Energy-momentum tensor at a sample, built directly from the field bilinears.
pub fn stress_energy(sample: &FieldSample, coupling: &LocalCoupling) -> MixedTensor {
    tensor_from_gradient(
        kinetic_gradient(sample, coupling),
        sample.absphi2,
        coupling.effective_mass(),
    )
}

/// The same tensor from kinetic polar gradients.
pub fn stress_energy_polar(pg: &PolarGradients, m_eff: f64, absphi2: f64) -> MixedTensor {
    let (p, s) = (pg.p, pg.s);
    let base = 0.5 * absphi2 * (m_eff * m_eff - (p.norm2() + s.norm2()));
    let pu = p.flip_index();
    let su = s.flip_index();
    MixedTensor {
        tt: base + absphi2 * (pu.t * p.t + su.t * s.t),
        tx: absphi2 * (pu.t * p.x + su.t * s.x),
        xt: absphi2 * (pu.x * p.t + su.x * s.t),
        xx: base + absphi2 * (pu.x * p.x + su.x * s.x),
    }
}

fn normalise_time(v: FourVector) -> FourVector {
    let w = v * (1.0 / v.norm2().sqrt());
    if w.t < 0.0 {
        -w
    } else {
        w
    }
}

fn normalise_space(v: FourVector) -> FourVector {
    let w = v * (1.0 / (-v.norm2()).sqrt());
    if w.x < 0.0 {
        -w
    } else {
        w
    }
}

fn classify(a: (FourVector, f64), b: (FourVector, f64)) -> Result<EigenFlow> {
    let (na, nb) = (a.0.norm2(), b.0.norm2());
    let (time, space) = if na > 0.0 && nb < 0.0 {
        (a, b)
    } else if nb > 0.0 && na < 0.0 {
        (b, a)
    } else {
        return Err(Error::BothNull);
    };
    Ok(EigenFlow {
        w_time: normalise_time(time.0),
        w_space: normalise_space(space.0),
        lambda_time: time.1,
        lambda_space: space.1,
    })
}

/// Eigenflow from the mixing parameter
/// `sinh θ = (P·P − S·S)/(2P·S)`; the eigenvectors are `S + e^θ P` and
/// `S − e^{−θ} P` (covariant, unnormalised).
///
/// Returns [`Error::Degenerate`] when `|P·S| < 1e-12(|P||S| + m²)`, where θ
/// is undefined and [`eigen_numeric`] must be used instead.
pub fn eigen_analytic(p: FourVector, s: FourVector, m_eff: f64, absphi2: f64) -> Result<AnalyticEigen> {
    let (pp, ss, ps) = (p.norm2(), s.norm2(), p.dot(s));
    if ps.abs() < 1e-12 * (p.euclidean_norm() * s.euclidean_norm() + m_eff * m_eff) {
        return Err(Error::Degenerate { p_dot_s: ps });
    }
    let theta = ((pp - ss) / (2.0 * ps)).asinh();
    let plus_vec = s + p * theta.exp();
    let minus_vec = s - p * (-theta).exp();
    let root = ((pp - ss).powi(2) + 4.0 * ps * ps).sqrt();
    let lambda_hi = 0.5 * absphi2 * (m_eff * m_eff + root);
    let lambda_lo = 0.5 * absphi2 * (m_eff * m_eff - root);
    // S + e^θ P carries the larger eigenvalue when P·S > 0.
    let (lam_plus, lam_minus) = if ps > 0.0 {
        (lambda_hi, lambda_lo)
    } else {
        (lambda_lo, lambda_hi)
    };
    let flow = classify((plus_vec.flip_index(), lam_plus), (minus_vec.flip_index(), lam_minus))?;
    Ok(AnalyticEigen { theta, flow })
}

/// Direct eigen-decomposition of the 2×2 mixed tensor, eigenvectors sorted
/// by the sign of their Minkowski norm.
pub fn eigen_numeric(t: &MixedTensor) -> Result<EigenFlow> {
    let (a, b, c, d) = (t.tt, t.tx, t.xt, t.xx);
    let scale = t.max_abs();
    let half_tr = 0.5 * (a + d);
    let hd = 0.5 * (a - d);
    let disc = hd * hd + b * c;
    if b == 0.0 && c == 0.0 && hd == 0.0 {
        // Multiple of the identity: every direction is an eigenvector.
        return Ok(EigenFlow {
            w_time: FourVector::new(1.0, 0.0),
            w_space: FourVector::new(0.0, 1.0),
            lambda_time: a,
            lambda_space: a,
        });
    }
    if !(disc > 1e-28 * scale * scale) {
        return Err(Error::BothNull);
    }
    let sq = disc.sqrt();
    let (hi, lo) = (half_tr + sq, half_tr - sq);
    // Pick the null-space row without cancellation.
    let v_hi = if hd >= 0.0 {
        FourVector::new(sq + hd, c)
    } else {
        FourVector::new(b, sq - hd)
    };
    let v_lo = if hd >= 0.0 {
        FourVector::new(b, -sq - hd)
    } else {
        FourVector::new(hd - sq, c)
    };
    classify((v_hi, hi), (v_lo, lo))
}

/// Non-relativistic velocity `Im(ψ′/ψ)`.
pub fn velocity_schrodinger(sol: &ScatteringSolution, x: f64) -> Result<f64> {
    let wave = sol.wave(Region::of(x, sol.spec.width));
    let [psi, dpsi, _] = wave.psi(x);
    if psi.norm_sqr() < NODE_EPS * sol.density_scale() {
        return Err(Error::Node { t: 0.0, x });
    }
    Ok((dpsi / psi).im)
}

/// `v = ∂_xS / −(∂_tS + eV)`, i.e. `S_x/(ω − V)` for an electrostatic
/// barrier and `S_x/ω` for a scalar one.
pub fn velocity_debroglie(sample: &FieldSample, coupling: &LocalCoupling) -> Result<f64> {
    let pg = kinetic_polar(sample, coupling)?;
    Ok(pg.s.x / -pg.s.t)
}

/// `W^x/W^t` of the time-like eigenvector, from the direct tensor.
pub fn velocity_eigen(sample: &FieldSample, coupling: &LocalCoupling) -> Result<f64> {
    Ok(eigen_numeric(&stress_energy(sample, coupling))?.w_time.three_velocity())
}

/// Everything the tensor analysis produces at one event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmtSample {
    pub field: FieldSample,
    pub tensor: MixedTensor,
    /// `None` at nodes and where `P·S` vanishes.
    pub theta: Option<f64>,
    pub lambda_time: f64,
    pub lambda_space: f64,
    pub w_time: FourVector,
    pub w_space: FourVector,
    pub v_s: Option<f64>,
    pub v_db: Option<f64>,
    pub v_e: Option<f64>,
}

pub fn emt_sample(sol: &ScatteringSolution, t: f64, x: f64) -> Result<EmtSample> {
    let field = sol.evaluate(t, x);
    let coupling = sol.coupling(field.region);
    let tensor = stress_energy(&field, &coupling);
    let flow = eigen_numeric(&tensor)?;
    let theta = kinetic_polar(&field, &coupling)
        .ok()
        .and_then(|pg| eigen_analytic(pg.p, pg.s, coupling.effective_mass(), field.absphi2).ok())
        .map(|e| e.theta);
    Ok(EmtSample {
        field,
        tensor,
        theta,
        lambda_time: flow.lambda_time,
        lambda_space: flow.lambda_space,
        w_time: flow.w_time,
        w_space: flow.w_space,
        v_s: polar_sx(&field),
        v_db: velocity_debroglie(&field, &coupling).ok(),
        v_e: Some(flow.w_time.three_velocity()),
    })
}

fn polar_sx(field: &FieldSample) -> Option<f64> {
    field.polar.map(|pg| pg.s.x)
}

/// `λ` at the density maxima and minima in front of the barrier, for
/// reflection amplitude `|R|` and momentum `k1`.
///
/// At a maximum `λ = m²(1 + |R|)² + 2k²|R|`. At a minimum
/// `λ = ½[m²(1 − |R|)² + |4k²|R| − m²(1 − |R|)²|]`, which is `2k²|R|` whenever
/// `4k²|R| ≥ m²(1 − |R|)²` and in particular stays `2k²` at total reflection.
pub fn lambda_extrema(k1: f64, abs_r: f64, m0: f64) -> (f64, f64) {
    let m2 = m0 * m0;
    let cross = 2.0 * k1 * k1 * abs_r;
    let hi = m2 * (1.0 + abs_r).powi(2) + cross;
    let dip = m2 * (1.0 - abs_r).powi(2);
    let lo = 0.5 * (dip + (2.0 * cross - dip).abs());
    (hi, lo)
}
