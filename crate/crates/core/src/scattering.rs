//! Boundary matching for the three-region barrier problem, closed-form
//! reflection/transmission, potential inversion and parameter scans.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{BarrierSpec, PotentialKind, Region, RegionWave};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Boundary-matched stationary solution.
///
/// Amplitudes follow the textbook convention
/// `ψ = e^{ik1x} + R e^{−ik1x}` (x < 0),
/// `G e^{ik2x} + H e^{−ik2x}` (0 ≤ x ≤ a),
/// `J e^{ik1x}` (x > a).
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringSolution {
    pub spec: BarrierSpec,
    pub k1: f64,
    pub k2: Complex64,
    pub r: Complex64,
    pub g: Complex64,
    pub h: Complex64,
    pub j: Complex64,
    pub refl2: f64,
    pub trans2: f64,
    pub(crate) waves: [RegionWave; 3],
    /// Upper envelope of `|ψ|²` over all x.
    pub(crate) density_scale: f64,
}

impl ScatteringSolution {
    pub fn wave(&self, region: Region) -> &RegionWave {
        &self.waves[region.index()]
    }

    pub fn density_scale(&self) -> f64 {
        self.density_scale
    }

    pub fn regime(&self) -> Regime {
        Regime::of(&self.spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Real `k2` with positive kinetic frequency in the barrier.
    Propagating,
    /// Imaginary (or zero) `k2`.
    Evanescent,
    /// Electrostatic barrier with `V > ω + m0`: real `k2` again.
    Klein,
}

impl Regime {
    pub fn of(spec: &BarrierSpec) -> Self {
        let q = barrier_k2_squared(spec.omega, spec.m0, spec.potential, spec.kind);
        if q <= 0.0 {
            Self::Evanescent
        } else if spec.kind == PotentialKind::Electrostatic && spec.potential > spec.omega + spec.m0 {
            Self::Klein
        } else {
            Self::Propagating
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Propagating => "propagating",
            Self::Evanescent => "evanescent",
            Self::Klein => "klein",
        }
    }
}

fn barrier_k2_squared(omega: f64, m0: f64, v: f64, kind: PotentialKind) -> f64 {
    match kind {
        PotentialKind::Scalar => (omega - m0 - v) * (omega + m0 + v),
        PotentialKind::Electrostatic => (omega - v - m0) * (omega - v + m0),
    }
}

/// Outside and inside wavenumbers.
///
/// `k1` is the positive root. Inside the barrier an evanescent root has
/// positive imaginary part; a propagating electrostatic root carries the sign
/// of `ω − V`, which gives it positive group velocity `k2/(ω − V)`.
pub fn wavenumbers(omega: f64, m0: f64, v: f64, kind: PotentialKind) -> Result<(f64, Complex64)> {
    if !(omega > m0) {
        return Err(Error::SubThreshold { omega, m0 });
    }
    let k1 = ((omega - m0) * (omega + m0)).sqrt();
    let q = barrier_k2_squared(omega, m0, v, kind);
    let k2 = if q >= 0.0 {
        let root = q.sqrt();
        let sign = match kind {
            PotentialKind::Electrostatic if omega - v < 0.0 => -1.0,
            _ => 1.0,
        };
        Complex64::new(sign * root, 0.0)
    } else {
        Complex64::new(0.0, (-q).sqrt())
    };
    Ok((k1, k2))
}

/// Solve the continuity conditions on ψ and ψ′ at `x = 0` and `x = a`.
///
/// The system is assembled in the anchored basis of [`RegionWave`]
/// (unknowns `R, G, H̃ = H e^{−ik2a}, J̃ = J e^{ik1a}`), whose coefficients
/// are all bounded by `max(k1, |k2|)`.
pub fn match_boundaries(spec: &BarrierSpec) -> Result<ScatteringSolution> {
    spec.validate()?;
    let (k1, k2) = wavenumbers(spec.omega, spec.m0, spec.potential, spec.kind)?;
    let singular = Error::SingularSystem {
        k2_re: k2.re,
        k2_im: k2.im,
    };
    if k2.norm() <= 1e-12 * k1 {
        return Err(singular);
    }
    let a = spec.width;
    let e = (I * k2 * a).exp();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let k1c = Complex64::new(k1, 0.0);
    let mut m = [
        [-one, one, e, zero],
        [k1c, k2, -k2 * e, zero],
        [zero, e, one, -one],
        [zero, k2 * e, -k2, -k1c],
    ];
    let mut rhs = [one, k1c, zero, zero];
    let [r, g, h_anchored, j_anchored] = solve4(&mut m, &mut rhs).ok_or(singular)?;

    let waves = [
        RegionWave {
            region: Region::Incident,
            amp_plus: one,
            amp_minus: r,
            anchor_plus: 0.0,
            anchor_minus: 0.0,
            k: k1c,
            omega: spec.omega,
            potential: 0.0,
        },
        RegionWave {
            region: Region::Barrier,
            amp_plus: g,
            amp_minus: h_anchored,
            anchor_plus: 0.0,
            anchor_minus: a,
            k: k2,
            omega: spec.omega,
            potential: spec.potential,
        },
        RegionWave {
            region: Region::Transmitted,
            amp_plus: j_anchored,
            amp_minus: zero,
            anchor_plus: a,
            anchor_minus: a,
            k: k1c,
            omega: spec.omega,
            potential: 0.0,
        },
    ];
    let density_scale = [
        (1.0 + r.norm()).powi(2),
        (g.norm() + h_anchored.norm()).powi(2),
        j_anchored.norm_sqr(),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    Ok(ScatteringSolution {
        spec: *spec,
        k1,
        k2,
        r,
        g,
        h: h_anchored * e,
        j: j_anchored * (-I * k1 * a).exp(),
        refl2: r.norm_sqr(),
        trans2: j_anchored.norm_sqr(),
        waves,
        density_scale,
    })
}

/// Gaussian elimination with partial pivoting. `None` when a pivot vanishes
/// relative to the matrix scale.
fn solve4(m: &mut [[Complex64; 4]; 4], rhs: &mut [Complex64; 4]) -> Option<[Complex64; 4]> {
    let scale = m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    for col in 0..4 {
        let pivot = (col..4).max_by(|&p, &q| m[p][col].norm().total_cmp(&m[q][col].norm()))?;
        if !(m[pivot][col].norm() > 1e-14 * scale) {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..4 {
            let f = m[row][col] / m[col][col];
            for c in col..4 {
                let v = m[col][c];
                m[row][c] -= f * v;
            }
            let v = rhs[col];
            rhs[row] -= f * v;
        }
    }
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for row in (0..4).rev() {
        let mut acc = rhs[row];
        for c in row + 1..4 {
            acc -= m[row][c] * out[c];
        }
        out[row] = acc / m[row][row];
    }
    Some(out)
}

/// `sin²(k2 a)/k2²` continued through `k2 = 0` and onto imaginary `k2`
/// (where it becomes `sinh²(κa)/κ²`). Takes `q = k2²`.
fn sinc2(q: f64, a: f64) -> f64 {
    if q > 0.0 {
        let s = (q.sqrt() * a).sin();
        s * s / q
    } else if q < 0.0 {
        let s = ((-q).sqrt() * a).sinh();
        s * s / -q
    } else {
        a * a
    }
}

/// `(|R|², |T|²)` from the closed-form expressions
///
/// ```text
/// |T|² = 4k1²k2² / D,   |R|² = (k1² − k2²)² sin²(k2a) / D,
/// D = (k1² + k2²)² − (k1² − k2²)² cos²(k2a) = 4k1²k2² + (k1² − k2²)² sin²(k2a)
/// ```
///
/// Both are divided through by `k2²` so that real, zero and imaginary `k2`
/// share one code path and `|R|² + |T|² = 1` holds by construction.
pub fn closed_form_rt(spec: &BarrierSpec) -> Result<(f64, f64)> {
    let (k1, _) = wavenumbers(spec.omega, spec.m0, spec.potential, spec.kind)?;
    let q = barrier_k2_squared(spec.omega, spec.m0, spec.potential, spec.kind);
    let k1sq = k1 * k1;
    let mismatch = (k1sq - q) * (k1sq - q) * sinc2(q, spec.width);
    let four_k1sq = 4.0 * k1sq;
    let refl2 = 1.0 / (1.0 + four_k1sq / mismatch);
    let trans2 = four_k1sq / (four_k1sq + mismatch);
    Ok((refl2, trans2))
}

/// Reflection amplitude with a sign that flips at every zero of `|R|`
/// (resonances `sin(k2 a) = 0` and the matched point `k2² = k1²`).
fn signed_reflection(spec: &BarrierSpec) -> Result<f64> {
    let (k1, _) = wavenumbers(spec.omega, spec.m0, spec.potential, spec.kind)?;
    let q = barrier_k2_squared(spec.omega, spec.m0, spec.potential, spec.kind);
    let a = spec.width;
    let sinc = if q > 0.0 {
        (q.sqrt() * a).sin() / q.sqrt()
    } else if q < 0.0 {
        ((-q).sqrt() * a).sinh() / (-q).sqrt()
    } else {
        a
    };
    let num = (k1 * k1 - q) * sinc;
    Ok(num / (4.0 * k1 * k1 + num * num).sqrt())
}

/// Which quantity [`find_potential_for_reflection`] matches to the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReflectionMeasure {
    /// `|R|`
    Amplitude,
    /// `|R|²`
    Probability,
}

/// Barrier height inside `bracket` at which the reflection reaches `target`.
///
/// Bisection on `|R(V)| − target` (or `|R(V)|² − target`). A zero target
/// looks for a reflectionless point using the signed amplitude, which changes
/// sign there.
pub fn find_potential_for_reflection(
    omega: f64,
    m0: f64,
    width: f64,
    kind: PotentialKind,
    target: f64,
    bracket: (f64, f64),
    measure: ReflectionMeasure,
) -> Result<f64> {
    if !(0.0..1.0).contains(&target) {
        return Err(Error::InvalidParameter {
            field: "target",
            reason: format!("target reflection must lie in [0, 1), got {target}"),
        });
    }
    let (lo, hi) = (bracket.0.min(bracket.1), bracket.0.max(bracket.1));
    let spec_at = |v: f64| BarrierSpec::new(m0, omega, v, width, kind);
    let abs_r = |v: f64| -> Result<f64> { Ok(closed_form_rt(&spec_at(v)?)?.0.sqrt()) };
    let f = |v: f64| -> Result<f64> {
        let spec = spec_at(v)?;
        if target == 0.0 {
            return signed_reflection(&spec);
        }
        let refl2 = closed_form_rt(&spec)?.0;
        Ok(match measure {
            ReflectionMeasure::Amplitude => refl2.sqrt() - target,
            ReflectionMeasure::Probability => refl2 - target,
        })
    };

    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoBracket {
            lo,
            hi,
            abs_r_lo: abs_r(lo)?,
            abs_r_hi: abs_r(hi)?,
            target,
        });
    }
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid)?;
        if fm.abs() < best.1.abs() {
            best = (mid, fm);
        }
        if fm == 0.0 {
            break;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(best.0)
}

/// `|T|²` over a (V, a) grid, row-major with V as the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub kind: PotentialKind,
    pub omega: f64,
    pub m0: f64,
    pub potentials: Vec<f64>,
    pub widths: Vec<f64>,
    pub trans2: Vec<f64>,
    /// Cells that could not be evaluated; stored as NaN.
    pub failed: usize,
}

impl ScanGrid {
    pub fn get(&self, iv: usize, ia: usize) -> f64 {
        self.trans2[iv * self.widths.len() + ia]
    }
}

fn is_monotone(grid: &[f64]) -> bool {
    grid.windows(2).all(|w| w[0] <= w[1]) || grid.windows(2).all(|w| w[0] >= w[1])
}

pub fn scan_transmission(
    omega: f64,
    m0: f64,
    kind: PotentialKind,
    potentials: &[f64],
    widths: &[f64],
) -> Result<ScanGrid> {
    if !is_monotone(potentials) {
        return Err(Error::NonMonotoneGrid { name: "V" });
    }
    if !is_monotone(widths) {
        return Err(Error::NonMonotoneGrid { name: "a" });
    }
    let trans2: Vec<f64> = potentials
        .par_iter()
        .flat_map_iter(|&v| {
            widths.iter().map(move |&a| {
                BarrierSpec::new(m0, omega, v, a, kind)
                    .and_then(|s| closed_form_rt(&s))
                    .map_or(f64::NAN, |(_, t)| t)
            })
        })
        .collect();
    let failed = trans2.iter().filter(|t| t.is_nan()).count();
    Ok(ScanGrid {
        kind,
        omega,
        m0,
        potentials: potentials.to_vec(),
        widths: widths.to_vec(),
        trans2,
        failed,
    })
}
