//! Stationary Klein-Gordon scattering from square barriers in 1+1 dimensions,
//! the energy-momentum tensor of the resulting field and the particle world
//! lines defined by three competing velocity laws.
//!
//! Units are natural (ħ = c = 1) and the metric signature is (+, −).
//!
//! The pipeline is:
//!
//! 1. [`BarrierSpec`] describes the problem (mass, frequency, barrier).
//! 2. [`match_boundaries`] produces a [`ScatteringSolution`] holding the
//!    region amplitudes.
//! 3. [`ScatteringSolution::evaluate`] returns a [`FieldSample`] with the exact
//!    field and its gradients at an event.
//! 4. [`stress_energy`] and [`eigen_numeric`] give the time-like eigenflow of
//!    the energy-momentum tensor, from which [`velocity_eigen`] follows.
//! 5. [`integrate_trajectory`] traces world lines through any velocity law.

pub mod emt;
pub mod error;
pub mod field;
pub mod fourvec;
pub mod scattering;
pub mod trajectory;

pub use emt::{
    eigen_analytic, eigen_numeric, emt_sample, lambda_extrema, stress_energy, stress_energy_polar,
    tensor_from_gradient, velocity_debroglie, velocity_eigen, velocity_schrodinger, AnalyticEigen, EigenFlow,
    EmtSample, MixedTensor,
};
pub use error::{Error, Result};
pub use field::{
    conserved_current, hj_residual, polar_gradients, BarrierSpec, FieldSample, LocalCoupling, PolarGradients,
    PotentialKind, Region, RegionWave, NODE_EPS,
};
pub use fourvec::FourVector;
pub use scattering::{
    closed_form_rt, find_potential_for_reflection, match_boundaries, scan_transmission, wavenumbers, ReflectionMeasure,
    Regime, ScanGrid, ScatteringSolution,
};
pub use trajectory::{
    boost_trajectory, boost_velocity, covariance_check, direction_field, integrate_at_times, integrate_bundle,
    integrate_trajectory, seeds_lambda_weighted, seeds_uniform, BoostedField, BoostedTrajectory, CovarianceCheck,
    DirectionSample, StationaryField, StepConfig, Termination, Trajectory, VelocityField, VelocityLaw, WorldPoint,
    COVARIANCE_TOLERANCE,
};
