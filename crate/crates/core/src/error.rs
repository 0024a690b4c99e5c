use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The frequency does not exceed the rest mass, so no incident wave propagates.
    #[error("sub-threshold frequency: omega = {omega} must exceed m0 = {m0}")]
    SubThreshold { omega: f64, m0: f64 },

    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("boundary-matching system is singular (k2 = {k2_re} + {k2_im}i)")]
    SingularSystem { k2_re: f64, k2_im: f64 },

    #[error("no sign change in bracket: |R| = {abs_r_lo} at V = {lo}, |R| = {abs_r_hi} at V = {hi}, target {target}")]
    NoBracket {
        lo: f64,
        hi: f64,
        abs_r_lo: f64,
        abs_r_hi: f64,
        target: f64,
    },

    /// Polar decomposition is singular where the field vanishes.
    #[error("field node at t = {t}, x = {x}")]
    Node { t: f64, x: f64 },

    /// P·S vanishes; the mixing parameter θ is undefined.
    #[error("degenerate eigen-structure: P·S = {p_dot_s}")]
    Degenerate { p_dot_s: f64 },

    /// Both eigenvectors of the mixed tensor are null.
    #[error("both eigenvectors are null")]
    BothNull,

    #[error("operation requires a field-free region, found V = {potential}")]
    NotFreeRegion { potential: f64 },

    #[error("grid `{name}` is not monotone")]
    NonMonotoneGrid { name: &'static str },
}
