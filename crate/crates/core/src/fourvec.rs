use std::ops::{Add, Mul, Neg, Sub};

/// Two-component space-time vector with signature (+, −).
///
/// The type does not track index position. Covariant and contravariant
/// components differ only in the sign of the spatial entry, see
/// [`FourVector::flip_index`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FourVector {
    pub t: f64,
    pub x: f64,
}

impl FourVector {
    pub const fn new(t: f64, x: f64) -> Self {
        Self { t, x }
    }

    /// Minkowski product `u_t v_t − u_x v_x`.
    pub fn dot(self, other: Self) -> f64 {
        self.t * other.t - self.x * other.x
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn is_timelike(self) -> bool {
        self.norm2() > 0.0
    }

    /// Raise or lower the index.
    pub fn flip_index(self) -> Self {
        Self::new(self.t, -self.x)
    }

    /// Euclidean length of the component pair (not Lorentz invariant).
    pub fn euclidean_norm(self) -> f64 {
        self.t.hypot(self.x)
    }

    /// `x/t` for a contravariant vector.
    pub fn three_velocity(self) -> f64 {
        self.x / self.t
    }

    /// Components of a contravariant vector (or an event) in a frame moving
    /// with velocity `tanh(rapidity)` along +x.
    pub fn boost(self, rapidity: f64) -> Self {
        let (s, c) = (rapidity.sinh(), rapidity.cosh());
        Self::new(self.t * c - self.x * s, self.x * c - self.t * s)
    }
}

impl Add for FourVector {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.t + rhs.t, self.x + rhs.x)
    }
}

impl Sub for FourVector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.t - rhs.t, self.x - rhs.x)
    }
}

impl Mul<f64> for FourVector {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self::new(self.t * rhs, self.x * rhs)
    }
}

impl Neg for FourVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.t, -self.x)
    }
}
