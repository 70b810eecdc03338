//! Quaternion and complex amplitude scalars.
//!
//! Spin amplitudes live in the quaternions with the Hamilton convention
//! `I J = K`, `J K = I`, `K I = J`, `I² = J² = K² = −1`. A unit vector
//! `n` is embedded as the pure quaternion `N(n) = nx I + ny J + nz K`, so
//! that `N* N = 1` and
//!
//! ```text
//! N1* N2 = n1·n2 − (n1×n2)x I − (n1×n2)y J − (n1×n2)z K
//! ```
//!
//! Both `Quaternion` and `Complex64` implement [`AmplitudeScalar`], the
//! contract the generic marginalization machinery works against.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance within which direction constructors renormalize silently.
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// Quaternion `w + x I + y J + z K`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    /// Pure quaternion from a 3-vector.
    pub const fn pure(x: f64, y: f64, z: f64) -> Self {
        Quaternion { w: 0.0, x, y, z }
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    /// `w² + x² + y² + z²`, the scalar part of `conj(q)·q`.
    pub fn norm_sq(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    pub fn is_pure(self) -> bool {
        self.w == 0.0
    }

    pub fn components(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn from_components(c: [f64; 4]) -> Self {
        Quaternion::new(c[0], c[1], c[2], c[3])
    }

    /// Largest absolute component difference.
    pub fn max_abs_diff(self, other: Quaternion) -> f64 {
        let a = self.components();
        let b = other.components();
        (0..4).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+}I {:+}J {:+}K", self.w, self.x, self.y, self.z)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Quaternion) {
        *self = *self + o;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, b: Quaternion) -> Quaternion {
        let a = self;
        Quaternion::new(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        self.scale(s)
    }
}

pub fn quat_mul(a: Quaternion, b: Quaternion) -> Quaternion {
    a * b
}

pub fn quat_conjugate(q: Quaternion) -> Quaternion {
    q.conj()
}

pub fn quat_norm_sq(q: Quaternion) -> f64 {
    q.norm_sq()
}

pub fn quat_from_direction(n: UnitVector3) -> Quaternion {
    n.quaternion()
}

/// Unit 3-vector (direction cosines).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitVector3 {
    nx: f64,
    ny: f64,
    nz: f64,
}

impl UnitVector3 {
    pub const X: UnitVector3 = UnitVector3 {
        nx: 1.0,
        ny: 0.0,
        nz: 0.0,
    };
    pub const Y: UnitVector3 = UnitVector3 {
        nx: 0.0,
        ny: 1.0,
        nz: 0.0,
    };
    pub const Z: UnitVector3 = UnitVector3 {
        nx: 0.0,
        ny: 0.0,
        nz: 1.0,
    };

    /// Accepts vectors whose norm is within [`UNIT_TOLERANCE`] of one and
    /// renormalizes them; anything else is rejected.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() {
            return Err(Error::NotUnit(x, y, z));
        }
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NotUnit(x, y, z));
        }
        Ok(Self::raw(x / norm, y / norm, z / norm))
    }

    /// Normalizes any finite nonzero vector.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        if !norm.is_finite() {
            return Err(Error::NotUnit(x, y, z));
        }
        Ok(Self::raw(x / norm, y / norm, z / norm))
    }

    /// Direction in the x–z plane at `degrees` from the z axis towards x.
    pub fn planar_degrees(degrees: f64) -> Self {
        let t = degrees.to_radians();
        Self::raw(t.sin(), 0.0, t.cos())
    }

    /// Spherical angles (polar from z, azimuth from x), radians.
    pub fn spherical(theta: f64, phi: f64) -> Self {
        Self::raw(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
    }

    fn raw(nx: f64, ny: f64, nz: f64) -> Self {
        UnitVector3 { nx, ny, nz }
    }

    pub fn x(&self) -> f64 {
        self.nx
    }
    pub fn y(&self) -> f64 {
        self.ny
    }
    pub fn z(&self) -> f64 {
        self.nz
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn dot(&self, o: &UnitVector3) -> f64 {
        self.nx * o.nx + self.ny * o.ny + self.nz * o.nz
    }

    /// Cross product; not unit in general, hence a plain array.
    pub fn cross(&self, o: &UnitVector3) -> [f64; 3] {
        [
            self.ny * o.nz - self.nz * o.ny,
            self.nz * o.nx - self.nx * o.nz,
            self.nx * o.ny - self.ny * o.nx,
        ]
    }

    pub fn neg(&self) -> Self {
        Self::raw(-self.nx, -self.ny, -self.nz)
    }

    /// `N(n) = nx I + ny J + nz K`.
    pub fn quaternion(&self) -> Quaternion {
        Quaternion::pure(self.nx, self.ny, self.nz)
    }

    pub fn distance(&self, o: &UnitVector3) -> f64 {
        let d = [self.nx - o.nx, self.ny - o.ny, self.nz - o.nz];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    pub fn approx_eq(&self, o: &UnitVector3, tol: f64) -> bool {
        self.distance(o) <= tol
    }

    pub fn approx_antipodal(&self, o: &UnitVector3, tol: f64) -> bool {
        self.distance(&o.neg()) <= tol
    }
}

/// Scalar values an amplitude distribution can take.
pub trait AmplitudeScalar:
    Copy + Send + Sync + fmt::Debug + PartialEq + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn mul(self, other: Self) -> Self;
    fn conj(self) -> Self;
    fn norm_sq(self) -> f64;
    fn scale(self, s: f64) -> Self;
    /// `Re(conj(self)·other)`; the interference contribution of a pair.
    fn re_inner(self, other: Self) -> f64;
    /// `Some` only for complex-valued amplitudes.
    fn as_complex(self) -> Option<Complex64>;
}

impl AmplitudeScalar for Quaternion {
    fn zero() -> Self {
        Quaternion::ZERO
    }
    fn mul(self, other: Self) -> Self {
        self * other
    }
    fn conj(self) -> Self {
        Quaternion::conj(self)
    }
    fn norm_sq(self) -> f64 {
        Quaternion::norm_sq(self)
    }
    fn scale(self, s: f64) -> Self {
        Quaternion::scale(self, s)
    }
    fn re_inner(self, other: Self) -> f64 {
        (self.conj() * other).w
    }
    fn as_complex(self) -> Option<Complex64> {
        None
    }
}

impl AmplitudeScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn mul(self, other: Self) -> Self {
        self * other
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn norm_sq(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn re_inner(self, other: Self) -> f64 {
        (Complex64::conj(&self) * other).re
    }
    fn as_complex(self) -> Option<Complex64> {
        Some(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamilton_units() {
        assert_eq!(Quaternion::I * Quaternion::J, Quaternion::K);
        assert_eq!(Quaternion::J * Quaternion::I, -Quaternion::K);
        assert_eq!(Quaternion::J * Quaternion::K, Quaternion::I);
        assert_eq!(Quaternion::K * Quaternion::I, Quaternion::J);
        for u in [Quaternion::I, Quaternion::J, Quaternion::K] {
            assert_eq!(u * u, -Quaternion::ONE);
        }
    }

    #[test]
    fn identity_and_conjugates() {
        let q = Quaternion::new(0.3, -1.2, 2.5, 0.7);
        assert_eq!(Quaternion::ONE * q, q);
        assert_eq!(q * Quaternion::ONE, q);
        assert_eq!(quat_conjugate(Quaternion::I), Quaternion::new(0.0, -1.0, 0.0, 0.0));
        assert_eq!(quat_conjugate(Quaternion::ONE), Quaternion::ONE);
        assert_eq!(Quaternion::K.conj() * Quaternion::K, Quaternion::ONE);
        // conj(I)·J = −K
        assert_eq!(Quaternion::I.conj() * Quaternion::J, -Quaternion::K);
    }

    #[test]
    fn norms() {
        assert_eq!(quat_norm_sq(Quaternion::new(0.0, 0.0, 0.0, 2.0)), 4.0);
        let n1 = UnitVector3::X.quaternion();
        let n2 = UnitVector3::Y.quaternion();
        assert_eq!((n1 + n2).norm_sq(), 2.0);
        let n = UnitVector3::new(0.6, 0.0, 0.8).unwrap();
        assert!((quat_from_direction(n).norm_sq() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn embedding() {
        assert_eq!(quat_from_direction(UnitVector3::Z), Quaternion::K);
        assert_eq!(quat_from_direction(UnitVector3::X), Quaternion::I);
        let n = UnitVector3::normalized(1.0, -2.0, 0.5).unwrap();
        assert_eq!(n.neg().quaternion(), -n.quaternion());
    }

    #[test]
    fn direction_constructor_tolerance() {
        assert!(UnitVector3::new(1.0 + 5e-7, 0.0, 0.0).is_ok());
        assert_eq!(UnitVector3::new(1.0 + 5e-7, 0.0, 0.0).unwrap().x(), 1.0);
        assert!(matches!(UnitVector3::new(1.1, 0.0, 0.0), Err(Error::NotUnit(..))));
        assert_eq!(UnitVector3::new(0.0, 0.0, 0.0), Err(Error::ZeroVector));
        assert_eq!(UnitVector3::normalized(0.0, 0.0, 0.0), Err(Error::ZeroVector));
        assert!(UnitVector3::new(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn complex_scalar_contract() {
        let a = Complex64::new(1.0, 2.0);
        let b = Complex64::new(-0.5, 0.25);
        assert_eq!(AmplitudeScalar::norm_sq(a), 5.0);
        assert_eq!(a.re_inner(b), (a.conj() * b).re);
        assert!(a.as_complex().is_some());
        assert!(Quaternion::I.as_complex().is_none());
    }
}
