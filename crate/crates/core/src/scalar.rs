//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating-point scalar (`f32` or `f64`).
///
/// Besides the arithmetic bounds, each scalar carries the two tolerance
/// tiers used throughout the crate: one for identities that hold by
/// construction and a looser one for identities that are derived through
/// longer chains of arithmetic.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Tolerance for construction identities (normalization, symmetry).
    fn construction_tol() -> Self;

    /// Tolerance for derived identities (completeness, unitarity, biorthogonality).
    fn derived_tol() -> Self;

    /// Lossy conversion from `f64`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    /// Lossless widening to `f64`.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("real scalar converts to f64")
    }
}

impl Real for f64 {
    fn construction_tol() -> Self {
        1e-12
    }

    fn derived_tol() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn construction_tol() -> Self {
        1e-5
    }

    fn derived_tol() -> Self {
        1e-4
    }
}

/// `e^{2πi·k/n}` with `k` reduced modulo `n` before the trigonometry.
pub fn root_of_unity<T: Real>(k: usize, n: usize) -> Complex<T> {
    let k = k % n;
    // Quarter turns are exact.
    if (4 * k) % n == 0 {
        let (one, zero) = (T::one(), T::zero());
        return match 4 * k / n {
            0 => Complex::new(one, zero),
            1 => Complex::new(zero, one),
            2 => Complex::new(-one, zero),
            _ => Complex::new(zero, -one),
        };
    }
    let angle = T::TAU() * T::of(k as f64) / T::of(n as f64);
    Complex::from_polar(T::one(), angle)
}

/// Real number lifted into the complex plane.
#[inline]
pub fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}
