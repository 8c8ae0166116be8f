//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point type usable as the component type of amplitudes.
///
/// Implemented for `f32` and `f64`. The associated tolerances are the
/// comparison thresholds used throughout the crate; the `f64` values are
/// the ones the protocol contracts are stated in.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Normalization and state-equality tolerance.
    const NORM_TOL: f64;
    /// Unitarity tolerance for gate matrices.
    const UNITARY_TOL: f64;

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to any float type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("float converts to f64")
    }
}

impl Real for f64 {
    const NORM_TOL: f64 = 1e-9;
    const UNITARY_TOL: f64 = 1e-10;
}

impl Real for f32 {
    const NORM_TOL: f64 = 1e-4;
    const UNITARY_TOL: f64 = 1e-5;
}
