//! Scalar abstraction shared by every numerical module.
//!
//! All physics is written against [`Real`], which is implemented for `f32` and
//! `f64`. The concrete `*64` aliases at the crate root are what the command
//! line front end uses.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};
use rustfft::FftPlanner;

/// Real floating-point scalar usable by the linear algebra and the physics.
pub trait Real:
    RealField
    + Copy
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Machine epsilon of the type.
    const EPS: f64;

    /// In-place FFT over consecutive chunks of `len` entries.
    ///
    /// `inverse = false` computes `X_k = sum_j x_j exp(-2 pi i jk / len)`,
    /// `inverse = true` the same with `+i`; neither direction is normalised.
    fn fft_chunks(data: &mut [Complex<Self>], len: usize, inverse: bool);
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            const EPS: f64 = <$t>::EPSILON as f64;

            fn fft_chunks(data: &mut [Complex<Self>], len: usize, inverse: bool) {
                assert!(len > 0 && data.len() % len == 0, "fft buffer is not a whole number of chunks");
                let mut planner = FftPlanner::<$t>::new();
                let fft = if inverse {
                    planner.plan_fft_inverse(len)
                } else {
                    planner.plan_fft_forward(len)
                };
                fft.process(data);
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Converts `T` into `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().expect("scalar convertible to f64")
}


/// `exp(i theta)`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// `|z|`.
#[inline]
pub fn modulus<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}
