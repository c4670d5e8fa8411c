//! Coefficient fields for group-ring elements.
//!
//! Real elements use a bare float (`f32`/`f64`), complex elements use
//! [`Complex`]. The REAL field-mode invariant (imaginary parts exactly zero)
//! is carried by the type rather than checked at run time.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, NumAssign};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldMode {
    Real,
    Complex,
}

impl FieldMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldMode::Real => "real",
            FieldMode::Complex => "complex",
        }
    }
}

impl std::str::FromStr for FieldMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "real" | "r" => Ok(FieldMode::Real),
            "complex" | "c" => Ok(FieldMode::Complex),
            other => Err(crate::Error::InvalidParameter(format!(
                "unknown field mode {other:?} (expected real|complex)"
            ))),
        }
    }
}

/// Real number type underlying a [`Scalar`].
pub trait RealScalar:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

impl RealScalar for f32 {}
impl RealScalar for f64 {}

/// A coefficient field K = ℝ or ℂ.
pub trait Scalar:
    Copy + PartialEq + NumAssign + std::ops::Neg<Output = Self> + Sum + Debug + Send + Sync + 'static
{
    type Real: RealScalar;

    const FIELD: FieldMode;

    fn from_real(r: Self::Real) -> Self;

    /// Builds a scalar from real and imaginary parts. For real fields the
    /// imaginary part must be exactly zero.
    fn from_parts(re: Self::Real, im: Self::Real) -> Option<Self>;

    fn conj(self) -> Self;
    fn re(self) -> Self::Real;
    fn im(self) -> Self::Real;

    /// |z|².
    fn abs_sqr(self) -> Self::Real;

    fn abs(self) -> Self::Real {
        self.abs_sqr().sqrt()
    }

    fn is_finite(self) -> bool {
        self.re().is_finite() && self.im().is_finite()
    }

    fn from_f64(x: f64) -> Self {
        Self::from_real(Self::Real::from_f64(x).expect("f64 conversion"))
    }
}

macro_rules! real_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            type Real = $t;
            const FIELD: FieldMode = FieldMode::Real;

            #[inline]
            fn from_real(r: $t) -> Self {
                r
            }
            #[inline]
            fn from_parts(re: $t, im: $t) -> Option<Self> {
                (im == 0.0).then_some(re)
            }
            #[inline]
            fn conj(self) -> Self {
                self
            }
            #[inline]
            fn re(self) -> $t {
                self
            }
            #[inline]
            fn im(self) -> $t {
                0.0
            }
            #[inline]
            fn abs_sqr(self) -> $t {
                self * self
            }
        }
    };
}

real_scalar!(f32);
real_scalar!(f64);

impl<R: RealScalar> Scalar for Complex<R> {
    type Real = R;
    const FIELD: FieldMode = FieldMode::Complex;

    #[inline]
    fn from_real(r: R) -> Self {
        Complex::new(r, R::zero())
    }
    #[inline]
    fn from_parts(re: R, im: R) -> Option<Self> {
        Some(Complex::new(re, im))
    }
    #[inline]
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
    #[inline]
    fn re(self) -> R {
        self.re
    }
    #[inline]
    fn im(self) -> R {
        self.im
    }
    #[inline]
    fn abs_sqr(self) -> R {
        self.norm_sqr()
    }
}
