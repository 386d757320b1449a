//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All algorithms are written against [`Real`], which is implemented for
//! `f32`, `f64` and the quad-precision [`Quad`] type. Quad precision is what
//! makes the strongly ill-conditioned Gram systems of realistic diffusion
//! sets solvable; `f64` is the default everywhere else.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, One};

/// IEEE binary128 scalar (about 33 significant decimal digits).
pub type Quad = f128::f128;

/// Floating-point scalar usable by the crate's numerics.
pub trait Real: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Human-readable name used in reports.
    const NAME: &'static str;

    /// Veltkamp splitting factor `2^ceil(p/2) + 1` for a `p`-bit significand.
    fn split_factor() -> Self;

    /// Relative tolerance used for quadratures that feed a least-squares fit.
    fn fit_quad_tol() -> Self;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Builds a constant from an unevaluated double-double pair `hi + lo`.
    #[inline]
    fn from_parts(hi: f64, lo: f64) -> Self {
        Self::lit(hi) + Self::lit(lo)
    }

    #[inline]
    fn count(n: usize) -> Self {
        Self::lit(n as f64)
    }

    /// π to the working precision.
    #[inline]
    fn pi() -> Self {
        Self::from_parts(std::f64::consts::PI, 1.224_646_799_147_353_2e-16)
    }

    /// Euler–Mascheroni constant to the working precision.
    #[inline]
    fn euler_gamma() -> Self {
        Self::from_parts(0.577_215_664_901_532_9, -4.942_915_152_430_645e-18)
    }

    /// Lossy conversion used for reporting and file output.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Lossy conversion between two scalar types.
    #[inline]
    fn cast<U: Real>(self) -> U {
        U::from_f64(self.to_f64_lossy()).expect("finite cast")
            + U::from_f64((self - Self::lit(self.to_f64_lossy())).to_f64_lossy()).unwrap_or(U::zero())
    }
}

impl Real for f32 {
    const NAME: &'static str = "f32";
    fn split_factor() -> Self {
        4097.0
    }
    fn fit_quad_tol() -> Self {
        1e-6
    }
}

impl Real for f64 {
    const NAME: &'static str = "f64";
    fn split_factor() -> Self {
        134_217_729.0
    }
    fn fit_quad_tol() -> Self {
        1e-13
    }
}

impl Real for Quad {
    const NAME: &'static str = "quad";
    fn split_factor() -> Self {
        // 2^57 + 1
        Self::lit(144_115_188_075_855_872.0) + Self::one()
    }
    fn fit_quad_tol() -> Self {
        Self::lit(1e-27)
    }
}

/// Error-free product: returns `(p, e)` with `a * b = p + e` exactly.
pub(crate) fn two_prod<T: Real>(a: T, b: T) -> (T, T) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, e)
}

fn split<T: Real>(a: T) -> (T, T) {
    let c = T::split_factor() * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

/// Error-free sum: returns `(s, e)` with `a + b = s + e` exactly.
pub(crate) fn two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Dot product evaluated as if in twice the working precision (Ogita–Rump–Oishi `Dot2`).
pub(crate) fn dot2<T: Real>(x: &[T], y: &[T]) -> T {
    let mut s = T::zero();
    let mut c = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        let (p, ep) = two_prod(a, b);
        let (t, es) = two_sum(s, p);
        s = t;
        c = c + (ep + es);
    }
    s + c
}

/// Sum with Neumaier compensation.
pub(crate) fn compensated_sum<T: Real, I: IntoIterator<Item = T>>(it: I) -> T {
    let mut s = T::zero();
    let mut c = T::zero();
    for x in it {
        let (t, e) = two_sum(s, x);
        s = t;
        c = c + e;
    }
    s + c
}
