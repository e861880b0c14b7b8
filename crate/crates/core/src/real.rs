//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All math is written against [`Real`], which is implemented for `f32` and
//! `f64`. Monte Carlo harnesses and file formats work in `f64`; see the type
//! aliases at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::sync::Arc;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar used throughout the library.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Default absolute tolerance for adaptive quadrature in this precision.
    fn quad_tol() -> Self;

    /// Gamma function.
    fn tgamma(self) -> Self;
}

impl Real for f32 {
    fn quad_tol() -> Self {
        1e-6
    }

    fn tgamma(self) -> Self {
        libm::tgammaf(self)
    }
}

impl Real for f64 {
    fn quad_tol() -> Self {
        1e-12
    }

    fn tgamma(self) -> Self {
        libm::tgamma(self)
    }
}

/// Stateless scalar function, shareable across worker threads.
pub type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Neumaier compensated accumulator. Used wherever long running sums must not
/// drift (accumulated hitting times, pairwise-free reductions).
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    comp: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_of_tenths_is_exact() {
        let mut s = CompensatedSum::<f64>::new();
        for _ in 0..20 {
            s.add(0.1);
        }
        assert_eq!(s.value(), 2.0);
        let naive: f64 = (0..20).map(|_| 0.1).sum();
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn lit_roundtrips() {
        assert_eq!(<f32 as Real>::lit(0.5), 0.5f32);
        assert_eq!(<f64 as Real>::lit(0.1), 0.1);
    }
}
