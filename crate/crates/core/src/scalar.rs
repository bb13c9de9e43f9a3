//! Scalar and coefficient abstractions.
//!
//! All numerics in this crate are generic over [`Real`], which is implemented
//! for `f32` and `f64`. Series coefficients are generic over [`Coefficient`],
//! implemented for scalars and for dense vectors (observation vectors and
//! finite-element nodal vectors).

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar: f32 or f64.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for the supported float types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("finite conversion to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Value type carried by a sparse series term.
///
/// `norm` is the magnitude used for best-N ranking and dropped-mass
/// bookkeeping: absolute value for scalars and the max-abs norm for vectors,
/// so that a sum of dropped norms majorizes the pointwise error on `[-1,1]^J`.
pub trait Coefficient<T: Real>: Clone + Debug + PartialEq + Send + Sync {
    /// Zero of the same shape as `self`.
    fn zero_like(&self) -> Self;

    /// `self += s * other`.
    fn add_scaled(&mut self, other: &Self, s: T);

    fn scaled(&self, s: T) -> Self {
        let mut out = self.zero_like();
        out.add_scaled(self, s);
        out
    }

    fn norm(&self) -> T;

    fn is_zero(&self) -> bool {
        self.norm() == T::zero()
    }
}

impl<T: Real> Coefficient<T> for T {
    fn zero_like(&self) -> Self {
        T::zero()
    }

    fn add_scaled(&mut self, other: &Self, s: T) {
        *self += s * *other;
    }

    fn norm(&self) -> T {
        self.abs()
    }
}

impl<T: Real> Coefficient<T> for Vec<T> {
    fn zero_like(&self) -> Self {
        vec![T::zero(); self.len()]
    }

    fn add_scaled(&mut self, other: &Self, s: T) {
        assert_eq!(self.len(), other.len(), "vector coefficient shape mismatch");
        for (a, b) in self.iter_mut().zip(other) {
            *a += s * *b;
        }
    }

    fn norm(&self) -> T {
        self.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Euclidean inner product.
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Discrete L2 norm on the unit interval for nodal vectors: `sqrt(h * sum v_i^2)`.
pub fn l2_grid_norm<T: Real>(v: &[T], h: T) -> T {
    (h * dot(v, v)).sqrt()
}
