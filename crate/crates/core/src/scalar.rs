//! Scalar abstraction shared by every numeric module.

use nalgebra as na;
use num_traits as nt;
use std::fmt::{Debug, Display, LowerExp};

/// Floating point type the model, network and simulator are generic over.
pub trait Real:
    Copy
    + na::RealField
    + na::Scalar
    + nt::FloatConst
    + nt::FromPrimitive
    + nt::ToPrimitive
    + Display
    + LowerExp
    + Debug
    + Send
    + Sync
    + 'static
{
    const ZERO: Self;
    const ONE: Self;
    const EPSILON: Self;

    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        <Self as nt::FromPrimitive>::from_f64(v).expect("f64 is representable")
    }

    fn to_f64_lossy(self) -> f64 {
        <Self as nt::ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn from_count(v: usize) -> Self {
        <Self as nt::FromPrimitive>::from_usize(v).expect("usize is representable")
    }
}

macro_rules! impl_real {
    ($f:ty) => {
        impl Real for $f {
            const ZERO: Self = 0.0;
            const ONE: Self = 1.0;
            const EPSILON: Self = <$f>::EPSILON;
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Converts a dense matrix between scalar types.
pub fn cast_matrix<A: Real, B: Real>(m: &na::DMatrix<A>) -> na::DMatrix<B> {
    m.map(|v| B::lit(v.to_f64_lossy()))
}

pub fn cast_vector<A: Real, B: Real>(v: &na::DVector<A>) -> na::DVector<B> {
    v.map(|e| B::lit(e.to_f64_lossy()))
}

/// Row-major nested representation used by the JSON artifacts.
pub fn matrix_to_rows<T: Real>(m: &na::DMatrix<T>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].to_f64_lossy()).collect())
        .collect()
}

/// Inverse of [`matrix_to_rows`]; `cols` is needed for matrices with no rows.
pub fn rows_to_matrix<T: Real>(rows: &[Vec<f64>], cols: usize) -> Option<na::DMatrix<T>> {
    if rows.iter().any(|r| r.len() != cols) {
        return None;
    }
    Some(na::DMatrix::from_fn(rows.len(), cols, |i, j| T::lit(rows[i][j])))
}
