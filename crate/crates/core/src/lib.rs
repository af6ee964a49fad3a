//! Robust input-to-state stabilizing polynomial state feedback for uncertain
//! polynomial discrete-time plants, combined with an echo state network
//! inverse-model controller for disturbance rejection.
//!
//! Numeric modules are generic over [`Real`] (`f32` or `f64`); the
//! semidefinite programming backend works in `f64`.

// `!(a > b)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod esn;
pub mod lmi;
pub mod polymodel;
pub mod scalar;
pub mod sim;

pub use scalar::Real;

pub type Model = polymodel::PolyQuasiLpvModel<f64>;
pub type Model32 = polymodel::PolyQuasiLpvModel<f32>;
pub type Gain = lmi::PolynomialGain<f64>;
pub type Gain32 = lmi::PolynomialGain<f32>;
pub type Esn = esn::EsnModel<f64>;
pub type Esn32 = esn::EsnModel<f32>;
pub type Trace = sim::SimTrace<f64>;
pub type Trace32 = sim::SimTrace<f32>;
