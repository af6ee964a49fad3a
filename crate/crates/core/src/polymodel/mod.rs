//! Uncertain polynomial plants in lifted quasi-LPV form: monomial lifting,
//! annihilator construction, dynamics decomposition and domain vertices.

mod affine;
mod annihilator;
mod basis;
mod domain;
mod model;
pub mod plant_file;

pub use affine::AffineMatrix;
pub use annihilator::Annihilator;
pub use basis::{Exponents, MonomialBasis};
pub use domain::{enumerate_vertices, ParameterSet, StateDomain, Vertex};
pub use model::{build_bw, decompose_dynamics, normalized_input, PolyQuasiLpvModel, PolyTerm};
pub use plant_file::PlantFile;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("monomial {0:?} is not in the basis (degree overflow or inactive variable)")]
    MonomialNotInBasis(Vec<u32>),
    #[error("term depends on the product of parameters {0:?}; dynamics must be affine in theta")]
    NonAffineTheta(Vec<usize>),
    #[error("{0} must be positive, got {1}")]
    NonPositiveEta(&'static str, f64),
    #[error("active state variable {0} has no finite bound in the state domain")]
    UnboundedActive(usize),
    #[error("{0} depends on the state; only constant input matrices are supported")]
    StateDependentInput(String),
    #[error("plant file line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}
