//! Leaky-integrator echo state network with a ridge-regression readout, and
//! the delay-embedded inverse-model controller built on top of it.

mod inverse;
mod model_file;
mod reservoir;
mod ridge;

pub use inverse::{build_inverse_dataset, EmbeddingSpec, InverseController, InverseDataset};
pub use model_file::{EsnModelFile, ModelFileError};
pub use reservoir::{init_reservoir, run_collect, run_collect_from, step, EsnModel};
pub use ridge::{normal_equations_residual, ridge_train};

use crate::Real;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EsnError {
    #[error("invalid ESN configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("sequence of length {len} is not longer than the washout {washout}")]
    SequenceTooShort { len: usize, washout: usize },
    #[error("trace of length {len} is shorter than the embedding horizon {needed}")]
    TraceTooShort { len: usize, needed: usize },
    #[error("normal matrix is singular; use a positive ridge parameter")]
    SingularNormalMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EsnConfig {
    /// Reservoir size.
    pub n: usize,
    pub n_upsilon: usize,
    /// Leak rate γ in (0, 1).
    pub gamma: f64,
    /// Largest singular value of the scaled reservoir matrix.
    pub rho_r: f64,
    pub rho_upsilon: f64,
    pub rho_bias: f64,
    /// Fraction of nonzero reservoir entries.
    pub density: f64,
    pub seed: u64,
    pub lambda_ridge: f64,
}

impl Default for EsnConfig {
    fn default() -> Self {
        Self {
            n: 200,
            n_upsilon: 4,
            gamma: 0.6,
            rho_r: 0.5,
            rho_upsilon: 1.0,
            rho_bias: 0.1,
            density: 0.9,
            seed: 42,
            lambda_ridge: 1e-3,
        }
    }
}

impl EsnConfig {
    pub fn validate(&self) -> Result<(), EsnError> {
        let bad = |m: String| Err(EsnError::InvalidConfig(m));
        if self.n == 0 || self.n_upsilon == 0 {
            return bad(format!(
                "n = {} and n_upsilon = {} must be positive",
                self.n, self.n_upsilon
            ));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma = {} is outside (0, 1)", self.gamma));
        }
        if !(self.rho_r > 0.0 && self.rho_r < 1.0) {
            return bad(format!("rho_r = {} is outside (0, 1)", self.rho_r));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return bad(format!("density = {} is outside (0, 1]", self.density));
        }
        if !(self.rho_upsilon.is_finite() && self.rho_bias.is_finite()) || self.rho_upsilon < 0.0 || self.rho_bias < 0.0
        {
            return bad("input and bias scalings must be finite and nonnegative".into());
        }
        if !(self.lambda_ridge >= 0.0 && self.lambda_ridge.is_finite()) {
            return bad(format!(
                "lambda_ridge = {} must be finite and nonnegative",
                self.lambda_ridge
            ));
        }
        Ok(())
    }
}

/// `u₂ = tanh(√2·η_u·ū₂) / (√2·η_u)`, which keeps `|u₂| < 1/(√2·η_u)`.
pub fn saturate_u2<T: Real>(u2_raw: T, eta_u: T) -> T {
    let s = T::lit(std::f64::consts::SQRT_2) * eta_u;
    (s * u2_raw).tanh() / s
}
