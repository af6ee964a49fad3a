use super::inverse::EmbeddingSpec;
use super::reservoir::EsnModel;
use super::EsnConfig;
use crate::scalar::{matrix_to_rows, rows_to_matrix};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("inconsistent model file: {0}")]
    Shape(String),
}

/// All weights, the configuration and the embedding of a trained network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EsnModelFile {
    pub config: EsnConfig,
    pub embedding: EmbeddingSpec,
    pub washout: usize,
    pub w_rr: Vec<Vec<f64>>,
    pub w_vr: Vec<Vec<f64>>,
    pub w_bias: Vec<f64>,
    pub w_out: Vec<Vec<f64>>,
    /// Relative residual of the readout normal equations.
    pub train_residual: f64,
    /// RMS of `ΞW − Σ` on the training rows.
    pub train_rmse: f64,
}

impl EsnModelFile {
    pub fn from_model(model: &EsnModel<f64>, embedding: EmbeddingSpec, washout: usize) -> Self {
        Self {
            config: model.config.clone(),
            embedding,
            washout,
            w_rr: matrix_to_rows(&model.w_rr),
            w_vr: matrix_to_rows(&model.w_vr),
            w_bias: model.w_bias.iter().copied().collect(),
            w_out: matrix_to_rows(&model.w_out),
            train_residual: f64::NAN,
            train_rmse: f64::NAN,
        }
    }

    pub fn model(&self) -> Result<EsnModel<f64>, ModelFileError> {
        let n = self.config.n;
        let shape = |m: &str| ModelFileError::Shape(format!("{m} does not match n = {n}"));
        let w_rr = rows_to_matrix(&self.w_rr, n)
            .filter(|m| m.nrows() == n)
            .ok_or_else(|| shape("w_rr"))?;
        let w_vr = rows_to_matrix(&self.w_vr, self.config.n_upsilon)
            .filter(|m| m.nrows() == n)
            .ok_or_else(|| shape("w_vr"))?;
        let w_out = rows_to_matrix(&self.w_out, n).ok_or_else(|| shape("w_out"))?;
        if self.w_bias.len() != n {
            return Err(shape("w_bias"));
        }
        Ok(EsnModel {
            w_rr,
            w_vr,
            w_bias: DVector::from_vec(self.w_bias.clone()),
            w_out,
            config: self.config.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        // NaN diagnostics are not valid JSON numbers.
        let mut copy = self.clone();
        for v in [&mut copy.train_residual, &mut copy.train_rmse] {
            if !v.is_finite() {
                *v = -1.0;
            }
        }
        serde_json::to_string_pretty(&copy).expect("model is serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelFileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), ModelFileError> {
        std::fs::write(path, self.to_json()).map_err(|source| ModelFileError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Self, ModelFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ModelFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}
