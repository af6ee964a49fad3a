//! JSON dump of a synthesis result, read back by the simulator and CLI.

use super::gain::PolynomialGain;
use super::program::SolverStatus;
use super::synthesis::{reachable_ellipsoid, ConstraintMargins, Ellipsoid, SynthesisSolution};
use crate::polymodel::MonomialBasis;
use crate::scalar::{matrix_to_rows, rows_to_matrix};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolutionFileError {
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed solution file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("inconsistent solution file: {0}")]
    Shape(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub mu: f64,
    pub lambda: f64,
    pub q: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    pub m0: Vec<Vec<f64>>,
    pub m1: Vec<Vec<f64>>,
    pub l: Vec<Vec<f64>>,
    pub k0: Vec<Vec<f64>>,
    pub k1: Vec<Vec<f64>>,
    /// `P = Q⁻¹`, so that ℛ = {x : xᵀPx ≤ 1}.
    pub p: Vec<Vec<f64>>,
    pub basis: MonomialBasis,
    pub status: SolverStatus,
    pub iterations: usize,
    pub margins: ConstraintMargins,
    pub theta_vertices: Vec<Vec<f64>>,
}

impl SolutionFile {
    pub fn from_solution(sol: &SynthesisSolution) -> Self {
        let p = reachable_ellipsoid(sol.q())
            .map(|e| e.p)
            .unwrap_or_else(|_| DMatrix::zeros(0, 0));
        let v = &sol.values;
        Self {
            mu: sol.mu,
            lambda: sol.lambda,
            q: matrix_to_rows(&v.q),
            g: matrix_to_rows(&v.g),
            m0: matrix_to_rows(&v.m0),
            m1: matrix_to_rows(&v.m1),
            l: matrix_to_rows(&v.l),
            k0: matrix_to_rows(&sol.gain.k0),
            k1: matrix_to_rows(&sol.gain.k1),
            p: matrix_to_rows(&p),
            basis: sol.gain.basis.clone(),
            status: sol.status,
            iterations: sol.iterations,
            margins: sol.margins.clone(),
            theta_vertices: sol.theta_vertices.clone(),
        }
    }

    fn matrix(rows: &[Vec<f64>], cols: usize, name: &str) -> Result<DMatrix<f64>, SolutionFileError> {
        rows_to_matrix(rows, cols)
            .ok_or_else(|| SolutionFileError::Shape(format!("{name} is ragged or has the wrong width")))
    }

    pub fn q_matrix(&self) -> Result<DMatrix<f64>, SolutionFileError> {
        Self::matrix(&self.q, self.basis.n_x(), "Q")
    }

    pub fn gain(&self) -> Result<PolynomialGain<f64>, SolutionFileError> {
        let k0 = Self::matrix(&self.k0, self.basis.n_x(), "K0")?;
        let k1 = Self::matrix(&self.k1, self.basis.lifted_dim(), "K1")?;
        if k0.nrows() != k1.nrows() {
            return Err(SolutionFileError::Shape("K0 and K1 row counts differ".into()));
        }
        Ok(PolynomialGain::new(k0, k1, self.basis.clone()))
    }

    pub fn ellipsoid(&self) -> Result<Ellipsoid, SolutionFileError> {
        Ok(Ellipsoid {
            p: Self::matrix(&self.p, self.basis.n_x(), "P")?,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution is serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, SolutionFileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), SolutionFileError> {
        std::fs::write(path, self.to_json()).map_err(|source| SolutionFileError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Self, SolutionFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| SolutionFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}
