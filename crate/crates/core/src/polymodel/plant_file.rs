//! JSON plant description.
//!
//! ```json
//! {
//!   "n_x": 3, "n_u": 1, "n_d": 1, "q": 2, "active_vars": [0],
//!   "theta_vertices": [[0.5], [0.9]],
//!   "a":  [{"row": 1, "col": 1, "exponents": [2, 0, 0], "theta_index": 0, "coeff": -0.1}],
//!   "bu": [{"row": 1, "col": 0, "coeff": 0.1}],
//!   "bd": [{"row": 1, "col": 0, "coeff": 0.1}],
//!   "c": [[1, 0, 0]],
//!   "eta_u": 1.0, "eta_d": 1.0,
//!   "x_half_planes": [[0.5, 0, 0], [-0.5, 0, 0]]
//! }
//! ```
//!
//! `theta_index` may be omitted/null (constant term), an integer, or an
//! array of integers (a product of parameters, rejected as non-affine).

use super::{
    decompose_dynamics, AffineMatrix, ModelError, MonomialBasis, ParameterSet, PolyQuasiLpvModel, PolyTerm, StateDomain,
};
use crate::Real;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantFile {
    pub n_x: usize,
    pub n_u: usize,
    pub n_d: usize,
    pub q: usize,
    pub active_vars: Vec<usize>,
    pub theta_vertices: Vec<Vec<f64>>,
    pub a: Vec<TermEntry>,
    pub bu: Vec<TermEntry>,
    pub bd: Vec<TermEntry>,
    pub c: Vec<Vec<f64>>,
    pub eta_u: f64,
    pub eta_d: f64,
    pub x_half_planes: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermEntry {
    pub row: usize,
    pub col: usize,
    #[serde(default)]
    pub exponents: Option<Vec<u32>>,
    #[serde(default, deserialize_with = "theta_factors", skip_serializing_if = "Vec::is_empty")]
    pub theta_index: Vec<usize>,
    pub coeff: f64,
}

fn theta_factors<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<usize>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Factors {
        One(usize),
        Many(Vec<usize>),
    }
    Ok(match Option::<Factors>::deserialize(d)? {
        None => Vec::new(),
        Some(Factors::One(k)) => vec![k],
        Some(Factors::Many(v)) => v,
    })
}

impl PlantFile {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn into_model<T: Real>(self) -> Result<PolyQuasiLpvModel<T>, ModelError> {
        let n = self.n_x;
        let basis = if self.q == 0 {
            MonomialBasis::empty(n)
        } else {
            MonomialBasis::full(n, self.q, &self.active_vars)?
        };
        let theta = ParameterSet::new(
            self.theta_vertices
                .iter()
                .map(|v| DVector::from_iterator(v.len(), v.iter().map(|e| T::lit(*e))))
                .collect(),
        )?;
        let nt = theta.dim();
        let terms: Vec<PolyTerm<T>> = self
            .a
            .iter()
            .map(|t| PolyTerm {
                row: t.row,
                col: t.col,
                exponents: t.exponents.clone().unwrap_or_else(|| vec![0; n]),
                theta: t.theta_index.clone(),
                coeff: T::lit(t.coeff),
            })
            .collect();
        let (a0, a1) = decompose_dynamics(n, nt, &terms, &basis)?;
        let bu = input_matrix("bu", &self.bu, n, self.n_u, nt)?;
        let bd = input_matrix("bd", &self.bd, n, self.n_d, nt)?;
        let c_cols = self.c.first().map_or(n, Vec::len);
        let c = crate::scalar::rows_to_matrix(&self.c, c_cols)
            .ok_or_else(|| ModelError::Dimension("ragged C matrix".into()))?;
        let domain = StateDomain::new(
            n,
            self.x_half_planes
                .iter()
                .map(|h| DVector::from_iterator(h.len(), h.iter().map(|e| T::lit(*e))))
                .collect(),
        )?;
        PolyQuasiLpvModel::new(
            a0,
            a1,
            bu,
            bd,
            c,
            basis,
            domain,
            theta,
            T::lit(self.eta_u),
            T::lit(self.eta_d),
        )
    }
}

fn input_matrix<T: Real>(
    name: &str,
    terms: &[TermEntry],
    n_x: usize,
    cols: usize,
    n_theta: usize,
) -> Result<AffineMatrix<T>, ModelError> {
    let mut m = AffineMatrix::constant(DMatrix::zeros(n_x, cols), n_theta);
    for t in terms {
        if t.row >= n_x || t.col >= cols {
            return Err(ModelError::Dimension(format!(
                "{name} entry ({}, {}) outside {n_x}x{cols}",
                t.row, t.col
            )));
        }
        if t.exponents.as_ref().is_some_and(|e| e.iter().any(|&p| p > 0)) {
            return Err(ModelError::StateDependentInput(name.to_string()));
        }
        let slot = match t.theta_index.as_slice() {
            [] => &mut m.constant,
            [k] if *k < n_theta => &mut m.coeffs[*k],
            [k] => return Err(ModelError::Dimension(format!("theta index {k} out of range"))),
            more => return Err(ModelError::NonAffineTheta(more.to_vec())),
        };
        slot[(t.row, t.col)] += T::lit(t.coeff);
    }
    Ok(m)
}
