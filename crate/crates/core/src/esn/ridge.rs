use super::EsnError;
use crate::Real;
use nalgebra::DMatrix;

/// Solves `(ΞᵀΞ + λI)W = ΞᵀΣ` and returns the readout `Wᵀ` (`n_σ × n`).
///
/// Every output column of `Σ` shares the same normal matrix, so one
/// factorization serves all channels.
pub fn ridge_train<T: Real>(xi: &DMatrix<T>, sigma: &DMatrix<T>, lambda: T) -> Result<DMatrix<T>, EsnError> {
    if xi.nrows() != sigma.nrows() {
        return Err(EsnError::Dimension(format!(
            "Ξ has {} rows, Σ has {}",
            xi.nrows(),
            sigma.nrows()
        )));
    }
    if lambda < T::ZERO {
        return Err(EsnError::InvalidConfig("ridge parameter must be nonnegative".into()));
    }
    let xt = xi.transpose();
    let mut normal = &xt * xi;
    for i in 0..normal.nrows() {
        normal[(i, i)] += lambda;
    }
    let rhs = &xt * sigma;
    let w = match normal.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => normal.lu().solve(&rhs).ok_or(EsnError::SingularNormalMatrix)?,
    };
    if w.iter().any(|v| !v.is_finite()) {
        return Err(EsnError::SingularNormalMatrix);
    }
    Ok(w.transpose())
}

/// `‖(ΞᵀΞ + λI)W − ΞᵀΣ‖_F / ‖ΞᵀΣ‖_F` for a readout `w_out = Wᵀ`.
pub fn normal_equations_residual(xi: &DMatrix<f64>, sigma: &DMatrix<f64>, lambda: f64, w_out: &DMatrix<f64>) -> f64 {
    let w = w_out.transpose();
    let lhs = xi.transpose() * (xi * &w) + &w * lambda;
    let rhs = xi.transpose() * sigma;
    (lhs - &rhs).norm() / rhs.norm()
}
