use crate::polymodel::MonomialBasis;
use crate::scalar::cast_matrix;
use crate::Real;
use nalgebra::{DMatrix, DVector};

/// Polynomial state feedback `u₁ = K(x)x` with `K(x) = K₀ + K₁Π(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialGain<T: Real> {
    pub k0: DMatrix<T>,
    pub k1: DMatrix<T>,
    pub basis: MonomialBasis,
}

impl<T: Real> PolynomialGain<T> {
    pub fn new(k0: DMatrix<T>, k1: DMatrix<T>, basis: MonomialBasis) -> Self {
        assert_eq!(k0.ncols(), basis.n_x(), "K0 width must equal n_x");
        assert_eq!(k1.ncols(), basis.lifted_dim(), "K1 width must equal n_m n_x");
        assert_eq!(k0.nrows(), k1.nrows(), "K0 and K1 row counts differ");
        Self { k0, k1, basis }
    }

    pub fn n_u(&self) -> usize {
        self.k0.nrows()
    }

    pub fn gain_matrix(&self, x: &DVector<T>) -> DMatrix<T> {
        let pi = self.basis.eval_pi(x).expect("state length matches basis");
        &self.k0 + &self.k1 * pi
    }

    pub fn control(&self, x: &DVector<T>) -> DVector<T> {
        self.gain_matrix(x) * x
    }

    pub fn cast<U: Real>(&self) -> PolynomialGain<U> {
        PolynomialGain {
            k0: cast_matrix(&self.k0),
            k1: cast_matrix(&self.k1),
            basis: self.basis.clone(),
        }
    }
}

/// Block-diagonal `diag{G, …, G}` with `copies` blocks.
pub fn block_diag_repeat<T: Real>(g: &DMatrix<T>, copies: usize) -> DMatrix<T> {
    let n = g.nrows();
    let mut out = DMatrix::zeros(n * copies, n * copies);
    for j in 0..copies {
        out.view_mut((j * n, j * n), (n, n)).copy_from(g);
    }
    out
}

/// `K₀ = M₀G⁻¹`, `K₁ = M₁G_a⁻¹` with `G_a = diag{G, …, G}`.
///
/// Returns `None` when `G` is singular.
pub fn recover_gains<T: Real>(
    m0: &DMatrix<T>,
    m1: &DMatrix<T>,
    g: &DMatrix<T>,
    basis: &MonomialBasis,
) -> Option<PolynomialGain<T>> {
    let lu = g.clone().lu();
    // K G = M  ⇔  Gᵀ Kᵀ = Mᵀ
    let gt = g.transpose().lu();
    if !lu.is_invertible() {
        return None;
    }
    let k0 = gt.solve(&m0.transpose())?.transpose();
    let n = g.nrows();
    let mut k1 = DMatrix::zeros(m1.nrows(), m1.ncols());
    for j in 0..basis.n_monomials() {
        let block = m1.columns(j * n, n).transpose();
        let kb = gt.solve(&block)?.transpose();
        k1.columns_mut(j * n, n).copy_from(&kb);
    }
    Some(PolynomialGain::new(k0, k1, basis.clone()))
}
