use super::{AffineMatrix, MonomialBasis};
use crate::Real;
use nalgebra::{DMatrix, DVector};

/// Affine pair `(Ω₀(x), Ω₁(x))` with `Ω₀(x) + Ω₁(x)Π(x) = 0` for every x and
/// `det Ω₁(x) = (−1)^{n_m n_x}`.
///
/// Block row j encodes monomial j: a degree-one monomial `x_v` gives
/// `x_v I − 1·(x_v I) = 0` through `Ω₀`; a higher-degree monomial `x_v·p`
/// (with `x_v` its lowest-index variable) gives `x_v·(p I) − (x_v p) I = 0`
/// through the sub-diagonal block of `Ω₁`. The diagonal of `Ω₁` is `−I`, and
/// parents always precede children, so `Ω₁` is block lower triangular.
#[derive(Debug, Clone, PartialEq)]
pub struct Annihilator<T: Real> {
    pub omega0: AffineMatrix<T>,
    pub omega1: AffineMatrix<T>,
}

impl<T: Real> Annihilator<T> {
    pub fn build(basis: &MonomialBasis) -> Self {
        let n = basis.n_x();
        let nm = basis.n_monomials();
        let dim = nm * n;
        let mut omega0 = AffineMatrix::zeros(dim, n, n);
        let mut omega1 = AffineMatrix::zeros(dim, dim, n);
        let monos: Vec<_> = basis.monomials().cloned().collect();
        for (j, exps) in monos.iter().enumerate() {
            for i in 0..n {
                omega1.constant[(j * n + i, j * n + i)] = -T::ONE;
            }
            let var = exps
                .iter()
                .position(|&e| e > 0)
                .expect("basis monomials have positive degree");
            let degree: u32 = exps.iter().sum();
            if degree == 1 {
                for i in 0..n {
                    omega0.coeffs[var][(j * n + i, i)] = T::ONE;
                }
            } else {
                let mut parent = exps.clone();
                parent[var] -= 1;
                let p = basis
                    .index_of(&parent)
                    .expect("full bases are closed under division by one variable");
                for i in 0..n {
                    omega1.coeffs[var][(j * n + i, p * n + i)] = T::ONE;
                }
            }
        }
        Self { omega0, omega1 }
    }

    pub fn eval(&self, x: &DVector<T>) -> (DMatrix<T>, DMatrix<T>) {
        (self.omega0.eval(x.as_slice()), self.omega1.eval(x.as_slice()))
    }

    /// The two-block-row multiplier matrix used in the synthesis LMI:
    ///
    /// ```text
    /// [ Ω₀  Ω₁  0  0   0  ]
    /// [ 0   0   0  Ω₀  Ω₁ ]
    /// ```
    ///
    /// with column blocks sized `n_x, n_m n_x, n_w, n_x, n_m n_x`.
    pub fn stacked(&self, x: &DVector<T>, n_w: usize) -> DMatrix<T> {
        let (o0, o1) = self.eval(x);
        let n = o0.ncols();
        let d = o0.nrows();
        let cols = 2 * n + 2 * d + n_w;
        let mut m = DMatrix::zeros(2 * d, cols);
        m.view_mut((0, 0), (d, n)).copy_from(&o0);
        m.view_mut((0, n), (d, d)).copy_from(&o1);
        m.view_mut((d, n + d + n_w), (d, n)).copy_from(&o0);
        m.view_mut((d, 2 * n + d + n_w), (d, d)).copy_from(&o1);
        m
    }
}
