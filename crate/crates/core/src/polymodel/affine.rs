use crate::Real;
use nalgebra::DMatrix;

/// Matrix-valued function affine in a parameter vector `p`:
/// `F(p) = F₀ + Σᵢ pᵢ Fᵢ`.
///
/// Used both for θ-dependence of the plant data and for the x-dependence
/// of the annihilator pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMatrix<T: Real> {
    pub constant: DMatrix<T>,
    pub coeffs: Vec<DMatrix<T>>,
}

impl<T: Real> AffineMatrix<T> {
    pub fn zeros(rows: usize, cols: usize, n_params: usize) -> Self {
        Self {
            constant: DMatrix::zeros(rows, cols),
            coeffs: vec![DMatrix::zeros(rows, cols); n_params],
        }
    }

    pub fn constant(m: DMatrix<T>, n_params: usize) -> Self {
        let (r, c) = m.shape();
        Self {
            constant: m,
            coeffs: vec![DMatrix::zeros(r, c); n_params],
        }
    }

    pub fn nrows(&self) -> usize {
        self.constant.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.constant.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.constant.shape()
    }

    pub fn n_params(&self) -> usize {
        self.coeffs.len()
    }

    /// Evaluates at `p`; `p.len()` must equal [`Self::n_params`].
    pub fn eval(&self, p: &[T]) -> DMatrix<T> {
        assert_eq!(p.len(), self.coeffs.len(), "parameter dimension mismatch");
        let mut out = self.constant.clone();
        for (pi, ci) in p.iter().zip(&self.coeffs) {
            if *pi != T::ZERO {
                out += ci * *pi;
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            constant: &self.constant * s,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `[self, other]` side by side.
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.nrows(), other.nrows());
        assert_eq!(self.n_params(), other.n_params());
        let cat = |a: &DMatrix<T>, b: &DMatrix<T>| {
            let mut m = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
            m.view_mut((0, 0), a.shape()).copy_from(a);
            m.view_mut((0, a.ncols()), b.shape()).copy_from(b);
            m
        };
        Self {
            constant: cat(&self.constant, &other.constant),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| cat(a, b)).collect(),
        }
    }

    /// True when every parameter coefficient is exactly zero.
    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|c| c.iter().all(|v| *v == T::ZERO))
    }
}
