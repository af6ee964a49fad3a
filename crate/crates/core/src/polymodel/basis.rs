use super::ModelError;
use crate::Real;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Exponent vector of a monomial over the full state (length `n_x`).
pub type Exponents = Vec<u32>;

/// All monomials of degree 1..=q in a subset of the state variables,
/// grouped by degree and ordered graded-lexicographically inside each group.
///
/// The lifting `Π(x)` stacks `m(x) ⊗ I_{n_x}` for every monomial in this
/// order, so the same ordering fixes the block layout of `A₁`, `K₁` and the
/// annihilator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialBasis {
    n_x: usize,
    degree: usize,
    active: Vec<usize>,
    blocks: Vec<Vec<Exponents>>,
}

impl MonomialBasis {
    /// Every monomial of degree `1..=degree` in the `active` variables.
    pub fn full(n_x: usize, degree: usize, active: &[usize]) -> Result<Self, ModelError> {
        let mut active = active.to_vec();
        active.sort_unstable();
        active.dedup();
        if let Some(&bad) = active.iter().find(|&&v| v >= n_x) {
            return Err(ModelError::Dimension(format!(
                "active variable {bad} out of range for n_x = {n_x}"
            )));
        }
        if degree > 0 && active.is_empty() {
            return Err(ModelError::Dimension(
                "a nonzero degree needs at least one active variable".into(),
            ));
        }
        let blocks = (1..=degree)
            .map(|l| {
                let mut out = Vec::new();
                let mut exps = vec![0u32; n_x];
                enumerate_lex(&active, l as u32, 0, &mut exps, &mut out);
                out
            })
            .collect();
        Ok(Self {
            n_x,
            degree,
            active,
            blocks,
        })
    }

    /// Basis with no monomials: `Π(x)` is empty and the model is linear.
    pub fn empty(n_x: usize) -> Self {
        Self {
            n_x,
            degree: 0,
            active: Vec::new(),
            blocks: Vec::new(),
        }
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    /// Largest monomial degree `q`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn active_vars(&self) -> &[usize] {
        &self.active
    }

    pub fn blocks(&self) -> &[Vec<Exponents>] {
        &self.blocks
    }

    /// Number of monomials, `n_m = n₁ + … + n_q`.
    pub fn n_monomials(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// Row count of `Π(x)`: `n_m · n_x`.
    pub fn lifted_dim(&self) -> usize {
        self.n_monomials() * self.n_x
    }

    /// Monomials in lifting order.
    pub fn monomials(&self) -> impl Iterator<Item = &Exponents> {
        self.blocks.iter().flatten()
    }

    /// Position of a monomial in lifting order.
    pub fn index_of(&self, exps: &[u32]) -> Option<usize> {
        self.monomials().position(|m| m.as_slice() == exps)
    }

    /// Evaluates each monomial at `x`, in lifting order.
    pub fn eval_monomials<T: Real>(&self, x: &[T]) -> Vec<T> {
        self.monomials().map(|e| monomial_value(e, x)).collect()
    }

    /// The lifting matrix `Π(x) = [m⁽¹⁾(x) ⊗ I; …; m⁽ᵠ⁾(x) ⊗ I]`.
    pub fn eval_pi<T: Real>(&self, x: &DVector<T>) -> Result<DMatrix<T>, ModelError> {
        if x.len() != self.n_x {
            return Err(ModelError::Dimension(format!(
                "state has length {}, basis expects {}",
                x.len(),
                self.n_x
            )));
        }
        let n = self.n_x;
        let mut pi = DMatrix::zeros(self.lifted_dim(), n);
        for (j, m) in self.eval_monomials(x.as_slice()).into_iter().enumerate() {
            for i in 0..n {
                pi[(j * n + i, i)] = m;
            }
        }
        Ok(pi)
    }
}

pub(crate) fn monomial_value<T: Real>(exps: &[u32], x: &[T]) -> T {
    exps.iter()
        .zip(x)
        .filter(|(e, _)| **e > 0)
        .fold(T::ONE, |acc, (e, xi)| acc * xi.powi(*e as i32))
}

fn enumerate_lex(active: &[usize], remaining: u32, pos: usize, exps: &mut Exponents, out: &mut Vec<Exponents>) {
    let Some(&var) = active.get(pos) else {
        return;
    };
    if pos + 1 == active.len() {
        exps[var] = remaining;
        out.push(exps.clone());
        exps[var] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        exps[var] = e;
        enumerate_lex(active, remaining - e, pos + 1, exps, out);
    }
    exps[var] = 0;
}
