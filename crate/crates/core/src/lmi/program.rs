//! A small modeling layer for linear matrix inequality programs.
//!
//! Decision variables are scalars indexed `0..n_vars`. Matrix-valued
//! affine expressions keep a constant part plus, per variable, the sparse
//! list of entries that variable contributes to. Constraints are
//! `F(y) ⪰ 0` with `F` symmetric; the objective is a linear function to
//! be minimized.

use nalgebra::DMatrix;
use std::collections::BTreeMap;

/// Entries `(row, col, coeff)` a variable contributes to an expression.
pub type SparseEntries = Vec<(usize, usize, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct AffineExpr {
    pub constant: DMatrix<f64>,
    pub terms: BTreeMap<usize, SparseEntries>,
}

impl AffineExpr {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::constant(DMatrix::zeros(rows, cols))
    }

    pub fn constant(m: DMatrix<f64>) -> Self {
        Self {
            constant: m,
            terms: BTreeMap::new(),
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

    fn push(&mut self, var: usize, r: usize, c: usize, v: f64) {
        if v != 0.0 {
            self.terms.entry(var).or_default().push((r, c, v));
        }
    }

    /// Merges duplicate positions and drops cancelled entries.
    fn compact(mut self) -> Self {
        for entries in self.terms.values_mut() {
            entries.sort_by_key(|&(r, c, _)| (r, c));
            let mut merged: SparseEntries = Vec::with_capacity(entries.len());
            for &(r, c, v) in entries.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == r && last.1 == c => last.2 += v,
                    _ => merged.push((r, c, v)),
                }
            }
            merged.retain(|e| e.2 != 0.0);
            *entries = merged;
        }
        self.terms.retain(|_, e| !e.is_empty());
        self
    }

    /// `A · self`.
    pub fn left_mul(&self, a: &DMatrix<f64>) -> Self {
        assert_eq!(a.ncols(), self.nrows(), "left_mul shape mismatch");
        let mut out = Self::constant(a * &self.constant);
        for (&var, entries) in &self.terms {
            for &(r, c, v) in entries {
                for i in 0..a.nrows() {
                    out.push(var, i, c, a[(i, r)] * v);
                }
            }
        }
        out.compact()
    }

    /// `self · B`.
    pub fn right_mul(&self, b: &DMatrix<f64>) -> Self {
        assert_eq!(self.ncols(), b.nrows(), "right_mul shape mismatch");
        let mut out = Self::constant(&self.constant * b);
        for (&var, entries) in &self.terms {
            for &(r, c, v) in entries {
                for j in 0..b.ncols() {
                    out.push(var, r, j, v * b[(c, j)]);
                }
            }
        }
        out.compact()
    }

    pub fn transpose(&self) -> Self {
        Self {
            constant: self.constant.transpose(),
            terms: self
                .terms
                .iter()
                .map(|(&var, e)| (var, e.iter().map(|&(r, c, v)| (c, r, v)).collect()))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            constant: &self.constant * s,
            terms: self
                .terms
                .iter()
                .map(|(&var, e)| (var, e.iter().map(|&(r, c, v)| (r, c, v * s)).collect()))
                .collect(),
        }
        .compact()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "add shape mismatch");
        let mut out = self.clone();
        out.constant += &other.constant;
        for (&var, entries) in &other.terms {
            out.terms.entry(var).or_default().extend_from_slice(entries);
        }
        out.compact()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// `self + selfᵀ`.
    pub fn sym_part2(&self) -> Self {
        self.add(&self.transpose())
    }

    /// Shift by `s · I`.
    pub fn add_identity(&self, s: f64) -> Self {
        let mut out = self.clone();
        for i in 0..out.nrows().min(out.ncols()) {
            out.constant[(i, i)] += s;
        }
        out
    }

    /// Copies `block` into a larger zero expression at `(row, col)`.
    pub fn embed(&self, rows: usize, cols: usize, row: usize, col: usize) -> Self {
        assert!(
            row + self.nrows() <= rows && col + self.ncols() <= cols,
            "embed out of range"
        );
        let mut constant = DMatrix::zeros(rows, cols);
        constant.view_mut((row, col), self.shape()).copy_from(&self.constant);
        Self {
            constant,
            terms: self
                .terms
                .iter()
                .map(|(&var, e)| (var, e.iter().map(|&(r, c, v)| (r + row, c + col, v)).collect()))
                .collect(),
        }
    }

    /// Symmetric block matrix from its lower-triangular blocks.
    ///
    /// `sizes` gives the dimension of each block row/column; `lower` lists
    /// `(i, j, block)` with `i ≥ j`. Off-diagonal blocks are mirrored;
    /// missing blocks are zero. Diagonal blocks must already be symmetric.
    pub fn symmetric_blocks(sizes: &[usize], lower: Vec<(usize, usize, AffineExpr)>) -> Self {
        let offsets: Vec<usize> = sizes
            .iter()
            .scan(0, |acc, &s| {
                let o = *acc;
                *acc += s;
                Some(o)
            })
            .collect();
        let n: usize = sizes.iter().sum();
        let mut out = Self::zeros(n, n);
        for (i, j, block) in lower {
            assert!(i >= j, "only lower blocks may be given");
            assert_eq!(block.shape(), (sizes[i], sizes[j]), "block ({i},{j}) has wrong shape");
            out = out.add(&block.embed(n, n, offsets[i], offsets[j]));
            if i != j {
                out = out.add(&block.transpose().embed(n, n, offsets[j], offsets[i]));
            }
        }
        out
    }

    pub fn eval(&self, values: &[f64]) -> DMatrix<f64> {
        let mut m = self.constant.clone();
        for (&var, entries) in &self.terms {
            let y = values[var];
            for &(r, c, v) in entries {
                m[(r, c)] += y * v;
            }
        }
        m
    }

    /// Largest asymmetry `|F_rc − F_cr|` over the constant and every variable.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = (&self.constant - self.constant.transpose()).amax();
        for entries in self.terms.values() {
            let n = self.nrows();
            let mut d = DMatrix::<f64>::zeros(n, n);
            for &(r, c, v) in entries {
                d[(r, c)] += v;
                d[(c, r)] -= v;
            }
            worst = worst.max(d.amax());
        }
        worst
    }
}

/// A matrix of decision variables, stored row-major by variable index.
#[derive(Debug, Clone)]
pub struct MatrixVar {
    pub rows: usize,
    pub cols: usize,
    ids: Vec<usize>,
}

impl MatrixVar {
    pub fn id(&self, r: usize, c: usize) -> usize {
        self.ids[r * self.cols + c]
    }

    pub fn expr(&self) -> AffineExpr {
        let mut e = AffineExpr::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                e.push(self.id(r, c), r, c, 1.0);
            }
        }
        e
    }

    pub fn value(&self, values: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| values[self.id(r, c)])
    }
}

#[derive(Debug, Clone)]
pub struct LmiConstraint {
    pub name: String,
    pub expr: AffineExpr,
}

/// `minimize cᵀy subject to F_k(y) ⪰ 0`.
#[derive(Debug, Clone, Default)]
pub struct LmiProgram {
    n_vars: usize,
    objective: Vec<f64>,
    constraints: Vec<LmiConstraint>,
}

impl LmiProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[LmiConstraint] {
        &self.constraints
    }

    pub fn scalar(&mut self) -> usize {
        self.n_vars += 1;
        self.objective.push(0.0);
        self.n_vars - 1
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> MatrixVar {
        let ids = (0..rows * cols).map(|_| self.scalar()).collect();
        MatrixVar { rows, cols, ids }
    }

    /// Symmetric matrix variable: `n(n+1)/2` scalars shared across the diagonal.
    pub fn symmetric(&mut self, n: usize) -> MatrixVar {
        let mut ids = vec![0; n * n];
        for r in 0..n {
            for c in r..n {
                let id = self.scalar();
                ids[r * n + c] = id;
                ids[c * n + r] = id;
            }
        }
        MatrixVar { rows: n, cols: n, ids }
    }

    pub fn set_objective_coeff(&mut self, var: usize, coeff: f64) {
        self.objective[var] = coeff;
    }

    /// Adds `expr ⪰ 0`.
    pub fn psd(&mut self, name: impl Into<String>, expr: AffineExpr) {
        assert_eq!(expr.nrows(), expr.ncols(), "LMI must be square");
        debug_assert!(expr.asymmetry() < 1e-12, "LMI must be symmetric");
        self.constraints.push(LmiConstraint {
            name: name.into(),
            expr,
        });
    }

    /// Adds `expr ⪯ 0`.
    pub fn nsd(&mut self, name: impl Into<String>, expr: AffineExpr) {
        self.psd(name, expr.scale(-1.0));
    }
}

/// Termination state reported by a backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SolverStatus {
    Optimal,
    /// Every constraint holds at the returned `y` but the iteration stopped
    /// before the duality gap closed.
    Feasible,
    /// No `y` makes every constraint positive semidefinite.
    Infeasible,
    MaxIterations,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct BackendSolution {
    pub status: SolverStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Relative duality gap at termination.
    pub gap: f64,
}

/// Anything that can solve an [`LmiProgram`].
pub trait ConicBackend: Sync {
    fn solve(&self, program: &LmiProgram) -> BackendSolution;
}
