//! Primal-dual interior-point solver for block-diagonal LMI programs.
//!
//! The program `min cᵀy s.t. F_k(y) = F_k0 + Σᵢ yᵢ F_ki ⪰ 0` is handled in the
//! standard dual form
//!
//! ```text
//!   (P)  min ⟨C, X⟩  s.t. ⟨A_i, X⟩ = b_i,  X ⪰ 0
//!   (D)  max bᵀy     s.t. S = C − Σ yᵢ A_i ⪰ 0
//! ```
//!
//! with `C = F₀`, `A_i = −F_i`, `b = −c`. Iterates follow an infeasible
//! path with the HKM search direction and Mehrotra's predictor-corrector.
//! The coefficient matrices are sparse, so the Schur complement
//! `M_ij = tr(A_i X A_j S⁻¹)` is assembled entry-wise.

use super::program::{BackendSolution, ConicBackend, LmiProgram, SolverStatus};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

#[derive(Debug, Clone)]
pub struct InteriorPoint {
    pub max_iter: usize,
    /// Relative duality gap at which the solve stops.
    pub tol_gap: f64,
    /// Relative primal/dual residual at which the solve stops.
    pub tol_feas: f64,
    /// Relative gap accepted for an exactly dual-feasible iterate once the
    /// iteration stops making progress.
    pub tol_gap_stalled: f64,
    /// Primal residual up to which such an iterate may be kept.
    pub tol_feas_stalled: f64,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Upper limit on the adaptive step fraction near convergence.
    pub max_step_fraction: f64,
    /// Lower bound on the centering parameter σ.
    pub sigma_min: f64,
    pub verbose: bool,
}

impl Default for InteriorPoint {
    fn default() -> Self {
        Self {
            max_iter: 200,
            tol_gap: 1e-9,
            tol_feas: 1e-10,
            tol_gap_stalled: 1e-5,
            tol_feas_stalled: 1e-4,
            step_fraction: 0.9,
            max_step_fraction: 0.9,
            sigma_min: 0.1,
            verbose: false,
        }
    }
}

/// `(row, col, value)` entries of one coefficient matrix.
type Entries = Vec<(usize, usize, f64)>;

struct Block {
    dim: usize,
    c: DMatrix<f64>,
    /// `(var, entries of A_var)` with both triangles listed.
    a: Vec<(usize, Entries)>,
}

struct Compiled {
    m: usize,
    b: DVector<f64>,
    blocks: Vec<Block>,
    /// Orthonormal basis of the row space of `y ↦ 𝒜ᵀ(y)` when the `A_i`
    /// are linearly dependent; Newton steps are confined to it.
    range: Option<DMatrix<f64>>,
}

fn compile(program: &LmiProgram) -> Compiled {
    let m = program.n_vars();
    let blocks: Vec<Block> = program
        .constraints()
        .iter()
        .map(|con| {
            let e = &con.expr;
            let n = e.nrows();
            let c = (&e.constant + e.constant.transpose()) * 0.5;
            let a = e
                .terms
                .iter()
                .map(|(&var, entries)| {
                    let mut dense = DMatrix::<f64>::zeros(n, n);
                    for &(r, cc, v) in entries {
                        dense[(r, cc)] -= 0.5 * v;
                        dense[(cc, r)] -= 0.5 * v;
                    }
                    let mut list = Vec::new();
                    for r in 0..n {
                        for cc in 0..n {
                            if dense[(r, cc)] != 0.0 {
                                list.push((r, cc, dense[(r, cc)]));
                            }
                        }
                    }
                    (var, list)
                })
                .filter(|(_, l)| !l.is_empty())
                .collect();
            Block { dim: n, c, a }
        })
        .collect();
    let range = row_space(m, &blocks);
    Compiled {
        m,
        b: -DVector::from_column_slice(program.objective()),
        blocks,
        range,
    }
}

/// Eigenvectors of the Gram matrix `⟨A_i, A_j⟩` with non-negligible
/// eigenvalue, or `None` when the `A_i` are independent.
fn row_space(m: usize, blocks: &[Block]) -> Option<DMatrix<f64>> {
    let mut gram = DMatrix::<f64>::zeros(m, m);
    for blk in blocks {
        let n = blk.dim;
        let vecs: Vec<(usize, DVector<f64>)> = blk
            .a
            .iter()
            .map(|(var, entries)| {
                let mut v = DVector::zeros(n * n);
                for &(r, c, w) in entries {
                    v[r * n + c] += w;
                }
                (*var, v)
            })
            .collect();
        for (i, vi) in &vecs {
            for (j, vj) in &vecs {
                gram[(*i, *j)] += vi.dot(vj);
            }
        }
    }
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.amax();
    let keep: Vec<usize> = (0..m).filter(|&k| eig.eigenvalues[k] > 1e-12 * top).collect();
    if keep.len() == m {
        return None;
    }
    Some(DMatrix::from_fn(m, keep.len(), |i, k| eig.eigenvectors[(i, keep[k])]))
}

impl Compiled {
    /// `𝒜(Z)_i = Σ_k tr(A_ki Z_k)`.
    fn apply_a(&self, z: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for (blk, zk) in self.blocks.iter().zip(z) {
            for (var, entries) in &blk.a {
                out[*var] += entries.iter().map(|&(r, c, v)| v * zk[(c, r)]).sum::<f64>();
            }
        }
        out
    }

    /// `𝒜ᵀ(y)_k = Σ_i y_i A_ki`.
    fn apply_at(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        self.blocks
            .iter()
            .map(|blk| {
                let mut s = DMatrix::zeros(blk.dim, blk.dim);
                for (var, entries) in &blk.a {
                    let yi = y[*var];
                    if yi != 0.0 {
                        for &(r, c, v) in entries {
                            s[(r, c)] += yi * v;
                        }
                    }
                }
                s
            })
            .collect()
    }

    fn n_total(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    /// `M_ij = Σ_k tr(A_ki X_k A_kj S_k⁻¹)`.
    fn schur(&self, x: &[DMatrix<f64>], sinv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let mut mat = DMatrix::zeros(self.m, self.m);
        for ((blk, xk), sk) in self.blocks.iter().zip(x).zip(sinv) {
            let n = blk.dim;
            for (vi, ei) in &blk.a {
                // V = S⁻¹ A_i X, so tr(A_i X A_j S⁻¹) = Σ_{(p,q,w) ∈ A_j} w V[q, p].
                let mut ax = DMatrix::<f64>::zeros(n, n);
                for &(r, c, v) in ei {
                    for col in 0..n {
                        ax[(r, col)] += v * xk[(c, col)];
                    }
                }
                let vmat = sk * ax;
                for (vj, ej) in &blk.a {
                    mat[(*vi, *vj)] += ej.iter().map(|&(p, q, w)| w * vmat[(q, p)]).sum::<f64>();
                }
            }
        }
        (&mat + mat.transpose()) * 0.5
    }
}

fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn frob(a: &[DMatrix<f64>]) -> f64 {
    inner(a, a).sqrt()
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Largest `α ≥ 0` keeping `X + α dX ⪰ 0` (infinite if every direction is PSD).
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> Option<f64> {
    let l = x.clone().cholesky()?.l();
    let linv = l.solve_lower_triangular(&DMatrix::identity(x.nrows(), x.nrows()))?;
    let t = sym(&linv * dx * linv.transpose());
    let min_eig = SymmetricEigen::new(t).eigenvalues.min();
    Some(if min_eig >= 0.0 { f64::INFINITY } else { -1.0 / min_eig })
}

fn step_length(xs: &[DMatrix<f64>], dxs: &[DMatrix<f64>]) -> Option<f64> {
    let mut alpha = f64::INFINITY;
    for (x, dx) in xs.iter().zip(dxs) {
        alpha = alpha.min(max_step(x, dx)?);
    }
    Some(alpha)
}

fn spd_inverse(s: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    s.clone().cholesky().map(|c| sym(c.inverse()))
}

fn min_eigenvalue(s: &DMatrix<f64>) -> f64 {
    if s.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(sym(s.clone())).eigenvalues.min()
}

struct Newton<'a> {
    prob: &'a Compiled,
    x: &'a [DMatrix<f64>],
    sinv: &'a [DMatrix<f64>],
    rd: &'a [DMatrix<f64>],
    /// Unregularized (reduced) Schur matrix, used for iterative refinement.
    mat: DMatrix<f64>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl Newton<'_> {
    fn solve_schur(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut z = self.chol.solve(rhs);
        for _ in 0..2 {
            let r = rhs - &self.mat * &z;
            z += self.chol.solve(&r);
        }
        z
    }
}

impl Newton<'_> {
    /// Direction for target `σμ` and second-order correction `corr` (`dXₐ dSₐ`).
    fn direction(
        &self,
        sigma_mu: f64,
        corr: Option<&[DMatrix<f64>]>,
    ) -> (Vec<DMatrix<f64>>, DVector<f64>, Vec<DMatrix<f64>>) {
        // M dy = b − σμ 𝒜(S⁻¹) + 𝒜(Corr S⁻¹) + 𝒜(X R_d S⁻¹)
        let k = self.x.len();
        let mut t = Vec::with_capacity(k);
        for i in 0..k {
            let mut ti = &self.x[i] * &self.rd[i] * &self.sinv[i] - &self.sinv[i] * sigma_mu;
            if let Some(c) = corr {
                ti += &c[i] * &self.sinv[i];
            }
            t.push(ti);
        }
        let rhs = &self.prob.b + self.prob.apply_a(&t);
        let dy = match &self.prob.range {
            Some(n) => n * self.solve_schur(&(n.transpose() * rhs)),
            None => self.solve_schur(&rhs),
        };
        let at = self.prob.apply_at(&dy);
        let mut dx = Vec::with_capacity(k);
        let mut ds = Vec::with_capacity(k);
        for i in 0..k {
            let dsi = &self.rd[i] - &at[i];
            // dX = σμS⁻¹ − X − Corr S⁻¹ − X dS S⁻¹
            let mut dxi = &self.sinv[i] * sigma_mu - &self.x[i] - &self.x[i] * &dsi * &self.sinv[i];
            if let Some(c) = corr {
                dxi -= &c[i] * &self.sinv[i];
            }
            dx.push(sym(dxi));
            ds.push(dsi);
        }
        (dx, dy, ds)
    }
}

impl InteriorPoint {
    fn initial_point(&self, p: &Compiled) -> (Vec<DMatrix<f64>>, DVector<f64>, Vec<DMatrix<f64>>) {
        let mut xs = Vec::new();
        let mut ss = Vec::new();
        for blk in &p.blocks {
            let n = blk.dim as f64;
            let mut xi: f64 = 10.0_f64.max(n.sqrt());
            let mut eta: f64 = 10.0_f64.max(n.sqrt()).max(blk.c.norm());
            for (var, entries) in &blk.a {
                let fro = entries.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt();
                xi = xi.max(n * (1.0 + p.b[*var].abs()) / (1.0 + fro));
                eta = eta.max(fro);
            }
            xs.push(DMatrix::identity(blk.dim, blk.dim) * xi);
            ss.push(DMatrix::identity(blk.dim, blk.dim) * eta);
        }
        (xs, DVector::zeros(p.m), ss)
    }
}

impl ConicBackend for InteriorPoint {
    fn solve(&self, program: &LmiProgram) -> BackendSolution {
        let p = compile(program);
        let n_total = p.n_total() as f64;
        let (mut x, mut y, mut s) = self.initial_point(&p);
        let c_norm = frob(&p.blocks.iter().map(|b| b.c.clone()).collect::<Vec<_>>());
        let b_norm = p.b.norm();
        let feasibility_only = b_norm == 0.0;
        let finish = |status, y: &DVector<f64>, iterations, gap| BackendSolution {
            status,
            values: y.as_slice().to_vec(),
            objective: -p.b.dot(y),
            iterations,
            gap,
        };

        // Best exactly feasible iterate as (y, gap, pinf, iter); returned
        // when the iteration stops without meeting the tolerances.
        let mut best: Option<(DVector<f64>, f64, f64, usize)> = None;
        let fallback = |status, y: &DVector<f64>, iter, gap, best: &Option<(DVector<f64>, f64, f64, usize)>| match best
        {
            Some((yb, gb, pb, ib)) => {
                let accepted = if *gb < self.tol_gap_stalled && *pb < self.tol_feas_stalled {
                    SolverStatus::Optimal
                } else {
                    SolverStatus::Feasible
                };
                finish(accepted, yb, *ib, *gb)
            }
            None => finish(status, y, iter, gap),
        };
        let mut best_gap = f64::INFINITY;
        let mut gap = f64::INFINITY;
        let mut stalled = 0usize;
        for iter in 0..self.max_iter {
            let cs: Vec<DMatrix<f64>> = p.blocks.iter().map(|b| b.c.clone()).collect();
            let at_y = p.apply_at(&y);
            let rd: Vec<DMatrix<f64>> = (0..cs.len()).map(|k| &cs[k] - &s[k] - &at_y[k]).collect();
            let rp = &p.b - p.apply_a(&x);
            let pobj = inner(&cs, &x);
            let dobj = p.b.dot(&y);
            let mu = inner(&x, &s) / n_total;
            gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
            let pinf = rp.norm() / (1.0 + b_norm);
            let dinf = frob(&rd) / (1.0 + c_norm);
            if self.verbose {
                eprintln!(
                    "ipm {iter:3}: pobj {pobj:+.9e} dobj {dobj:+.9e} gap {gap:.2e} pinf {pinf:.2e} dinf {dinf:.2e} mu {mu:.2e}"
                );
            }
            if !(pobj.is_finite() && dobj.is_finite() && mu.is_finite()) {
                return fallback(SolverStatus::NumericalFailure, &y, iter, gap, &best);
            }
            if feasibility_only && dinf < self.tol_feas {
                let exact: Vec<DMatrix<f64>> = (0..cs.len()).map(|k| &cs[k] - &at_y[k]).collect();
                if exact.iter().all(|sk| min_eigenvalue(sk) > 0.0) {
                    return finish(SolverStatus::Optimal, &y, iter, gap);
                }
            }
            if gap < self.tol_gap && pinf < self.tol_feas && dinf < self.tol_feas {
                return finish(SolverStatus::Optimal, &y, iter, gap);
            }
            if dinf < 1e-6
                && best.as_ref().is_none_or(|bst| dobj > p.b.dot(&bst.0))
                && (0..cs.len()).all(|k| (&cs[k] - &at_y[k]).cholesky().is_some())
            {
                best = Some((y.clone(), gap, pinf, iter));
            }
            if best.is_some() {
                if gap < 0.9 * best_gap {
                    best_gap = gap;
                    stalled = 0;
                } else {
                    stalled += 1;
                }
            }
            if stalled >= 12 {
                return fallback(SolverStatus::MaxIterations, &y, iter, gap, &best);
            }
            // X/|⟨C,X⟩| approaching an improving ray of (P) certifies that (D) is empty.
            if pobj < 0.0 {
                let ray = p.apply_a(&x).norm() / (-pobj);
                if ray < 1e-8 && dinf > self.tol_feas {
                    return finish(SolverStatus::Infeasible, &y, iter, gap);
                }
            }

            let Some(sinv) = s.iter().map(spd_inverse).collect::<Option<Vec<_>>>() else {
                return fallback(SolverStatus::NumericalFailure, &y, iter, gap, &best);
            };
            let mut mat = p.schur(&x, &sinv);
            if let Some(n) = &p.range {
                mat = sym(n.transpose() * mat * n);
            }
            let dim = mat.nrows();
            let mat_exact = mat.clone();
            let diag_max = mat.diagonal().amax().max(1e-300);
            let mut reg = 0.0;
            let chol = loop {
                if let Some(c) = mat.clone().cholesky() {
                    break Some(c);
                }
                reg = if reg == 0.0 { 1e-14 * diag_max } else { reg * 100.0 };
                if reg > 1e-4 * diag_max {
                    break None;
                }
                for i in 0..dim {
                    mat[(i, i)] += reg;
                }
            };
            if self.verbose {
                let e = SymmetricEigen::new(mat.clone()).eigenvalues;
                eprintln!(
                    "    schur dim {dim} reg {reg:.1e} eig [{:.2e}, {:.2e}] |y| {:.2e}",
                    e.min(),
                    e.max(),
                    y.norm()
                );
            }
            let Some(chol) = chol else {
                return fallback(SolverStatus::NumericalFailure, &y, iter, gap, &best);
            };
            let newton = Newton {
                prob: &p,
                x: &x,
                sinv: &sinv,
                rd: &rd,
                mat: mat_exact,
                chol,
            };

            let (dxa, _, dsa) = newton.direction(0.0, None);
            let (Some(ap), Some(ad)) = (step_length(&x, &dxa), step_length(&s, &dsa)) else {
                return fallback(SolverStatus::NumericalFailure, &y, iter, gap, &best);
            };
            let (ap, ad) = (ap.min(1.0), ad.min(1.0));
            let mut mu_aff = 0.0;
            for k in 0..x.len() {
                mu_aff += (&x[k] + &dxa[k] * ap).dot(&(&s[k] + &dsa[k] * ad));
            }
            mu_aff /= n_total;
            let ratio = (mu_aff / mu).clamp(0.0, 1.0);
            let sigma = if pinf.max(dinf) > 1e-6 {
                ratio.powi(2)
            } else {
                ratio.powi(3)
            }
            .max(self.sigma_min);
            let corr: Vec<DMatrix<f64>> = (0..x.len()).map(|k| &dxa[k] * &dsa[k]).collect();
            let (dx, dy, ds) = newton.direction(sigma * mu, Some(&corr));
            let (Some(ap), Some(ad)) = (step_length(&x, &dx), step_length(&s, &ds)) else {
                return fallback(SolverStatus::NumericalFailure, &y, iter, gap, &best);
            };
            let tau = self
                .step_fraction
                .max(1.0 - 10.0 * mu.min(1.0))
                .min(self.max_step_fraction);
            let ap = (tau * ap).min(1.0);
            let ad = (tau * ad).min(1.0);
            for k in 0..x.len() {
                x[k] += &dx[k] * ap;
                s[k] += &ds[k] * ad;
            }
            y += &dy * ad;
        }
        fallback(SolverStatus::MaxIterations, &y, self.max_iter, gap, &best)
    }
}
