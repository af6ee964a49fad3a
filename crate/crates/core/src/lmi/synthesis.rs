use super::gain::{recover_gains, PolynomialGain};
use super::program::{AffineExpr, ConicBackend, LmiProgram, MatrixVar, SolverStatus};
use crate::polymodel::{ModelError, PolyQuasiLpvModel, StateDomain, Vertex};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

type Model = PolyQuasiLpvModel<f64>;

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error("invalid synthesis problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("LMIs infeasible for mu = {mu}")]
    Infeasible { mu: f64 },
    #[error("SDP backend failed for mu = {mu}: {status:?}")]
    BackendFailure { mu: f64, status: SolverStatus },
    #[error("returned point fails the post-hoc check for mu = {mu}: {detail}")]
    Verification { mu: f64, detail: String },
    #[error("no feasible mu on the grid")]
    AllInfeasible { curve: Vec<MuSample> },
}

/// One μ of the robust synthesis.
#[derive(Debug, Clone)]
pub struct SynthesisProblem {
    pub model: Model,
    pub mu: f64,
    /// Strict inequalities are imposed as `⪰ eps·I` / `⪯ −eps·I`.
    pub strictness_eps: f64,
    pub minimize_lambda: bool,
    /// Extra shift added to `strictness_eps` inside the SDP so that a point
    /// returned before full convergence still clears `strictness_eps` when
    /// re-checked.
    pub backoff: f64,
    /// Box bound `|y_i| ≤ β` on every scalar decision variable; keeps the
    /// multiplier `L` from drifting along directions the LMIs do not limit.
    pub variable_bound: Option<f64>,
}

impl SynthesisProblem {
    pub fn new(model: Model, mu: f64) -> Self {
        Self {
            model,
            mu,
            strictness_eps: 1e-7,
            minimize_lambda: true,
            backoff: 0.0,
            variable_bound: Some(1e4),
        }
    }

    fn validate(&self) -> Result<(), SynthesisError> {
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(SynthesisError::InvalidProblem(format!(
                "mu = {} not in (0, 1)",
                self.mu
            )));
        }
        if !(self.strictness_eps > 0.0) {
            return Err(SynthesisError::InvalidProblem("strictness_eps must be positive".into()));
        }
        if !(self.backoff >= 0.0) {
            return Err(SynthesisError::InvalidProblem("backoff must be non-negative".into()));
        }
        Ok(())
    }
}

/// Numeric values of the synthesis decision variables.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionValues {
    pub q: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub m0: DMatrix<f64>,
    pub m1: DMatrix<f64>,
    pub l: DMatrix<f64>,
}

/// Decision variables declared in an [`LmiProgram`].
#[derive(Debug, Clone)]
pub struct DecisionVars {
    pub q: MatrixVar,
    pub g: MatrixVar,
    pub m0: MatrixVar,
    pub m1: MatrixVar,
    pub l: MatrixVar,
}

impl DecisionVars {
    pub fn declare(program: &mut LmiProgram, model: &Model) -> Self {
        let n = model.n_x();
        let d = model.basis.lifted_dim();
        let total = 2 * n + 2 * d + model.n_w();
        Self {
            q: program.symmetric(n),
            g: program.matrix(n, n),
            m0: program.matrix(model.n_u(), n),
            m1: program.matrix(model.n_u(), d),
            l: program.matrix(total, 2 * d),
        }
    }

    pub fn values(&self, y: &[f64]) -> DecisionValues {
        DecisionValues {
            q: self.q.value(y),
            g: self.g.value(y),
            m0: self.m0.value(y),
            m1: self.m1.value(y),
            l: self.l.value(y),
        }
    }
}

/// Block sizes `[n_x, n_m n_x, n_w, n_x, n_m n_x]` of the synthesis LMI.
fn block_sizes(model: &Model) -> [usize; 5] {
    let n = model.n_x();
    let d = model.basis.lifted_dim();
    [n, d, model.n_w(), n, d]
}

/// `[1, hᵀQ; Qh, Q]` for every half-plane, as expressions in `Q`.
pub fn assemble_containment_lmis(q: &MatrixVar, domain: &StateDomain<f64>) -> Vec<AffineExpr> {
    let n = q.rows;
    domain
        .half_planes()
        .iter()
        .map(|h| {
            let hm = DMatrix::from_column_slice(n, 1, h.as_slice());
            AffineExpr::symmetric_blocks(
                &[1, n],
                vec![
                    (0, 0, AffineExpr::constant(DMatrix::from_element(1, 1, 1.0))),
                    (1, 0, q.expr().right_mul(&hm)),
                    (1, 1, q.expr()),
                ],
            )
        })
        .collect()
}

/// Dense value of `[1, hᵀQ; Qh, Q]`.
pub fn containment_matrix(q: &DMatrix<f64>, h: &DVector<f64>) -> DMatrix<f64> {
    let n = q.nrows();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m[(0, 0)] = 1.0;
    let qh = q * h;
    m.view_mut((1, 0), (n, 1)).copy_from(&qh);
    m.view_mut((0, 1), (1, n)).copy_from(&qh.transpose());
    m.view_mut((1, 1), (n, n)).copy_from(q);
    m
}

/// The vertex LMI as an expression in the decision variables; the program
/// requires it to be `⪯ −eps·I`.
pub fn assemble_synthesis_lmi(vertex: &Vertex<f64>, vars: &DecisionVars, mu: f64, model: &Model) -> AffineExpr {
    let th = vertex.theta.as_slice();
    let sizes = block_sizes(model);
    let a0 = model.a0.eval(th);
    let a1 = model.a1.eval(th);
    let bu = model.bu.eval(th);
    let bw = model.bw().eval(th);
    let q = vars.q.expr();
    let g = vars.g.expr();
    let b11 = q.sub(&g.sym_part2()).scale(1.0 - mu);
    let b33 = AffineExpr::constant(DMatrix::identity(sizes[2], sizes[2]) * -mu);
    let b41 = g.left_mul(&a0).add(&vars.m0.expr().left_mul(&bu));
    let b42 = vars.m1.expr().left_mul(&bu);
    let b43 = AffineExpr::constant(bw);
    let b44 = q.scale(-1.0);
    let b51 = g.left_mul(&a1);
    let base = AffineExpr::symmetric_blocks(
        &sizes,
        vec![
            (0, 0, b11),
            (2, 2, b33),
            (3, 0, b41),
            (3, 1, b42),
            (3, 2, b43),
            (3, 3, b44),
            (4, 0, b51),
        ],
    );
    let omega = model.annihilator().stacked(&vertex.x, model.n_w());
    base.add(&vars.l.expr().right_mul(&omega).sym_part2())
}

/// Dense value of the vertex LMI at given decision values. Built directly
/// from matrix products, independent of the expression layer.
pub fn synthesis_matrix(vertex: &Vertex<f64>, v: &DecisionValues, mu: f64, model: &Model) -> DMatrix<f64> {
    let th = vertex.theta.as_slice();
    let [n, d, nw, _, _] = block_sizes(model);
    let total = 2 * n + 2 * d + nw;
    let (o1, o3, o4, o5) = (n, n + d, n + d + nw, 2 * n + d + nw);
    let mut m = DMatrix::zeros(total, total);
    m.view_mut((0, 0), (n, n))
        .copy_from(&((&v.q - &v.g - v.g.transpose()) * (1.0 - mu)));
    m.view_mut((o3, o3), (nw, nw)).fill_diagonal(-mu);
    let b41 = model.a0.eval(th) * &v.g + model.bu.eval(th) * &v.m0;
    let b42 = model.bu.eval(th) * &v.m1;
    let b43 = model.bw().eval(th);
    let b51 = model.a1.eval(th) * &v.g;
    for (blk, r, c) in [(&b41, o4, 0), (&b42, o4, o1), (&b43, o4, o3), (&b51, o5, 0)] {
        m.view_mut((r, c), blk.shape()).copy_from(blk);
        m.view_mut((c, r), (blk.ncols(), blk.nrows()))
            .copy_from(&blk.transpose());
    }
    m.view_mut((o4, o4), (n, n)).copy_from(&(-&v.q));
    let lo = &v.l * model.annihilator().stacked(&vertex.x, nw);
    m + &lo + lo.transpose()
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(s).eigenvalues.min()
}

fn max_eig(m: &DMatrix<f64>) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(s).eigenvalues.max()
}

/// Smallest eigenvalue margins of every constraint at a point, recomputed
/// from dense matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintMargins {
    /// `λ_min([1, hᵀQ; Qh, Q])` per half-plane.
    pub containment: Vec<f64>,
    /// `λ_min(−LMI(x_v, θ_v))` per vertex.
    pub decrease: Vec<f64>,
    pub q_min_eig: f64,
    /// `λ_min(G + Gᵀ − Q)`.
    pub g_margin: f64,
}

impl ConstraintMargins {
    pub fn compute(model: &Model, vertices: &[Vertex<f64>], v: &DecisionValues, mu: f64) -> Self {
        Self {
            containment: model
                .domain
                .half_planes()
                .iter()
                .map(|h| min_eig(&containment_matrix(&v.q, h)))
                .collect(),
            decrease: vertices
                .iter()
                .map(|vx| -max_eig(&synthesis_matrix(vx, v, mu, model)))
                .collect(),
            q_min_eig: min_eig(&v.q),
            g_margin: min_eig(&(&v.g + v.g.transpose() - &v.q)),
        }
    }

    pub fn min_containment(&self) -> f64 {
        self.containment.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_decrease(&self) -> f64 {
        self.decrease.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisSolution {
    pub values: DecisionValues,
    pub lambda: f64,
    pub mu: f64,
    pub gain: PolynomialGain<f64>,
    pub status: SolverStatus,
    pub iterations: usize,
    pub margins: ConstraintMargins,
    /// θ points the LMIs were imposed at.
    pub theta_vertices: Vec<Vec<f64>>,
}

impl SynthesisSolution {
    pub fn q(&self) -> &DMatrix<f64> {
        &self.values.q
    }

    pub fn ellipsoid(&self) -> Result<Ellipsoid, SynthesisError> {
        reachable_ellipsoid(&self.values.q)
    }
}

/// `ℛ = {x : xᵀPx ≤ 1}` with `P = Q⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    pub p: DMatrix<f64>,
}

impl Ellipsoid {
    pub fn form(&self, x: &DVector<f64>) -> f64 {
        (x.transpose() * &self.p * x)[(0, 0)]
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.form(x) <= 1.0
    }
}

pub fn reachable_ellipsoid(q: &DMatrix<f64>) -> Result<Ellipsoid, SynthesisError> {
    let chol = q
        .clone()
        .cholesky()
        .ok_or_else(|| SynthesisError::InvalidProblem("Q is not positive definite".into()))?;
    let p = chol.inverse();
    Ok(Ellipsoid {
        p: (&p + p.transpose()) * 0.5,
    })
}

/// Builds the program for one μ: containment LMIs, the vertex LMIs and,
/// when minimizing, `λI − Q ⪰ 0` with objective λ.
pub fn build_program(problem: &SynthesisProblem, vertices: &[Vertex<f64>]) -> (LmiProgram, DecisionVars, usize) {
    let model = &problem.model;
    let eps = problem.strictness_eps + problem.backoff;
    let mut program = LmiProgram::new();
    let vars = DecisionVars::declare(&mut program, model);
    let lambda = program.scalar();
    for (i, c) in assemble_containment_lmis(&vars.q, &model.domain)
        .into_iter()
        .enumerate()
    {
        program.psd(format!("containment[{i}]"), c.add_identity(-eps));
    }
    for (i, v) in vertices.iter().enumerate() {
        let lmi = assemble_synthesis_lmi(v, &vars, problem.mu, model);
        program.nsd(format!("decrease[{i}]"), lmi.add_identity(eps));
    }
    if let Some(beta) = problem.variable_bound {
        for var in 0..program.n_vars() {
            let mut lo = AffineExpr::constant(DMatrix::from_element(1, 1, beta));
            lo.terms.insert(var, vec![(0, 0, 1.0)]);
            let mut hi = AffineExpr::constant(DMatrix::from_element(1, 1, beta));
            hi.terms.insert(var, vec![(0, 0, -1.0)]);
            program.psd(format!("bound_lo[{var}]"), lo);
            program.psd(format!("bound_hi[{var}]"), hi);
        }
    }
    let n = model.n_x();
    if problem.minimize_lambda {
        let mut bound = vars.q.expr().scale(-1.0);
        for i in 0..n {
            bound.terms.entry(lambda).or_default().push((i, i, 1.0));
        }
        program.psd("lambda_bound", bound);
        program.set_objective_coeff(lambda, 1.0);
    }
    (program, vars, lambda)
}

pub fn solve_synthesis(
    problem: &SynthesisProblem,
    backend: &dyn ConicBackend,
) -> Result<SynthesisSolution, SynthesisError> {
    problem.validate()?;
    let model = &problem.model;
    let mu = problem.mu;
    let vertices = model.vertices()?;
    let (program, vars, lambda_id) = build_program(problem, &vertices);
    let sol = backend.solve(&program);
    if sol.status == SolverStatus::Infeasible {
        return Err(SynthesisError::Infeasible { mu });
    }
    // A point from a solve that stopped early is still usable when it passes
    // the independent re-check below.
    let converged = matches!(sol.status, SolverStatus::Optimal | SolverStatus::Feasible);
    if sol.values.iter().any(|v| !v.is_finite()) {
        return Err(SynthesisError::BackendFailure { mu, status: sol.status });
    }
    let values = vars.values(&sol.values);
    let margins = ConstraintMargins::compute(model, &vertices, &values, mu);
    let eps = problem.strictness_eps;
    // rounding slack on top of the eps shift
    let slack = 1e-12;
    let checks = [
        ("containment", margins.min_containment(), eps - slack),
        ("decrease", margins.min_decrease(), eps - slack),
        ("Q", margins.q_min_eig, 0.0),
        ("G + G' - Q", margins.g_margin, 0.0),
    ];
    for (name, got, need) in checks {
        if !(got >= need) {
            if !converged {
                return Err(SynthesisError::BackendFailure { mu, status: sol.status });
            }
            return Err(SynthesisError::Verification {
                mu,
                detail: format!("{name} margin {got:e} < {need:e}"),
            });
        }
    }
    let gain =
        recover_gains(&values.m0, &values.m1, &values.g, &model.basis).ok_or_else(|| SynthesisError::Verification {
            mu,
            detail: "G is singular".into(),
        })?;
    let q_max = max_eig(&values.q);
    let lambda = if problem.minimize_lambda {
        sol.values[lambda_id].max(q_max)
    } else {
        q_max
    };
    Ok(SynthesisSolution {
        values,
        lambda,
        mu,
        gain,
        status: sol.status,
        iterations: sol.iterations,
        margins,
        theta_vertices: model.theta.vertices().iter().map(|v| v.as_slice().to_vec()).collect(),
    })
}

/// Outcome of one grid point of the μ sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuSample {
    pub mu: f64,
    pub lambda: Option<f64>,
    pub outcome: String,
}

#[derive(Debug, Clone)]
pub struct LineSearchResult {
    pub best: SynthesisSolution,
    /// Every evaluated μ in ascending order.
    pub curve: Vec<MuSample>,
}

/// Default grid `0.05, 0.10, …, 0.95`.
pub fn default_mu_grid() -> Vec<f64> {
    (1..=19).map(|i| i as f64 / 20.0).collect()
}

fn sample(problem: &SynthesisProblem, mu: f64, backend: &dyn ConicBackend) -> (MuSample, Option<SynthesisSolution>) {
    let mut p = problem.clone();
    p.mu = mu;
    p.minimize_lambda = true;
    match solve_synthesis(&p, backend) {
        Ok(s) => (
            MuSample {
                mu,
                lambda: Some(s.lambda),
                outcome: "feasible".into(),
            },
            Some(s),
        ),
        Err(e) => (
            MuSample {
                mu,
                lambda: None,
                outcome: e.to_string(),
            },
            None,
        ),
    }
}

/// Solves the λ-minimization at every grid μ (in parallel) and keeps the
/// smallest λ. With `refine`, a golden-section search then runs on the
/// bracket around the best grid point.
pub fn line_search_mu(
    template: &SynthesisProblem,
    grid: &[f64],
    refine: bool,
    backend: &dyn ConicBackend,
) -> Result<LineSearchResult, SynthesisError> {
    if grid.is_empty() {
        return Err(SynthesisError::InvalidProblem("empty mu grid".into()));
    }
    if let Some(bad) = grid.iter().find(|m| !(**m > 0.0 && **m < 1.0)) {
        return Err(SynthesisError::InvalidProblem(format!(
            "grid value {bad} not in (0, 1)"
        )));
    }
    let mut runs: Vec<(MuSample, Option<SynthesisSolution>)> =
        grid.par_iter().map(|&mu| sample(template, mu, backend)).collect();
    let best_idx = |runs: &[(MuSample, Option<SynthesisSolution>)]| {
        runs.iter()
            .enumerate()
            .filter_map(|(i, (_, s))| s.as_ref().map(|s| (i, s.lambda)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    };
    let Some(mut best) = best_idx(&runs) else {
        let mut curve: Vec<MuSample> = runs.into_iter().map(|r| r.0).collect();
        curve.sort_by(|a, b| a.mu.total_cmp(&b.mu));
        return Err(SynthesisError::AllInfeasible { curve });
    };
    if refine {
        let mut sorted: Vec<f64> = grid.to_vec();
        sorted.sort_by(f64::total_cmp);
        let pos = sorted.iter().position(|&m| m == runs[best].0.mu).unwrap_or(0);
        let mut lo = if pos > 0 { sorted[pos - 1] } else { sorted[pos] * 0.5 };
        let mut hi = if pos + 1 < sorted.len() {
            sorted[pos + 1]
        } else {
            (sorted[pos] + 1.0) * 0.5
        };
        let golden = (5.0_f64.sqrt() - 1.0) / 2.0;
        let lam = |r: &(MuSample, Option<SynthesisSolution>)| r.0.lambda.unwrap_or(f64::INFINITY);
        let mut a = hi - golden * (hi - lo);
        let mut b = lo + golden * (hi - lo);
        let mut ra = sample(template, a, backend);
        let mut rb = sample(template, b, backend);
        for _ in 0..8 {
            if lam(&ra) <= lam(&rb) {
                hi = b;
                b = a;
                runs.push(rb);
                rb = ra;
                a = hi - golden * (hi - lo);
                ra = sample(template, a, backend);
            } else {
                lo = a;
                a = b;
                runs.push(ra);
                ra = rb;
                b = lo + golden * (hi - lo);
                rb = sample(template, b, backend);
            }
        }
        runs.push(ra);
        runs.push(rb);
        best = best_idx(&runs).expect("grid point stays feasible");
    }
    let best_sol = runs[best].1.clone().expect("best index is feasible");
    let mut curve: Vec<MuSample> = runs.into_iter().map(|r| r.0).collect();
    curve.sort_by(|a, b| a.mu.total_cmp(&b.mu));
    Ok(LineSearchResult { best: best_sol, curve })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmi::InteriorPoint;
    use crate::polymodel::ParameterSet;

    fn vdp_fixed() -> Model {
        Model::van_der_pol(0.1)
            .with_theta_set(ParameterSet::point(vec![0.75]).unwrap())
            .unwrap()
    }

    #[test]
    fn zero_dynamics_needs_the_multiplier() {
        use crate::polymodel::{AffineMatrix, MonomialBasis};
        let basis = MonomialBasis::full(1, 1, &[0]).unwrap();
        let z = |r, c| AffineMatrix::constant(DMatrix::zeros(r, c), 0);
        let model = Model::new(
            z(1, 1),
            z(1, 1),
            z(1, 1),
            z(1, 1),
            DMatrix::from_element(1, 1, 1.0),
            basis,
            StateDomain::symmetric_box(1, &[(0, 1.0)]).unwrap(),
            ParameterSet::new(vec![DVector::zeros(0)]).unwrap(),
            1.0,
            1.0,
        )
        .unwrap();
        let v = DecisionValues {
            q: DMatrix::identity(1, 1),
            g: DMatrix::identity(1, 1),
            m0: DMatrix::zeros(1, 1),
            m1: DMatrix::zeros(1, 1),
            l: DMatrix::zeros(6, 2),
        };
        let vertex = Vertex {
            x: DVector::from_element(1, 1.0),
            theta: DVector::zeros(0),
        };
        let m = synthesis_matrix(&vertex, &v, 0.5, &model);
        let diag: Vec<f64> = m.diagonal().iter().copied().collect();
        assert_eq!(diag, vec![-0.5, 0.0, -0.5, -0.5, -1.0, 0.0]);
        assert!(max_eig(&m) >= 0.0);
    }

    #[test]
    fn expression_and_dense_assembly_agree() {
        let model = Model::van_der_pol(0.1);
        let mut program = LmiProgram::new();
        let vars = DecisionVars::declare(&mut program, &model);
        let y: Vec<f64> = (0..program.n_vars()).map(|i| ((i * 7 + 3) as f64).sin()).collect();
        let vals = vars.values(&y);
        for v in model.vertices().unwrap() {
            let sym = assemble_synthesis_lmi(&v, &vars, 0.4, &model).eval(&y);
            let dense = synthesis_matrix(&v, &vals, 0.4, &model);
            assert!((&sym - &dense).amax() < 1e-12);
        }
        for (c, h) in assemble_containment_lmis(&vars.q, &model.domain)
            .iter()
            .zip(model.domain.half_planes())
        {
            assert!((c.eval(&y) - containment_matrix(&vals.q, h)).amax() < 1e-12);
        }
    }

    #[test]
    fn vdp_fixed_theta_is_feasible() {
        let problem = SynthesisProblem::new(vdp_fixed(), 0.3);
        let sol = solve_synthesis(&problem, &InteriorPoint::default()).unwrap();
        assert!(sol.margins.min_decrease() >= 1e-8);
        assert!(sol.margins.min_containment() > 0.0);
        assert!(sol.lambda >= max_eig(sol.q()) - 1e-7);
        // K(x) has the structure K0 + k x1²: the x1 column block of K1 vanishes
        assert!(sol.gain.k1.columns(0, 3).amax() < 1e-6 * sol.gain.k0.amax());
        let x0 = DVector::zeros(3);
        assert_eq!(sol.gain.control(&x0)[0], 0.0);
    }

    #[test]
    fn vdp_full_interval_is_feasible() {
        let problem = SynthesisProblem::new(Model::van_der_pol(0.1), 0.3);
        let sol = solve_synthesis(&problem, &InteriorPoint::default()).unwrap();
        assert_eq!(sol.margins.decrease.len(), 4);
        assert!(sol.margins.min_decrease() >= 1e-8);
    }

    fn scalar_plant() -> Model {
        use crate::polymodel::{AffineMatrix, MonomialBasis};
        let m = |v: f64| AffineMatrix::constant(DMatrix::from_element(1, 1, v), 0);
        Model::new(
            m(0.5),
            AffineMatrix::constant(DMatrix::zeros(0, 1), 0),
            m(1.0),
            m(1.0),
            DMatrix::from_element(1, 1, 1.0),
            MonomialBasis::empty(1),
            StateDomain::symmetric_box(1, &[(0, 10.0)]).unwrap(),
            ParameterSet::new(vec![DVector::zeros(0)]).unwrap(),
            1.0,
            1.0,
        )
        .unwrap()
    }

    /// Smallest `Q` on a grid for which some closed-loop coefficient `a`
    /// makes `V = x²/Q` satisfy the one-step ISS decrease with `b = (1, 1)`.
    fn scalar_oracle(mu: f64) -> f64 {
        let feasible = |q: f64| {
            (-200..=200).any(|i| {
                let a = i as f64 * 0.005;
                let p = 1.0 / q;
                let v = DVector::from_column_slice(&[a, 1.0, 1.0]);
                let m = &v * v.transpose() * p
                    - DMatrix::from_diagonal(&DVector::from_column_slice(&[(1.0 - mu) * p, mu, mu]));
                max_eig(&m) < 0.0
            })
        };
        (1..20000).map(|i| i as f64 * 0.001).find(|&q| feasible(q)).unwrap()
    }

    #[test]
    fn scalar_plant_matches_grid_oracle() {
        let problem = SynthesisProblem::new(scalar_plant(), 0.5);
        let sol = solve_synthesis(&problem, &InteriorPoint::default()).unwrap();
        let oracle = scalar_oracle(0.5);
        assert!((sol.lambda - oracle).abs() < 2e-3, "{} vs {oracle}", sol.lambda);
        assert!((sol.gain.k0[(0, 0)] + 0.5).abs() < 0.05, "K0 = {}", sol.gain.k0);
    }

    #[test]
    fn near_one_mu_is_rejected() {
        let problem = SynthesisProblem::new(vdp_fixed(), 0.999);
        let r = solve_synthesis(&problem, &InteriorPoint::default());
        assert!(matches!(
            r,
            Err(SynthesisError::Infeasible { .. } | SynthesisError::BackendFailure { .. })
        ));
    }
}
