//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust_esn::esn::{init_reservoir, ridge_train, run_collect_from, EsnConfig};
use robust_esn::lmi::{
    default_mu_grid, line_search_mu, solve_synthesis, verify_iss_decrease, verify_iss_decrease_with, InteriorPoint,
    PolynomialGain, SolutionFile, SynthesisProblem,
};
use robust_esn::polymodel::{Annihilator, MonomialBasis, ParameterSet};
use robust_esn::sim::SimTrace;
use robust_esn::Model;
use robust_esn_cli::commands::{self, cmd_collect, cmd_compare, cmd_simulate, cmd_synth, cmd_train};
use robust_esn_cli::RunConfig;
use std::path::{Path, PathBuf};
use std::time::Instant;

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: u32, name: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, name, pass, detail }
}

fn fixed_model() -> Model {
    Model::van_der_pol(0.1)
        .with_theta_set(ParameterSet::point(vec![0.75]).unwrap())
        .unwrap()
}

fn preset(out: &Path) -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/vdp_benchmark.json");
    let mut cfg = RunConfig::load(&path).expect("preset parses");
    cfg.output_dir = out.to_path_buf();
    cfg
}

fn read_trace(dir: &Path, name: &str) -> SimTrace<f64> {
    SimTrace::read_csv(std::fs::File::open(dir.join(name)).unwrap()).unwrap()
}

fn criterion_1() -> (Outcome, Option<robust_esn::lmi::SynthesisSolution>) {
    let start = Instant::now();
    let result = solve_synthesis(&SynthesisProblem::new(fixed_model(), 0.3), &InteriorPoint::default());
    let secs = start.elapsed().as_secs_f64();
    let name = "synthesis feasibility at fixed theta = 0.75, mu = 0.3";
    match result {
        Ok(sol) => {
            let m = &sol.margins;
            let worst = m.min_containment().min(m.min_decrease());
            let pass = worst >= 1e-8 && m.q_min_eig > 0.0 && secs < 60.0;
            let detail = format!(
                "lambda = {:.6e}, min eigen-margin {:.3e} over {} vertex LMIs (need >= 1e-8), {:.2} s (need < 60 s)",
                sol.lambda,
                worst,
                m.decrease.len(),
                secs
            );
            (outcome(1, name, pass, detail), Some(sol))
        }
        Err(e) => (outcome(1, name, false, format!("synthesis failed: {e}")), None),
    }
}

fn criterion_2() -> (Outcome, Option<robust_esn::lmi::SynthesisSolution>) {
    let name = "mu line search over 0.05:0.05:0.95 selects mu in [0.2, 0.4]";
    let grid = default_mu_grid();
    let mut parts = Vec::new();
    let mut pass = true;
    let mut interval_solution = None;
    for (label, model) in [
        ("fixed theta", fixed_model()),
        ("theta interval", Model::van_der_pol(0.1)),
    ] {
        match line_search_mu(
            &SynthesisProblem::new(model, grid[0]),
            &grid,
            false,
            &InteriorPoint::default(),
        ) {
            Ok(r) => {
                let mu = r.best.mu;
                pass &= (0.2 - 1e-12..=0.4 + 1e-12).contains(&mu);
                parts.push(format!("{label}: mu = {mu:.2} (lambda {:.6e})", r.best.lambda));
                if label == "theta interval" {
                    interval_solution = Some(r.best);
                }
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{label}: {e}"));
            }
        }
    }
    (outcome(2, name, pass, parts.join("; ")), interval_solution)
}

fn scaled(gain: &PolynomialGain<f64>, s: f64) -> PolynomialGain<f64> {
    PolynomialGain::new(&gain.k0 * s, &gain.k1 * s, gain.basis.clone())
}

fn criterion_3(
    fixed: Option<&robust_esn::lmi::SynthesisSolution>,
    interval: Option<&robust_esn::lmi::SynthesisSolution>,
) -> Outcome {
    let name = "sampled ISS decrease check, 1e4 samples, with x10 gain negative control";
    let (Some(fixed), Some(interval)) = (fixed, interval) else {
        return outcome(3, name, false, "no solution from criteria 1/2".into());
    };
    let a = verify_iss_decrease(fixed, &fixed_model(), 10_000, 11);
    let b = verify_iss_decrease(interval, &Model::van_der_pol(0.1), 10_000, 12);
    let bad = verify_iss_decrease_with(
        &scaled(&fixed.gain, 10.0),
        fixed.q(),
        fixed.mu,
        &fixed_model(),
        10_000,
        11,
    );
    let pass = a.decrease_violations == 0 && b.decrease_violations == 0 && bad.decrease_violations > 0;
    let detail = format!(
        "fixed theta: {} violations (max residual {:.3e}); theta vertices+midpoint: {} violations (max residual {:.3e}); x10 gain: {} violations",
        a.decrease_violations, a.max_residual, b.decrease_violations, b.max_residual, bad.decrease_violations
    );
    outcome(3, name, pass, detail)
}

/// `Π(x)` built from the monomial exponents: block `j` is `m_j(x)·I`.
fn pi_oracle(basis: &MonomialBasis, x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let monos: Vec<_> = basis.monomials().cloned().collect();
    let mut pi = DMatrix::zeros(monos.len() * n, n);
    for (j, exps) in monos.iter().enumerate() {
        let m: f64 = exps.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product();
        for i in 0..n {
            pi[(j * n + i, i)] = m;
        }
    }
    pi
}

fn criterion_5() -> Outcome {
    let name = "annihilator identities for q <= 3, n_x <= 4";
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_res = 0.0f64;
    let mut worst_det = 0.0f64;
    let mut cases = 0;
    for n_x in 1..=4 {
        for q in 1..=3 {
            let active: Vec<usize> = (0..n_x).collect();
            let basis = MonomialBasis::full(n_x, q, &active).unwrap();
            let ann = Annihilator::<f64>::build(&basis);
            let (_, o1_ref) = ann.eval(&DVector::zeros(n_x));
            let det_ref = o1_ref.determinant();
            for _ in 0..100 {
                let x: Vec<f64> = (0..n_x).map(|_| rng.random_range(-2.0..2.0)).collect();
                let (o0, o1) = ann.eval(&DVector::from_column_slice(&x));
                let r = &o0 + &o1 * pi_oracle(&basis, &x);
                worst_res = worst_res.max(r.amax());
                worst_det = worst_det.max((o1.determinant() - det_ref).abs() / det_ref.abs());
            }
            cases += 1;
        }
    }
    let pass = worst_res < 1e-12 && worst_det < 1e-9;
    let detail = format!(
        "{cases} bases x 100 points: max |Omega0 + Omega1 Pi| = {worst_res:.3e} (need < 1e-12), max relative det change {worst_det:.3e} (need < 1e-9)"
    );
    outcome(5, name, pass, detail)
}

/// Ridge solution from the QR factorization of `[Ξ; √λ I]`, which never
/// forms `ΞᵀΞ`.
fn ridge_oracle(xi: &DMatrix<f64>, sigma: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let (r, c) = xi.shape();
    let mut a = DMatrix::zeros(r + c, c);
    a.view_mut((0, 0), (r, c)).copy_from(xi);
    for i in 0..c {
        a[(r + i, i)] = lambda.sqrt();
    }
    let mut b = DMatrix::zeros(r + c, sigma.ncols());
    b.view_mut((0, 0), (r, sigma.ncols())).copy_from(sigma);
    let qr = a.qr();
    let rhs = qr.q().transpose() * b;
    qr.r().solve_upper_triangular(&rhs).expect("full rank")
}

fn criterion_6() -> Outcome {
    let name = "ESN oracles: ridge, reservoir norm, echo state";
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut ridge_err = 0.0f64;
    for lambda in [1e-6, 1e-3, 1.0] {
        for _ in 0..5 {
            let xi = DMatrix::from_fn(200, 50, |_, _| rng.random_range(-1.0..1.0));
            let sigma = DMatrix::from_fn(200, 2, |_, _| rng.random_range(-1.0..1.0));
            let w = ridge_train(&xi, &sigma, lambda).unwrap().transpose();
            let o = ridge_oracle(&xi, &sigma, lambda);
            ridge_err = ridge_err.max((w - &o).norm() / o.norm());
        }
    }
    let cfg = EsnConfig::default();
    let esn = init_reservoir::<f64>(&cfg).unwrap();
    let sv = esn.w_rr.clone().singular_values().max();
    let upsilon = DMatrix::from_fn(101, cfg.n_upsilon, |_, _| rng.random_range(-1.0..1.0));
    let start = DVector::from_fn(cfg.n, |_, _| rng.random_range(-1.0..1.0));
    // Row 0 after a washout of 100 is the state after the 100th input.
    let a = run_collect_from(&esn, &upsilon, 99, DVector::zeros(cfg.n)).unwrap();
    let b = run_collect_from(&esn, &upsilon, 99, start).unwrap();
    let gap = (a.row(0) - b.row(0)).amax();
    let pass = ridge_err < 1e-9 && (sv - 0.5).abs() <= 1e-10 && gap < 1e-6;
    let detail = format!(
        "ridge vs QR oracle rel err {ridge_err:.3e} (need < 1e-9); ||W_RR||_2 = {sv:.15} (need 0.5 +- 1e-10); state gap after 100 steps {gap:.3e} (need < 1e-6)"
    );
    outcome(6, name, pass, detail)
}

struct PipelineRun {
    dir: tempfile::TempDir,
    improvement: f64,
    seconds: f64,
}

fn run_pipeline() -> Result<PipelineRun, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = preset(dir.path());
    let start = Instant::now();
    cmd_synth(&cfg).map_err(|e| e.to_string())?;
    cmd_collect(&cfg).map_err(|e| e.to_string())?;
    cmd_train(&cfg).map_err(|e| e.to_string())?;
    cmd_simulate(&cfg, false).map_err(|e| e.to_string())?;
    let metrics = cmd_compare(&cfg, false).map_err(|e| e.to_string())?;
    let improvement = metrics.improvement_percent.ok_or("no combined run")?;
    Ok(PipelineRun {
        dir,
        improvement,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn criterion_4(run: Option<&PipelineRun>) -> Outcome {
    let name = "reachable set inside the state box, both closed loops stay inside";
    let Some(run) = run else {
        return outcome(4, name, false, "pipeline failed".into());
    };
    let dir = run.dir.path();
    let sol = SolutionFile::read(&dir.join(commands::SOLUTION)).unwrap();
    let q = sol.q_matrix().unwrap();
    let margins: Vec<f64> = [0.5, -0.5]
        .iter()
        .map(|&h| {
            let h = DVector::from_column_slice(&[h, 0.0, 0.0]);
            1.0 - (h.transpose() * &q * h)[(0, 0)]
        })
        .collect();
    let p = q.clone().try_inverse().unwrap();
    let mut parts = vec![format!("1 - h'Qh = {:.6} / {:.6}", margins[0], margins[1])];
    let mut pass = margins.iter().all(|&m| m > 0.0);
    for file in [commands::ROBUST, commands::COMBINED] {
        let trace = read_trace(dir, file);
        let forms: Vec<f64> = trace
            .rows
            .iter()
            .map(|r| (r.x.transpose() * &p * &r.x)[(0, 0)])
            .collect();
        let exits = forms.iter().filter(|&&v| v > 1.0).count();
        let max = forms.iter().cloned().fold(0.0, f64::max);
        pass &= exits == 0 && trace.len() == 600;
        parts.push(format!(
            "{file}: {exits} exits in {} samples, max x'Px {max:.4}",
            trace.len()
        ));
    }
    outcome(4, name, pass, parts.join("; "))
}

fn criterion_7(run: &Result<PipelineRun, String>) -> Outcome {
    let name = "end-to-end RMS(y) improvement >= 30% (reference 54.36%)";
    match run {
        Ok(r) => {
            let pass = r.improvement >= 30.0 && r.seconds < 600.0;
            outcome(
                7,
                name,
                pass,
                format!("achieved {:.2}% in {:.1} s", r.improvement, r.seconds),
            )
        }
        Err(e) => outcome(7, name, false, format!("pipeline failed: {e}")),
    }
}

fn criterion_8(run: Option<&PipelineRun>) -> Outcome {
    let name = "|u2| <= 1/sqrt(2) and |d| <= 1/sqrt(2) in every simulation";
    let Some(run) = run else {
        return outcome(8, name, false, "pipeline failed".into());
    };
    let bound = std::f64::consts::FRAC_1_SQRT_2;
    let mut pass = true;
    let mut parts = Vec::new();
    for file in [commands::TRAINING, commands::ROBUST, commands::COMBINED] {
        let trace = read_trace(run.dir.path(), file);
        let u2 = trace.rows.iter().map(|r| r.u2.abs()).fold(0.0, f64::max);
        let d = trace.rows.iter().map(|r| r.d.abs()).fold(0.0, f64::max);
        pass &= u2 <= bound && d <= bound;
        parts.push(format!("{file}: max|u2| {u2:.6}, max|d| {d:.6}"));
    }
    outcome(8, name, pass, parts.join("; "))
}

fn criterion_9(first: Option<&PipelineRun>) -> Outcome {
    let name = "repeated pipeline gives byte-identical CSVs";
    let Some(first) = first else {
        return outcome(9, name, false, "pipeline failed".into());
    };
    let second = match run_pipeline() {
        Ok(r) => r,
        Err(e) => return outcome(9, name, false, format!("second run failed: {e}")),
    };
    let files = [
        commands::MU_CURVE,
        commands::TRAINING,
        commands::ROBUST,
        commands::COMBINED,
        commands::OUTPUT_PLOT,
        commands::STATE_PLOT,
        commands::ELLIPSOID_PLOT,
    ];
    let differing: Vec<&str> = files
        .iter()
        .copied()
        .filter(|f| {
            let read = |d: &Path| std::fs::read(PathBuf::from(d).join(f)).unwrap_or_default();
            let a = read(first.dir.path());
            a.is_empty() || a != read(second.dir.path())
        })
        .collect();
    let detail = if differing.is_empty() {
        format!("{} files identical", files.len())
    } else {
        format!("differing or missing: {}", differing.join(", "))
    };
    outcome(9, name, differing.is_empty(), detail)
}

fn main() {
    let (c1, fixed) = criterion_1();
    let (c2, interval) = criterion_2();
    let c3 = criterion_3(fixed.as_ref(), interval.as_ref());
    let c5 = criterion_5();
    let c6 = criterion_6();
    let run = run_pipeline();
    let c4 = criterion_4(run.as_ref().ok());
    let c7 = criterion_7(&run);
    let c8 = criterion_8(run.as_ref().ok());
    let c9 = criterion_9(run.as_ref().ok());
    let mut all = [c1, c2, c3, c4, c5, c6, c7, c8, c9];
    all.sort_by_key(|o| o.id);
    println!();
    for o in &all {
        println!(
            "{} [{}] {}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.detail
        );
    }
    let failed = all.iter().filter(|o| !o.pass).count();
    println!("\n{} of {} acceptance criteria passed", all.len() - failed, all.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
