//! The stages behind each subcommand. Every stage is a plain function of the
//! configuration and upstream artifacts so tests can drive them in memory.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use robust_esn::esn::{
    build_inverse_dataset, init_reservoir, normal_equations_residual, run_collect, EmbeddingSpec, EsnModel,
    EsnModelFile, InverseController,
};
use robust_esn::lmi::{
    line_search_mu, verify_iss_decrease, InteriorPoint, IssCertificateReport, MuSample, PolynomialGain,
    SynthesisProblem, SynthesisSolution,
};
use robust_esn::polymodel::{ParameterSet, PlantFile};
use robust_esn::sim::{
    check_containment, gen_training_signals, improvement_factor, rms, simulate, ContainmentReport, DiscretePlant,
    Disturbance, OuterLoop, Plant, SimTrace, VanDerPolPlant,
};
use robust_esn::Model;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::config::{RunConfig, ThetaSynthesis};
use crate::error::CliError;

/// Builds the synthesis model with the configured parameter set.
pub fn load_model(cfg: &RunConfig) -> Result<Model, CliError> {
    let model = match cfg.plant_path() {
        None => Model::van_der_pol(cfg.ts),
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            PlantFile::parse(&text)?.into_model::<f64>()?
        }
    };
    match &cfg.theta_synthesis {
        ThetaSynthesis::Vertices => Ok(model),
        ThetaSynthesis::Fixed { value } => Ok(model.with_theta_set(ParameterSet::point(value.clone())?)?),
    }
}

/// The plant that is actually simulated: the continuous Van der Pol
/// oscillator for the builtin, the discrete model otherwise.
#[derive(Debug, Clone)]
pub enum SimPlant {
    VanDerPol(VanDerPolPlant<f64>),
    Discrete(Box<DiscretePlant<f64>>),
}

impl Plant<f64> for SimPlant {
    fn n_x(&self) -> usize {
        match self {
            SimPlant::VanDerPol(p) => p.n_x(),
            SimPlant::Discrete(p) => p.n_x(),
        }
    }

    fn output(&self, x: &DVector<f64>) -> f64 {
        match self {
            SimPlant::VanDerPol(p) => p.output(x),
            SimPlant::Discrete(p) => p.output(x),
        }
    }

    fn advance(&self, x: &DVector<f64>, u: f64, d: &Disturbance<f64>, t0: f64, ts: f64) -> DVector<f64> {
        match self {
            SimPlant::VanDerPol(p) => p.advance(x, u, d, t0, ts),
            SimPlant::Discrete(p) => p.advance(x, u, d, t0, ts),
        }
    }
}

pub fn sim_plant(cfg: &RunConfig, model: &Model) -> Result<SimPlant, CliError> {
    if cfg.is_builtin_vdp() {
        let [theta] = cfg.plant_theta[..] else {
            return Err(CliError::Validation(
                "plant_theta of the builtin plant is a single value".into(),
            ));
        };
        return Ok(SimPlant::VanDerPol(VanDerPolPlant::new(theta)));
    }
    if cfg.plant_theta.len() != model.n_theta() {
        return Err(CliError::Validation(format!(
            "plant_theta has {} entries, the plant has {} parameters",
            cfg.plant_theta.len(),
            model.n_theta()
        )));
    }
    Ok(SimPlant::Discrete(Box::new(DiscretePlant {
        model: model.clone(),
        theta: DVector::from_column_slice(&cfg.plant_theta),
    })))
}

fn state(x: &[f64], n_x: usize, what: &str) -> Result<DVector<f64>, CliError> {
    if x.len() != n_x {
        return Err(CliError::Validation(format!(
            "{what} has {} entries, the plant has {n_x} states",
            x.len()
        )));
    }
    Ok(DVector::from_column_slice(x))
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub solution: SynthesisSolution,
    pub curve: Vec<MuSample>,
    pub certificate: IssCertificateReport,
    pub seconds: f64,
}

pub fn synthesis_template(cfg: &RunConfig, model: &Model) -> SynthesisProblem {
    SynthesisProblem {
        strictness_eps: cfg.strictness_eps,
        variable_bound: cfg.variable_bound,
        ..SynthesisProblem::new(model.clone(), cfg.mu_grid[0])
    }
}

/// μ line search followed by the sampled ISS check of the winner.
pub fn run_synth(cfg: &RunConfig, model: &Model) -> Result<SynthOutput, CliError> {
    let start = Instant::now();
    let template = synthesis_template(cfg, model);
    let found = line_search_mu(&template, &cfg.mu_grid, cfg.mu_refine, &InteriorPoint::default())?;
    let certificate = verify_iss_decrease(&found.best, model, cfg.certificate_samples, cfg.certificate_seed);
    Ok(SynthOutput {
        solution: found.best,
        curve: found.curve,
        certificate,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Closed loop under the robust gain with a random `u₂` excitation and a
/// random disturbance.
pub fn collect(cfg: &RunConfig, model: &Model, gain: &PolynomialGain<f64>) -> Result<SimTrace<f64>, CliError> {
    let plant = sim_plant(cfg, model)?;
    let c = &cfg.collection;
    let signals = gen_training_signals::<f64>(&c.u2, &c.d, c.length, cfg.ts, c.seed);
    let x0 = state(&c.x0, plant.n_x(), "collection.x0")?;
    let mut outer = OuterLoop::Excitation(signals.u2);
    let mut trace = simulate(&plant, gain, &mut outer, &signals.d, &x0, cfg.ts, c.length)?;
    trace.metadata.insert("seed".into(), c.seed.to_string());
    Ok(trace)
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: EsnModel<f64>,
    pub file: EsnModelFile,
}

/// Fits the inverse model on a collected trace.
pub fn train(cfg: &RunConfig, trace: &SimTrace<f64>, embedding: EmbeddingSpec) -> Result<TrainOutput, CliError> {
    let (y, u1, u2) = trace.io_matrices();
    let data = build_inverse_dataset(&y, &u1, &u2, &embedding)?;
    let esn_cfg = cfg.esn_config_for(&embedding);
    let model = data.fit(init_reservoir(&esn_cfg)?, cfg.washout)?;
    let states = run_collect(&model, &data.upsilon, cfg.washout)?;
    let targets = data.sigma.rows(cfg.washout, data.len() - cfg.washout).into_owned();
    let mut file = EsnModelFile::from_model(&model, embedding, cfg.washout);
    file.train_residual = normal_equations_residual(&states, &targets, esn_cfg.lambda_ridge, &model.w_out);
    let err: DMatrix<f64> = &states * model.w_out.transpose() - &targets;
    file.train_rmse = (err.norm_squared() / err.len() as f64).sqrt();
    Ok(TrainOutput { model, file })
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub robust: SimTrace<f64>,
    pub combined: Option<SimTrace<f64>>,
}

/// The evaluation scenario under `u = u₁` and, given a network, under
/// `u = u₁ + u₂`.
pub fn simulate_loops(
    cfg: &RunConfig,
    model: &Model,
    gain: &PolynomialGain<f64>,
    esn: Option<(&EsnModel<f64>, EmbeddingSpec)>,
) -> Result<SimOutput, CliError> {
    let plant = sim_plant(cfg, model)?;
    let n = cfg.sim_samples();
    let d = cfg.simulation.disturbance.realize::<f64>(cfg.ts, n);
    let x0 = state(&cfg.simulation.x0, plant.n_x(), "simulation.x0")?;
    let robust = simulate(&plant, gain, &mut OuterLoop::None, &d, &x0, cfg.ts, n)?;
    let combined = match esn {
        None => None,
        Some((net, embedding)) => {
            let controller = InverseController::new(net.clone(), embedding)?;
            let mut outer = OuterLoop::Esn {
                controller: Box::new(controller),
                eta_u: model.eta_u,
            };
            Some(simulate(&plant, gain, &mut outer, &d, &x0, cfg.ts, n)?)
        }
    };
    Ok(SimOutput { robust, combined })
}

/// `|u₂|` and `|d|` against the largest values the unit-ball disturbance
/// set allows per channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub u2_bound: f64,
    pub max_abs_u2: f64,
    pub u2_violations: usize,
    pub d_bound: f64,
    pub max_abs_d: f64,
    pub d_violations: usize,
}

impl BoundReport {
    pub fn new(model: &Model) -> Self {
        Self {
            u2_bound: 1.0 / (2f64.sqrt() * model.eta_u),
            max_abs_u2: 0.0,
            u2_violations: 0,
            d_bound: 1.0 / (2f64.sqrt() * model.eta_d),
            max_abs_d: 0.0,
            d_violations: 0,
        }
    }

    pub fn add(&mut self, trace: &SimTrace<f64>) {
        for r in &trace.rows {
            self.max_abs_u2 = self.max_abs_u2.max(r.u2.abs());
            self.max_abs_d = self.max_abs_d.max(r.d.abs());
            self.u2_violations += usize::from(r.u2.abs() > self.u2_bound);
            self.d_violations += usize::from(r.d.abs() > self.d_bound);
        }
    }

    pub fn ok(&self) -> bool {
        self.u2_violations == 0 && self.d_violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub samples: usize,
    pub rms_robust: f64,
    pub rms_combined: Option<f64>,
    /// `100 · (1 − rms_combined / rms_robust)`.
    pub improvement_percent: Option<f64>,
    pub containment_robust: ContainmentReport,
    pub containment_combined: Option<ContainmentReport>,
    pub bounds: BoundReport,
}

pub fn compare(
    model: &Model,
    p: &DMatrix<f64>,
    robust: &SimTrace<f64>,
    combined: Option<&SimTrace<f64>>,
) -> Result<Metrics, CliError> {
    let rms_robust = rms(&robust.y())?;
    let rms_combined = combined.map(|c| rms(&c.y())).transpose()?;
    let mut bounds = BoundReport::new(model);
    bounds.add(robust);
    if let Some(c) = combined {
        bounds.add(c);
    }
    Ok(Metrics {
        samples: robust.len(),
        rms_robust,
        rms_combined,
        improvement_percent: rms_combined.map(|c| improvement_factor(c, rms_robust)),
        containment_robust: check_containment(robust, p),
        containment_combined: combined.map(|c| check_containment(c, p)),
        bounds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneRow {
    pub m: usize,
    pub delta: usize,
    pub rms_combined: Option<f64>,
    pub improvement_percent: Option<f64>,
    pub exits: Option<usize>,
    pub error: Option<String>,
}

/// Scores every `(m, δ)` in `{1..3} × {1..5}` by closed-loop RMS on one
/// shared training trace.
pub fn tune(
    cfg: &RunConfig,
    model: &Model,
    gain: &PolynomialGain<f64>,
    p: &DMatrix<f64>,
    trace: &SimTrace<f64>,
) -> Result<Vec<TuneRow>, CliError> {
    let grid: Vec<(usize, usize)> = (1..=3).flat_map(|m| (1..=5).map(move |d| (m, d))).collect();
    let rows = grid
        .par_iter()
        .map(|&(m, delta)| {
            let run = || -> Result<(f64, f64, usize), CliError> {
                let embedding = EmbeddingSpec::new(m, delta)?;
                let net = train(cfg, trace, embedding)?;
                let out = simulate_loops(cfg, model, gain, Some((&net.model, embedding)))?;
                let combined = out.combined.expect("network given");
                let metrics = compare(model, p, &out.robust, Some(&combined))?;
                let exits = metrics.containment_combined.map_or(0, |c| c.violations);
                Ok((
                    metrics.rms_combined.unwrap_or(f64::NAN),
                    metrics.improvement_percent.unwrap_or(f64::NAN),
                    exits,
                ))
            };
            match run() {
                Ok((r, imp, exits)) => TuneRow {
                    m,
                    delta,
                    rms_combined: Some(r),
                    improvement_percent: Some(imp),
                    exits: Some(exits),
                    error: None,
                },
                Err(e) => TuneRow {
                    m,
                    delta,
                    rms_combined: None,
                    improvement_percent: None,
                    exits: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(rows)
}

/// Lowest RMS among runs that stayed inside the reachable set.
pub fn best_tune_row(rows: &[TuneRow]) -> Option<&TuneRow> {
    rows.iter()
        .filter(|r| r.exits == Some(0))
        .filter_map(|r| r.rms_combined.map(|v| (r, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(r, _)| r)
}

/// Points `x = L s` on the boundary of `{x : xᵀPx ≤ 1}` with `Q = LLᵀ` and
/// `s` on a latitude/longitude grid of the unit sphere. Three-state plants
/// only.
pub fn ellipsoid_surface(q: &DMatrix<f64>, n_lat: usize, n_lon: usize) -> Result<Vec<[f64; 3]>, CliError> {
    if q.shape() != (3, 3) {
        return Err(CliError::Validation("ellipsoid surface needs a 3-state plant".into()));
    }
    let l = q
        .clone()
        .cholesky()
        .ok_or_else(|| CliError::Numerical("Q is not positive definite".into()))?
        .unpack();
    let mut pts = Vec::with_capacity((n_lat + 1) * n_lon);
    for i in 0..=n_lat {
        let phi = std::f64::consts::PI * i as f64 / n_lat as f64;
        for j in 0..n_lon {
            let psi = 2.0 * std::f64::consts::PI * j as f64 / n_lon as f64;
            let s = DVector::from_column_slice(&[phi.sin() * psi.cos(), phi.sin() * psi.sin(), phi.cos()]);
            let x = &l * s;
            pts.push([x[0], x[1], x[2]]);
        }
    }
    Ok(pts)
}
