//! Subcommands: each reads its upstream artifacts from the output directory
//! and writes its own next to them.

use robust_esn::esn::EsnModelFile;
use robust_esn::lmi::{IssCertificateReport, MuSample, SolutionFile};
use robust_esn::sim::SimTrace;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::config::{RunConfig, ThetaSynthesis};
use crate::error::CliError;
use crate::pipeline::{self, Metrics, TuneRow};

pub const CONFIG: &str = "config.json";
pub const SOLUTION: &str = "solution.json";
pub const MU_CURVE: &str = "mu_curve.csv";
pub const CERTIFICATE: &str = "certificate.json";
pub const TRAINING: &str = "training.csv";
pub const ESN_MODEL: &str = "esn_model.json";
pub const ROBUST: &str = "robust.csv";
pub const COMBINED: &str = "combined.csv";
pub const METRICS: &str = "metrics.json";
pub const OUTPUT_PLOT: &str = "plot_output.csv";
pub const STATE_PLOT: &str = "plot_states.csv";
pub const ELLIPSOID_PLOT: &str = "plot_ellipsoid.csv";
pub const TUNE: &str = "tune.csv";

/// Command-line overrides applied on top of the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    /// Replaces both the data-collection and the reservoir seed.
    pub seed: Option<u64>,
    /// Synthesizes at this θ and simulates the plant at it.
    pub fixed_theta: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, mut cfg: RunConfig) -> Result<RunConfig, CliError> {
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.collection.seed = seed;
            cfg.esn.seed = seed;
        }
        if let Some(theta) = self.fixed_theta {
            cfg.theta_synthesis = ThetaSynthesis::Fixed { value: vec![theta] };
            cfg.plant_theta = vec![theta];
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(name)
}

fn ensure_out(cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))
}

fn require(cfg: &RunConfig, name: &str, producer: &str) -> Result<PathBuf, CliError> {
    let p = path(cfg, name);
    if !p.exists() {
        return Err(CliError::Validation(format!(
            "{} not found; run `{producer}` first",
            p.display()
        )));
    }
    Ok(p)
}

fn write_text(p: &Path, text: &str) -> Result<(), CliError> {
    fs::write(p, text).map_err(|e| CliError::io(p, e))
}

fn csv_writer(p: &Path) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    let f = File::create(p).map_err(|e| CliError::io(p, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

fn csv_err(p: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Other(format!("{}: {e}", p.display()))
}

fn write_trace(p: &Path, trace: &SimTrace<f64>) -> Result<(), CliError> {
    let f = File::create(p).map_err(|e| CliError::io(p, e))?;
    trace.write_csv(BufWriter::new(f))?;
    Ok(())
}

fn read_trace(p: &Path) -> Result<SimTrace<f64>, CliError> {
    let f = File::open(p).map_err(|e| CliError::io(p, e))?;
    Ok(SimTrace::read_csv(std::io::BufReader::new(f))?)
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn write_mu_curve(p: &Path, curve: &[MuSample]) -> Result<(), CliError> {
    let mut w = csv_writer(p)?;
    let err = csv_err(p);
    w.write_record(["mu", "lambda", "outcome"]).map_err(&err)?;
    for s in curve {
        let lambda = s.lambda.map(num).unwrap_or_default();
        w.write_record([num(s.mu), lambda, s.outcome.clone()]).map_err(&err)?;
    }
    w.flush().map_err(|e| CliError::io(p, e))
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report is serializable")
}

pub struct SynthSummary {
    pub solution: SolutionFile,
    pub certificate: IssCertificateReport,
    pub seconds: f64,
}

pub fn cmd_synth(cfg: &RunConfig) -> Result<SynthSummary, CliError> {
    ensure_out(cfg)?;
    write_text(&path(cfg, CONFIG), &cfg.to_json())?;
    let model = pipeline::load_model(cfg)?;
    let out = pipeline::run_synth(cfg, &model)?;
    let file = SolutionFile::from_solution(&out.solution);
    file.write(&path(cfg, SOLUTION))?;
    write_mu_curve(&path(cfg, MU_CURVE), &out.curve)?;
    write_text(&path(cfg, CERTIFICATE), &json(&out.certificate))?;
    if !out.certificate.passed() {
        return Err(CliError::Numerical(format!(
            "sampled ISS check failed: {} of {} samples violate the decrease condition",
            out.certificate.decrease_violations, out.certificate.samples
        )));
    }
    Ok(SynthSummary {
        solution: file,
        certificate: out.certificate,
        seconds: out.seconds,
    })
}

pub fn cmd_collect(cfg: &RunConfig) -> Result<SimTrace<f64>, CliError> {
    let solution = SolutionFile::read(&require(cfg, SOLUTION, "synth")?)?;
    let model = pipeline::load_model(cfg)?;
    let trace = pipeline::collect(cfg, &model, &solution.gain()?)?;
    write_trace(&path(cfg, TRAINING), &trace)?;
    Ok(trace)
}

pub fn cmd_train(cfg: &RunConfig) -> Result<EsnModelFile, CliError> {
    let trace = read_trace(&require(cfg, TRAINING, "collect")?)?;
    let out = pipeline::train(cfg, &trace, cfg.embedding)?;
    out.file.write(&path(cfg, ESN_MODEL))?;
    Ok(out.file)
}

/// Writes the robust-only trace and, unless `no_esn`, the combined one.
pub fn cmd_simulate(cfg: &RunConfig, no_esn: bool) -> Result<pipeline::SimOutput, CliError> {
    let solution = SolutionFile::read(&require(cfg, SOLUTION, "synth")?)?;
    let model = pipeline::load_model(cfg)?;
    let net = if no_esn {
        None
    } else {
        let file = EsnModelFile::read(&require(cfg, ESN_MODEL, "train")?)?;
        Some((file.model()?, file.embedding))
    };
    let out = pipeline::simulate_loops(cfg, &model, &solution.gain()?, net.as_ref().map(|(m, e)| (m, *e)))?;
    write_trace(&path(cfg, ROBUST), &out.robust)?;
    if let Some(c) = &out.combined {
        write_trace(&path(cfg, COMBINED), c)?;
    }
    Ok(out)
}

/// Metrics report plus plot data: output comparison, state trajectories
/// with `V(x) = xᵀPx`, and the boundary of the reachable set.
pub fn cmd_compare(cfg: &RunConfig, no_esn: bool) -> Result<Metrics, CliError> {
    let solution = SolutionFile::read(&require(cfg, SOLUTION, "synth")?)?;
    let model = pipeline::load_model(cfg)?;
    let robust = read_trace(&require(cfg, ROBUST, "simulate")?)?;
    let combined = if no_esn {
        None
    } else {
        Some(read_trace(&require(cfg, COMBINED, "simulate")?)?)
    };
    let p = solution.ellipsoid()?.p;
    let metrics = pipeline::compare(&model, &p, &robust, combined.as_ref())?;
    write_text(&path(cfg, METRICS), &json(&metrics))?;

    let out_plot = path(cfg, OUTPUT_PLOT);
    let err = csv_err(&out_plot);
    let mut w = csv_writer(&out_plot)?;
    w.write_record(["t", "y_robust", "y_combined", "d"]).map_err(&err)?;
    for (k, r) in robust.rows.iter().enumerate() {
        let yc = combined
            .as_ref()
            .and_then(|c| c.rows.get(k))
            .map(|c| num(c.y))
            .unwrap_or_default();
        w.write_record([num(r.t), num(r.y), yc, num(r.d)]).map_err(&err)?;
    }
    w.flush().map_err(|e| CliError::io(&out_plot, e))?;

    let states = path(cfg, STATE_PLOT);
    let err = csv_err(&states);
    let mut w = csv_writer(&states)?;
    let n_x = robust.n_x();
    let mut header = vec!["controller".to_string(), "t".to_string()];
    header.extend((1..=n_x).map(|i| format!("x{i}")));
    header.push("V".into());
    w.write_record(&header).map_err(&err)?;
    for (label, trace) in std::iter::once(("robust", &robust)).chain(combined.iter().map(|c| ("robust+esn", c))) {
        for r in &trace.rows {
            let v = (r.x.transpose() * &p * &r.x)[(0, 0)];
            let mut rec = vec![label.to_string(), num(r.t)];
            rec.extend(r.x.iter().map(|&x| num(x)));
            rec.push(num(v));
            w.write_record(&rec).map_err(&err)?;
        }
    }
    w.flush().map_err(|e| CliError::io(&states, e))?;

    if n_x == 3 {
        let ell = path(cfg, ELLIPSOID_PLOT);
        let err = csv_err(&ell);
        let mut w = csv_writer(&ell)?;
        w.write_record(["x1", "x2", "x3"]).map_err(&err)?;
        for pt in pipeline::ellipsoid_surface(&solution.q_matrix()?, 24, 48)? {
            w.write_record(pt.map(num)).map_err(&err)?;
        }
        w.flush().map_err(|e| CliError::io(&ell, e))?;
    }
    Ok(metrics)
}

pub fn cmd_tune(cfg: &RunConfig) -> Result<Vec<TuneRow>, CliError> {
    let solution = SolutionFile::read(&require(cfg, SOLUTION, "synth")?)?;
    let trace = read_trace(&require(cfg, TRAINING, "collect")?)?;
    let model = pipeline::load_model(cfg)?;
    let rows = pipeline::tune(cfg, &model, &solution.gain()?, &solution.ellipsoid()?.p, &trace)?;
    let p = path(cfg, TUNE);
    let err = csv_err(&p);
    let mut w = csv_writer(&p)?;
    w.write_record(["m", "delta", "rms_combined", "improvement_percent", "exits", "error"])
        .map_err(&err)?;
    for r in &rows {
        w.write_record([
            r.m.to_string(),
            r.delta.to_string(),
            r.rms_combined.map(num).unwrap_or_default(),
            r.improvement_percent.map(num).unwrap_or_default(),
            r.exits.map(|e| e.to_string()).unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| CliError::io(&p, e))?;
    Ok(rows)
}
