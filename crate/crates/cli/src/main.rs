use clap::{Parser, Subcommand};
use robust_esn_cli::commands::{self, cmd_collect, cmd_compare, cmd_simulate, cmd_synth, cmd_train, cmd_tune};
use robust_esn_cli::pipeline::best_tune_row;
use robust_esn_cli::{CliError, Overrides, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Robust polynomial state feedback with an echo state network outer loop.
///
/// Exit codes: 0 success, 1 other failure, 2 invalid input, 3 infeasible
/// synthesis, 4 numerical failure.
#[derive(Debug, Parser)]
#[command(name = "robust-esn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; omitted fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for all artifacts, overriding `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for data collection and reservoir initialization.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Synthesize at a single θ and simulate the plant at it.
    #[arg(long, global = true, allow_negative_numbers = true)]
    fixed_theta: Option<f64>,
    /// Skip the network: simulate and compare the robust loop only.
    #[arg(long, global = true)]
    no_esn: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// μ line search, solution file and sampled ISS check.
    Synth,
    /// Closed-loop training trace under random excitation.
    Collect,
    /// Fit the inverse-model readout.
    Train,
    /// Evaluation scenario under the robust and the combined controller.
    Simulate,
    /// RMS, improvement, containment and plot data.
    Compare,
    /// Grid over the embedding order and delay.
    Tune,
    /// synth, collect, train, simulate and compare in sequence.
    Run,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let base = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let overrides = Overrides {
        out: cli.out.clone(),
        seed: cli.seed,
        fixed_theta: cli.fixed_theta,
    };
    let cfg = overrides.apply(base)?;
    let dir = cfg.output_dir.display().to_string();
    let synth = |cfg: &RunConfig| -> Result<(), CliError> {
        let s = cmd_synth(cfg)?;
        println!(
            "synth: mu = {} lambda = {:.6e} ({:.1} s); ISS check {}/{} ok; wrote {dir}/{}",
            s.solution.mu,
            s.solution.lambda,
            s.seconds,
            s.certificate.samples - s.certificate.decrease_violations,
            s.certificate.samples,
            commands::SOLUTION
        );
        Ok(())
    };
    let collect = |cfg: &RunConfig| -> Result<(), CliError> {
        let t = cmd_collect(cfg)?;
        println!("collect: {} samples; wrote {dir}/{}", t.len(), commands::TRAINING);
        Ok(())
    };
    let train = |cfg: &RunConfig| -> Result<(), CliError> {
        let f = cmd_train(cfg)?;
        println!(
            "train: m = {} delta = {}; readout rmse {:.3e}; wrote {dir}/{}",
            f.embedding.m,
            f.embedding.delta,
            f.train_rmse,
            commands::ESN_MODEL
        );
        Ok(())
    };
    let simulate = |cfg: &RunConfig| -> Result<(), CliError> {
        let out = cmd_simulate(cfg, cli.no_esn)?;
        println!(
            "simulate: {} samples per run; wrote {dir}/{}",
            out.robust.len(),
            commands::ROBUST
        );
        Ok(())
    };
    let compare = |cfg: &RunConfig| -> Result<(), CliError> {
        let m = cmd_compare(cfg, cli.no_esn)?;
        print!("compare: rms robust {:.6}", m.rms_robust);
        if let (Some(c), Some(i)) = (m.rms_combined, m.improvement_percent) {
            print!(", combined {c:.6}, improvement {i:.2}%");
        }
        let exits = m.containment_robust.violations + m.containment_combined.as_ref().map_or(0, |c| c.violations);
        println!(
            "; {exits} exits from the reachable set; wrote {dir}/{}",
            commands::METRICS
        );
        Ok(())
    };
    match cli.command {
        Command::Synth => synth(&cfg),
        Command::Collect => collect(&cfg),
        Command::Train => train(&cfg),
        Command::Simulate => simulate(&cfg),
        Command::Compare => compare(&cfg),
        Command::Tune => {
            let rows = cmd_tune(&cfg)?;
            match best_tune_row(&rows) {
                Some(b) => println!(
                    "tune: best m = {} delta = {} (improvement {:.2}%); wrote {dir}/{}",
                    b.m,
                    b.delta,
                    b.improvement_percent.unwrap_or(f64::NAN),
                    commands::TUNE
                ),
                None => println!(
                    "tune: no embedding kept the state inside the reachable set; wrote {dir}/{}",
                    commands::TUNE
                ),
            }
            Ok(())
        }
        Command::Run => {
            synth(&cfg)?;
            collect(&cfg)?;
            if !cli.no_esn {
                train(&cfg)?;
            }
            simulate(&cfg)?;
            compare(&cfg)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
