use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use mcarfima::config::{EstimatorKind, ExperimentConfig, ModelChoice};
use mcarfima::harness;
use mcarfima::Result;

#[derive(Parser)]
#[command(name = "mcarfima", version, about = "Simulate MC-ARFIMA processes and estimate Hurst exponents")]
struct Cli {
    /// Log level filter (error, warn, info, debug)
    #[arg(long, global = true, default_value = "warn")]
    log: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one t,x,y file per replication
    Simulate(Common),
    /// Run the estimators on a series file with x and y columns
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Write theoretical exponents, CCF and (fractional models) cross spectrum
    Theory(Common),
    /// Replicated simulation and estimation with an aggregate summary
    Experiment(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config file; flags below override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset model name (model1, model2, model3)
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Series length
    #[arg(long = "T", value_name = "T")]
    len: Option<usize>,
    /// MA truncation horizon
    #[arg(long)]
    truncation: Option<usize>,
    /// Comma-separated subset of dfa,dcca,hxa,ccf
    #[arg(long, value_delimiter = ',')]
    estimators: Option<Vec<EstimatorKind>>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::for_preset("model1"),
        };
        if let Some(m) = &self.model {
            cfg.model = ModelChoice::Preset(m.clone());
        }
        if let Some(v) = self.seed {
            cfg.base_seed = v;
        }
        if let Some(v) = self.reps {
            cfg.replications = v;
        }
        if let Some(v) = self.len {
            cfg.len = v;
        }
        if let Some(v) = self.truncation {
            cfg.truncation = Some(v);
        }
        if let Some(v) = &self.estimators {
            cfg.estimators = v.clone();
        }
        if let Some(v) = self.workers {
            cfg.workers = Some(v);
        }
        if let Some(v) = &self.out {
            cfg.output_dir = v.clone();
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(c) => {
            let files = harness::run_simulate(&c.load()?)?;
            println!("wrote {} series file(s)", files.len());
        }
        Command::Estimate { input, common } => {
            let out = harness::run_estimate(&common.load()?, &input)?;
            for (name, r) in &out.estimates.fits {
                match r {
                    Ok((_, fit)) => println!("{name:<6} H = {:.4} (se {:.4})", fit.exponent, fit.stderr),
                    Err(e) => println!("{name:<6} failed: {e}"),
                }
            }
        }
        Command::Theory(c) => {
            let out = harness::run_theory(&c.load()?)?;
            let e = &out.exponents;
            println!(
                "H_x = {:.4}, H_y = {:.4}, H_xy = {:.4}, sigma_x = {:.6}, sigma_y = {:.6}",
                e.h_x, e.h_y, e.h_xy, e.sigma_x, e.sigma_y
            );
            if let Err(reason) = &out.spectrum {
                println!("spectrum refused: {reason}");
            }
        }
        Command::Experiment(c) => {
            let report = harness::run_experiment(&c.load()?)?;
            print!("{}", harness::format_summary(&report));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
