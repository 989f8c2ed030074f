use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use commsir::{Condition, InfectiousPeriod, ModelParams};
use commsir_cli::commands;
use commsir_cli::experiment::run_experiment;
use commsir_cli::{CliError, ExperimentConfig, Overrides, Result};

#[derive(Parser)]
#[command(name = "commsir", version, about = "Final outcomes of SIR epidemics among many communities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunFlags {
    /// Experiment configuration (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; overrides the config
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory; overrides the config
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of replicates; overrides the config
    #[arg(long)]
    replicates: Option<u64>,
    /// Conditioning event; overrides the config
    #[arg(long)]
    condition: Option<Condition>,
}

impl RunFlags {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::load(&self.config)?;
        let overrides =
            Overrides { seed: self.seed, workers: self.workers, out: self.out.clone(), replicates: self.replicates };
        if let Some(c) = self.condition {
            config.condition = c;
        }
        overrides.apply(&mut config)?;
        Ok(config)
    }
}

#[derive(Args)]
struct RateFlags {
    /// Infectious period: const:V, exp:RATE or gamma:SHAPE:RATE
    #[arg(long)]
    period: InfectiousPeriod,
    /// Scaled within-community rate n*beta_W
    #[arg(long = "lw")]
    lambda_w: f64,
    /// Scaled global rate n^2*m*beta_G
    #[arg(long = "lg")]
    lambda_g: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Print the limit quantities as JSON
    Limits {
        #[command(flatten)]
        rates: RateFlags,
        /// Number of communities besides community 0; adds p_RF
        #[arg(long)]
        m: Option<usize>,
    },
    /// Print the Reed-Frost final size law
    Rf {
        #[arg(long)]
        m: usize,
        /// Escape-complement probability; derived from the rates when omitted
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        period: Option<InfectiousPeriod>,
        #[arg(long = "lw")]
        lambda_w: Option<f64>,
        #[arg(long = "lg")]
        lambda_g: Option<f64>,
        /// Use the dynamic-programming oracle (m <= 10)
        #[arg(long)]
        brute: bool,
    },
    /// Simulate replicates and write outcome, summary, histogram and overlay files
    Simulate(RunFlags),
    /// Estimate the finite-n x, z, a curves and tau
    Curves {
        #[command(flatten)]
        run: RunFlags,
        /// Pressure grid start:stop:step
        #[arg(long, default_value = "0:2:0.05")]
        grid: String,
    },
    /// Print the approximating densities of the total size
    Approx {
        #[arg(long)]
        config: PathBuf,
    },
    /// Simulate and check against the limit theory
    Compare(RunFlags),
}

fn write_or_print(dir: Option<&std::path::Path>, name: &str, text: &str) -> Result<()> {
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn rf_probability(
    m: usize,
    p: Option<f64>,
    period: Option<InfectiousPeriod>,
    lambda_w: Option<f64>,
    lambda_g: Option<f64>,
) -> Result<f64> {
    if let Some(p) = p {
        return Ok(p);
    }
    match (period, lambda_w, lambda_g) {
        (Some(period), Some(lw), Some(lg)) => Ok(commsir::analytic::limit_quantities(&period, lw, lg)?.p_rf(m)?),
        _ => Err(CliError::Validation("rf: give --p, or all of --period, --lw and --lg".into())),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Limits { rates, m } => {
            print!("{}", commands::limits(&rates.period, rates.lambda_w, rates.lambda_g, m)?)
        }
        Command::Rf { m, p, period, lambda_w, lambda_g, brute } => {
            let p = rf_probability(m, p, period, lambda_w, lambda_g)?;
            print!("{}", commands::rf(m, p, brute)?);
        }
        Command::Simulate(flags) => {
            let config = flags.load()?;
            let art = run_experiment(&config)?;
            for f in &art.files {
                eprintln!("wrote {}", f.display());
            }
            eprintln!(
                "{} replicates, {} satisfy {}",
                art.summary.total,
                art.summary.conditioned_count,
                art.summary.condition.name()
            );
        }
        Command::Curves { run, grid } => {
            let config = run.load()?;
            let text = commands::curves(&config, &commands::parse_grid(&grid)?)?;
            write_or_print(run.out.as_deref(), "curves.csv", &text)?;
        }
        Command::Approx { config } => {
            let config = ExperimentConfig::load(&config)?;
            let params: ModelParams = config.validate()?;
            print!("{}", commands::approx(&params)?);
        }
        Command::Compare(flags) => {
            let config = flags.load()?;
            let (csv, checks) = commands::compare(&config, flags.out.as_deref())?;
            print!("{csv}");
            if !checks.iter().all(|c| c.pass) {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
