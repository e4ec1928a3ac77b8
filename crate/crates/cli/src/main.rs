use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use daas_cli::{CliError, Command, ExperimentConfig};

/// Sampling experiments for Fourier basis density models.
#[derive(Parser)]
#[command(name = "daas", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw a batch of samples, one per line.
    Sample(Opts),
    /// KL divergence of the discretized sampler across grid sizes.
    Convergence(Opts),
    /// Wasserstein-1 error after Langevin refinement.
    Refinement(Opts),
    /// Model evaluations spent by each sampler.
    Cost(Opts),
}

/// Flags override values read from `--config`.
#[derive(Args)]
struct Opts {
    /// Config file of key=value lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path; standard output when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<String>,
    /// Frequency terms of random models.
    #[arg(long = "n", short = 'N')]
    order: Option<String>,
    /// Grid size.
    #[arg(long = "k", short = 'K')]
    k: Option<String>,
    /// Comma-separated grid sizes.
    #[arg(long)]
    k_sweep: Option<String>,
    /// Kernel degree (0, 1 or 2).
    #[arg(long = "d", short = 'D')]
    degree: Option<String>,
    /// Comma-separated kernel degrees.
    #[arg(long)]
    d_set: Option<String>,
    /// Sample count.
    #[arg(long = "s", short = 'S')]
    samples: Option<String>,
    /// Reference sample count.
    #[arg(long)]
    reference: Option<String>,
    /// Langevin steps.
    #[arg(long = "t", short = 'T')]
    steps: Option<String>,
    /// Comma-separated Langevin step counts.
    #[arg(long)]
    t_sweep: Option<String>,
    #[arg(long)]
    eps_ula: Option<String>,
    #[arg(long)]
    eps_mala: Option<String>,
    /// constant or decay.
    #[arg(long)]
    schedule: Option<String>,
    /// daas, daas+ula, daas+mala, rejection or inverse.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    /// Inverse-transform bisection tolerance.
    #[arg(long)]
    tol: Option<String>,
    /// Model file.
    #[arg(long)]
    model: Option<String>,
}

impl Opts {
    fn config(&self) -> Result<ExperimentConfig, CliError> {
        let mut config = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            config.apply_text(&text)?;
        }
        let overrides = [
            ("seed", &self.seed),
            ("N", &self.order),
            ("K", &self.k),
            ("K_sweep", &self.k_sweep),
            ("D", &self.degree),
            ("D_set", &self.d_set),
            ("S", &self.samples),
            ("reference", &self.reference),
            ("T", &self.steps),
            ("T_sweep", &self.t_sweep),
            ("eps_ula", &self.eps_ula),
            ("eps_mala", &self.eps_mala),
            ("schedule", &self.schedule),
            ("method", &self.method),
            ("trials", &self.trials),
            ("tol", &self.tol),
            ("model", &self.model),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        Ok(config)
    }
}

fn run(command: Command, opts: &Opts) -> Result<(), CliError> {
    let config = opts.config()?;
    let mut buf = Vec::new();
    command.run(&config, &mut buf)?;
    match &opts.out {
        Some(path) => fs::write(path, &buf)?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, opts) = match &cli.command {
        Cmd::Sample(o) => (Command::Sample, o),
        Cmd::Convergence(o) => (Command::Convergence, o),
        Cmd::Refinement(o) => (Command::Refinement, o),
        Cmd::Cost(o) => (Command::Cost, o),
    };
    match run(command, opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("daas: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
