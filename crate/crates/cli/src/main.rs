//! `qgeom`: tensor and connection sweeps, optimiser runs and identity checks.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{Command, RunConfig};
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "qgeom", version, about = "Quantum information geometry of parametrized pure states")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Tensor components at one point (`--params`) or over a grid.
    Tensor(Opts),
    /// Dual connection pair at one point or over a grid.
    Connections(Opts),
    /// Tensor components plus complex curvature over a grid.
    Sweep(Opts),
    /// Natural-gradient optimisation trace.
    Optimize(Opts),
    /// Runs the named identity checks and reports residuals.
    Validate(Opts),
    /// Lists the built-in models.
    Models(Opts),
}

#[derive(Args, Clone, Default)]
struct Opts {
    /// Flat `key = value` configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model name (see `qgeom models`).
    #[arg(long)]
    model: Option<String>,
    /// Parameter point, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    params: Option<String>,
    /// Grid as `min:max:count` per axis, axes comma separated.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Alpha values, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Tensor kinds: fs, case1, case2, lr, rl, ll, rr (comma separated).
    #[arg(long)]
    kind: Option<String>,
    /// Derivative mode: auto, analytic, fd, richardson.
    #[arg(long)]
    deriv: Option<String>,
    /// Eigenvector band for non-Hermitian models.
    #[arg(long)]
    band: Option<String>,
    /// Output file (stdout when absent). A `.meta` file with the resolved configuration is written next to it.
    #[arg(long)]
    out: Option<String>,
    /// Output format: csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Multiplies every upper-bound check tolerance.
    #[arg(long)]
    tol_scale: Option<String>,
    /// Runs a single named check.
    #[arg(long)]
    check: Option<String>,
    /// Optimiser cost: hermitian, biortho or rr.
    #[arg(long)]
    cost: Option<String>,
    /// Cost operator: pauli_z, pt_two_level:gamma,g or spin_field:t,p.
    #[arg(long, allow_hyphen_values = true)]
    operator: Option<String>,
    /// Step size (real part for the dual scheme).
    #[arg(long)]
    eta: Option<String>,
    /// Imaginary-part step size of the dual scheme.
    #[arg(long)]
    eta_i: Option<String>,
    /// Iteration budget.
    #[arg(long)]
    max_iters: Option<String>,
    /// Gradient-norm convergence threshold.
    #[arg(long)]
    grad_tol: Option<String>,
}

impl Opts {
    fn pairs(&self) -> Vec<(&'static str, &String)> {
        [
            ("model", &self.model),
            ("params", &self.params),
            ("grid", &self.grid),
            ("alpha", &self.alpha),
            ("kind", &self.kind),
            ("deriv", &self.deriv),
            ("band", &self.band),
            ("out", &self.out),
            ("format", &self.format),
            ("tol_scale", &self.tol_scale),
            ("check", &self.check),
            ("cost", &self.cost),
            ("operator", &self.operator),
            ("eta", &self.eta),
            ("eta_i", &self.eta_i),
            ("max_iters", &self.max_iters),
            ("grad_tol", &self.grad_tol),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
        .collect()
    }
}

fn resolve(command: Command, opts: &Opts) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::defaults(command);
    if let Some(path) = &opts.config {
        for (k, v) in config::read_config_file(path)? {
            if k != "command" {
                cfg.set(&k, &v)?;
            }
        }
    }
    for (k, v) in opts.pairs() {
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, opts) = match &cli.command {
        Sub::Tensor(o) => (Command::Tensor, o),
        Sub::Connections(o) => (Command::Connections, o),
        Sub::Sweep(o) => (Command::Sweep, o),
        Sub::Optimize(o) => (Command::Optimize, o),
        Sub::Validate(o) => (Command::Validate, o),
        Sub::Models(o) => (Command::Models, o),
    };
    let result = resolve(command, opts).and_then(|cfg| commands::run(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
