//! `afpp`: equilibria, simulations, bifurcation diagrams, hysteresis sweeps,
//! parameter atlases and time-optimal control for the additional-food
//! predator–prey model, written as CSV/JSON files.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use afpp::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "afpp", version, about = "Additional-food predator-prey toolkit")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// JSON object with gamma, alpha, xi, epsilon, m, delta.
    #[arg(long, global = true, value_name = "FILE")]
    params: Option<PathBuf>,
    /// Override or supply one parameter; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for the randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Integrator relative tolerance.
    #[arg(long, global = true)]
    tol_rtol: Option<f64>,
    /// Integrator absolute tolerance.
    #[arg(long, global = true)]
    tol_atol: Option<f64>,
    /// Newton tolerance of the continuation corrector.
    #[arg(long, global = true)]
    tol_newton: Option<f64>,
    /// Accept α = 0 or ξ = 0.
    #[arg(long, global = true)]
    allow_zero_food: bool,
    /// Accept δ ≤ m.
    #[arg(long, global = true)]
    allow_low_conversion: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// All equilibria with eigenvalues and classes, plus the nullclines.
    Equilibria {
        #[arg(long, default_value_t = 400)]
        nullcline_points: usize,
    },
    /// Trajectories from one or more initial states.
    Simulate {
        #[arg(long, default_value_t = 200.0)]
        t_end: f64,
        /// `x,y`; repeatable.
        #[arg(long = "initial", value_parser = config::parse_state, default_value = "1,1")]
        initial: Vec<afpp::State>,
        /// Uniform resampling; 0 keeps the accepted steps.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Equilibrium branches and bifurcation events along one parameter.
    Bifurcate {
        #[arg(long)]
        param: afpp::ParamName,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        /// Samples of the boundary equilibria table.
        #[arg(long, default_value_t = 401)]
        axial_points: usize,
    },
    /// Sinusoidal ε sweep and its (ε, x) loop.
    Hysteresis {
        #[arg(long, default_value_t = 0.002)]
        eps_min: f64,
        #[arg(long, default_value_t = 0.02)]
        eps_max: f64,
        #[arg(long, default_value_t = 10_000.0)]
        period: f64,
        #[arg(long, default_value_t = 2)]
        cycles: u32,
        /// Starting state; the lowest interior equilibrium at the sweep start
        /// when omitted.
        #[arg(long, value_parser = config::parse_state)]
        initial: Option<afpp::State>,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
    },
    /// Region labels on a log-spaced (α, ξ) grid.
    Atlas {
        #[arg(long, default_value_t = 1e-2)]
        alpha_min: f64,
        #[arg(long, default_value_t = 1e2)]
        alpha_max: f64,
        #[arg(long, default_value_t = 1e-2)]
        xi_min: f64,
        #[arg(long, default_value_t = 1e2)]
        xi_max: f64,
        #[arg(long, default_value_t = 200)]
        n: usize,
    },
    /// Time-optimal transfer with α or ξ as the control.
    Control {
        /// JSON problem: control, initial, target and optionally params,
        /// bounds, mesh_size, in_transformed_time.
        #[arg(long, value_name = "FILE")]
        problem: PathBuf,
        /// Widen the bounds until T_opt matches this value.
        #[arg(long)]
        calibrate_to: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        calibrate_tol: f64,
    },
    /// Randomized invariant suites.
    Verify,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain { .. } | Error::Config(_) | Error::InvalidProblem(_) | Error::Json(_) => 2,
        Error::Infeasible { .. } => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.common, &cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
