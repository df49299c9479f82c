mod commands;
mod config;
mod error;
mod output;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use error::CliError;
use std::path::PathBuf;

/// Bingham-closure Q-tensor numerics: phase diagrams, closure checks, critical-point operators,
/// Leslie coefficients, coupled flow simulation and the small-Deborah limit.
#[derive(Parser)]
#[command(name = "nematic", version)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Random seed for sampled inputs and initial data.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write a gnuplot script next to the CSV output.
    #[arg(long, global = true)]
    plot: bool,
    #[command(flatten)]
    flow: FlowArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FlowArgs {
    /// Maier-Saupe interaction strength.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    de: Option<f64>,
    #[arg(long, global = true)]
    re: Option<f64>,
    /// Solvent viscosity fraction in (0, 1].
    #[arg(long, global = true)]
    gamma: Option<f64>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Elastic constant G.
    #[arg(long, global = true)]
    g: Option<f64>,
    #[arg(long, global = true)]
    gamma_par: Option<f64>,
    #[arg(long, global = true)]
    gamma_perp: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep alpha and tabulate the roots of the bifurcation equation.
    Phase {
        #[arg(long)]
        alpha_min: Option<f64>,
        #[arg(long)]
        alpha_max: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Closure roundtrip and Newton iteration counts on seeded random Q.
    ClosureCheck {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        level: Option<usize>,
        #[arg(long)]
        margin: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Spectra of the linearized operators at equilibrium.
    Operators {
        #[arg(long)]
        alpha_min: Option<f64>,
        #[arg(long)]
        alpha_max: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        directors: Option<usize>,
        #[arg(long)]
        level: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Leslie viscosities (and Frank constants when J is given) as JSON.
    Leslie {
        /// Interaction constants J1..J5, comma separated.
        #[arg(long, value_delimiter = ',')]
        j: Option<Vec<f64>>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Coupled Q-velocity run with an energy time series and a final checkpoint.
    Simulate {
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Write a time-series row every this many steps.
        #[arg(long)]
        every: Option<usize>,
        /// perturbed, equilibrium or taylor-green.
        #[arg(long)]
        init: Option<String>,
        #[arg(long)]
        level: Option<usize>,
        /// csv or binary.
        #[arg(long)]
        checkpoint_format: Option<String>,
        #[arg(short, long)]
        output_dir: Option<PathBuf>,
    },
    /// Convergence of the Q-tensor director to Ericksen-Leslie dynamics as De shrinks.
    Limit {
        /// shear or splay.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, value_delimiter = ',')]
        de_list: Option<Vec<f64>>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        level: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    set(&mut cfg.seed, cli.seed);
    cfg.plot |= cli.plot;
    let f = &mut cfg.flow;
    set(&mut f.alpha, cli.flow.alpha);
    set(&mut f.de, cli.flow.de);
    set(&mut f.re, cli.flow.re);
    set(&mut f.gamma, cli.flow.gamma);
    set(&mut f.eps, cli.flow.eps);
    set(&mut f.g, cli.flow.g);
    set(&mut f.gamma_par, cli.flow.gamma_par);
    set(&mut f.gamma_perp, cli.flow.gamma_perp);
    match cli.command {
        Command::Phase { alpha_min, alpha_max, count, output } => {
            let c = &mut cfg.phase;
            set(&mut c.alpha_min, alpha_min);
            set(&mut c.alpha_max, alpha_max);
            set(&mut c.count, count);
            c.output = output.or(c.output.take());
            commands::phase(&cfg)
        }
        Command::ClosureCheck { samples, level, margin, output } => {
            let c = &mut cfg.closure;
            set(&mut c.samples, samples);
            set(&mut c.level, level);
            set(&mut c.margin, margin);
            c.output = output.or(c.output.take());
            commands::closure_check(&cfg)
        }
        Command::Operators { alpha_min, alpha_max, count, directors, level, output } => {
            let c = &mut cfg.operators;
            set(&mut c.alpha_min, alpha_min);
            set(&mut c.alpha_max, alpha_max);
            set(&mut c.count, count);
            set(&mut c.directors, directors);
            set(&mut c.level, level);
            c.output = output.or(c.output.take());
            commands::operators(&cfg)
        }
        Command::Leslie { j, output } => {
            let c = &mut cfg.leslie;
            if let Some(j) = j {
                c.j = Some(j.try_into().map_err(|_| CliError::Usage("--j takes exactly five values".into()))?);
            }
            c.output = output.or(c.output.take());
            commands::leslie(&cfg)
        }
        Command::Simulate { nx, ny, t_end, dt, every, init, level, checkpoint_format, output_dir } => {
            let c = &mut cfg.simulate;
            set(&mut c.nx, nx);
            set(&mut c.ny, ny);
            set(&mut c.t_end, t_end);
            set(&mut c.dt, dt);
            set(&mut c.every, every);
            set(&mut c.init, init);
            set(&mut c.level, level);
            set(&mut c.checkpoint_format, checkpoint_format);
            set(&mut c.output_dir, output_dir);
            commands::simulate(&cfg)
        }
        Command::Limit { scenario, de_list, t_end, level, output } => {
            let c = &mut cfg.limit;
            set(&mut c.scenario, scenario);
            set(&mut c.de_list, de_list);
            set(&mut c.t_end, t_end);
            set(&mut c.level, level);
            c.output = output.or(c.output.take());
            commands::limit(&cfg)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("nematic: {e}");
        std::process::exit(e.exit_code());
    }
}
