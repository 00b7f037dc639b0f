use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod report;

#[derive(Parser, Debug)]
#[command(name = "lpext", version, about = "Fit linear prediction models to sampled data and extend it")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a reference function (f1, f2 on [a, b]; f3, f4 on [a, b]^2).
    Gen(GenArgs),
    /// Fit a 1-D model to a sample file.
    Fit1d(Fit1dArgs),
    /// Exponential-sum extension from a constant 1-D model.
    Prony(PronyArgs),
    /// Smooth extension of 1-D data within a model's solution space.
    Extend1d(Extend1dArgs),
    /// Fit a 2-D model to a grid file.
    Fit2d(Fit2dArgs),
    /// Smooth extension of 2-D data subject to a 2-D model.
    Extend2d(Extend2dArgs),
    /// Sample the model-spline basis of a model.
    Splinebasis(SplineBasisArgs),
    /// Fit model splines to data and sample them over a range.
    Splinefit(SplineFitArgs),
    /// Smooth extension under a model blended between two constant models.
    Blend(BlendArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub function: String,
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long)]
    pub h: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct Fit1dArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    /// const, linear or rational[:alpha]
    #[arg(long, default_value = "const")]
    pub u: String,
    #[arg(long, default_value_t = 0.0)]
    pub ridge_p: f64,
    #[arg(long, default_value_t = 0.0)]
    pub ridge_q: f64,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct PronyArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// Model file; without it a constant model is fitted with --m and --n.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// lo:hi
    #[arg(long, allow_hyphen_values = true)]
    pub range: String,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct Extend1dArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub range: String,
    /// Difference order of the smoothness term.
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub mu: f64,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct Fit2dArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct Extend2dArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// Model file; without it a model is fitted with --m and --n.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Target square c:d
    #[arg(long, allow_hyphen_values = true)]
    pub domain: String,
    #[arg(long, default_value_t = 100.0)]
    pub mu: f64,
    #[arg(long, default_value_t = lpext::numerics::minres::DEFAULT_RTOL)]
    pub rtol: f64,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct SplineBasisArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Knot mesh d.
    #[arg(long)]
    pub mesh: f64,
    /// lo:hi, the knot window (a square for 2-D models)
    #[arg(long, allow_hyphen_values = true)]
    pub range: String,
    /// Sampling step; defaults to a quarter of the mesh.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    FitThenPropagate,
    GlobalBand,
}

#[derive(Args, Debug)]
pub struct SplineFitArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Knot mesh d; defaults to n h.
    #[arg(long)]
    pub mesh: Option<f64>,
    /// lo:hi, sampled range (a square for 2-D); defaults to the data domain.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
    #[arg(long, value_enum, default_value_t = Strategy::FitThenPropagate)]
    pub strategy: Strategy,
    #[arg(long, default_value_t = 1e-6)]
    pub ridge: f64,
    /// Extra fractional shifts of the 1-D basis, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub shifts: Vec<f64>,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct BlendArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long)]
    pub model_start: PathBuf,
    #[arg(long)]
    pub model_end: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub x_start: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub x_end: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub mu: f64,
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub range: String,
    #[arg(long, short)]
    pub output: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Fit1d(a) => commands::fit1d(a),
        Command::Prony(a) => commands::prony(a),
        Command::Extend1d(a) => commands::extend1d(a),
        Command::Fit2d(a) => commands::fit2d(a),
        Command::Extend2d(a) => commands::extend2d(a),
        Command::Splinebasis(a) => commands::splinebasis(a),
        Command::Splinefit(a) => commands::splinefit(a),
        Command::Blend(a) => commands::blend(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = if e.is_numerical() { 3 } else { 2 };
            eprintln!("{}", report::error_line(&e, code));
            ExitCode::from(code)
        }
    }
}
