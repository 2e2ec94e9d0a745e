use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod table;

#[derive(Parser, Debug)]
#[command(
    name = "cavdecay",
    version,
    about = "Normal modes and survival probability of a cavity-confined oscillator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact and small-L spectrum with per-root residuals.
    Spectrum(SpectrumArgs),
    /// Survival probability on a uniform time grid.
    Evolve(EvolveArgs),
    /// Lower bound on the survival probability over a range of delta.
    ScanMin(ScanArgs),
    /// Finite-N matrix oracle compared with the closed-form pipeline.
    Oracle(OracleArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct PhysArgs {
    /// Renormalized oscillator frequency (rad/s).
    #[arg(long = "omega-bar", allow_negative_numbers = true)]
    pub omega_bar: Option<f64>,
    /// Coupling strength (1/s).
    #[arg(long, allow_negative_numbers = true)]
    pub g: Option<f64>,
    /// Cavity length (m).
    #[arg(long = "L", allow_negative_numbers = true)]
    pub cavity_l: Option<f64>,
    /// Speed of light (m/s).
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Number of bath modes K.
    #[arg(long)]
    pub modes: Option<usize>,
    /// File of `key = value` lines; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct OutputArgs {
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV (needs --output).
    #[arg(long)]
    pub plot_script: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConventionArg {
    Paper,
    Derived,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxRegimeArg {
    Weak,
    Strong,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolveRegimeArg {
    Exact,
    Weak,
    Strong,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub phys: PhysArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    #[arg(long, value_enum, default_value = "paper")]
    pub secular_convention: ConventionArg,
    /// Regime of the small-L column; defaults to the one implied by g and omega-bar.
    #[arg(long, value_enum)]
    pub regime: Option<ApproxRegimeArg>,
    /// Also write `r,Omega_r,t0r_sq_exact,t0r_sq_approx` to this file.
    #[arg(long)]
    pub weights_output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub phys: PhysArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    #[arg(long, value_enum, default_value = "exact")]
    pub regime: EvolveRegimeArg,
    #[arg(long, value_enum, default_value = "paper")]
    pub secular_convention: ConventionArg,
    /// End of the time grid (s); defaults to 50 L / c.
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    /// Re-evaluate sampled instants with the O(K^2) double sum and report the difference.
    #[arg(long)]
    pub cross_check: bool,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[command(flatten)]
    pub phys: PhysArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    #[arg(long, value_enum, default_value = "weak")]
    pub regime: ApproxRegimeArg,
    #[arg(long, allow_negative_numbers = true)]
    pub delta_lo: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub delta_hi: f64,
    #[arg(long, default_value_t = 1001)]
    pub steps: usize,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub phys: PhysArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    /// Number of bath modes in the finite system.
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    /// End of the survival comparison grid (s); defaults to 50 L / c.
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Spectrum(a) => commands::run_spectrum(&a),
        Command::Evolve(a) => commands::run_evolve(&a),
        Command::ScanMin(a) => commands::run_scan(&a),
        Command::Oracle(a) => commands::run_oracle(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
