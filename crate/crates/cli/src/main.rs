//! `urgl`: reference-device quantum probability experiments from the
//! command line.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 mathematical failure
//! (search not converged, verification failed, bound violated).

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use urgl_core::wigner::Probe;
use urgl_core::NormSpec;

#[derive(Debug, Parser)]
#[command(name = "urgl", version, about = "Born rule as a deformed law of total probability: SICs, quantumness, agents")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Seed for stochastic commands (required by them).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Numerical tolerance for checks.
    #[arg(long, global = true, env = "URGL_DEFAULT_TOL", default_value_t = urgl_core::DEFAULT_TOL)]
    pub tol: f64,
    /// Write the JSON report to PATH; without PATH (or without the flag) it goes to stdout.
    #[arg(long, global = true, value_name = "PATH", num_args = 0..=1)]
    pub json: Option<Option<PathBuf>>,
    /// Write the command's flat table as CSV.
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Hilbert-space dimension.
    #[arg(short = 'd', long = "dim", global = true)]
    pub dim: Option<usize>,
}

impl GlobalOpts {
    pub fn json_path(&self) -> Option<&PathBuf> {
        self.json.as_ref().and_then(Option::as_ref)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find or verify Weyl–Heisenberg SICs.
    #[command(subcommand)]
    Sic(SicCommand),
    /// Compare operator and probability forms of the Born rule on random instances.
    BornCheck(BornCheckArgs),
    /// Sample reference devices and compare ‖I − Φ‖ with the SIC value.
    Quantumness(QuantumnessArgs),
    /// Evolve reference probabilities under a unitary.
    Evolve(EvolveArgs),
    /// Compatibility criteria for two state assignments.
    Compat(CompatArgs),
    /// Fixed worked scenarios.
    #[command(subcommand)]
    Scenario(ScenarioCommand),
    /// Wigner's-friend statistics.
    Wigner(WignerArgs),
}

#[derive(Debug, Subcommand)]
pub enum SicCommand {
    Find(SicFindArgs),
    Verify(SicVerifyArgs),
}

#[derive(Debug, Args)]
pub struct SicFindArgs {
    #[arg(long, default_value_t = 50)]
    pub restarts: usize,
    #[arg(long, default_value_t = 5000)]
    pub max_iters: usize,
    /// Required max deviation of |⟨ψ|D_k|ψ⟩|² from 1/(d+1).
    #[arg(long, default_value_t = 1e-10)]
    pub target: f64,
    /// Save the fiducial as JSON.
    #[arg(short = 'o', long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SicVerifyArgs {
    /// Fiducial file (same as --fiducial).
    #[arg(value_name = "FIDUCIAL")]
    pub path: Option<PathBuf>,
    /// Fiducial file `{"dim", "re", "im", "residual", "seed"}`.
    #[arg(long, value_name = "PATH")]
    pub fiducial: Option<PathBuf>,
    /// POVM file `{"dim", "effects"}`.
    #[arg(long, value_name = "PATH")]
    pub povm: Option<PathBuf>,
    /// Built-in fiducial for `-d 2` or `-d 3`.
    #[arg(long)]
    pub builtin: bool,
}

impl SicVerifyArgs {
    pub fn fiducial_path(&self) -> Option<&PathBuf> {
        self.path.as_ref().or(self.fiducial.as_ref())
    }
}

#[derive(Debug, Args)]
pub struct BornCheckArgs {
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Outcomes of each random POVM (default d + 1).
    #[arg(long)]
    pub outcomes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct QuantumnessArgs {
    /// Norms: trace, frobenius, operator, schatten:P, kyfan:K (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "frobenius", value_parser = parse_norm)]
    pub norm: Vec<NormSpec>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// Initial reference probabilities (JSON array).
    #[arg(long, value_name = "PATH", conflicts_with = "state", required_unless_present = "state")]
    pub probs: Option<PathBuf>,
    /// Initial density operator (converted with the reference device).
    #[arg(long, value_name = "PATH")]
    pub state: Option<PathBuf>,
    /// Unitary (matrix JSON); identity if omitted.
    #[arg(long, value_name = "PATH")]
    pub unitary: Option<PathBuf>,
    /// Reference apparatus JSON; the built-in SIC for d = 2, 3 if omitted.
    #[arg(long, value_name = "PATH")]
    pub reference: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompatArgs {
    /// Density operator or ket JSON.
    #[arg(long, value_name = "PATH")]
    pub state1: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub state2: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "peierls,bfm,w")]
    pub criteria: Vec<Criterion>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Peierls,
    Bfm,
    W,
}

#[derive(Debug, Subcommand)]
pub enum ScenarioCommand {
    /// Two agents with ρ₊ and ρ₋ before and after a measurement.
    RhoPm,
}

#[derive(Debug, Args)]
pub struct WignerArgs {
    #[arg(long, default_value_t = 0.5, conflicts_with = "scenario")]
    pub alpha_sq: f64,
    /// Scenario JSON with `alpha`, `beta` and optional `psi`, `chi`.
    #[arg(long, value_name = "PATH")]
    pub scenario: Option<PathBuf>,
    /// Probe for the reversal statistics: phi0, object-x, chi-basis.
    #[arg(long, default_value = "phi0", value_parser = parse_probe)]
    pub probe: Probe,
    /// Also report both agents' reference probabilities (needs --seed).
    #[arg(long)]
    pub two_perspective: bool,
}

fn parse_norm(s: &str) -> Result<NormSpec, String> {
    s.parse().map_err(|e: urgl_core::Error| e.to_string())
}

fn parse_probe(s: &str) -> Result<Probe, String> {
    s.parse().map_err(|e: urgl_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
