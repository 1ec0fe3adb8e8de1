use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use lcnu_core::decompose::Basis;
use lcnu_core::vqprobe::CostKind;
use serde::Serialize;

/// Carleman linearization, Pauli/Sigma decomposition and block-encoding synthesis.
///
/// Exit codes: 0 success, 1 invalid input, 2 verification failure.
#[derive(Debug, Parser)]
#[command(name = "lcnu", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assemble the truncated Carleman matrix of a polynomial system.
    Linearize(LinearizeArgs),
    /// Score truncation orders against a fine RK4 solve of the nonlinear system.
    Converge(ConvergeArgs),
    /// Decompose a matrix into Pauli or Sigma strings.
    Decompose(DecomposeArgs),
    /// Pauli and Sigma term counts for several matrices.
    Termcount(TermcountArgs),
    /// One unitary-completion circuit per Sigma term.
    Synthesize(SynthesizeArgs),
    /// Build a PREP/SELECT block encoding.
    Encode(EncodeArgs),
    /// Check synthesized circuits or an encoding against a term file.
    Verify(VerifyArgs),
    /// Trainability probes for layered rotation ansätze.
    #[command(subcommand)]
    Probe(ProbeCommand),
}

#[derive(Debug, Args, Serialize)]
pub struct LinearizeArgs {
    /// System JSON with n, p, M and optional time_dependent and phi0.
    #[arg(long)]
    pub system: PathBuf,
    /// Truncation order N.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub order: u64,
    /// Time at which time-dependent coefficients are evaluated.
    #[arg(long, default_value_t = 1.0)]
    pub time: f64,
    /// Output matrix JSON. A nonzero forcing vector goes to `<out>.forcing.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ConvergeArgs {
    /// System JSON; must carry phi0.
    #[arg(long)]
    pub system: PathBuf,
    /// Orders as an inclusive range `a..b` or a list `1,2,5`.
    #[arg(long, value_parser = parse_orders)]
    pub orders: Orders,
    /// Time span `t0:t1`.
    #[arg(long, value_parser = parse_span, default_value = "0:1")]
    pub tspan: Span,
    /// RK4 step.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Reference sub-steps per RK4 step.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub refinement: u64,
    /// Output CSV with columns N,D,nnz,max_error,runtime_ms.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DecomposeArgs {
    /// Matrix JSON; non-power-of-two sizes are zero-padded.
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long, value_parser = parse_basis)]
    pub basis: Basis,
    /// Fuse Sigma projector pairs into I2.
    #[arg(long)]
    pub merge: bool,
    /// Output terms JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TermcountArgs {
    /// Matrix JSON files, labelled by file stem.
    #[arg(long, num_args = 1.., required_unless_present = "system")]
    pub matrices: Vec<PathBuf>,
    /// System JSON whose Carleman matrices are counted, one row per order.
    #[arg(long, requires = "orders")]
    pub system: Option<PathBuf>,
    /// Orders for --system, as `a..b` or `1,2,5`.
    #[arg(long, value_parser = parse_orders)]
    pub orders: Option<Orders>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthesizeArgs {
    /// Sigma-basis terms JSON.
    #[arg(long)]
    pub terms: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EncodeArgs {
    /// Matrix JSON to decompose and encode.
    #[arg(
        long,
        required_unless_present = "terms",
        conflicts_with = "terms",
        requires = "basis"
    )]
    pub matrix: Option<PathBuf>,
    /// Existing terms JSON to encode as given.
    #[arg(long)]
    pub terms: Option<PathBuf>,
    #[arg(long, value_parser = parse_basis)]
    pub basis: Option<Basis>,
    /// Fuse Sigma projector pairs before encoding.
    #[arg(long)]
    pub merge: bool,
    /// Output encoding JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Simulate the circuit and compare its block with H/lambda.
    #[arg(long)]
    pub verify: bool,
    /// Where to write the verification report; it is always printed.
    #[arg(long, requires = "verify")]
    pub report: Option<PathBuf>,
    /// Largest accepted block error.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Output of `synthesize` or `encode`.
    #[arg(long)]
    pub circuits: PathBuf,
    /// Terms JSON the circuits were built from.
    #[arg(long)]
    pub against: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    /// Largest accepted block error.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum ProbeCommand {
    /// Gradient descent from seeded random parameters; CSV columns iter,cost.
    Train(TrainArgs),
    /// Variance of the first-parameter gradient; CSV columns n,kind,variance.
    Varscan(VarscanArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long, value_parser = parse_cost)]
    pub cost: CostKind,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..=16))]
    pub qubits: u64,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    pub layers: u64,
    /// Learning rate beta.
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value_t = 200)]
    pub iters: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct VarscanArgs {
    /// Comma-separated qubit counts.
    #[arg(long, value_delimiter = ',', default_value = "2,4,6,8", value_parser = clap::value_parser!(u64).range(1..=16))]
    pub qubits: Vec<u64>,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    pub layers: u64,
    #[arg(long, default_value_t = 500)]
    pub samples: u64,
    /// Draws for qubit count n use seed + n.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Orders(pub Vec<usize>);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Span(pub f64, pub f64);

fn parse_order(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) => Err("orders start at 1".into()),
        Ok(n) => Ok(n),
        Err(_) => Err(format!("'{s}' is not a positive integer")),
    }
}

pub fn parse_orders(s: &str) -> Result<Orders, String> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (parse_order(a)?, parse_order(b)?);
        if a > b {
            return Err(format!("empty range {a}..{b}"));
        }
        return Ok(Orders((a..=b).collect()));
    }
    let v = s.split(',').map(parse_order).collect::<Result<Vec<_>, _>>()?;
    Ok(Orders(v))
}

pub fn parse_span(s: &str) -> Result<Span, String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected t0:t1, got '{s}'"))?;
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("'{x}' is not a number"));
    let (a, b) = (parse(a)?, parse(b)?);
    if !(a.is_finite() && b.is_finite() && b >= a) {
        return Err(format!("span {a}:{b} must be finite with t1 >= t0"));
    }
    Ok(Span(a, b))
}

fn parse_basis(s: &str) -> Result<Basis, String> {
    s.parse()
}

fn parse_cost(s: &str) -> Result<CostKind, String> {
    s.parse()
}
