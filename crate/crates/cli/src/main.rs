//! `spectral-lab`: builds the examples, runs the sweeps and writes CSV/JSON
//! reports for every check of the core library.
//!
//! Exit codes: 0 success, 1 failed check (or a missing certificate that was
//! expected), 2 invalid input.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spectral_lab::report::Format;
use spectral_lab::wvn::GUARANTEED_ALPHA;

#[derive(Parser, Debug)]
#[command(name = "spectral-lab", version, about = "Spectral experiments for Jacobi and Schrödinger operators")]
pub struct RunConfig {
    /// Directory receiving reports under their default names.
    #[arg(long, global = true, env = "SPECTRAL_LAB_OUTPUT_DIR", default_value = "reports")]
    pub output_dir: PathBuf,

    /// Report path; takes precedence over --output-dir.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// The zero-energy eigenvalue example and its bound states.
    #[command(subcommand)]
    Wvn(WvnCommand),
    /// Transfer recursion and the envelope R(n) = ψ(n)² + ψ(n+1)².
    Transfer(TransferArgs),
    /// Power-law envelope slopes over a θ sweep.
    Envelope(EnvelopeArgs),
    #[command(subcommand)]
    Identity(IdentityCommand),
    #[command(subcommand)]
    Cutoff(CutoffCommand),
    /// Search for a criticality certificate of Q ± V.
    Criticality(CriticalityArgs),
    #[command(subcommand)]
    Eigen(EigenCommand),
    /// Run the numbered acceptance checks.
    Acceptance(AcceptanceArgs),
}

#[derive(Args, Debug, Clone, Copy)]
pub struct WvnArgs {
    #[arg(long, default_value_t = GUARANTEED_ALPHA)]
    pub alpha: f64,
    /// Last site of the window [0, window].
    #[arg(long, default_value_t = 1000)]
    pub window: usize,
}

#[derive(Subcommand, Debug)]
pub enum WvnCommand {
    /// ψ and V on the window.
    Build(WvnArgs),
    /// Bound states outside [-2, 2] with a truncation-leakage diagnostic.
    Spectrum(SpectrumArgs),
    /// Log-linear fit of |E_n| - 2 against n.
    Decay(DecayArgs),
    /// Bound-state counts and the Bargmann sum over λ = 2^-k.
    Bargmann(BargmannArgs),
    /// Trial-function forms against 1/8^n.
    LowerBound(LowerBoundArgs),
    /// Bottom of 2 ∓ h_V - ½(2 ∓ h_{V±}).
    Inequality(InequalityArgs),
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub wvn: WvnArgs,
    #[arg(long, default_value_t = 1e-13)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct DecayArgs {
    #[command(flatten)]
    pub wvn: WvnArgs,
    #[arg(long, default_value_t = 1e-13)]
    pub tol: f64,
    /// First index n of the fit.
    #[arg(long, default_value_t = 1)]
    pub from: usize,
    /// Last index; defaults to the last resolved state.
    #[arg(long)]
    pub to: Option<usize>,
}

#[derive(Args, Debug)]
pub struct BargmannArgs {
    #[command(flatten)]
    pub wvn: WvnArgs,
    #[arg(long, default_value_t = 1)]
    pub k_min: i32,
    #[arg(long, default_value_t = 20)]
    pub k_max: i32,
}

#[derive(Args, Debug)]
pub struct LowerBoundArgs {
    #[arg(long, default_value_t = GUARANTEED_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = 4)]
    pub max_n: u32,
}

#[derive(Args, Debug)]
pub struct InequalityArgs {
    #[arg(long, default_value_t = GUARANTEED_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2000)]
    pub window: usize,
    /// Random probes added to the unit vectors.
    #[arg(long, default_value_t = 20)]
    pub probes: usize,
    #[arg(long, default_value_t = 11)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PotentialKind {
    Free,
    Wvn,
}

#[derive(Args, Debug)]
pub struct PotentialArgs {
    #[arg(long, value_enum, default_value_t = PotentialKind::Wvn)]
    pub potential: PotentialKind,
    #[arg(long, default_value_t = GUARANTEED_ALPHA)]
    pub alpha: f64,
    /// Half-line potential in the text format; replaces --potential.
    #[arg(long)]
    pub potential_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TransferArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub energy: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, default_value_t = 100_000)]
    pub sites: usize,
}

#[derive(Args, Debug)]
pub struct EnvelopeArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub energy: f64,
    /// Comma-separated θ values; defaults to 0, π/8, …, π/2.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub thetas: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub sites: usize,
    /// First site of the fit window.
    #[arg(long, default_value_t = 10)]
    pub start: usize,
}

#[derive(Subcommand, Debug)]
pub enum IdentityCommand {
    /// Polarization identity on seeded random operators.
    Poln(PolnArgs),
    /// Ground-state identity ⟨aψ|H|aψ⟩ = edge sum.
    GroundState(GroundStateArgs),
}

#[derive(Args, Debug)]
pub struct PolnArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    #[value(name = "free-1d")]
    Free1d,
    #[value(name = "free-2d")]
    Free2d,
    /// Seeded positive ψ on [-half-width, half-width].
    #[value(name = "lattice-1d")]
    Lattice1d,
    /// Seeded positive ψ on the disc of radius half-width.
    #[value(name = "lattice-2d")]
    Lattice2d,
    Gaussian,
    Constant,
    LinearGrowth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CutoffArg {
    Linear,
    Log,
    Adapted,
}

#[derive(Args, Debug)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::Lattice1d)]
    pub model: ModelKind,
    #[arg(long, default_value_t = 3)]
    pub seed: u64,
    #[arg(long, default_value_t = 60)]
    pub half_width: i64,
}

#[derive(Args, Debug)]
pub struct GroundStateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = CutoffArg::Linear)]
    pub cutoff: CutoffArg,
    #[arg(long, short = 'm', default_value_t = 5.0)]
    pub m: f64,
    #[arg(long, short = 'n', default_value_t = 40.0)]
    pub n: f64,
}

#[derive(Subcommand, Debug)]
pub enum CutoffCommand {
    /// Deficit form of the cutoff a·ψ.
    Energy(CutoffEnergyArgs),
}

#[derive(Args, Debug)]
pub struct CutoffEnergyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = CutoffArg::Linear)]
    pub cutoff: CutoffArg,
    #[arg(long, short = 'm', default_value_t = 1.0)]
    pub m: f64,
    #[arg(long, short = 'n', default_value_t = 11.0)]
    pub n: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Expectation {
    Found,
    NotFound,
}

#[derive(Args, Debug)]
pub struct CriticalityArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::Free1d)]
    pub model: ModelKind,
    /// Perturbation as `site:value` entries separated by `;` (also `,` in 1D);
    /// 2D sites are `x,y`. Empty means V ≡ 0.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    pub v: String,
    #[arg(long, default_value_t = 3)]
    pub seed: u64,
    #[arg(long, default_value_t = 400)]
    pub half_width: i64,
    #[arg(long, default_value_t = 64.0)]
    pub support_radius: f64,
    #[arg(long, default_value_t = 131_072.0)]
    pub n_cap: f64,
    #[arg(long, value_enum)]
    pub cutoff: Option<CutoffArg>,
    /// Skip the eigenvalue oracle.
    #[arg(long)]
    pub no_oracle: bool,
    /// Outcome that counts as success.
    #[arg(long, value_enum, default_value_t = Expectation::Found)]
    pub expect: Expectation,
}

#[derive(Subcommand, Debug)]
pub enum EigenCommand {
    /// Sturm bisection against the dense oracle on random tridiagonals.
    Check(EigenCheckArgs),
}

#[derive(Args, Debug)]
pub struct EigenCheckArgs {
    #[arg(long, default_value_t = 200)]
    pub systems: usize,
    #[arg(long, default_value_t = 50)]
    pub max_size: usize,
    #[arg(long, default_value_t = 10)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct AcceptanceArgs {
    /// Run a single criterion (1 to 10).
    #[arg(long)]
    pub criterion: Option<u8>,
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, S>(argv: I) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(&config) {
        Ok(commands::Status::Passed) => 0,
        Ok(commands::Status::Failed) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                2
            } else {
                1
            }
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}
