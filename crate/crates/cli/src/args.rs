use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "qpv-lab", version, about = "Attacks, PPT bounds and Monte Carlo checks for quantum position verification")]
pub struct Cli {
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Print the canonical JSON bundle instead of the text summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Directory for JSON bundles and the simulation CSV log.
    #[arg(long, global = true, env = "QPV_LAB_OUT", value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic bounds for every (d, k) combination given.
    Bounds(BoundsArgs),
    /// PPT discrimination programs.
    #[command(subcommand)]
    Sdp(SdpCommand),
    /// Seeded Monte Carlo run of one protocol/strategy pair.
    Simulate(SimulateArgs),
    /// Every acceptance check with PASS/FAIL per item.
    PaperSuite(SuiteArgs),
    /// Registered protocols, strategies and shipped pairs.
    List,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Input dimension(s), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub d: Vec<usize>,
    /// Size(s) of the answer alphabet, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub k: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    /// Protocol name (see `list`).
    #[arg(long)]
    pub protocol: String,
    /// Dimension parameter for the generic protocol.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Answer alphabet size for the generic protocol.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

#[derive(Debug, Subcommand)]
pub enum SdpCommand {
    /// Solve the PPT program to a certified gap.
    Solve {
        #[command(flatten)]
        protocol: ProtocolArgs,
        /// Target gap between the feasible value and the dual bound.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Check a dual certificate: the closed-form one for the sym/antisym
    /// protocols, or a JSON file given with --cert.
    VerifyCert {
        #[command(flatten)]
        protocol: ProtocolArgs,
        /// Certificate file `{y: matrix, q: [matrix]}` in the operator JSON format.
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Conditional PPT value with an inconclusive outcome, per transmission rate.
    LossSweep {
        #[command(flatten)]
        protocol: ProtocolArgs,
        /// Transmission rates, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75,1.0")]
        eta: Vec<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Strategy name (see `list`).
    #[arg(long)]
    pub strategy: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub rounds: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of independently seeded chunks; part of the random stream.
    #[arg(long, default_value_t = 8)]
    pub chunks: usize,
    /// Also evaluate the pair exactly and flag any disagreement.
    #[arg(long)]
    pub cross_check: bool,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// 10^4 Monte Carlo rounds per pair instead of 10^6.
    #[arg(long)]
    pub quick: bool,
    #[arg(long, default_value_t = 8)]
    pub chunks: usize,
}
