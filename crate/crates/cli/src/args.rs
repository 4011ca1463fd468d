use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Ball enumeration, annealing simulation, error bounds and ratio
/// certification for cubic MaxCut.
#[derive(Debug, Parser)]
#[command(name = "qalr", version)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// flat `key = value` file; flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// output directory (else $QALR_OUTPUT_DIR, config `output_dir`, `qalr-out`)
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// overwrite existing output files
    #[arg(long, global = true)]
    pub force: bool,
    /// worker threads, 0 = all cores
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate all marked balls up to radius p and save them.
    Enumerate(EnumerateArgs),
    /// Simulate every ball at each (T, alpha) point into the energy cache.
    Simulate(SimulateArgs),
    /// Print global or per-ball error-bound breakdowns.
    Bound(BoundArgs),
    /// Filter, refine and minimise into a ratio certificate.
    Certify(CertifyArgs),
    /// Best corrected value per ball and alpha over a T grid.
    Scan(ScanArgs),
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    /// database file (default `<output-dir>/balls_d{d}_p{p}.jsonl`)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct SimArgs {
    /// integrator tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// largest ball simulated, in qubits
    #[arg(long)]
    pub hilbert_cap: Option<usize>,
    /// dopri5 | rk4-richardson
    #[arg(long)]
    pub method: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// ball database, repeatable
    #[arg(long)]
    pub db: Vec<PathBuf>,
    /// total time: value, list `a,b,c` or range `start:stop:count`
    #[arg(long = "T")]
    pub t: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    /// `linear`, `cubic:a,b,c` or `poly:c0,c1,...` (ascending)
    #[arg(long)]
    pub schedule: Option<String>,
    /// energy cache CSV (default `<output-dir>/energies.csv`)
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// worst-case bound over all balls (default)
    #[arg(long, conflicts_with = "local")]
    pub global: bool,
    /// bound for one ball, needs --ball and --db
    #[arg(long)]
    pub local: bool,
    #[arg(long)]
    pub ball: Option<String>,
    #[arg(long)]
    pub db: Vec<PathBuf>,
    #[arg(long)]
    pub d: Option<usize>,
    /// walk depth, radius q = k - 1
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long = "T")]
    pub t: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub schedule: Option<String>,
    /// certified | printed
    #[arg(long)]
    pub count_model: Option<String>,
    /// also write the table here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub db: Vec<PathBuf>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long = "T")]
    pub t: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub schedule: Option<String>,
    /// survivors have energy - eps below this
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub count_model: Option<String>,
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// simulate energies missing from the cache first
    #[arg(long)]
    pub simulate: bool,
    /// golden-section rounds around the best grid point (needs --simulate)
    #[arg(long)]
    pub refine: Option<usize>,
    /// certificate path; `.txt` report and `certify_grid.csv` go beside it
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub db: Vec<PathBuf>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long = "T")]
    pub t: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub schedule: Option<String>,
    #[arg(long)]
    pub count_model: Option<String>,
    /// keep the N balls with the lowest best local value
    #[arg(long)]
    pub worst: Option<usize>,
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long)]
    pub simulate: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub sim: SimArgs,
}
