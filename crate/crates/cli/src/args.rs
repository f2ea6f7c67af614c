use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use crate::criteria::Suite;

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "hyperperc", version, about = "Bond percolation on Hamming graphs and random graphs")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Global {
    /// Dimension of H(d, n); 1 gives the complete graph K_n.
    #[arg(long, global = true)]
    pub d: Option<usize>,
    /// Side length of H(d, n).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Edge probability.
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true)]
    pub reps: Option<u64>,
    /// Master seed.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Write results here (plus a `.manifest.json` next to it) instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; HYPERPERC_THREADS takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Vertex cap for single clusters and materialized fields.
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Susceptibility estimate.
    Chi,
    /// Two-point function estimate over all vertices.
    Twopoint {
        /// Compare with the near-critical prediction at distances 0, 1, 2, d.
        #[arg(long)]
        check: bool,
    },
    /// Solve chi(p) = theta V^(1/3).
    Pc {
        /// Deterministic bisection with the exact susceptibility (K_n only).
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Total cluster growths.
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
        /// Replicates allowed at a single p.
        #[arg(long, default_value_t = 1_000_000)]
        point_cap: u64,
    },
    /// Second-order expansion, lower bound and window of the critical point.
    PcBounds {
        /// Also evaluate the critical point from this doubly-connected sum.
        #[arg(long)]
        pi_hat: Option<f64>,
    },
    /// Grid maximizer of d log chi / dp.
    PcTilde {
        #[arg(long)]
        p_min: f64,
        #[arg(long)]
        p_max: f64,
        #[arg(long, default_value_t = 21)]
        points: usize,
        /// Exact susceptibility (K_n only).
        #[arg(long)]
        exact: bool,
    },
    /// Erdős–Rényi moments.
    Errg {
        #[command(flatten)]
        mode: ErrgMode,
    },
    /// Exploration processes.
    Explore {
        #[arg(value_enum)]
        mode: ExploreMode,
        /// Configuration index for single explorations.
        #[arg(long, default_value_t = 0)]
        run: u64,
    },
    /// Non-backtracking mixing time.
    Mixing {
        /// Defaults to 1/n.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = hyperperc::randwalk::DEFAULT_MIXING_CAP)]
        max_steps: usize,
    },
    /// Diagram sums built from an estimated two-point function.
    Diagrams {
        #[arg(value_enum)]
        kind: DiagramKind,
        /// Polygon length.
        #[arg(long, default_value_t = 4)]
        i: usize,
        /// 1 opens the first polygon edge.
        #[arg(long, default_value_t = 1)]
        j: usize,
        /// Vertex rank at which diagrams are evaluated.
        #[arg(long, default_value_t = 0)]
        z: u64,
    },
    /// Critical-point scan over side lengths and theta.
    WindowStudy {
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        theta_list: Vec<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
        #[arg(long, default_value_t = 1_000_000)]
        point_cap: u64,
    },
    /// Run the acceptance checks.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::Quick)]
        suite: Suite,
    },
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
#[group(multiple = false)]
pub struct ErrgMode {
    /// Exploration-chain recursion (default).
    #[arg(long)]
    pub exact: bool,
    /// Enumeration of all graphs (n <= 7).
    #[arg(long)]
    pub brute: bool,
    /// Monte Carlo.
    #[arg(long)]
    pub mc: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExploreMode {
    Bf,
    Brw,
    Linewise,
    Coupling,
    Gw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagramKind {
    Triangle,
    OpenTriangle,
    Polygon,
    Ladder,
    #[value(name = "M", alias = "m")]
    #[serde(rename = "M")]
    M,
}
