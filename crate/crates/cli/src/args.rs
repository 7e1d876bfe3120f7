use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "vge",
    version,
    about = "Volume entropy and path-count asymptotics for metric graphs and origamis"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Output format; curves default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub emit: Option<Emit>,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads for path enumeration. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=1024))]
    pub threads: u32,
    /// Maximum number of enumerated paths.
    #[arg(long, global = true)]
    pub visit_cap: Option<u64>,
    /// Maximum frontier size, or length-bucket cells for `--delta` runs.
    #[arg(long, global = true)]
    pub frontier_cap: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Metric graphs.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Square-tiled surfaces.
    #[command(subcommand)]
    Origami(OrigamiCmd),
}

#[derive(Debug, Args)]
pub struct Radii {
    /// Smallest radius; defaults to `--step`.
    #[arg(long)]
    pub rmin: Option<f64>,
    #[arg(long)]
    pub rmax: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
}

#[derive(Debug, Args)]
pub struct Truncation {
    /// Head block size of the Schur complement.
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    /// Number of explicit edges.
    #[arg(long = "kcut", default_value_t = 40)]
    pub k_cut: usize,
}

#[derive(Debug, Args)]
pub struct Window {
    /// Fraction of the radius range used for the constant estimate.
    #[arg(long, default_value_t = 0.3)]
    pub window: f64,
    /// Relative fluctuation below which the curve counts as convergent.
    #[arg(long, default_value_t = 0.1)]
    pub osc_threshold: f64,
}

#[derive(Debug, Subcommand)]
pub enum GraphCmd {
    /// Volume entropy h, where the spectral radius of W_h is 1.
    Entropy {
        input: PathBuf,
        #[command(flatten)]
        trunc: Truncation,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Double (k, K) until h moves by less than `--ladder-tol`.
        #[arg(long)]
        ladder: bool,
        #[arg(long, default_value_t = 1e-6)]
        ladder_tol: f64,
    },
    /// N(x, R): paths from x of length at most R.
    Count {
        input: PathBuf,
        #[arg(long = "from", default_value_t = 0)]
        x: usize,
        #[command(flatten)]
        radii: Radii,
    },
    /// The eta series and, with `--residue`, its residue at h.
    Eta {
        input: PathBuf,
        /// Comma-separated evaluation points.
        #[arg(long, value_delimiter = ',', required = true)]
        z: Vec<f64>,
        /// Only this start vertex; all vertices otherwise.
        #[arg(long = "from")]
        x: Option<usize>,
        #[arg(long = "kcut", default_value_t = 40)]
        k_cut: usize,
        #[arg(long)]
        residue: bool,
    },
    /// Normalised counts N(x, R)·e^{-hR} and a convergence verdict.
    Asym {
        input: PathBuf,
        #[arg(long = "from", default_value_t = 0)]
        x: usize,
        #[command(flatten)]
        radii: Radii,
        #[command(flatten)]
        window: Window,
        /// Use this h instead of computing it.
        #[arg(long)]
        h: Option<f64>,
    },
    /// Summability, strong connectivity and non-arithmeticity.
    Check {
        input: PathBuf,
        #[arg(long = "kcut", default_value_t = 40)]
        k_cut: usize,
        /// Closed paths up to this length feed the arithmeticity test.
        #[arg(long, default_value_t = 10.0)]
        max_len: f64,
        /// Arithmeticity tolerance, relative to the longest closed path.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Debug, Args)]
pub struct SurfaceInput {
    pub input: PathBuf,
    /// Treat regular vertices as marked points.
    #[arg(long)]
    pub marked: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Volume,
    Arcs,
}

#[derive(Debug, Subcommand)]
pub enum OrigamiCmd {
    /// Cone points, cone angles and genus.
    Info {
        #[command(flatten)]
        surface: SurfaceInput,
    },
    /// Oriented saddle connections of length at most L.
    Saddles {
        #[command(flatten)]
        surface: SurfaceInput,
        #[arg(long = "lmax")]
        l: f64,
        /// Load from or store to the cache in VGE_CACHE_DIR.
        #[arg(long)]
        cache: bool,
    },
    /// h from the ladder of saddle-connection truncations.
    Entropy {
        #[command(flatten)]
        surface: SurfaceInput,
        #[arg(long, default_value_t = 8.0)]
        l_start: f64,
        #[arg(long, default_value_t = 32.0)]
        l_max: f64,
        #[arg(long, default_value_t = 1e-2)]
        ladder_tol: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// V(x, R): area of the ball about cone point x in the universal cover.
    Volume {
        #[command(flatten)]
        surface: SurfaceInput,
        #[arg(long, default_value_t = 0)]
        center: usize,
        #[command(flatten)]
        radii: Radii,
        /// Bucket width; gives lower and upper bounds instead of exact values.
        #[arg(long)]
        delta: Option<f64>,
    },
    /// N_X(x, y, R): saddle-connection paths from x to y.
    Arcs {
        #[command(flatten)]
        surface: SurfaceInput,
        #[arg(long = "from", default_value_t = 0)]
        x: usize,
        #[arg(long = "to", default_value_t = 0)]
        y: usize,
        #[command(flatten)]
        radii: Radii,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Normalised volume or arc counts and a convergence verdict.
    Asym {
        #[command(flatten)]
        surface: SurfaceInput,
        #[arg(long, value_enum, default_value_t = Quantity::Volume)]
        quantity: Quantity,
        #[arg(long = "from", default_value_t = 0)]
        x: usize,
        #[arg(long = "to", default_value_t = 0)]
        y: usize,
        #[command(flatten)]
        radii: Radii,
        #[arg(long)]
        delta: Option<f64>,
        #[command(flatten)]
        window: Window,
        #[arg(long)]
        h: Option<f64>,
    },
    /// Quadratic saddle growth, connectivity of M_0 and non-arithmeticity.
    Check {
        #[command(flatten)]
        surface: SurfaceInput,
        #[arg(long = "lmax", default_value_t = 20.0)]
        l: f64,
    },
}
