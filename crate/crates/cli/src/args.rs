use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "ccs", version, about = "Convex curves from measures on the circle")]
pub struct Cli {
    /// Worker threads for parallel replicas (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Inspect a measure document.
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Boundaries of the convex set of a measure.
    #[command(subcommand)]
    Boundary(BoundaryCmd),
    /// Mixtures, sums, convolutions and symmetrisations.
    #[command(subcommand)]
    Op(OpCmd),
    /// Empirical curves, fluctuations and their limit covariance.
    #[command(subcommand)]
    Sample(SampleCmd),
    /// Argument-sorted rearrangements of plane samples.
    #[command(subcommand)]
    Reorder(ReorderCmd),
    /// Random smooth convex curves.
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Orientation signs and Gaussian triangle-area transforms.
    #[command(subcommand)]
    Chirotope(ChirotopeCmd),
}

#[derive(Args, Debug)]
pub struct Output {
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InMeasure {
    /// Measure JSON document.
    #[arg(long = "in")]
    pub input: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum MeasureCmd {
    /// Fourier coefficients up to order K.
    Fourier {
        #[command(flatten)]
        m: InMeasure,
        #[arg(long = "K", default_value_t = 64)]
        k: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Mass, first moment and closure.
    Check {
        #[command(flatten)]
        m: InMeasure,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand, Debug)]
pub enum BoundaryCmd {
    /// Vertex list of the boundary polygon.
    Build {
        #[command(flatten)]
        m: InMeasure,
        #[arg(long, default_value_t = 64)]
        arc_subdiv: usize,
        /// Also draw the boundary.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Fourier, shoelace and pairwise areas.
    Area {
        #[command(flatten)]
        m: InMeasure,
        #[arg(long = "K", default_value_t = 512)]
        k: usize,
        #[arg(long, default_value_t = 64)]
        arc_subdiv: usize,
        #[command(flatten)]
        out: Output,
    },
    /// SVG drawing of the boundary.
    Svg {
        #[command(flatten)]
        m: InMeasure,
        #[arg(long, default_value_t = 64)]
        arc_subdiv: usize,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug)]
pub struct Pair {
    /// First measure.
    #[arg(long)]
    pub a: PathBuf,
    /// Second measure.
    #[arg(long)]
    pub b: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum OpCmd {
    /// Boundary of λC_a ⊕ (1−λ)C_b from the two polygons.
    Minkowski {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 64)]
        arc_subdiv: usize,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Measure λa + (1−λ)b.
    Mixture {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        lambda: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Circular convolution a ⋆ b.
    Convolve {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        out: Output,
    },
    /// ½(ν_θ + reflect(ν_θ)).
    SymMinkowski {
        #[command(flatten)]
        m: InMeasure,
        #[arg(long)]
        theta: f64,
        #[command(flatten)]
        out: Output,
    },
    /// μ ⋆ reflect(μ).
    SymConvolve {
        #[command(flatten)]
        m: InMeasure,
        #[command(flatten)]
        out: Output,
    },
    /// Dyadic Minkowski symmetrisation, distance to the circle per step.
    IterateSym {
        #[command(flatten)]
        m: InMeasure,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Final measure.
        #[arg(long)]
        measure_out: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Limit of repeated self-convolution.
    StableLimit {
        #[command(flatten)]
        m: InMeasure,
        #[arg(long, default_value_t = 64)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug)]
pub struct SampleMeasure {
    /// Probability measure JSON document.
    #[arg(long)]
    pub measure: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum SampleCmd {
    /// Hausdorff distance of empirical curves to the boundary.
    Converge {
        #[command(flatten)]
        m: SampleMeasure,
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<usize>,
        #[arg(long)]
        replicas: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        arc_subdiv: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Limit covariance of the stacked fluctuation increments.
    Fdd {
        #[command(flatten)]
        m: SampleMeasure,
        /// Number of equal intervals (ignored with --partition).
        #[arg(long, default_value_t = 4)]
        intervals: usize,
        /// Explicit cut points 0 = θ_0 < … < θ_κ = 2π.
        #[arg(long, value_delimiter = ',')]
        partition: Option<Vec<f64>>,
        /// Also estimate the covariance from this many replicas.
        #[arg(long)]
        mc_replicas: Option<usize>,
        /// Sample size per Monte Carlo replica.
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Monte Carlo covariance CSV.
        #[arg(long)]
        mc_out: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Fluctuation trace of one sample.
    Curve {
        #[command(flatten)]
        m: SampleMeasure,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Trace resolution.
        #[arg(long, default_value_t = 1024)]
        points: usize,
        /// Empirical curve vertices.
        #[arg(long)]
        curve_out: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand, Debug)]
pub enum ReorderCmd {
    /// Partial sums of a sample sorted by argument.
    Complex {
        /// Sample JSON {"points":[[modulus,argument],…]}.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Convex polygon from the sorted edge vectors of a closed polygon.
    Polygon {
        /// Points JSON [[x,y],…].
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Direction measure weighted by modulus.
    KOperator {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 4096)]
        cells: usize,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug)]
pub struct GenCommon {
    #[arg(long = "K")]
    pub k: usize,
    #[arg(long)]
    pub seed: u64,
    /// Grid resolution of the emitted measure.
    #[arg(long, default_value_t = 4096)]
    pub cells: usize,
    #[arg(long, default_value_t = 16)]
    pub arc_subdiv: usize,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum GenerateCmd {
    /// Solve for closure first, then normalise.
    ClosedFirst {
        #[command(flatten)]
        g: GenCommon,
        #[command(flatten)]
        out: Output,
    },
    /// Non-adjacent index set; closed for any phases.
    Sparse {
        #[command(flatten)]
        g: GenCommon,
        #[command(flatten)]
        out: Output,
    },
    /// Prescribed area 1/(4π) − (π/2)β by rejection.
    FixedArea {
        #[command(flatten)]
        g: GenCommon,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 100_000)]
        max_rejects: usize,
        /// Run seeds seed..seed+count and report only rejection counts.
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Rejection statistics CSV.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand, Debug)]
pub enum ChirotopeCmd {
    /// Orientation of every increasing triple.
    Signs {
        /// Points JSON [[x,y],…].
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Monte Carlo E exp(Σ λ_ijk A_ijk) for Gaussian points.
    LaplaceMc {
        /// Weights JSON {"i,j,k": λ, …}.
        #[arg(long)]
        lambdas: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        replicas: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Closed form 1/(1 − 3λ²/4).
    LaplaceN3 {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[command(flatten)]
        out: Output,
    },
}
