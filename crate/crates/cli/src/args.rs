use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cantor_cvt::cvt::DEFAULT_MAX_DEPTH;
use cantor_cvt::scalar::parse_scalar;
use cantor_cvt::{Family, ParamScalar, Scalar, Word};

#[derive(Parser, Debug)]
#[command(name = "cantor-cvt", version, about = "Exact quantization and CVTs for dyadic Cantor measures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Output::Text)]
    pub output: Output,

    /// Maximum cylinder depth when resolving Voronoi cells.
    #[arg(
        long,
        global = true,
        env = "CANTOR_CVT_MAX_DEPTH",
        default_value_t = DEFAULT_MAX_DEPTH as u64,
        value_parser = clap::value_parser!(u64).range(1..=64)
    )]
    pub depth: u64,

    /// Bisection tolerance for thresholds and roots.
    #[arg(long, global = true, default_value = "1e-12", value_parser = parse_tolerance)]
    pub tol: ParamScalar,

    /// Worker threads for sweeps and enumeration.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=256))]
    pub parallel: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Mean, variance and second moment of the measure.
    Moments {
        #[arg(long)]
        r: RatioArg,
    },
    /// Build one codebook and print its points and cells.
    Codebook {
        #[command(flatten)]
        spec: CodebookSpec,
        #[arg(long)]
        r: RatioArg,
    },
    /// List every construction for `n`, checking the count.
    Enumerate {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: usize,
        /// Build the codebooks at this ratio.
        #[arg(long)]
        r: Option<RatioArg>,
        /// Verify every codebook (needs a concrete --r).
        #[arg(long)]
        verify: bool,
    },
    /// Check the centroid and boundary-in-gap conditions exactly.
    Verify {
        #[command(flatten)]
        spec: CodebookSpec,
        #[arg(long)]
        r: Option<RatioArg>,
    },
    /// Distortion of a codebook, exact, enclosed, or as a function of r.
    Distortion {
        #[command(flatten)]
        spec: CodebookSpec,
        #[arg(long)]
        r: Option<RatioArg>,
        /// With --r formal: certify the cell assignment on this interval, as `lo,hi`.
        #[arg(long, value_delimiter = ',', value_parser = parse_rational)]
        window: Option<Vec<ParamScalar>>,
    },
    /// Compare the alpha, beta and delta codebooks at one ratio or over a grid.
    Compare {
        #[arg(long, required_unless_present = "sweep", conflicts_with = "sweep")]
        r: Option<RatioArg>,
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Grid `lo:hi:step`; writes one row per ratio.
        #[arg(long, value_parser = parse_sweep)]
        sweep: Option<Sweep>,
    },
    /// Solve the seven critical ratios.
    Thresholds,
    /// Optimal quantizer and Lloyd iteration on a discretized measure.
    Oracle {
        #[arg(long)]
        r: RatioArg,
        /// Discretization level: 2^level equal atoms.
        #[arg(long, default_value_t = 10)]
        level: usize,
        #[arg(long)]
        n: usize,
        /// Starting points for Lloyd iteration.
        #[arg(long, value_delimiter = ',', value_parser = parse_rational)]
        init: Option<Vec<ParamScalar>>,
        #[arg(long, default_value_t = 1000)]
        max_iters: usize,
        /// Use floating point instead of exact rationals.
        #[arg(long)]
        float: bool,
    },
}

/// Where a codebook comes from: a family construction, explicit points, or a JSON file.
#[derive(Args, Debug, Clone)]
pub struct CodebookSpec {
    #[arg(long, required_unless_present_any = ["points", "codebook"])]
    pub family: Option<Family>,
    #[arg(long, required_unless_present_any = ["points", "codebook"])]
    pub n: Option<usize>,
    /// Index set, comma separated (`e` is the empty word). Defaults to the first construction.
    #[arg(long = "I", value_delimiter = ',')]
    pub index_set: Option<Vec<Word>>,
    /// Variant bits, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(0..=1))]
    pub variants: Option<Vec<u8>>,
    /// Explicit sorted points, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_rational, conflicts_with_all = ["family", "codebook"])]
    pub points: Option<Vec<ParamScalar>>,
    /// Codebook JSON as written by `codebook --output json`.
    #[arg(long, conflicts_with = "family")]
    pub codebook: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RatioArg {
    Formal,
    Value(ParamScalar),
}

impl std::str::FromStr for RatioArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim().eq_ignore_ascii_case("formal") {
            return Ok(RatioArg::Formal);
        }
        let r = parse_scalar(s).map_err(|e| e.to_string())?;
        r.check_ratio().map_err(|e| e.to_string())?;
        Ok(RatioArg::Value(r))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub lo: ParamScalar,
    pub hi: ParamScalar,
    pub step: ParamScalar,
}

impl Sweep {
    pub fn grid(&self) -> Vec<ParamScalar> {
        let mut out = Vec::new();
        let mut r = self.lo.clone();
        while r <= self.hi {
            out.push(r.clone());
            r += &self.step;
        }
        out
    }
}

fn parse_rational(s: &str) -> Result<ParamScalar, String> {
    parse_scalar(s).map_err(|e| e.to_string())
}

fn parse_tolerance(s: &str) -> Result<ParamScalar, String> {
    let t = parse_rational(s)?;
    if t <= ParamScalar::from_integer(0.into()) {
        return Err("tolerance must be positive".into());
    }
    Ok(t)
}

fn parse_sweep(s: &str) -> Result<Sweep, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err("expected lo:hi:step".into());
    };
    let sweep = Sweep { lo: parse_rational(lo)?, hi: parse_rational(hi)?, step: parse_rational(step)? };
    if sweep.step <= ParamScalar::from_integer(0.into()) {
        return Err("step must be positive".into());
    }
    for r in [&sweep.lo, &sweep.hi] {
        r.check_ratio().map_err(|e| e.to_string())?;
    }
    if sweep.lo > sweep.hi {
        return Err("lo exceeds hi".into());
    }
    Ok(sweep)
}
