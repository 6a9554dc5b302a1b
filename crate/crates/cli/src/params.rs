//! Command-line arguments and the optional JSON parameter file.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use latflow::scalar::{parse_rational, Rational};

use crate::Failure;

#[derive(Parser, Debug)]
#[command(name = "latflow", version, about = "Expanding curve translates on the space of lattices", arg_required_else_help = true)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand. Each may also be given in the
/// `--params` file; flags win.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Common {
    /// Ambient dimension n.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Curve as JSON text or a path to a JSON file.
    #[arg(long, global = true)]
    pub curve: Option<String>,
    /// Sequence spec as JSON text or a path to a JSON file.
    #[arg(long, global = true)]
    pub sequence: Option<String>,
    /// Comma-separated shrink factors, e.g. `0.5,0.9` or `1/2`.
    #[arg(long, global = true)]
    pub mu: Option<String>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub imin: Option<u64>,
    #[arg(long, global = true)]
    pub imax: Option<u64>,
    /// Output directory for CSV tables and the run manifest.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for random sample grids and random bases (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Curve sample grid: `random` (seeded) or `equispaced`.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// `exact` or `float`.
    #[arg(long, global = true)]
    pub backend: Option<String>,
    /// JSON file with any of the flags above.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub params: Option<PathBuf>,
}

impl Common {
    /// Fills unset flags from the `--params` file.
    pub fn resolve(mut self) -> Result<Self, Failure> {
        let Some(path) = self.params.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let file: Common = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        macro_rules! fill {
            ($($f:ident),*) => { $( if self.$f.is_none() { self.$f = file.$f; } )* };
        }
        fill!(n, curve, sequence, mu, samples, imin, imax, out, threads, seed, grid, backend);
        Ok(self)
    }
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Fraction of samples missing K_mu x K_mu along window prefixes.
    Improvability {
        /// Windows `N`, `;`-separated tuples such as `10,10;100,100`.
        /// Default: `(10^j, ..., 10^j)` for `j = 1..=imax`.
        #[arg(long)]
        windows: Option<String>,
    },
    /// Siegel averages of a tent function against its integral.
    Equidist {
        #[command(flatten)]
        tent: TentArgs,
    },
    /// Fraction of samples with a short vector.
    Nondiv {
        /// Comma-separated thresholds.
        #[arg(long, default_value = "0.05")]
        eps: String,
    },
    /// Invariance defect of the twisted measures under `u(t w_0)`.
    Twist {
        /// Comma-separated shifts.
        #[arg(long, default_value = "0,1")]
        t: String,
        #[command(flatten)]
        tent: TentArgs,
        /// Clip level of the Siegel transform.
        #[arg(long, default_value_t = 20.0)]
        cap: f64,
    },
    /// Exact weight-space lemma checks on random affine bases.
    LemmaVerify {
        /// `wedge:n:d`, `adjoint:n` or `trivial:n`.
        #[arg(long)]
        rep: String,
        /// Layer sizes, e.g. `2,1`.
        #[arg(long)]
        config: String,
        /// Growth layers `c:p`, e.g. `1:1,1:2`. Default: all linear.
        #[arg(long)]
        growth: Option<String>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Coordinate height of the random bases.
        #[arg(long, default_value_t = 5)]
        height: i64,
    },
    /// Gamma reductions, K_1 witnesses and the non-integral window scan.
    Constructions {
        /// Window sizes `N_1,...,N_k` for the gamma matrix.
        #[arg(long)]
        gamma: Option<String>,
        /// Window sizes for the K_1 witness (needs `--m1`).
        #[arg(long)]
        k1: Option<String>,
        #[arg(long, default_value_t = 1)]
        m1: usize,
        /// Run the solubility scan with this fixed window, e.g. `5/2`.
        #[arg(long)]
        n_fixed: Option<String>,
        /// Varying windows for the scan.
        #[arg(long, default_value = "10,100,1000,10000")]
        n1: String,
        /// Number of Kronecker points for the scan.
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// Bisection steps for the solubility threshold (0 skips it).
        #[arg(long, default_value_t = 0)]
        bisect: usize,
    },
    /// Layered presentation of a sequence, with the exponential identity.
    Layered {
        /// Coordinates of `tau_i` as closed forms, e.g. `2:1,1:1,3`.
        #[arg(long)]
        tau: Option<String>,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TentArgs {
    #[arg(long, default_value_t = 2.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 1.0)]
    pub height: f64,
}

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| usage(format!("bad {what} `{t}` in `{s}`"))))
        .collect()
}

pub fn parse_rationals(s: &str) -> Result<Vec<Rational>, Failure> {
    s.split(',')
        .map(|t| parse_rational(t).map_err(Failure::from))
        .collect()
}

/// JSON given inline (starting with `{`) or as a file path.
pub fn json_text(arg: &str) -> Result<String, Failure> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        fs::read_to_string(arg).map_err(|e| usage(format!("{arg}: {e}")))
    }
}
