use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use simsim_core::instances::GenSpec;
use simsim_core::theorem::Mode;
use simsim_core::Tolerances;

use crate::{Arithmetic, GenKind, Options};

#[derive(Debug, Parser)]
#[command(
    name = "simsim",
    version,
    about = "Simultaneous orthogonal similarity of symmetric matrices with rank-one perturbations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every subset of size at most two; exit 0 if all pass, 1 otherwise.
    Decide(InstanceArgs),
    /// Build the orthogonal matrix Q and its residuals.
    Construct(ConstructArgs),
    /// Recompute the residuals of a certificate.
    Verify(VerifyArgs),
    /// Generate an instance.
    Gen(GenArgs),
    /// Projection norms, inner products, moments and the rank-two determinant check.
    Diag(InstanceArgs),
    /// Exact characteristic polynomials.
    Charpoly(InstanceArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    General,
    Nonnegative,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::General => Mode::General,
            ModeArg::Nonnegative => Mode::Nonnegative,
        }
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(format!("tolerance must be positive, got {s}"))
    }
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Instance file; `-` or absent reads stdin.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file; absent writes stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Override the mode stored in the file.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Decide in exact arithmetic, converting float entries to their binary values.
    #[arg(long, conflicts_with = "float")]
    pub exact: bool,
    /// Decide in float arithmetic even for rational payloads.
    #[arg(long)]
    pub float: bool,
    /// Eigenvalue clustering gap.
    #[arg(long, value_parser = positive)]
    pub tol_cluster: Option<f64>,
    /// Float similarity tolerance, relative to the spectral radius.
    #[arg(long, value_parser = positive)]
    pub tol_poly: Option<f64>,
    /// Certificate residual tolerance, scaled by n (1 + ‖A‖_F).
    #[arg(long, value_parser = positive)]
    pub tol_cert: Option<f64>,
    /// Per-cluster Gram tolerance, scaled by 1 + max ‖α_i‖².
    #[arg(long, value_parser = positive)]
    pub tol_gram: Option<f64>,
}

impl InstanceArgs {
    pub fn options(&self) -> Options {
        let defaults = Tolerances::default();
        Options {
            mode: self.mode.map(Mode::from),
            arithmetic: if self.exact {
                Arithmetic::Exact
            } else if self.float {
                Arithmetic::Float
            } else {
                Arithmetic::Auto
            },
            tols: Tolerances {
                cluster: self.tol_cluster,
                poly: self.tol_poly.unwrap_or(defaults.poly),
                cert: self.tol_cert.unwrap_or(defaults.cert),
                gram: self.tol_gram.unwrap_or(defaults.gram),
                ..defaults
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Seed for the orthogonal complements.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Certificate file with a `Q` field.
    #[arg(long)]
    pub cert: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Order of `A` and `B`.
    #[arg(long)]
    pub n: usize,
    /// Number of vectors on each side.
    #[arg(long)]
    pub m: usize,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Eigenvalue multiplicities of A, e.g. `2,1,3`.
    #[arg(long, value_delimiter = ',')]
    pub mults: Option<Vec<usize>>,
    /// Nonnegative data with a permutation as ground truth.
    #[arg(long)]
    pub nonneg: bool,
    /// Instance failing a pair check while all smaller subsets pass.
    #[arg(long, conflicts_with = "disjoint")]
    pub adversarial: bool,
    /// Nonnegative instance whose vectors have pairwise disjoint supports in separate blocks.
    #[arg(long)]
    pub disjoint: bool,
    /// Float payload instead of rationals.
    #[arg(long)]
    pub float: bool,
    /// Multiplies all entries.
    #[arg(long, default_value_t = 1.0)]
    pub entry_scale: f64,
    /// Output file; absent writes stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl GenArgs {
    pub fn spec(&self) -> (GenSpec, GenKind) {
        let spec = GenSpec {
            n: self.n,
            m: self.m,
            seed: self.seed,
            multiplicities: self.mults.clone(),
            nonneg: self.nonneg || self.disjoint,
            entry_scale: self.entry_scale,
            exact: !self.float,
        };
        let kind = if self.adversarial {
            GenKind::Adversarial
        } else if self.disjoint {
            GenKind::DisjointSupport
        } else {
            GenKind::Positive
        };
        (spec, kind)
    }
}
