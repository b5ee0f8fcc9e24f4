//! `rqc`: enumerate r-quadratic covers, tabulate trace distributions, and
//! check them against the random model.

mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug, Clone, Serialize, Deserialize)]
#[command(name = "rqc", version, about = "Point-count statistics of r-quadratic covers of P^1 over F_q")]
pub struct Cli {
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Where to write the JSON sidecar; defaults to `<out>.json` when `--out` is given.
    #[arg(long, global = true)]
    pub sidecar: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct FamilyArgs {
    /// Field size, as `N` or `P^E`.
    #[arg(long)]
    pub q: String,

    #[arg(long, default_value_t = 2)]
    pub r: u32,

    /// Component degrees in mask order, e.g. `2,2,2` for (f1, f2, f).
    #[arg(long, value_delimiter = ',', required = true)]
    pub degrees: Vec<usize>,

    /// Leave all but the last component non-monic.
    #[arg(long)]
    pub hat: bool,

    /// Union of the base pattern and each one-lower pattern (r = 2).
    #[arg(long)]
    pub bracket: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SampleArgs {
    /// Draw this many uniform tuples instead of enumerating.
    #[arg(long)]
    pub sample: Option<u64>,

    /// Seed for sampling; required with `--sample`.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Refuse exhaustive runs over more tuples than this.
    #[arg(long, default_value_t = 50_000_000)]
    pub max_work: u128,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
pub enum Command {
    /// List every tuple of a family with its genus.
    Enumerate {
        #[command(flatten)]
        family: FamilyArgs,
        /// Refuse families larger than this.
        #[arg(long, default_value_t = 1_000_000)]
        max_work: u128,
    },
    /// Histogram of S^ over a family against the model law.
    TraceDist {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        sample: SampleArgs,
    },
    /// Normalized moments of S^ over a family against the model.
    Moments {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long, default_value_t = 6)]
        max_k: u32,
    },
    /// Exact model law of S^: q + 1 independent local contributions.
    Model {
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 2)]
        r: u32,
    },
    /// Exact moments of the model law.
    ModelMoments {
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 2)]
        r: u32,
        #[arg(long, default_value_t = 6)]
        max_k: u32,
        /// Number of summands; defaults to q + 1.
        #[arg(long)]
        n: Option<u32>,
    },
    /// Truncated Euler products L, K, L_beta and the regrouped product.
    Constants {
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 3)]
        beta: u32,
        #[arg(long, default_value_t = 12)]
        max_degree: u32,
    },
    /// Check a counting statement by exhaustive enumeration.
    Verify(VerifyArgs),
    /// Genus by ramification and by subextensions.
    Genus {
        #[arg(long, default_value_t = 2)]
        r: u32,
        /// One degree vector in mask order.
        #[arg(long, value_delimiter = ',')]
        degrees: Option<Vec<usize>>,
        /// All degree vectors with entries up to this bound.
        #[arg(long, default_value_t = 3)]
        max_degree: usize,
    },
    /// Repeat the run recorded in a JSON sidecar.
    Rerun {
        sidecar_file: PathBuf,
    },
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub q: String,

    /// lemma-S, lemma-R, prop45, cor46, cor47, cor48, cor68, fibers, genus or identity.
    #[arg(long)]
    pub statement: String,

    #[arg(long, default_value_t = 2)]
    pub r: u32,

    /// Degrees: one for lemma-S, one per component otherwise.
    #[arg(long, value_delimiter = ',')]
    pub degrees: Vec<usize>,

    /// Auxiliary polynomial U as coefficient indices, constant term first.
    #[arg(long, default_value = "1")]
    pub u: String,

    /// Distinct points as element indices; `inf` for infinity (cor48).
    #[arg(long, value_delimiter = ',')]
    pub points: Vec<String>,

    /// Prescribed data, one `;`-separated group per point (per component for
    /// lemma-R), entries separated by commas.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    pub values: String,

    /// Largest m for the identity; largest degree for the genus table.
    #[arg(long, default_value_t = 7)]
    pub max: u32,

    /// Relative tolerance for asymptotic statements.
    #[arg(long, default_value_t = rqc_core::verify::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run::configure_threads().and_then(|threads| run::execute(&cli, threads)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rqc: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
