//! Command-line driver for the split quasimorphism toolkit.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use error::CliError;
pub use report::{Format, Report};

#[derive(Debug, Parser)]
#[command(
    name = "splitqm",
    version,
    about = "Split quasimorphisms, quasicocycles and quasi-representations on free products"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Overrides the seed from the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Number of sampled words or pairs.
    #[arg(long, global = true)]
    pub samples: Option<usize>,

    /// Depth of power checks, growth words or witness searches.
    #[arg(long, global = true)]
    pub depth: Option<u32>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a quasimorphism on a word.
    Eval {
        #[arg(long)]
        name: Option<String>,
        /// Word such as "a b^-2 a^3 b"; several arguments are joined by
        /// spaces and the empty string is the identity.
        #[arg(num_args = 1.., required = true)]
        word: Vec<String>,
    },
    /// Factor defects, split defect, sampled defect and the class norm.
    Defect {
        #[arg(long)]
        name: Option<String>,
    },
    /// Homogenization of a word, with power and conjugation checks.
    Homogenize {
        #[arg(long)]
        name: Option<String>,
        #[arg(num_args = 1.., required = true)]
        word: Vec<String>,
    },
    /// Counting-quasimorphism decomposition of a finitely supported map.
    Decompose {
        #[arg(long)]
        name: Option<String>,
        /// A single word; sampled words when omitted.
        word: Option<String>,
    },
    /// Fixed-point check under the automorphism a -> a, b -> b a^n.
    TauCheck {
        #[arg(long)]
        name: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
    },
    /// Unbounded-growth witnesses for quasicocycles and sampled cocycle defects.
    QcGrowth,
    /// Norms, order bounds and isometric embeddings on finite carriers.
    DefectSpace,
    /// Quasi-representation defects and distance witnesses.
    Qrep {
        #[arg(long)]
        name: Option<String>,
    },
    /// The Rademacher quasimorphism on Z/2 * Z/3.
    Rademacher,
    /// Run the acceptance checks.
    Selftest {
        /// Build the growth witnesses with the literal translations (must fail).
        #[arg(long)]
        literal_convention: bool,
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let config = cli.config.as_deref().map(config::load).transpose()?;
    let ctx = commands::Context {
        config,
        seed: cli.seed,
        samples: cli.samples,
        depth: cli.depth,
    };
    match &cli.command {
        Command::Eval { name, word } => commands::eval(&ctx, name.as_deref(), &word.join(" ")),
        Command::Defect { name } => commands::defect(&ctx, name.as_deref()),
        Command::Homogenize { name, word } => {
            commands::homogenize(&ctx, name.as_deref(), &word.join(" "))
        }
        Command::Decompose { name, word } => {
            commands::decompose(&ctx, name.as_deref(), word.as_deref())
        }
        Command::TauCheck { name, n } => commands::tau_check(&ctx, name.as_deref(), *n),
        Command::QcGrowth => commands::qc_growth(&ctx),
        Command::DefectSpace => commands::defect_space(&ctx),
        Command::Qrep { name } => commands::qrep(&ctx, name.as_deref()),
        Command::Rademacher => commands::rademacher_report(&ctx),
        Command::Selftest {
            literal_convention,
            only,
        } => commands::selftest(&ctx, *literal_convention, only),
    }
}
