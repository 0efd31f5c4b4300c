//! `nbhd`: neighbourhood models from the command line.
//!
//! Every subcommand prints one JSON document on standard output, or a short
//! human summary with `--pretty`. Exit codes: 0 success, 1 the property
//! asked about is false, 2 bad input, 3 a resource cap was hit.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "nbhd",
    version,
    about = "Finite neighbourhood semantics for classical modal logic"
)]
pub struct Cli {
    /// Print a human summary instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Worker threads for the library (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Bis,
    Precocong,
    Beh,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleArg {
    Ex1,
    Ex2,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Truth set of a formula, and its value at a state.
    Check {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        state: Option<String>,
    },
    /// Largest relations of each kind between two models, or a check of a
    /// given relation.
    Equiv {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        kind: KindArg,
        /// JSON list of [left, right] state-name pairs.
        #[arg(long)]
        relation: Option<PathBuf>,
    },
    /// Verify that a map between two models is a bounded morphism.
    Morphism {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        /// JSON object from source to target state names.
        #[arg(long)]
        map: PathBuf,
    },
    /// Quotient of a model by an equivalence relation that is a congruence.
    Quotient {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        relation: PathBuf,
    },
    /// Quotient of a model by its largest congruence.
    Minimize {
        #[arg(long)]
        model: PathBuf,
    },
    /// Ultrafilter extension of a model.
    Ufext {
        #[arg(long)]
        model: PathBuf,
    },
    /// Two-sorted structure of a model, or standard translation of a formula.
    Translate {
        #[arg(long, conflicts_with = "formula", required_unless_present = "formula")]
        model: Option<PathBuf>,
        #[arg(long)]
        formula: Option<String>,
        #[arg(long, default_value = "x")]
        var: String,
    },
    /// Kripke model to neighbourhood model.
    FromKripke {
        #[arg(long)]
        kripke: PathBuf,
    },
    /// Augmented neighbourhood model to Kripke model.
    ToKripke {
        #[arg(long)]
        model: PathBuf,
    },
    /// Satisfiability over all neighbourhood models.
    Sat {
        #[arg(long)]
        formula: String,
    },
    /// Validity, or local consequence from the given premises.
    Valid {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        premise: Vec<String>,
    },
    /// Smallest interpolant over the shared atoms.
    Interpolate {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long, default_value_t = nbhd_core::decision::DEFAULT_INTERPOLANT_SIZE)]
        max_size: usize,
    },
    /// Re-derive the facts about the bundled example frames.
    Examples {
        #[arg(value_enum)]
        which: ExampleArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("nbhd: cannot configure {jobs} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = commands::run(&cli.command);
    if cli.pretty {
        for line in &outcome.lines {
            println!("{line}");
        }
    } else {
        println!(
            "{}",
            serde_json::to_string_pretty(&outcome.json).expect("output serialises")
        );
    }
    ExitCode::from(outcome.code)
}
