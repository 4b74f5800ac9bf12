//! `gradcons`: check graphs against nested constraints, apply rules and
//! classify them by their effect on consistency.

mod commands;
mod input;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gradcons::SearchConfig;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "gradcons", version, about = "Graduated consistency analysis for typed graph rewriting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Largest host graph (in nodes) enumerated by bounded searches.
    #[arg(long, global = true, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub bound: u64,

    /// Additional random hosts sampled beyond the exhaustive bound.
    #[arg(long, global = true, default_value_t = 200)]
    pub samples: usize,

    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Also use the unproven criteria for three nesting levels.
    #[arg(long, global = true)]
    pub conjecture: bool,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and validate graph, constraint or rule documents.
    Validate {
        #[arg(required = true)]
        files: Vec<String>,
    },
    /// Decide whether a graph satisfies constraints.
    Satisfy {
        graph: String,
        #[arg(required = true)]
        constraints: Vec<String>,
    },
    /// Consistency report of a graph for constraints in alternating normal form.
    Report {
        graph: String,
        #[arg(required = true)]
        constraints: Vec<String>,
    },
    /// Apply a rule at one of its matches.
    Apply {
        rule: String,
        graph: String,
        /// Position of the match in canonical order.
        #[arg(long = "match", default_value_t = 0)]
        match_index: usize,
        /// Write the resulting graph document here.
        #[arg(long, short)]
        output: Option<std::path::PathBuf>,
    },
    /// Classify one transformation step with respect to a constraint.
    ClassifyStep {
        rule: String,
        graph: String,
        constraint: String,
        #[arg(long = "match", default_value_t = 0)]
        match_index: usize,
    },
    /// Classify a rule: static criteria combined with a bounded search.
    ClassifyRule { rule: String, constraint: String },
    /// Independence and rule property tables for sets of rules and constraints.
    Analyze {
        #[arg(long, num_args = 1.., required = true)]
        rules: Vec<String>,
        #[arg(long, num_args = 1.., required = true)]
        constraints: Vec<String>,
    },
    /// Reproduce the case-study results and compare them with the published values.
    Bench {
        #[arg(value_enum, default_value_t = BenchTarget::All)]
        target: BenchTarget,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BenchTarget {
    Example1,
    Table3,
    Table1,
    All,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Satisfy { .. } => "satisfy",
            Command::Report { .. } => "report",
            Command::Apply { .. } => "apply",
            Command::ClassifyStep { .. } => "classify-step",
            Command::ClassifyRule { .. } => "classify-rule",
            Command::Analyze { .. } => "analyze",
            Command::Bench { .. } => "bench",
        }
    }
}

pub const CONJECTURE_BANNER: &str =
    "CONJECTURE MODE: verdicts marked [conjectured] come from unproven criteria for three nesting levels";

/// What a command produced. Text and JSON carry the same verdicts.
pub struct Output {
    pub text: String,
    pub json: serde_json::Value,
    /// A reproduction differed from the published values.
    pub mismatch: bool,
}

impl Cli {
    pub fn config(&self) -> SearchConfig {
        SearchConfig { bound: self.bound as usize, samples: self.samples, seed: self.seed }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(out) => {
            match cli.format {
                OutputFormat::Text => {
                    println!("gradcons {} (bound {}, samples {}, seed {})", cli.command.name(), cli.bound, cli.samples, cli.seed);
                    if cli.conjecture {
                        println!("{CONJECTURE_BANNER}");
                    }
                    print!("{}", out.text);
                }
                OutputFormat::Json => {
                    let mut doc = json!({
                        "command": cli.command.name(),
                        "bound": cli.bound,
                        "samples": cli.samples,
                        "seed": cli.seed,
                        "conjecture_mode": cli.conjecture,
                        "result": out.json,
                    });
                    if cli.conjecture {
                        doc["banner"] = json!(CONJECTURE_BANNER);
                    }
                    println!("{}", serde_json::to_string_pretty(&doc).expect("JSON values serialise"));
                }
            }
            if out.mismatch {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
