//! Front end for `braidlie`: model files, commands and the example corpus.

pub mod commands;
pub mod corpus;
pub mod error;
pub mod model;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

pub use commands::Options;
pub use error::{CliError, CliResult};
pub use model::{load_model, parse_model, ModelDocument};
pub use report::{Format, RunReport};

#[derive(Debug, Parser)]
#[command(name = "braidlie", version, about = "Lie algebras and Hopf algebras in categories of graded modules")]
pub struct Cli {
    /// Report layout; `machine` keeps only the structured records.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Word-length bound for completing rewriting systems.
    #[arg(long, global = true, value_name = "D")]
    pub degree_bound: Option<usize>,

    /// Allow checking an infinite-dimensional algebra on words up to length T.
    #[arg(long, global = true, value_name = "T", num_args = 0..=1)]
    pub truncate: Option<Option<usize>>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ζ-families of length n.
    Families {
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        zeta: Option<String>,
    },
    /// ρ(σ, family) for one or all permutations.
    Rho {
        model: PathBuf,
        #[arg(long)]
        family: String,
        #[arg(long, allow_hyphen_values = true)]
        zeta: String,
        /// One-line notation, e.g. `2,1,3`.
        #[arg(long)]
        perm: Option<String>,
    },
    /// The bracket on formal generators, or on named generators of the model.
    Bracket {
        model: PathBuf,
        #[arg(long)]
        family: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        zeta: String,
        #[arg(long)]
        args: Option<String>,
    },
    /// Symmetry, Jacobi and primitivity identities over all families.
    CheckIdentities {
        model: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_n: usize,
    },
    /// The universal enveloping algebra of the Lie block.
    Envelop { model: PathBuf },
    /// Braided Hopf algebra axioms.
    HopfCheck { model: PathBuf },
    /// The space of primitive elements.
    Primitives { model: PathBuf },
    /// The ordinary Hopf algebra H ⋆ kG.
    Biproduct { model: PathBuf },
    /// Run the example corpus and compare with the stored outputs.
    PaperExamples {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Overwrite the stored outputs.
        #[arg(long)]
        bless: bool,
    },
}

pub const COMMANDS: &[&str] = &[
    "families",
    "rho",
    "bracket",
    "check-identities",
    "envelop",
    "hopf-check",
    "primitives",
    "biproduct",
    "paper-examples",
];

impl Command {
    pub fn model(&self) -> Option<&Path> {
        match self {
            Command::Families { model, .. }
            | Command::Rho { model, .. }
            | Command::Bracket { model, .. }
            | Command::CheckIdentities { model, .. }
            | Command::Envelop { model }
            | Command::HopfCheck { model }
            | Command::Primitives { model }
            | Command::Biproduct { model } => Some(model),
            Command::PaperExamples { .. } => None,
        }
    }
}

/// Run a model command on an already loaded document.
pub fn execute(doc: &ModelDocument, command: &Command, opts: Options, echo: &str) -> CliResult<RunReport> {
    let start = Instant::now();
    let mut report = RunReport::new(echo);
    match command {
        Command::Families { n, zeta, .. } => commands::families(doc, *n, zeta.as_deref(), &mut report)?,
        Command::Rho { family, zeta, perm, .. } => {
            commands::rho_command(doc, family, zeta, perm.as_deref(), &mut report)?
        }
        Command::Bracket { family, zeta, args, .. } => {
            commands::bracket(doc, family.as_deref(), zeta, args.as_deref(), opts, &mut report)?
        }
        Command::CheckIdentities { max_n, .. } => commands::check_identities(doc, *max_n, &mut report)?,
        Command::Envelop { .. } => commands::envelop(doc, opts, &mut report)?,
        Command::HopfCheck { .. } => commands::hopf_check(doc, opts, &mut report)?,
        Command::Primitives { .. } => commands::primitives(doc, opts, &mut report)?,
        Command::Biproduct { .. } => commands::biproduct(doc, opts, &mut report)?,
        Command::PaperExamples { .. } => return Err(CliError::UnknownCommand("paper-examples inside a model".into())),
    }
    report.elapsed = start.elapsed();
    Ok(report)
}

/// The echo line: arguments after the program name, with the model path
/// shortened to its file name so reports do not depend on the location.
fn echo_of(args: &[String], model: Option<&Path>) -> String {
    let mut parts = Vec::new();
    for a in args.iter().skip(1) {
        match model {
            Some(m) if Path::new(a) == m => {
                parts.push(m.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| a.clone()))
            }
            _ => parts.push(a.clone()),
        }
    }
    parts.join(" ")
}

/// What a process invocation produces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: i32,
}

impl Outcome {
    fn input_error(e: impl std::fmt::Display) -> Outcome {
        Outcome { stdout: String::new(), stderr: format!("error: {e}\n"), exit_code: 2 }
    }
}

/// Parse and run a full argument vector (including the program name).
pub fn run_args(args: &[String]) -> Outcome {
    if let Some(sub) = args.get(1).filter(|a| !a.starts_with('-')) {
        if !COMMANDS.contains(&sub.as_str()) {
            return Outcome::input_error(CliError::UnknownCommand(sub.clone()));
        }
    }
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome { stdout: text, stderr: String::new(), exit_code: 0 }
                }
                _ => Outcome { stdout: String::new(), stderr: text, exit_code: 2 },
            };
        }
    };
    let opts = Options { degree_bound: cli.degree_bound, truncate: cli.truncate };
    let result = match &cli.command {
        Command::PaperExamples { corpus, bless } => {
            let dir = corpus.clone().unwrap_or_else(corpus::default_dir);
            corpus::run_corpus(&dir, *bless)
        }
        command => {
            let path = command.model().expect("model commands carry a path");
            load_model(path).and_then(|doc| execute(&doc, command, opts, &echo_of(args, Some(path))))
        }
    };
    match result {
        Ok(report) => Outcome {
            stdout: report.render(cli.format),
            stderr: format!("elapsed {:.3}s\n", report.elapsed.as_secs_f64()),
            exit_code: if report.passed() { 0 } else { 1 },
        },
        Err(e) => Outcome::input_error(e),
    }
}
