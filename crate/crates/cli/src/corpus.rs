//! The example corpus: each `*.model` file lists commands whose rendered
//! reports are stored next to it as `*.expected`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;

use crate::error::{CliError, CliResult};
use crate::model::load_model;
use crate::report::{Format, RunReport};
use crate::{execute, Cli, Command, Options, COMMANDS};

pub fn default_dir() -> PathBuf {
    match std::env::var_os("BRAIDLIE_CORPUS") {
        Some(dir) => PathBuf::from(dir),
        None => PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus")),
    }
}

pub fn model_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let io = |source| CliError::Io { path: dir.display().to_string(), source };
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.extension().is_some_and(|e| e == "model") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Run every command of one model; the text is what gets stored.
pub fn run_model(path: &Path) -> CliResult<(String, usize)> {
    let doc = load_model(path)?;
    let mut out = String::new();
    let mut failures = 0;
    for line in &doc.commands {
        let mut words = line.split_whitespace();
        let sub = words.next().unwrap_or_default();
        if !COMMANDS.contains(&sub) || sub == "paper-examples" {
            return Err(CliError::UnknownCommand(sub.into()));
        }
        let mut argv = vec!["braidlie".to_string(), sub.to_string(), path.display().to_string()];
        argv.extend(words.map(String::from));
        let cli = Cli::try_parse_from(&argv).map_err(|e| CliError::Usage(format!("{}: {}", doc.file, e.render())))?;
        let opts = Options { degree_bound: cli.degree_bound, truncate: cli.truncate };
        let echo = format!("{} {}", sub, std::iter::once(doc.file.clone()).chain(argv[3..].iter().cloned()).collect::<Vec<_>>().join(" "));
        debug_assert!(!matches!(cli.command, Command::PaperExamples { .. }));
        let report = execute(&doc, &cli.command, opts, &echo)?;
        failures += report.failures;
        out.push_str(&report.render(Format::Text));
    }
    Ok((out, failures))
}

fn first_difference(expected: &str, actual: &str) -> String {
    let mut e = expected.lines();
    let mut a = actual.lines();
    let mut n = 1;
    loop {
        match (e.next(), a.next()) {
            (Some(x), Some(y)) if x == y => n += 1,
            (x, y) => {
                return format!(
                    "line {n}: expected `{}`, got `{}`",
                    x.unwrap_or("<end>"),
                    y.unwrap_or("<end>")
                )
            }
        }
    }
}

pub fn run_corpus(dir: &Path, bless: bool) -> CliResult<RunReport> {
    let start = Instant::now();
    let mut report = RunReport::new(if bless { "paper-examples --bless" } else { "paper-examples" });
    let files = model_files(dir)?;
    if files.is_empty() {
        return Err(CliError::Usage(format!("no .model files in {}", dir.display())));
    }
    for path in files {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let expected_path = path.with_extension("expected");
        let (actual, failures) = match run_model(&path) {
            Ok(r) => r,
            Err(e) => {
                report.check(false, format!("example {stem}"));
                report.record(format!("ERROR {e}"));
                continue;
            }
        };
        if bless {
            std::fs::write(&expected_path, &actual)
                .map_err(|source| CliError::Io { path: expected_path.display().to_string(), source })?;
            report.check(failures == 0, format!("example {stem} blessed inner_failures={failures}"));
            continue;
        }
        let expected = match std::fs::read_to_string(&expected_path) {
            Ok(t) => t,
            Err(_) => {
                report.check(false, format!("example {stem}"));
                report.record(format!("MISSING {}", expected_path.file_name().unwrap_or_default().to_string_lossy()));
                continue;
            }
        };
        let same = expected == actual;
        report.check(same && failures == 0, format!("example {stem} inner_failures={failures}"));
        if !same {
            report.record(format!("DIFF {}", first_difference(&expected, &actual)));
        }
    }
    report.elapsed = start.elapsed();
    Ok(report)
}
