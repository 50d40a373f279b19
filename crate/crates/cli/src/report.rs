use std::fmt::Write as _;
use std::time::Duration;

use clap::ValueEnum;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Machine,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Line {
    /// Shown only in text format.
    Note(String),
    /// Structured record, shown in both formats.
    Record(String),
}

/// Output of one command. Timing is kept out of the rendered text so that
/// identical inputs give identical bytes.
#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub echo: String,
    lines: Vec<Line>,
    pub caveats: Vec<String>,
    pub checks: usize,
    pub failures: usize,
    pub elapsed: Duration,
}

impl RunReport {
    pub fn new(echo: impl Into<String>) -> Self {
        RunReport { echo: echo.into(), ..Default::default() }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.lines.push(Line::Note(text.into()));
    }

    pub fn record(&mut self, text: impl Into<String>) {
        self.lines.push(Line::Record(text.into()));
    }

    /// A pass/fail record; counts towards the summary.
    pub fn check(&mut self, passed: bool, text: impl AsRef<str>) {
        self.checks += 1;
        if !passed {
            self.failures += 1;
        }
        let verdict = if passed { "PASS" } else { "FAIL" };
        self.record(format!("CHECK {} {verdict}", text.as_ref()));
    }

    pub fn caveat(&mut self, text: impl Into<String>) {
        self.caveats.push(text.into());
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        if format == Format::Text {
            let _ = writeln!(out, "$ {}", self.echo);
        }
        for line in &self.lines {
            match (line, format) {
                (Line::Note(t), Format::Text) => {
                    let _ = writeln!(out, "  {t}");
                }
                (Line::Note(_), Format::Machine) => {}
                (Line::Record(t), _) => {
                    let _ = writeln!(out, "{t}");
                }
            }
        }
        for c in &self.caveats {
            let _ = writeln!(out, "CAVEAT {c}");
        }
        let _ = writeln!(out, "SUMMARY checks={} failures={}", self.checks, self.failures);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn machine_format_drops_notes_and_echo() {
        let mut r = RunReport::new("hopf-check m.model");
        r.note("dimension 4");
        r.check(true, "antipode");
        r.check(false, "counit");
        r.caveat("truncated");
        assert_eq!(r.render(Format::Machine), "CHECK antipode PASS\nCHECK counit FAIL\nCAVEAT truncated\nSUMMARY checks=2 failures=1\n");
        assert!(r.render(Format::Text).starts_with("$ hopf-check m.model\n  dimension 4\n"));
    }
}
