//! Output envelope and formatting helpers shared by the subcommands.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use ipwvar::PopulationSpec;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Reproducibility wrapper around every JSON result: the exact invocation,
/// tool version, resolved seed, and input population travel with the payload.
#[derive(Serialize)]
pub struct Envelope<T: Serialize> {
    pub command: Vec<String>,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_source: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub population: Option<PopulationSpec>,
    pub result: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(result: T) -> Self {
        Envelope {
            command: std::env::args().collect(),
            version: VERSION,
            seed: None,
            seed_source: None,
            population: None,
            result,
        }
    }

    pub fn with_population(mut self, pop: &PopulationSpec) -> Self {
        self.population = Some(pop.clone());
        self
    }

    pub fn with_seed(mut self, seed: u64, source: &'static str) -> Self {
        self.seed = Some(seed);
        self.seed_source = Some(source);
        self
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("envelope serializes");
        text.push('\n');
        text
    }
}

/// 17 significant digits: enough to reparse the exact double, stable to diff.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV document with `# key: value` reproducibility comments up front.
pub struct CsvDocument {
    lines: Vec<String>,
    columns: usize,
}

impl CsvDocument {
    pub fn new() -> Self {
        let mut doc = CsvDocument { lines: Vec::new(), columns: 0 };
        let args: Vec<String> = std::env::args().collect();
        doc.comment("command", args.join(" "));
        doc.comment("version", VERSION);
        doc
    }

    pub fn comment(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push(format!("# {key}: {value}"));
    }

    pub fn header(&mut self, columns: &[&str]) {
        self.columns = columns.len();
        self.lines.push(columns.join(","));
    }

    pub fn row(&mut self, label: &str, values: &[f64]) {
        debug_assert_eq!(values.len() + 1, self.columns);
        let mut fields = Vec::with_capacity(values.len() + 1);
        fields.push(label.to_owned());
        fields.extend(values.iter().map(|&v| fmt_f64(v)));
        self.lines.push(fields.join(","));
    }

    /// Row whose first column is itself numeric (sweep grids).
    pub fn numeric_row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.columns);
        self.lines
            .push(values.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(","));
    }

    pub fn render(&self) -> String {
        let mut text = self.lines.join("\n");
        text.push('\n');
        text
    }
}

/// Writes to `--out` when given, stdout otherwise.
pub fn emit(out: Option<&Path>, text: &str) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => io::stdout().write_all(text.as_bytes()),
    }
}
