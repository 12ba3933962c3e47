use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Trailing `key, value` pairs (optimiser summary).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub summary: Vec<(String, Cell)>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table { columns, rows: Vec::new(), summary: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        if !self.summary.is_empty() {
            s.push_str("# summary\n");
            for (k, v) in &self.summary {
                s.push_str(&format!("# {k},{}\n", v.csv()));
            }
        }
        s
    }

    pub fn to_json(&self, cfg: &RunConfig) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            config: &'a RunConfig,
            #[serde(flatten)]
            table: &'a Table,
        }
        let mut s = serde_json::to_string_pretty(&Doc { config: cfg, table: self }).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, cfg: &RunConfig) -> String {
        match cfg.format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(cfg),
        }
    }
}

pub fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Writes the rendered table to `cfg.out` (plus a `.meta` file with the resolved
/// configuration), or to stdout when no path is set.
pub fn emit(table: &Table, cfg: &RunConfig) -> Result<(), CliError> {
    let text = table.render(cfg);
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, text)?;
            std::fs::write(meta_path(path), cfg.to_text())?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_seventeen_significant_digits() {
        let mut t = Table::new(vec!["a".into(), "b".into()]);
        t.rows.push(vec![Cell::Num(0.1), Cell::Text("fs".into())]);
        assert_eq!(t.to_csv(), "a,b\n1.0000000000000001e-1,fs\n");
    }

    #[test]
    fn csv_round_trips_bits() {
        for x in [std::f64::consts::PI, -1e-300, 0.25, 123456.789] {
            let s = Cell::Num(x).csv();
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
