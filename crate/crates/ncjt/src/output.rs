//! CSV tables and their JSON sidecars.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde_json::{json, Map, Value};

use crate::scenario_file::ScenarioFile;

/// Bumped whenever a column or sidecar key changes meaning.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write<W: Write>(&self, w: W) -> anyhow::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for r in &self.rows {
            out.write_record(r.iter().map(|v| v.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Metadata written next to every table.
#[derive(Debug, Clone, Default)]
pub struct Sidecar {
    pub command: String,
    pub scenarios: Vec<(String, ScenarioFile)>,
    pub seed: Option<u64>,
    pub swept: Vec<String>,
    pub summary: Map<String, Value>,
}

impl Sidecar {
    pub fn new(command: &str) -> Self {
        Sidecar {
            command: command.to_string(),
            ..Default::default()
        }
    }

    pub fn scenario(mut self, label: &str, f: ScenarioFile) -> Self {
        self.scenarios.push((label.to_string(), f));
        self
    }

    pub fn note(&mut self, key: &str, v: impl Into<Value>) {
        self.summary.insert(key.to_string(), v.into());
    }

    pub fn to_json(&self) -> Value {
        let scenarios: Map<String, Value> = self
            .scenarios
            .iter()
            .map(|(k, f)| {
                (
                    k.clone(),
                    serde_json::to_value(f).expect("scenario serialises"),
                )
            })
            .collect();
        json!({
            "format_version": FORMAT_VERSION,
            "tool": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
            "command": self.command,
            "scenarios": scenarios,
            "seed": self.seed,
            "swept": self.swept,
            "summary": self.summary,
        })
    }
}

/// `out.csv` -> `out.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Write the table to `path` (stdout when `None`) and, for files, the sidecar.
pub fn emit(table: &Table, sidecar: &Sidecar, path: Option<&Path>) -> anyhow::Result<()> {
    match path {
        None => {
            let stdout = std::io::stdout();
            table.write(stdout.lock())?;
        }
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
            }
            let f =
                std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            table.write(std::io::BufWriter::new(f))?;
            let mut text = serde_json::to_string_pretty(&sidecar.to_json())?;
            text.push('\n');
            let sp = sidecar_path(p);
            std::fs::write(&sp, text).with_context(|| format!("writing {}", sp.display()))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(["beta_db", "approx"]);
        t.push(vec![-10.0, 0.25]);
        t.push(vec![0.0, 1.0]);
        assert_eq!(t.to_csv_string(), "beta_db,approx\n-10,0.25\n0,1\n");
        assert_eq!(t.column("approx").unwrap(), vec![0.25, 1.0]);
    }

    #[test]
    fn sidecar_has_version() {
        let mut s = Sidecar::new("cdf");
        s.swept.push("pilots".into());
        s.note("sup", 0.01);
        let v = s.to_json();
        assert_eq!(v["format_version"], FORMAT_VERSION);
        assert_eq!(v["swept"][0], "pilots");
        assert_eq!(
            sidecar_path(Path::new("a/b.csv")),
            PathBuf::from("a/b.json")
        );
    }
}
