use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::interval_sets::Rational;

/// One table entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Flag(bool),
    Int(i64),
    Real(f64),
    Rational { rational: String },
    Text(String),
    Empty,
}

impl Cell {
    pub fn rational(q: &Rational) -> Cell {
        Cell::Rational { rational: q.to_string() }
    }

    /// Reals that may be infinite are stored as text.
    pub fn real_or_text(x: f64) -> Cell {
        if x.is_finite() {
            Cell::Real(x)
        } else {
            Cell::Text(x.to_string())
        }
    }

    fn number(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Real(x) => Some(*x),
            _ => None,
        }
    }
}

fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_field(c: &Cell) -> String {
    match c {
        Cell::Flag(b) => b.to_string(),
        Cell::Int(i) => i.to_string(),
        Cell::Real(x) => fmt_real(*x),
        Cell::Rational { rational } => rational.clone(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

/// Named columns, ordered rows and a metadata block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub name: String,
    pub metadata: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    Plot,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "plot" => Ok(OutputFormat::Plot),
            _ => Err(Error::InvalidArgument(format!("unknown format {s:?}, expected csv, json or plot"))),
        }
    }
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Plot => "dat",
        }
    }
}

impl ResultTable {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        ResultTable {
            name: name.into(),
            metadata: BTreeMap::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    /// Records the SHA-256 of the JSON form of `config`.
    pub fn set_config<T: Serialize>(&mut self, config: &T) -> Result<()> {
        let json = serde_json::to_string(config)?;
        self.meta("config", json.clone());
        self.meta("config_sha256", config_hash(&json));
        Ok(())
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::InvalidArgument(format!(
                "row of {} cells in a table of {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Cells of one column, top to bottom.
    pub fn values(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.column(name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    /// Numeric values of one column; non-numeric cells are skipped.
    pub fn reals(&self, name: &str) -> Vec<f64> {
        self.values(name).unwrap_or_default().into_iter().filter_map(Cell::number).collect()
    }

    /// `(row, column)` of every `pass_*` cell that is false.
    pub fn failures(&self) -> Vec<(usize, String)> {
        let mut out = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for (name, cell) in self.columns.iter().zip(row) {
                if name.starts_with("pass") && *cell == Cell::Flag(false) {
                    out.push((i, name.clone()));
                }
            }
        }
        out
    }

    pub fn all_pass(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.iter().map(csv_field).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: ResultTable = serde_json::from_str(s)?;
        if let Some(r) = t.rows.iter().find(|r| r.len() != t.columns.len()) {
            return Err(Error::InvalidInput(format!(
                "row of {} cells in a table of {} columns",
                r.len(),
                t.columns.len()
            )));
        }
        Ok(t)
    }

    /// One block per numeric column against the first column, blocks
    /// separated by blank lines.
    pub fn to_plot(&self) -> String {
        let mut s = String::new();
        for (c, name) in self.columns.iter().enumerate().skip(1) {
            let pts: Vec<(f64, f64)> =
                self.rows.iter().filter_map(|r| Some((r[0].number()?, r[c].number()?))).collect();
            if pts.is_empty() {
                continue;
            }
            if !s.is_empty() {
                s.push('\n');
            }
            let _ = writeln!(s, "# {} vs {}", name, self.columns[0]);
            for (x, y) in pts {
                let _ = writeln!(s, "{} {}", fmt_real(x), fmt_real(y));
            }
        }
        s
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        Ok(match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json()?,
            OutputFormat::Plot => self.to_plot(),
        })
    }

    /// Writes `<dir>/<name>.<ext>`; CSV and plot output also get
    /// `<name>.meta.json` with the metadata block.
    pub fn emit(&self, format: OutputFormat, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
        let main = dir.join(format!("{}.{}", self.name, format.extension()));
        write_file(&main, &self.render(format)?)?;
        let mut out = vec![main];
        if format != OutputFormat::Json {
            let meta = dir.join(format!("{}.meta.json", self.name));
            let mut json = serde_json::to_string_pretty(&self.metadata)?;
            json.push('\n');
            write_file(&meta, &json)?;
            out.push(meta);
        }
        Ok(out)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Hex SHA-256 of a string.
pub fn config_hash(s: &str) -> String {
    Sha256::digest(s.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_sets::rational::ratio;

    fn sample() -> ResultTable {
        let mut t = ResultTable::new("sample", &["n", "value", "exact", "note", "pass_ok"]);
        t.meta("statement", "test");
        t.push(vec![
            Cell::Int(1),
            Cell::Real(0.1),
            Cell::rational(&ratio(31, 32)),
            Cell::Text("a, b".into()),
            Cell::Flag(true),
        ])
        .unwrap();
        t.push(vec![Cell::Int(2), Cell::Real(1.0 / 3.0), Cell::Empty, Cell::Text("c".into()), Cell::Flag(false)])
            .unwrap();
        t
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = ResultTable::new("e", &["a", "b"]);
        assert_eq!(t.to_csv(), "a,b\n");
        assert!(t.all_pass());
    }

    #[test]
    fn csv_uses_seventeen_digits() {
        let csv = sample().to_csv();
        let line = csv.lines().nth(1).unwrap();
        assert_eq!(line, "1,1.0000000000000001e-1,31/32,\"a, b\",true");
        let third: f64 = csv.lines().nth(2).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(third, 1.0 / 3.0);
    }

    #[test]
    fn json_round_trip() {
        let t = sample();
        let back = ResultTable::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(back, t);
        let v: serde_json::Value = serde_json::from_str(&t.to_json().unwrap()).unwrap();
        assert_eq!(v["rows"][0][2]["rational"], "31/32");
        assert!(ResultTable::from_json(r#"{"name":"x","metadata":{},"columns":["a"],"rows":[[1,2]]}"#).is_err());
    }

    #[test]
    fn failures_and_plot() {
        let t = sample();
        assert_eq!(t.failures(), vec![(1, "pass_ok".to_string())]);
        let plot = t.to_plot();
        assert!(plot.starts_with("# value vs n\n1.0000000000000000e0 1.0000000000000001e-1\n"));
        assert!(!plot.contains("exact"));
        let mut u = t.clone();
        assert!(u.push(vec![Cell::Empty]).is_err());
    }

    #[test]
    fn emit_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let t = sample();
        let a = t.emit(OutputFormat::Csv, dir.path()).unwrap();
        let first = std::fs::read(&a[0]).unwrap();
        t.emit(OutputFormat::Csv, dir.path()).unwrap();
        assert_eq!(std::fs::read(&a[0]).unwrap(), first);
        assert_eq!(a.len(), 2);
        assert!(OutputFormat::from_str("xml").is_err());
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(config_hash("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
