//! Deterministic CSV / JSON table emission.

use serde_json::{json, Map, Value};

use super::config::{OutputFormat, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => format_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(x) if x.is_finite() => json!(x),
            Cell::Float(x) => json!(format_f64(*x)),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

/// 17 significant digits, enough for an exact round trip.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// A command's result: columns, rows and trailing summary entries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Cell)>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            ..Table::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn summarize(&mut self, key: impl Into<String>, value: Cell) {
        self.summary.push((key.into(), value));
    }

    /// Value of a summary entry, if present.
    pub fn summary_value(&self, key: &str) -> Option<&Cell> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn render(&self, format: OutputFormat, config: &RunConfig) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(config),
            OutputFormat::Json => self.to_json(config),
        }
    }

    /// Metadata comments, header, rows, then one `# key = value` line per
    /// summary entry. LF line endings.
    pub fn to_csv(&self, config: &RunConfig) -> String {
        let mut out = format!("# fk-cim {VERSION}\n# config: {}\n", config.to_json());
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for (k, v) in &self.summary {
            out.push_str(&format!("# {k} = {}\n", v.csv()));
        }
        out
    }

    /// `{"version", "config", "rows": [{column: value}], "summary": {...}}`.
    pub fn to_json(&self, config: &RunConfig) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(row) {
                    m.insert((*c).to_string(), v.json());
                }
                Value::Object(m)
            })
            .collect();
        let mut summary = Map::new();
        for (k, v) in &self.summary {
            summary.insert(k.clone(), v.json());
        }
        let config_value: Value =
            serde_json::from_str(&config.to_json()).expect("config echo is valid JSON");
        let doc = json!({
            "version": VERSION,
            "config": config_value,
            "rows": rows,
            "summary": summary,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serialises");
        s.push('\n');
        s
    }
}

/// Recovers the configuration echoed in a CSV file's metadata.
pub fn config_from_csv(text: &str) -> Option<String> {
    text.lines()
        .find_map(|l| l.strip_prefix("# config: "))
        .map(str::to_string)
}
