//! CSV writing with `#`-prefixed metadata comment lines. Bodies are
//! deterministic for a fixed config and seed; wall-clock timestamps only ever
//! appear in comments.

use std::io::Write;
use std::path::Path;

pub struct CsvFile {
    comments: Vec<(String, String)>,
    header: String,
    rows: Vec<String>,
}

impl CsvFile {
    pub fn new(header: &str) -> Self {
        Self { comments: Vec::new(), header: header.to_string(), rows: Vec::new() }
    }

    pub fn comment(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.comments.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, fields: &[f64]) {
        let mut line = String::new();
        for (i, x) in fields.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format_field(*x));
        }
        self.rows.push(line);
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for (k, v) in &self.comments {
            writeln!(f, "# {k}: {v}")?;
        }
        writeln!(f, "{}", self.header)?;
        for row in &self.rows {
            writeln!(f, "{row}")?;
        }
        f.flush()
    }
}

/// Full-precision, locale-independent float formatting; round-trippable.
fn format_field(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// SystemTime as unix seconds for comment lines.
pub fn unix_seconds(t: std::time::SystemTime) -> u64 {
    t.duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}
