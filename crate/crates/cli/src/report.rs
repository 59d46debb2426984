//! Structured self-describing text reports and CSV tables.
//!
//! Everything is a deterministic function of the resolved config, so a fixed
//! seed reproduces byte-identical files. No timestamps.

use anyhow::Result;
use std::fmt::Write as _;
use std::path::Path;

pub struct Report {
    title: String,
    sections: Vec<(String, Vec<(String, String)>)>,
}

impl Report {
    pub fn new(title: &str) -> Self {
        Report {
            title: title.to_string(),
            sections: Vec::new(),
        }
    }

    pub fn section(&mut self, name: &str) -> &mut Vec<(String, String)> {
        self.sections.push((name.to_string(), Vec::new()));
        &mut self.sections.last_mut().unwrap().1
    }

    pub fn push_kv(entries: &mut Vec<(String, String)>, key: &str, value: String) {
        entries.push((key.to_string(), value));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# pfbind report: {}", self.title);
        for (name, entries) in &self.sections {
            let _ = writeln!(out, "\n[{name}]");
            for (k, v) in entries {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }

    pub fn write(&self, dir: &Path, file: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(file), self.render())?;
        Ok(())
    }
}

/// Fixed-width scientific notation keeps report diffs stable.
pub fn fnum(x: f64) -> String {
    format!("{x:.17e}")
}

pub fn write_csv(dir: &Path, file: &str, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| fnum(*x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(dir.join(file), out)?;
    Ok(())
}
