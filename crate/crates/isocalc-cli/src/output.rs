//! Report rendering. Every command builds one table of preformatted cell
//! strings; the three encodings reuse those strings untouched, so text,
//! CSV, and JSON always carry identical numeric values.

use serde_json::json;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// Cells that are markers rather than numbers; never decorated.
pub const EMPTY_MARK: &str = "-";
pub const DOMAIN_MARK: &str = "domain-error";

/// One command's output: echoed inputs plus a rectangular table.
/// `generated` and `wall_ms` stay `None` under `--no-timestamp` so output
/// bytes are reproducible.
pub struct Report {
    pub command: String,
    pub inputs: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    /// Columns holding truncated decimals; their text cells get a
    /// trailing ellipsis.
    pub truncated: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub generated: Option<String>,
    pub wall_ms: Option<String>,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.render_text(),
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    /// A truncated decimal gets the ellipsis; markers and exact integers
    /// do not.
    fn ellipsis(&self, col: usize, cell: &str) -> bool {
        self.truncated.contains(&self.columns[col]) && cell.contains('.')
    }

    fn header_lines(&self, out: &mut String, lead: &str) {
        out.push_str(&format!("{lead} command = {}\n", self.command));
        for (name, value) in &self.inputs {
            out.push_str(&format!("{lead} {name} = {value}\n"));
        }
        if let Some(ts) = &self.generated {
            out.push_str(&format!("{lead} generated = {ts}\n"));
        }
        if let Some(ms) = &self.wall_ms {
            out.push_str(&format!("{lead} wall_ms = {ms}\n"));
        }
    }

    fn render_text(&self) -> String {
        let display = |col: usize, cell: &str| {
            if self.ellipsis(col, cell) {
                format!("{cell}\u{2026}")
            } else {
                cell.to_string()
            }
        };
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(display(i, cell).chars().count());
            }
        }
        let mut out = String::new();
        self.header_lines(&mut out, "#");
        let mut line = String::new();
        for (i, col) in self.columns.iter().enumerate() {
            line.push_str(&pad(col, widths[i]));
        }
        out.push_str(line.trim_end());
        out.push('\n');
        for row in &self.rows {
            let mut line = String::new();
            for (i, cell) in row.iter().enumerate() {
                line.push_str(&pad(&display(i, cell), widths[i]));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        self.header_lines(&mut out, "#");
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            debug_assert!(row.iter().all(|c| !c.contains(',') && !c.contains('\n')));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let inputs: Vec<_> = self
            .inputs
            .iter()
            .map(|(name, value)| json!({ "name": name, "value": value }))
            .collect();
        let mut doc = json!({
            "command": self.command,
            "inputs": inputs,
            "columns": self.columns,
            "rows": self.rows,
        });
        if let Some(ts) = &self.generated {
            doc["generated"] = json!(ts);
        }
        if let Some(ms) = &self.wall_ms {
            doc["wall_ms"] = json!(ms);
        }
        let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
        out.push('\n');
        out
    }
}

fn pad(cell: &str, width: usize) -> String {
    let len = cell.chars().count();
    format!("{cell}{}", " ".repeat(width - len + 2))
}
