//! Plot-ready dataset container with deterministic CSV and JSON writers.
//!
//! Both encoders print numbers from the same 12-significant-digit
//! formatting pass, so the two formats parse back to identical values
//! and repeated runs are byte-identical.

use crate::config::OutputFormat;
use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Str(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Dataset {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, format: OutputFormat, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            OutputFormat::Csv => self.write_csv(out),
            OutputFormat::Json => self.write_json(out),
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "{}", self.columns.iter().map(|c| csv_quote(c)).collect::<Vec<_>>().join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row
                .iter()
                .map(|cell| match cell {
                    Cell::Num(v) => format_sig12(*v),
                    Cell::Int(v) => v.to_string(),
                    Cell::Str(s) => csv_quote(s),
                })
                .collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    fn write_json(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "[")?;
        for (i, row) in self.rows.iter().enumerate() {
            let fields: Vec<String> = self
                .columns
                .iter()
                .zip(row)
                .map(|(name, cell)| {
                    let value = match cell {
                        Cell::Num(v) => format_sig12(*v),
                        Cell::Int(v) => v.to_string(),
                        Cell::Str(s) => json_quote(s),
                    };
                    format!("{}: {}", json_quote(name), value)
                })
                .collect();
            let comma = if i + 1 < self.rows.len() { "," } else { "" };
            writeln!(out, "  {{{}}}{comma}", fields.join(", "))?;
        }
        writeln!(out, "]")?;
        Ok(())
    }
}

/// 12 significant digits, scientific notation; −0 normalized to 0.
/// The output is a valid JSON number and an unquoted CSV field.
pub fn format_sig12(v: f64) -> String {
    if v == 0.0 {
        return "0.00000000000e0".to_string();
    }
    if !v.is_finite() {
        // Not expected in datasets; keep output parseable.
        return if v.is_nan() { "\"nan\"".to_string() } else { format!("\"{v}\"") };
    }
    format!("{v:.11e}")
}

fn csv_quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn json_quote(s: &str) -> String {
    let mut quoted = String::with_capacity(s.len() + 2);
    quoted.push('"');
    for ch in s.chars() {
        match ch {
            '"' => quoted.push_str("\\\""),
            '\\' => quoted.push_str("\\\\"),
            '\n' => quoted.push_str("\\n"),
            c if (c as u32) < 0x20 => quoted.push_str(&format!("\\u{:04x}", c as u32)),
            c => quoted.push(c),
        }
    }
    quoted.push('"');
    quoted
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render(ds: &Dataset, fmt: OutputFormat) -> String {
        let mut buf = Vec::new();
        ds.write(fmt, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_dataset_is_header_only_csv() {
        let ds = Dataset::new(vec!["a", "b"]);
        assert_eq!(render(&ds, OutputFormat::Csv), "a,b\n");
    }

    #[test]
    fn one_row_is_two_lines() {
        let mut ds = Dataset::new(vec!["x", "label"]);
        ds.push(vec![Cell::Num(1.5), Cell::Str("band".into())]);
        let text = render(&ds, OutputFormat::Csv);
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("1.50000000000e0"));
    }

    #[test]
    fn csv_and_json_parse_back_equal() {
        let mut ds = Dataset::new(vec!["x", "y"]);
        ds.push(vec![Cell::Num(std::f64::consts::PI.powi(4)), Cell::Num(-1.0 / 3.0)]);
        let csv = render(&ds, OutputFormat::Csv);
        let json = render(&ds, OutputFormat::Json);
        let csv_vals: Vec<f64> =
            csv.lines().nth(1).unwrap().split(',').map(|t| t.parse().unwrap()).collect();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        let obj = &parsed.as_array().unwrap()[0];
        assert_eq!(csv_vals[0], obj["x"].as_f64().unwrap());
        assert_eq!(csv_vals[1], obj["y"].as_f64().unwrap());
    }

    #[test]
    fn formatting_is_sign_normalized() {
        assert_eq!(format_sig12(-0.0), "0.00000000000e0");
        assert_eq!(format_sig12(97.40909103400243), "9.74090910340e1");
    }
}
