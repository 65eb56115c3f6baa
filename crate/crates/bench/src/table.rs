//! Result tables: paper-style markdown and a flat csv that parses back.

use std::fmt::Write as _;

use nlabs::StopStatus;

use crate::experiment::{parse_variant, scale_label, ResultRow};
use crate::BenchError;

pub const CSV_HEADER: [&str; 10] = [
    "function",
    "n",
    "scale",
    "method",
    "line_search",
    "best_residual",
    "best_iteration",
    "total_iterations",
    "status",
    "time_seconds",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableFormat {
    #[default]
    Markdown,
    Csv,
}

/// Two significant digits in e-notation, e.g. `2.2e-16`.
pub fn format_residual(v: f64) -> String {
    format!("{v:.1e}")
}

pub fn emit_table(rows: &[ResultRow], format: TableFormat) -> String {
    match format {
        TableFormat::Markdown => emit_markdown(rows),
        TableFormat::Csv => emit_csv(rows),
    }
}

/// Rows sharing a problem, dimension and start are grouped: the first row of
/// a group names the function, the second names the start.
fn emit_markdown(rows: &[ResultRow]) -> String {
    let mut out = String::new();
    out.push_str("| function | method | ‖F‖∞ | it_best | it | flag | time |\n");
    out.push_str("|---|---|---:|---:|---:|---|---:|\n");
    let same_group = |a: &ResultRow, b: &ResultRow| {
        a.problem == b.problem && a.n == b.n && a.scale == b.scale
    };
    let mut i = 0;
    while i < rows.len() {
        let mut j = i + 1;
        while j < rows.len() && same_group(&rows[i], &rows[j]) {
            j += 1;
        }
        for (pos, row) in rows[i..j].iter().enumerate() {
            let cell = match (pos, j - i) {
                (0, 1) => format!("{}, {}", row.function_label(), scale_label(row.scale)),
                (0, _) => row.function_label(),
                (1, _) => scale_label(row.scale),
                _ => String::new(),
            };
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {:.3} |",
                cell,
                row.method_label(),
                format_residual(row.best_residual),
                row.best_iteration,
                row.total_iterations,
                row.flag(),
                row.time_seconds,
            );
        }
        i = j;
    }
    out
}

fn emit_csv(rows: &[ResultRow]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for row in rows {
        w.write_record([
            row.problem.clone(),
            row.n.to_string(),
            row.scale.to_string(),
            row.variant.label().to_string(),
            if row.line_search { "on" } else { "off" }.to_string(),
            format!("{:e}", row.best_residual),
            row.best_iteration.to_string(),
            row.total_iterations.to_string(),
            row.flag().to_string(),
            format!("{:.6}", row.time_seconds),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>, BenchError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| BenchError::Parse(e.to_string()))?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(BenchError::Parse(format!("unexpected csv header {header:?}")));
    }
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let rec = record.map_err(|e| BenchError::Parse(e.to_string()))?;
        let bad = |field: &str| BenchError::Parse(format!("record {}: bad {field}", line + 1));
        let num = |i: usize, field: &str| rec[i].parse::<usize>().map_err(|_| bad(field));
        let real = |i: usize, field: &str| rec[i].parse::<f64>().map_err(|_| bad(field));
        rows.push(ResultRow {
            problem: rec[0].to_string(),
            n: num(1, "n")?,
            scale: real(2, "scale")?,
            variant: parse_variant(&rec[3]).ok_or_else(|| bad("method"))?,
            line_search: match &rec[4] {
                "on" => true,
                "off" => false,
                _ => return Err(bad("line_search")),
            },
            best_residual: real(5, "best_residual")?,
            best_iteration: num(6, "best_iteration")?,
            total_iterations: num(7, "total_iterations")?,
            status: StopStatus::from_flag(&rec[8]).ok_or_else(|| bad("status"))?,
            time_seconds: real(9, "time_seconds")?,
        });
    }
    Ok(rows)
}
