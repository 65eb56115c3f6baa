//! Reference fixtures and the comparison of result rows against them.
//!
//! The fixture format is documented in the header of
//! `fixtures/double_precision.txt`. Each line is one table row:
//!
//! ```text
//! gate  problem n scale method line_search it status residual paper_residual paper_best_it | label
//! ```

use std::fmt::Write as _;

use nlabs::{StopStatus, VariantSpec};

use crate::experiment::{parse_variant, variant_cli_name, ResultRow};
use crate::BenchError;

const DOUBLE_PRECISION: &str = include_str!("../fixtures/double_precision.txt");

pub const DEFAULT_ITER_TOLERANCE: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceKey {
    pub problem: String,
    pub n: usize,
    pub scale: f64,
    pub variant: VariantSpec,
    pub line_search: bool,
}

impl ReferenceKey {
    pub fn matches(&self, row: &ResultRow) -> bool {
        self.problem == row.problem
            && self.n == row.n
            && self.scale == row.scale
            && self.variant == row.variant
            && self.line_search == row.line_search
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IterSpec {
    Any,
    /// `|it - expected| <= tol`, falling back to the comparison's tolerance.
    Near { expected: usize, tol: Option<usize> },
    AtMost(usize),
}

impl IterSpec {
    fn check(&self, it: usize, default_tol: usize) -> bool {
        match *self {
            Self::Any => true,
            Self::Near { expected, tol } => it.abs_diff(expected) <= tol.unwrap_or(default_tol),
            Self::AtMost(m) => it <= m,
        }
    }

    fn parse(s: &str) -> Option<Self> {
        if s == "*" {
            return Some(Self::Any);
        }
        if let Some(m) = s.strip_prefix("<=") {
            return m.parse().ok().map(Self::AtMost);
        }
        match s.split_once('±') {
            Some((e, t)) => Some(Self::Near { expected: e.parse().ok()?, tol: Some(t.parse().ok()?) }),
            None => Some(Self::Near { expected: s.parse().ok()?, tol: None }),
        }
    }

    fn render(&self) -> String {
        match *self {
            Self::Any => "*".into(),
            Self::Near { expected, tol: Some(t) } => format!("{expected}±{t}"),
            Self::Near { expected, tol: None } => expected.to_string(),
            Self::AtMost(m) => format!("<={m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatusMatch {
    Any,
    Exact(StopStatus),
    /// Table `(div)`: divergence, or the iteration limit was reached.
    DivergenceLike,
    NotConverged,
}

impl StatusMatch {
    pub fn check(&self, s: StopStatus) -> bool {
        match self {
            Self::Any => true,
            Self::Exact(e) => *e == s,
            Self::DivergenceLike => matches!(s, StopStatus::Divergence | StopStatus::MaxIter),
            Self::NotConverged => s != StopStatus::Converged,
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "*" => Self::Any,
            "-" => Self::Exact(StopStatus::Converged),
            "(div)" => Self::DivergenceLike,
            "fail" => Self::NotConverged,
            other => Self::Exact(StopStatus::from_flag(other).filter(|s| *s != StopStatus::Divergence)?),
        })
    }

    fn render(&self) -> &'static str {
        match self {
            Self::Any => "*",
            Self::Exact(StopStatus::Converged) => "-",
            Self::Exact(s) => s.flag(),
            Self::DivergenceLike => "(div)",
            Self::NotConverged => "fail",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResidualBound {
    Any,
    AtMost(f64),
    AtLeast(f64),
}

impl ResidualBound {
    pub fn check(&self, r: f64) -> bool {
        match *self {
            Self::Any => true,
            Self::AtMost(b) => r <= b,
            Self::AtLeast(b) => r >= b,
        }
    }

    fn parse(s: &str) -> Option<Self> {
        if s == "*" {
            Some(Self::Any)
        } else if let Some(b) = s.strip_prefix("<=") {
            b.parse().ok().map(Self::AtMost)
        } else if let Some(b) = s.strip_prefix(">=") {
            b.parse().ok().map(Self::AtLeast)
        } else {
            None
        }
    }

    fn render(&self) -> String {
        match *self {
            Self::Any => "*".into(),
            Self::AtMost(b) => format!("<={b:e}"),
            Self::AtLeast(b) => format!(">={b:e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceEntry {
    pub key: ReferenceKey,
    /// Gated entries decide the overall verdict; the rest are reported only.
    pub gate: bool,
    pub iterations: IterSpec,
    pub status: StatusMatch,
    pub residual: ResidualBound,
    pub paper_residual: f64,
    pub paper_best_iteration: usize,
    pub label: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReferenceFixture {
    entries: Vec<ReferenceEntry>,
}

impl ReferenceFixture {
    /// The shipped double-precision tables.
    pub fn double_precision() -> Self {
        Self::parse(DOUBLE_PRECISION).expect("shipped fixture parses")
    }

    pub fn entries(&self) -> &[ReferenceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let mut entries = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |what: &str| BenchError::Parse(format!("fixture line {}: bad {what}", no + 1));
            let (fields, label) = line.split_once('|').ok_or_else(|| bad("label separator"))?;
            let f: Vec<&str> = fields.split_whitespace().collect();
            if f.len() != 11 {
                return Err(bad("field count"));
            }
            entries.push(ReferenceEntry {
                gate: match f[0] {
                    "gate" => true,
                    "info" => false,
                    _ => return Err(bad("gate")),
                },
                key: ReferenceKey {
                    problem: f[1].to_string(),
                    n: f[2].parse().map_err(|_| bad("n"))?,
                    scale: f[3].parse().map_err(|_| bad("scale"))?,
                    variant: parse_variant(f[4]).ok_or_else(|| bad("method"))?,
                    line_search: match f[5] {
                        "on" => true,
                        "off" => false,
                        _ => return Err(bad("line_search")),
                    },
                },
                iterations: IterSpec::parse(f[6]).ok_or_else(|| bad("it"))?,
                status: StatusMatch::parse(f[7]).ok_or_else(|| bad("status"))?,
                residual: ResidualBound::parse(f[8]).ok_or_else(|| bad("residual"))?,
                paper_residual: f[9].parse().map_err(|_| bad("paper_residual"))?,
                paper_best_iteration: f[10].parse().map_err(|_| bad("paper_best_it"))?,
                label: label.trim().to_string(),
            });
        }
        Ok(Self { entries })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let k = &e.key;
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {} {} {} {:e} {} | {}",
                if e.gate { "gate" } else { "info" },
                k.problem,
                k.n,
                k.scale,
                variant_cli_name(k.variant),
                if k.line_search { "on" } else { "off" },
                e.iterations.render(),
                e.status.render(),
                e.residual.render(),
                e.paper_residual,
                e.paper_best_iteration,
                e.label,
            );
        }
        out
    }

    /// A fully gated fixture that pins each row to its own outcome.
    pub fn from_rows(rows: &[ResultRow]) -> Self {
        let entries = rows
            .iter()
            .map(|r| ReferenceEntry {
                key: ReferenceKey {
                    problem: r.problem.clone(),
                    n: r.n,
                    scale: r.scale,
                    variant: r.variant,
                    line_search: r.line_search,
                },
                gate: true,
                iterations: IterSpec::Near { expected: r.total_iterations, tol: None },
                status: StatusMatch::Exact(r.status),
                residual: if r.best_residual.is_nan() {
                    ResidualBound::Any
                } else {
                    ResidualBound::AtMost(r.best_residual)
                },
                paper_residual: r.best_residual,
                paper_best_iteration: r.best_iteration,
                label: format!("{} | {} | {}", r.function_label(), crate::scale_label(r.scale), r.method_label()),
            })
            .collect();
        Self { entries }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonEntry {
    pub entry: ReferenceEntry,
    pub observed: Option<ResultRow>,
    pub failures: Vec<String>,
}

impl ComparisonEntry {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub entries: Vec<ComparisonEntry>,
}

impl ComparisonReport {
    /// True when every gated entry passed.
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| !e.entry.gate || e.passed())
    }

    pub fn gate_failures(&self) -> impl Iterator<Item = &ComparisonEntry> {
        self.entries.iter().filter(|e| e.entry.gate && !e.passed())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let verdict = match (e.passed(), e.entry.gate) {
                (true, _) => "PASS",
                (false, true) => "FAIL",
                (false, false) => "DIFF",
            };
            let kind = if e.entry.gate { "gate" } else { "info" };
            let _ = write!(out, "{verdict} [{kind}] {}", e.entry.label);
            if let Some(r) = &e.observed {
                let _ = write!(
                    out,
                    ": it={} flag='{}' best={:.2e} (paper it_best={} best={:.2e})",
                    r.total_iterations,
                    r.flag(),
                    r.best_residual,
                    e.entry.paper_best_iteration,
                    e.entry.paper_residual,
                );
            }
            for f in &e.failures {
                let _ = write!(out, "\n    {f}");
            }
            out.push('\n');
        }
        let gated = self.entries.iter().filter(|e| e.entry.gate).count();
        let failed = self.gate_failures().count();
        let diffs = self.entries.iter().filter(|e| !e.entry.gate && !e.passed()).count();
        let _ = writeln!(out, "{} of {gated} gated rows passed; {diffs} informational rows differ", gated - failed);
        out
    }
}

/// Matches each fixture entry to the first row with the same key.
pub fn compare_reference(rows: &[ResultRow], fixture: &ReferenceFixture, iter_tolerance: usize) -> ComparisonReport {
    let entries = fixture
        .entries()
        .iter()
        .map(|entry| {
            let observed = rows.iter().find(|r| entry.key.matches(r)).cloned();
            let mut failures = Vec::new();
            match &observed {
                None => failures.push("no result row for this entry".to_string()),
                Some(r) => {
                    if !entry.iterations.check(r.total_iterations, iter_tolerance) {
                        let want = match entry.iterations {
                            IterSpec::Near { expected, tol: None } => format!("{expected}±{iter_tolerance}"),
                            other => other.render(),
                        };
                        failures.push(format!("iterations: expected {want}, got {}", r.total_iterations));
                    }
                    if !entry.status.check(r.status) {
                        failures.push(format!(
                            "status: expected {}, got '{}'",
                            entry.status.render(),
                            r.flag()
                        ));
                    }
                    if !entry.residual.check(r.best_residual) {
                        failures.push(format!(
                            "best residual: expected {}, got {:e}",
                            entry.residual.render(),
                            r.best_residual
                        ));
                    }
                }
            }
            ComparisonEntry { entry: entry.clone(), observed, failures }
        })
        .collect();
    ComparisonReport { entries }
}
