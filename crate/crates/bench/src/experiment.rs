//! Experiment specifications, result rows and the grid runner.

use std::time::Instant;

use rayon::prelude::*;

use nlabs::{solve_in_precision, Problem, SolverConfig, StopStatus, VariantSpec};

use crate::reference::ReferenceFixture;
use crate::BenchError;

/// The five routines, in CLI spelling.
pub const METHODS: [(&str, VariantSpec); 5] = [
    ("huang1", VariantSpec::HUANG1),
    ("mod-huang1", VariantSpec::MOD_HUANG1),
    ("huang2", VariantSpec::HUANG2),
    ("mod-huang2", VariantSpec::MOD_HUANG2),
    ("ilu", VariantSpec::IMPLICIT_LU),
];

/// Accepts either the CLI spelling (`mod-huang1`) or the table label (`mod.huang1`).
pub fn parse_variant(name: &str) -> Option<VariantSpec> {
    METHODS
        .iter()
        .find(|(cli, v)| *cli == name || v.label() == name)
        .map(|(_, v)| *v)
}

pub fn variant_cli_name(variant: VariantSpec) -> &'static str {
    METHODS
        .iter()
        .find(|(_, v)| *v == variant)
        .map(|(cli, _)| *cli)
        .unwrap_or("ilu")
}

/// Start label in table style: `x0`, `1.1x0`, `100x0`.
pub fn scale_label(scale: f64) -> String {
    if scale == 1.0 {
        "x0".to_string()
    } else {
        format!("{scale}x0")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub problem: String,
    pub n: usize,
    pub scale: f64,
    pub variant: VariantSpec,
    pub line_search: bool,
    /// Base configuration; `line_search` above overrides `config.line_search`.
    pub config: SolverConfig,
}

impl ExperimentSpec {
    pub fn new(problem: &str, n: usize, scale: f64, variant: VariantSpec, line_search: bool) -> Self {
        Self {
            problem: problem.to_string(),
            n,
            scale,
            variant,
            line_search,
            config: SolverConfig::double_precision(),
        }
    }

    pub fn with_config(mut self, config: SolverConfig) -> Self {
        self.config = config;
        self
    }

    pub fn run(&self) -> Result<ResultRow, BenchError> {
        let problem = Problem::by_name(&self.problem, self.n)?;
        if !self.scale.is_finite() {
            return Err(BenchError::InvalidSpec(format!("start scale {} is not finite", self.scale)));
        }
        let config = self.config.clone().with_line_search(self.line_search);
        let x0 = problem.scale_start::<f64>(self.scale);

        let started = Instant::now();
        let report = solve_in_precision(&problem, &x0, self.variant, &config)?;
        let time_seconds = started.elapsed().as_secs_f64();

        Ok(ResultRow {
            problem: problem.name().to_string(),
            n: problem.n(),
            scale: self.scale,
            variant: self.variant,
            line_search: self.line_search,
            best_residual: report.best_residual,
            best_iteration: report.best_iteration,
            total_iterations: report.total_iterations,
            status: report.status,
            time_seconds,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    /// Short problem name as accepted by [`Problem::by_name`].
    pub problem: String,
    pub n: usize,
    pub scale: f64,
    pub variant: VariantSpec,
    pub line_search: bool,
    pub best_residual: f64,
    pub best_iteration: usize,
    pub total_iterations: usize,
    pub status: StopStatus,
    pub time_seconds: f64,
}

impl ResultRow {
    /// `Brown almost linear n=4`
    pub fn function_label(&self) -> String {
        Problem::by_name(&self.problem, self.n)
            .map(|p| p.to_string())
            .unwrap_or_else(|_| format!("{} n={}", self.problem, self.n))
    }

    /// `mod.huang1`, or `mod.huang1 line search`.
    pub fn method_label(&self) -> String {
        if self.line_search {
            format!("{} line search", self.variant.label())
        } else {
            self.variant.label().to_string()
        }
    }

    pub fn flag(&self) -> &'static str {
        self.status.flag()
    }
}

/// Runs every spec, possibly in parallel; output order follows `specs`.
pub fn run_matrix(specs: &[ExperimentSpec]) -> Vec<Result<ResultRow, BenchError>> {
    specs.par_iter().map(ExperimentSpec::run).collect()
}

/// Every row of the double-precision reference tables, plus the full
/// Schubert-Broyden `n x scale` product.
pub fn reference_grid(config: &SolverConfig) -> Vec<ExperimentSpec> {
    let mut specs: Vec<ExperimentSpec> = ReferenceFixture::double_precision()
        .entries()
        .iter()
        .map(|e| {
            let k = &e.key;
            ExperimentSpec::new(&k.problem, k.n, k.scale, k.variant, k.line_search)
        })
        .collect();
    for n in [10, 50, 100] {
        for scale in [1.0, 10.0, 100.0] {
            for variant in [VariantSpec::MOD_HUANG1, VariantSpec::MOD_HUANG2, VariantSpec::IMPLICIT_LU] {
                let spec = ExperimentSpec::new("schubert", n, scale, variant, false);
                if !specs.contains(&spec) {
                    specs.push(spec);
                }
            }
        }
    }
    specs.into_iter().map(|s| s.with_config(config.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names_round_trip() {
        for (cli, v) in METHODS {
            assert_eq!(parse_variant(cli), Some(v));
            assert_eq!(parse_variant(v.label()), Some(v));
            assert_eq!(variant_cli_name(v), cli);
        }
        assert_eq!(parse_variant("newton"), None);
    }

    #[test]
    fn scale_labels() {
        assert_eq!(scale_label(1.0), "x0");
        assert_eq!(scale_label(1.1), "1.1x0");
        assert_eq!(scale_label(100.0), "100x0");
    }

    #[test]
    fn empty_grid_gives_empty_output() {
        assert!(run_matrix(&[]).is_empty());
    }

    #[test]
    fn rosenbrock_mod_huang2_single_iteration() {
        let row = ExperimentSpec::new("rosenbrock", 2, 1.0, VariantSpec::MOD_HUANG2, false)
            .run()
            .unwrap();
        assert_eq!(row.total_iterations, 1);
        assert_eq!(row.flag(), "");
        assert_eq!(row.function_label(), "Rosenbrock n=2");
        assert_eq!(row.method_label(), "mod.huang2");
    }

    #[test]
    fn invalid_spec_is_reported_per_row() {
        let specs = vec![
            ExperimentSpec::new("rosenbrock", 3, 1.0, VariantSpec::MOD_HUANG1, false),
            ExperimentSpec::new("rosenbrock", 2, 1.0, VariantSpec::MOD_HUANG1, false),
            ExperimentSpec::new("trigonometric", 4, 1.0, VariantSpec::MOD_HUANG1, false),
        ];
        let out = run_matrix(&specs);
        assert!(matches!(out[0], Err(BenchError::Problem(_))));
        assert_eq!(out[1].as_ref().unwrap().total_iterations, 1);
        assert!(matches!(out[2], Err(BenchError::Problem(_))));
    }

    #[test]
    fn invalid_config_is_reported_per_row() {
        let mut config = SolverConfig::double_precision();
        config.t = -1.0;
        let spec = ExperimentSpec::new("powell", 4, 1.0, VariantSpec::IMPLICIT_LU, false)
            .with_config(config);
        assert!(matches!(spec.run(), Err(BenchError::Solve(_))));
    }

    #[test]
    fn default_grid_covers_schubert_product() {
        let grid = reference_grid(&SolverConfig::double_precision());
        for n in [10, 50, 100] {
            for scale in [1.0, 10.0, 100.0] {
                assert!(grid.iter().any(|s| s.problem == "schubert" && s.n == n && s.scale == scale));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for s in &grid {
            let key = (s.problem.clone(), s.n, s.scale.to_bits(), s.variant, s.line_search);
            assert!(seen.insert(key), "duplicate grid cell {s:?}");
        }
    }
}
