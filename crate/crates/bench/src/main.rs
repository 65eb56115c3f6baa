use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use nlabs::{Precision, SolverConfig, TolMode, VariantSpec};
use nlabs_bench::{
    compare_reference, emit_table, reference_grid, run_matrix, ExperimentSpec, ReferenceFixture, ResultRow,
    TableFormat, DEFAULT_ITER_TOLERANCE,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Huang1,
    ModHuang1,
    Huang2,
    ModHuang2,
    Ilu,
}

impl From<MethodArg> for VariantSpec {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Huang1 => VariantSpec::HUANG1,
            MethodArg::ModHuang1 => VariantSpec::MOD_HUANG1,
            MethodArg::Huang2 => VariantSpec::HUANG2,
            MethodArg::ModHuang2 => VariantSpec::MOD_HUANG2,
            MethodArg::Ilu => VariantSpec::IMPLICIT_LU,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PrecisionArg {
    #[value(name = "32")]
    P32,
    #[value(name = "64")]
    P64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TolModeArg {
    Abs,
    Row,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Markdown,
    Csv,
}

/// Run nonlinear ABS solvers on the standard test problems.
#[derive(Debug, Parser)]
#[command(name = "nlabs-bench", version)]
struct Cli {
    /// rosenbrock, powell, brown or schubert
    #[arg(long, required_unless_present_any = ["grid", "check"])]
    problem: Option<String>,
    /// Dimension; defaults to the problem's smallest table size
    #[arg(long)]
    n: Option<usize>,
    /// Start point is `scale * x0`
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long, value_enum, default_value = "mod-huang1")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "off")]
    line_search: Switch,
    #[arg(long, value_enum, default_value = "64")]
    precision: PrecisionArg,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    ns: Option<usize>,
    #[arg(long)]
    ndiv: Option<usize>,
    #[arg(long)]
    itmax: Option<usize>,
    #[arg(long)]
    nhalf: Option<usize>,
    #[arg(long, value_enum)]
    tol_mode: Option<TolModeArg>,
    #[arg(long, value_enum, default_value = "markdown")]
    format: FormatArg,
    /// Run the full reference grid
    #[arg(long)]
    grid: bool,
    /// Run the grid and diff against the reference fixture; nonzero exit on failure
    #[arg(long)]
    check: bool,
    /// Fixture file for --check (defaults to the shipped double-precision tables)
    #[arg(long)]
    fixture: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_ITER_TOLERANCE)]
    iter_tolerance: usize,
}

impl Cli {
    fn config(&self) -> SolverConfig {
        let precision = match self.precision {
            PrecisionArg::P32 => Precision::Bits32,
            PrecisionArg::P64 => Precision::Bits64,
        };
        let mut c = SolverConfig::for_precision(precision);
        c.eps = self.eps.unwrap_or(c.eps);
        c.t = self.t.unwrap_or(c.t);
        c.tol = self.tol.unwrap_or(c.tol);
        c.n_s = self.ns.unwrap_or(c.n_s);
        c.n_div = self.ndiv.unwrap_or(c.n_div);
        c.itmax = self.itmax.unwrap_or(c.itmax);
        c.n_half = self.nhalf.unwrap_or(c.n_half);
        if let Some(m) = self.tol_mode {
            c.tol_mode = match m {
                TolModeArg::Abs => TolMode::Absolute,
                TolModeArg::Row => TolMode::RowScaled,
            };
        }
        c
    }

    fn format(&self) -> TableFormat {
        match self.format {
            FormatArg::Markdown => TableFormat::Markdown,
            FormatArg::Csv => TableFormat::Csv,
        }
    }
}

fn default_n(problem: &str) -> usize {
    match problem {
        "rosenbrock" => 2,
        "schubert" => 10,
        _ => 4,
    }
}

fn collect(specs: &[ExperimentSpec]) -> (Vec<ResultRow>, usize) {
    let mut rows = Vec::new();
    let mut errors = 0;
    for (spec, out) in specs.iter().zip(run_matrix(specs)) {
        match out {
            Ok(r) => rows.push(r),
            Err(e) => {
                eprintln!("{} n={} scale={} {}: {e}", spec.problem, spec.n, spec.scale, spec.variant.label());
                errors += 1;
            }
        }
    }
    (rows, errors)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = cli.config();

    if cli.check {
        let fixture = match &cli.fixture {
            None => ReferenceFixture::double_precision(),
            Some(path) => match std::fs::read_to_string(path)
                .map_err(|e| e.to_string())
                .and_then(|t| ReferenceFixture::parse(&t).map_err(|e| e.to_string()))
            {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("{}: {e}", path.display());
                    return ExitCode::from(2);
                }
            },
        };
        let (rows, _) = collect(&reference_grid(&config));
        let report = compare_reference(&rows, &fixture, cli.iter_tolerance);
        print!("{}", report.render());
        return if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE };
    }

    let specs = if cli.grid {
        reference_grid(&config)
    } else {
        let problem = cli.problem.clone().expect("clap enforces --problem");
        let n = cli.n.unwrap_or_else(|| default_n(&problem));
        vec![ExperimentSpec::new(&problem, n, cli.scale, cli.method.into(), cli.line_search == Switch::On)
            .with_config(config)]
    };
    let (rows, errors) = collect(&specs);
    print!("{}", emit_table(&rows, cli.format()));
    if errors == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
