//! Exit criteria, one test per criterion. Each test writes a single
//! `criterion N: PASS|FAIL ...` line straight to stdout so the verdicts show
//! up in the run log whether or not output capture is on.

mod common;

use std::io::Write;
use std::process::Command;

use nlabs::{
    fd_jacobian_row, major_iteration, solve, Problem, RowOracle, SolverConfig, StopStatus, Sweep, VariantSpec, Vector,
};
use nlabs_bench::{newton_reference_solve, run_matrix, ExperimentSpec, ResultRow, METHODS};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{options, random_point, random_system, rel_diff, SEED};

const REFERENCE: [VariantSpec; 3] = [VariantSpec::MOD_HUANG1, VariantSpec::MOD_HUANG2, VariantSpec::IMPLICIT_LU];
const SCALES: [f64; 4] = [1.0, 1.1, 10.0, 100.0];

fn verdict(id: u32, failures: &[String], summary: &str) {
    let line = if failures.is_empty() {
        format!("criterion {id}: PASS {summary}\n")
    } else {
        let mut s = format!("criterion {id}: FAIL {summary} ({} failing checks)\n", failures.len());
        for f in failures {
            s.push_str(&format!("    {f}\n"));
        }
        s
    };
    std::io::stdout().lock().write_all(line.as_bytes()).unwrap();
    assert!(failures.is_empty(), "criterion {id} failed:\n{}", failures.join("\n"));
}

fn run(problem: &str, n: usize, scale: f64, variant: VariantSpec, line_search: bool) -> ResultRow {
    let spec = ExperimentSpec::new(problem, n, scale, variant, line_search);
    run_matrix(std::slice::from_ref(&spec)).pop().unwrap().unwrap()
}

fn describe(r: &ResultRow) -> String {
    format!(
        "{} {} {}: it={} flag='{}' best={:e}",
        r.function_label(),
        nlabs_bench::scale_label(r.scale),
        r.method_label(),
        r.total_iterations,
        r.flag(),
        r.best_residual
    )
}

#[test]
fn criterion_01_rosenbrock() {
    let mut failures = Vec::new();
    let mut cells = 0;
    for n in [2, 10, 100] {
        for scale in SCALES {
            for v in REFERENCE {
                let r = run("rosenbrock", n, scale, v, false);
                cells += 1;
                if !(r.status == StopStatus::Converged && r.total_iterations <= 2 && r.best_residual <= 1e-12) {
                    failures.push(describe(&r));
                }
            }
        }
    }
    verdict(1, &failures, &format!("Rosenbrock converges in <= 2 iterations to <= 1e-12 ({cells} cells)"));
}

#[test]
fn criterion_02_schubert_broyden() {
    let cases: [(usize, f64, [usize; 3], usize); 3] =
        [(10, 1.0, [5, 5, 5], 2), (50, 10.0, [10, 9, 9], 3), (100, 100.0, [13, 13, 12], 3)];
    let mut failures = Vec::new();
    for (n, scale, expected, tol) in cases {
        for (v, want) in REFERENCE.into_iter().zip(expected) {
            let r = run("schubert", n, scale, v, false);
            let ok = r.status == StopStatus::Converged
                && r.best_residual <= 1e-12
                && r.total_iterations.abs_diff(want) <= tol;
            if !ok {
                failures.push(format!("{} (expected it {want}±{tol})", describe(&r)));
            }
        }
    }
    verdict(2, &failures, "Schubert-Broyden iteration counts within tolerance, all converged");
}

#[test]
fn criterion_03_brown_almost_linear() {
    let mut failures = Vec::new();
    for (v, want) in REFERENCE.into_iter().zip([5usize, 5, 6]) {
        let r = run("brown", 4, 1.0, v, false);
        if !(r.status == StopStatus::Converged && r.total_iterations.abs_diff(want) <= 3) {
            failures.push(format!("{} (expected it {want}±3, converged)", describe(&r)));
        }
    }
    for (v, ls, want) in [
        (VariantSpec::MOD_HUANG1, false, 16usize),
        (VariantSpec::MOD_HUANG1, true, 11),
        (VariantSpec::MOD_HUANG2, false, 16),
        (VariantSpec::MOD_HUANG2, true, 11),
    ] {
        let r = run("brown", 4, 100.0, v, ls);
        if !(r.status == StopStatus::Converged && r.total_iterations.abs_diff(want) <= 5) {
            failures.push(format!("{} (expected it {want}±5, converged)", describe(&r)));
        }
    }
    let r = run("brown", 4, 10.0, VariantSpec::IMPLICIT_LU, false);
    if !(r.status != StopStatus::Converged && r.best_residual >= 0.5) {
        failures.push(format!("{} (expected failure with best >= 0.5)", describe(&r)));
    }

    // n = 20: every cell reaches the rounding floor, runs without line
    // search stall, and line search converges in more cells than without.
    let (mut conv_plain, mut conv_ls) = (0, 0);
    for scale in [1.0, 1.1] {
        for v in REFERENCE {
            for ls in [false, true] {
                let r = run("brown", 20, scale, v, ls);
                if r.best_residual > 1e-13 {
                    failures.push(format!("{} (expected best <= 1e-13)", describe(&r)));
                }
                match (ls, r.status) {
                    (false, StopStatus::Converged) => conv_plain += 1,
                    (true, StopStatus::Converged) => conv_ls += 1,
                    (false, StopStatus::Oscillation | StopStatus::SmallStep) | (true, _) => {}
                    (false, _) => failures.push(format!("{} (expected a stall flag)", describe(&r))),
                }
            }
        }
    }
    if conv_ls <= conv_plain {
        failures.push(format!(
            "n=20: line search converged in {conv_ls} of 6 cells, plain runs in {conv_plain} of 6"
        ));
    }
    verdict(
        3,
        &failures,
        &format!(
            "Brown n=4 counts and failures as tabulated; n=20 converged {conv_plain}/6 plain vs {conv_ls}/6 with line search"
        ),
    );
}

#[test]
fn criterion_04_powell_singular() {
    let mut failures = Vec::new();
    for scale in SCALES {
        for v in [VariantSpec::MOD_HUANG1, VariantSpec::MOD_HUANG2] {
            let r = run("powell", 4, scale, v, false);
            if !(r.best_residual <= 1e-13 && r.best_iteration <= 80) {
                failures.push(format!("{} (expected best <= 1e-13 within 80 iterations)", describe(&r)));
            }
        }
        let r = run("powell", 4, scale, VariantSpec::IMPLICIT_LU, false);
        if !(matches!(r.status, StopStatus::Divergence | StopStatus::MaxIter) && r.best_residual >= 1.0) {
            failures.push(format!("{} (expected (div) or (max) with best >= 1)", describe(&r)));
        }
        let r = run("powell", 4, scale, VariantSpec::IMPLICIT_LU, true);
        if !(r.status == StopStatus::Converged && r.total_iterations <= 250) {
            failures.push(format!("{} (expected convergence within 250 iterations)", describe(&r)));
        }
    }
    verdict(4, &failures, "Powell singular, all starts and methods");
}

#[test]
fn criterion_05_newton_equivalence() {
    let mut failures = Vec::new();
    let problems = [
        Problem::rosenbrock(2).unwrap(),
        Problem::powell_singular(),
        Problem::brown_almost_linear(4).unwrap(),
        Problem::schubert_broyden(10).unwrap(),
    ];
    for p in &problems {
        let x = p.standard_start::<f64>();
        let newton = newton_reference_solve(p, &x).unwrap();
        for (name, v) in METHODS {
            let out = major_iteration(p, &x, v, options(true)).unwrap();
            let d = rel_diff(&out.x_next, &newton);
            if d > 1e-10 {
                failures.push(format!("{p} {name}: relative difference {d:e}"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for n in 1..=20 {
        let sys = random_system(n, &mut rng);
        let x = random_point(n, -1.0, 1.0, &mut rng);
        let newton = newton_reference_solve(&sys, &x).unwrap();
        for (name, v) in METHODS {
            let out = major_iteration(&sys, &x, v, options(true)).unwrap();
            let d = rel_diff(&out.x_next, &newton);
            if d > 1e-10 {
                failures.push(format!("linear n={n} {name}: relative difference {d:e}"));
            }
        }
    }
    verdict(5, &failures, "frozen sweep equals the elimination Newton step (4 problems, 20 linear systems)");
}

/// Replays a solve without line search major iteration by major iteration,
/// checking every retained row against the projection after each step.
fn null_space_violations<O: RowOracle<f64>>(oracle: &O, x0: &Vector<f64>, variant: VariantSpec, label: &str) -> Vec<String> {
    let config = SolverConfig::double_precision();
    let report = solve(oracle, x0, variant, &config).unwrap();
    let mut failures = Vec::new();
    let mut x = x0.clone();
    for it in 0..report.total_iterations {
        let mut sweep = Sweep::new(oracle, &x, variant, options(false)).unwrap();
        let mut rows: Vec<Vector<f64>> = Vec::new();
        while let Some(rec) = sweep.step().unwrap() {
            if rec.skipped {
                continue;
            }
            rows.push(rec.row);
            for (j, a) in rows.iter().enumerate() {
                let ha = sweep.state().apply_projection(a).unwrap().inf_norm();
                if ha > 1e-10 * a.inf_norm() {
                    failures.push(format!(
                        "{label} {}: iteration {} minor {} row {j}: |H a| = {ha:e}, |a| = {:e}",
                        variant.label(),
                        it + 1,
                        rec.k,
                        a.inf_norm()
                    ));
                }
            }
        }
        x = sweep.finish().unwrap().x_next;
    }
    failures
}

#[test]
fn criterion_06_null_space() {
    let problems = [
        Problem::rosenbrock(10).unwrap(),
        Problem::powell_singular(),
        Problem::brown_almost_linear(4).unwrap(),
        Problem::brown_almost_linear(20).unwrap(),
        Problem::schubert_broyden(10).unwrap(),
    ];
    let mut failures = Vec::new();
    for p in &problems {
        for (_, v) in METHODS {
            failures.extend(null_space_violations(p, &p.standard_start(), v, &p.to_string()));
        }
    }
    verdict(6, &failures, "projection annihilates every retained row after each minor step");
}

#[test]
fn criterion_07_representation_equivalence() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x7);
    for n in 1..=20 {
        let sys = random_system(n, &mut rng);
        let x = random_point(n, -1.0, 1.0, &mut rng);
        for (explicit, factored) in
            [(VariantSpec::HUANG1, VariantSpec::HUANG2), (VariantSpec::MOD_HUANG1, VariantSpec::MOD_HUANG2)]
        {
            let a = major_iteration(&sys, &x, explicit, options(false)).unwrap().x_next;
            let b = major_iteration(&sys, &x, factored, options(false)).unwrap().x_next;
            let d = rel_diff(&a, &b);
            if d > 1e-8 {
                failures.push(format!("n={n} {} vs {}: {d:e}", explicit.label(), factored.label()));
            }
        }
    }
    verdict(7, &failures, "explicit and factored projections agree on 20 random systems");
}

#[test]
fn criterion_08_jacobian_rows() {
    let problems = [
        Problem::rosenbrock(2).unwrap(),
        Problem::rosenbrock(10).unwrap(),
        Problem::powell_singular(),
        Problem::brown_almost_linear(4).unwrap(),
        Problem::brown_almost_linear(20).unwrap(),
        Problem::schubert_broyden(10).unwrap(),
    ];
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x8);
    for p in &problems {
        let n = p.n();
        for _ in 0..20 {
            let y = random_point(n, -2.0, 2.0, &mut rng);
            for k in 0..n {
                let exact = RowOracle::<f64>::jacobian_row(p, k, &y);
                let fd = fd_jacobian_row(p, k, &y, 1e-6);
                for l in 0..n {
                    if (exact[l] - fd[l]).abs() > (1e-5 * exact[l].abs()).max(1e-8) {
                        failures.push(format!("{p} row {k} col {l}: {:e} vs {:e}", exact[l], fd[l]));
                    }
                }
            }
        }
    }
    verdict(8, &failures, "analytic rows match central differences at 20 points per problem");
}

#[test]
fn criterion_09_cost_accounting() {
    let problems = [
        Problem::rosenbrock(10).unwrap(),
        Problem::powell_singular(),
        Problem::brown_almost_linear(20).unwrap(),
        Problem::schubert_broyden(100).unwrap(),
    ];
    let mut failures = Vec::new();
    for p in &problems {
        let n = p.n();
        for (name, v) in METHODS {
            let out = major_iteration(p, &p.standard_start(), v, options(false)).unwrap();
            if !out.skipped_rows.is_empty() {
                failures.push(format!("{p} {name}: unexpected skipped rows {:?}", out.skipped_rows));
            } else if out.component_evals != n || out.jacobian_element_evals != n * n {
                failures.push(format!(
                    "{p} {name}: {} component and {} element evaluations for n = {n}",
                    out.component_evals, out.jacobian_element_evals
                ));
            }
        }
    }
    verdict(9, &failures, "one sweep costs n component and n^2 Jacobian-element evaluations");
}

#[test]
fn criterion_10_check_command() {
    let out = Command::new(env!("CARGO_BIN_EXE_nlabs-bench")).arg("--check").output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    let failures: Vec<String> = text
        .lines()
        .filter(|l| l.starts_with("FAIL"))
        .map(str::to_string)
        .collect();
    let mut failures = failures;
    if !out.status.success() && failures.is_empty() {
        failures.push(format!("exit status {}", out.status));
    }
    let summary = text.lines().last().unwrap_or("no output").to_string();
    verdict(10, &failures, &format!("--check over the reference grid: {summary}"));
}
