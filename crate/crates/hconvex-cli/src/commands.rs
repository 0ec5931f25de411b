//! The four commands behind the CLI: solve, verify, bounds, export.
//!
//! Exit codes: 0 success; 1 verification failure; 2 unreadable or invalid
//! input; 3 non-positive prescription; 4 continuation failure.

use std::path::Path;
use std::sync::Arc;

use hconvex::horo::{self, SupportFunction};
use hconvex::solver::{self, ProblemSpec, SolveOptions};
use hconvex::sphere::{ScalarField, SphereGrid};
use hconvex::verify;

use crate::config::Config;
use crate::files::{
    fmt17, read_json, write_json, Diagnostics, FailureFile, FailureInfo, MonitorEntry, ReportFile,
    SolutionFile,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAIL: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_NONPOSITIVE: i32 = 3;
pub const EXIT_CONTINUATION: i32 = 4;

fn fail(code: i32, msg: impl AsRef<str>) -> i32 {
    eprintln!("error: {}", msg.as_ref());
    code
}

struct Problem {
    config: Config,
    grid: Arc<SphereGrid>,
    spec: ProblemSpec,
}

/// Loads a config, builds the grid and validates the prescription.
/// Distinguishes bad input (exit 2) from a non-positive prescription (3).
fn load_problem(config_path: &Path) -> Result<Problem, (i32, String)> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| (EXIT_BAD_INPUT, format!("{}: {e}", config_path.display())))?;
    let config = Config::from_toml(&text).map_err(|e| (EXIT_BAD_INPUT, e))?;
    problem_from_config(config)
}

fn problem_from_config(config: Config) -> Result<Problem, (i32, String)> {
    let grid = config.build_grid().map_err(|e| (EXIT_BAD_INPUT, e))?;
    let f_tilde = config
        .f_tilde
        .evaluate(&grid)
        .map_err(|e| (EXIT_BAD_INPUT, e))?;
    let min = f_tilde.min();
    if !(min > 0.0) {
        return Err((
            EXIT_NONPOSITIVE,
            format!("prescription must be positive everywhere, min = {min}"),
        ));
    }
    let gamma = config.gamma.resolve().map_err(|e| (EXIT_BAD_INPUT, e))?;
    let spec = ProblemSpec::new(config.k, f_tilde, gamma)
        .map_err(|e| (EXIT_BAD_INPUT, e.to_string()))?;
    Ok(Problem { config, grid, spec })
}

/// `solve --config PATH --out PATH`: run the continuation and write the
/// solution file (or a partial-state failure file).
pub fn cmd_solve(config_path: &Path, out_path: &Path) -> i32 {
    let problem = match load_problem(config_path) {
        Ok(p) => p,
        Err((code, msg)) => return fail(code, msg),
    };
    let opts = SolveOptions {
        steps: problem.config.continuation.steps,
        min_dt: problem.config.continuation.min_dt,
        tol: problem.config.newton.tol,
        max_iter: problem.config.newton.max_iter,
    };
    match solver::continuation_solve(&problem.spec, &opts) {
        Ok(state) => {
            let (phi_low, phi_high) = solver::apriori_bounds(&problem.spec);
            let total_iters: usize = state.step_history.iter().map(|s| s.1).sum();
            let solution = SolutionFile {
                config: problem.config,
                gamma: problem.spec.gamma(),
                phi: state.phi.phi().values().to_vec(),
                u: state.phi.u().values().to_vec(),
                residual_norm: state.residual_norm,
                min_eig_a: state.min_eig_a,
                diagnostics: Diagnostics {
                    newton_iters: total_iters,
                    step_history: state.step_history.clone(),
                    phi_low,
                    phi_high,
                    max_eig_a: state.max_eig_a,
                },
            };
            match write_json(out_path, &solution) {
                Ok(()) => EXIT_OK,
                Err(e) => fail(EXIT_BAD_INPUT, format!("writing {}: {e}", out_path.display())),
            }
        }
        Err(failure) => {
            let partial = FailureFile {
                config: problem.config,
                failure: FailureInfo {
                    reason: failure.error.to_string(),
                },
                t_last: failure.best.t,
                phi: failure.best.phi.phi().values().to_vec(),
                residual_norm: failure.best.residual_norm,
            };
            let _ = write_json(out_path, &partial);
            fail(EXIT_CONTINUATION, failure.to_string())
        }
    }
}

/// Rebuilds grid, prescription and iterate from a solution file.
fn reload(solution: &SolutionFile) -> Result<(Problem, SupportFunction), (i32, String)> {
    let mut config = solution.config.clone();
    // Re-use the resolved anchor so re-evaluation matches the solve run.
    config.gamma = crate::config::GammaConfig::Value(solution.gamma);
    let problem = problem_from_config(config)?;
    let phi = ScalarField::new(problem.grid.clone(), solution.phi.clone())
        .map_err(|e| (EXIT_VERIFY_FAIL, e.to_string()))?;
    let sf = SupportFunction::from_phi(phi).map_err(|e| (EXIT_VERIFY_FAIL, e.to_string()))?;
    Ok((problem, sf))
}

/// `verify --solution PATH --report PATH`: re-measure curvatures of the
/// stored solution and write the report; exit 0 iff all monitors pass and
/// the curvature error meets the configured tolerance.
pub fn cmd_verify(solution_path: &Path, report_path: &Path) -> i32 {
    let solution: SolutionFile = match read_json(solution_path) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_BAD_INPUT, format!("{}: {e}", solution_path.display())),
    };
    let (problem, sf) = match reload(&solution) {
        Ok(v) => v,
        Err((code, msg)) => return fail(code, msg),
    };

    let patch = horo::embed(&sf);
    // The curvature measurement can fail outright on corrupted data
    // (h-convexity lost); the report is still written, with the failure
    // recorded as its own monitor next to the state monitors.
    let measured = verify::measure_curvatures(&patch, problem.spec.k());
    let report = match &measured {
        Ok(m) => match verify::compare(m, &problem.spec, &sf, &patch) {
            Ok(r) => Some(r),
            Err(e) => return fail(EXIT_VERIFY_FAIL, e.to_string()),
        },
        Err(_) => None,
    };

    // Integrity monitor: re-evaluating the residual on the reloaded values
    // must reproduce the stored norm (up to 1e-12). A sentinel value of -1
    // marks an iterate whose residual is not even evaluable.
    let residual_gap = match solver::residual(&problem.spec, &sf, 1.0) {
        Ok(r) => (r.linf() - solution.residual_norm).abs(),
        Err(_) => -1.0,
    };

    let tol = solution.config.verify.tol;
    let mut monitors: Vec<MonitorEntry> = match &report {
        Some(r) => r
            .monitors
            .iter()
            .map(|m| MonitorEntry {
                name: m.name.to_string(),
                value: m.value,
                pass: m.pass,
            })
            .collect(),
        None => {
            let mut ms: Vec<MonitorEntry> = vec![MonitorEntry {
                name: "curvature_measurement".to_string(),
                value: -1.0,
                pass: false,
            }];
            ms.extend(
                verify::state_monitors(&problem.spec, &sf, &patch)
                    .iter()
                    .map(|m| MonitorEntry {
                        name: m.name.to_string(),
                        value: m.value,
                        pass: m.pass,
                    }),
            );
            ms
        }
    };
    monitors.push(MonitorEntry {
        name: "residual_reproduction".to_string(),
        value: residual_gap,
        pass: (0.0..=1e-12).contains(&residual_gap),
    });

    let all_pass = monitors.iter().all(|m| m.pass);
    let (linf, l2, min_kt, measured_vals) = match &report {
        Some(r) => (
            r.linf_rel_error,
            r.l2_rel_error,
            r.min_kappa_tilde,
            r.h_tilde_k_measured.values().to_vec(),
        ),
        None => (-1.0, -1.0, -1.0, Vec::new()),
    };
    let pass = all_pass && report.is_some() && linf <= tol;
    let out = ReportFile {
        linf_rel_error: linf,
        l2_rel_error: l2,
        min_kappa_tilde: min_kt,
        tol,
        pass,
        monitors,
        h_tilde_k_measured: measured_vals,
        h_tilde_k_prescribed: problem.spec.f_tilde().values().to_vec(),
    };
    if let Err(e) = write_json(report_path, &out) {
        return fail(EXIT_BAD_INPUT, format!("writing {}: {e}", report_path.display()));
    }
    if pass {
        EXIT_OK
    } else {
        let culprit = out
            .monitors
            .iter()
            .find(|m| !m.pass)
            .map(|m| m.name.clone())
            .unwrap_or_else(|| "linf_rel_error".to_string());
        fail(EXIT_VERIFY_FAIL, format!("verification failed: {culprit}"))
    }
}

/// `bounds --config PATH`: print the analytic a priori bounds.
pub fn cmd_bounds(config_path: &Path) -> i32 {
    let problem = match load_problem(config_path) {
        Ok(p) => p,
        Err((code, msg)) => return fail(code, msg),
    };
    let (phi_low, phi_high) = solver::apriori_bounds(&problem.spec);
    println!("phi_low = {}", fmt17(phi_low));
    println!("phi_high = {}", fmt17(phi_high));
    println!("u_low = {}", fmt17(phi_low.ln()));
    println!("u_high = {}", fmt17(phi_high.ln()));
    EXIT_OK
}

/// Export format for `cmd_export`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Obj,
    Csv,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "obj" => Ok(ExportFormat::Obj),
            "csv" => Ok(ExportFormat::Csv),
            other => Err(format!("unknown format {other:?} (expected obj or csv)")),
        }
    }
}

/// `export --solution PATH --format obj|csv --out PATH`.
pub fn cmd_export(solution_path: &Path, format: ExportFormat, out_path: &Path) -> i32 {
    let solution: SolutionFile = match read_json(solution_path) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_BAD_INPUT, format!("{}: {e}", solution_path.display())),
    };
    let (problem, sf) = match reload(&solution) {
        Ok(v) => v,
        Err((code, msg)) => return fail(code, msg),
    };
    let text = match format {
        ExportFormat::Obj => export_obj(&problem.grid, &sf),
        ExportFormat::Csv => match export_csv(&problem, &sf) {
            Ok(t) => t,
            Err(e) => return fail(EXIT_VERIFY_FAIL, e),
        },
    };
    match std::fs::write(out_path, text) {
        Ok(()) => EXIT_OK,
        Err(e) => fail(EXIT_BAD_INPUT, format!("writing {}: {e}", out_path.display())),
    }
}

/// Poincare-ball mesh: vertex per node; quad faces over the structured grid
/// for n = 2 (open at the polar caps), a closed polyline for n = 1.
fn export_obj(grid: &Arc<SphereGrid>, sf: &SupportFunction) -> String {
    let points = horo::to_poincare(&horo::embed(sf));
    let mut out = String::new();
    for p in &points {
        out.push_str(&format!("v {} {} {}\n", fmt17(p[0]), fmt17(p[1]), fmt17(p[2])));
    }
    if grid.dim() == 1 {
        out.push('l');
        for j in 0..grid.node_count() {
            out.push_str(&format!(" {}", j + 1));
        }
        out.push_str(" 1\n");
    } else {
        let (nt, np) = (grid.n_theta(), grid.n_phi());
        for i in 0..nt - 1 {
            for j in 0..np {
                let jn = (j + 1) % np;
                out.push_str(&format!(
                    "f {} {} {} {}\n",
                    grid.index(i, j) + 1,
                    grid.index(i + 1, j) + 1,
                    grid.index(i + 1, jn) + 1,
                    grid.index(i, jn) + 1,
                ));
            }
        }
    }
    out
}

/// Per-node table: angles, support values, shifted curvatures and their
/// k-th symmetric function.
fn export_csv(problem: &Problem, sf: &SupportFunction) -> Result<String, String> {
    let grid = &problem.grid;
    let n = grid.dim();
    let a = horo::build_a(sf);
    let w = horo::shifted_weingarten(sf, &a).map_err(|e| e.to_string())?;
    let curv = horo::shifted_curvatures(&w, problem.spec.k()).map_err(|e| e.to_string())?;

    let mut out = String::new();
    if n == 1 {
        out.push_str("theta,support_phi,u,kappa_tilde_1,h_tilde_k\n");
    } else {
        out.push_str("theta,phi,support_phi,u,kappa_tilde_1,kappa_tilde_2,h_tilde_k\n");
    }
    for idx in 0..grid.node_count() {
        let (theta, phi_angle) = grid.angles(idx);
        let mut cols = vec![fmt17(theta)];
        if n == 2 {
            cols.push(fmt17(phi_angle));
        }
        cols.push(fmt17(sf.phi().values()[idx]));
        cols.push(fmt17(sf.u().values()[idx]));
        for c in 0..n {
            cols.push(fmt17(curv.kappa_tilde[idx][c]));
        }
        cols.push(fmt17(curv.h_tilde_k.values()[idx]));
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    Ok(out)
}
