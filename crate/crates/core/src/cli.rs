//! Command dispatch for the `hypfred` binary. Each command writes one JSON
//! report; `diagnose` also writes CSV tables next to it.
//!
//! Exit statuses: 0 success, 1 input error, 2 invertibility condition
//! violated, 3 right-hand side not in the image.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::coefficients::{ConditionReport, ProblemConfig};
use crate::diagnostics::{self, DecayRow};
use crate::error::{Error, Result};
use crate::io::{self, Problem, ResolvedOptions, TOOL_NAME, TOOL_VERSION};
use crate::spectral::{self, KernelReport};
use crate::transfer::System;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CONDITION: i32 = 2;
pub const EXIT_UNSOLVABLE: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Check,
    Solve,
    Kernel,
    AdjointKernel,
    Index,
    Solvability,
    Diagnose,
}

/// Offsets used for the translation-modulus sweep in `diagnose`.
const SHIFT_SWEEP: [f64; 4] = [0.1, 0.03, 0.01, 0.001];

struct Outcome {
    status: &'static str,
    exit: i32,
    body: Value,
}

impl Outcome {
    fn ok(body: Value) -> Self {
        Self { status: "ok", exit: EXIT_OK, body }
    }
}

/// Runs `command` on the problem file and writes the report to `out`.
/// Returns the process exit status.
pub fn run_command(
    command: Command,
    problem_path: &Path,
    out: &Path,
    k_max: Option<i64>,
    tol: Option<f64>,
) -> i32 {
    let loaded = io::load_problem(problem_path)
        .and_then(|p| p.file.options.resolve(k_max, tol).map(|o| (p, o)));
    let (problem, options) = match loaded {
        Ok(v) => v,
        Err(e) => return report_error(command, out, None, &e),
    };
    let outcome = match dispatch(command, &problem, &options, out) {
        Ok(o) => o,
        Err(e @ Error::ConditionViolated { .. }) => Outcome {
            status: "condition_violated",
            exit: EXIT_CONDITION,
            body: json!({
                "reason": e.code(),
                "message": e.to_string(),
                "condition": problem.config.check_condition(),
            }),
        },
        Err(e) => return report_error(command, out, Some(&options), &e),
    };
    let report = envelope(command, Some(&options), outcome.status, outcome.exit, outcome.body);
    match io::write_json(out, &report) {
        Ok(()) => outcome.exit,
        Err(e) => {
            eprintln!("{}: {e}", e.code());
            EXIT_INPUT
        }
    }
}

fn envelope(command: Command, options: Option<&ResolvedOptions>, status: &str, exit: i32, body: Value) -> Value {
    let mut report = json!({
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "schema_version": io::SCHEMA_VERSION,
        "command": command,
        "options": options,
        "parallel": crate::parallel::is_parallel(),
        "status": status,
        "exit_status": exit,
    });
    if let (Value::Object(r), Value::Object(b)) = (&mut report, body) {
        r.extend(b);
    }
    report
}

fn report_error(command: Command, out: &Path, options: Option<&ResolvedOptions>, e: &Error) -> i32 {
    eprintln!("{}: {e}", e.code());
    let body = json!({ "reason": e.code(), "message": e.to_string() });
    let _ = io::write_json(out, &envelope(command, options, "error", EXIT_INPUT, body));
    EXIT_INPUT
}

fn dispatch(command: Command, problem: &Problem, options: &ResolvedOptions, out: &Path) -> Result<Outcome> {
    let config = &problem.config;
    match command {
        Command::Check => {
            let condition = config.check_condition();
            let exit = if condition.satisfied { EXIT_OK } else { EXIT_CONDITION };
            Ok(Outcome {
                status: if condition.satisfied { "ok" } else { "condition_violated" },
                exit,
                body: json!({ "condition": condition }),
            })
        }
        Command::Solve => solve(problem, options),
        Command::Kernel => Ok(Outcome::ok(kernel_json(
            config,
            &spectral::kernel_with(config, System::Primal, options.k_max, options.tol),
        ))),
        Command::AdjointKernel => Ok(Outcome::ok(kernel_json(
            config,
            &spectral::kernel_with(config, System::Adjoint, options.k_max, options.tol),
        ))),
        Command::Index => {
            let report = spectral::index_report(config, &options.solver())?;
            Ok(Outcome::ok(json!({ "fredholm": report })))
        }
        Command::Solvability => {
            let defects = spectral::solvability_test(config, &problem.rhs, &options.solver())?;
            let solvable = spectral::defects_vanish(&defects, &problem.rhs, options.tol);
            Ok(Outcome {
                status: if solvable { "ok" } else { "unsolvable" },
                exit: if solvable { EXIT_OK } else { EXIT_UNSOLVABLE },
                body: json!({ "defects": defects, "solvable": solvable }),
            })
        }
        Command::Diagnose => diagnose(config, options, out),
    }
}

fn solve(problem: &Problem, options: &ResolvedOptions) -> Result<Outcome> {
    let config = &problem.config;
    let report = spectral::solve_full(config, &problem.rhs, &options.solver())?;
    let status = if report.solvable { "ok" } else { "unsolvable" };
    Ok(Outcome {
        status,
        exit: if report.solvable { EXIT_OK } else { EXIT_UNSOLVABLE },
        body: json!({
            "condition": config.check_condition(),
            "solvable": report.solvable,
            "residual": report.residual,
            "v_norm": report.v_norm,
            "rhs_w_norm": problem.rhs.w_norm(config.omega()),
            "singular_modes": report.singular_modes,
            "solution": io::field_to_json(&report.solution),
        }),
    })
}

fn kernel_json(config: &ProblemConfig, report: &KernelReport) -> Value {
    let scan: Vec<Value> = report
        .per_mode
        .values()
        .map(|m| {
            json!({
                "k": m.k,
                "dim": m.dim(),
                "boundary_determinant": [m.boundary_determinant.re, m.boundary_determinant.im],
                "tolerance": m.tolerance,
                "ambiguous": m.is_ambiguous(),
            })
        })
        .collect();
    let basis: Vec<Value> = report
        .singular_modes()
        .map(|m| json!({ "k": m.k, "basis": io::pair_to_json(m.basis.as_ref().expect("singular")) }))
        .collect();
    json!({
        "condition": config.check_condition(),
        "system": report.system,
        "k_max_scanned": report.k_max_scanned,
        "total_real_dimension": report.total_real_dimension,
        "complex_dimension": report.complex_dimension(),
        "certification": report.certification,
        "scan": scan,
        "basis": basis,
    })
}

#[derive(Serialize)]
struct ShiftRow {
    family: &'static str,
    index: i64,
    xi: f64,
    tau: f64,
    modulus: f64,
}

#[derive(Serialize)]
struct NoncompactRow {
    l: i64,
    v_norm: f64,
    w_norm: f64,
    w_distance_to_first: f64,
}

fn companion(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}.csv"))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn diagnose(config: &ProblemConfig, options: &ResolvedOptions, out: &Path) -> Result<Outcome> {
    let condition: ConditionReport = config.require_condition()?;
    let omega = config.omega();
    let ks: Vec<i64> = (0..)
        .map(|p| 1i64 << p)
        .take_while(|&k| k <= options.k_max)
        .collect();
    let decay: Vec<DecayRow> = diagnostics::smoothing_decay(config, &ks)?;
    let slope = (decay.len() >= 2 && decay.iter().all(|r| r.output_norm > 0.0))
        .then(|| diagnostics::decay_slope(&decay));

    let noncompact: Vec<_> = ks.iter().map(|&l| diagnostics::noncompact_sequence(config, l)).collect();
    let noncompact_rows: Vec<NoncompactRow> = ks
        .iter()
        .zip(&noncompact)
        .map(|(&l, field)| NoncompactRow {
            l,
            v_norm: field.v_norm(config, None),
            w_norm: field.w_norm(omega),
            w_distance_to_first: field.difference(&noncompact[0]).w_norm(omega),
        })
        .collect();

    let mut shift_rows = Vec::new();
    for &k in &ks {
        let mut image = crate::field::FourierField::new(config.gamma());
        image.insert(k, diagnostics::smoothing_image(config, k)?);
        for &xi in &SHIFT_SWEEP {
            shift_rows.push(ShiftRow {
                family: "smoothing_image",
                index: k,
                xi,
                tau: xi,
                modulus: diagnostics::shift_modulus(&image, omega, xi, xi),
            });
        }
    }
    for (&l, field) in ks.iter().zip(&noncompact) {
        for &xi in &SHIFT_SWEEP {
            let tau = std::f64::consts::PI / (l as f64 * omega);
            shift_rows.push(ShiftRow {
                family: "noncompact_sequence",
                index: l,
                xi,
                tau,
                modulus: diagnostics::shift_modulus(field, omega, xi, tau),
            });
        }
    }

    let decay_csv = companion(out, "decay");
    let shift_csv = companion(out, "shift");
    write_csv(&decay_csv, &decay)?;
    write_csv(&shift_csv, &shift_rows)?;
    let name = |p: &Path| p.file_name().map(|n| n.to_string_lossy().into_owned());
    Ok(Outcome::ok(json!({
        "condition": condition,
        "smoothing_decay": { "rows": decay, "log_log_slope": slope },
        "noncompact_sequence": noncompact_rows,
        "tables": { "decay": name(&decay_csv), "shift": name(&shift_csv) },
    })))
}
