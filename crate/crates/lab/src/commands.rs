//! One function per subcommand: resolve the scenario, run the corresponding
//! verification operation, emit CSV + JSON, and map violations to the exit
//! status.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use duality_core::duality::{
    covariance_check, expansive_demo, lr_check, run_duality, scaling_fit, EngineKind,
};
use duality_core::meanfield::run_torsion_point;

use crate::output::{fmt_f64, out_paths, write_outputs, Csv, Summary};
use crate::scenario::Scenario;
use crate::CliError;

fn numerical(e: duality_core::Error) -> CliError {
    match e {
        // Asking for a state the engine cap forbids is a config problem.
        duality_core::Error::StateTooLarge { .. } => CliError::Config(e.to_string()),
        other => CliError::Numerical(other.to_string()),
    }
}

fn finish<T: Serialize>(
    command: &str,
    scenario: &Scenario,
    engine: String,
    out_dir: &Path,
    csv: Csv,
    results: T,
    started: Instant,
) -> Result<(), CliError> {
    let summary = Summary {
        command: command.to_string(),
        scenario: scenario.clone(),
        seed: scenario.seed,
        engine,
        wall_time_s: started.elapsed().as_secs_f64(),
        results,
    };
    let paths = out_paths(out_dir, &scenario.name, command)?;
    write_outputs(&paths, csv, &summary)?;
    println!(
        "{command}: wrote {} and {}",
        paths.csv.display(),
        paths.json.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct DualityResults {
    n: usize,
    grid_points: usize,
    max_distance: f64,
    min_margin: f64,
    max_margin: f64,
    integrator_error: f64,
    violation_tolerance: f64,
    violation: bool,
}

pub fn cmd_duality(scenario: &Scenario, out_dir: &Path) -> Result<(), CliError> {
    let started = Instant::now();
    let n = scenario.single_n()?;
    let engine = scenario.engine.resolve(n);
    let schedule = scenario.core_schedule(scenario.t_final)?;
    let grid = scenario.time_grid();
    let phi = scenario.phi_amplitudes()?;
    let closure = scenario.closure.to_core();
    let run = run_duality(phi, &schedule, n, &grid, engine, closure, scenario.dt, true)
        .map_err(numerical)?;

    let mut csv = Csv::new(&[
        "t",
        "mf_x",
        "mf_y",
        "mf_z",
        "ex_x",
        "ex_y",
        "ex_z",
        "trace_distance",
        "es_bound",
    ]);
    for i in 0..run.times.len() {
        let m = run.mf_bloch[i];
        let e = run.exact_bloch[i];
        csv.row(&[
            fmt_f64(run.times[i]),
            fmt_f64(m[0]),
            fmt_f64(m[1]),
            fmt_f64(m[2]),
            fmt_f64(e[0]),
            fmt_f64(e[1]),
            fmt_f64(e[2]),
            fmt_f64(run.distances[i]),
            fmt_f64(run.bound_values[i]),
        ]);
    }
    let violation = run.violation;
    let max_margin = run
        .distances
        .iter()
        .zip(&run.bound_values)
        .map(|(d, b)| b - d)
        .fold(f64::NEG_INFINITY, f64::max);
    let results = DualityResults {
        n,
        grid_points: run.times.len(),
        max_distance: run.max_distance,
        min_margin: run.min_margin,
        max_margin,
        integrator_error: run.integrator_error,
        violation_tolerance: run.violation_tolerance,
        violation,
    };
    finish(
        "duality",
        scenario,
        engine.to_string(),
        out_dir,
        csv,
        results,
        started,
    )?;
    if violation {
        return Err(CliError::Violation(
            "trace distance exceeded the bound beyond the integration tolerance".into(),
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct ScalingResults {
    t_fixed: f64,
    slope: f64,
    intercept: f64,
    excluded: usize,
    points: usize,
}

pub fn cmd_scaling(scenario: &Scenario, out_dir: &Path) -> Result<(), CliError> {
    let started = Instant::now();
    let n_list = scenario.n_values()?;
    let t_fixed = scenario
        .t_fixed
        .ok_or_else(|| CliError::Config("scaling needs t_fixed".into()))?;
    let schedule = scenario.core_schedule(t_fixed)?;
    let phi = scenario.phi_amplitudes()?;
    // Auto resolves per point; a single engine keeps the sweep homogeneous.
    let engine = match scenario.engine {
        crate::scenario::EngineChoice::Full => EngineKind::Full,
        _ => EngineKind::Symmetric,
    };
    let closure = scenario.closure.to_core();
    let report = scaling_fit(
        phi,
        &schedule,
        &n_list,
        t_fixed,
        engine,
        closure,
        scenario.dt,
    )
    .map_err(numerical)?;

    let bounds = schedule.bounds();
    let mut csv = Csv::new(&[
        "n",
        "n_minus_1",
        "trace_distance",
        "integrator_error",
        "included",
        "es_bound",
    ]);
    for p in &report.points {
        csv.row(&[
            p.n.to_string(),
            (p.n - 1).to_string(),
            fmt_f64(p.distance),
            fmt_f64(p.integrator_error),
            (p.included as u8).to_string(),
            fmt_f64(duality_core::duality::es_bound(t_fixed, p.n, &bounds)),
        ]);
    }
    let results = ScalingResults {
        t_fixed,
        slope: report.slope,
        intercept: report.intercept,
        excluded: report.excluded,
        points: report.points.len(),
    };
    finish(
        "scaling",
        scenario,
        engine.to_string(),
        out_dir,
        csv,
        results,
        started,
    )
}

#[derive(Serialize)]
struct LrResults {
    cells: usize,
    samples_per_cell: usize,
    total_violations: usize,
    worst_ratio_to_bound: f64,
}

pub fn cmd_lr(scenario: &Scenario, out_dir: &Path) -> Result<(), CliError> {
    let started = Instant::now();
    let n_list = scenario.n_values()?;
    let k_list = scenario.k_list.clone().unwrap_or_else(|| vec![1]);
    let t_list = scenario
        .t_list
        .clone()
        .ok_or_else(|| CliError::Config("lr needs t_list".into()))?;
    let samples = scenario.samples.unwrap_or(200);
    let t_max = t_list.iter().cloned().fold(0.0, f64::max);
    let schedule = scenario.core_schedule(t_max)?;

    let mut csv = Csv::new(&["n", "k", "t", "samples", "max_ratio", "bound", "violations"]);
    let mut total_violations = 0;
    let mut worst = 0.0f64;
    for &n in &n_list {
        for &k in &k_list {
            for &t in &t_list {
                let cell =
                    lr_check(&schedule, n, k, t, samples, scenario.seed).map_err(numerical)?;
                total_violations += cell.violations;
                if cell.bound > 0.0 {
                    worst = worst.max(cell.max_ratio / cell.bound);
                }
                csv.row(&[
                    n.to_string(),
                    k.to_string(),
                    fmt_f64(t),
                    samples.to_string(),
                    fmt_f64(cell.max_ratio),
                    fmt_f64(cell.bound),
                    cell.violations.to_string(),
                ]);
            }
        }
    }
    let results = LrResults {
        cells: n_list.len() * k_list.len() * t_list.len(),
        samples_per_cell: samples,
        total_violations,
        worst_ratio_to_bound: worst,
    };
    finish(
        "lr",
        scenario,
        "full".into(),
        out_dir,
        csv,
        results,
        started,
    )?;
    if total_violations > 0 {
        return Err(CliError::Violation(format!(
            "{total_violations} commutator-growth samples exceeded the bound"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct CovarianceResults {
    cells: usize,
    samples_per_cell: usize,
    total_violations: usize,
    worst_margin: f64,
}

pub fn cmd_covariance(scenario: &Scenario, out_dir: &Path) -> Result<(), CliError> {
    let started = Instant::now();
    let n = scenario.single_n()?;
    let t_list = scenario
        .t_list
        .clone()
        .ok_or_else(|| CliError::Config("covariance needs t_list".into()))?;
    let samples = scenario.samples.unwrap_or(500);
    let t_max = t_list.iter().cloned().fold(0.0, f64::max);
    let schedule = scenario.core_schedule(t_max)?;
    let phi = scenario.phi_amplitudes()?;

    let mut csv = Csv::new(&[
        "n",
        "t",
        "samples",
        "max_abs_covariance",
        "worst_margin",
        "violations",
    ]);
    let mut total_violations = 0;
    let mut worst_margin = f64::INFINITY;
    for &t in &t_list {
        let cell = covariance_check(phi, &schedule, n, t, samples, scenario.seed, scenario.dt)
            .map_err(numerical)?;
        total_violations += cell.violations;
        worst_margin = worst_margin.min(cell.worst_margin);
        csv.row(&[
            n.to_string(),
            fmt_f64(t),
            samples.to_string(),
            fmt_f64(cell.max_abs_covariance),
            fmt_f64(cell.worst_margin),
            cell.violations.to_string(),
        ]);
    }
    let results = CovarianceResults {
        cells: t_list.len(),
        samples_per_cell: samples,
        total_violations,
        worst_margin,
    };
    finish(
        "covariance",
        scenario,
        "full".into(),
        out_dir,
        csv,
        results,
        started,
    )?;
    if total_violations > 0 {
        return Err(CliError::Violation(format!(
            "{total_violations} covariance samples exceeded the bound"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct TorsionResults {
    axis: usize,
    points: usize,
    max_rel_error: f64,
    sign_flips_with_projection: bool,
}

/// Infer the torsion axis from the scenario: the unique axis carrying any
/// coupling, unless `axis` is given explicitly.
fn torsion_axis(scenario: &Scenario) -> Result<usize, CliError> {
    if let Some(axis) = scenario.axis {
        if !(1..=3).contains(&axis) {
            return Err(CliError::Config(format!("axis {axis} must be 1, 2, or 3")));
        }
        return Ok(axis);
    }
    let seg = &scenario.schedule.segments[0];
    let active: Vec<usize> = (0..3)
        .filter(|&mu| seg.h0[mu].abs() > 1e-12 || seg.v[mu].abs() > 1e-12)
        .map(|mu| mu + 1)
        .collect();
    match active.as_slice() {
        [axis] => Ok(*axis),
        [] => Err(CliError::Config(
            "all couplings vanish; give axis explicitly".into(),
        )),
        _ => Err(CliError::Config(format!(
            "couplings act on axes {active:?}; torsion needs a single axis"
        ))),
    }
}

pub fn cmd_torsion(scenario: &Scenario, out_dir: &Path) -> Result<(), CliError> {
    let started = Instant::now();
    if scenario.schedule.segments.len() != 1 {
        return Err(CliError::Config(
            "torsion runs need a constant (single-segment) schedule".into(),
        ));
    }
    let axis = torsion_axis(scenario)?;
    let x0_list = scenario
        .x0_list
        .clone()
        .ok_or_else(|| CliError::Config("torsion needs x0_list".into()))?;
    for &x0 in &x0_list {
        if !(-1.0..=1.0).contains(&x0) {
            return Err(CliError::Config(format!("x0 {x0} outside [−1, 1]")));
        }
    }
    let seg = &scenario.schedule.segments[0];
    let h0 = duality_core::pauli::PauliVector::new(seg.h0[0], seg.h0[1], seg.h0[2])
        .map_err(|e| CliError::Config(e.to_string()))?;
    let v = duality_core::pauli::PauliVector::new(seg.v[0], seg.v[1], seg.v[2])
        .map_err(|e| CliError::Config(e.to_string()))?;

    let mut csv = Csv::new(&[
        "x0",
        "x_eff",
        "omega_expected",
        "omega_measured",
        "abs_error",
        "rel_error",
    ]);
    let mut max_rel = 0.0f64;
    let mut sign_ok = true;
    for &x0 in &x0_list {
        let run = run_torsion_point(&h0, &v, axis, x0, scenario.dt).map_err(|e| match e {
            duality_core::Error::InvalidInput(_) => CliError::Config(e.to_string()),
            other => numerical(other),
        })?;
        let abs_err = (run.omega_measured - run.omega_expected).abs();
        let rel_err = if run.omega_expected.abs() > 1e-9 {
            abs_err / run.omega_expected.abs()
        } else {
            abs_err
        };
        if run.omega_expected.abs() > 1e-9 {
            max_rel = max_rel.max(rel_err);
            if run.omega_measured.signum() != run.omega_expected.signum() {
                sign_ok = false;
            }
        }
        csv.row(&[
            fmt_f64(x0),
            fmt_f64(run.x_eff),
            fmt_f64(run.omega_expected),
            fmt_f64(run.omega_measured),
            fmt_f64(abs_err),
            fmt_f64(rel_err),
        ]);
    }
    let results = TorsionResults {
        axis,
        points: x0_list.len(),
        max_rel_error: max_rel,
        sign_flips_with_projection: sign_ok,
    };
    finish(
        "torsion",
        scenario,
        "meanfield".into(),
        out_dir,
        csv,
        results,
        started,
    )
}

#[derive(Serialize)]
struct ExpansiveResults {
    d0: f64,
    max_ratio: f64,
    grid_points: usize,
}

pub fn cmd_expansive(scenario: &Scenario, out_dir: &Path) -> Result<(), CliError> {
    let started = Instant::now();
    let schedule = scenario.core_schedule(scenario.t_final)?;
    let grid = scenario.time_grid();
    let phi_a = scenario.phi_amplitudes()?;
    let phi_b = scenario.phi_b_amplitudes()?;
    let series =
        expansive_demo(phi_a, phi_b, &schedule, &grid, scenario.dt).map_err(|e| match e {
            duality_core::Error::DegeneratePair(_) => CliError::Config(e.to_string()),
            other => numerical(other),
        })?;

    let mut csv = Csv::new(&["t", "distance", "ratio"]);
    for i in 0..series.times.len() {
        csv.row(&[
            fmt_f64(series.times[i]),
            fmt_f64(series.distances[i]),
            fmt_f64(series.ratios[i]),
        ]);
    }
    let results = ExpansiveResults {
        d0: series.d0,
        max_ratio: series.max_ratio,
        grid_points: series.times.len(),
    };
    finish(
        "expansive",
        scenario,
        "meanfield".into(),
        out_dir,
        csv,
        results,
        started,
    )
}
