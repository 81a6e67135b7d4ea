//! Acceptance suite: every release-gating property, one test per criterion,
//! each printing a pass line with its runtime against the stated budget.
//!
//! Run with `cargo test -p duality-lab --test acceptance -- --nocapture`.

use std::time::Instant;

use duality_core::duality::{
    bbgky_residual, covariance_check, expansive_demo, lr_check, run_duality, scaling_fit,
    EngineKind, MfClosure,
};
use duality_core::full::FullState;
use duality_core::meanfield::{mf_integrate_bloch, rotate_bloch, run_torsion_point};
use duality_core::pauli::{pure_from_bloch, trace_distance, PauliVector};
use duality_core::schedule::{Schedule, Segment};
use duality_core::sector::SectorState;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pv(x: f64, y: f64, z: f64) -> PauliVector {
    PauliVector::new(x, y, z).unwrap()
}

fn canonical_phi() -> [C64; 2] {
    pure_from_bloch([0.6, 0.0, 0.8]).unwrap()
}

fn canonical_schedule(horizon: f64) -> Schedule {
    Schedule::constant(pv(0.0, 0.0, 1.0), pv(1.0, 0.0, 0.0), horizon).unwrap()
}

fn grid(t_final: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|i| t_final * i as f64 / steps as f64)
        .collect()
}

fn random_pv(rng: &mut ChaCha8Rng, scale: f64) -> PauliVector {
    PauliVector::new(
        scale * (2.0 * rng.random::<f64>() - 1.0),
        scale * (2.0 * rng.random::<f64>() - 1.0),
        scale * (2.0 * rng.random::<f64>() - 1.0),
    )
    .unwrap()
}

fn random_phi(rng: &mut ChaCha8Rng) -> [C64; 2] {
    loop {
        let phi = [
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
        ];
        let norm = (phi[0].norm_sqr() + phi[1].norm_sqr()).sqrt();
        if norm > 0.1 {
            return [phi[0] / norm, phi[1] / norm];
        }
    }
}

fn random_schedule(rng: &mut ChaCha8Rng, horizon: f64, scale: f64) -> Schedule {
    let segments = 1 + (rng.random::<f64>() * 3.0) as usize; // 1..=3
    let mut starts: Vec<f64> = (0..segments - 1)
        .map(|_| horizon * rng.random::<f64>())
        .collect();
    starts.push(0.0);
    starts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    starts.dedup();
    let segs = starts
        .into_iter()
        .map(|t_start| Segment {
            t_start,
            h0: random_pv(rng, scale),
            v: random_pv(rng, scale),
        })
        .collect();
    Schedule::new(segs, horizon).unwrap()
}

fn budget(name: &str, started: Instant, limit_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    println!("acceptance {name}: PASS in {elapsed:.1}s (budget {limit_s:.0}s)");
    assert!(
        elapsed < limit_s,
        "{name} exceeded its runtime budget: {elapsed:.1}s > {limit_s:.0}s"
    );
}

/// 1. The O(n) sector engine reproduces the brute-force oracle at every
///    output point for n ∈ {2..10} across random schedules on t ∈ [0, 2].
#[test]
fn criterion_01_engine_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for schedule_idx in 0..5 {
        let schedule = random_schedule(&mut rng, 2.0, 0.3);
        let phi = random_phi(&mut rng);
        let dt = schedule.bounds().default_dt();
        for n in 2..=10usize {
            let mut full = FullState::product_init(phi, n).unwrap();
            let mut sector = SectorState::coherent_init(phi, n).unwrap();
            for i in 1..=8 {
                let t = 2.0 * i as f64 / 8.0;
                full.propagate(&schedule, t, dt).unwrap();
                sector.propagate(&schedule, t, dt).unwrap();
                let d = trace_distance(
                    &full.reduced_central().unwrap(),
                    &sector.reduced_central().unwrap(),
                );
                worst = worst.max(d);
                assert!(
                    d < 1e-8,
                    "schedule {schedule_idx}, n = {n}, t = {t}: engines differ by {d:.3e}"
                );
            }
        }
    }
    println!("  worst cross-engine distance: {worst:.3e}");
    budget("criterion 1 (engine equivalence)", started, 120.0);
}

/// 2. Canonical scenario: the trace distance never exceeds the closed-form
///    bound, for the literal master-equation state and for the
///    replica-driven dual alike.
#[test]
fn criterion_02_error_bound_inequality() {
    let started = Instant::now();
    let schedule = canonical_schedule(1.0);
    let phi = canonical_phi();
    let t_grid = grid(1.0, 20);
    for closure in [MfClosure::SelfConsistent, MfClosure::ReplicaDriven] {
        for &n in &[64usize, 256, 1024] {
            let run = run_duality(
                phi,
                &schedule,
                n,
                &t_grid,
                EngineKind::Symmetric,
                closure,
                None,
                true,
            )
            .unwrap();
            assert!(
                !run.violation,
                "bound violated at n = {n} ({closure}): min margin {:.3e}",
                run.min_margin
            );
            for (i, (&d, &b)) in run.distances.iter().zip(&run.bound_values).enumerate() {
                assert!(
                    d <= b + run.violation_tolerance,
                    "n = {n}, t = {}: {d:.3e} > bound {b:.3e}",
                    run.times[i]
                );
            }
            println!(
                "  n = {n:4} ({closure}): max distance {:.3e}, min margin {:.3e}",
                run.max_distance, run.min_margin
            );
        }
    }
    budget("criterion 2 (error bound)", started, 60.0);
}

/// 3. Convergence to the mean-field dual: log-log slope of distance vs n−1
///    at t = 1 sits in [−1.2, −0.8] across n = 8…4096.
#[test]
fn criterion_03_convergence_scaling() {
    let started = Instant::now();
    let schedule = canonical_schedule(1.0);
    let n_list: Vec<usize> = (3..=12).map(|k| 1usize << k).collect(); // 8..4096
    let report = scaling_fit(
        canonical_phi(),
        &schedule,
        &n_list,
        1.0,
        EngineKind::Symmetric,
        MfClosure::ReplicaDriven,
        None,
    )
    .unwrap();
    println!(
        "  slope {:.4}, intercept {:.4}, {} excluded of {}",
        report.slope,
        report.intercept,
        report.excluded,
        report.points.len()
    );
    assert!(
        (-1.2..=-0.8).contains(&report.slope),
        "slope {} outside [-1.2, -0.8]",
        report.slope
    );
    budget("criterion 3 (1/(n-1) scaling)", started, 300.0);
}

/// 4. Torsion frequency 2·V₁·x₀ with the sign following the projection.
#[test]
fn criterion_04_torsion_frequency() {
    let started = Instant::now();
    let v = pv(1.0, 0.0, 0.0);
    for &x0 in &[1.0f64, -1.0, 0.5, -0.5] {
        let run = run_torsion_point(&PauliVector::ZERO, &v, 1, x0, None).unwrap();
        let expected = 2.0 * x0;
        let rel = (run.omega_measured - expected).abs() / expected.abs();
        println!(
            "  x0 = {x0:+.1}: omega = {:+.6} (expected {expected:+.1}, rel err {rel:.2e})",
            run.omega_measured
        );
        assert!(rel < 1e-3, "x0 = {x0}: relative error {rel:.3e} ≥ 1e-3");
        assert_eq!(
            run.omega_measured.signum(),
            expected.signum(),
            "sign must flip with the projection"
        );
    }
    budget("criterion 4 (torsion frequency)", started, 10.0);
}

/// 5. Operator-spreading bound: no sampled commutator-growth ratio exceeds
///    (e^{4·V_m·t} − 1)/(n − 1) across n, support size, and time.
#[test]
fn criterion_05_lieb_robinson_bound() {
    let started = Instant::now();
    let schedule = canonical_schedule(0.5);
    let mut total_violations = 0;
    let mut worst_fraction = 0.0f64;
    for n in 4..=8usize {
        for k in [1usize, 2] {
            for &t in &[0.1f64, 0.2, 0.5] {
                let cell = lr_check(&schedule, n, k, t, 200, 20_240).unwrap();
                total_violations += cell.violations;
                worst_fraction = worst_fraction.max(cell.max_ratio / cell.bound);
            }
        }
    }
    println!(
        "  30 cells x 200 samples: {total_violations} violations, worst ratio/bound {worst_fraction:.3}"
    );
    assert_eq!(total_violations, 0);
    budget("criterion 5 (Lieb-Robinson bound)", started, 180.0);
}

/// 6. Covariance decay: sampled two-point covariances stay under
///    ‖K₁‖₁‖K₂‖₁(e^{8·V_m·t} − 1)/(n − 1).
#[test]
fn criterion_06_covariance_decay() {
    let started = Instant::now();
    let schedule = canonical_schedule(0.3);
    let phi = canonical_phi();
    for &t in &[0.1f64, 0.3] {
        let cell = covariance_check(phi, &schedule, 6, t, 500, 60_461, None).unwrap();
        println!(
            "  t = {t}: max |cov| {:.3e}, worst margin {:.3e}, {} violations",
            cell.max_abs_covariance, cell.worst_margin, cell.violations
        );
        assert_eq!(
            cell.violations, 0,
            "t = {t}: {} violations",
            cell.violations
        );
        assert!(cell.worst_margin > 0.0);
    }
    budget("criterion 6 (covariance decay)", started, 120.0);
}

/// 7. The first hierarchy equation closes on both engines: central
///    difference vs commutator form, with the O(δ²) signature.
#[test]
fn criterion_07_bbgky_residual() {
    let started = Instant::now();
    let schedule = Schedule::constant(pv(0.2, 0.15, 0.3), pv(0.25, 0.2, 0.3), 1.0).unwrap();
    let phi = canonical_phi();
    for (engine, n) in [(EngineKind::Full, 8usize), (EngineKind::Symmetric, 4096)] {
        let r1 = bbgky_residual(phi, &schedule, n, 0.5, 1e-3, engine, None).unwrap();
        let r2 = bbgky_residual(phi, &schedule, n, 0.5, 5e-4, engine, None).unwrap();
        println!(
            "  {engine} engine, n = {n}: residual {r1:.3e} at delta 1e-3, {r2:.3e} at 5e-4 (x{:.2})",
            r1 / r2
        );
        assert!(r1 < 1e-5, "{engine} n = {n}: residual {r1:.3e} ≥ 1e-5");
        assert!(
            r1 / r2 >= 3.5,
            "{engine} n = {n}: halving delta only gained {:.2}x",
            r1 / r2
        );
    }
    budget("criterion 7 (hierarchy residual)", started, 60.0);
}

/// 8. Mean-field invariants: purity pinned to 1 over long runs on random
///    drives, and the v = 0 limit reproduces the closed-form rotation.
#[test]
fn criterion_08_meanfield_invariants() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst_purity = 0.0f64;
    for _ in 0..20 {
        let schedule = random_schedule(&mut rng, 10.0, 1.0);
        let phi = random_phi(&mut rng);
        let x0 = duality_core::pauli::QubitDensity::pure(phi)
            .unwrap()
            .bloch();
        let traj = mf_integrate_bloch(
            x0,
            &schedule,
            &grid(10.0, 20),
            schedule.bounds().default_dt(),
        )
        .unwrap();
        worst_purity = worst_purity
            .max(traj.max_purity_error())
            .max(traj.norm_drift());
    }
    println!("  worst purity defect / norm drift over 20 drives: {worst_purity:.3e}");
    assert!(worst_purity < 1e-9);

    // Linear limit against the closed-form rotation.
    let h0 = pv(0.3, -0.2, 0.6);
    let schedule = Schedule::constant(h0, PauliVector::ZERO, 10.0).unwrap();
    let r0 = [0.6, 0.0, 0.8];
    let traj = mf_integrate_bloch(
        r0,
        &schedule,
        &grid(10.0, 40),
        schedule.bounds().default_dt(),
    )
    .unwrap();
    let axis = h0.components().map(|c| c / h0.norm());
    let mut worst_lin = 0.0f64;
    for (t, r) in traj.times().iter().zip(traj.blochs()) {
        let e = rotate_bloch(r0, axis, 2.0 * h0.norm() * t);
        let d: f64 = r
            .iter()
            .zip(&e)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        worst_lin = worst_lin.max(d);
    }
    println!("  worst linear-limit deviation from closed form: {worst_lin:.3e}");
    assert!(worst_lin < 1e-8);
    budget("criterion 8 (mean-field invariants)", started, 30.0);
}

/// 9. Expansive dynamics: pure z torsion drives a Δz = 0.2 pair apart by
///    more than 5% within t ≤ 5.
#[test]
fn criterion_09_expansive_dynamics() {
    let started = Instant::now();
    let schedule = Schedule::constant(PauliVector::ZERO, pv(0.0, 0.0, 1.0), 5.0).unwrap();
    let za = 0.8f64;
    let zb = 0.6f64;
    let phi_a = pure_from_bloch([(1.0 - za * za).sqrt(), 0.0, za]).unwrap();
    let phi_b = pure_from_bloch([(1.0 - zb * zb).sqrt(), 0.0, zb]).unwrap();
    let series = expansive_demo(phi_a, phi_b, &schedule, &grid(5.0, 50), None).unwrap();
    println!(
        "  d0 = {:.4}, max ratio {:.3} at z-torsion with dz = 0.2",
        series.d0, series.max_ratio
    );
    assert!(
        series.max_ratio > 1.05,
        "max distance ratio {:.4} ≤ 1.05",
        series.max_ratio
    );
    budget("criterion 9 (expansive dynamics)", started, 10.0);
}

/// 10. Determinism: the same scenario and seed produce byte-identical CSVs.
#[test]
fn criterion_10_determinism() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("canonical.json");
    std::fs::write(
        &config,
        serde_json::to_string_pretty(&serde_json::json!({
            "name": "canonical",
            "n": 64,
            "phi": [0.9486832980505138, 0.0, 0.31622776601683794, 0.0],
            "schedule": {"segments": [
                {"t_start": 0.0, "h0": [0.0, 0.0, 1.0], "v": [1.0, 0.0, 0.0]}
            ]},
            "t_final": 1.0,
            "out_step": 0.05,
            "engine": "symmetric",
            "seed": 12345
        }))
        .unwrap(),
    )
    .unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("out{run}"));
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_duality-lab"))
            .args(["duality", "--config"])
            .arg(&config)
            .arg("--out-dir")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(out.join("canonical.duality.csv")).unwrap());
    }
    assert_eq!(
        outputs[0], outputs[1],
        "repeated runs must be byte-identical"
    );
    println!("  two runs, {} identical CSV bytes", outputs[0].len());
    budget("criterion 10 (determinism)", started, 60.0);
}
