//! Nonlinear single-qubit master equation dX/dt = −i[H_eff(X), X] with
//! H_eff(X) = H⁰ + Σ_μ v_μ tr(X σ^μ) σ^μ, integrated in Bloch coordinates,
//! plus torsion (state-dependent rotation) analysis of the resulting flow.
//!
//! In Bloch form the equation reads ṙ = 2 (h0 + v∘r) × r (∘ elementwise);
//! trace and Hermiticity are structural in this parameterization, leaving
//! purity as the only monitored invariant.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pauli::{mat_commutator, mat_scale, Mat2, PauliVector, QubitDensity, SmallOperator};
use crate::rk4::plan_steps;
use crate::schedule::Schedule;

/// Mean-field states sampled on a time grid.
#[derive(Clone, Debug)]
pub struct MeanFieldTrajectory {
    times: Vec<f64>,
    blochs: Vec<[f64; 3]>,
    schedule: Schedule,
    norm_drift: f64,
}

impl MeanFieldTrajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn blochs(&self) -> &[[f64; 3]] {
        &self.blochs
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, i: usize) -> Result<QubitDensity> {
        QubitDensity::from_bloch(self.blochs[i])
    }

    /// Worst sampled purity defect |tr X² − 1|.
    pub fn max_purity_error(&self) -> f64 {
        self.blochs
            .iter()
            .map(|r| {
                let r2: f64 = r.iter().map(|c| c * c).sum();
                (0.5 * (1.0 + r2) - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Accumulated pre-renormalization drift of ‖r‖ over all steps.
    pub fn norm_drift(&self) -> f64 {
        self.norm_drift
    }
}

/// Effective field H_eff(X) = H⁰ + Σ_μ v_μ r_μ σ^μ as an operator on the
/// central qubit.
pub fn h_eff(x: &QubitDensity, h0: &PauliVector, v: &PauliVector) -> SmallOperator {
    let pv = h_eff_vector(&x.bloch(), h0, v);
    SmallOperator::one_qubit(1, pv.matrix()).expect("finite by construction")
}

fn h_eff_vector(r: &[f64; 3], h0: &PauliVector, v: &PauliVector) -> PauliVector {
    let h = h0.components();
    let vv = v.components();
    PauliVector([
        h[0] + vv[0] * r[0],
        h[1] + vv[1] * r[1],
        h[2] + vv[2] * r[2],
    ])
}

/// dX/dt as a matrix, −i[H_eff(X), X]: traceless Hermitian.
pub fn mf_rhs_matrix(x: &QubitDensity, h0: &PauliVector, v: &PauliVector) -> Mat2 {
    let heff = h_eff_vector(&x.bloch(), h0, v).matrix();
    mat_scale(C64::new(0.0, -1.0), &mat_commutator(&heff, &x.matrix()))
}

/// dr/dt in Bloch form, 2 (h0 + v∘r) × r. Must agree with the commutator
/// form entrywise; a property test enforces it.
pub fn mf_rhs_bloch(r: [f64; 3], h0: &PauliVector, v: &PauliVector) -> [f64; 3] {
    let b = h_eff_vector(&r, h0, v).components();
    [
        2.0 * (b[1] * r[2] - b[2] * r[1]),
        2.0 * (b[2] * r[0] - b[0] * r[2]),
        2.0 * (b[0] * r[1] - b[1] * r[0]),
    ]
}

/// Integrate the master equation from the pure state |φ⟩⟨φ| and sample on
/// `t_grid` (nondecreasing, within the schedule). RK4 with the shared step
/// policy; ‖r‖ is renormalized to 1 after every step.
pub fn mf_integrate(
    phi: [C64; 2],
    schedule: &Schedule,
    t_grid: &[f64],
    dt: f64,
) -> Result<MeanFieldTrajectory> {
    let x0 = QubitDensity::pure(phi)?;
    mf_integrate_bloch(x0.bloch(), schedule, t_grid, dt)
}

/// Same integration from a unit Bloch vector.
pub fn mf_integrate_bloch(
    r0: [f64; 3],
    schedule: &Schedule,
    t_grid: &[f64],
    dt: f64,
) -> Result<MeanFieldTrajectory> {
    let norm = (r0.iter().map(|c| c * c).sum::<f64>()).sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "mean-field initial Bloch vector must be unit length, got {norm}"
        )));
    }
    if t_grid.is_empty() {
        return Err(Error::InvalidInput("empty output grid".into()));
    }
    for w in t_grid.windows(2) {
        if w[1] < w[0] {
            return Err(Error::InvalidInput(
                "output grid must be nondecreasing".into(),
            ));
        }
    }
    let mut r = [r0[0] / norm, r0[1] / norm, r0[2] / norm];
    let mut t = 0.0;
    let mut drift = 0.0;
    let mut times = Vec::with_capacity(t_grid.len());
    let mut blochs = Vec::with_capacity(t_grid.len());
    for &tg in t_grid {
        for w in plan_steps(schedule, t, tg, dt)? {
            for _ in 0..w.count {
                drift += bloch_rk4_step(&mut r, w.step, &w.h0, &w.v);
            }
        }
        t = tg;
        times.push(tg);
        blochs.push(r);
    }
    Ok(MeanFieldTrajectory {
        times,
        blochs,
        schedule: schedule.clone(),
        norm_drift: drift,
    })
}

/// Integrate the central state under the **replica-driven** effective field
/// H⁰(t) + Σ_μ v_μ m_μ(t) σ^μ, where m(t) is the order parameter of a
/// replica precessing freely under H⁰ alone.
///
/// In the lattice model each replica couples back to the central qubit with
/// strength 1/(n−1), so in the large-n limit the replicas evolve as if
/// uncoupled and the central qubit sees *their* order parameter rather than
/// its own. This flow coincides with [`mf_integrate`] exactly when the
/// coupling is single-axis with a parallel (or zero) field — both flows then
/// preserve the driving component — and differs at O(1) for generic drives.
pub fn mf_integrate_driven(
    phi: [C64; 2],
    schedule: &Schedule,
    t_grid: &[f64],
    dt: f64,
) -> Result<MeanFieldTrajectory> {
    let x0 = QubitDensity::pure(phi)?;
    let r0 = x0.bloch();
    if t_grid.is_empty() {
        return Err(Error::InvalidInput("empty output grid".into()));
    }
    for w in t_grid.windows(2) {
        if w[1] < w[0] {
            return Err(Error::InvalidInput(
                "output grid must be nondecreasing".into(),
            ));
        }
    }
    let mut r = r0;
    let mut m = r0;
    let mut t = 0.0;
    let mut drift = 0.0;
    let mut times = Vec::with_capacity(t_grid.len());
    let mut blochs = Vec::with_capacity(t_grid.len());
    for &tg in t_grid {
        for w in plan_steps(schedule, t, tg, dt)? {
            for _ in 0..w.count {
                drift += driven_rk4_step(&mut r, &mut m, w.step, &w.h0, &w.v);
            }
        }
        t = tg;
        times.push(tg);
        blochs.push(r);
    }
    Ok(MeanFieldTrajectory {
        times,
        blochs,
        schedule: schedule.clone(),
        norm_drift: drift,
    })
}

/// One RK4 step of the joint system ṙ = 2(h0 + v∘m)×r, ṁ = 2 h0×m.
fn driven_rk4_step(
    r: &mut [f64; 3],
    m: &mut [f64; 3],
    h: f64,
    h0: &PauliVector,
    v: &PauliVector,
) -> f64 {
    let hc = h0.components();
    let vc = v.components();
    let f = |r: &[f64; 3], m: &[f64; 3]| -> ([f64; 3], [f64; 3]) {
        let b = [
            hc[0] + vc[0] * m[0],
            hc[1] + vc[1] * m[1],
            hc[2] + vc[2] * m[2],
        ];
        let dr = [
            2.0 * (b[1] * r[2] - b[2] * r[1]),
            2.0 * (b[2] * r[0] - b[0] * r[2]),
            2.0 * (b[0] * r[1] - b[1] * r[0]),
        ];
        let dm = [
            2.0 * (hc[1] * m[2] - hc[2] * m[1]),
            2.0 * (hc[2] * m[0] - hc[0] * m[2]),
            2.0 * (hc[0] * m[1] - hc[1] * m[0]),
        ];
        (dr, dm)
    };
    let ax =
        |a: &[f64; 3], s: f64, b: &[f64; 3]| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let (kr1, km1) = f(r, m);
    let (kr2, km2) = f(&ax(r, 0.5 * h, &kr1), &ax(m, 0.5 * h, &km1));
    let (kr3, km3) = f(&ax(r, 0.5 * h, &kr2), &ax(m, 0.5 * h, &km2));
    let (kr4, km4) = f(&ax(r, h, &kr3), &ax(m, h, &km3));
    for i in 0..3 {
        r[i] += h / 6.0 * (kr1[i] + 2.0 * kr2[i] + 2.0 * kr3[i] + kr4[i]);
        m[i] += h / 6.0 * (km1[i] + 2.0 * km2[i] + 2.0 * km3[i] + km4[i]);
    }
    let rn = (r.iter().map(|c| c * c).sum::<f64>()).sqrt();
    let mn = (m.iter().map(|c| c * c).sum::<f64>()).sqrt();
    for c in r.iter_mut() {
        *c /= rn;
    }
    for c in m.iter_mut() {
        *c /= mn;
    }
    (rn - 1.0).abs().max((mn - 1.0).abs())
}

fn bloch_rk4_step(r: &mut [f64; 3], h: f64, h0: &PauliVector, v: &PauliVector) -> f64 {
    let ax =
        |a: &[f64; 3], s: f64, b: &[f64; 3]| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let k1 = mf_rhs_bloch(*r, h0, v);
    let k2 = mf_rhs_bloch(ax(r, 0.5 * h, &k1), h0, v);
    let k3 = mf_rhs_bloch(ax(r, 0.5 * h, &k2), h0, v);
    let k4 = mf_rhs_bloch(ax(r, h, &k3), h0, v);
    for i in 0..3 {
        r[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    let norm = (r.iter().map(|c| c * c).sum::<f64>()).sqrt();
    for c in r.iter_mut() {
        *c /= norm;
    }
    (norm - 1.0).abs()
}

/// Rotate a Bloch vector by `angle` about a unit axis (Rodrigues formula).
/// Closed form for the linear (v = 0) limit: r(t) = R(2‖h0‖t, ĥ0) r(0).
pub fn rotate_bloch(r: [f64; 3], axis: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    let dot = axis[0] * r[0] + axis[1] * r[1] + axis[2] * r[2];
    let cross = [
        axis[1] * r[2] - axis[2] * r[1],
        axis[2] * r[0] - axis[0] * r[2],
        axis[0] * r[1] - axis[1] * r[0],
    ];
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = r[i] * c + cross[i] * s + axis[i] * dot * (1.0 - c);
    }
    out
}

/// Signed angular frequency of the Bloch components transverse to `axis`
/// (1 = x, 2 = y, 3 = z), estimated by phase-unwrapped linear regression.
///
/// The trajectory must come from a single-axis drive so the transverse pair
/// rotates rigidly; samples with transverse amplitude below 1e−6 make the
/// phase meaningless and are an error.
pub fn torsion_frequency(traj: &MeanFieldTrajectory, axis: usize) -> Result<f64> {
    if !(1..=3).contains(&axis) {
        return Err(Error::InvalidInput(format!(
            "axis {axis} must be 1, 2, or 3"
        )));
    }
    if traj.len() < 4 {
        return Err(Error::InvalidInput(
            "need ≥ 4 trajectory samples for a frequency fit".into(),
        ));
    }
    let p = axis % 3; // first transverse component, cyclic
    let q = (axis + 1) % 3;
    let mut phases = Vec::with_capacity(traj.len());
    for r in traj.blochs() {
        let amp = (r[p] * r[p] + r[q] * r[q]).sqrt();
        if amp < 1e-6 {
            return Err(Error::UndefinedFrequency(amp));
        }
        phases.push(r[q].atan2(r[p]));
    }
    // Unwrap modulo 2π jumps.
    let two_pi = std::f64::consts::TAU;
    let mut unwrapped = vec![phases[0]];
    for i in 1..phases.len() {
        let mut d = phases[i] - phases[i - 1];
        while d > std::f64::consts::PI {
            d -= two_pi;
        }
        while d < -std::f64::consts::PI {
            d += two_pi;
        }
        unwrapped.push(unwrapped[i - 1] + d);
    }
    let ts = traj.times();
    let tbar = ts.iter().sum::<f64>() / ts.len() as f64;
    let pbar = unwrapped.iter().sum::<f64>() / unwrapped.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, ph) in ts.iter().zip(&unwrapped) {
        num += (t - tbar) * (ph - pbar);
        den += (t - tbar) * (t - tbar);
    }
    if den == 0.0 {
        return Err(Error::InvalidInput("degenerate time grid".into()));
    }
    Ok(num / den)
}

/// On-axis projections |x₀| are pulled this far inside the sphere so that a
/// nominally on-axis torsion state still carries a measurable transverse
/// component; the frequency bias is the same 1e−6 relative.
pub const TORSION_TILT: f64 = 1e-6;

/// Initial Bloch vector with projection `x0` on `axis` and the remainder two
/// axes over (cyclically), e.g. axis 1 with x0 = 0.5 gives (0.5, 0, √0.75).
pub fn torsion_initial_bloch(axis: usize, x0: f64) -> Result<[f64; 3]> {
    if !(1..=3).contains(&axis) {
        return Err(Error::InvalidInput(format!(
            "axis {axis} must be 1, 2, or 3"
        )));
    }
    if !(-1.0..=1.0).contains(&x0) {
        return Err(Error::InvalidInput(format!(
            "axis projection {x0} outside [−1, 1]"
        )));
    }
    let max = 1.0 - TORSION_TILT;
    let x_eff = x0.clamp(-max, max);
    let mut r = [0.0; 3];
    r[axis - 1] = x_eff;
    r[(axis + 1) % 3] = (1.0 - x_eff * x_eff).sqrt();
    Ok(r)
}

/// One torsion measurement: drive with constant single-axis couplings, place
/// the state at axis projection `x0`, and fit the transverse rotation rate.
#[derive(Clone, Copy, Debug)]
pub struct TorsionRun {
    pub x0: f64,
    pub x_eff: f64,
    pub omega_expected: f64,
    pub omega_measured: f64,
    pub t_final: f64,
}

/// Measure the rotation frequency for single-axis couplings h0, v along
/// `axis`; expected frequency is 2(h_axis + v_axis·x_eff).
pub fn run_torsion_point(
    h0: &PauliVector,
    v: &PauliVector,
    axis: usize,
    x0: f64,
    dt_override: Option<f64>,
) -> Result<TorsionRun> {
    if !(1..=3).contains(&axis) {
        return Err(Error::InvalidInput(format!(
            "axis {axis} must be 1, 2, or 3"
        )));
    }
    for (mu, (hc, vc)) in h0.components().iter().zip(v.components()).enumerate() {
        if mu + 1 != axis && (hc.abs() > 1e-12 || vc.abs() > 1e-12) {
            return Err(Error::InvalidInput(format!(
                "torsion run needs single-axis couplings; axis {} has h0 = {hc}, v = {vc}",
                mu + 1
            )));
        }
    }
    let r0 = torsion_initial_bloch(axis, x0)?;
    let x_eff = r0[axis - 1];
    let omega_expected = 2.0 * (h0.components()[axis - 1] + v.components()[axis - 1] * x_eff);
    let t_final = if omega_expected.abs() > 1e-3 {
        3.0 * std::f64::consts::TAU / omega_expected.abs()
    } else {
        10.0
    };
    let schedule = Schedule::constant(*h0, *v, t_final)?;
    let dt = dt_override.unwrap_or_else(|| schedule.bounds().default_dt());
    let samples = 96;
    let grid: Vec<f64> = (0..=samples)
        .map(|i| t_final * i as f64 / samples as f64)
        .collect();
    let traj = mf_integrate_bloch(r0, &schedule, &grid, dt)?;
    let omega_measured = torsion_frequency(&traj, axis)?;
    Ok(TorsionRun {
        x0,
        x_eff,
        omega_expected,
        omega_measured,
        t_final,
    })
}
