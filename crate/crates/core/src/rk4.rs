//! Shared fixed-step RK4 machinery.
//!
//! Both state-vector engines and the Bloch-vector integrator advance through
//! the same step plan: within each constant-coupling window the interval is
//! split into equal steps no longer than `dt_max`, landing exactly on window
//! ends. Using one plan for every integrator keeps their discretizations of
//! the same flow identical, which the cross-engine tolerance checks rely on.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pauli::PauliVector;
use crate::schedule::Schedule;

/// One constant-coupling stretch of an integration, already cut into equal
/// RK4 steps.
#[derive(Clone, Copy, Debug)]
pub(crate) struct StepWindow {
    pub h0: PauliVector,
    pub v: PauliVector,
    pub step: f64,
    pub count: usize,
}

/// Cut [t0, t1] at schedule breakpoints and into steps ≤ dt_max.
pub(crate) fn plan_steps(
    schedule: &Schedule,
    t0: f64,
    t1: f64,
    dt_max: f64,
) -> Result<Vec<StepWindow>> {
    if !dt_max.is_finite() || dt_max <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "step size {dt_max} must be > 0"
        )));
    }
    if t1 < t0 {
        return Err(Error::InvalidInput(format!(
            "target time {t1} precedes current time {t0}"
        )));
    }
    if t1 > schedule.horizon() {
        return Err(Error::OutOfRange {
            t: t1,
            horizon: schedule.horizon(),
        });
    }
    let mut windows = Vec::new();
    let mut t = t0;
    // Relative slack so breakpoint landings don't spawn empty windows.
    let eps = 1e-12 * (1.0 + t1.abs());
    while t < t1 - eps {
        let (h0, v, end) = schedule.window(t)?;
        let stop = end.min(t1);
        let span = stop - t;
        let count = (span / dt_max).ceil().max(1.0) as usize;
        windows.push(StepWindow {
            h0,
            v,
            step: span / count as f64,
            count,
        });
        t = stop;
    }
    Ok(windows)
}

/// Scratch buffers for RK4 on a complex state vector.
pub(crate) struct Rk4Workspace {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4Workspace {
    pub fn new(dim: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); dim];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }
}

/// Advance `psi` from `time` to `t_target` under dψ/dt = −iH(t)ψ, where
/// `apply` computes out = H(h0, v)·in. The state is renormalized after every
/// step; the summed pre-renormalization norm drift is returned.
///
/// Within each constant window the integration runs in the frame shifted by
/// the conserved mean energy Ē = ⟨ψ|Hψ⟩ at window entry — a pure global
/// phase. The collective field gives the sector Hamiltonian a mean energy
/// that grows with n; removing it lets the step resolve only the spectral
/// width of the state. Both engines share the shift (the sector embedding
/// intertwines it exactly), so their discretizations stay identical.
pub(crate) fn evolve_schedule<F>(
    psi: &mut [C64],
    time: &mut f64,
    schedule: &Schedule,
    t_target: f64,
    dt_max: f64,
    ws: &mut Rk4Workspace,
    mut apply: F,
) -> Result<f64>
where
    F: FnMut(&mut [C64], &[C64], &PauliVector, &PauliVector),
{
    let windows = plan_steps(schedule, *time, t_target, dt_max)?;
    let mut drift = 0.0;
    for w in &windows {
        apply(&mut ws.k1, psi, &w.h0, &w.v);
        let mean_energy: f64 = psi
            .iter()
            .zip(ws.k1.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        for _ in 0..w.count {
            drift += rk4_step(psi, w.step, &w.h0, &w.v, mean_energy, ws, &mut apply);
        }
    }
    *time = t_target;
    Ok(drift)
}

fn rk4_step<F>(
    psi: &mut [C64],
    h: f64,
    h0: &PauliVector,
    v: &PauliVector,
    mean_energy: f64,
    ws: &mut Rk4Workspace,
    apply: &mut F,
) -> f64
where
    F: FnMut(&mut [C64], &[C64], &PauliVector, &PauliVector),
{
    let mi = C64::new(0.0, -1.0); // dψ/dt = −i (H − Ē) ψ
    let half = mi * (0.5 * h);
    let full = mi * h;

    apply(&mut ws.k1, psi, h0, v);
    for i in 0..psi.len() {
        ws.k1[i] -= mean_energy * psi[i];
        ws.tmp[i] = psi[i] + half * ws.k1[i];
    }
    apply(&mut ws.k2, &ws.tmp, h0, v);
    for i in 0..psi.len() {
        ws.k2[i] -= mean_energy * ws.tmp[i];
    }
    for i in 0..psi.len() {
        ws.tmp[i] = psi[i] + half * ws.k2[i];
    }
    apply(&mut ws.k3, &ws.tmp, h0, v);
    for i in 0..psi.len() {
        ws.k3[i] -= mean_energy * ws.tmp[i];
    }
    for i in 0..psi.len() {
        ws.tmp[i] = psi[i] + full * ws.k3[i];
    }
    apply(&mut ws.k4, &ws.tmp, h0, v);
    for i in 0..psi.len() {
        ws.k4[i] -= mean_energy * ws.tmp[i];
    }

    let w = mi * (h / 6.0);
    for i in 0..psi.len() {
        psi[i] += w * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
    }

    let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let scale = 1.0 / norm;
    for a in psi.iter_mut() {
        *a *= scale;
    }
    (norm - 1.0).abs()
}
