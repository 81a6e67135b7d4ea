//! Verification layer: trace-distance series against the closed-form error
//! bound, operator-spreading (Lieb-Robinson) and covariance sampling checks,
//! the first-level hierarchy residual, and 1/(n−1) scaling fits.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dense::{
    dense_unitary, leading_mul_left, leading_mul_right, mat2_to_dense, trace_norm_antihermitian,
    DENSE_MAX_QUBITS,
};
use crate::error::{Error, Result};
use crate::full::FullState;
use crate::meanfield::{mf_integrate, mf_integrate_driven, MeanFieldTrajectory};
use crate::pauli::{
    mat_commutator, mat_scale, mat_sub, pair_interaction_matrix, ptrace_second, trace_distance,
    trace_norm2, trace_norm4, Mat2, Mat4, PauliVector, QubitDensity, SmallOperator, SIGMA,
};
use crate::schedule::{Schedule, ScheduleBounds};
use crate::sector::SectorState;
use nalgebra::DMatrix;

/// Which exact engine evolves the lattice state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineKind {
    Full,
    Symmetric,
}

impl std::fmt::Display for EngineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EngineKind::Full => write!(f, "full"),
            EngineKind::Symmetric => write!(f, "symmetric"),
        }
    }
}

/// Which mean-field closure supplies X(t) for the comparison.
///
/// `SelfConsistent` is the master equation with the effective field built
/// from X's own order parameter. `ReplicaDriven` builds the field from a
/// freely precessing replica: because each replica couples back at strength
/// 1/(n−1), this is the flow the exact marginal converges to as n → ∞. The
/// two coincide for single-axis couplings with a parallel (or zero) field
/// and differ at O(1) for generic drives — only the replica-driven distance
/// vanishes with n in those cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MfClosure {
    SelfConsistent,
    ReplicaDriven,
}

impl std::fmt::Display for MfClosure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MfClosure::SelfConsistent => write!(f, "self-consistent"),
            MfClosure::ReplicaDriven => write!(f, "replica-driven"),
        }
    }
}

fn integrate_closure(
    closure: MfClosure,
    phi: [C64; 2],
    schedule: &Schedule,
    t_grid: &[f64],
    dt: f64,
) -> crate::Result<MeanFieldTrajectory> {
    match closure {
        MfClosure::SelfConsistent => mf_integrate(phi, schedule, t_grid, dt),
        MfClosure::ReplicaDriven => mf_integrate_driven(phi, schedule, t_grid, dt),
    }
}

/// Absolute noise floor on distance comparisons: the rounding the RK4
/// renormalization accumulates over ~10⁴ steps.
const DISTANCE_FLOOR: f64 = 1e-9;

/// Closed-form mean-field error bound (6 V★/V_m)·(e^{8 V_m t} − 1)/(n − 1);
/// zero interaction means exact duality, so v_m = 0 returns 0.
pub fn es_bound(t: f64, n: usize, b: &ScheduleBounds) -> f64 {
    debug_assert!(t >= 0.0 && n >= 2);
    if b.v_m == 0.0 {
        return 0.0;
    }
    (6.0 * b.v_star / b.v_m) * (8.0 * b.v_m * t).exp_m1() / (n as f64 - 1.0)
}

/// A mean-field vs exact comparison sampled on a shared time grid.
#[derive(Clone, Debug)]
pub struct DualityRun {
    pub n: usize,
    pub engine: EngineKind,
    pub closure: MfClosure,
    pub times: Vec<f64>,
    pub mf_bloch: Vec<[f64; 3]>,
    pub exact_bloch: Vec<[f64; 3]>,
    pub distances: Vec<f64>,
    pub bound_values: Vec<f64>,
    /// Richardson (dt vs dt/2) estimate of the discretization error in the
    /// distance series; 0.0 when estimation was skipped.
    pub integrator_error: f64,
    /// Slack used for the violation flag: 10× the integrator error plus the
    /// rounding floor.
    pub violation_tolerance: f64,
    pub max_distance: f64,
    /// min over the grid of (bound − distance).
    pub min_margin: f64,
    pub violation: bool,
}

fn exact_bloch_series(
    phi: [C64; 2],
    schedule: &Schedule,
    n: usize,
    t_grid: &[f64],
    engine: EngineKind,
    dt: f64,
) -> Result<Vec<[f64; 3]>> {
    let mut out = Vec::with_capacity(t_grid.len());
    match engine {
        EngineKind::Full => {
            let mut st = FullState::product_init(phi, n)?;
            for &t in t_grid {
                st.propagate(schedule, t, dt)?;
                out.push(st.reduced_central()?.bloch());
            }
        }
        EngineKind::Symmetric => {
            let mut st = SectorState::coherent_init(phi, n)?;
            for &t in t_grid {
                st.propagate(schedule, t, dt)?;
                out.push(st.reduced_central()?.bloch());
            }
        }
    }
    Ok(out)
}

fn bloch_distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    // Trace distance of qubit states is the Euclidean Bloch distance.
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Evolve both pictures on `t_grid` and compare the central-qubit state
/// against the mean-field state pointwise.
#[allow(clippy::too_many_arguments)]
pub fn run_duality(
    phi: [C64; 2],
    schedule: &Schedule,
    n: usize,
    t_grid: &[f64],
    engine: EngineKind,
    closure: MfClosure,
    dt_override: Option<f64>,
    estimate_error: bool,
) -> Result<DualityRun> {
    if t_grid.is_empty() {
        return Err(Error::InvalidInput("empty output grid".into()));
    }
    let bounds = schedule.bounds();
    let dt = dt_override.unwrap_or_else(|| bounds.default_dt());
    let mf = integrate_closure(closure, phi, schedule, t_grid, dt)?;
    let exact = exact_bloch_series(phi, schedule, n, t_grid, engine, dt)?;

    let integrator_error = if estimate_error {
        let mf_half = integrate_closure(closure, phi, schedule, t_grid, 0.5 * dt)?;
        let exact_half = exact_bloch_series(phi, schedule, n, t_grid, engine, 0.5 * dt)?;
        let mut worst = 0.0f64;
        for i in 0..t_grid.len() {
            let e_mf = bloch_distance(&mf.blochs()[i], &mf_half.blochs()[i]);
            let e_ex = bloch_distance(&exact[i], &exact_half[i]);
            worst = worst.max(e_mf + e_ex);
        }
        worst
    } else {
        0.0
    };

    let mut distances = Vec::with_capacity(t_grid.len());
    let mut bound_values = Vec::with_capacity(t_grid.len());
    for i in 0..t_grid.len() {
        distances.push(bloch_distance(&mf.blochs()[i], &exact[i]));
        bound_values.push(es_bound(t_grid[i], n, &bounds));
    }
    // Floor at the accumulated-rounding scale of the two integrators, so
    // exactly-dual cases (bound = distance = 0) don't flag on 1e−13 noise.
    let violation_tolerance = 10.0 * integrator_error + DISTANCE_FLOOR;
    let max_distance = distances.iter().copied().fold(0.0, f64::max);
    let min_margin = distances
        .iter()
        .zip(&bound_values)
        .map(|(d, b)| b - d)
        .fold(f64::INFINITY, f64::min);
    let violation = distances
        .iter()
        .zip(&bound_values)
        .any(|(d, b)| *d > b + violation_tolerance);
    Ok(DualityRun {
        n,
        engine,
        closure,
        times: t_grid.to_vec(),
        mf_bloch: mf.blochs().to_vec(),
        exact_bloch: exact,
        distances,
        bound_values,
        integrator_error,
        violation_tolerance,
        max_distance,
        min_margin,
        violation,
    })
}

/// Least-squares line through (x, y) pairs; returns (slope, intercept).
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::FitUndefined(format!(
            "need ≥ 2 paired points, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - xbar) * (y - ybar);
        den += (x - xbar) * (x - xbar);
    }
    if den == 0.0 {
        return Err(Error::FitUndefined("degenerate abscissae".into()));
    }
    let slope = num / den;
    Ok((slope, ybar - slope * xbar))
}

/// One system size in a scaling sweep.
#[derive(Clone, Copy, Debug)]
pub struct ScalingPoint {
    pub n: usize,
    pub distance: f64,
    /// Richardson integrator-error estimate for this run.
    pub integrator_error: f64,
    pub included: bool,
}

/// log-log fit of mean-field error against n − 1 at a fixed time.
#[derive(Clone, Debug)]
pub struct ScalingReport {
    pub t_fixed: f64,
    pub points: Vec<ScalingPoint>,
    pub slope: f64,
    pub intercept: f64,
    pub excluded: usize,
}

/// Run the duality comparison at `t_fixed` for every n and fit
/// ln(distance) against ln(n − 1). Distances within 10× of the estimated
/// integrator error are excluded from the fit.
pub fn scaling_fit(
    phi: [C64; 2],
    schedule: &Schedule,
    n_list: &[usize],
    t_fixed: f64,
    engine: EngineKind,
    closure: MfClosure,
    dt_override: Option<f64>,
) -> Result<ScalingReport> {
    if n_list.len() < 3 {
        return Err(Error::FitUndefined(format!(
            "need ≥ 3 system sizes, got {}",
            n_list.len()
        )));
    }
    for w in n_list.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidInput("n_list must strictly increase".into()));
        }
    }
    if n_list[0] < 8 {
        return Err(Error::InvalidInput(format!(
            "scaling sweep needs n ≥ 8, got {}",
            n_list[0]
        )));
    }
    let grid = [t_fixed];
    let runs: Vec<Result<DualityRun>> = n_list
        .par_iter()
        .map(|&n| run_duality(phi, schedule, n, &grid, engine, closure, dt_override, true))
        .collect();
    let mut points = Vec::with_capacity(n_list.len());
    for run in runs {
        let run = run?;
        let distance = run.distances[0];
        let tol = run.integrator_error;
        points.push(ScalingPoint {
            n: run.n,
            distance,
            integrator_error: tol,
            included: distance >= 10.0 * tol && distance > 0.0,
        });
    }
    let xs: Vec<f64> = points
        .iter()
        .filter(|p| p.included)
        .map(|p| ((p.n - 1) as f64).ln())
        .collect();
    let ys: Vec<f64> = points
        .iter()
        .filter(|p| p.included)
        .map(|p| p.distance.ln())
        .collect();
    let excluded = points.len() - xs.len();
    if xs.len() < 3 {
        return Err(Error::FitUndefined(format!(
            "only {} of {} points rise above 10× the integrator error",
            xs.len(),
            points.len()
        )));
    }
    let (slope, intercept) = fit_line(&xs, &ys)?;
    Ok(ScalingReport {
        t_fixed,
        points,
        slope,
        intercept,
        excluded,
    })
}

/* Random observable sampling **************************************************/

fn random_hermitian<const N: usize>(rng: &mut ChaCha8Rng) -> [[C64; N]; N] {
    // G + G† with independent standard complex Gaussian entries of G.
    let mut g = [[C64::new(0.0, 0.0); N]; N];
    let scale = 0.5f64.sqrt();
    for row in g.iter_mut() {
        for e in row.iter_mut() {
            let re: f64 = rng.sample(rand_distr::StandardNormal);
            let im: f64 = rng.sample(rand_distr::StandardNormal);
            *e = C64::new(re * scale, im * scale);
        }
    }
    let mut a = [[C64::new(0.0, 0.0); N]; N];
    for r in 0..N {
        for c in 0..N {
            a[r][c] = g[r][c] + g[c][r].conj();
        }
    }
    a
}

fn sample_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Operator-spreading check for one (n, k, t) cell.
#[derive(Clone, Copy, Debug)]
pub struct LrCheck {
    pub n: usize,
    pub k: usize,
    pub t: f64,
    pub samples: usize,
    /// Largest sampled ‖[U_t†AU_t, B]‖₁ / (‖A‖₁‖B‖₁) — a lower estimate of
    /// the supremum.
    pub max_ratio: f64,
    pub bound: f64,
    pub violations: usize,
}

/// Sample random Hermitian A on qubits {1..k} (k ≤ 2) and B on qubit k+1,
/// and compare the commutator growth ratio against (e^{4V_m t} − 1)/(n−1).
///
/// Norm conventions: the commutator and ‖B‖₁ are full-lattice trace norms
/// (‖B⊗I‖₁ = 2^{n−1}‖B‖₁); ‖A‖₁ is taken on its 2^k-dimensional support,
/// matching the convention that puts the interaction into the bound through
/// its 4×4 norm V_m.
pub fn lr_check(
    schedule: &Schedule,
    n: usize,
    k: usize,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<LrCheck> {
    if k == 0 || k > 2 {
        return Err(Error::UnsupportedSupport(
            k,
            "random observables are drawn on supports of 1 or 2 qubits".into(),
        ));
    }
    if n < k + 2 {
        return Err(Error::InvalidInput(format!(
            "need n ≥ k + 2 = {} so qubit k+1 exists and replicas remain, got n = {n}",
            k + 2
        )));
    }
    if n > DENSE_MAX_QUBITS {
        return Err(Error::StateTooLarge {
            qubits: n,
            megabytes: (1usize << (2 * n.min(26))) * 16 / (1024 * 1024),
            cap: DENSE_MAX_QUBITS,
        });
    }
    let u = dense_unitary(n, schedule, t)?;
    // Conjugating by U_t turns [U†AU, B] into [A, U B U†]; precompute the
    // three evolved Pauli frames of qubit k+1.
    let evolved: Vec<DMatrix<C64>> = (0..3)
        .map(|mu| {
            let s = crate::dense::op_on_qubit(n, k + 1, &SIGMA[mu]);
            &u * s * u.adjoint()
        })
        .collect();
    let b_lattice_factor = (1u64 << (n - 1)) as f64;

    let ratios: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64 + 1);
            let (a_dense, a_norm) = if k == 1 {
                let a = random_hermitian::<2>(&mut rng);
                (mat2_to_dense(&a), trace_norm2(&a))
            } else {
                let a = random_hermitian::<4>(&mut rng);
                (DMatrix::from_fn(4, 4, |r, c| a[r][c]), trace_norm4(&a))
            };
            let b = random_hermitian::<2>(&mut rng);
            let b_norm = trace_norm2(&b);
            if a_norm < 1e-12 || b_norm < 1e-12 {
                return 0.0;
            }
            // Pauli components of B; the identity part commutes away.
            let mut evolved_b = DMatrix::<C64>::zeros(u.nrows(), u.ncols());
            for mu in 0..3 {
                let coeff = {
                    let p = SIGMA[mu];
                    0.5 * (b[0][0] * p[0][0]
                        + b[0][1] * p[1][0]
                        + b[1][0] * p[0][1]
                        + b[1][1] * p[1][1])
                };
                evolved_b += evolved[mu].map(|e| e * coeff);
            }
            let comm =
                leading_mul_left(&a_dense, &evolved_b) - leading_mul_right(&evolved_b, &a_dense);
            trace_norm_antihermitian(&comm) / (a_norm * b_norm * b_lattice_factor)
        })
        .collect();

    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let bound = (4.0 * schedule.bounds().v_m * t).exp_m1() / (n as f64 - 1.0);
    // The propagator is exact here; the slack only absorbs rounding.
    let slack = 1e-10 * (1.0 + bound);
    let violations = ratios.iter().filter(|&&r| r > bound + slack).count();
    Ok(LrCheck {
        n,
        k,
        t,
        samples,
        max_ratio,
        bound,
        violations,
    })
}

/// Covariance-decay check at one (n, t) cell.
#[derive(Clone, Copy, Debug)]
pub struct CovarianceCheck {
    pub n: usize,
    pub t: f64,
    pub samples: usize,
    pub max_abs_covariance: f64,
    /// min over samples of (per-sample bound − |covariance|); ≥ 0 means no
    /// violation.
    pub worst_margin: f64,
    pub violations: usize,
}

/// For random Hermitian K₁ (qubit 1) and K₂ (qubit 2) on the evolved product
/// state, check |⟨K₁K₂⟩ − ⟨K₁⟩⟨K₂⟩| ≤ ‖K₁‖₁‖K₂‖₁(e^{8V_m t} − 1)/(n−1).
pub fn covariance_check(
    phi: [C64; 2],
    schedule: &Schedule,
    n: usize,
    t: f64,
    samples: usize,
    seed: u64,
    dt_override: Option<f64>,
) -> Result<CovarianceCheck> {
    let bounds = schedule.bounds();
    let dt = dt_override.unwrap_or_else(|| bounds.default_dt());
    let mut st = FullState::product_init(phi, n)?;
    st.propagate(schedule, t, dt)?;
    let factor = (8.0 * bounds.v_m * t).exp_m1() / (n as f64 - 1.0);

    let results: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64 + 1);
            let k1 = random_hermitian::<2>(&mut rng);
            let k2 = random_hermitian::<2>(&mut rng);
            let op1 = SmallOperator::one_qubit(1, k1).expect("finite");
            let op2 = SmallOperator::one_qubit(2, k2).expect("finite");
            let e12 = st
                .expectation(&[op1.clone(), op2.clone()])
                .expect("disjoint supports");
            let e1 = st.expectation(std::slice::from_ref(&op1)).expect("valid");
            let e2 = st.expectation(std::slice::from_ref(&op2)).expect("valid");
            let cov = (e12 - e1 * e2).abs();
            let bound = trace_norm2(&k1) * trace_norm2(&k2) * factor;
            (cov, bound - cov)
        })
        .collect();

    let max_abs_covariance = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let worst_margin = results.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    // Expectation values carry integrator rounding ~1e−10; margins within
    // the floor of zero are noise, not violations.
    let violations = results.iter().filter(|r| r.1 < -DISTANCE_FLOOR).count();
    Ok(CovarianceCheck {
        n,
        t,
        samples,
        max_abs_covariance,
        worst_margin,
        violations,
    })
}

/// Trace-norm residual of the first hierarchy equation
/// dρᶜ/dt = −i[H⁰, ρᶜ] − i tr₂[V₁₂, ρ^{(12)}] at time t, with the time
/// derivative replaced by a central difference of half-width `delta`.
pub fn bbgky_residual(
    phi: [C64; 2],
    schedule: &Schedule,
    n: usize,
    t: f64,
    delta: f64,
    engine: EngineKind,
    dt_override: Option<f64>,
) -> Result<f64> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidInput(format!("delta {delta} must be > 0")));
    }
    if t - delta < 0.0 || t + delta > schedule.horizon() {
        return Err(Error::OutOfRange {
            t,
            horizon: schedule.horizon(),
        });
    }
    if !schedule.constant_over(t - delta, t + delta)? {
        return Err(Error::InvalidInput(format!(
            "central difference window [{}, {}] crosses a schedule breakpoint",
            t - delta,
            t + delta
        )));
    }
    let dt = dt_override.unwrap_or_else(|| schedule.bounds().default_dt());
    let (rho_minus, rho_mid, pair, rho_plus) = match engine {
        EngineKind::Full => {
            let mut st = FullState::product_init(phi, n)?;
            st.propagate(schedule, t - delta, dt)?;
            let rm = st.reduced_central()?.matrix();
            st.propagate(schedule, t, dt)?;
            let r0 = st.reduced_central()?.matrix();
            let pr = st.reduced_pair();
            st.propagate(schedule, t + delta, dt)?;
            let rp = st.reduced_central()?.matrix();
            (rm, r0, pr, rp)
        }
        EngineKind::Symmetric => {
            let mut st = SectorState::coherent_init(phi, n)?;
            st.propagate(schedule, t - delta, dt)?;
            let rm = st.reduced_central()?.matrix();
            st.propagate(schedule, t, dt)?;
            let r0 = st.reduced_central()?.matrix();
            let pr = st.reduced_pair()?;
            st.propagate(schedule, t + delta, dt)?;
            let rp = st.reduced_central()?.matrix();
            (rm, r0, pr, rp)
        }
    };
    let (h0, v) = schedule.sample(t)?;
    let derivative = finite_difference(&rho_plus, &rho_minus, delta);
    let rhs = bbgky_rhs(&h0, &v, &rho_mid, &pair);
    Ok(trace_norm2(&mat_sub(&derivative, &rhs)))
}

fn finite_difference(plus: &Mat2, minus: &Mat2, delta: f64) -> Mat2 {
    mat_scale(C64::new(0.5 / delta, 0.0), &mat_sub(plus, minus))
}

/// −i[H⁰, ρᶜ] − i tr₂[V₁₂, ρ^{(12)}].
fn bbgky_rhs(h0: &PauliVector, v: &PauliVector, rho_c: &Mat2, pair: &Mat4) -> Mat2 {
    let mi = C64::new(0.0, -1.0);
    let local = mat_scale(mi, &mat_commutator(&h0.matrix(), rho_c));
    let v12 = pair_interaction_matrix(v);
    let coupled = mat_scale(mi, &ptrace_second(&mat_commutator(&v12, pair)));
    crate::pauli::mat_add(&local, &coupled)
}

/// Distance-ratio series of two mean-field trajectories.
#[derive(Clone, Debug)]
pub struct ExpansiveSeries {
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    pub ratios: Vec<f64>,
    pub d0: f64,
    pub max_ratio: f64,
}

/// Track d(t)/d(0) for a pair of pure initial states under the same
/// nonlinear flow; ratios above 1 are impossible for any linear CPTP
/// evolution.
pub fn expansive_demo(
    phi_a: [C64; 2],
    phi_b: [C64; 2],
    schedule: &Schedule,
    t_grid: &[f64],
    dt_override: Option<f64>,
) -> Result<ExpansiveSeries> {
    let xa = QubitDensity::pure(phi_a)?;
    let xb = QubitDensity::pure(phi_b)?;
    let d0 = trace_distance(&xa, &xb);
    if d0 < 1e-8 {
        return Err(Error::DegeneratePair(d0));
    }
    let dt = dt_override.unwrap_or_else(|| schedule.bounds().default_dt());
    let ta = mf_integrate(phi_a, schedule, t_grid, dt)?;
    let tb = mf_integrate(phi_b, schedule, t_grid, dt)?;
    let distances: Vec<f64> = ta
        .blochs()
        .iter()
        .zip(tb.blochs())
        .map(|(a, b)| bloch_distance(a, b))
        .collect();
    let ratios: Vec<f64> = distances.iter().map(|d| d / d0).collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(ExpansiveSeries {
        times: t_grid.to_vec(),
        distances,
        ratios,
        d0,
        max_ratio,
    })
}
