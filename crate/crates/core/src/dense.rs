//! Dense full-lattice operators for the verification layer.
//!
//! Piecewise-constant schedules make the time-ordered propagator an exact
//! product of segment exponentials, so U_t is built here from per-segment
//! Hermitian eigendecompositions — no integrator error enters the operator
//! norm checks. The Hamiltonian is assembled from explicit Kronecker
//! products, independently of the matrix-free kernels it cross-checks.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pauli::{Mat2, PauliVector, SIGMA};
use crate::schedule::Schedule;

const Z: C64 = C64::new(0.0, 0.0);

/// Upper size limit for dense 2ⁿ×2ⁿ work.
pub const DENSE_MAX_QUBITS: usize = 10;

fn check_dense_size(n: usize) -> Result<()> {
    if !(2..=DENSE_MAX_QUBITS).contains(&n) {
        return Err(Error::StateTooLarge {
            qubits: n,
            megabytes: (1usize << (2 * n.min(26))) * 16 / (1024 * 1024),
            cap: DENSE_MAX_QUBITS,
        });
    }
    Ok(())
}

pub fn mat2_to_dense(m: &Mat2) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |r, c| m[r][c])
}

/// Embed a single-qubit operator at `qubit` (1-based, qubit 1 outermost).
pub fn op_on_qubit(n: usize, qubit: usize, m: &Mat2) -> DMatrix<C64> {
    let eye_left = DMatrix::<C64>::identity(1 << (qubit - 1), 1 << (qubit - 1));
    let eye_right = DMatrix::<C64>::identity(1 << (n - qubit), 1 << (n - qubit));
    eye_left.kronecker(&mat2_to_dense(m)).kronecker(&eye_right)
}

/// Dense H = Σᵢ Σ_μ h_μ σᵢ^μ + (n−1)⁻¹ Σ_{i>1} Σ_μ v_μ σ₁^μ σᵢ^μ.
pub fn dense_hamiltonian(n: usize, h0: &PauliVector, v: &PauliVector) -> Result<DMatrix<C64>> {
    check_dense_size(n)?;
    let dim = 1usize << n;
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for (mu, &c) in h0.components().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for qubit in 1..=n {
            h += op_on_qubit(n, qubit, &SIGMA[mu]).scale(c);
        }
    }
    let coup = 1.0 / (n as f64 - 1.0);
    for (mu, &c) in v.components().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let s1 = op_on_qubit(n, 1, &SIGMA[mu]);
        for qubit in 2..=n {
            h += (&s1 * op_on_qubit(n, qubit, &SIGMA[mu])).scale(c * coup);
        }
    }
    Ok(h)
}

/// exp(−i H δ) for Hermitian H via eigendecomposition.
pub fn hermitian_exponential(h: &DMatrix<C64>, delta: f64) -> DMatrix<C64> {
    let se = h.clone().symmetric_eigen();
    let dim = h.nrows();
    let mut phased = se.eigenvectors.clone();
    for (j, lambda) in se.eigenvalues.iter().enumerate() {
        let phase = C64::from_polar(1.0, -lambda * delta);
        for r in 0..dim {
            phased[(r, j)] *= phase;
        }
    }
    phased * se.eigenvectors.adjoint()
}

/// Exact time-ordered propagator U_t as a product of segment exponentials.
pub fn dense_unitary(n: usize, schedule: &Schedule, t: f64) -> Result<DMatrix<C64>> {
    check_dense_size(n)?;
    if !(0.0..=schedule.horizon()).contains(&t) {
        return Err(Error::OutOfRange {
            t,
            horizon: schedule.horizon(),
        });
    }
    let dim = 1usize << n;
    let mut u = DMatrix::<C64>::identity(dim, dim);
    let mut t0 = 0.0;
    let eps = 1e-12 * (1.0 + t.abs());
    while t0 < t - eps {
        let (h0, v, end) = schedule.window(t0)?;
        let stop = end.min(t);
        let h = dense_hamiltonian(n, &h0, &v)?;
        u = hermitian_exponential(&h, stop - t0) * u;
        t0 = stop;
    }
    Ok(u)
}

/// Eigenvalues of a Hermitian dense matrix (ascending order not guaranteed).
pub fn hermitian_eigenvalues_dense(m: &DMatrix<C64>) -> Vec<f64> {
    m.clone().symmetric_eigenvalues().iter().copied().collect()
}

/// Trace norm of an anti-Hermitian matrix: Σ |eig(iM)|.
pub fn trace_norm_antihermitian(m: &DMatrix<C64>) -> f64 {
    let herm = m.map(|e| C64::new(0.0, 1.0) * e);
    herm.symmetric_eigenvalues().iter().map(|e| e.abs()).sum()
}

/// (A ⊗ I) · X for a small operator A on the leading (most significant)
/// qubits; avoids materializing the embedding.
pub fn leading_mul_left(a: &DMatrix<C64>, x: &DMatrix<C64>) -> DMatrix<C64> {
    let d = a.nrows();
    let dim = x.nrows();
    let rest = dim / d;
    let mut y = DMatrix::<C64>::zeros(dim, dim);
    for col in 0..dim {
        for alpha in 0..d {
            for alphap in 0..d {
                let aval = a[(alpha, alphap)];
                if aval == Z {
                    continue;
                }
                for r in 0..rest {
                    y[(alpha * rest + r, col)] += aval * x[(alphap * rest + r, col)];
                }
            }
        }
    }
    y
}

/// X · (A ⊗ I), companion to [`leading_mul_left`].
pub fn leading_mul_right(x: &DMatrix<C64>, a: &DMatrix<C64>) -> DMatrix<C64> {
    let d = a.nrows();
    let dim = x.nrows();
    let rest = dim / d;
    let mut y = DMatrix::<C64>::zeros(dim, dim);
    for alpha in 0..d {
        for alphap in 0..d {
            let aval = a[(alphap, alpha)];
            if aval == Z {
                continue;
            }
            for c in 0..rest {
                let ycol = alpha * rest + c;
                let xcol = alphap * rest + c;
                for r in 0..dim {
                    y[(r, ycol)] += x[(r, xcol)] * aval;
                }
            }
        }
    }
    y
}
