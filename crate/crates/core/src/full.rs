//! Brute-force engine: the full 2ⁿ state vector evolved with matrix-free
//! Hamiltonian application. Ground truth for small n.
//!
//! Bit convention: qubit 1 (the central qubit) is the **most significant
//! bit** of the amplitude index; replica qubit i occupies bit n−i.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pauli::{mat_zero, Mat2, Mat4, OpMatrix, PauliVector, QubitDensity, SmallOperator};
use crate::rk4::{evolve_schedule, Rk4Workspace};
use crate::schedule::Schedule;

/// Default cap on the full-space engine size.
pub const DEFAULT_MAX_QUBITS: usize = 14;

const Z: C64 = C64::new(0.0, 0.0);

/// Pure state of the whole lattice.
#[derive(Clone, Debug)]
pub struct FullState {
    n: usize,
    amps: Vec<C64>,
    time: f64,
    norm_drift: f64,
}

/// Estimated working-set size of an n-qubit propagation (state + RK4 scratch).
fn estimated_megabytes(n: usize) -> usize {
    let bytes = (1u128 << n.min(100)) * std::mem::size_of::<C64>() as u128 * 6;
    (bytes / (1024 * 1024)).min(usize::MAX as u128) as usize
}

impl FullState {
    /// Product state |φ⟩^⊗n under the default size cap.
    pub fn product_init(phi: [C64; 2], n: usize) -> Result<Self> {
        Self::product_init_capped(phi, n, DEFAULT_MAX_QUBITS)
    }

    /// Product state |φ⟩^⊗n with an explicit size cap; fails before any
    /// allocation if n exceeds it.
    pub fn product_init_capped(phi: [C64; 2], n: usize, cap: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("need n ≥ 2 qubits, got {n}")));
        }
        if n > cap || n >= usize::BITS as usize {
            return Err(Error::StateTooLarge {
                qubits: n,
                megabytes: estimated_megabytes(n),
                cap,
            });
        }
        let nrm = phi[0].norm_sqr() + phi[1].norm_sqr();
        if (nrm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "initial state norm² {nrm} ≠ 1"
            )));
        }
        let dim = 1usize << n;
        let mut amps = vec![Z; dim];
        for (idx, a) in amps.iter_mut().enumerate() {
            let mut val = C64::new(1.0, 0.0);
            for q in 0..n {
                let bit = (idx >> (n - 1 - q)) & 1;
                val *= phi[bit];
            }
            *a = val;
        }
        Ok(Self {
            n,
            amps,
            time: 0.0,
            norm_drift: 0.0,
        })
    }

    /// Wrap a raw amplitude vector (must be normalized, length 2ⁿ).
    pub fn from_amplitudes(amps: Vec<C64>, n: usize, time: f64) -> Result<Self> {
        if n < 2 || amps.len() != 1usize << n {
            return Err(Error::InvalidInput(format!(
                "amplitude vector length {} does not match n = {n}",
                amps.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "amplitude vector norm² {norm} ≠ 1"
            )));
        }
        Ok(Self {
            n,
            amps,
            time,
            norm_drift: 0.0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// Accumulated pre-renormalization norm drift over all steps so far.
    pub fn norm_drift(&self) -> f64 {
        self.norm_drift
    }

    /// Advance to `t_target` with RK4 steps of at most `dt`, splitting at
    /// schedule breakpoints.
    pub fn propagate(&mut self, schedule: &Schedule, t_target: f64, dt: f64) -> Result<()> {
        let n = self.n;
        let mut ws = Rk4Workspace::new(self.amps.len());
        let drift = evolve_schedule(
            &mut self.amps,
            &mut self.time,
            schedule,
            t_target,
            dt,
            &mut ws,
            |out, psi, h0, v| apply_h(out, psi, n, h0, v),
        )?;
        self.norm_drift += drift;
        Ok(())
    }

    /// Reduced density matrix of the central qubit.
    pub fn reduced_central(&self) -> Result<QubitDensity> {
        let half = self.amps.len() / 2;
        let mut m = mat_zero::<2>();
        for r in 0..half {
            let a0 = self.amps[r];
            let a1 = self.amps[half + r];
            m[0][0] += a0 * a0.conj();
            m[0][1] += a0 * a1.conj();
            m[1][1] += a1 * a1.conj();
        }
        m[1][0] = m[0][1].conj();
        QubitDensity::from_matrix(&m)
    }

    /// Reduced density matrix on (central, first replica); for n = 2 this is
    /// the full two-qubit density.
    pub fn reduced_pair(&self) -> Mat4 {
        let rest = self.n - 2;
        let block = 1usize << rest;
        let mut m = mat_zero::<4>();
        for r in 0..block {
            for a in 0..4usize {
                let va = self.amps[a * block + r];
                for b in 0..4usize {
                    let vb = self.amps[b * block + r];
                    m[a][b] += va * vb.conj();
                }
            }
        }
        m
    }

    /// Real part of ⟨ψ|Π ops|ψ⟩ for operators on pairwise disjoint supports.
    pub fn expectation(&self, ops: &[SmallOperator]) -> Result<f64> {
        Ok(self.expectation_c(ops)?.re)
    }

    /// Full complex ⟨ψ|Π ops|ψ⟩.
    pub fn expectation_c(&self, ops: &[SmallOperator]) -> Result<C64> {
        let mut seen = vec![false; self.n + 1];
        for op in ops {
            for &q in op.support() {
                if q == 0 || q > self.n {
                    return Err(Error::InvalidInput(format!(
                        "operator qubit {q} outside lattice 1..={}",
                        self.n
                    )));
                }
                if seen[q] {
                    return Err(Error::InvalidInput(format!(
                        "overlapping operator supports at qubit {q}"
                    )));
                }
                seen[q] = true;
            }
        }
        let mut work = self.amps.clone();
        let mut scratch = vec![Z; work.len()];
        for op in ops.iter().rev() {
            apply_small_op(&mut scratch, &work, self.n, op);
            std::mem::swap(&mut work, &mut scratch);
        }
        Ok(self.amps.iter().zip(&work).map(|(a, b)| a.conj() * b).sum())
    }

    /// Exchange two replica qubits (1-based indices > 1) — used to probe
    /// replica permutation symmetry.
    pub fn swap_replicas(&self, qa: usize, qb: usize) -> Result<Self> {
        if qa <= 1 || qb <= 1 || qa > self.n || qb > self.n || qa == qb {
            return Err(Error::InvalidInput(format!(
                "replica swap needs two distinct replicas, got ({qa}, {qb})"
            )));
        }
        let pa = self.n - qa;
        let pb = self.n - qb;
        let mut out = self.amps.clone();
        for (idx, a) in out.iter_mut().enumerate() {
            let ba = (idx >> pa) & 1;
            let bb = (idx >> pb) & 1;
            if ba != bb {
                let swapped = idx ^ (1 << pa) ^ (1 << pb);
                *a = self.amps[swapped];
            }
        }
        Ok(Self {
            n: self.n,
            amps: out,
            time: self.time,
            norm_drift: self.norm_drift,
        })
    }
}

/// Matrix-free action of H = Σᵢ H⁰ᵢ + (n−1)⁻¹ Σ_{i>1} Σ_μ v_μ σ₁^μ σᵢ^μ.
///
/// Never materializes a 2ⁿ×2ⁿ matrix: diagonal (z) parts are popcount sums,
/// transverse parts are one bit-flip pass per qubit or pair.
pub fn apply_h(out: &mut [C64], psi: &[C64], n: usize, h0: &PauliVector, v: &PauliVector) {
    debug_assert!(n >= 2);
    debug_assert_eq!(out.len(), psi.len());
    debug_assert_eq!(psi.len(), 1usize << n);
    let dim = psi.len();
    let [hx, hy, hz] = h0.components();
    let [vx, vy, vz] = v.components();
    let coup = 1.0 / (n as f64 - 1.0);
    let top = 1usize << (n - 1);

    out.fill(Z);

    // Diagonal terms: hz Σᵢ sᵢ + (vz/(n−1)) s₁ Σ_{i>1} sᵢ, with s = ±1.
    if hz != 0.0 || vz != 0.0 {
        let cz = vz * coup;
        for (idx, o) in out.iter_mut().enumerate() {
            let ones = idx.count_ones() as f64;
            let field = hz * (n as f64 - 2.0 * ones);
            let s1 = if idx & top == 0 { 1.0 } else { -1.0 };
            let rep_ones = (idx & !top).count_ones() as f64;
            let pair = cz * s1 * ((n - 1) as f64 - 2.0 * rep_ones);
            *o += (field + pair) * psi[idx];
        }
    }

    // Transverse single-qubit terms, one bit-flip pass per qubit.
    if hx != 0.0 || hy != 0.0 {
        for pos in 0..n {
            let mask = 1usize << pos;
            for idx in 0..dim {
                let src = psi[idx ^ mask];
                // σ^y contributes −i on a |0⟩ output bit, +i on |1⟩.
                let y = if idx & mask == 0 {
                    C64::new(0.0, -hy)
                } else {
                    C64::new(0.0, hy)
                };
                out[idx] += (hx + y) * src;
            }
        }
    }

    // Transverse pair terms: σ₁^x σᵢ^x flips both bits with weight vx;
    // σ₁^y σᵢ^y flips both with weight −vy when the output bits agree,
    // +vy otherwise.
    if vx != 0.0 || vy != 0.0 {
        for pos in 0..(n - 1) {
            let mask = top | (1usize << pos);
            for idx in 0..dim {
                let src = psi[idx ^ mask];
                let b1 = idx & top != 0;
                let bi = idx & (1 << pos) != 0;
                let ysign = if b1 == bi { -vy } else { vy };
                out[idx] += coup * (vx + ysign) * src;
            }
        }
    }
}

/// Apply a small operator to the state, writing into `out`.
pub fn apply_small_op(out: &mut [C64], psi: &[C64], n: usize, op: &SmallOperator) {
    match op.matrix() {
        OpMatrix::Two(m) => {
            let q = op.support()[0];
            apply_one_qubit(out, psi, n, q, m);
        }
        OpMatrix::Four(m) => {
            let q1 = op.support()[0];
            let q2 = op.support()[1];
            apply_two_qubit(out, psi, n, q1, q2, m);
        }
    }
}

fn apply_one_qubit(out: &mut [C64], psi: &[C64], n: usize, qubit: usize, m: &Mat2) {
    let pos = n - qubit;
    let mask = 1usize << pos;
    for (idx, o) in out.iter_mut().enumerate() {
        let b = (idx >> pos) & 1;
        *o = m[b][b] * psi[idx] + m[b][1 - b] * psi[idx ^ mask];
    }
}

fn apply_two_qubit(out: &mut [C64], psi: &[C64], n: usize, q1: usize, q2: usize, m: &Mat4) {
    let p1 = n - q1;
    let p2 = n - q2;
    let m1 = 1usize << p1;
    let m2 = 1usize << p2;
    for (idx, o) in out.iter_mut().enumerate() {
        let row = (((idx >> p1) & 1) << 1) | ((idx >> p2) & 1);
        let base = idx & !(m1 | m2);
        let mut acc = Z;
        for col in 0..4usize {
            let e = m[row][col];
            if e == Z {
                continue;
            }
            let src = base | ((col >> 1) << p1) | ((col & 1) << p2);
            acc += e * psi[src];
        }
        *o = acc;
    }
}
