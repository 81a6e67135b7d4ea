//! Symmetric-sector engine: the replicas stay in the permutation-invariant
//! (Dicke) subspace, so the exact state lives in a 2n-dimensional space
//! (central qubit ⊗ Dicke index) and each step costs O(n).
//!
//! Dicke index convention: k counts replicas in |1⟩, k ∈ {0, …, n−1}, and the
//! collective J³ eigenvalue on |k⟩ is j − k with j = (n−1)/2. The reduction is
//! exact, not approximate; the brute-force engine cross-validates it.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pauli::{mat_zero, Mat4, PauliVector, QubitDensity};
use crate::rk4::{evolve_schedule, Rk4Workspace};
use crate::schedule::Schedule;

const Z: C64 = C64::new(0.0, 0.0);

/// Collective spin J¹, J², J³ of n−1 replicas on the spin-j ladder,
/// j = (n−1)/2, stored as the tridiagonal ladder coefficients.
#[derive(Clone, Debug)]
pub struct CollectiveSpin {
    n_rep: usize,
    /// s[k] = √(k (n_rep + 1 − k)) couples |k−1⟩ ↔ |k⟩; s[0] = 0 sentinel.
    s: Vec<f64>,
}

impl CollectiveSpin {
    pub fn new(n_rep: usize) -> Result<Self> {
        if n_rep == 0 {
            return Err(Error::InvalidInput("need at least one replica".into()));
        }
        let dim = n_rep + 1;
        let mut s = vec![0.0; dim + 1];
        for (k, e) in s.iter_mut().enumerate().take(dim).skip(1) {
            *e = ((k * (n_rep + 1 - k)) as f64).sqrt();
        }
        Ok(Self { n_rep, s })
    }

    pub fn n_rep(&self) -> usize {
        self.n_rep
    }

    /// Dimension of the Dicke ladder, n_rep + 1.
    pub fn dim(&self) -> usize {
        self.n_rep + 1
    }

    /// J³ diagonal entry at Dicke index k.
    pub fn jz(&self, k: usize) -> f64 {
        0.5 * self.n_rep as f64 - k as f64
    }

    /// out += J^μ u (μ ∈ {1,2,3} for x, y, z).
    pub fn apply_into(&self, mu: usize, out: &mut [C64], u: &[C64]) {
        let dim = self.dim();
        match mu {
            1 => {
                for k in 0..dim {
                    let up = if k + 1 < dim {
                        self.s[k + 1] * u[k + 1]
                    } else {
                        Z
                    };
                    let dn = if k > 0 { self.s[k] * u[k - 1] } else { Z };
                    out[k] += 0.5 * (up + dn);
                }
            }
            2 => {
                let half_i = C64::new(0.0, -0.5);
                for k in 0..dim {
                    let up = if k + 1 < dim {
                        self.s[k + 1] * u[k + 1]
                    } else {
                        Z
                    };
                    let dn = if k > 0 { self.s[k] * u[k - 1] } else { Z };
                    out[k] += half_i * (up - dn);
                }
            }
            3 => {
                for k in 0..dim {
                    out[k] += self.jz(k) * u[k];
                }
            }
            _ => panic!("Pauli axis must be 1, 2, or 3"),
        }
    }
}

/// Exact lattice state restricted to (central qubit) ⊗ (Dicke sector).
///
/// Amplitude layout: `amps[a * n + k]` for central bit a ∈ {0,1} and Dicke
/// index k ∈ {0, …, n−1}.
#[derive(Clone, Debug)]
pub struct SectorState {
    n: usize,
    amps: Vec<C64>,
    time: f64,
    norm_drift: f64,
}

impl SectorState {
    /// |φ⟩ ⊗ (spin-coherent |φ⟩^⊗(n−1)) in the Dicke basis. Binomial weights
    /// are accumulated in log space so n ≫ 10³ stays finite.
    pub fn coherent_init(phi: [C64; 2], n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("need n ≥ 2 qubits, got {n}")));
        }
        let nrm = phi[0].norm_sqr() + phi[1].norm_sqr();
        if (nrm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "initial state norm² {nrm} ≠ 1"
            )));
        }
        let m = n - 1; // replica count
        let (r0, th0) = phi[0].to_polar();
        let (r1, th1) = phi[1].to_polar();
        let mut replica = vec![Z; n];
        let mut log_binom = 0.0f64; // ln C(m, k), accumulated incrementally
        for (k, e) in replica.iter_mut().enumerate() {
            if k > 0 {
                log_binom += (((m - k + 1) as f64) / k as f64).ln();
            }
            // √C(m,k) |φ₀|^{m−k} |φ₁|^k with explicit zero-amplitude handling.
            if (r0 == 0.0 && k < m) || (r1 == 0.0 && k > 0) {
                continue;
            }
            let log_mag = 0.5 * log_binom
                + if m > k { (m - k) as f64 * r0.ln() } else { 0.0 }
                + if k > 0 { k as f64 * r1.ln() } else { 0.0 };
            let phase = (m - k) as f64 * th0 + k as f64 * th1;
            *e = C64::from_polar(log_mag.exp(), phase);
        }
        let mut amps = vec![Z; 2 * n];
        for a in 0..2 {
            for k in 0..n {
                amps[a * n + k] = phi[a] * replica[k];
            }
        }
        Ok(Self {
            n,
            amps,
            time: 0.0,
            norm_drift: 0.0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Amplitudes in `[a * n + k]` layout.
    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_drift(&self) -> f64 {
        self.norm_drift
    }

    /// Advance to `t_target`; identical step policy to the full engine.
    pub fn propagate(&mut self, schedule: &Schedule, t_target: f64, dt: f64) -> Result<()> {
        let spin = CollectiveSpin::new(self.n - 1)?;
        let n = self.n;
        let mut ws = Rk4Workspace::new(self.amps.len());
        let drift = evolve_schedule(
            &mut self.amps,
            &mut self.time,
            schedule,
            t_target,
            dt,
            &mut ws,
            |out, psi, h0, v| apply_h_sector(out, psi, n, &spin, h0, v),
        )?;
        self.norm_drift += drift;
        Ok(())
    }

    /// ρᶜ_{ab} = Σ_k ψ_{a,k} ψ̄_{b,k}.
    pub fn reduced_central(&self) -> Result<QubitDensity> {
        let n = self.n;
        let mut m = crate::pauli::mat_zero::<2>();
        for k in 0..n {
            let a0 = self.amps[k];
            let a1 = self.amps[n + k];
            m[0][0] += a0 * a0.conj();
            m[0][1] += a0 * a1.conj();
            m[1][1] += a1 * a1.conj();
        }
        m[1][0] = m[0][1].conj();
        QubitDensity::from_matrix(&m)
    }

    /// Reduced density on (central, one replica). One replica is split off
    /// the Dicke ladder with the symmetric-state branching coefficients
    /// |m, k⟩ = √((m−k)/m)|0⟩|m−1, k⟩ + √(k/m)|1⟩|m−1, k−1⟩, m = n−1.
    pub fn reduced_pair(&self) -> Result<Mat4> {
        if self.n < 3 {
            return Err(Error::InvalidInput(
                "pair reduction in the sector needs n ≥ 3; use the full engine at n = 2".into(),
            ));
        }
        let n = self.n;
        let m = (n - 1) as f64;
        // χ[(a,b)][k'] over the residual Dicke index k' ∈ {0, …, n−2}.
        let rows = n - 1;
        let mut chi = vec![Z; 4 * rows];
        for a in 0..2 {
            for kp in 0..rows {
                let c0 = ((m - kp as f64) / m).sqrt();
                let c1 = ((kp as f64 + 1.0) / m).sqrt();
                chi[(a * 2) * rows + kp] = self.amps[a * n + kp] * c0;
                chi[(a * 2 + 1) * rows + kp] = self.amps[a * n + kp + 1] * c1;
            }
        }
        let mut out = mat_zero::<4>();
        for r in 0..4 {
            for c in 0..4 {
                let mut acc = Z;
                for kp in 0..rows {
                    acc += chi[r * rows + kp] * chi[c * rows + kp].conj();
                }
                out[r][c] = acc;
            }
        }
        Ok(out)
    }

    /// Embed into the full 2ⁿ space (test/oracle use; n is capped to keep the
    /// expansion addressable).
    pub fn embed_full(&self) -> Result<Vec<C64>> {
        embed_sector_amplitudes(&self.amps, self.n)
    }
}

/// Embed raw sector amplitudes (layout `[a * n + k]`) into the full 2ⁿ
/// space. Normalization is not required, so operator actions can be
/// compared representation to representation.
pub fn embed_sector_amplitudes(amps: &[C64], n: usize) -> Result<Vec<C64>> {
    if amps.len() != 2 * n {
        return Err(Error::InvalidInput(format!(
            "sector amplitude length {} does not match n = {n}",
            amps.len()
        )));
    }
    if n > 20 {
        return Err(Error::StateTooLarge {
            qubits: n,
            megabytes: (1usize << n.min(40)) * 16 / (1024 * 1024),
            cap: 20,
        });
    }
    let m = n - 1;
    // 1/√C(m, k) for each weight class.
    let mut inv_sqrt_binom = vec![0.0f64; n];
    let mut log_binom = 0.0f64;
    for (k, e) in inv_sqrt_binom.iter_mut().enumerate() {
        if k > 0 {
            log_binom += (((m - k + 1) as f64) / k as f64).ln();
        }
        *e = (-0.5 * log_binom).exp();
    }
    let dim = 1usize << n;
    let top = 1usize << (n - 1);
    let mut out = vec![Z; dim];
    for (idx, o) in out.iter_mut().enumerate() {
        let a = usize::from(idx & top != 0);
        let k = (idx & !top).count_ones() as usize;
        *o = amps[a * n + k] * inv_sqrt_binom[k];
    }
    Ok(out)
}

/// Matrix-free action of the sector Hamiltonian
/// H = Σ_μ h_μ σ₁^μ + 2 Σ_μ h_μ J^μ + (2/(n−1)) Σ_μ v_μ σ₁^μ J^μ,
/// all terms tridiagonal in the Dicke index: O(n) work.
pub fn apply_h_sector(
    out: &mut [C64],
    psi: &[C64],
    n: usize,
    spin: &CollectiveSpin,
    h0: &PauliVector,
    v: &PauliVector,
) {
    debug_assert_eq!(out.len(), 2 * n);
    debug_assert_eq!(psi.len(), 2 * n);
    debug_assert_eq!(spin.dim(), n);
    let [hx, hy, hz] = h0.components();
    let [vx, vy, vz] = v.components();
    let c = 2.0 / (n as f64 - 1.0);
    let s = &spin.s;
    let (row0, row1) = psi.split_at(n);
    let (out0, out1) = out.split_at_mut(n);

    for k in 0..n {
        let jz = spin.jz(k);
        // Ladder neighbor sums per central row: S = s_{k+1}u_{k+1} + s_k u_{k−1},
        // D = s_{k+1}u_{k+1} − s_k u_{k−1}.
        let up0 = if k + 1 < n { s[k + 1] * row0[k + 1] } else { Z };
        let dn0 = if k > 0 { s[k] * row0[k - 1] } else { Z };
        let up1 = if k + 1 < n { s[k + 1] * row1[k + 1] } else { Z };
        let dn1 = if k > 0 { s[k] * row1[k - 1] } else { Z };
        let s0 = up0 + dn0;
        let d0 = up0 - dn0;
        let s1 = up1 + dn1;
        let d1 = up1 - dn1;
        let mi = C64::new(0.0, -1.0);

        // Central row 0: diagonal (σ₁³ = +1), collective field, central
        // transverse field from row 1, and the coupling terms.
        out0[k] = (hz + 2.0 * hz * jz + c * vz * jz) * row0[k]
            + hx * s0
            + mi * (hy * d0)
            + C64::new(hx, -hy) * row1[k]
            + 0.5 * c * vx * s1
            - 0.5 * c * vy * d1;

        // Central row 1 (σ₁³ = −1); the y couplings flip sign with the row.
        out1[k] = (-hz + 2.0 * hz * jz - c * vz * jz) * row1[k]
            + hx * s1
            + mi * (hy * d1)
            + C64::new(hx, hy) * row0[k]
            + 0.5 * c * vx * s0
            + 0.5 * c * vy * d0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pv(x: f64, y: f64, z: f64) -> PauliVector {
        PauliVector::new(x, y, z).unwrap()
    }

    fn ket0() -> [C64; 2] {
        [c(1.0, 0.0), c(0.0, 0.0)]
    }

    fn ket_plus() -> [C64; 2] {
        let r = 0.5f64.sqrt();
        [c(r, 0.0), c(r, 0.0)]
    }

    fn norm2(v: &[C64]) -> f64 {
        v.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Dense J^μ from the ladder action, for commutator checks.
    fn dense_j(spin: &CollectiveSpin, mu: usize) -> Vec<Vec<C64>> {
        let d = spin.dim();
        let mut m = vec![vec![Z; d]; d];
        for col in 0..d {
            let mut basis = vec![Z; d];
            basis[col] = c(1.0, 0.0);
            let mut out = vec![Z; d];
            spin.apply_into(mu, &mut out, &basis);
            for (row, val) in out.into_iter().enumerate() {
                m[row][col] = val;
            }
        }
        m
    }

    #[test]
    fn collective_spin_commutators() {
        let spin = CollectiveSpin::new(6).unwrap();
        let d = spin.dim();
        let j: Vec<_> = (1..=3).map(|mu| dense_j(&spin, mu)).collect();
        // [J¹, J²] = i J³ and cyclic permutations.
        for (a, b, cc) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            for r in 0..d {
                for col in 0..d {
                    let mut comm = Z;
                    for k in 0..d {
                        comm += j[a][r][k] * j[b][k][col] - j[b][r][k] * j[a][k][col];
                    }
                    let expected = C64::new(0.0, 1.0) * j[cc][r][col];
                    assert!((comm - expected).norm() < 1e-10);
                }
            }
        }
        // J³ diagonal entries are j − k.
        for k in 0..d {
            assert!((j[2][k][k].re - (3.0 - k as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_init_examples() {
        let psi = SectorState::coherent_init(ket0(), 5).unwrap();
        assert!((psi.amplitudes()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((norm2(psi.amplitudes()) - 1.0).abs() < 1e-14);

        let psi = SectorState::coherent_init(ket_plus(), 3).unwrap();
        let r = 0.5f64.sqrt();
        let expected_rep = [0.5, r, 0.5];
        for a in 0..2 {
            for k in 0..3 {
                let e = r * expected_rep[k];
                assert!((psi.amplitudes()[a * 3 + k] - c(e, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn coherent_init_large_n_stays_normalized() {
        let phi = [c(0.6, 0.0), c(0.8, 0.0)];
        let psi = SectorState::coherent_init(phi, 10_000).unwrap();
        assert!(psi
            .amplitudes()
            .iter()
            .all(|a| a.re.is_finite() && a.im.is_finite()));
        assert!((norm2(psi.amplitudes()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn coherent_init_rejects_unnormalized() {
        assert!(SectorState::coherent_init([c(1.0, 0.0), c(0.3, 0.0)], 4).is_err());
    }

    #[test]
    fn top_state_is_field_eigenvector() {
        for n in [2usize, 3, 7, 12] {
            let psi = SectorState::coherent_init(ket0(), n).unwrap();
            let spin = CollectiveSpin::new(n - 1).unwrap();
            let mut out = vec![Z; 2 * n];
            apply_h_sector(
                &mut out,
                psi.amplitudes(),
                n,
                &spin,
                &pv(0.0, 0.0, 1.0),
                &PauliVector::ZERO,
            );
            // σ₁³ + 2J³ on the top-weight state gives eigenvalue n.
            assert!((out[0] - c(n as f64, 0.0)).norm() < 1e-12);
            for (i, o) in out.iter().enumerate().skip(1) {
                assert!(o.norm() < 1e-14, "leak at {i}");
            }
        }
    }

    #[test]
    fn zero_couplings_give_zero_action() {
        let psi = SectorState::coherent_init(ket_plus(), 6).unwrap();
        let spin = CollectiveSpin::new(5).unwrap();
        let mut out = vec![Z; 12];
        apply_h_sector(
            &mut out,
            psi.amplitudes(),
            6,
            &spin,
            &PauliVector::ZERO,
            &PauliVector::ZERO,
        );
        assert!(out.iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn stationary_aligned_state() {
        let s = Schedule::constant(pv(0.0, 0.0, 1.0), pv(0.0, 0.0, 0.8), 3.0).unwrap();
        let mut psi = SectorState::coherent_init(ket0(), 64).unwrap();
        psi.propagate(&s, 2.5, 1e-3).unwrap();
        let b = psi.reduced_central().unwrap().bloch();
        assert!((b[2] - 1.0).abs() < 1e-12 && b[0].abs() < 1e-12 && b[1].abs() < 1e-12);
    }

    #[test]
    fn propagate_to_current_time_is_identity() {
        let s = Schedule::constant(pv(0.1, 0.2, 0.3), pv(0.2, 0.1, 0.0), 1.0).unwrap();
        let mut psi = SectorState::coherent_init(ket_plus(), 9).unwrap();
        psi.propagate(&s, 0.3, 1e-3).unwrap();
        let snap = psi.amplitudes().to_vec();
        psi.propagate(&s, 0.3, 1e-3).unwrap();
        assert_eq!(snap, psi.amplitudes());
    }

    #[test]
    fn reduced_central_of_coherent_state_is_pure() {
        let phi = crate::pauli::pure_from_bloch([0.6, 0.0, 0.8]).unwrap();
        let psi = SectorState::coherent_init(phi, 4096).unwrap();
        let b = psi.reduced_central().unwrap().bloch();
        assert!((b[0] - 0.6).abs() < 1e-12 && b[1].abs() < 1e-12 && (b[2] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn reduced_pair_of_coherent_state_is_product() {
        let phi = [c(0.6, 0.0), c(0.0, 0.8)];
        let psi = SectorState::coherent_init(phi, 7).unwrap();
        let got = psi.reduced_pair().unwrap();
        let rho1 = QubitDensity::pure(phi).unwrap().matrix();
        let expected = crate::pauli::tensor2(&rho1, &rho1);
        for i in 0..4 {
            for j in 0..4 {
                assert!((got[i][j] - expected[i][j]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn reduced_pair_needs_three_qubits() {
        let psi = SectorState::coherent_init(ket_plus(), 2).unwrap();
        assert!(psi.reduced_pair().is_err());
    }

    #[test]
    fn reduced_pair_has_unit_trace_after_evolution() {
        let s = Schedule::constant(pv(0.2, 0.1, 0.4), pv(0.3, 0.2, 0.1), 2.0).unwrap();
        let mut psi = SectorState::coherent_init(ket_plus(), 4096).unwrap();
        psi.propagate(&s, 1.0, 1e-3).unwrap();
        let rho = psi.reduced_pair().unwrap();
        let tr: C64 = (0..4).map(|i| rho[i][i]).sum();
        assert!((tr - c(1.0, 0.0)).norm() < 1e-10);
        // Hermitian and PSD within tolerance.
        assert!(crate::pauli::hermitian_defect(&rho) < 1e-12);
        let eigs = crate::pauli::hermitian_eigenvalues_jacobi(&rho);
        assert!(eigs.iter().all(|&e| e > -1e-10));
    }
}
