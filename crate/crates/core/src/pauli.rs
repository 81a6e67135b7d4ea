//! Exact complex linear algebra for 2×2 and 4×4 operators: Pauli expansions,
//! Bloch conversions, trace norms and distances, tensor products.
//!
//! Convention: trace distance carries **no ½ prefactor** — it is the plain
//! trace norm ‖a − b‖₁ of the difference, so orthogonal pure states are at
//! distance 2. All bound checks in this crate rely on that convention.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat2 = [[C64; 2]; 2];
pub type Mat4 = [[C64; 4]; 4];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Pauli matrices σ¹, σ², σ³ (x, y, z).
pub const SIGMA: [Mat2; 3] = [
    [[ZERO, ONE], [ONE, ZERO]],
    [[ZERO, C64::new(0.0, -1.0)], [I, ZERO]],
    [[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]],
];

/// SWAP gate on a qubit pair.
pub const SWAP: Mat4 = [
    [ONE, ZERO, ZERO, ZERO],
    [ZERO, ZERO, ONE, ZERO],
    [ZERO, ONE, ZERO, ZERO],
    [ZERO, ZERO, ZERO, ONE],
];

/// Hermiticity / trace tolerance for density validation.
pub const DENSITY_TOL: f64 = 1e-12;
/// Bloch vectors up to this far outside the ball are floored back onto it;
/// beyond it the state is rejected.
pub const BLOCH_TOL: f64 = 1e-10;

/// Real coefficient triple over the Pauli basis (ħ = 1 energy units).
///
/// Carries either a single-qubit field (coefficients of σ^μ) or the vector
/// coupling of the symmetric pair interaction Σ_μ v_μ σ^μ ⊗ σ^μ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PauliVector(pub [f64; 3]);

impl PauliVector {
    pub const ZERO: Self = Self([0.0; 3]);

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Self([x, y, z]);
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.iter().all(|c| c.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "non-finite Pauli coefficients {:?}",
                self.0
            )))
        }
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    /// Euclidean length √(Σ c_μ²).
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0.0; 3]
    }

    /// Trace norm of the single-qubit operator Σ_μ c_μ σ^μ (eigenvalues ±‖c‖).
    pub fn single_qubit_trace_norm(&self) -> f64 {
        2.0 * self.norm()
    }

    /// Closed-form bound 4√(Σ c_μ²) on the trace norm of Σ_μ c_μ σ^μ ⊗ σ^μ.
    ///
    /// Cauchy–Schwarz over the ≤ 4 singular values gives ‖·‖₁ ≤ 4√(Σ c_μ²),
    /// with equality exactly when a single component is nonzero; this is the
    /// interaction energy scale every error bound in the crate is stated in.
    pub fn pair_trace_norm_bound(&self) -> f64 {
        4.0 * self.norm()
    }

    /// Dense 2×2 form Σ_μ c_μ σ^μ.
    pub fn matrix(&self) -> Mat2 {
        let mut m = mat_zero::<2>();
        for (mu, &c) in self.0.iter().enumerate() {
            for (r, row) in SIGMA[mu].iter().enumerate() {
                for (col, &e) in row.iter().enumerate() {
                    m[r][col] += c * e;
                }
            }
        }
        m
    }
}

/* Small fixed-size matrix helpers ********************************************/

pub fn mat_zero<const N: usize>() -> [[C64; N]; N] {
    [[ZERO; N]; N]
}

pub fn mat_identity<const N: usize>() -> [[C64; N]; N] {
    let mut m = mat_zero::<N>();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

pub fn mat_add<const N: usize>(a: &[[C64; N]; N], b: &[[C64; N]; N]) -> [[C64; N]; N] {
    let mut m = *a;
    for (r, row) in m.iter_mut().enumerate() {
        for (c, e) in row.iter_mut().enumerate() {
            *e += b[r][c];
        }
    }
    m
}

pub fn mat_sub<const N: usize>(a: &[[C64; N]; N], b: &[[C64; N]; N]) -> [[C64; N]; N] {
    let mut m = *a;
    for (r, row) in m.iter_mut().enumerate() {
        for (c, e) in row.iter_mut().enumerate() {
            *e -= b[r][c];
        }
    }
    m
}

pub fn mat_scale<const N: usize>(s: C64, a: &[[C64; N]; N]) -> [[C64; N]; N] {
    let mut m = *a;
    for row in m.iter_mut() {
        for e in row.iter_mut() {
            *e *= s;
        }
    }
    m
}

pub fn mat_mul<const N: usize>(a: &[[C64; N]; N], b: &[[C64; N]; N]) -> [[C64; N]; N] {
    let mut m = mat_zero::<N>();
    for r in 0..N {
        for k in 0..N {
            let ark = a[r][k];
            if ark == ZERO {
                continue;
            }
            for c in 0..N {
                m[r][c] += ark * b[k][c];
            }
        }
    }
    m
}

pub fn mat_adjoint<const N: usize>(a: &[[C64; N]; N]) -> [[C64; N]; N] {
    let mut m = mat_zero::<N>();
    for (r, row) in a.iter().enumerate() {
        for (c, &e) in row.iter().enumerate() {
            m[c][r] = e.conj();
        }
    }
    m
}

pub fn mat_trace<const N: usize>(a: &[[C64; N]; N]) -> C64 {
    (0..N).map(|i| a[i][i]).sum()
}

pub fn mat_commutator<const N: usize>(a: &[[C64; N]; N], b: &[[C64; N]; N]) -> [[C64; N]; N] {
    mat_sub(&mat_mul(a, b), &mat_mul(b, a))
}

pub fn mat_is_finite<const N: usize>(a: &[[C64; N]; N]) -> bool {
    a.iter()
        .flatten()
        .all(|e| e.re.is_finite() && e.im.is_finite())
}

/// Largest entrywise deviation from Hermiticity, max |a_ij − conj(a_ji)|.
pub fn hermitian_defect<const N: usize>(a: &[[C64; N]; N]) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..N {
        for c in 0..N {
            worst = worst.max((a[r][c] - a[c][r].conj()).norm());
        }
    }
    worst
}

/// Tensor product of two single-qubit operators, first factor on the
/// high-order (row-major leading) qubit.
pub fn tensor2(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut m = mat_zero::<4>();
    for ra in 0..2 {
        for ca in 0..2 {
            for rb in 0..2 {
                for cb in 0..2 {
                    m[ra * 2 + rb][ca * 2 + cb] = a[ra][ca] * b[rb][cb];
                }
            }
        }
    }
    m
}

/// Partial trace over the second qubit of a 4×4 operator.
pub fn ptrace_second(m: &Mat4) -> Mat2 {
    let mut out = mat_zero::<2>();
    for a in 0..2 {
        for ap in 0..2 {
            out[a][ap] = m[a * 2][ap * 2] + m[a * 2 + 1][ap * 2 + 1];
        }
    }
    out
}

/// Partial trace over the first qubit of a 4×4 operator.
pub fn ptrace_first(m: &Mat4) -> Mat2 {
    let mut out = mat_zero::<2>();
    for b in 0..2 {
        for bp in 0..2 {
            out[b][bp] = m[b][bp] + m[2 + b][2 + bp];
        }
    }
    out
}

/* Eigenvalues and norms *******************************************************/

/// Eigenvalues of a Hermitian 2×2 matrix, closed form, descending.
pub fn hermitian_eigenvalues2(m: &Mat2) -> [f64; 2] {
    let a = m[0][0].re;
    let d = m[1][1].re;
    let b = m[0][1];
    let half_tr = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [half_tr + rad, half_tr - rad]
}

/// Eigenvalues of a Hermitian N×N matrix by cyclic complex Jacobi rotations.
///
/// Intended for the 4×4 operators of this module; convergence is quadratic
/// and a handful of sweeps reaches machine precision.
pub fn hermitian_eigenvalues_jacobi<const N: usize>(m: &[[C64; N]; N]) -> [f64; N] {
    let mut a = *m;
    let scale: f64 = a
        .iter()
        .flatten()
        .map(|e| e.norm_sqr())
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    for _sweep in 0..60 {
        let off: f64 = (0..N)
            .flat_map(|p| ((p + 1)..N).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q].norm_sqr())
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[p][q];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = phase * (t * c);
                // Column rotation: cols p,q of A ← A·R.
                for r in 0..N {
                    let arp = a[r][p];
                    let arq = a[r][q];
                    a[r][p] = c * arp - s.conj() * arq;
                    a[r][q] = s * arp + c * arq;
                }
                // Row rotation: rows p,q of A ← R†·A.
                for col in 0..N {
                    let apc = a[p][col];
                    let aqc = a[q][col];
                    a[p][col] = c * apc - s * aqc;
                    a[q][col] = s.conj() * apc + c * aqc;
                }
            }
        }
    }
    let mut eigs = [0.0; N];
    for (i, e) in eigs.iter_mut().enumerate() {
        *e = a[i][i].re;
    }
    eigs.sort_by(|x, y| y.partial_cmp(x).unwrap());
    eigs
}

/// Singular values of a 2×2 matrix via the closed-form spectrum of a†a.
pub fn singular_values2(m: &Mat2) -> [f64; 2] {
    let g = mat_mul(&mat_adjoint(m), m);
    let eig = hermitian_eigenvalues2(&g);
    [eig[0].max(0.0).sqrt(), eig[1].max(0.0).sqrt()]
}

/// Singular values of a 4×4 matrix via Jacobi on a†a.
pub fn singular_values4(m: &Mat4) -> [f64; 4] {
    let g = mat_mul(&mat_adjoint(m), m);
    let eig = hermitian_eigenvalues_jacobi(&g);
    eig.map(|e| e.max(0.0).sqrt())
}

/// Trace norm ‖m‖₁ = Σ singular values of a 2×2 matrix.
pub fn trace_norm2(m: &Mat2) -> f64 {
    singular_values2(m).iter().sum()
}

/// Trace norm ‖m‖₁ = Σ singular values of a 4×4 matrix.
pub fn trace_norm4(m: &Mat4) -> f64 {
    singular_values4(m).iter().sum()
}

/* Domain types ****************************************************************/

/// 2×2 Hermitian unit-trace matrix with a Bloch-vector view.
///
/// Validation enforces Hermiticity and trace to 1e−12 and positivity up to a
/// 1e−10 slack; Bloch vectors within that slack outside the unit ball are
/// floored back onto it, anything worse is rejected.
#[derive(Clone, Copy, Debug)]
pub struct QubitDensity {
    bloch: [f64; 3],
}

impl QubitDensity {
    pub fn from_matrix(m: &Mat2) -> Result<Self> {
        if !mat_is_finite(m) {
            return Err(Error::InvalidInput("non-finite density matrix".into()));
        }
        let herm = hermitian_defect(m);
        if herm > DENSITY_TOL {
            return Err(Error::InvalidInput(format!(
                "density matrix not Hermitian (defect {herm:.3e})"
            )));
        }
        let tr = mat_trace(m);
        if (tr - ONE).norm() > DENSITY_TOL {
            return Err(Error::InvalidInput(format!(
                "density matrix trace {tr} ≠ 1"
            )));
        }
        let bloch = [2.0 * m[0][1].re, -2.0 * m[0][1].im, m[0][0].re - m[1][1].re];
        Self::from_bloch(bloch)
    }

    /// Build from a Bloch vector; ‖r‖ ∈ (1, 1+1e−10] is floored to the
    /// sphere (PSD flooring), larger norms are invalid.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        if !r.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidInput("non-finite Bloch vector".into()));
        }
        let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if norm > 1.0 + BLOCH_TOL {
            return Err(Error::InvalidInput(format!(
                "Bloch vector norm {norm} exceeds 1 beyond tolerance"
            )));
        }
        let r = if norm > 1.0 {
            [r[0] / norm, r[1] / norm, r[2] / norm]
        } else {
            r
        };
        Ok(Self { bloch: r })
    }

    /// Projector |φ⟩⟨φ| of a normalized amplitude pair.
    pub fn pure(phi: [C64; 2]) -> Result<Self> {
        let nrm = phi[0].norm_sqr() + phi[1].norm_sqr();
        if (nrm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("state vector norm² {nrm} ≠ 1")));
        }
        let m = [
            [C64::new(phi[0].norm_sqr(), 0.0), phi[0] * phi[1].conj()],
            [phi[1] * phi[0].conj(), C64::new(phi[1].norm_sqr(), 0.0)],
        ];
        Self::from_matrix(&m)
    }

    pub fn maximally_mixed() -> Self {
        Self { bloch: [0.0; 3] }
    }

    pub fn bloch(&self) -> [f64; 3] {
        self.bloch
    }

    /// Dense (I + r·σ)/2 form.
    pub fn matrix(&self) -> Mat2 {
        let [x, y, z] = self.bloch;
        [
            [C64::new(0.5 * (1.0 + z), 0.0), C64::new(0.5 * x, -0.5 * y)],
            [C64::new(0.5 * x, 0.5 * y), C64::new(0.5 * (1.0 - z), 0.0)],
        ]
    }

    /// Purity tr ρ² = (1 + ‖r‖²)/2.
    pub fn purity(&self) -> f64 {
        let r2: f64 = self.bloch.iter().map(|c| c * c).sum();
        0.5 * (1.0 + r2)
    }
}

/// r_μ = tr(ρ σ^μ).
pub fn bloch_from_density(rho: &QubitDensity) -> [f64; 3] {
    rho.bloch()
}

/// (I + r·σ)/2, rejecting vectors outside the tolerance ball.
pub fn density_from_bloch(r: [f64; 3]) -> Result<QubitDensity> {
    QubitDensity::from_bloch(r)
}

/// Amplitudes of the pure state with Bloch vector `r` (requires ‖r‖ = 1).
pub fn pure_from_bloch(r: [f64; 3]) -> Result<[C64; 2]> {
    let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "pure state needs a unit Bloch vector, got norm {norm}"
        )));
    }
    let [x, y, z] = [r[0] / norm, r[1] / norm, r[2] / norm];
    let c = ((1.0 + z) / 2.0).sqrt();
    let s = ((1.0 - z) / 2.0).sqrt();
    if c < 1e-12 {
        return Ok([ZERO, ONE]);
    }
    // Relative phase from the equatorial components: φ₁/φ₀ ∝ x + i y.
    let t = (x * x + y * y).sqrt();
    let phase = if t < 1e-300 {
        ONE
    } else {
        C64::new(x / t, y / t)
    };
    Ok([C64::new(c, 0.0), phase * s])
}

/// 2×2 or 4×4 operator pinned to an explicit set of qubit sites (1-based;
/// qubit 1 is the central qubit).
#[derive(Clone, Debug)]
pub struct SmallOperator {
    support: Vec<usize>,
    matrix: OpMatrix,
}

#[derive(Clone, Debug)]
pub enum OpMatrix {
    Two(Mat2),
    Four(Mat4),
}

impl SmallOperator {
    pub fn one_qubit(qubit: usize, m: Mat2) -> Result<Self> {
        if qubit == 0 {
            return Err(Error::InvalidInput("qubit indices are 1-based".into()));
        }
        if !mat_is_finite(&m) {
            return Err(Error::InvalidInput("non-finite operator entries".into()));
        }
        Ok(Self {
            support: vec![qubit],
            matrix: OpMatrix::Two(m),
        })
    }

    pub fn two_qubit(q1: usize, q2: usize, m: Mat4) -> Result<Self> {
        if q1 == 0 || q2 == 0 || q1 == q2 {
            return Err(Error::InvalidInput(format!(
                "invalid two-qubit support ({q1}, {q2})"
            )));
        }
        if !mat_is_finite(&m) {
            return Err(Error::InvalidInput("non-finite operator entries".into()));
        }
        Ok(Self {
            support: vec![q1, q2],
            matrix: OpMatrix::Four(m),
        })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn dim(&self) -> usize {
        match self.matrix {
            OpMatrix::Two(_) => 2,
            OpMatrix::Four(_) => 4,
        }
    }

    pub fn matrix(&self) -> &OpMatrix {
        &self.matrix
    }

    /// Sum of singular values; closed form for 2×2, Jacobi for 4×4.
    pub fn trace_norm(&self) -> f64 {
        match &self.matrix {
            OpMatrix::Two(m) => trace_norm2(m),
            OpMatrix::Four(m) => trace_norm4(m),
        }
    }
}

/// Trace norm of any finite small operator.
pub fn trace_norm(op: &SmallOperator) -> f64 {
    op.trace_norm()
}

/// ‖a − b‖₁ in the unnormalized convention (range [0, 2] for qubit states).
pub fn trace_distance(a: &QubitDensity, b: &QubitDensity) -> f64 {
    let d = mat_sub(&a.matrix(), &b.matrix());
    let eig = hermitian_eigenvalues2(&d);
    eig[0].abs() + eig[1].abs()
}

/// The symmetric pair coupling Σ_μ v_μ σ^μ ⊗ σ^μ on qubits (1, 2).
pub fn pair_interaction(v: &PauliVector) -> SmallOperator {
    SmallOperator {
        support: vec![1, 2],
        matrix: OpMatrix::Four(pair_interaction_matrix(v)),
    }
}

/// Dense 4×4 form of the pair coupling.
pub fn pair_interaction_matrix(v: &PauliVector) -> Mat4 {
    let mut m = mat_zero::<4>();
    for (mu, &c) in v.components().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let t = tensor2(&SIGMA[mu], &SIGMA[mu]);
        m = mat_add(&m, &mat_scale(C64::new(c, 0.0), &t));
    }
    m
}
