//! Property-based invariants: norm axioms, metric axioms, convention checks,
//! and the algebraic identities the modules promise.

use duality_core::full::FullState;
use duality_core::meanfield::{mf_integrate_bloch, mf_rhs_bloch, mf_rhs_matrix};
use duality_core::pauli::{
    self, hermitian_defect, mat_add, mat_commutator, mat_scale, mat_zero, pair_interaction,
    pair_interaction_matrix, trace_distance, trace_norm4, Mat4, PauliVector, QubitDensity, SWAP,
};
use duality_core::schedule::{Schedule, Segment};
use duality_core::sector::SectorState;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

prop_compose! {
    fn hermitian4()(entries in prop::array::uniform32(-1.0f64..1.0)) -> Mat4 {
        let mut g = mat_zero::<4>();
        let mut it = entries.into_iter();
        for r in 0..4 {
            for col in 0..4 {
                g[r][col] = c(it.next().unwrap(), it.next().unwrap());
            }
        }
        let mut a = mat_zero::<4>();
        for r in 0..4 {
            for col in 0..4 {
                a[r][col] = g[r][col] + g[col][r].conj();
            }
        }
        a
    }
}

prop_compose! {
    fn bloch_in_ball()(raw in prop::array::uniform3(-1.0f64..1.0)) -> [f64; 3] {
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.999 {
            raw.map(|x| x * 0.999 / norm)
        } else {
            raw
        }
    }
}

prop_compose! {
    fn pauli_vector(scale: f64)(raw in prop::array::uniform3(-1.0f64..1.0)) -> PauliVector {
        PauliVector::new(raw[0] * scale, raw[1] * scale, raw[2] * scale).unwrap()
    }
}

prop_compose! {
    fn normalized_phi()(raw in prop::array::uniform4(-1.0f64..1.0)) -> [C64; 2] {
        let phi = [c(raw[0], raw[1]), c(raw[2] + 2.0, raw[3])];
        let norm = (phi[0].norm_sqr() + phi[1].norm_sqr()).sqrt();
        [phi[0] / norm, phi[1] / norm]
    }
}

proptest! {
    #[test]
    fn trace_norm_triangle_inequality(a in hermitian4(), b in hermitian4()) {
        let sum = mat_add(&a, &b);
        prop_assert!(trace_norm4(&sum) <= trace_norm4(&a) + trace_norm4(&b) + 1e-9);
    }

    #[test]
    fn trace_norm_absolute_homogeneity(a in hermitian4(), s in -5.0f64..5.0) {
        let scaled = mat_scale(c(s, 0.0), &a);
        let lhs = trace_norm4(&scaled);
        let rhs = s.abs() * trace_norm4(&a);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs));
    }

    #[test]
    fn trace_distance_metric_axioms(
        ra in bloch_in_ball(),
        rb in bloch_in_ball(),
        rc in bloch_in_ball(),
    ) {
        let a = QubitDensity::from_bloch(ra).unwrap();
        let b = QubitDensity::from_bloch(rb).unwrap();
        let cc = QubitDensity::from_bloch(rc).unwrap();
        let dab = trace_distance(&a, &b);
        let dba = trace_distance(&b, &a);
        prop_assert!(dab >= 0.0);
        prop_assert!((dab - dba).abs() < 1e-12);
        prop_assert!(trace_distance(&a, &a) < 1e-12);
        prop_assert!(dab <= trace_distance(&a, &cc) + trace_distance(&cc, &b) + 1e-12);
    }

    #[test]
    fn trace_distance_is_twice_the_half_normalized_convention(
        ra in bloch_in_ball(),
        rb in bloch_in_ball(),
    ) {
        // For qubits the unnormalized distance equals the Euclidean Bloch
        // distance, i.e. twice the conventional ½‖·‖₁ distance.
        let a = QubitDensity::from_bloch(ra).unwrap();
        let b = QubitDensity::from_bloch(rb).unwrap();
        let euclid = ra
            .iter()
            .zip(&rb)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        prop_assert!((trace_distance(&a, &b) - euclid).abs() < 1e-12);
    }

    #[test]
    fn pair_interaction_is_swap_symmetric(v in pauli_vector(3.0)) {
        let m = pair_interaction_matrix(&v);
        prop_assert!(hermitian_defect(&m) < 1e-14);
        let comm = mat_commutator(&m, &SWAP);
        let worst = comm.iter().flatten().map(|e| e.norm()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-13);
    }

    #[test]
    fn single_axis_couplings_saturate_the_norm_bound(
        mag in -4.0f64..4.0,
        axis in 0usize..3,
    ) {
        let mut comps = [0.0; 3];
        comps[axis] = mag;
        let v = PauliVector::new(comps[0], comps[1], comps[2]).unwrap();
        let tn = pair_interaction(&v).trace_norm();
        prop_assert!((tn - v.pair_trace_norm_bound()).abs() < 1e-10);
    }

    #[test]
    fn multi_axis_couplings_respect_the_norm_bound(v in pauli_vector(3.0)) {
        let tn = pair_interaction(&v).trace_norm();
        prop_assert!(tn <= v.pair_trace_norm_bound() + 1e-10);
        // And the norm never collapses below the largest single axis.
        let vmax = v.components().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert!(tn >= 4.0 * vmax - 1e-10);
    }

    #[test]
    fn schedule_bound_inequality_holds(
        v1 in pauli_vector(2.0),
        v2 in pauli_vector(2.0),
        h in pauli_vector(1.0),
    ) {
        let s = Schedule::new(
            vec![
                Segment { t_start: 0.0, h0: h, v: v1 },
                Segment { t_start: 0.5, h0: h, v: v2 },
            ],
            1.0,
        ).unwrap();
        let b = s.bounds();
        prop_assert!(4.0 * b.v_star <= b.v_m + 1e-12);
        prop_assert!(b.v_m <= 4.0 * 3f64.sqrt() * b.v_star + 1e-12);
        if b.v_m > 0.0 {
            // Prefactor of the closed-form bound stays ≤ 3/2.
            prop_assert!(6.0 * b.v_star / b.v_m <= 1.5 + 1e-12);
        }
    }

    #[test]
    fn sampling_is_piecewise_constant(
        v1 in pauli_vector(2.0),
        v2 in pauli_vector(2.0),
        t in 0.0f64..0.499,
        u in 0.0f64..0.499,
    ) {
        let s = Schedule::new(
            vec![
                Segment { t_start: 0.0, h0: PauliVector::ZERO, v: v1 },
                Segment { t_start: 0.5, h0: PauliVector::ZERO, v: v2 },
            ],
            1.0,
        ).unwrap();
        prop_assert_eq!(s.sample(t).unwrap(), s.sample(u).unwrap());
        prop_assert_eq!(s.sample(0.5 + t).unwrap(), s.sample(0.5 + u).unwrap());
    }

    #[test]
    fn mf_rhs_commutator_and_bloch_forms_agree(
        r in bloch_in_ball(),
        h0 in pauli_vector(2.0),
        v in pauli_vector(2.0),
    ) {
        let x = QubitDensity::from_bloch(r).unwrap();
        let m = mf_rhs_matrix(&x, &h0, &v);
        let rb = mf_rhs_bloch(r, &h0, &v);
        let from_matrix = [2.0 * m[0][1].re, -2.0 * m[0][1].im, m[0][0].re - m[1][1].re];
        for (a, b) in from_matrix.iter().zip(&rb) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn integrated_flow_matches_rhs_to_second_order(
        r_raw in prop::array::uniform3(-1.0f64..1.0),
        h0 in pauli_vector(1.0),
        v in pauli_vector(1.0),
    ) {
        // Central difference of the integrated trajectory reproduces the
        // stated derivative up to the O(h²) discretization of the stencil.
        let norm = r_raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(norm > 0.1);
        let r0 = r_raw.map(|x| x / norm);
        let s = Schedule::constant(h0, v, 1.0).unwrap();
        let h = 1e-3;
        let t = 0.3;
        let traj = mf_integrate_bloch(r0, &s, &[t - h, t, t + h], 1e-4).unwrap();
        let b = traj.blochs();
        let fd = [
            (b[2][0] - b[0][0]) / (2.0 * h),
            (b[2][1] - b[0][1]) / (2.0 * h),
            (b[2][2] - b[0][2]) / (2.0 * h),
        ];
        let rhs = mf_rhs_bloch(b[1], &h0, &v);
        for (f, d) in fd.iter().zip(&rhs) {
            prop_assert!((f - d).abs() < 2e-4, "{fd:?} vs {rhs:?}");
        }
    }

    #[test]
    fn bloch_roundtrip_is_exact(r in bloch_in_ball()) {
        let rho = QubitDensity::from_bloch(r).unwrap();
        let back = QubitDensity::from_matrix(&rho.matrix()).unwrap();
        let m0 = rho.matrix();
        let m1 = back.matrix();
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((m0[i][j] - m1[i][j]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn initial_states_are_normalized(phi in normalized_phi()) {
        let full = FullState::product_init(phi, 6).unwrap();
        let n2: f64 = full.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((n2 - 1.0).abs() < 1e-12);

        let sector = SectorState::coherent_init(phi, 300).unwrap();
        let n2: f64 = sector.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((n2 - 1.0).abs() < 1e-11);

        // The two representations agree on the initial central state.
        let d = trace_distance(
            &full.reduced_central().unwrap(),
            &QubitDensity::pure(phi).unwrap(),
        );
        prop_assert!(d < 1e-12);
    }

    #[test]
    fn pure_states_sit_on_the_sphere(phi in normalized_phi()) {
        let rho = QubitDensity::pure(phi).unwrap();
        prop_assert!((rho.purity() - 1.0).abs() < 1e-12);
        let back = pauli::pure_from_bloch(rho.bloch()).unwrap();
        // Same state up to global phase.
        let overlap = (back[0].conj() * phi[0] + back[1].conj() * phi[1]).norm();
        prop_assert!((overlap - 1.0).abs() < 1e-10);
    }
}
