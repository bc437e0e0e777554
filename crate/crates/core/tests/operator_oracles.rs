use cqed_core::device::{CavityMode, QubitParameters, SystemModel};
use cqed_core::linalg::CMatrix;
use cqed_core::operators::{
    annihilation, creation, hamiltonian_dispersive, hamiltonian_driven_qubit_detuned, number_operator, tensor_product,
    FockOperator,
};
use cqed_core::units::{hz_to_sim, KHZ, MHZ};
use cqed_core::Complex64;
use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;

fn to_nalgebra(m: &CMatrix) -> DMatrix<Complex<f64>> {
    let d = m.dim();
    DMatrix::from_fn(d, d, |i, j| {
        let z = m[(i, j)];
        Complex::new(z.re, z.im)
    })
}

/// Eigenpairs from nalgebra, eigenvalue paired with the basis index its
/// eigenvector weights most.
fn oracle_spectrum(m: &CMatrix) -> Vec<(usize, f64)> {
    let eig = to_nalgebra(m).symmetric_eigen();
    let mut out: Vec<(usize, f64)> = (0..m.dim())
        .map(|k| {
            let v = eig.eigenvectors.column(k);
            let (idx, _) = v.iter().enumerate().fold((0, -1.0), |b, (i, z)| if z.norm() > b.1 { (i, z.norm()) } else { b });
            (idx, eig.eigenvalues[k])
        })
        .collect();
    out.sort_by_key(|p| p.0);
    out
}

fn nbse2_like() -> SystemModel {
    let qubit = QubitParameters::new(12.611e9, -1.3 * MHZ, 0.153e6, 0.0765e6).unwrap();
    let mode = CavityMode::new("TM110", 7.1873e9, 1.7e5, 1.7e5, 0.0).unwrap().with_coupling(67.0 * MHZ);
    SystemModel::new(qubit, vec![mode], None).unwrap()
}

#[test]
fn dispersive_cross_kerr_from_eigendecomposition() {
    let system = nbse2_like();
    let h = hamiltonian_dispersive(&system, 0, 3, 3).unwrap();
    let spec = oracle_spectrum(h.matrix());
    let e = |na: usize, nb: usize| spec[na * 3 + nb].1;
    let chi = hz_to_sim(system.kerr(0).unwrap().cross_kerr);
    let got = e(1, 1) - e(1, 0) - e(0, 1) + e(0, 0);
    assert!((got - chi).abs() < 1e-9 * e(1, 1).abs(), "{got} vs {chi}");
    assert!((e(1, 0) - e(0, 0) - hz_to_sim(7.1873e9)).abs() < 1e-12 * e(1, 0));
}

#[test]
fn two_level_restriction_matches_dispersive_shift() {
    let system = nbse2_like();
    let k = system.kerr(0).unwrap();
    for dim in 2..=6 {
        let h = hamiltonian_dispersive(&system, 0, dim, dim).unwrap();
        let spec = oracle_spectrum(h.matrix());
        let e = |na: usize, nb: usize| spec[na * dim + nb].1;
        let shift_g = e(1, 0) - e(0, 0);
        let shift_e = e(1, 1) - e(0, 1);
        assert!((shift_g - hz_to_sim(7.1873e9)).abs() < 1e-11);
        assert!((shift_e - shift_g - hz_to_sim(k.cross_kerr)).abs() < 1e-11);
    }
}

#[test]
fn qubit_second_transition_is_lower_by_anharmonicity() {
    let system = nbse2_like();
    let h = hamiltonian_dispersive(&system, 0, 2, 4).unwrap();
    let spec = oracle_spectrum(h.matrix());
    let d = (spec[2].1 - spec[1].1) - (spec[1].1 - spec[0].1);
    assert!((d - hz_to_sim(-1.3 * MHZ)).abs() < 1e-12, "{d}");
}

#[test]
fn jacobi_eigenvalues_agree_with_nalgebra() {
    let h = hamiltonian_driven_qubit_detuned(-0.03 * MHZ, 210.0 * MHZ, 1e-6, 0.4 * MHZ, 8).unwrap();
    let mut ours = h.eigenvalues();
    ours.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut theirs: Vec<f64> = to_nalgebra(h.matrix()).symmetric_eigen().eigenvalues.iter().copied().collect();
    theirs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (a, b) in ours.iter().zip(&theirs) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

fn random_hermitian(dim: usize, vals: &[f64]) -> FockOperator {
    let mut k = 0;
    let mut next = || {
        k += 1;
        vals[(k - 1) % vals.len()]
    };
    let mut m = CMatrix::zeros(dim);
    for i in 0..dim {
        m[(i, i)] = Complex64::new(next(), 0.0);
        for j in (i + 1)..dim {
            let z = Complex64::new(next(), next());
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    FockOperator::from_matrix(m).unwrap()
}

proptest! {
    #[test]
    fn kron_trace_factorises(
        da in 2usize..5,
        db in 2usize..5,
        va in proptest::collection::vec(-3.0f64..3.0, 25),
        vb in proptest::collection::vec(-3.0f64..3.0, 25),
    ) {
        let a = random_hermitian(da, &va);
        let b = random_hermitian(db, &vb);
        let ab = tensor_product(&a, &b).unwrap();
        let expect = a.trace() * b.trace();
        prop_assert!((ab.trace() - expect).norm() < 1e-12 * (1.0 + expect.norm()));
    }

    #[test]
    fn driven_hamiltonian_is_hermitian(
        kerr in -5.0f64..5.0,
        g in 1.0f64..500.0,
        n_eff in 0.0f64..1e-3,
        det in -10.0f64..10.0,
        dim in 2usize..12,
    ) {
        let h = hamiltonian_driven_qubit_detuned(kerr * MHZ, g * MHZ, n_eff, det * MHZ, dim).unwrap();
        let norm = h.matrix().frobenius_norm().max(f64::MIN_POSITIVE);
        prop_assert!(h.hermiticity_defect() / norm < 1e-12);
    }

    #[test]
    fn dispersive_hamiltonian_is_hermitian(g in 1.0f64..200.0, alpha in -5.0f64..-0.01, dc in 2usize..6, dq in 2usize..6) {
        let qubit = QubitParameters::new(12.611e9, alpha * MHZ, 0.0, 0.0).unwrap();
        let mode = CavityMode::new("m", 7.1873e9, 26.5 * KHZ, 26.5 * KHZ, 0.0).unwrap().with_coupling(g * MHZ);
        let system = SystemModel::new(qubit, vec![mode], None).unwrap();
        let h = hamiltonian_dispersive(&system, 0, dc, dq).unwrap();
        prop_assert!(h.hermiticity_defect() / h.matrix().frobenius_norm() < 1e-12);
    }

    #[test]
    fn ladder_commutator_truncation_identity(d in 2usize..40) {
        let a = annihilation(d).unwrap();
        let c = a.commutator(&creation(d).unwrap()).unwrap();
        let tol = 4.0 * f64::EPSILON * d as f64;
        for i in 0..d {
            for j in 0..d {
                let expect = match (i == j, i == d - 1) {
                    (true, true) => 1.0 - d as f64,
                    (true, false) => 1.0,
                    _ => 0.0,
                };
                let z = c.get(i, j);
                if i == j {
                    prop_assert!((z.re - expect).abs() <= tol && z.im == 0.0);
                } else {
                    prop_assert_eq!(z, Complex64::new(0.0, 0.0));
                }
            }
        }
        let n = number_operator(d).unwrap();
        for k in 0..d {
            prop_assert_eq!(n.get(k, k).re, k as f64);
        }
    }
}
