use cqed_core::dynamics::{
    basis_state, calibrate_pi_pulse, lindblad_evolve, rabi_experiment, rabi_frequency_analytic, t1_experiment,
    truncation_convergence, DrivenQubit, LindbladSpec,
};
use cqed_core::estimation::{fit_exponential, Trace};
use cqed_core::operators::{annihilation, hamiltonian_driven_qubit_detuned, number_operator};
use cqed_core::units::MHZ;
use proptest::prelude::*;

const GAMMA_Q: f64 = 0.153e6;

fn qubit(dim: usize, dephasing: f64) -> DrivenQubit {
    DrivenQubit {
        coupling: 210.0 * MHZ,
        kerr: -0.03 * MHZ,
        relaxation_rate: GAMMA_Q,
        dephasing_rate: dephasing,
        qubit_minus_drive: 0.0,
        dim,
    }
}

#[test]
fn two_level_damped_rabi_matches_formula() {
    for nu_r in [0.2e6, 1.0e6, 5.0e6] {
        let q = DrivenQubit { dephasing_rate: 0.0, ..qubit(2, 0.0) };
        let n_eff = (nu_r / (2.0 * q.coupling)).powi(2);
        let expect = rabi_frequency_analytic(q.coupling, n_eff, GAMMA_Q).unwrap().damped;
        let window = 6.0 / nu_r;
        let durations: Vec<f64> = (0..600).map(|i| window * i as f64 / 599.0).collect();
        let got = rabi_experiment(&q, n_eff, &durations).unwrap().frequency;
        assert!((got / expect - 1.0).abs() < 0.01, "{nu_r}: {got} vs {expect}");
    }
}

#[test]
fn weak_drive_trace_converged_in_truncation() {
    let n_eff = 1.26e-4f64.powi(2);
    let linear = 2.0 * 210.0 * MHZ * n_eff.sqrt();
    let durations: Vec<f64> = (0..200).map(|i| 4.0 / linear * i as f64 / 199.0).collect();
    let change = truncation_convergence(
        |dim| Ok(rabi_experiment(&qubit(dim, GAMMA_Q / 2.0), n_eff, &durations)?.ground_population),
        6,
    )
    .unwrap();
    assert!(change < 1e-3, "{change}");
}

#[test]
fn relaxation_after_pi_pulse_recovers_t1() {
    let q = DrivenQubit { dephasing_rate: GAMMA_Q / 2.0, ..qubit(2, 0.0) };
    let n_eff = (5.0e6 / (2.0 * q.coupling)).powi(2);
    let pulse = calibrate_pi_pulse(&q, n_eff).unwrap();
    let delays: Vec<f64> = (0..40).map(|i| i as f64 * 1e-6).collect();
    let trace = t1_experiment(&q, Some(&pulse), &delays).unwrap();
    assert!(trace.ground_population[0] <= 0.05, "{}", trace.ground_population[0]);
    assert!(trace.ground_population[39] > 0.99);
    let fit = fit_exponential(&Trace::new(trace.delays, trace.ground_population).unwrap()).unwrap();
    assert!((fit.get("t1").unwrap() * GAMMA_Q - 1.0).abs() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn trace_preserved_and_state_physical(
        dim in 2usize..6,
        g_mhz in 10.0f64..300.0,
        sqrt_n in 1e-5f64..3e-3,
        kerr_mhz in -2.0f64..0.0,
        det_mhz in -1.0f64..1.0,
        gamma in 1e4f64..1e6,
    ) {
        let h = hamiltonian_driven_qubit_detuned(kerr_mhz * MHZ, g_mhz * MHZ, sqrt_n * sqrt_n, det_mhz * MHZ, dim).unwrap();
        let spec = LindbladSpec {
            hamiltonian: h,
            collapse: vec![(annihilation(dim).unwrap(), gamma), (number_operator(dim).unwrap(), gamma)],
            initial: basis_state(dim, 0).unwrap(),
            times: (0..20).map(|i| i as f64 * 2e-7).collect(),
        };
        for rho in lindblad_evolve(&spec).unwrap() {
            prop_assert!((rho.trace().re - 1.0).abs() < 1e-8);
            prop_assert!(rho.trace().im.abs() < 1e-12);
            prop_assert!(rho.hermiticity_defect() < 1e-12);
            let min = rho.hermitian_eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
            prop_assert!(min > -1e-9, "{}", min);
        }
    }
}
