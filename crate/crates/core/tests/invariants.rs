use approx::assert_relative_eq;
use dfs_core::cavity::reflection_coefficient;
use dfs_core::linalg::{self, c, random_unitary, CVector};
use dfs_core::logical::{self, LogicalState};
use dfs_core::noise::{echo_filter_weight, filter_function_dfs, EchoSequence};
use dfs_core::protocols::{
    homodyne_error_probability, leakage_detect, logical_hadamard, teleport_input, teleported_cnot, Mode, ProtocolRun,
};
use dfs_core::qsim::{p34, QuantumRegister, SeededOutcomes};
use dfs_core::RngSeed;
use proptest::prelude::*;

fn state(re: &[f64], im: &[f64]) -> Option<CVector> {
    let v = CVector::from_iterator(re.len(), re.iter().zip(im).map(|(&a, &b)| c(a, b)));
    let n = v.norm();
    (n > 1e-3).then(|| v.unscale(n))
}

fn amps(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(-1.0..1.0f64, n), prop::collection::vec(-1.0..1.0f64, n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitaries_preserve_norm(seed in any::<u64>(), t0 in 0usize..4, t1 in 0usize..4) {
        prop_assume!(t0 != t1);
        let mut rng = RngSeed(seed).rng();
        let mut reg = QuantumRegister::from_amplitudes(linalg::random_state(16, &mut rng)).unwrap();
        reg.apply_unitary(&random_unitary(4, &mut rng), &[t0, t1]).unwrap();
        assert_relative_eq!(reg.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn projective_probabilities_sum_to_one(seed in any::<u64>()) {
        let mut rng = RngSeed(seed).rng();
        let reg = QuantumRegister::from_amplitudes(linalg::random_state(8, &mut rng)).unwrap();
        let p = reg.probabilities(&p34(), &[0, 2]).unwrap();
        assert_relative_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        prop_assert!(p.iter().all(|&x| x >= -1e-15));
    }

    #[test]
    fn collective_dephasing_leaves_code_space_invariant((re, im) in amps(4), phi in -10.0..10.0f64) {
        let Some(psi) = state(&re, &im) else { return Ok(()) };
        let layout = logical::standard_layout(2);
        let mut reg = logical::encode(&psi, &layout, 4).unwrap();
        logical::collective_dephasing(&mut reg, layout[0], phi).unwrap();
        logical::collective_dephasing(&mut reg, layout[1], -0.5 * phi).unwrap();
        let (rho, leak) = logical::logical_density(&reg, &layout).unwrap();
        prop_assert!(leak < 1e-14);
        prop_assert!(linalg::fidelity_with_pure(&rho, &psi) > 1.0 - 1e-12);
    }

    #[test]
    fn hadamard_output_is_branch_independent((re, im) in amps(2), seed in any::<u64>()) {
        let Some(psi) = state(&re, &im) else { return Ok(()) };
        let mut run = ProtocolRun::from_logical_states(&[psi.clone(), LogicalState::Plus.amplitudes()], Mode::Ideal, RngSeed(0)).unwrap();
        let q = logical::standard_layout(2);
        logical_hadamard(&mut run, q[0], q[1], &mut SeededOutcomes::new(RngSeed(seed))).unwrap();
        let (rho, _) = run.logical_state(&[q[1]]).unwrap();
        prop_assert!(linalg::fidelity_with_pure(&rho, &(logical::hadamard_l() * &psi)) > 1.0 - 1e-10);
    }

    #[test]
    fn leakage_verdict_is_conclusive((re, im) in amps(4), seed in any::<u64>()) {
        let Some(sys) = state(&re, &im) else { return Ok(()) };
        let w_leak = sys[logical::LOCAL_LEAK_00].norm_sqr() + sys[logical::LOCAL_LEAK_11].norm_sqr();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = CVector::zeros(16);
        for s in 0..4 {
            v[s | (logical::LOCAL_ZERO_L << 2)] = sys[s] * h;
            v[s | (logical::LOCAL_ONE_L << 2)] = sys[s] * h;
        }
        let reg = QuantumRegister::from_amplitudes(v).unwrap();
        let q = logical::standard_layout(2);
        let mut run = ProtocolRun::new(reg, q.clone(), Mode::Ideal, RngSeed(0)).unwrap();
        let verdict = leakage_detect(&mut run, q[0], q[1], &mut SeededOutcomes::new(RngSeed(seed))).unwrap();
        let (_, leak_after) = run.logical_state(&[q[0]]).unwrap();
        if verdict.leaked {
            prop_assert!(w_leak > 0.0);
            prop_assert!(leak_after > 1.0 - 1e-10);
        } else {
            prop_assert!(w_leak < 1.0);
            prop_assert!(leak_after < 1e-10);
        }
    }

    #[test]
    fn homodyne_error_probability_is_bounded_and_decreasing(a in 0.0..5.0f64, d in 1e-3..1.0f64) {
        let p = homodyne_error_probability(a);
        prop_assert!((0.0..=0.5).contains(&p));
        prop_assert!(homodyne_error_probability(a + d) <= p);
    }

    #[test]
    fn reflection_is_passive(w in -1e8..1e8f64, g in 0.0..3e8f64) {
        let r = reflection_coefficient(w, 1.5e7, 1.6e7, g * g);
        prop_assert!(r.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn filter_functions_are_nonnegative(w in -1e6..1e6f64, dt in 1e-6..1e-3f64) {
        prop_assert!(filter_function_dfs(w, dt) >= 0.0);
        prop_assert!(echo_filter_weight(w, &EchoSequence::new(dt, 2).unwrap()) >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn teleported_cnot_matches_direct_gate((re, im) in amps(4), seed in any::<u64>()) {
        let Some(psi) = state(&re, &im) else { return Ok(()) };
        let mut run = ProtocolRun::from_logical_amplitudes(&teleport_input(&psi), 6, Mode::Ideal, RngSeed(0)).unwrap();
        let q = logical::standard_layout(6);
        teleported_cnot(&mut run, [q[0], q[1], q[2], q[3], q[4], q[5]], &mut SeededOutcomes::new(RngSeed(seed))).unwrap();
        let mut expect = psi.clone();
        expect.swap_rows(1, 3);
        let (rho, _) = run.logical_state(&[q[2], q[4]]).unwrap();
        prop_assert!(linalg::fidelity_with_pure(&rho, &expect) > 1.0 - 1e-10);
    }
}

#[test]
fn seeded_runs_are_reproducible() {
    let go = || {
        let psi = linalg::random_state(4, &mut RngSeed(3).rng());
        let mut run = ProtocolRun::from_logical_amplitudes(&teleport_input(&psi), 6, Mode::Ideal, RngSeed(0)).unwrap();
        let q = logical::standard_layout(6);
        teleported_cnot(&mut run, [q[0], q[1], q[2], q[3], q[4], q[5]], &mut SeededOutcomes::new(RngSeed(42))).unwrap();
        run.record().to_lines()
    };
    assert_eq!(go(), go());
}
