use nalgebra::DMatrix;
use proptest::prelude::*;
use qmix::generators::{cp_decompose, qft, random_circuit, GateProbabilities};
use qmix::sim::{equal_up_to_phase, unitary_of};
use qmix::simplify::{best_simplify, simplify, Strategy};
use qmix::{Circuit, Gate};

fn strip_phases(c: &Circuit) -> Circuit {
    let gates = c.gates().iter().copied().filter(|g| !matches!(g, Gate::ZPhase(..) | Gate::S(_))).collect();
    Circuit::from_gates(c.width(), gates).unwrap()
}

#[test]
fn squashed_cp_loses_both_cnots() {
    let mut gates = cp_decompose(0, 1, 0.3).unwrap();
    gates.remove(2);
    let c = Circuit::from_gates(2, gates).unwrap();
    let s = best_simplify(&c);
    assert_eq!(s.two_qubit_count(), 0);
    assert_eq!(s.len(), 2);
    assert!(equal_up_to_phase(&unitary_of(&s).unwrap(), &unitary_of(&c).unwrap(), 1e-12));
}

#[test]
fn phase_free_qft_reduces_to_hadamards() {
    let c = strip_phases(&qft(4).unwrap());
    let s = best_simplify(&c);
    assert_eq!(s.two_qubit_count(), 0);
    let ladder = Circuit::from_gates(4, (0..4).map(Gate::H).collect()).unwrap();
    assert!(equal_up_to_phase(&unitary_of(&s).unwrap(), &unitary_of(&ladder).unwrap(), 1e-12));
}

#[test]
fn qft_baselines_survive_simplification() {
    assert_eq!(best_simplify(&qft(8).unwrap()).two_qubit_count(), 56);
    assert_eq!(best_simplify(&qft(24).unwrap()).two_qubit_count(), 552);
}

#[test]
fn strategies_by_name() {
    assert_eq!(Strategy::by_name("basic").unwrap().name, "basic");
    assert_eq!(Strategy::by_name("aggressive").unwrap().name, "aggressive");
    assert!(Strategy::by_name("zx").is_none());
}

fn check(c: &Circuit) -> Result<(), TestCaseError> {
    let u = unitary_of(c).unwrap();
    for s in [Strategy::basic(), Strategy::aggressive()] {
        let out = simplify(c, &s);
        prop_assert!(equal_up_to_phase(&unitary_of(&out).unwrap(), &u, 1e-9), "strategy {}", s.name);
        prop_assert!(out.two_qubit_count() <= c.two_qubit_count());
        prop_assert!(out.len() <= c.len());
        prop_assert_eq!(simplify(&out, &s), out.clone(), "not a fixpoint under {}", s.name);
    }
    let best = best_simplify(c);
    prop_assert!(best.two_qubit_count() <= c.two_qubit_count());
    prop_assert!(equal_up_to_phase(&unitary_of(&best).unwrap(), &u, 1e-9));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn simplification_is_sound(width in 2usize..=5, depth in 0usize..=60, seed in any::<u64>()) {
        check(&random_circuit(width, depth, &GateProbabilities::default(), seed).unwrap())?;
    }

    #[test]
    fn phase_heavy_circuits_are_sound(width in 2usize..=4, depth in 0usize..=60, seed in any::<u64>()) {
        let probs = GateProbabilities::new(0.4, 0.1, 0.2, 0.3).unwrap();
        check(&random_circuit(width, depth, &probs, seed).unwrap())?;
    }
}

#[test]
fn empty_stays_empty() {
    let c = Circuit::new(3);
    assert!(best_simplify(&c).is_empty());
    let d = 8;
    assert!(equal_up_to_phase(&unitary_of(&best_simplify(&c)).unwrap(), &DMatrix::identity(d, d), 1e-15));
}
