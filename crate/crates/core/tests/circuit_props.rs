use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qmix::generators::{random_circuit, GateProbabilities};
use qmix::sim::{equal_up_to_phase, unitary_of};
use qmix::{normalize_phase, Angle, Circuit, Error, Gate};

fn z_matrix(beta: f64) -> DMatrix<C64> {
    DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::from_polar(1.0, beta)],
    )
}

fn s_power_z(s: u8, alpha: f64) -> DMatrix<C64> {
    let mut m = z_matrix(alpha);
    for _ in 0..s {
        m = z_matrix(PI / 2.0) * m;
    }
    m
}

#[test]
fn normalize_examples() {
    let (s, a) = normalize_phase(0.0).unwrap();
    assert_eq!((s, a.radians()), (0, 0.0));
    let (s, a) = normalize_phase(FRAC_PI_4).unwrap();
    assert_eq!((s, a.radians()), (0, FRAC_PI_4));
    let (s, a) = normalize_phase(-FRAC_PI_4).unwrap();
    assert_eq!(s, 3);
    assert!((a.radians() - FRAC_PI_4).abs() < 1e-15);

    let beta = 3.0 * PI / 5.0;
    let (s, a) = normalize_phase(beta).unwrap();
    assert!((s_power_z(s, a.radians()) - z_matrix(beta)).norm() < 1e-12);
    assert!(normalize_phase(f64::INFINITY).is_err());
    assert!(matches!(normalize_phase(f64::NAN), Err(Error::NonFiniteAngle(_))));
}

#[test]
fn angle_range_enforced() {
    assert!(Angle::new(FRAC_PI_4).is_ok());
    assert!(Angle::new(-FRAC_PI_4).is_err());
    assert!(Angle::new(1.0).is_err());
}

#[test]
fn parse_examples() {
    let c: Circuit = "h 0".parse().unwrap();
    assert_eq!(c.gates(), &[Gate::H(0)]);
    assert!(c.width() >= 1);

    let c: Circuit = "cnot 1 0\nzphase 0 0.3926990817".parse().unwrap();
    assert_eq!(c.len(), 2);
    assert_eq!(c.gates()[0], Gate::cnot(1, 0));
    assert!(matches!(c.gates()[1], Gate::ZPhase(0, a) if (a.radians() - FRAC_PI_8).abs() < 1e-10));
    assert_eq!(c.two_qubit_count(), 1);
}

#[test]
fn parse_errors_name_the_line() {
    let err = "qubits 2\nh 0\nfoo 1\n".parse::<Circuit>().unwrap_err();
    assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    let err = "qubits 2\ncnot 0 0\n".parse::<Circuit>().unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    let err = "qubits 1\nh 3\n".parse::<Circuit>().unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    assert!("zphase 0 nan".parse::<Circuit>().is_err());
}

#[test]
fn comments_and_sdg() {
    let c: Circuit = "# header\nqubits 1\nsdg 0 # trailing\n".parse().unwrap();
    assert_eq!(c.gates(), &[Gate::S(0), Gate::S(0), Gate::S(0)]);
}

#[test]
fn empty_circuit_counts() {
    let c = Circuit::new(3);
    assert_eq!(c.two_qubit_count(), 0);
    assert!(equal_up_to_phase(&unitary_of(&c).unwrap(), &DMatrix::identity(8, 8), 1e-15));
}

#[test]
fn invert_examples() {
    let h: Circuit = "h 0".parse().unwrap();
    assert_eq!(h.invert(), h);
    let z = Circuit::from_gates(1, vec![Gate::ZPhase(0, Angle::new(FRAC_PI_8).unwrap())]).unwrap();
    assert!(matches!(z.invert().gates(), [Gate::ZPhase(0, a)] if a.radians() == -FRAC_PI_8));
}

#[test]
fn hundred_gate_round_trip() {
    let c = random_circuit(5, 100, &GateProbabilities::default(), 11).unwrap();
    let text = c.serialize();
    let back: Circuit = text.parse().unwrap();
    assert_eq!(back, c);
    assert_eq!(back.serialize(), text);
    assert_eq!(back.two_qubit_count(), c.two_qubit_count());
}

proptest! {
    #[test]
    fn normalized_phase_matches(beta in -20.0f64..20.0) {
        let (s, a) = normalize_phase(beta).unwrap();
        prop_assert!(s < 4);
        prop_assert!(a.radians() > -FRAC_PI_4 && a.radians() <= FRAC_PI_4);
        let dev = (s_power_z(s, a.radians()) - z_matrix(beta)).norm();
        prop_assert!(dev < 1e-12, "deviation {}", dev);
    }

    #[test]
    fn invert_undoes(width in 1usize..=5, depth in 0usize..40, seed in any::<u64>()) {
        let probs = if width == 1 {
            GateProbabilities::new(0.0, 0.5, 0.25, 0.25).unwrap()
        } else {
            GateProbabilities::default()
        };
        let c = random_circuit(width, depth, &probs, seed).unwrap();
        let round = c.then(&c.invert()).unwrap();
        let d = 1 << width;
        prop_assert!(equal_up_to_phase(&unitary_of(&round).unwrap(), &DMatrix::identity(d, d), 1e-12));
    }

    #[test]
    fn unitary_is_multiplicative(width in 2usize..=4, seed in any::<u64>()) {
        let probs = GateProbabilities::default();
        let a = random_circuit(width, 20, &probs, seed).unwrap();
        let b = random_circuit(width, 20, &probs, seed ^ 1).unwrap();
        let ab = unitary_of(&a.then(&b).unwrap()).unwrap();
        let prod = unitary_of(&b).unwrap() * unitary_of(&a).unwrap();
        prop_assert!((ab - prod).norm() < 1e-12);
    }

    #[test]
    fn serialization_round_trips(width in 2usize..=6, depth in 0usize..80, seed in any::<u64>()) {
        let c = random_circuit(width, depth, &GateProbabilities::default(), seed).unwrap();
        let back: Circuit = c.serialize().parse().unwrap();
        prop_assert_eq!(back.two_qubit_count(), c.two_qubit_count());
        prop_assert_eq!(back, c);
    }
}
