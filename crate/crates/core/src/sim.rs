//! Dense amplitude-register kernels.
//!
//! A register of `n` qubits is a slice of `2^n` complex amplitudes. Qubit 0 is
//! the most significant bit of the basis index, so a matrix stored row-major
//! as a `2L`-qubit register has its row index on qubits `0..L` and its column
//! index on qubits `L..2L`. Every dense object in the crate (unitaries,
//! density matrices, superoperators, doubled-space vectors) is built by
//! running gates over such a register.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest width accepted by [`unitary_of`].
pub const DEFAULT_UNITARY_CAP: usize = 10;

#[inline]
fn bit(n: usize, qubit: usize) -> usize {
    1 << (n - 1 - qubit)
}

/// Multiplies every amplitude whose `qubit` bit is set by `factor`.
pub fn apply_diagonal(state: &mut [C64], n: usize, qubit: usize, factor: C64) {
    let m = bit(n, qubit);
    for (i, amp) in state.iter_mut().enumerate() {
        if i & m != 0 {
            *amp *= factor;
        }
    }
}

pub fn apply_h(state: &mut [C64], n: usize, qubit: usize) {
    let m = bit(n, qubit);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..state.len() {
        if i & m == 0 {
            let a = state[i];
            let b = state[i | m];
            state[i] = (a + b) * r;
            state[i | m] = (a - b) * r;
        }
    }
}

pub fn apply_cnot(state: &mut [C64], n: usize, control: usize, target: usize) {
    let cm = bit(n, control);
    let tm = bit(n, target);
    for i in 0..state.len() {
        if i & cm != 0 && i & tm == 0 {
            state.swap(i, i | tm);
        }
    }
}

/// Applies `gate` with every qubit index shifted by `offset`. With `conj`
/// the complex conjugate of the gate matrix is applied instead, which is what
/// the column half of a vectorized density matrix needs.
pub fn apply_gate(state: &mut [C64], n: usize, gate: &Gate, offset: usize, conj: bool) {
    match *gate {
        Gate::Cnot { control, target } => apply_cnot(state, n, control + offset, target + offset),
        Gate::H(q) => apply_h(state, n, q + offset),
        Gate::S(q) => {
            let i = if conj { -C64::i() } else { C64::i() };
            apply_diagonal(state, n, q + offset, i);
        }
        Gate::ZPhase(q, a) => apply_phase(state, n, q + offset, a.radians(), conj),
    }
}

/// `diag(1, e^{iθ})` on one qubit, for raw (unnormalized) angles.
pub fn apply_phase(state: &mut [C64], n: usize, qubit: usize, theta: f64, conj: bool) {
    let t = if conj { -theta } else { theta };
    apply_diagonal(state, n, qubit, C64::from_polar(1.0, t));
}

/// The single-qubit mixed channel `ρ ↦ pρ + (1−p) Z_θ ρ Z_θ†` acting on a
/// vectorized operator whose row bit for the qubit sits at `row_qubit` and
/// whose column bit sits at `col_qubit`.
pub fn apply_mixed_phase(
    state: &mut [C64],
    n: usize,
    row_qubit: usize,
    col_qubit: usize,
    p: f64,
    theta: f64,
) {
    let rm = bit(n, row_qubit);
    let cm = bit(n, col_qubit);
    let up = C64::new(p, 0.0) + C64::from_polar(1.0 - p, theta);
    let down = up.conj();
    for (i, amp) in state.iter_mut().enumerate() {
        match (i & rm != 0, i & cm != 0) {
            (true, false) => *amp *= up,
            (false, true) => *amp *= down,
            _ => {}
        }
    }
}

pub fn run_circuit(state: &mut [C64], n: usize, circuit: &Circuit, offset: usize, conj: bool) {
    for g in circuit.gates() {
        apply_gate(state, n, g, offset, conj);
    }
}

/// Row-major identity of dimension `2^width`, as a `2·width`-qubit register.
pub(crate) fn identity_register(width: usize) -> Vec<C64> {
    let d = 1usize << width;
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        v[i * d + i] = C64::new(1.0, 0.0);
    }
    v
}

pub(crate) fn register_to_matrix(data: &[C64], rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_row_slice(rows, cols, data)
}

pub(crate) fn check_cap(what: &'static str, width: usize, cap: usize) -> Result<()> {
    if width > cap {
        return Err(Error::CapExceeded {
            what,
            requested: width,
            cap,
        });
    }
    Ok(())
}

/// Dense unitary of `c`, the product of per-gate embeddings in circuit order.
pub fn unitary_of(c: &Circuit) -> Result<DMatrix<C64>> {
    unitary_of_capped(c, DEFAULT_UNITARY_CAP)
}

pub fn unitary_of_capped(c: &Circuit, cap: usize) -> Result<DMatrix<C64>> {
    check_cap("unitary_of", c.width(), cap)?;
    let l = c.width();
    let d = 1usize << l;
    let mut reg = identity_register(l);
    run_circuit(&mut reg, 2 * l, c, 0, false);
    Ok(register_to_matrix(&reg, d, d))
}

/// Runs `c` on the statevector `psi` (length `2^width`).
pub fn apply_to_state(c: &Circuit, psi: &mut [C64]) {
    debug_assert_eq!(psi.len(), 1 << c.width());
    run_circuit(psi, c.width(), c, 0, false);
}

/// `|tr(U†V)| / d`: equals 1 exactly when `U` and `V` agree up to global phase.
pub fn phase_insensitive_overlap(u: &DMatrix<C64>, v: &DMatrix<C64>) -> f64 {
    let d = u.nrows() as f64;
    u.iter()
        .zip(v.iter())
        .map(|(a, b)| a.conj() * b)
        .sum::<C64>()
        .norm()
        / d
}

/// True when the two unitaries agree up to a global phase within `tol`.
pub fn equal_up_to_phase(u: &DMatrix<C64>, v: &DMatrix<C64>, tol: f64) -> bool {
    u.shape() == v.shape() && (1.0 - phase_insensitive_overlap(u, v)).abs() <= tol
}
