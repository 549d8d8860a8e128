//! Benchmark circuit families: random circuits and the decomposed QFT.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::Rng;

use crate::circuit::{phase_gates, Angle, Circuit, Gate};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Per-step gate-kind probabilities for random circuits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateProbabilities {
    pub cnot: f64,
    pub h: f64,
    pub s: f64,
    pub zphase: f64,
}

impl GateProbabilities {
    pub fn new(cnot: f64, h: f64, s: f64, zphase: f64) -> Result<Self> {
        let probs = GateProbabilities { cnot, h, s, zphase };
        probs.validate()?;
        Ok(probs)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.cnot, self.h, self.s, self.zphase];
        if all.iter().any(|p| !p.is_finite() || !(0.0..=1.0).contains(p)) {
            return Err(Error::param(format!(
                "gate probabilities must lie in [0, 1], got {all:?}"
            )));
        }
        let sum: f64 = all.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::param(format!(
                "gate probabilities must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

impl Default for GateProbabilities {
    fn default() -> Self {
        GateProbabilities {
            cnot: 0.5,
            h: 0.3,
            s: 0.1,
            zphase: 0.1,
        }
    }
}

/// Gate kinds drawn by [`random_circuit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Cnot,
    H,
    S,
    ZPhase,
}

impl GateKind {
    pub fn of(gate: &Gate) -> Self {
        match gate {
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::H(_) => GateKind::H,
            Gate::S(_) => GateKind::S,
            Gate::ZPhase(..) => GateKind::ZPhase,
        }
    }
}

fn draw_kind<R: Rng>(rng: &mut R, probs: &GateProbabilities) -> GateKind {
    let u: f64 = rng.random();
    if u < probs.cnot {
        GateKind::Cnot
    } else if u < probs.cnot + probs.h {
        GateKind::H
    } else if u < probs.cnot + probs.h + probs.s {
        GateKind::S
    } else {
        GateKind::ZPhase
    }
}

/// A depth-`depth` random circuit: one gate per time step, its kind drawn from
/// `probs`. CNOT operands are an ordered pair drawn uniformly among distinct
/// pairs; Z-phase angles are uniform on (−π/4, π/4].
pub fn random_circuit(
    width: usize,
    depth: usize,
    probs: &GateProbabilities,
    seed: u64,
) -> Result<Circuit> {
    probs.validate()?;
    if width == 0 {
        return Err(Error::param("random circuit needs at least one qubit"));
    }
    if width < 2 && probs.cnot > 0.0 {
        return Err(Error::param("CNOT gates need at least two qubits"));
    }
    let mut rng = rng_from_seed(seed);
    let mut circuit = Circuit::new(width);
    for _ in 0..depth {
        let gate = match draw_kind(&mut rng, probs) {
            GateKind::Cnot => {
                let control = rng.random_range(0..width);
                let mut target = rng.random_range(0..width - 1);
                if target >= control {
                    target += 1;
                }
                Gate::cnot(control, target)
            }
            GateKind::H => Gate::H(rng.random_range(0..width)),
            GateKind::S => Gate::S(rng.random_range(0..width)),
            GateKind::ZPhase => {
                let q = rng.random_range(0..width);
                // u ∈ [0, 1) maps onto (−π/4, π/4]
                let u: f64 = rng.random();
                let alpha = FRAC_PI_4 - FRAC_PI_2 * u;
                Gate::ZPhase(q, Angle::new(alpha)?)
            }
        };
        circuit.push(gate)?;
    }
    Ok(circuit)
}

/// Controlled phase `diag(1,1,1,e^{iα})` on target `target` and control
/// `control`, written over the gate set as
/// `Z_{α/2}(t), CNOT(c,t), Z_{−α/2}(t), CNOT(c,t), Z_{α/2}(c)` in execution
/// order. Each phase is normalized, so angles with |α/2| ≥ π/4 expand into
/// extra S gates; the sequence always holds exactly two CNOTs.
pub fn cp_decompose(target: usize, control: usize, alpha: f64) -> Result<Vec<Gate>> {
    if target == control {
        return Err(Error::InvalidGate(format!(
            "controlled phase needs distinct qubits, got {target} twice"
        )));
    }
    let half = alpha / 2.0;
    let mut gates = phase_gates(target, half)?;
    gates.push(Gate::cnot(control, target));
    gates.extend(phase_gates(target, -half)?);
    gates.push(Gate::cnot(control, target));
    gates.extend(phase_gates(control, half)?);
    Ok(gates)
}

/// The QFT without the final swap network: for each qubit `i`, a Hadamard
/// followed by controlled phases `π/2^{j−i}` from every later qubit `j`.
/// Its unitary is the DFT with bit-reversed output ordering.
pub fn qft(width: usize) -> Result<Circuit> {
    if width == 0 {
        return Err(Error::param("qft needs at least one qubit"));
    }
    let mut circuit = Circuit::new(width);
    for i in 0..width {
        circuit.push(Gate::H(i))?;
        for j in i + 1..width {
            let alpha = PI / f64::powi(2.0, (j - i) as i32);
            circuit.extend(cp_decompose(i, j, alpha)?)?;
        }
    }
    Ok(circuit)
}
