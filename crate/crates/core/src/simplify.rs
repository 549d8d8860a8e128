//! Deterministic peephole simplification.
//!
//! Gates are streamed into an output list. Each incoming gate scans backwards
//! over the gates it commutes with (at most `window` live gates) looking for a
//! partner: an identical CNOT or H cancels, and a Z-diagonal on the same qubit
//! fuses. Z-diagonals are tracked internally as `S^s · Z_α` with an exact
//! quarter-turn count, so Clifford parts never accumulate rounding error.
//! Passes repeat until nothing changes; every effective pass removes at least
//! one internal op, so the loop terminates.
//!
//! Every rewrite is an exact matrix identity, so the output implements the
//! same unitary as the input (global phase included). No rule ever creates a
//! CNOT.

use crate::circuit::{normalize_phase, Angle, Circuit, Gate};

/// Fused phases with |α| at or below this are treated as the identity.
const IDENTITY_TOL: f64 = 1e-12;

pub const DEFAULT_WINDOW: usize = 64;
pub const DEFAULT_ITERATION_CAP: usize = 256;

/// Individual rewrite rules; a [`Strategy`] enables a subset.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    /// H·H and CNOT·CNOT with identical operands cancel.
    CancelInverses,
    /// Z-diagonals (S and Z_α) on one qubit fuse, renormalizing the angle,
    /// unless the fused form needs more gates than the pair.
    FusePhases,
    /// Z_0 is dropped (also removes S^4).
    RemoveIdentities,
    /// Z-diagonals commute past CNOT controls.
    CommutePhaseThroughControl,
    /// CNOTs sharing only a control, or only a target, commute.
    CommuteCnots,
    /// Gates on disjoint qubits commute.
    CommuteDisjoint,
    /// Before each round, move every Z-diagonal as far left as it commutes.
    PushPhasesLeft,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Strategy {
    pub name: &'static str,
    pub rules: Vec<Rule>,
    pub iteration_cap: usize,
    pub window: usize,
}

impl Strategy {
    pub fn basic() -> Self {
        Strategy {
            name: "basic",
            rules: vec![
                Rule::CancelInverses,
                Rule::FusePhases,
                Rule::RemoveIdentities,
                Rule::CommutePhaseThroughControl,
                Rule::CommuteCnots,
                Rule::CommuteDisjoint,
            ],
            iteration_cap: DEFAULT_ITERATION_CAP,
            window: DEFAULT_WINDOW,
        }
    }

    pub fn aggressive() -> Self {
        let mut s = Strategy::basic();
        s.name = "aggressive";
        s.rules.push(Rule::PushPhasesLeft);
        s
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "basic" => Some(Strategy::basic()),
            "aggressive" => Some(Strategy::aggressive()),
            _ => None,
        }
    }

    fn has(&self, rule: Rule) -> bool {
        self.rules.contains(&rule)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Op {
    Cnot(usize, usize),
    H(usize),
    /// `S^s · Z_α` on one qubit.
    Phase { q: usize, s: u8, alpha: f64 },
}

impl Op {
    fn from_gate(g: &Gate) -> Op {
        match *g {
            Gate::Cnot { control, target } => Op::Cnot(control, target),
            Gate::H(q) => Op::H(q),
            Gate::S(q) => Op::Phase { q, s: 1, alpha: 0.0 },
            Gate::ZPhase(q, a) => Op::Phase {
                q,
                s: 0,
                alpha: a.radians(),
            },
        }
    }

    fn touches(&self, qubit: usize) -> bool {
        match *self {
            Op::Cnot(c, t) => c == qubit || t == qubit,
            Op::H(q) | Op::Phase { q, .. } => q == qubit,
        }
    }

    fn disjoint(&self, other: &Op) -> bool {
        match *other {
            Op::Cnot(c, t) => !self.touches(c) && !self.touches(t),
            Op::H(q) | Op::Phase { q, .. } => !self.touches(q),
        }
    }

    /// Gates emitted for this op.
    fn cost(&self) -> usize {
        match *self {
            Op::Phase { s, alpha, .. } => s as usize + usize::from(alpha != 0.0 || s == 0),
            _ => 1,
        }
    }

    fn is_identity(&self) -> bool {
        matches!(*self, Op::Phase { s: 0, alpha, .. } if alpha.abs() <= IDENTITY_TOL)
    }
}

fn fuse(s1: u8, a1: f64, s2: u8, a2: f64) -> (u8, f64) {
    let (extra, alpha) = normalize_phase(a1 + a2).expect("sum of finite angles");
    ((s1 + s2 + extra) % 4, alpha.radians())
}

fn commutes(strategy: &Strategy, a: &Op, b: &Op) -> bool {
    if a.disjoint(b) {
        return strategy.has(Rule::CommuteDisjoint);
    }
    match (*a, *b) {
        (Op::Phase { q, .. }, Op::Cnot(c, _)) | (Op::Cnot(c, _), Op::Phase { q, .. }) => {
            q == c && strategy.has(Rule::CommutePhaseThroughControl)
        }
        (Op::Cnot(c1, t1), Op::Cnot(c2, t2)) => {
            (c1, t1) != (c2, t2) && c1 != t2 && c2 != t1 && strategy.has(Rule::CommuteCnots)
        }
        // diagonals on the same qubit commute, but fusion handles them first
        (Op::Phase { .. }, Op::Phase { .. }) => true,
        _ => false,
    }
}

enum Merge {
    Cancel,
    Replace(Op),
}

fn try_merge(strategy: &Strategy, earlier: &Op, incoming: &Op) -> Option<Merge> {
    match (*earlier, *incoming) {
        (Op::Cnot(c1, t1), Op::Cnot(c2, t2)) if (c1, t1) == (c2, t2) => {
            strategy.has(Rule::CancelInverses).then_some(Merge::Cancel)
        }
        (Op::H(a), Op::H(b)) if a == b => strategy.has(Rule::CancelInverses).then_some(Merge::Cancel),
        (Op::Phase { q: qa, s: sa, alpha: aa }, Op::Phase { q: qb, s: sb, alpha: ab })
            if qa == qb && strategy.has(Rule::FusePhases) =>
        {
            let (s, alpha) = fuse(sa, aa, sb, ab);
            let fused = Op::Phase { q: qa, s, alpha };
            if fused.is_identity() && strategy.has(Rule::RemoveIdentities) {
                Some(Merge::Cancel)
            } else if fused.cost() <= earlier.cost() + incoming.cost() {
                Some(Merge::Replace(fused))
            } else {
                // fusing would spell out more S gates than it saves
                None
            }
        }
        _ => None,
    }
}

/// One streaming sweep. Returns the new op list and whether anything changed.
fn peephole_pass(strategy: &Strategy, ops: &[Op]) -> (Vec<Op>, bool) {
    let mut out: Vec<Option<Op>> = Vec::with_capacity(ops.len());
    let mut changed = false;

    'ops: for op in ops {
        if op.is_identity() && strategy.has(Rule::RemoveIdentities) {
            changed = true;
            continue;
        }
        let mut seen = 0;
        for j in (0..out.len()).rev() {
            let Some(earlier) = out[j] else { continue };
            if let Some(m) = try_merge(strategy, &earlier, op) {
                out[j] = match m {
                    Merge::Cancel => None,
                    Merge::Replace(fused) => Some(fused),
                };
                changed = true;
                continue 'ops;
            }
            seen += 1;
            if seen >= strategy.window || !commutes(strategy, &earlier, op) {
                break;
            }
        }
        out.push(Some(*op));
    }
    (out.into_iter().flatten().collect(), changed)
}

/// Moves each Z-diagonal left past everything it commutes with, stopping at
/// another diagonal on the same qubit so the next peephole pass can fuse them.
fn push_phases_left(strategy: &Strategy, ops: &[Op]) -> Vec<Op> {
    let mut out: Vec<Op> = Vec::with_capacity(ops.len());
    for op in ops {
        let mut pos = out.len();
        if let Op::Phase { q, .. } = *op {
            let mut seen = 0;
            while pos > 0 && seen < strategy.window {
                let prev = &out[pos - 1];
                let same_qubit_phase = matches!(*prev, Op::Phase { q: pq, .. } if pq == q);
                if same_qubit_phase || !commutes(strategy, prev, op) {
                    break;
                }
                pos -= 1;
                seen += 1;
            }
            // runs of diagonals on distinct qubits are kept sorted by qubit
            while matches!(out.get(pos), Some(Op::Phase { q: pq, .. }) if *pq < q) {
                pos += 1;
            }
        }
        out.insert(pos, *op);
    }
    out
}

fn to_gates(ops: &[Op]) -> Vec<Gate> {
    let mut gates = Vec::with_capacity(ops.len());
    for op in ops {
        match *op {
            Op::Cnot(c, t) => gates.push(Gate::cnot(c, t)),
            Op::H(q) => gates.push(Gate::H(q)),
            Op::Phase { q, s, alpha } => {
                gates.extend(std::iter::repeat_n(Gate::S(q), s as usize));
                if alpha != 0.0 || s == 0 {
                    gates.push(Gate::ZPhase(
                        q,
                        Angle::new(alpha).expect("fused angles stay normalized"),
                    ));
                }
            }
        }
    }
    gates
}

/// Simplifies `c` under `strategy`. The result implements the same unitary and
/// never has more CNOTs than the input.
pub fn simplify(c: &Circuit, strategy: &Strategy) -> Circuit {
    let mut ops: Vec<Op> = c.gates().iter().map(Op::from_gate).collect();
    let push = strategy.has(Rule::PushPhasesLeft);
    for _ in 0..strategy.iteration_cap {
        if push {
            ops = push_phases_left(strategy, &ops);
        }
        let (next, changed) = peephole_pass(strategy, &ops);
        ops = next;
        if !changed {
            break;
        }
    }
    Circuit::from_gates(c.width(), to_gates(&ops)).expect("rewrites keep qubit indices valid")
}

/// Runs every built-in strategy and keeps the result with the fewest CNOTs,
/// breaking ties by total gate count and then by strategy order.
pub fn best_simplify(c: &Circuit) -> Circuit {
    best_simplify_with(c, &[Strategy::basic(), Strategy::aggressive()])
}

pub fn best_simplify_with(c: &Circuit, strategies: &[Strategy]) -> Circuit {
    let mut best: Option<Circuit> = None;
    for s in strategies {
        let candidate = simplify(c, s);
        let better = match &best {
            None => true,
            Some(b) => {
                (candidate.two_qubit_count(), candidate.len()) < (b.two_qubit_count(), b.len())
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    best.unwrap_or_else(|| c.clone())
}
