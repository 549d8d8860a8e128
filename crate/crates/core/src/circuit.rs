//! Circuit intermediate representation over {CNOT, H, S, Z_α}.
//!
//! Z-phase angles are kept in the half-open window (−π/4, π/4]. Any other
//! phase is split into a power of S followed by a normalized Z_α when it enters
//! a circuit, so the stored gate list never carries Clifford excess inside a
//! `ZPhase`. Global phase is not tracked anywhere.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A Z-phase angle in radians, normalized to (−π/4, π/4].
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    /// Wraps an already-normalized angle.
    pub fn new(radians: f64) -> Result<Self> {
        if !radians.is_finite() {
            return Err(Error::NonFiniteAngle(radians));
        }
        if radians <= -FRAC_PI_4 || radians > FRAC_PI_4 {
            return Err(Error::param(format!(
                "angle {radians} outside the normalized range (-pi/4, pi/4]"
            )));
        }
        Ok(Angle(radians))
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

/// Splits an arbitrary phase `beta` into `S^s · Z_α` with `α ∈ (−π/4, π/4]`.
///
/// The decomposition is exact as a matrix identity: `diag(1, e^{iβ}) =
/// diag(1, i)^s · diag(1, e^{iα})`.
pub fn normalize_phase(beta: f64) -> Result<(u8, Angle)> {
    if !beta.is_finite() {
        return Err(Error::NonFiniteAngle(beta));
    }
    let turns = beta / FRAC_PI_2;
    let mut k = (turns - 0.5).ceil();
    let mut alpha = beta - k * FRAC_PI_2;
    // rounding in the subtraction can land a hair outside the window
    if alpha <= -FRAC_PI_4 {
        alpha += FRAC_PI_2;
        k -= 1.0;
    } else if alpha > FRAC_PI_4 {
        alpha -= FRAC_PI_2;
        k += 1.0;
    }
    let s = k.rem_euclid(4.0) as u8;
    Ok((s, Angle(alpha)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    Cnot { control: usize, target: usize },
    H(usize),
    S(usize),
    ZPhase(usize, Angle),
}

impl Gate {
    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot { .. })
    }

    pub fn max_qubit(&self) -> usize {
        match *self {
            Gate::Cnot { control, target } => control.max(target),
            Gate::H(q) | Gate::S(q) | Gate::ZPhase(q, _) => q,
        }
    }

    pub fn acts_on(&self, qubit: usize) -> bool {
        match *self {
            Gate::Cnot { control, target } => control == qubit || target == qubit,
            Gate::H(q) | Gate::S(q) | Gate::ZPhase(q, _) => q == qubit,
        }
    }

    fn validate(&self, width: usize) -> Result<()> {
        if let Gate::Cnot { control, target } = *self {
            if control == target {
                return Err(Error::InvalidGate(format!(
                    "cnot control and target are both {control}"
                )));
            }
        }
        if self.max_qubit() >= width {
            return Err(Error::InvalidGate(format!(
                "{self} touches qubit {} on a {width}-qubit circuit",
                self.max_qubit()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Cnot { control, target } => write!(f, "cnot {control} {target}"),
            Gate::H(q) => write!(f, "h {q}"),
            Gate::S(q) => write!(f, "s {q}"),
            // 17 significant digits: the text round-trips to the same f64
            Gate::ZPhase(q, a) => write!(f, "zphase {q} {:.16e}", a.radians()),
        }
    }
}

/// Expands a phase `beta` on `qubit` into gates: `s` copies of S, then the
/// residual Z_α. The Z gate is dropped only when it is the identity and at
/// least one S was emitted, so a zero phase still yields a (trivial) gate.
pub fn phase_gates(qubit: usize, beta: f64) -> Result<Vec<Gate>> {
    let (s, alpha) = normalize_phase(beta)?;
    let mut out = vec![Gate::S(qubit); s as usize];
    if alpha.radians() != 0.0 || s == 0 {
        out.push(Gate::ZPhase(qubit, alpha));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    width: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(width: usize) -> Self {
        Circuit {
            width,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(width: usize, gates: Vec<Gate>) -> Result<Self> {
        for g in &gates {
            g.validate(width)?;
        }
        Ok(Circuit { width, gates })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.width)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends `Z_beta` on `qubit`, normalizing into S gates plus `Z_α`.
    pub fn push_phase(&mut self, qubit: usize, beta: f64) -> Result<()> {
        for g in phase_gates(qubit, beta)? {
            self.push(g)?;
        }
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn zphase_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::ZPhase(..)))
            .count()
    }

    /// The inverse circuit. S† is written as S·S·S and Z_α becomes Z_{−α}
    /// (renormalized, so the boundary angle π/4 picks up three S gates).
    pub fn invert(&self) -> Circuit {
        let mut gates = Vec::with_capacity(self.gates.len());
        for g in self.gates.iter().rev() {
            match *g {
                Gate::S(q) => gates.extend([Gate::S(q); 3]),
                Gate::ZPhase(q, a) => gates.extend(
                    phase_gates(q, -a.radians()).expect("negated normalized angle is finite"),
                ),
                other => gates.push(other),
            }
        }
        Circuit {
            width: self.width,
            gates,
        }
    }

    /// Concatenation in execution order: `self` runs first.
    pub fn then(&self, other: &Circuit) -> Result<Circuit> {
        let width = self.width.max(other.width);
        let mut gates = self.gates.clone();
        gates.extend_from_slice(&other.gates);
        Circuit::from_gates(width, gates)
    }

    pub fn serialize(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Circuit> {
        text.parse()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.width)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for Circuit {
    type Err = Error;

    /// Parses the line-oriented circuit format. The `qubits <L>` header is
    /// optional; without it the width is one more than the largest index.
    /// `sdg <q>` is accepted and canonicalized to three S gates.
    fn from_str(text: &str) -> Result<Circuit> {
        let mut declared: Option<usize> = None;
        let mut gates = Vec::new();
        // remember a line number per gate so range errors point at the source
        let mut lines = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let qubit = |s: &str| -> Result<usize> {
                s.parse::<usize>()
                    .map_err(|_| err(format!("bad qubit index '{s}'")))
            };
            let arity = |n: usize| -> Result<()> {
                if fields.len() != n + 1 {
                    return Err(err(format!(
                        "'{}' expects {n} operand(s), found {}",
                        fields[0],
                        fields.len() - 1
                    )));
                }
                Ok(())
            };
            match fields[0] {
                "qubits" => {
                    arity(1)?;
                    if declared.is_some() || !gates.is_empty() {
                        return Err(err("qubits header must come first and only once".into()));
                    }
                    declared = Some(qubit(fields[1])?);
                }
                "cnot" => {
                    arity(2)?;
                    let (c, t) = (qubit(fields[1])?, qubit(fields[2])?);
                    if c == t {
                        return Err(err(format!("cnot control equals target ({c})")));
                    }
                    gates.push(Gate::cnot(c, t));
                    lines.push(line_no);
                }
                "h" => {
                    arity(1)?;
                    gates.push(Gate::H(qubit(fields[1])?));
                    lines.push(line_no);
                }
                "s" => {
                    arity(1)?;
                    gates.push(Gate::S(qubit(fields[1])?));
                    lines.push(line_no);
                }
                "sdg" => {
                    arity(1)?;
                    let q = qubit(fields[1])?;
                    gates.extend([Gate::S(q); 3]);
                    lines.extend([line_no; 3]);
                }
                "zphase" => {
                    arity(2)?;
                    let q = qubit(fields[1])?;
                    let beta: f64 = fields[2]
                        .parse()
                        .map_err(|_| err(format!("bad angle '{}'", fields[2])))?;
                    let expanded = phase_gates(q, beta).map_err(|e| err(e.to_string()))?;
                    lines.extend(std::iter::repeat_n(line_no, expanded.len()));
                    gates.extend(expanded);
                }
                other => return Err(err(format!("unknown mnemonic '{other}'"))),
            }
        }

        let inferred = gates.iter().map(|g| g.max_qubit() + 1).max().unwrap_or(0);
        let width = declared.unwrap_or(inferred);
        for (g, &line) in gates.iter().zip(&lines) {
            g.validate(width).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
        }
        Ok(Circuit { width, gates })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn normalize_identity_and_boundary() {
        let (s, a) = normalize_phase(0.0).unwrap();
        assert_eq!((s, a.radians()), (0, 0.0));
        let (s, a) = normalize_phase(FRAC_PI_4).unwrap();
        assert_eq!((s, a.radians()), (0, FRAC_PI_4));
        let (s, a) = normalize_phase(-FRAC_PI_4).unwrap();
        assert_eq!(s, 3);
        assert_eq!(a.radians(), FRAC_PI_4);
    }

    #[test]
    fn normalize_rejects_nan() {
        assert!(matches!(
            normalize_phase(f64::NAN),
            Err(Error::NonFiniteAngle(_))
        ));
        assert!(normalize_phase(f64::INFINITY).is_err());
    }

    #[test]
    fn normalize_three_fifths_pi() {
        let (s, a) = normalize_phase(3.0 * PI / 5.0).unwrap();
        assert_eq!(s, 1);
        assert!((a.radians() - PI / 10.0).abs() < 1e-15);
    }

    #[test]
    fn angle_range_is_checked() {
        assert!(Angle::new(-FRAC_PI_4).is_err());
        assert!(Angle::new(FRAC_PI_4).is_ok());
        assert!(Angle::new(1.0).is_err());
    }

    #[test]
    fn invalid_gates_rejected() {
        let mut c = Circuit::new(2);
        assert!(c.push(Gate::cnot(1, 1)).is_err());
        assert!(c.push(Gate::H(2)).is_err());
        assert!(c.push(Gate::cnot(0, 1)).is_ok());
    }

    #[test]
    fn empty_circuit_has_no_two_qubit_gates() {
        assert_eq!(Circuit::new(3).two_qubit_count(), 0);
    }

    #[test]
    fn parse_minimal() {
        let c: Circuit = "h 0".parse().unwrap();
        assert_eq!(c.width(), 1);
        assert_eq!(c.gates(), &[Gate::H(0)]);
    }

    #[test]
    fn parse_two_gates() {
        let c = Circuit::parse("cnot 1 0\nzphase 0 0.3926990817").unwrap();
        assert_eq!(c.width(), 2);
        assert_eq!(c.len(), 2);
        assert_eq!(c.gates()[0], Gate::cnot(1, 0));
        match c.gates()[1] {
            Gate::ZPhase(0, a) => assert!((a.radians() - 0.3926990817).abs() < 1e-15),
            ref g => panic!("unexpected {g:?}"),
        }
    }

    #[test]
    fn parse_expands_large_phases_and_sdg() {
        let c = Circuit::parse("qubits 1\nzphase 0 1.5707963267948966\nsdg 0").unwrap();
        assert_eq!(c.gates(), &[Gate::S(0), Gate::S(0), Gate::S(0), Gate::S(0)]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = Circuit::parse("qubits 2\nh 0\nfoo 1").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = Circuit::parse("qubits 2\n\nh 5").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = Circuit::parse("cnot 0 0").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }), "{e}");
        let e = Circuit::parse("zphase 0 abc").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }), "{e}");
        let e = Circuit::parse("h 0\nqubits 3").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let c = Circuit::parse("# header\nqubits 3  # three\n\nh 2 # trailing\n").unwrap();
        assert_eq!(c.width(), 3);
        assert_eq!(c.gates(), &[Gate::H(2)]);
    }

    #[test]
    fn invert_simple_gates() {
        let mut c = Circuit::new(1);
        c.push(Gate::H(0)).unwrap();
        assert_eq!(c.invert().gates(), &[Gate::H(0)]);

        let mut c = Circuit::new(1);
        c.push_phase(0, PI / 8.0).unwrap();
        assert_eq!(
            c.invert().gates(),
            &[Gate::ZPhase(0, Angle::new(-PI / 8.0).unwrap())]
        );
    }

    #[test]
    fn invert_boundary_phase() {
        let c = Circuit::from_gates(1, vec![Gate::ZPhase(0, Angle::new(FRAC_PI_4).unwrap())])
            .unwrap();
        let inv = c.invert();
        assert_eq!(inv.len(), 4);
        assert_eq!(&inv.gates()[..3], &[Gate::S(0); 3]);
    }
}
