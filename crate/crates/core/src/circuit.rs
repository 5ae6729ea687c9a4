//! Circuit intermediate representation.
//!
//! A [`Circuit`] is an ordered list of [`Gate`]s over a linear chain of
//! qubits. Rotation angles follow a single convention everywhere in the
//! crate: `R_G(θ) = exp(-i θ G / 2)` for `G ∈ {X, Y, Z, ZZ, ZX}`.
//!
//! Basis-state indices are little-endian: qubit `q` is bit `q` of the index.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rotation angle, either a number or a reference to a named parameter
/// multiplied by a fixed coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    Value(f64),
    Symbol { name: String, scale: f64 },
}

impl Angle {
    pub fn symbol(name: impl Into<String>) -> Self {
        Angle::Symbol {
            name: name.into(),
            scale: 1.0,
        }
    }

    pub fn scaled(name: impl Into<String>, scale: f64) -> Self {
        Angle::Symbol {
            name: name.into(),
            scale,
        }
    }

    /// Numeric value, or an error naming the unbound symbol.
    pub fn value(&self) -> Result<f64> {
        match self {
            Angle::Value(v) => Ok(*v),
            Angle::Symbol { name, .. } => Err(Error::UnboundParameter(name.clone())),
        }
    }

    pub fn is_bound(&self) -> bool {
        matches!(self, Angle::Value(_))
    }

    fn bind(&self, bindings: &HashMap<String, f64>) -> Result<Angle> {
        match self {
            Angle::Value(v) => Ok(Angle::Value(*v)),
            Angle::Symbol { name, scale } => bindings
                .get(name)
                .map(|v| Angle::Value(scale * v))
                .ok_or_else(|| Error::UnboundParameter(name.clone())),
        }
    }

    fn negated(&self) -> Angle {
        match self {
            Angle::Value(v) => Angle::Value(-v),
            Angle::Symbol { name, scale } => Angle::Symbol {
                name: name.clone(),
                scale: -scale,
            },
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Angle::Value(v) => v.is_finite(),
            Angle::Symbol { scale, .. } => scale.is_finite(),
        }
    }
}

impl From<f64> for Angle {
    fn from(v: f64) -> Self {
        Angle::Value(v)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Value(v) => write!(f, "{v}"),
            Angle::Symbol { name, scale } if *scale == 1.0 => write!(f, "{name}"),
            Angle::Symbol { name, scale } => write!(f, "{scale}*{name}"),
        }
    }
}

/// Direction of a non-echoed cross-resonance pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(value: f64) -> Sign {
        if value < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Sx,
    Rx,
    Ry,
    Rz,
    Rzz,
    Rzx,
    Cnot,
    CrPulse,
    Measure,
    Delay,
}

impl GateKind {
    pub const ALL: [GateKind; 12] = [
        GateKind::H,
        GateKind::X,
        GateKind::Sx,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Rzz,
        GateKind::Rzx,
        GateKind::Cnot,
        GateKind::CrPulse,
        GateKind::Measure,
        GateKind::Delay,
    ];

    /// Token used by the text format.
    pub fn token(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Sx => "SX",
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Rzz => "RZZ",
            GateKind::Rzx => "RZX",
            GateKind::Cnot => "CNOT",
            GateKind::CrPulse => "CR",
            GateKind::Measure => "MEASURE",
            GateKind::Delay => "DELAY",
        }
    }

    pub fn from_token(token: &str) -> Option<GateKind> {
        let upper = token.to_ascii_uppercase();
        GateKind::ALL
            .into_iter()
            .find(|k| k.token() == upper)
            .or(match upper.as_str() {
                "CX" => Some(GateKind::Cnot),
                "CRPULSE" => Some(GateKind::CrPulse),
                _ => None,
            })
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Rzz | GateKind::Rzx | GateKind::Cnot | GateKind::CrPulse => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Qubits touched by a gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Qubits {
    One(usize),
    Two(usize, usize),
}

impl Qubits {
    pub fn contains(self, q: usize) -> bool {
        match self {
            Qubits::One(a) => a == q,
            Qubits::Two(a, b) => a == q || b == q,
        }
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let (a, b) = match self {
            Qubits::One(a) => (a, None),
            Qubits::Two(a, b) => (a, Some(b)),
        };
        std::iter::once(a).chain(b)
    }
}

/// A single circuit instruction.
///
/// Two-qubit gates name their qubits in `(control, target)` order. For
/// `Rzz` the order is immaterial, for `Rzx` and `CrPulse` the `Z` factor
/// acts on the first qubit. `CrPulse` stores a non-negative angle with an
/// explicit [`Sign`] so that its drive duration depends on `|angle|` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    X(usize),
    Sx(usize),
    Rx(usize, Angle),
    Ry(usize, Angle),
    Rz(usize, Angle),
    Rzz(usize, usize, Angle),
    Rzx(usize, usize, Angle),
    Cnot(usize, usize),
    CrPulse {
        control: usize,
        target: usize,
        angle: f64,
        sign: Sign,
    },
    Measure(usize),
    /// Idle interval, duration in nanoseconds.
    Delay(usize, f64),
}

impl Gate {
    /// Cross-resonance pulse implementing `exp(-i·signed_angle·ZX/2)`.
    pub fn cr_pulse(control: usize, target: usize, signed_angle: f64) -> Gate {
        Gate::CrPulse {
            control,
            target,
            angle: signed_angle.abs(),
            sign: Sign::of(signed_angle),
        }
    }

    pub fn kind(&self) -> GateKind {
        match self {
            Gate::H(_) => GateKind::H,
            Gate::X(_) => GateKind::X,
            Gate::Sx(_) => GateKind::Sx,
            Gate::Rx(..) => GateKind::Rx,
            Gate::Ry(..) => GateKind::Ry,
            Gate::Rz(..) => GateKind::Rz,
            Gate::Rzz(..) => GateKind::Rzz,
            Gate::Rzx(..) => GateKind::Rzx,
            Gate::Cnot(..) => GateKind::Cnot,
            Gate::CrPulse { .. } => GateKind::CrPulse,
            Gate::Measure(_) => GateKind::Measure,
            Gate::Delay(..) => GateKind::Delay,
        }
    }

    pub fn qubits(&self) -> Qubits {
        match *self {
            Gate::H(q)
            | Gate::X(q)
            | Gate::Sx(q)
            | Gate::Rx(q, _)
            | Gate::Ry(q, _)
            | Gate::Rz(q, _)
            | Gate::Measure(q)
            | Gate::Delay(q, _) => Qubits::One(q),
            Gate::Rzz(a, b, _) | Gate::Rzx(a, b, _) | Gate::Cnot(a, b) => Qubits::Two(a, b),
            Gate::CrPulse { control, target, .. } => Qubits::Two(control, target),
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self.qubits(), Qubits::Two(..))
    }

    /// Unitary single-qubit gate (excludes `Measure` and `Delay`).
    pub fn is_single_qubit_unitary(&self) -> bool {
        matches!(
            self,
            Gate::H(_) | Gate::X(_) | Gate::Sx(_) | Gate::Rx(..) | Gate::Ry(..) | Gate::Rz(..)
        )
    }

    pub fn angle(&self) -> Option<&Angle> {
        match self {
            Gate::Rx(_, a) | Gate::Ry(_, a) | Gate::Rz(_, a) | Gate::Rzz(_, _, a) | Gate::Rzx(_, _, a) => Some(a),
            _ => None,
        }
    }

    pub fn is_bound(&self) -> bool {
        self.angle().is_none_or(Angle::is_bound)
    }

    fn validate(&self, width: usize) -> Result<()> {
        for q in self.qubits().iter() {
            if q >= width {
                return Err(Error::QubitOutOfRange { qubit: q, width });
            }
        }
        if let Qubits::Two(a, b) = self.qubits() {
            if a == b {
                return Err(Error::RepeatedQubit(a));
            }
            if a.abs_diff(b) != 1 {
                return Err(Error::NotCoupled(a, b));
            }
        }
        let finite = match self {
            Gate::CrPulse { angle, .. } => angle.is_finite() && *angle >= 0.0,
            Gate::Delay(_, d) => d.is_finite() && *d >= 0.0,
            other => other.angle().is_none_or(Angle::is_finite),
        };
        if !finite {
            return Err(Error::NonFiniteAngle(self.kind().token()));
        }
        Ok(())
    }

    fn bind(&self, bindings: &HashMap<String, f64>) -> Result<Gate> {
        Ok(match self {
            Gate::Rx(q, a) => Gate::Rx(*q, a.bind(bindings)?),
            Gate::Ry(q, a) => Gate::Ry(*q, a.bind(bindings)?),
            Gate::Rz(q, a) => Gate::Rz(*q, a.bind(bindings)?),
            Gate::Rzz(p, q, a) => Gate::Rzz(*p, *q, a.bind(bindings)?),
            Gate::Rzx(p, q, a) => Gate::Rzx(*p, *q, a.bind(bindings)?),
            other => other.clone(),
        })
    }

    /// Inverse gate, or `None` for non-unitary instructions.
    pub fn inverse(&self) -> Option<Gate> {
        Some(match self {
            Gate::H(q) => Gate::H(*q),
            Gate::X(q) => Gate::X(*q),
            // SX† = RX(-π/2) up to global phase.
            Gate::Sx(q) => Gate::Rx(*q, Angle::Value(-std::f64::consts::FRAC_PI_2)),
            Gate::Rx(q, a) => Gate::Rx(*q, a.negated()),
            Gate::Ry(q, a) => Gate::Ry(*q, a.negated()),
            Gate::Rz(q, a) => Gate::Rz(*q, a.negated()),
            Gate::Rzz(p, q, a) => Gate::Rzz(*p, *q, a.negated()),
            Gate::Rzx(p, q, a) => Gate::Rzx(*p, *q, a.negated()),
            Gate::Cnot(c, t) => Gate::Cnot(*c, *t),
            Gate::CrPulse {
                control,
                target,
                angle,
                sign,
            } => Gate::CrPulse {
                control: *control,
                target: *target,
                angle: *angle,
                sign: sign.flipped(),
            },
            Gate::Measure(_) | Gate::Delay(..) => return None,
        })
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = self.kind().token();
        match self {
            Gate::H(q) | Gate::X(q) | Gate::Sx(q) | Gate::Measure(q) => write!(f, "{kind} {q}"),
            Gate::Rx(q, a) | Gate::Ry(q, a) | Gate::Rz(q, a) => write!(f, "{kind} {q} {a}"),
            Gate::Rzz(p, q, a) | Gate::Rzx(p, q, a) => write!(f, "{kind} {p} {q} {a}"),
            Gate::Cnot(c, t) => write!(f, "{kind} {c} {t}"),
            Gate::CrPulse {
                control,
                target,
                angle,
                sign,
            } => write!(f, "{kind} {control} {target} {}", sign.factor() * angle),
            Gate::Delay(q, d) => write!(f, "{kind} {q} {d}"),
        }
    }
}

/// Ordered gate list over `width` qubits.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
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

    /// Builds a circuit from a gate list, validating every gate.
    pub fn from_gates(width: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Circuit::new(width);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
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

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.width)?;
        self.gates.push(gate);
        Ok(self)
    }

    /// Appends every gate of `other`, which must have the same width.
    pub fn append(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.width != self.width {
            return Err(Error::DimensionMismatch {
                expected: self.width,
                got: other.width,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(self)
    }

    pub fn measure_all(&mut self) -> &mut Self {
        self.gates.extend((0..self.width).map(Gate::Measure));
        self
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind() == kind).count()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn is_bound(&self) -> bool {
        self.gates.iter().all(Gate::is_bound)
    }

    /// Names of all symbolic parameters, sorted.
    pub fn parameters(&self) -> Vec<String> {
        let names: BTreeSet<String> = self
            .gates
            .iter()
            .filter_map(|g| match g.angle() {
                Some(Angle::Symbol { name, .. }) => Some(name.clone()),
                _ => None,
            })
            .collect();
        names.into_iter().collect()
    }

    /// Substitutes every symbol; fails if any symbol has no binding.
    pub fn bind(&self, bindings: &HashMap<String, f64>) -> Result<Circuit> {
        let gates = self
            .gates
            .iter()
            .map(|g| g.bind(bindings))
            .collect::<Result<Vec<_>>>()?;
        Ok(Circuit {
            width: self.width,
            gates,
        })
    }

    /// Adjoint circuit. Fails on `Measure` and `Delay`.
    pub fn inverse(&self) -> Result<Circuit> {
        let gates = self
            .gates
            .iter()
            .rev()
            .map(|g| {
                g.inverse()
                    .ok_or_else(|| Error::UnsupportedGate(format!("{} in inverse", g.kind())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Circuit {
            width: self.width,
            gates,
        })
    }

    pub(crate) fn from_parts_unchecked(width: usize, gates: Vec<Gate>) -> Circuit {
        Circuit { width, gates }
    }

    /// Serializes to the line-oriented text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("QUBITS {}\n", self.width);
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses the line-oriented text format.
    ///
    /// Each non-empty line holds `KIND q0 [q1] [angle]`; `#` starts a
    /// comment. An optional `QUBITS n` line fixes the width, otherwise the
    /// width is one more than the largest qubit index. Angles are numbers,
    /// parameter names, or `coeff*name`; `CR` takes a signed angle and
    /// `DELAY` a duration in nanoseconds.
    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut width: Option<usize> = None;
        let mut gates = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let err = |message: String| Error::Parse { line: line_no, message };
            if tokens[0].eq_ignore_ascii_case("QUBITS") {
                let n = tokens
                    .get(1)
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| err("QUBITS expects a count".into()))?;
                width = Some(n);
                continue;
            }
            let kind = GateKind::from_token(tokens[0]).ok_or_else(|| err(format!("unknown gate `{}`", tokens[0])))?;
            let arity = kind.arity();
            let takes_angle = matches!(
                kind,
                GateKind::Rx
                    | GateKind::Ry
                    | GateKind::Rz
                    | GateKind::Rzz
                    | GateKind::Rzx
                    | GateKind::CrPulse
                    | GateKind::Delay
            );
            let expected = 1 + arity + usize::from(takes_angle);
            if tokens.len() != expected {
                return Err(err(format!(
                    "{} expects {} fields, found {}",
                    kind,
                    expected - 1,
                    tokens.len() - 1
                )));
            }
            let mut qubits = [0usize; 2];
            for (i, slot) in qubits.iter_mut().take(arity).enumerate() {
                *slot = tokens[1 + i]
                    .parse()
                    .map_err(|_| err(format!("bad qubit index `{}`", tokens[1 + i])))?;
            }
            let angle = if takes_angle {
                Some(parse_angle(tokens[1 + arity]).map_err(err)?)
            } else {
                None
            };
            let numeric = |a: &Option<Angle>| -> Result<f64> {
                match a {
                    Some(Angle::Value(v)) => Ok(*v),
                    _ => Err(err(format!("{kind} needs a numeric value"))),
                }
            };
            let [a, b] = qubits;
            let gate = match kind {
                GateKind::H => Gate::H(a),
                GateKind::X => Gate::X(a),
                GateKind::Sx => Gate::Sx(a),
                GateKind::Rx => Gate::Rx(a, angle.unwrap()),
                GateKind::Ry => Gate::Ry(a, angle.unwrap()),
                GateKind::Rz => Gate::Rz(a, angle.unwrap()),
                GateKind::Rzz => Gate::Rzz(a, b, angle.unwrap()),
                GateKind::Rzx => Gate::Rzx(a, b, angle.unwrap()),
                GateKind::Cnot => Gate::Cnot(a, b),
                GateKind::CrPulse => Gate::cr_pulse(a, b, numeric(&angle)?),
                GateKind::Measure => Gate::Measure(a),
                GateKind::Delay => Gate::Delay(a, numeric(&angle)?),
            };
            gates.push((line_no, gate));
        }
        let inferred = gates
            .iter()
            .flat_map(|(_, g)| g.qubits().iter())
            .max()
            .map_or(0, |m| m + 1);
        let width = width.unwrap_or(inferred);
        let mut circuit = Circuit::new(width);
        for (line, g) in gates {
            circuit.push(g).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
        }
        Ok(circuit)
    }
}

fn parse_angle(token: &str) -> std::result::Result<Angle, String> {
    if let Ok(v) = token.parse::<f64>() {
        return Ok(Angle::Value(v));
    }
    let (scale, name) = match token.split_once('*') {
        Some((s, n)) => (
            s.parse::<f64>().map_err(|_| format!("bad coefficient in `{token}`"))?,
            n,
        ),
        None => (1.0, token),
    };
    let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !valid {
        return Err(format!("bad angle `{token}`"));
    }
    Ok(Angle::scaled(name, scale))
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
