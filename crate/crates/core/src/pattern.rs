//! Measurement patterns and their synthesis from a flow.
//!
//! Commands are stored in application order, index 0 first.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;

use thiserror::Error;

use crate::flow::{Flow, Geometry};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Command {
    /// `N_q`: prepare `|+>`
    Prep(u32),
    /// `E_qr`: controlled-Z
    Ent(u32, u32),
    /// `M_q^angle`: destructive measurement, outcome 0 for `<+_angle|`
    Meas { qubit: u32, angle: f64 },
    /// `X_q^{s_signal}`
    CorrX { qubit: u32, signal: u32 },
    /// `Z_q^{s_signal}`
    CorrZ { qubit: u32, signal: u32 },
}

impl Command {
    pub fn qubits(&self) -> Vec<u32> {
        match *self {
            Command::Prep(q) => vec![q],
            Command::Ent(a, b) => vec![a, b],
            Command::Meas { qubit, .. } | Command::CorrX { qubit, .. } | Command::CorrZ { qubit, .. } => vec![qubit],
        }
    }

    pub fn signal(&self) -> Option<u32> {
        match *self {
            Command::CorrX { signal, .. } | Command::CorrZ { signal, .. } => Some(signal),
            _ => None,
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Command::Prep(q) => write!(f, "N{q}"),
            Command::Ent(a, b) => write!(f, "E{a},{b}"),
            Command::Meas { qubit, angle } => write!(f, "M{qubit}({angle})"),
            Command::CorrX { qubit, signal } => write!(f, "X{qubit}^s{signal}"),
            Command::CorrZ { qubit, signal } => write!(f, "Z{qubit}^s{signal}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pattern {
    pub space: Vec<u32>,
    pub inputs: Vec<u32>,
    pub outputs: Vec<u32>,
    pub commands: Vec<Command>,
}

impl Pattern {
    /// Measured qubits in measurement order.
    pub fn measurement_order(&self) -> Vec<u32> {
        self.commands
            .iter()
            .filter_map(|c| match c {
                Command::Meas { qubit, .. } => Some(*qubit),
                _ => None,
            })
            .collect()
    }

    pub fn num_measured(&self) -> usize {
        self.measurement_order().len()
    }

    /// First violated well-formedness condition, if any.
    pub fn validate(&self) -> Result<(), Violation> {
        validate(self)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.commands.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    UnknownQubit,
    DuplicateQubit,
    NotPresent,
    AlreadyPrepared,
    ActsOnMeasured,
    SignalNotMeasured,
    PreparedSetMismatch,
    MeasuredSetMismatch,
    NotStandardForm,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{kind:?}{}: {detail}", .index.map(|i| format!(" at command {i}")).unwrap_or_default())]
pub struct Violation {
    pub kind: ViolationKind,
    /// offending command, `None` for whole-pattern conditions
    pub index: Option<usize>,
    pub detail: String,
}

fn violation(kind: ViolationKind, index: Option<usize>, detail: String) -> Violation {
    Violation { kind, index, detail }
}

/// Checks the definition conditions plus standard form, reporting the first
/// offending command.
pub fn validate(p: &Pattern) -> Result<(), Violation> {
    use ViolationKind::*;
    let space: BTreeSet<u32> = p.space.iter().copied().collect();
    if space.len() != p.space.len() {
        return Err(violation(DuplicateQubit, None, "space lists a qubit twice".into()));
    }
    for q in p.inputs.iter().chain(&p.outputs) {
        if !space.contains(q) {
            return Err(violation(UnknownQubit, None, format!("io qubit {q} is outside the space")));
        }
    }
    let mut present: BTreeSet<u32> = p.inputs.iter().copied().collect();
    let mut prepared = BTreeSet::new();
    let mut measured = BTreeSet::new();
    let mut seen_non_ent = false;
    for (i, c) in p.commands.iter().enumerate() {
        let at = Some(i);
        if matches!(c, Command::Ent(..)) && seen_non_ent {
            return Err(violation(NotStandardForm, at, "entangler after a measurement or correction".into()));
        }
        for q in c.qubits() {
            if !space.contains(&q) {
                return Err(violation(UnknownQubit, at, format!("qubit {q} is outside the space")));
            }
            if measured.contains(&q) {
                return Err(violation(ActsOnMeasured, at, format!("qubit {q} was already measured")));
            }
        }
        match *c {
            Command::Prep(q) => {
                if present.contains(&q) {
                    return Err(violation(AlreadyPrepared, at, format!("qubit {q} already exists")));
                }
                present.insert(q);
                prepared.insert(q);
            }
            Command::Ent(a, b) => {
                if a == b {
                    return Err(violation(DuplicateQubit, at, format!("entangler on {a} twice")));
                }
            }
            Command::Meas { qubit, .. } => {
                seen_non_ent = true;
                measured.insert(qubit);
            }
            Command::CorrX { signal, .. } | Command::CorrZ { signal, .. } => {
                seen_non_ent = true;
                if !measured.contains(&signal) {
                    return Err(violation(SignalNotMeasured, at, format!("signal {signal} is not yet measured")));
                }
            }
        }
        if !matches!(c, Command::Prep(_)) {
            for q in c.qubits() {
                if !present.contains(&q) {
                    return Err(violation(NotPresent, at, format!("qubit {q} is not prepared yet")));
                }
            }
        }
    }
    let inputs: BTreeSet<u32> = p.inputs.iter().copied().collect();
    let outputs: BTreeSet<u32> = p.outputs.iter().copied().collect();
    let non_inputs: BTreeSet<u32> = space.difference(&inputs).copied().collect();
    let non_outputs: BTreeSet<u32> = space.difference(&outputs).copied().collect();
    if prepared != non_inputs {
        return Err(violation(PreparedSetMismatch, None, format!("prepared {prepared:?}, non-inputs {non_inputs:?}")));
    }
    if measured != non_outputs {
        return Err(violation(MeasuredSetMismatch, None, format!("measured {measured:?}, non-outputs {non_outputs:?}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SynthesisError {
    #[error("no angle for non-output {0}")]
    MissingAngle(u32),
    #[error("flow does not belong to this geometry")]
    FlowMismatch,
}

/// The corrected pattern of a flow:
/// `N_{I^c}`, `E_G`, then for each non-output `i` in a linear extension of the
/// order, `M_i^{a_i}`, `X_{f(i)}^{s_i}` and `Z_k^{s_i}` for `k ~ f(i)`, `k != i`.
///
/// The extension is Kahn's algorithm with the smallest label first.
pub fn synthesize(g: &Geometry, flow: &Flow, angles: &BTreeMap<u32, f64>) -> Result<Pattern, SynthesisError> {
    let n = g.num_vertices();
    let mut succ = vec![None; n];
    for (x, y) in flow.successor_map() {
        let xi = g.index_of(x).ok_or(SynthesisError::FlowMismatch)?;
        let yi = g.index_of(y).ok_or(SynthesisError::FlowMismatch)?;
        if g.is_output(xi) || !g.has_edge(x, y) {
            return Err(SynthesisError::FlowMismatch);
        }
        succ[xi] = Some(yi);
    }
    for v in 0..n {
        if !g.is_output(v) {
            if succ[v].is_none() {
                return Err(SynthesisError::FlowMismatch);
            }
            if !angles.contains_key(&g.label(v)) {
                return Err(SynthesisError::MissingAngle(g.label(v)));
            }
        }
    }

    let mut commands = Vec::new();
    for v in 0..n {
        if !g.is_input(v) {
            commands.push(Command::Prep(g.label(v)));
        }
    }
    for &(a, b) in g.edges() {
        commands.push(Command::Ent(a, b));
    }

    // Kahn over the generating arcs x -> f(x), x -> N(f(x)) \ {x} among
    // non-outputs
    let mut arcs = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for x in 0..n {
        if let Some(fx) = succ[x] {
            for y in std::iter::once(fx).chain(g.neighbors(fx).iter().copied().filter(|&y| y != x)) {
                if !g.is_output(y) {
                    arcs[x].push(y);
                    indegree[y] += 1;
                }
            }
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| !g.is_output(v) && indegree[v] == 0).map(Reverse).collect();
    let mut emitted = 0;
    while let Some(Reverse(i)) = ready.pop() {
        emitted += 1;
        let fi = succ[i].expect("non-output has a successor");
        let label = g.label(i);
        commands.push(Command::Meas { qubit: label, angle: angles[&label] });
        commands.push(Command::CorrX { qubit: g.label(fi), signal: label });
        for &k in g.neighbors(fi) {
            if k != i {
                commands.push(Command::CorrZ { qubit: g.label(k), signal: label });
            }
        }
        for &y in &arcs[i] {
            indegree[y] -= 1;
            if indegree[y] == 0 {
                ready.push(Reverse(y));
            }
        }
    }
    if emitted != (0..n).filter(|&v| !g.is_output(v)).count() {
        // the flow's order is cyclic
        return Err(SynthesisError::FlowMismatch);
    }
    Ok(Pattern {
        space: g.labels().to_vec(),
        inputs: g.inputs().to_vec(),
        outputs: g.outputs().to_vec(),
        commands,
    })
}
