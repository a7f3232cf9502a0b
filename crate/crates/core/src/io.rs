//! JSON file formats for every stage.
//!
//! Complex numbers are `[re, im]` pairs; angles are radians written as
//! shortest round-trip doubles. Label-keyed maps use decimal string keys.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compile::{CompileBundle, PlanRecord};
use crate::flow::{Flow, FlowError, Geometry};
use crate::graphmatch::MatchResult;
use crate::linalg::{Matrix, C64};
use crate::pattern::{Command, Pattern};
use crate::sim::{BranchMap, VerificationReport};
use crate::types::{CoreError, PhaseMapDiagonal, QubitIndexing, UnitaryMatrix};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid content: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

fn invalid(msg: impl Into<String>) -> IoError {
    IoError::Invalid(msg.into())
}

type Pair = [f64; 2];

fn to_pair(c: C64) -> Pair {
    [c.re, c.im]
}

fn from_pair(p: Pair) -> C64 {
    C64::new(p[0], p[1])
}

fn keyed<V: Clone>(m: &BTreeMap<u32, V>) -> BTreeMap<String, V> {
    m.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn unkey<V>(m: BTreeMap<String, V>) -> Result<BTreeMap<u32, V>, IoError> {
    m.into_iter()
        .map(|(k, v)| k.parse::<u32>().map(|k| (k, v)).map_err(|_| invalid(format!("bad vertex key {k:?}"))))
        .collect()
}

/// Serializes a label-keyed map with keys in numeric order.
mod numeric_keys {
    use serde::ser::SerializeMap;
    use serde::Serializer;
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer, V: serde::Serialize>(m: &BTreeMap<String, V>, s: S) -> Result<S::Ok, S::Error> {
        let mut entries: Vec<(&String, &V)> = m.iter().collect();
        entries.sort_by_key(|(k, _)| (k.len(), k.as_str()));
        let mut map = s.serialize_map(Some(entries.len()))?;
        for (k, v) in entries {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

// ---- unitary ----

#[derive(Serialize, Deserialize)]
pub struct UnitaryJson {
    pub num_qubits: usize,
    pub matrix: Vec<Vec<Pair>>,
}

impl UnitaryJson {
    pub fn from_unitary(u: &UnitaryMatrix) -> Self {
        let m = u.matrix();
        Self {
            num_qubits: u.num_qubits(),
            matrix: (0..m.rows()).map(|r| m.row(r).iter().map(|&c| to_pair(c)).collect()).collect(),
        }
    }

    pub fn into_unitary(self) -> Result<UnitaryMatrix, IoError> {
        let rows: Vec<Vec<C64>> = self.matrix.into_iter().map(|r| r.into_iter().map(from_pair).collect()).collect();
        let u = UnitaryMatrix::from_rows(rows)?;
        if u.num_qubits() != self.num_qubits {
            return Err(invalid(format!("num_qubits {} but the matrix acts on {}", self.num_qubits, u.num_qubits())));
        }
        Ok(u)
    }
}

// ---- phase map ----

#[derive(Serialize, Deserialize)]
pub struct PhaseMapJson {
    pub num_qubits: usize,
    pub diagonal: Vec<Pair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<u32>>,
}

impl PhaseMapJson {
    pub fn new(phi: &PhaseMapDiagonal, indexing: Option<&QubitIndexing>) -> Self {
        Self {
            num_qubits: phi.num_qubits(),
            diagonal: phi.entries().iter().map(|&c| to_pair(c)).collect(),
            vertices: indexing.map(|ix| ix.vertices().to_vec()),
            inputs: indexing.map(|ix| ix.inputs().to_vec()),
            outputs: indexing.map(|ix| ix.outputs().to_vec()),
        }
    }

    pub fn phase_map(&self) -> Result<PhaseMapDiagonal, IoError> {
        let phi = PhaseMapDiagonal::new(self.diagonal.iter().copied().map(from_pair).collect())?;
        if phi.num_qubits() != self.num_qubits {
            return Err(invalid(format!("num_qubits {} but the diagonal has {} entries", self.num_qubits, self.diagonal.len())));
        }
        Ok(phi)
    }

    /// Vertices default to `1..=num_qubits`; inputs and outputs fall back to
    /// the overrides.
    pub fn indexing(&self, inputs: Option<&[u32]>, outputs: Option<&[u32]>) -> Result<QubitIndexing, IoError> {
        let vertices = self.vertices.clone().unwrap_or_else(|| (1..=self.num_qubits as u32).collect());
        let inputs = inputs.map(<[u32]>::to_vec).or_else(|| self.inputs.clone()).ok_or_else(|| invalid("inputs not given"))?;
        let outputs = outputs.map(<[u32]>::to_vec).or_else(|| self.outputs.clone()).ok_or_else(|| invalid("outputs not given"))?;
        Ok(QubitIndexing::new(&vertices, &inputs, &outputs)?)
    }
}

// ---- geometry and match ----

/// Geometry, optionally carrying angles; a graph match is written in this
/// shape so it feeds the flow and synthesis stages directly.
#[derive(Serialize, Deserialize)]
pub struct GeometryJson {
    pub vertices: Vec<u32>,
    pub edges: Vec<[u32; 2]>,
    pub inputs: Vec<u32>,
    pub outputs: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_angles")]
    pub angles: Option<BTreeMap<String, f64>>,
}

fn ser_opt_angles<S: serde::Serializer>(a: &Option<BTreeMap<String, f64>>, s: S) -> Result<S::Ok, S::Error> {
    match a {
        Some(m) => numeric_keys::serialize(m, s),
        None => s.serialize_none(),
    }
}

impl GeometryJson {
    pub fn from_geometry(g: &Geometry) -> Self {
        Self {
            vertices: g.labels().to_vec(),
            edges: g.edges().iter().map(|&(a, b)| [a, b]).collect(),
            inputs: g.inputs().to_vec(),
            outputs: g.outputs().to_vec(),
            angles: None,
        }
    }

    pub fn from_match(m: &MatchResult, indexing: &QubitIndexing) -> Self {
        Self {
            vertices: indexing.vertices().to_vec(),
            edges: m.edges.iter().map(|&(a, b)| [a, b]).collect(),
            inputs: indexing.inputs().to_vec(),
            outputs: indexing.outputs().to_vec(),
            angles: Some(keyed(&m.angles)),
        }
    }

    pub fn geometry(&self) -> Result<Geometry, IoError> {
        Ok(Geometry::new(
            &self.vertices,
            self.edges.iter().map(|e| (e[0], e[1])),
            self.inputs.iter().copied(),
            self.outputs.iter().copied(),
        )?)
    }

    pub fn angles(&self) -> Result<BTreeMap<u32, f64>, IoError> {
        unkey(self.angles.clone().ok_or_else(|| invalid("no angles given"))?)
    }
}

// ---- flow ----

#[derive(Serialize, Deserialize)]
pub struct FlowJson {
    #[serde(serialize_with = "numeric_keys::serialize")]
    pub f: BTreeMap<String, u32>,
    pub order_chains: Vec<Vec<u32>>,
    /// per vertex, the earliest vertex of each chain it precedes
    #[serde(serialize_with = "numeric_keys::serialize")]
    pub sup: BTreeMap<String, Vec<Option<u32>>>,
}

impl FlowJson {
    pub fn from_flow(flow: &Flow) -> Self {
        let chains = flow.order.chains().to_vec();
        let sup = flow
            .order
            .labels()
            .iter()
            .map(|&x| (x.to_string(), (0..chains.len()).map(|p| flow.order.sup(x, p)).collect()))
            .collect();
        Self { f: keyed(&flow.successor_map()), order_chains: chains, sup }
    }

    pub fn successor(&self) -> Result<BTreeMap<u32, u32>, IoError> {
        unkey(self.f.clone())
    }
}

// ---- pattern ----

#[derive(Serialize, Deserialize)]
#[serde(tag = "op")]
pub enum CommandJson {
    N { q: u32 },
    E { q: [u32; 2] },
    M { q: u32, angle: f64 },
    X { q: u32, signal: u32 },
    Z { q: u32, signal: u32 },
}

impl From<&Command> for CommandJson {
    fn from(c: &Command) -> Self {
        match *c {
            Command::Prep(q) => CommandJson::N { q },
            Command::Ent(a, b) => CommandJson::E { q: [a, b] },
            Command::Meas { qubit, angle } => CommandJson::M { q: qubit, angle },
            Command::CorrX { qubit, signal } => CommandJson::X { q: qubit, signal },
            Command::CorrZ { qubit, signal } => CommandJson::Z { q: qubit, signal },
        }
    }
}

impl From<CommandJson> for Command {
    fn from(c: CommandJson) -> Self {
        match c {
            CommandJson::N { q } => Command::Prep(q),
            CommandJson::E { q } => Command::Ent(q[0], q[1]),
            CommandJson::M { q, angle } => Command::Meas { qubit: q, angle },
            CommandJson::X { q, signal } => Command::CorrX { qubit: q, signal },
            CommandJson::Z { q, signal } => Command::CorrZ { qubit: q, signal },
        }
    }
}

#[derive(Serialize, Deserialize)]
pub struct PatternJson {
    pub space: Vec<u32>,
    pub inputs: Vec<u32>,
    pub outputs: Vec<u32>,
    pub commands: Vec<CommandJson>,
}

impl PatternJson {
    pub fn from_pattern(p: &Pattern) -> Self {
        Self {
            space: p.space.clone(),
            inputs: p.inputs.clone(),
            outputs: p.outputs.clone(),
            commands: p.commands.iter().map(CommandJson::from).collect(),
        }
    }

    pub fn into_pattern(self) -> Pattern {
        Pattern {
            space: self.space,
            inputs: self.inputs,
            outputs: self.outputs,
            commands: self.commands.into_iter().map(Command::from).collect(),
        }
    }
}

// ---- branch maps ----

#[derive(Serialize, Deserialize)]
pub struct BranchMapJson {
    /// outcome bits in measurement order, as a `0`/`1` string
    pub outcomes: String,
    pub map: Vec<Vec<Pair>>,
}

impl BranchMapJson {
    pub fn from_branch(b: &BranchMap) -> Self {
        Self { outcomes: b.outcomes.iter().map(|&s| if s { '1' } else { '0' }).collect(), map: matrix_rows(&b.map) }
    }
}

pub fn matrix_rows(m: &Matrix) -> Vec<Vec<Pair>> {
    (0..m.rows()).map(|r| m.row(r).iter().map(|&c| to_pair(c)).collect()).collect()
}

// ---- plan ----

/// Plan file. Only `aux` and the io sets are needed to decompose; the rest
/// pins a candidate found by the compile search.
#[derive(Serialize, Deserialize)]
pub struct PlanJson {
    pub inputs: Vec<u32>,
    pub outputs: Vec<u32>,
    pub aux: usize,
    #[serde(default)]
    pub perm_seed: Option<u64>,
    #[serde(default = "default_trials")]
    pub max_trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub slot_solution: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutations: Option<Vec<Vec<usize>>>,
}

fn default_trials() -> usize {
    10_000
}

impl PlanJson {
    pub fn from_record(r: &PlanRecord) -> Self {
        Self {
            inputs: r.inputs.clone(),
            outputs: r.outputs.clone(),
            aux: r.aux,
            perm_seed: r.perm_seed,
            max_trials: r.max_trials,
            seed: r.seed,
            slot_solution: r.slot_solution,
            permutations: Some(r.permutations.clone()),
        }
    }

    /// Missing permutations default to the identity.
    pub fn into_record(self) -> Result<PlanRecord, IoError> {
        let k = self.inputs.len();
        if self.aux < k || self.aux - k >= 24 {
            return Err(invalid(format!("aux {} is out of range for {k} inputs", self.aux)));
        }
        let slots = 1usize << (self.aux - k);
        let permutations = self.permutations.unwrap_or_else(|| vec![(0..slots).collect(); 1 << (2 * k)]);
        Ok(PlanRecord {
            inputs: self.inputs,
            outputs: self.outputs,
            aux: self.aux,
            slot_solution: self.slot_solution,
            permutations,
            seed: self.seed,
            perm_seed: self.perm_seed,
            max_trials: self.max_trials,
        })
    }
}

// ---- bundle ----

#[derive(Serialize)]
pub struct BundleJson {
    pub plan: PlanJson,
    pub phasemap: PhaseMapJson,
    #[serde(rename = "match")]
    pub matched: GeometryJson,
    pub geometry: GeometryJson,
    pub flow: FlowJson,
    pub pattern: PatternJson,
    pub report: VerificationReport,
    pub trials: usize,
}

impl BundleJson {
    pub fn from_bundle(b: &CompileBundle) -> Result<Self, IoError> {
        let ix = b.plan.indexing()?;
        Ok(Self {
            plan: PlanJson::from_record(&b.plan),
            phasemap: PhaseMapJson::new(&b.phase_map, Some(&ix)),
            matched: GeometryJson::from_match(&b.matched, &ix),
            geometry: GeometryJson::from_geometry(&b.geometry),
            flow: FlowJson::from_flow(&b.flow),
            pattern: PatternJson::from_pattern(&b.pattern),
            report: b.report.clone(),
            trials: b.trials,
        })
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, IoError> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T, IoError> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::find_flow;
    use crate::linalg::cis;

    #[test]
    fn pattern_json_shape() {
        let p = Pattern {
            space: vec![1, 2],
            inputs: vec![1],
            outputs: vec![2],
            commands: vec![
                Command::Prep(2),
                Command::Ent(1, 2),
                Command::Meas { qubit: 1, angle: 0.785 },
                Command::CorrX { qubit: 2, signal: 1 },
            ],
        };
        let text = serde_json::to_string(&PatternJson::from_pattern(&p)).unwrap();
        assert_eq!(
            text,
            r#"{"space":[1,2],"inputs":[1],"outputs":[2],"commands":[{"op":"N","q":2},{"op":"E","q":[1,2]},{"op":"M","q":1,"angle":0.785},{"op":"X","q":2,"signal":1}]}"#
        );
        let back: PatternJson = from_json(&text).unwrap();
        assert_eq!(back.into_pattern(), p);
    }

    #[test]
    fn angles_round_trip_exactly() {
        let a = std::f64::consts::PI / 3.0 + 1e-15;
        let text = serde_json::to_string(&a).unwrap();
        assert_eq!(text.parse::<f64>().unwrap(), a);
    }

    #[test]
    fn numeric_key_order() {
        let labels: Vec<u32> = (1..=11).collect();
        let edges: Vec<(u32, u32)> = (1..11).map(|i| (i, i + 1)).collect();
        let g = Geometry::new(&labels, edges, [1], [11]).unwrap();
        let flow = find_flow(&g).unwrap();
        let text = serde_json::to_string(&FlowJson::from_flow(&flow)).unwrap();
        assert!(text.starts_with(r#"{"f":{"1":2,"2":3,"#), "{text}");
        let back: FlowJson = from_json(&text).unwrap();
        assert_eq!(back.successor().unwrap(), flow.successor_map());
    }

    #[test]
    fn phasemap_and_unitary_round_trip() {
        let phi = PhaseMapDiagonal::new(vec![C64::new(1.0, 0.0), cis(0.3)]).unwrap();
        let text = to_json(&PhaseMapJson::new(&phi, None)).unwrap();
        let back: PhaseMapJson = from_json(&text).unwrap();
        assert_eq!(back.phase_map().unwrap(), phi);
        assert!(back.indexing(None, None).is_err());

        let bad: UnitaryJson = from_json(r#"{"num_qubits":1,"matrix":[[[1,0],[1,0]],[[0,0],[1,0]]]}"#).unwrap();
        assert!(bad.into_unitary().is_err());
    }
}
