//! Reading an entanglement graph and measurement angles off a phase map.
//!
//! A diagonal has a matching pattern iff for every basis string `x`
//!
//! ```text
//! d_xx = exp(-i sum_{j in O^c} alpha_j x_j) * (-1)^{sum_{jk in E} x_j x_k}
//! ```
//!
//! The weight-one entries fix the angles and the weight-two entries fix the
//! edges, so extraction reads `O(|V|^2)` entries. Higher-weight entries are not
//! constrained by those reads, hence [`verify_full`].

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::flow::{FlowError, Geometry};
use crate::linalg::{cis, normalize_angle, C64, ONE};
use crate::types::{DiagonalSource, QubitIndexing, MATRIX_EQ_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchError {
    #[error("phase map has {got} qubits, the computation space has {expected}")]
    QubitCount { expected: usize, got: usize },
    #[error("no matching graph: entry at the all-zero string is {0}, not 1")]
    NonUnitOrigin(C64),
    #[error("no matching graph: entry at output {vertex} is {entry}, not 1")]
    NonUnitOutput { vertex: u32, entry: C64 },
    #[error("no matching graph: entry for pair ({j}, {k}) is {entry}, expected +-{expected}")]
    PairMismatch { j: u32, k: u32, entry: C64, expected: C64 },
}

/// Entanglement graph plus the measurement angle of every non-output.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MatchResult {
    /// unordered pairs, stored `(smaller, larger)`
    pub edges: BTreeSet<(u32, u32)>,
    /// radians in `[0, 2pi)`, keyed by non-output label
    pub angles: BTreeMap<u32, f64>,
}

impl MatchResult {
    /// The geometry `(G, I, O)` this match lives on.
    pub fn geometry(&self, indexing: &QubitIndexing) -> Result<Geometry, FlowError> {
        Geometry::new(
            indexing.vertices(),
            self.edges.iter().copied(),
            indexing.inputs().iter().copied(),
            indexing.outputs().iter().copied(),
        )
    }

    /// Angle used for `label` in the phase formula; outputs carry 0.
    pub fn angle(&self, label: u32) -> f64 {
        self.angles.get(&label).copied().unwrap_or(0.0)
    }
}

/// Graph extraction with a configurable comparison tolerance.
#[derive(Clone, Copy, Debug)]
pub struct GraphMatcher {
    pub tol: f64,
}

impl Default for GraphMatcher {
    fn default() -> Self {
        Self { tol: MATRIX_EQ_TOL }
    }
}

impl GraphMatcher {
    fn check_size<D: DiagonalSource + ?Sized>(&self, phi: &D, ix: &QubitIndexing) -> Result<(), MatchError> {
        if phi.num_qubits() != ix.num_qubits() {
            return Err(MatchError::QubitCount { expected: ix.num_qubits(), got: phi.num_qubits() });
        }
        Ok(())
    }

    /// `alpha_j = -arg d(z_j)` for non-outputs; outputs and the origin must
    /// read 1.
    pub fn extract_angles<D: DiagonalSource + ?Sized>(
        &self,
        phi: &D,
        ix: &QubitIndexing,
    ) -> Result<BTreeMap<u32, f64>, MatchError> {
        self.check_size(phi, ix)?;
        let origin = phi.entry(0);
        if !((origin - ONE).norm() < self.tol) {
            return Err(MatchError::NonUnitOrigin(origin));
        }
        let mut angles = BTreeMap::new();
        for &v in ix.vertices() {
            let d = phi.entry(1 << ix.shift(v).expect("vertex"));
            if ix.is_output(v) {
                if !((d - ONE).norm() < self.tol) {
                    return Err(MatchError::NonUnitOutput { vertex: v, entry: d });
                }
            } else {
                angles.insert(v, normalize_angle(-d.arg()));
            }
        }
        Ok(angles)
    }

    /// Pairs in lexicographic order; stops at the first pair whose entry is
    /// neither `+e^{-i(a_j+a_k)}` (no edge) nor `-e^{-i(a_j+a_k)}` (edge).
    pub fn extract_edges<D: DiagonalSource + ?Sized>(
        &self,
        phi: &D,
        ix: &QubitIndexing,
        angles: &BTreeMap<u32, f64>,
    ) -> Result<BTreeSet<(u32, u32)>, MatchError> {
        self.check_size(phi, ix)?;
        let angle = |v: u32| angles.get(&v).copied().unwrap_or(0.0);
        let mut edges = BTreeSet::new();
        let vs = ix.vertices();
        for (a, &j) in vs.iter().enumerate() {
            for &k in &vs[a + 1..] {
                let z = (1 << ix.shift(j).expect("vertex")) | (1 << ix.shift(k).expect("vertex"));
                let d = phi.entry(z);
                let expected = cis(-(angle(j) + angle(k)));
                if (d + expected).norm() < self.tol {
                    edges.insert((j, k));
                } else if !((d - expected).norm() < self.tol) {
                    return Err(MatchError::PairMismatch { j, k, entry: d, expected });
                }
            }
        }
        Ok(edges)
    }

    pub fn extract<D: DiagonalSource + ?Sized>(&self, phi: &D, ix: &QubitIndexing) -> Result<MatchResult, MatchError> {
        let angles = self.extract_angles(phi, ix)?;
        let edges = self.extract_edges(phi, ix, &angles)?;
        Ok(MatchResult { edges, angles })
    }

    /// Checks the phase formula on every basis string.
    pub fn verify_full<D: DiagonalSource + ?Sized>(&self, phi: &D, result: &MatchResult, ix: &QubitIndexing) -> bool {
        if phi.num_qubits() != ix.num_qubits() {
            return false;
        }
        let angle_terms: Vec<(u32, f64)> =
            result.angles.iter().filter_map(|(&v, &a)| Some((ix.shift(v)?, a))).collect();
        let edge_terms: Vec<(u32, u32)> =
            result.edges.iter().filter_map(|&(j, k)| Some((ix.shift(j)?, ix.shift(k)?))).collect();
        if angle_terms.len() != result.angles.len() || edge_terms.len() != result.edges.len() {
            return false;
        }
        (0..1usize << ix.num_qubits()).all(|x| {
            let bit = |s: u32| (x >> s) & 1 == 1;
            let theta: f64 = angle_terms.iter().filter(|(s, _)| bit(*s)).map(|(_, a)| a).sum();
            let parity = edge_terms.iter().filter(|(s, t)| bit(*s) && bit(*t)).count() % 2;
            let expected = if parity == 1 { -cis(-theta) } else { cis(-theta) };
            (phi.entry(x) - expected).norm() < self.tol
        })
    }
}

/// Step one of graph matching with the default tolerance.
pub fn extract_angles<D: DiagonalSource + ?Sized>(phi: &D, ix: &QubitIndexing) -> Result<BTreeMap<u32, f64>, MatchError> {
    GraphMatcher::default().extract_angles(phi, ix)
}

/// Step two of graph matching with the default tolerance.
pub fn extract_edges<D: DiagonalSource + ?Sized>(
    phi: &D,
    ix: &QubitIndexing,
    angles: &BTreeMap<u32, f64>,
) -> Result<BTreeSet<(u32, u32)>, MatchError> {
    GraphMatcher::default().extract_edges(phi, ix, angles)
}

/// Both extraction steps. The result still needs [`verify_full`].
pub fn match_graph<D: DiagonalSource + ?Sized>(phi: &D, ix: &QubitIndexing) -> Result<MatchResult, MatchError> {
    GraphMatcher::default().extract(phi, ix)
}

pub fn verify_full<D: DiagonalSource + ?Sized>(phi: &D, result: &MatchResult, ix: &QubitIndexing) -> bool {
    GraphMatcher::default().verify_full(phi, result, ix)
}
