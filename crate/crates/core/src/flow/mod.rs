//! Causal flow on geometries `(G, I, O)`.
//!
//! A flow is a successor map `f: O^c -> I^c` with `x ~ f(x)` plus a partial
//! order in which `x` precedes `f(x)` and every neighbour of `f(x)`. For
//! `|I| = |O|` the orbits of `f` form the unique maximum family of
//! vertex-disjoint `I`--`O` paths whenever a flow exists, so finding one is a
//! unit-capacity max-flow ([`network`]), a path walk ([`cover`]) and a cycle
//! check that also builds the order ([`order`]).
//!
//! Runtime is `O(k m)` with `k = |I|` and `m = |E|` per connected component.

pub mod cover;
pub mod network;
pub mod oracle;
pub mod order;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use cover::{find_path_cover, PathCover};
pub use network::{build_max_flow_digraph, max_integral_flow, MaxFlowDigraph, NetNode, NetworkFlow};
pub use order::{find_dependency_order, DependencyOrder};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error("duplicate vertex {0}")]
    DuplicateVertex(u32),
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(u32),
    #[error("self-loop on vertex {0}")]
    SelfLoop(u32),
    #[error("flow search needs |I| = |O|, got {inputs} inputs and {outputs} outputs")]
    UnequalIo { inputs: usize, outputs: usize },
    #[error("no flow exists: maximum path family has {paths} complete paths and misses vertices {uncovered:?}")]
    NoPathCover { paths: usize, uncovered: Vec<u32> },
    #[error("no flow exists: dependency cycle through {cycle:?}")]
    DependencyCycle { cycle: Vec<u32> },
    #[error("path cover does not belong to this geometry")]
    CoverMismatch,
    #[error("instance has {vertices} vertices, brute force is limited to {limit}")]
    TooLarge { vertices: usize, limit: usize },
}

/// Undirected simple graph with input and output subsets.
///
/// Vertices are addressed internally by their rank in ascending label order;
/// adjacency lists are sorted the same way.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Geometry {
    labels: Vec<u32>,
    adjacency: Vec<Vec<usize>>,
    edges: BTreeSet<(u32, u32)>,
    is_input: Vec<bool>,
    is_output: Vec<bool>,
    inputs: Vec<u32>,
    outputs: Vec<u32>,
}

impl Geometry {
    pub fn new(
        vertices: &[u32],
        edges: impl IntoIterator<Item = (u32, u32)>,
        inputs: impl IntoIterator<Item = u32>,
        outputs: impl IntoIterator<Item = u32>,
    ) -> Result<Self, FlowError> {
        let mut labels = vertices.to_vec();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(FlowError::DuplicateVertex(w[0]));
        }
        let index = |l: u32| labels.binary_search(&l).map_err(|_| FlowError::UnknownVertex(l));
        let mut edge_set = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); labels.len()];
        for (a, b) in edges {
            if a == b {
                return Err(FlowError::SelfLoop(a));
            }
            let (ia, ib) = (index(a)?, index(b)?);
            if edge_set.insert((a.min(b), a.max(b))) {
                adjacency[ia].push(ib);
                adjacency[ib].push(ia);
            }
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let mut is_input = vec![false; labels.len()];
        let mut is_output = vec![false; labels.len()];
        for i in inputs {
            is_input[index(i)?] = true;
        }
        for o in outputs {
            is_output[index(o)?] = true;
        }
        let pick = |flags: &[bool]| labels.iter().zip(flags).filter(|(_, &f)| f).map(|(&l, _)| l).collect();
        let inputs = pick(&is_input);
        let outputs = pick(&is_output);
        Ok(Self { labels, adjacency, edges: edge_set, is_input, is_output, inputs, outputs })
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Sorted vertex labels.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> u32 {
        self.labels[index]
    }

    pub fn index_of(&self, label: u32) -> Option<usize> {
        self.labels.binary_search(&label).ok()
    }

    pub fn neighbors(&self, index: usize) -> &[usize] {
        &self.adjacency[index]
    }

    pub fn is_input(&self, index: usize) -> bool {
        self.is_input[index]
    }

    pub fn is_output(&self, index: usize) -> bool {
        self.is_output[index]
    }

    pub fn inputs(&self) -> &[u32] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[u32] {
        &self.outputs
    }

    /// Edges as `(smaller, larger)` label pairs.
    pub fn edges(&self) -> &BTreeSet<(u32, u32)> {
        &self.edges
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }
}

/// A successor function together with its dependency order.
#[derive(Clone, Debug, PartialEq)]
pub struct Flow {
    pub cover: PathCover,
    pub order: DependencyOrder,
}

impl Flow {
    pub fn successor(&self, x: u32) -> Option<u32> {
        self.cover.successor(x)
    }

    pub fn successor_map(&self) -> BTreeMap<u32, u32> {
        self.cover.successor_map()
    }

    pub fn precedes(&self, x: u32, y: u32) -> bool {
        self.order.precedes(x, y)
    }
}

/// Path cover followed by the dependency order, or the reason no flow exists.
pub fn find_flow(g: &Geometry) -> Result<Flow, FlowError> {
    let cover = find_path_cover(g)?;
    let order = find_dependency_order(g, &cover)?;
    Ok(Flow { cover, order })
}

/// Vertices that depend on `x` other than `x`: `f(x)` and the neighbours of
/// `f(x)`, ascending after `f(x)`.
pub(crate) fn dependents<'a>(
    g: &'a Geometry,
    successor: Option<usize>,
    x: usize,
) -> impl Iterator<Item = usize> + 'a {
    successor
        .into_iter()
        .flat_map(move |fx| std::iter::once(fx).chain(g.neighbors(fx).iter().copied().filter(move |&y| y != x)))
}
