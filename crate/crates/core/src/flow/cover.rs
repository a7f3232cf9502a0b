//! Extracting a path cover from a maximum flow.

use std::collections::BTreeMap;

use super::network::{build_max_flow_digraph, max_integral_flow, MaxFlowDigraph, NetworkFlow};
use super::{FlowError, Geometry};

/// Vertex-disjoint directed paths covering `V`, each from an input to an
/// output, with the successor function they induce.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathCover {
    labels: Vec<u32>,
    paths: Vec<Vec<usize>>,
    path_of: Vec<usize>,
    position: Vec<usize>,
    successor: Vec<Option<usize>>,
}

impl PathCover {
    /// Paths as label sequences, ordered by their input.
    pub fn paths(&self) -> Vec<Vec<u32>> {
        self.paths.iter().map(|p| p.iter().map(|&v| self.labels[v]).collect()).collect()
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    fn index(&self, label: u32) -> Option<usize> {
        self.labels.binary_search(&label).ok()
    }

    pub fn successor(&self, x: u32) -> Option<u32> {
        self.successor[self.index(x)?].map(|y| self.labels[y])
    }

    pub fn successor_map(&self) -> BTreeMap<u32, u32> {
        self.successor
            .iter()
            .enumerate()
            .filter_map(|(x, s)| s.map(|y| (self.labels[x], self.labels[y])))
            .collect()
    }

    /// `(path id, distance from the path start)` of a vertex.
    pub fn locate(&self, x: u32) -> Option<(usize, usize)> {
        let i = self.index(x)?;
        Some((self.path_of[i], self.position[i]))
    }

    pub(crate) fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub(crate) fn path_of_index(&self, v: usize) -> usize {
        self.path_of[v]
    }

    pub(crate) fn position_of_index(&self, v: usize) -> usize {
        self.position[v]
    }

    pub(crate) fn successor_of_index(&self, v: usize) -> Option<usize> {
        self.successor[v]
    }
}

/// Max-flow, then walk the saturated `A_x -> B_y` arcs from every input in
/// ascending order. Succeeds iff the walked paths cover every vertex.
pub fn find_path_cover(g: &Geometry) -> Result<PathCover, FlowError> {
    if g.inputs().len() != g.outputs().len() {
        return Err(FlowError::UnequalIo { inputs: g.inputs().len(), outputs: g.outputs().len() });
    }
    let net = build_max_flow_digraph(g);
    let flow = max_integral_flow(&net);
    extract_cover(g, &net, &flow)
}

fn extract_cover(g: &Geometry, net: &MaxFlowDigraph, flow: &NetworkFlow) -> Result<PathCover, FlowError> {
    let n = g.num_vertices();
    let mut in_vertex = vec![usize::MAX; net.nodes().len()];
    let mut out_vertex = vec![usize::MAX; net.nodes().len()];
    for v in 0..n {
        if let Some(b) = net.in_node(v) {
            in_vertex[b] = v;
        }
        if let Some(a) = net.out_node(v) {
            out_vertex[a] = v;
        }
    }
    // saturated A_x -> B_y arcs; source, sink and B_v -> A_v arcs fall out
    let mut next = vec![None; n];
    for (arc, _) in flow.saturated.iter().enumerate().filter(|(_, &s)| s) {
        let (a, b) = net.arc_endpoints(arc);
        let (x, y) = (out_vertex[a], in_vertex[b]);
        if x != usize::MAX && y != usize::MAX && x != y {
            next[x] = Some(y);
        }
    }

    let mut path_of = vec![usize::MAX; n];
    let mut position = vec![0; n];
    let mut successor = vec![None; n];
    let mut paths = Vec::new();
    let mut complete = 0;
    for start in (0..n).filter(|&v| g.is_input(v)) {
        let id = paths.len();
        let mut path = vec![start];
        path_of[start] = id;
        let mut x = start;
        let mut ok = true;
        while !g.is_output(x) {
            match next[x] {
                Some(y) if path_of[y] == usize::MAX => {
                    path_of[y] = id;
                    position[y] = path.len();
                    successor[x] = Some(y);
                    path.push(y);
                    x = y;
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            for &v in &path {
                path_of[v] = usize::MAX;
                successor[v] = None;
            }
            continue;
        }
        complete += 1;
        paths.push(path);
    }
    let uncovered: Vec<u32> = (0..n).filter(|&v| path_of[v] == usize::MAX).map(|v| g.label(v)).collect();
    if !uncovered.is_empty() {
        return Err(FlowError::NoPathCover { paths: complete, uncovered });
    }
    Ok(PathCover { labels: g.labels().to_vec(), paths, path_of, position, successor })
}

/// Builds a cover from an explicit successor map, checking every path-cover
/// condition. Used to feed externally supplied flows back in.
pub fn cover_from_successor(g: &Geometry, successor: &BTreeMap<u32, u32>) -> Result<PathCover, FlowError> {
    let n = g.num_vertices();
    let mut succ = vec![None; n];
    let mut pred = vec![None; n];
    for (&x, &y) in successor {
        let xi = g.index_of(x).ok_or(FlowError::UnknownVertex(x))?;
        let yi = g.index_of(y).ok_or(FlowError::UnknownVertex(y))?;
        if g.is_output(xi) || g.is_input(yi) || !g.has_edge(x, y) || pred[yi].is_some() {
            return Err(FlowError::CoverMismatch);
        }
        succ[xi] = Some(yi);
        pred[yi] = Some(xi);
    }
    let mut path_of = vec![usize::MAX; n];
    let mut position = vec![0; n];
    let mut paths = Vec::new();
    for start in (0..n).filter(|&v| pred[v].is_none()) {
        let id = paths.len();
        let mut path = Vec::new();
        let mut x = Some(start);
        while let Some(v) = x {
            path_of[v] = id;
            position[v] = path.len();
            path.push(v);
            x = succ[v];
        }
        let last = *path.last().expect("nonempty");
        let interior_ok = path[1..].iter().all(|&v| !g.is_input(v))
            && path[..path.len() - 1].iter().all(|&v| !g.is_output(v));
        if !g.is_output(last) || !interior_ok {
            return Err(FlowError::CoverMismatch);
        }
        paths.push(path);
    }
    // anything left lies on a cycle of the successor map
    if path_of.contains(&usize::MAX) {
        return Err(FlowError::CoverMismatch);
    }
    Ok(PathCover { labels: g.labels().to_vec(), paths, path_of, position, successor: succ })
}
