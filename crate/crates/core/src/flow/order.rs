//! Dependency order of a successor function, stored as a chain decomposition.
//!
//! `y` depends on `x` when `y = f(x)` or `y ~ f(x)`. The order is the
//! transitive closure of that relation; it is represented by `sup[x][P]`, the
//! earliest vertex of path `P` that `x` precedes. A depth-first walk fills the
//! table bottom-up and reports a cycle the moment it re-enters a vertex whose
//! suprema are still pending.

use super::cover::PathCover;
use super::{dependents, FlowError, Geometry};

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    None,
    Pending,
    Fixed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyOrder {
    labels: Vec<u32>,
    chains: Vec<Vec<u32>>,
    num_paths: usize,
    /// `sup[x * num_paths + p]`: position on path `p`, or `NONE`
    sup: Vec<u32>,
    path_of: Vec<usize>,
    position: Vec<usize>,
}

impl DependencyOrder {
    fn index(&self, label: u32) -> Option<usize> {
        self.labels.binary_search(&label).ok()
    }

    /// `x` precedes `y` iff `sup[x][P_y]` exists and is no later on `P_y`
    /// than `y`.
    pub fn precedes(&self, x: u32, y: u32) -> bool {
        match (self.index(x), self.index(y)) {
            (Some(xi), Some(yi)) => self.precedes_index(xi, yi),
            _ => false,
        }
    }

    pub(crate) fn precedes_index(&self, x: usize, y: usize) -> bool {
        let s = self.sup[x * self.num_paths + self.path_of[y]];
        s != NONE && s as usize <= self.position[y]
    }

    /// Earliest vertex on chain `path` that `x` precedes.
    pub fn sup(&self, x: u32, path: usize) -> Option<u32> {
        let xi = self.index(x)?;
        let s = *self.sup.get(xi * self.num_paths + path)?;
        (s != NONE).then(|| self.chains[path][s as usize])
    }

    /// The paths of the cover, each a chain of the order.
    pub fn chains(&self) -> &[Vec<u32>] {
        &self.chains
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }
}

/// Builds the dependency order of the cover's successor function, or reports a
/// dependency cycle. `O(k m)` for `k` paths and `m` edges.
pub fn find_dependency_order(g: &Geometry, cover: &PathCover) -> Result<DependencyOrder, FlowError> {
    if cover.labels() != g.labels() {
        return Err(FlowError::CoverMismatch);
    }
    let n = g.num_vertices();
    let k = cover.num_paths();
    let mut sup = vec![NONE; n * k];
    let mut status = vec![Status::None; n];

    // (vertex, its dependents, next dependent to visit)
    let mut stack: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    for root in 0..n {
        if status[root] != Status::None {
            continue;
        }
        enter(root, g, cover, &mut status, &mut sup, k, &mut stack);
        while let Some(top) = stack.last_mut() {
            let x = top.0;
            if top.2 < top.1.len() {
                let y = top.1[top.2];
                top.2 += 1;
                match status[y] {
                    Status::None => enter(y, g, cover, &mut status, &mut sup, k, &mut stack),
                    Status::Pending => {
                        let from = stack.iter().position(|f| f.0 == y).expect("pending vertex is on the stack");
                        let cycle = stack[from..].iter().map(|f| g.label(f.0)).collect();
                        return Err(FlowError::DependencyCycle { cycle });
                    }
                    Status::Fixed => merge(&mut sup, k, x, y),
                }
            } else {
                status[x] = Status::Fixed;
                stack.pop();
                if let Some(parent) = stack.last() {
                    merge(&mut sup, k, parent.0, x);
                }
            }
        }
    }
    Ok(DependencyOrder {
        labels: g.labels().to_vec(),
        chains: cover.paths(),
        num_paths: k,
        sup,
        path_of: (0..n).map(|v| cover.path_of_index(v)).collect(),
        position: (0..n).map(|v| cover.position_of_index(v)).collect(),
    })
}

fn enter(
    x: usize,
    g: &Geometry,
    cover: &PathCover,
    status: &mut [Status],
    sup: &mut [u32],
    k: usize,
    stack: &mut Vec<(usize, Vec<usize>, usize)>,
) {
    status[x] = Status::Pending;
    sup[x * k + cover.path_of_index(x)] = cover.position_of_index(x) as u32;
    let deps = dependents(g, cover.successor_of_index(x), x).collect();
    stack.push((x, deps, 0));
}

/// `sup[x][P] = min(sup[x][P], sup[y][P])` for every path, by position.
fn merge(sup: &mut [u32], k: usize, x: usize, y: usize) {
    for p in 0..k {
        let s = sup[y * k + p];
        let t = &mut sup[x * k + p];
        if s < *t {
            *t = s;
        }
    }
}
