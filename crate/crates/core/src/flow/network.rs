//! The unit-capacity max-flow digraph of a geometry and a Ford-Fulkerson
//! solver for it.
//!
//! Every vertex `v` is split into an in-flow node `B_v` (for `v` in `O` or
//! `I^c`) and an out-flow node `A_v` (for `v` in `I` or `O^c`), merged when
//! `v` is both an input and an output. Arcs:
//!
//! * `r -> A_i` for inputs, `B_o -> s` for outputs;
//! * `B_v -> A_v` for `v` in neither `I` nor `O`;
//! * `A_v -> B_w` for every edge `vw` with `v` in `O^c` and `w` in `I^c`.
//!
//! Splitting caps the flow through each vertex at one unit, so an integral
//! flow is a family of vertex-disjoint `I`--`O` paths.

use std::collections::VecDeque;

use super::Geometry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NetNode {
    Source,
    /// `A_v`
    Out(u32),
    /// `B_v`
    In(u32),
    /// `A_v = B_v` for `v` in `I` and `O`
    Merged(u32),
    Sink,
}

#[derive(Clone, Debug)]
pub struct MaxFlowDigraph {
    nodes: Vec<NetNode>,
    /// unit-capacity arcs `(from, to)` as node indices
    arcs: Vec<(usize, usize)>,
    /// per vertex rank: node index of `A_v` / `B_v`
    out_node: Vec<Option<usize>>,
    in_node: Vec<Option<usize>>,
}

impl MaxFlowDigraph {
    pub const SOURCE: usize = 0;

    pub fn nodes(&self) -> &[NetNode] {
        &self.nodes
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn sink(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Arcs with their endpoint labels, in construction order.
    pub fn arcs(&self) -> impl Iterator<Item = (NetNode, NetNode)> + '_ {
        self.arcs.iter().map(|&(a, b)| (self.nodes[a], self.nodes[b]))
    }

    pub fn has_arc(&self, from: NetNode, to: NetNode) -> bool {
        self.arcs().any(|a| a == (from, to))
    }

    pub(crate) fn out_node(&self, v: usize) -> Option<usize> {
        self.out_node[v]
    }

    pub(crate) fn in_node(&self, v: usize) -> Option<usize> {
        self.in_node[v]
    }

    pub(crate) fn arc_endpoints(&self, arc: usize) -> (usize, usize) {
        self.arcs[arc]
    }
}

/// Builds the digraph in `O(|V| + |E|)`. Nodes are numbered source first,
/// then per vertex in ascending label order (`B_v` before `A_v`), sink last.
pub fn build_max_flow_digraph(g: &Geometry) -> MaxFlowDigraph {
    let n = g.num_vertices();
    let mut nodes = vec![NetNode::Source];
    let mut out_node = vec![None; n];
    let mut in_node = vec![None; n];
    for v in 0..n {
        let label = g.label(v);
        let (inp, outp) = (g.is_input(v), g.is_output(v));
        if inp && outp {
            nodes.push(NetNode::Merged(label));
            out_node[v] = Some(nodes.len() - 1);
            in_node[v] = Some(nodes.len() - 1);
            continue;
        }
        // B_v exists for v in O or I^c; A_v for v in I or O^c
        if outp || !inp {
            nodes.push(NetNode::In(label));
            in_node[v] = Some(nodes.len() - 1);
        }
        if inp || !outp {
            nodes.push(NetNode::Out(label));
            out_node[v] = Some(nodes.len() - 1);
        }
    }
    nodes.push(NetNode::Sink);
    let sink = nodes.len() - 1;

    let mut arcs = Vec::with_capacity(2 * n + g.num_edges() * 2);
    for v in 0..n {
        if g.is_input(v) {
            arcs.push((MaxFlowDigraph::SOURCE, out_node[v].expect("input has A_v")));
        }
    }
    for v in 0..n {
        let (inp, outp) = (g.is_input(v), g.is_output(v));
        if !inp && !outp {
            arcs.push((in_node[v].expect("B_v"), out_node[v].expect("A_v")));
        }
        if !outp {
            let a = out_node[v].expect("A_v");
            for &w in g.neighbors(v) {
                if !g.is_input(w) {
                    arcs.push((a, in_node[w].expect("B_w")));
                }
            }
        }
        if outp {
            arcs.push((in_node[v].expect("output has B_v"), sink));
        }
    }
    MaxFlowDigraph { nodes, arcs, out_node, in_node }
}

/// Integral flow on a unit-capacity digraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkFlow {
    pub value: usize,
    /// one flag per arc of the digraph, in construction order
    pub saturated: Vec<bool>,
}

impl NetworkFlow {
    /// `F_u(x)`: inflow minus outflow at node `x`.
    pub fn net_inflow(&self, net: &MaxFlowDigraph, x: usize) -> i64 {
        net.arcs
            .iter()
            .zip(&self.saturated)
            .filter(|(_, &s)| s)
            .map(|(&(a, b), _)| (b == x) as i64 - (a == x) as i64)
            .sum()
    }
}

/// Ford-Fulkerson with breadth-first augmenting paths; residual neighbours are
/// scanned in ascending node order. Each augmentation costs `O(|arcs|)` and
/// there are at most `|I|` of them.
pub fn max_integral_flow(net: &MaxFlowDigraph) -> NetworkFlow {
    let n = net.nodes.len();
    let sink = net.sink();
    // residual adjacency: (arc, forward)
    let mut adj: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n];
    for (i, &(a, b)) in net.arcs.iter().enumerate() {
        adj[a].push((i, true));
        adj[b].push((i, false));
    }
    for list in &mut adj {
        list.sort_by_key(|&(i, fwd)| {
            let (a, b) = net.arcs[i];
            if fwd {
                b
            } else {
                a
            }
        });
    }
    let mut saturated = vec![false; net.arcs.len()];
    let mut parent: Vec<Option<(usize, bool)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    let mut value = 0;
    loop {
        seen.iter_mut().for_each(|s| *s = false);
        queue.clear();
        seen[MaxFlowDigraph::SOURCE] = true;
        queue.push_back(MaxFlowDigraph::SOURCE);
        'bfs: while let Some(x) = queue.pop_front() {
            for &(arc, fwd) in &adj[x] {
                let (a, b) = net.arcs[arc];
                let (next, open) = if fwd { (b, !saturated[arc]) } else { (a, saturated[arc]) };
                if open && !seen[next] {
                    seen[next] = true;
                    parent[next] = Some((arc, fwd));
                    if next == sink {
                        break 'bfs;
                    }
                    queue.push_back(next);
                }
            }
        }
        if !seen[sink] {
            break;
        }
        let mut x = sink;
        while x != MaxFlowDigraph::SOURCE {
            let (arc, fwd) = parent[x].expect("augmenting path");
            saturated[arc] = fwd;
            let (a, b) = net.arcs[arc];
            x = if fwd { a } else { b };
        }
        value += 1;
    }
    NetworkFlow { value, saturated }
}

#[cfg(test)]
mod tests {
    use super::*;
    use NetNode::*;

    #[test]
    fn single_edge_digraph() {
        let g = Geometry::new(&[1, 2], [(1, 2)], [1], [2]).unwrap();
        let net = build_max_flow_digraph(&g);
        assert_eq!(net.nodes(), &[Source, Out(1), In(2), Sink]);
        let arcs: Vec<_> = net.arcs().collect();
        assert_eq!(arcs, vec![(Source, Out(1)), (Out(1), In(2)), (In(2), Sink)]);
        assert_eq!(max_integral_flow(&net).value, 1);
    }

    #[test]
    fn merged_vertex() {
        let g = Geometry::new(&[7], [], [7], [7]).unwrap();
        let net = build_max_flow_digraph(&g);
        assert_eq!(net.nodes(), &[Source, Merged(7), Sink]);
        assert!(net.has_arc(Source, Merged(7)) && net.has_arc(Merged(7), Sink));
        assert_eq!(net.num_arcs(), 2);
        assert_eq!(max_integral_flow(&net).value, 1);
    }

    #[test]
    fn six_cycle_arc_census() {
        let g = Geometry::new(&[0, 1, 2, 3, 4, 5], (0..6).map(|i| (i, (i + 1) % 6)), [0, 2, 4], [1, 3, 5]).unwrap();
        let net = build_max_flow_digraph(&g);
        let arcs: Vec<_> = net.arcs().collect();
        assert_eq!(arcs.iter().filter(|(a, _)| *a == Source).count(), 3);
        assert_eq!(arcs.iter().filter(|(_, b)| *b == Sink).count(), 3);
        assert_eq!(arcs.iter().filter(|(a, b)| matches!((a, b), (Out(_), In(_)))).count(), 6);
        assert_eq!(arcs.iter().filter(|(a, b)| matches!((a, b), (In(_), Out(_)))).count(), 0);
        let flow = max_integral_flow(&net);
        assert_eq!(flow.value, 3);
        for x in 1..net.sink() {
            assert_eq!(flow.net_inflow(&net, x), 0);
        }
        assert_eq!(flow.net_inflow(&net, net.sink()), 3);
    }

    #[test]
    fn isolated_input_limits_flow() {
        let g = Geometry::new(&[1, 2, 3, 4], [(1, 2)], [1, 3], [2, 4]).unwrap();
        assert_eq!(max_integral_flow(&build_max_flow_digraph(&g)).value, 1);
    }

    #[test]
    fn internal_vertices_split() {
        let g = Geometry::new(&[1, 2, 3], [(1, 2), (2, 3)], [1], [3]).unwrap();
        let net = build_max_flow_digraph(&g);
        assert!(net.has_arc(In(2), Out(2)));
        assert!(net.has_arc(Out(2), In(3)));
        // no arcs into an input or out of an output
        assert!(!net.has_arc(Out(2), In(1)));
        assert!(!net.nodes().contains(&Out(3)) && !net.nodes().contains(&In(1)));
    }
}
