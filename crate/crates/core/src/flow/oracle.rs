//! Brute-force references for the flow algorithms. Exponential; small
//! geometries only.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::cover::cover_from_successor;
use super::{FlowError, Geometry};

pub const ORACLE_MAX_VERTICES: usize = 8;

fn check_size(g: &Geometry) -> Result<(), FlowError> {
    if g.num_vertices() > ORACLE_MAX_VERTICES {
        return Err(FlowError::TooLarge { vertices: g.num_vertices(), limit: ORACLE_MAX_VERTICES });
    }
    Ok(())
}

/// Every injective `f: O^c -> I^c` with `x ~ f(x)`, as label maps.
pub fn successor_candidates(g: &Geometry) -> Result<Vec<BTreeMap<u32, u32>>, FlowError> {
    check_size(g)?;
    let n = g.num_vertices();
    let domain: Vec<usize> = (0..n).filter(|&v| !g.is_output(v)).collect();
    let mut out = Vec::new();
    let mut used = vec![false; n];
    let mut choice = Vec::with_capacity(domain.len());
    fn rec(
        g: &Geometry,
        domain: &[usize],
        used: &mut [bool],
        choice: &mut Vec<usize>,
        out: &mut Vec<BTreeMap<u32, u32>>,
    ) {
        let depth = choice.len();
        if depth == domain.len() {
            out.push(domain.iter().zip(choice.iter()).map(|(&x, &y)| (g.label(x), g.label(y))).collect());
            return;
        }
        for &y in g.neighbors(domain[depth]) {
            if !g.is_input(y) && !used[y] {
                used[y] = true;
                choice.push(y);
                rec(g, domain, used, choice, out);
                choice.pop();
                used[y] = false;
            }
        }
    }
    rec(g, &domain, &mut used, &mut choice, &mut out);
    Ok(out)
}

/// Direct arcs of the dependency relation for `f`: `x -> f(x)` and
/// `x -> y` for `y ~ f(x)`, `y != x`.
fn dependency_arcs(g: &Geometry, f: &BTreeMap<u32, u32>) -> Vec<Vec<usize>> {
    let mut arcs = vec![Vec::new(); g.num_vertices()];
    for (&x, &fx) in f {
        let (xi, fi) = (g.index_of(x).expect("vertex"), g.index_of(fx).expect("vertex"));
        arcs[xi].push(fi);
        arcs[xi].extend(g.neighbors(fi).iter().copied().filter(|&y| y != xi));
    }
    arcs
}

fn is_acyclic(arcs: &[Vec<usize>]) -> bool {
    let n = arcs.len();
    let mut indegree = vec![0usize; n];
    for list in arcs {
        for &y in list {
            indegree[y] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut seen = 0;
    while let Some(x) = queue.pop_front() {
        seen += 1;
        for &y in &arcs[x] {
            indegree[y] -= 1;
            if indegree[y] == 0 {
                queue.push_back(y);
            }
        }
    }
    seen == n
}

/// True iff some candidate `f` generates an acyclic relation.
pub fn oracle_has_flow(g: &Geometry) -> Result<bool, FlowError> {
    Ok(successor_candidates(g)?.iter().any(|f| is_acyclic(&dependency_arcs(g, f))))
}

/// True iff the walk graph of the cover has no vicious circuit.
///
/// States are directed edges `a -> b` of `G`; `(a -> b) => (b -> c)` when
/// `c != a` and one of the two steps is a cover arc. A vicious circuit is a
/// cycle of this digraph, so the search is exact for every walk length.
pub fn oracle_is_causal(g: &Geometry, successor: &BTreeMap<u32, u32>) -> Result<bool, FlowError> {
    check_size(g)?;
    let n = g.num_vertices();
    let is_arc = |a: usize, b: usize| successor.get(&g.label(a)) == Some(&g.label(b));
    let mut states = Vec::new();
    let mut state_id = BTreeMap::new();
    for a in 0..n {
        for &b in g.neighbors(a) {
            state_id.insert((a, b), states.len());
            states.push((a, b));
        }
    }
    let arcs: Vec<Vec<usize>> = states
        .iter()
        .map(|&(a, b)| {
            g.neighbors(b)
                .iter()
                .filter(|&&c| c != a && (is_arc(a, b) || is_arc(b, c)))
                .map(|&c| state_id[&(b, c)])
                .collect()
        })
        .collect();
    Ok(is_acyclic(&arcs))
}

/// Successor maps of every path cover of `g`.
pub fn all_path_covers(g: &Geometry) -> Result<Vec<BTreeMap<u32, u32>>, FlowError> {
    Ok(successor_candidates(g)?.into_iter().filter(|f| cover_from_successor(g, f).is_ok()).collect())
}

/// For every vertex, the vertices reachable from it under the dependency
/// relation of `f`, itself included.
pub fn dependency_closure(g: &Geometry, f: &BTreeMap<u32, u32>) -> BTreeMap<u32, BTreeSet<u32>> {
    let arcs = dependency_arcs(g, f);
    (0..g.num_vertices())
        .map(|s| {
            let mut seen = vec![false; arcs.len()];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &y in &arcs[x] {
                    if !seen[y] {
                        seen[y] = true;
                        queue.push_back(y);
                    }
                }
            }
            let reach = (0..arcs.len()).filter(|&y| seen[y]).map(|y| g.label(y)).collect();
            (g.label(s), reach)
        })
        .collect()
}

/// All maximum-size families of vertex-disjoint `I`--`O` paths. A path meets
/// `I` only at its start and `O` only at its end; an `I ∩ O` vertex is a
/// trivial path. Families list paths by ascending start vertex.
pub fn maximum_disjoint_path_families(g: &Geometry) -> Result<Vec<Vec<Vec<u32>>>, FlowError> {
    check_size(g)?;
    let n = g.num_vertices();
    let inputs: Vec<usize> = (0..n).filter(|&v| g.is_input(v)).collect();
    // simple paths from each input, as index sequences
    let paths_from: Vec<Vec<Vec<usize>>> = inputs
        .iter()
        .map(|&i| {
            let mut found = Vec::new();
            let mut path = vec![i];
            extend_paths(g, &mut path, &mut found);
            found
        })
        .collect();

    let mut best = 0;
    let mut families = Vec::new();
    let mut used = vec![false; n];
    let mut current: Vec<Vec<usize>> = Vec::new();
    choose(&paths_from, 0, &mut used, &mut current, &mut best, &mut families);
    Ok(families
        .into_iter()
        .map(|fam: Vec<Vec<usize>>| fam.iter().map(|p| p.iter().map(|&v| g.label(v)).collect()).collect())
        .collect())
}

fn extend_paths(g: &Geometry, path: &mut Vec<usize>, found: &mut Vec<Vec<usize>>) {
    let x = *path.last().expect("nonempty");
    if g.is_output(x) {
        found.push(path.clone());
        return;
    }
    for &y in g.neighbors(x) {
        if !g.is_input(y) && !path.contains(&y) {
            path.push(y);
            extend_paths(g, path, found);
            path.pop();
        }
    }
}

fn choose(
    paths_from: &[Vec<Vec<usize>>],
    k: usize,
    used: &mut [bool],
    current: &mut Vec<Vec<usize>>,
    best: &mut usize,
    families: &mut Vec<Vec<Vec<usize>>>,
) {
    if k == paths_from.len() {
        if current.len() > *best {
            *best = current.len();
            families.clear();
        }
        if current.len() == *best {
            families.push(current.clone());
        }
        return;
    }
    // skipping an input only pays off if the rest can still reach `best`
    if current.len() + (paths_from.len() - k - 1) >= *best {
        choose(paths_from, k + 1, used, current, best, families);
    }
    for p in &paths_from[k] {
        if p.iter().all(|&v| !used[v]) {
            p.iter().for_each(|&v| used[v] = true);
            current.push(p.clone());
            choose(paths_from, k + 1, used, current, best, families);
            current.pop();
            p.iter().for_each(|&v| used[v] = false);
        }
    }
}
