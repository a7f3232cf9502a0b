#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use oneway_core::flow::oracle::dependency_closure;
use oneway_core::flow::{Flow, Geometry};
use oneway_core::linalg::cis;
use rand::seq::SliceRandom;
use rand::Rng;

/// Connected graphs on `1..=n`, one per isomorphism class.
pub fn connected_graphs(n: usize) -> Vec<Vec<(u32, u32)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let pair_index = |a: usize, b: usize| pairs.iter().position(|&p| p == (a.min(b), a.max(b))).unwrap();
    let mut perms = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    permutations(&mut p, 0, &mut perms);
    // bit i of a mask is pair i; each permutation maps bits to bits
    let maps: Vec<Vec<usize>> = perms.iter().map(|p| pairs.iter().map(|&(a, b)| pair_index(p[a], p[b])).collect()).collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u32..1 << pairs.len() {
        let edges: Vec<(usize, usize)> = (0..pairs.len()).filter(|i| mask >> i & 1 == 1).map(|i| pairs[i]).collect();
        if !is_connected(n, &edges) {
            continue;
        }
        let canon = maps
            .iter()
            .map(|m| (0..pairs.len()).filter(|i| mask >> i & 1 == 1).fold(0u32, |acc, i| acc | 1 << m[i]))
            .min()
            .unwrap();
        if seen.insert(canon) {
            out.push(edges.iter().map(|&(a, b)| (a as u32 + 1, b as u32 + 1)).collect());
        }
    }
    out
}

fn permutations(p: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == p.len() {
        out.push(p.clone());
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, out);
        p.swap(k, i);
    }
}

fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(x) = stack.pop() {
        for &(a, b) in edges {
            for (u, v) in [(a, b), (b, a)] {
                if u == x && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    seen.iter().all(|&s| s)
}

pub fn subsets(items: &[u32], k: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut out: Vec<Vec<u32>> = subsets(&items[1..], k - 1)
        .into_iter()
        .map(|mut s| {
            s.insert(0, items[0]);
            s
        })
        .collect();
    out.extend(subsets(&items[1..], k));
    out
}

/// Every `(I, O)` with `|I| = |O| = k <= kmax`.
pub fn io_choices(n: usize, kmax: usize) -> Vec<(Vec<u32>, Vec<u32>)> {
    let labels: Vec<u32> = (1..=n as u32).collect();
    let mut out = Vec::new();
    for k in 0..=kmax.min(n) {
        for i in subsets(&labels, k) {
            for o in subsets(&labels, k) {
                out.push((i.clone(), o));
            }
        }
    }
    out
}

fn random_labels<R: Rng>(rng: &mut R, n: usize) -> Vec<u32> {
    let mut pool: Vec<u32> = (1..3 * n as u32 + 3).collect();
    pool.shuffle(rng);
    pool.truncate(n);
    pool
}

/// Arbitrary graph and equal-size `I`, `O` on at most `max_v` vertices.
pub fn random_geometry<R: Rng>(rng: &mut R, max_v: usize) -> Geometry {
    let n = rng.gen_range(1..=max_v);
    let labels = random_labels(rng, n);
    let p = rng.gen_range(0.15..0.7);
    let edges: Vec<(u32, u32)> =
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|_| rng.gen_bool(p)).map(|(a, b)| (labels[a], labels[b])).collect();
    let k = rng.gen_range(0..=n.min(3));
    let inputs: Vec<u32> = labels.choose_multiple(rng, k).copied().collect();
    let outputs: Vec<u32> = labels.choose_multiple(rng, k).copied().collect();
    Geometry::new(&labels, edges, inputs, outputs).unwrap()
}

/// Vertex-disjoint paths covering `V` plus a few chords; inputs are the path
/// starts and outputs the path ends. Often, not always, has a flow.
pub fn random_path_geometry<R: Rng>(rng: &mut R, max_v: usize, disjoint_io: bool) -> Geometry {
    let n = rng.gen_range(if disjoint_io { 2 } else { 1 }..=max_v);
    let labels = random_labels(rng, n);
    let k = rng.gen_range(1..=(if disjoint_io { n / 2 } else { n }).clamp(1, 3));
    // cut the shuffled labels into k nonempty paths
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(k - 1).collect();
    if disjoint_io {
        // every path needs two vertices
        let mut sizes;
        loop {
            cuts.sort_unstable();
            let mut bounds = vec![0];
            bounds.extend(&cuts);
            bounds.push(n);
            sizes = bounds.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>();
            if sizes.iter().all(|&s| s >= 2) {
                break;
            }
            let mut c: Vec<usize> = (1..n).collect();
            c.shuffle(rng);
            cuts = c.into_iter().take(k - 1).collect();
        }
    }
    cuts.sort_unstable();
    let mut bounds = vec![0];
    bounds.extend(&cuts);
    bounds.push(n);
    let mut edges = Vec::new();
    let (mut inputs, mut outputs) = (Vec::new(), Vec::new());
    for w in bounds.windows(2) {
        let path = &labels[w[0]..w[1]];
        inputs.push(path[0]);
        outputs.push(*path.last().unwrap());
        edges.extend(path.windows(2).map(|e| (e[0], e[1])));
    }
    let chords = rng.gen_range(0..=n);
    for _ in 0..chords {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            edges.push((labels[a], labels[b]));
        }
    }
    Geometry::new(&labels, edges, inputs, outputs).unwrap()
}

pub fn random_angles<R: Rng>(rng: &mut R, g: &Geometry) -> BTreeMap<u32, f64> {
    g.labels()
        .iter()
        .filter(|&&v| !g.outputs().contains(&v))
        .map(|&v| (v, rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect()
}

pub fn same_angle(a: f64, b: f64, tol: f64) -> bool {
    (cis(a) - cis(b)).norm() < tol
}

/// (F1)-(F3), partial-order laws, and equality with the brute-force closure.
pub fn check_flow(g: &Geometry, flow: &Flow) -> Result<(), String> {
    let f = flow.successor_map();
    let labels = g.labels();
    let non_outputs: BTreeSet<u32> = labels.iter().copied().filter(|v| !g.outputs().contains(v)).collect();
    if f.keys().copied().collect::<BTreeSet<_>>() != non_outputs {
        return Err(format!("domain of f is {:?}, not O^c", f.keys().collect::<Vec<_>>()));
    }
    let image: BTreeSet<u32> = f.values().copied().collect();
    if image.len() != f.len() || image.iter().any(|v| g.inputs().contains(v)) {
        return Err("f is not injective into I^c".into());
    }
    for (&x, &fx) in &f {
        if !g.has_edge(x, fx) {
            return Err(format!("F1: {x} !~ f({x}) = {fx}"));
        }
        if !flow.precedes(x, fx) {
            return Err(format!("F2: {x} not before f({x}) = {fx}"));
        }
        let fi = g.index_of(fx).unwrap();
        for &yi in g.neighbors(fi) {
            let y = g.label(yi);
            if y != x && !flow.precedes(x, y) {
                return Err(format!("F3: {x} not before {y} ~ f({x})"));
            }
        }
    }
    let closure = dependency_closure(g, &f);
    for &x in labels {
        for &y in labels {
            let p = flow.precedes(x, y);
            if p != closure[&x].contains(&y) {
                return Err(format!("order differs from closure at ({x}, {y})"));
            }
            if x == y && !p {
                return Err(format!("not reflexive at {x}"));
            }
            if x != y && p && flow.precedes(y, x) {
                return Err(format!("not antisymmetric at ({x}, {y})"));
            }
            if p {
                for &z in labels {
                    if flow.precedes(y, z) && !flow.precedes(x, z) {
                        return Err(format!("not transitive at ({x}, {y}, {z})"));
                    }
                }
            }
        }
    }
    Ok(())
}
