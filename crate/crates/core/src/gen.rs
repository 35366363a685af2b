//! Seeded random instances for property suites and benchmarks: connected
//! multigraphs of minimal valency 3 (configuration model), rational length
//! assignments, and truncated tree windows.

use crate::graph::{EdgeId, Graph, MetricGraph, VertexId};
use crate::loops::Step;
use crate::rational::{q, Q};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Connected multigraph with `v_count` vertices, `e_count` edges and every
/// valency at least 3. Requires `2 * e_count >= 3 * v_count`. Self-loops
/// and parallel edges arise naturally from the stub pairing.
pub fn random_min3_multigraph(rng: &mut impl Rng, v_count: usize, e_count: usize) -> Graph {
    assert!(v_count >= 1 && 2 * e_count >= 3 * v_count);
    for _attempt in 0..10_000 {
        // degree sequence: start at 3 everywhere, sprinkle the excess
        let mut degrees = vec![3usize; v_count];
        for _ in 0..(2 * e_count - 3 * v_count) {
            degrees[rng.gen_range(0..v_count)] += 1;
        }
        let mut stubs: Vec<usize> = Vec::with_capacity(2 * e_count);
        for (i, d) in degrees.iter().enumerate() {
            stubs.extend(std::iter::repeat(i).take(*d));
        }
        stubs.shuffle(rng);
        let mut g = Graph::new();
        for i in 0..v_count {
            g.add_vertex(format!("v{i}"));
        }
        for (k, pair) in stubs.chunks(2).enumerate() {
            g.add_edge(format!("e{k}"), format!("v{}", pair[0]), format!("v{}", pair[1]))
                .expect("fresh ids");
        }
        if g.is_connected() {
            debug_assert!(g.min_valency() >= 3);
            return g;
        }
    }
    panic!("failed to sample a connected graph for v={v_count} e={e_count}");
}

/// Assigns every edge a length drawn uniformly from `choices`.
pub fn random_lengths(rng: &mut impl Rng, g: &Graph, choices: &[Q]) -> MetricGraph {
    assert!(!choices.is_empty());
    let lengths: BTreeMap<EdgeId, Q> = g
        .edge_ids()
        .map(|e| (e.clone(), choices[rng.gen_range(0..choices.len())].clone()))
        .collect();
    MetricGraph::new(g.clone(), lengths).expect("positive lengths")
}

/// The usual grid of length choices with denominators from `denoms` and
/// numerators `1..=max_numerator`.
pub fn length_choices(denoms: &[i64], max_numerator: i64) -> Vec<Q> {
    let mut out = Vec::new();
    for &d in denoms {
        for n in 1..=max_numerator {
            out.push(q(n, d));
        }
    }
    out.sort();
    out.dedup();
    out
}

/// A random metric tree of `size` vertices grown by uniform attachment,
/// returned with its leaf set. Edge lengths come from `choices`.
pub fn random_tree(
    rng: &mut impl Rng,
    size: usize,
    choices: &[Q],
) -> (MetricGraph, BTreeSet<VertexId>) {
    assert!(size >= 2);
    let mut g = Graph::new();
    g.add_vertex("t0");
    let mut lengths = BTreeMap::new();
    for i in 1..size {
        let parent = rng.gen_range(0..i);
        g.add_vertex(format!("t{i}"));
        let e = g
            .add_edge(format!("te{i}"), format!("t{parent}"), format!("t{i}"))
            .expect("fresh ids");
        lengths.insert(e, choices[rng.gen_range(0..choices.len())].clone());
    }
    let leaves: BTreeSet<VertexId> = g
        .vertices()
        .filter(|v| g.valency(v).unwrap() == 1)
        .cloned()
        .collect();
    let m = MetricGraph::new(g, lengths).expect("positive lengths");
    (m, leaves)
}

/// A random metric tree padded with whiskers: every leaf of the core tree
/// is extended by a path of `pad_edges` unit-length edges, so each core
/// vertex keeps clearance `pad_edges` from the truncation boundary.
/// Returns the tree, its leaf set (the whisker tips) and the core
/// vertices.
pub fn random_padded_tree(
    rng: &mut impl Rng,
    core_size: usize,
    choices: &[Q],
    pad_edges: usize,
) -> (MetricGraph, BTreeSet<VertexId>, Vec<VertexId>) {
    assert!(core_size >= 2 && pad_edges >= 1);
    let mut g = Graph::new();
    g.add_vertex("t0");
    let mut lengths = BTreeMap::new();
    for i in 1..core_size {
        let parent = rng.gen_range(0..i);
        g.add_vertex(format!("t{i}"));
        let e = g
            .add_edge(format!("te{i}"), format!("t{parent}"), format!("t{i}"))
            .expect("fresh ids");
        lengths.insert(e, choices[rng.gen_range(0..choices.len())].clone());
    }
    let core: Vec<VertexId> = g.vertices().cloned().collect();
    let leaves: Vec<VertexId> = g
        .vertices()
        .filter(|v| g.valency(v).unwrap() <= 1)
        .cloned()
        .collect();
    for (li, leaf) in leaves.iter().enumerate() {
        let mut prev = leaf.clone();
        for k in 0..pad_edges {
            let v = g.add_vertex(format!("p{li}.{k}"));
            let e = g
                .add_edge(format!("pe{li}.{k}"), prev, v.clone())
                .expect("fresh ids");
            lengths.insert(e, q(1, 1));
            prev = v;
        }
    }
    let boundary: BTreeSet<VertexId> = g
        .vertices()
        .filter(|v| g.valency(v).unwrap() == 1)
        .cloned()
        .collect();
    let m = MetricGraph::new(g, lengths).expect("positive lengths");
    (m, boundary, core)
}

/// A simple path between two distinct leaves, as oriented steps.
pub fn leaf_to_leaf_path(m: &MetricGraph, from: &VertexId, to: &VertexId) -> Vec<Step> {
    let g = m.graph();
    // DFS for the unique tree path
    let mut stack = vec![(from.clone(), Vec::<Step>::new())];
    let mut seen = BTreeSet::new();
    seen.insert(from.clone());
    while let Some((v, path)) = stack.pop() {
        if &v == to {
            return path;
        }
        for b in g.star(&v).unwrap() {
            if let Some(other) = &b.other {
                if seen.insert(other.clone()) {
                    let mut next = path.clone();
                    next.push(Step::new(b.edge.clone(), b.from_tail));
                    stack.push((other.clone(), next));
                }
            }
        }
    }
    panic!("tree is connected, path must exist");
}
