//! Simple-cycle enumeration for multigraphs.
//!
//! A loop is a cyclic sequence of oriented edges in which consecutive edges
//! share their connecting vertex, no vertex is visited twice and no
//! unoriented edge is used twice. Each loop is reported once up to rotation
//! and reversal, in a deterministic order (lexicographic on the sorted
//! edge-id lists). Loop count can be exponential, so enumeration takes a cap.

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, MetricGraph, VertexId};
use crate::rational::Q;
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};

/// Default bound on the number of enumerated loops.
pub const DEFAULT_LOOP_CAP: usize = 1_000_000;

/// One oriented traversal step; `forward` means tail-to-head of the stored
/// endpoint pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub edge: EdgeId,
    pub forward: bool,
}

impl Step {
    pub fn new(edge: impl Into<EdgeId>, forward: bool) -> Self {
        Step {
            edge: edge.into(),
            forward,
        }
    }

    pub fn reversed(&self) -> Step {
        Step {
            edge: self.edge.clone(),
            forward: !self.forward,
        }
    }

    pub fn tail(&self, g: &Graph) -> Result<VertexId> {
        let (u, v) = g.ends(&self.edge)?;
        Ok(if self.forward { u.clone() } else { v.clone() })
    }

    pub fn head(&self, g: &Graph) -> Result<VertexId> {
        let (u, v) = g.ends(&self.edge)?;
        Ok(if self.forward { v.clone() } else { u.clone() })
    }
}

/// A simple cycle in canonical form: rotated so the least edge id comes
/// first, direction chosen to make the step sequence lexicographically
/// least. Self-loop steps are normalized to `forward`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Loop {
    steps: Vec<Step>,
}

impl Loop {
    /// Builds a loop from a cyclic step sequence, validating simplicity.
    pub fn new(g: &Graph, steps: Vec<Step>) -> Result<Loop> {
        if steps.is_empty() {
            return Err(Error::InvalidLoop("empty".into()));
        }
        let n = steps.len();
        let mut seen_edges = BTreeSet::new();
        let mut seen_vertices = BTreeSet::new();
        for k in 0..n {
            let here = &steps[k];
            let next = &steps[(k + 1) % n];
            if here.head(g)? != next.tail(g)? {
                return Err(Error::InvalidLoop(format!(
                    "steps {k} and {} do not share a vertex",
                    (k + 1) % n
                )));
            }
            if !seen_edges.insert(here.edge.clone()) {
                return Err(Error::InvalidLoop(format!("edge {} used twice", here.edge)));
            }
            if !seen_vertices.insert(here.tail(g)?) {
                return Err(Error::InvalidLoop("vertex visited twice".into()));
            }
        }
        Ok(Loop::canonical(g, steps))
    }

    /// For cycles produced by the enumerator, which are simple by
    /// construction.
    pub(crate) fn new_unchecked(g: &Graph, steps: Vec<Step>) -> Loop {
        debug_assert!(Loop::new(g, steps.clone()).is_ok());
        Loop::canonical(g, steps)
    }

    fn canonical(g: &Graph, mut steps: Vec<Step>) -> Loop {
        for s in &mut steps {
            if g.is_self_loop(&s.edge).unwrap_or(false) {
                s.forward = true;
            }
        }
        let rotate_to_min = |steps: &[Step]| -> Vec<Step> {
            let min_pos = steps
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| a.edge.cmp(&b.edge))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let mut out = Vec::with_capacity(steps.len());
            out.extend_from_slice(&steps[min_pos..]);
            out.extend_from_slice(&steps[..min_pos]);
            out
        };
        let fwd = rotate_to_min(&steps);
        let mut rev: Vec<Step> = steps.iter().rev().map(Step::reversed).collect();
        for s in &mut rev {
            if g.is_self_loop(&s.edge).unwrap_or(false) {
                s.forward = true;
            }
        }
        let rev = rotate_to_min(&rev);
        let key = |v: &[Step]| -> Vec<(EdgeId, bool)> {
            v.iter().map(|s| (s.edge.clone(), !s.forward)).collect()
        };
        if key(&fwd) <= key(&rev) {
            Loop { steps: fwd }
        } else {
            Loop { steps: rev }
        }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = &EdgeId> {
        self.steps.iter().map(|s| &s.edge)
    }

    /// Sorted edge ids; doubles as the deterministic ordering key.
    pub fn sorted_edges(&self) -> Vec<EdgeId> {
        let mut v: Vec<EdgeId> = self.edge_ids().cloned().collect();
        v.sort();
        v
    }

    /// Vertex sequence, one entry per step (the step tails).
    pub fn vertices(&self, g: &Graph) -> Result<Vec<VertexId>> {
        self.steps.iter().map(|s| s.tail(g)).collect()
    }

    pub fn contains_vertex(&self, g: &Graph, v: &VertexId) -> Result<bool> {
        Ok(self.vertices(g)?.contains(v))
    }
}

/// Sum of the lengths of the (distinct) unoriented edges traversed.
pub fn loop_length(c: &Loop, m: &MetricGraph) -> Result<Q> {
    let mut total = Q::zero();
    for e in c.edge_ids() {
        total += m.length(e)?;
    }
    Ok(total)
}

/// All simple cycles of `g`, canonical and sorted. Errors out when more
/// than `cap` loops exist.
pub fn enumerate_loops(g: &Graph, cap: usize) -> Result<Vec<Loop>> {
    // adjacency: vertex -> (edge, other endpoint, traversing from tail)
    let mut adj: BTreeMap<VertexId, Vec<(EdgeId, VertexId, bool)>> = BTreeMap::new();
    for v in g.vertices() {
        adj.insert(v.clone(), Vec::new());
    }
    for (id, (u, v)) in g.edges() {
        adj.get_mut(u).unwrap().push((id.clone(), v.clone(), true));
        if u != v {
            adj.get_mut(v).unwrap().push((id.clone(), u.clone(), false));
        }
    }

    let mut out: Vec<Loop> = Vec::new();
    let anchors: Vec<EdgeId> = g.edge_ids().cloned().collect();
    for anchor in &anchors {
        let (a, b) = g.ends(anchor)?.clone();
        if a == b {
            out.push(Loop::new_unchecked(g, vec![Step::new(anchor.clone(), true)]));
            if out.len() > cap {
                return Err(Error::LoopCapExceeded(cap));
            }
            continue;
        }
        // paths b -> a through edges with id strictly above the anchor
        let mut path: Vec<Step> = Vec::new();
        let mut visited: BTreeSet<VertexId> = BTreeSet::new();
        visited.insert(b.clone());
        // stack of (vertex, next branch index to try)
        let mut stack: Vec<(VertexId, usize)> = vec![(b.clone(), 0)];
        while let Some((v, idx)) = stack.last().cloned() {
            let branches = &adj[&v];
            if idx >= branches.len() {
                stack.pop();
                if let Some(s) = path.pop() {
                    visited.remove(&s.head(g)?);
                }
                continue;
            }
            stack.last_mut().unwrap().1 += 1;
            let (e, other, from_tail) = &branches[idx];
            if e <= anchor {
                continue;
            }
            if other == &a {
                let mut steps = vec![Step::new(anchor.clone(), true)];
                steps.extend(path.iter().cloned());
                steps.push(Step::new(e.clone(), *from_tail));
                out.push(Loop::new_unchecked(g, steps));
                if out.len() > cap {
                    return Err(Error::LoopCapExceeded(cap));
                }
                continue;
            }
            if other == &v || visited.contains(other) {
                continue;
            }
            visited.insert(other.clone());
            path.push(Step::new(e.clone(), *from_tail));
            stack.push((other.clone(), 0));
        }
    }
    out.sort_by(|x, y| x.sorted_edges().cmp(&y.sorted_edges()));
    debug_assert!(
        out.windows(2).all(|w| w[0].sorted_edges() != w[1].sorted_edges()),
        "duplicate loops after canonicalization"
    );
    Ok(out)
}

#[cfg(test)]
pub(crate) mod brute {
    //! Independent oracle: a simple cycle is exactly a connected 2-regular
    //! edge subset, so enumerate all subsets.

    use super::*;

    pub fn simple_cycle_edge_sets(g: &Graph) -> Vec<Vec<EdgeId>> {
        let edges: Vec<EdgeId> = g.edge_ids().cloned().collect();
        let n = edges.len();
        assert!(n <= 20, "oracle is exponential");
        let mut out = Vec::new();
        for mask in 1u32..(1 << n) {
            let subset: Vec<EdgeId> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| edges[i].clone())
                .collect();
            if is_single_cycle(g, &subset) {
                let mut key = subset.clone();
                key.sort();
                out.push(key);
            }
        }
        out.sort();
        out
    }

    fn is_single_cycle(g: &Graph, subset: &[EdgeId]) -> bool {
        let mut degree: BTreeMap<VertexId, usize> = BTreeMap::new();
        for e in subset {
            let (u, v) = g.ends(e).unwrap();
            *degree.entry(u.clone()).or_insert(0) += 1;
            *degree.entry(v.clone()).or_insert(0) += 1;
        }
        if degree.values().any(|&d| d != 2) {
            return false;
        }
        // connectivity over the subset
        let verts: Vec<VertexId> = degree.keys().cloned().collect();
        let mut reach = BTreeSet::new();
        let mut stack = vec![verts[0].clone()];
        while let Some(v) = stack.pop() {
            if !reach.insert(v.clone()) {
                continue;
            }
            for e in subset {
                let (a, b) = g.ends(e).unwrap();
                if a == &v && !reach.contains(b) {
                    stack.push(b.clone());
                }
                if b == &v && !reach.contains(a) {
                    stack.push(a.clone());
                }
            }
        }
        reach.len() == verts.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{dumbbell_graph, k4_graph, theta_graph};
    use crate::rational::{q, q_int};

    fn loops_of(g: &Graph) -> Vec<Loop> {
        enumerate_loops(g, DEFAULT_LOOP_CAP).unwrap()
    }

    #[test]
    fn theta_has_three_loops() {
        assert_eq!(loops_of(&theta_graph()).len(), 3);
    }

    #[test]
    fn k4_has_seven_loops() {
        let loops = loops_of(&k4_graph());
        assert_eq!(loops.len(), 7);
        let triangles = loops.iter().filter(|c| c.len() == 3).count();
        let quads = loops.iter().filter(|c| c.len() == 4).count();
        assert_eq!((triangles, quads), (4, 3));
    }

    #[test]
    fn trees_have_no_loops() {
        let mut g = Graph::new();
        for v in ["a", "b", "c", "d"] {
            g.add_vertex(v);
        }
        g.add_edge("e1", "a", "b").unwrap();
        g.add_edge("e2", "b", "c").unwrap();
        g.add_edge("e3", "b", "d").unwrap();
        assert!(loops_of(&g).is_empty());
    }

    #[test]
    fn dumbbell_loops() {
        let loops = loops_of(&dumbbell_graph());
        // the two self-loops; the bridge is in no cycle
        assert_eq!(loops.len(), 2);
        assert!(loops.iter().all(|c| c.len() == 1));
    }

    #[test]
    fn matches_brute_force_on_named_graphs() {
        for g in [theta_graph(), dumbbell_graph(), k4_graph()] {
            let fast: Vec<Vec<EdgeId>> =
                loops_of(&g).iter().map(|c| c.sorted_edges()).collect();
            assert_eq!(fast, brute::simple_cycle_edge_sets(&g));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let g = k4_graph();
        assert!(matches!(
            enumerate_loops(&g, 3),
            Err(Error::LoopCapExceeded(3))
        ));
    }

    #[test]
    fn canonical_form_is_rotation_and_reversal_invariant() {
        let g = theta_graph();
        // a forward, b backward, as a cycle u -a-> v -b-> u
        let l1 = Loop::new(&g, vec![Step::new("a", true), Step::new("b", false)]).unwrap();
        let l2 = Loop::new(&g, vec![Step::new("b", false), Step::new("a", true)]).unwrap();
        let l3 = Loop::new(&g, vec![Step::new("b", true), Step::new("a", false)]).unwrap();
        assert_eq!(l1, l2);
        assert_eq!(l1, l3);
    }

    #[test]
    fn rejects_non_simple_input() {
        let g = theta_graph();
        let err = Loop::new(
            &g,
            vec![
                Step::new("a", true),
                Step::new("b", false),
                Step::new("c", true),
                Step::new("b", false),
            ],
        );
        assert!(err.is_err());
    }

    #[test]
    fn loop_lengths() {
        let g = theta_graph();
        let mut lengths = BTreeMap::new();
        lengths.insert(EdgeId::new("a"), q_int(1));
        lengths.insert(EdgeId::new("b"), q_int(2));
        lengths.insert(EdgeId::new("c"), q_int(3));
        let m = MetricGraph::new(g.clone(), lengths).unwrap();
        let ab = Loop::new(&g, vec![Step::new("a", true), Step::new("b", false)]).unwrap();
        assert_eq!(loop_length(&ab, &m).unwrap(), q_int(3));

        // triangle with lengths 1/2, 1/3, 1/6 sums to 1
        let mut t = Graph::new();
        for v in ["x", "y", "z"] {
            t.add_vertex(v);
        }
        t.add_edge("p", "x", "y").unwrap();
        t.add_edge("r", "y", "z").unwrap();
        t.add_edge("s", "z", "x").unwrap();
        let mut lens = BTreeMap::new();
        lens.insert(EdgeId::new("p"), q(1, 2));
        lens.insert(EdgeId::new("r"), q(1, 3));
        lens.insert(EdgeId::new("s"), q(1, 6));
        let tm = MetricGraph::new(t.clone(), lens).unwrap();
        let tri = enumerate_loops(&t, 10).unwrap().pop().unwrap();
        assert_eq!(loop_length(&tri, &tm).unwrap(), q_int(1));

        // self-loop of length 5
        let d = dumbbell_graph();
        let mut lens = BTreeMap::new();
        lens.insert(EdgeId::new("a"), q_int(5));
        lens.insert(EdgeId::new("b"), q_int(1));
        lens.insert(EdgeId::new("c"), q_int(1));
        let dm = MetricGraph::new(d.clone(), lens).unwrap();
        let self_loop = Loop::new(&d, vec![Step::new("a", true)]).unwrap();
        assert_eq!(loop_length(&self_loop, &dm).unwrap(), q_int(5));
    }

    #[test]
    fn missing_length_is_reported() {
        let g = theta_graph();
        let mut lengths = BTreeMap::new();
        lengths.insert(EdgeId::new("a"), q_int(1));
        lengths.insert(EdgeId::new("b"), q_int(2));
        lengths.insert(EdgeId::new("c"), q_int(3));
        let m = MetricGraph::new(g.clone(), lengths).unwrap();
        let g2 = {
            let mut g2 = g.clone();
            g2.add_vertex("w");
            g2.add_edge("zz", "u", "w").unwrap();
            g2.add_edge("zz2", "w", "v").unwrap();
            g2
        };
        let c = Loop::new(
            &g2,
            vec![Step::new("zz", true), Step::new("zz2", true), Step::new("a", false)],
        )
        .unwrap();
        assert!(matches!(loop_length(&c, &m), Err(Error::MissingLength(_))));
    }
}
