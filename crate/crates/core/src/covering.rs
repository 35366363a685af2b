//! Finite topological coverings of graphs built from voltage assignments.
//!
//! A degree-2 cover is encoded by a label in the two-element group on each
//! base edge: voltage 0 lifts an edge to two sheet-preserving copies,
//! voltage 1 to two sheet-swapping copies. The total graph is connected
//! exactly when the voltage class is nonzero after spanning-tree gauge
//! fixing, so connected covers are enumerated one per nonzero class over
//! the non-tree edges (tree edges forced to 0). Degree-3 covers use
//! permutation voltages in S3 and exist as an escalation path for the
//! reconstruction rank check.

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, MetricGraph, VertexId};
use crate::loops::Loop;
use crate::rational::Q;
use std::collections::BTreeMap;

/// A loop-length constraint on the base edges: `sum coeffs(e) * f(e) = rhs`.
/// Rows produced by a double-cover loop have coefficients in {0, 1, 2}.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintRow {
    pub coeffs: BTreeMap<EdgeId, u32>,
    pub rhs: Option<Q>,
}

impl ConstraintRow {
    pub fn coeff(&self, e: &EdgeId) -> u32 {
        self.coeffs.get(e).copied().unwrap_or(0)
    }
}

fn lift_vertex(v: &VertexId, sheet: usize) -> VertexId {
    VertexId::new(format!("{}~{}", v, sheet))
}

fn lift_edge(e: &EdgeId, sheet: usize) -> EdgeId {
    EdgeId::new(format!("{}~{}", e, sheet))
}

/// Degree-2 topological covering of a graph, encoded by an edge voltage
/// over Z/2.
#[derive(Debug, Clone)]
pub struct DoubleCover {
    base: Graph,
    voltage: BTreeMap<EdgeId, bool>,
    total: Graph,
    vertex_proj: BTreeMap<VertexId, VertexId>,
    edge_proj: BTreeMap<EdgeId, EdgeId>,
    label: String,
}

impl DoubleCover {
    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn total(&self) -> &Graph {
        &self.total
    }

    pub fn voltage(&self) -> &BTreeMap<EdgeId, bool> {
        &self.voltage
    }

    /// Voltage bitstring over the non-tree edges in canonical order; empty
    /// for covers built from an explicit voltage map.
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn project_vertex(&self, v: &VertexId) -> Result<&VertexId> {
        self.vertex_proj.get(v).ok_or_else(|| Error::UnknownVertex(v.clone()))
    }

    pub fn project_edge(&self, e: &EdgeId) -> Result<&EdgeId> {
        self.edge_proj.get(e).ok_or_else(|| Error::UnknownEdge(e.clone()))
    }

    pub fn edge_projection(&self) -> &BTreeMap<EdgeId, EdgeId> {
        &self.edge_proj
    }

    /// Counts, per base edge, how many of its lifts the loop traverses.
    pub fn push_loop(&self, c: &Loop) -> Result<ConstraintRow> {
        let row = pushforward(&self.edge_proj, c)?;
        debug_assert!(row.coeffs.values().all(|&k| k <= 2));
        Ok(row)
    }

    /// Lifts a metric on the base to the total graph: both lifts of an
    /// edge keep its length.
    pub fn lift_metric(&self, m: &MetricGraph) -> Result<MetricGraph> {
        let mut lengths = BTreeMap::new();
        for (e, base_e) in &self.edge_proj {
            lengths.insert(e.clone(), m.length(base_e)?.clone());
        }
        MetricGraph::new(self.total.clone(), lengths)
    }
}

fn pushforward(edge_proj: &BTreeMap<EdgeId, EdgeId>, c: &Loop) -> Result<ConstraintRow> {
    let mut coeffs: BTreeMap<EdgeId, u32> = BTreeMap::new();
    for e in c.edge_ids() {
        let base = edge_proj.get(e).ok_or_else(|| Error::UnknownEdge(e.clone()))?;
        *coeffs.entry(base.clone()).or_insert(0) += 1;
    }
    Ok(ConstraintRow { coeffs, rhs: None })
}

/// Builds the degree-2 cover of `g` determined by `voltage`; the voltage
/// must be defined on every edge and `g` must have no cusps.
pub fn build_double_cover(g: &Graph, voltage: &BTreeMap<EdgeId, bool>) -> Result<DoubleCover> {
    build_double_cover_labeled(g, voltage, String::new())
}

fn build_double_cover_labeled(
    g: &Graph,
    voltage: &BTreeMap<EdgeId, bool>,
    label: String,
) -> Result<DoubleCover> {
    if g.has_cusps() {
        return Err(Error::CuspsPresent);
    }
    for e in g.edge_ids() {
        if !voltage.contains_key(e) {
            return Err(Error::Other(format!("voltage not defined on edge {e}")));
        }
    }
    for e in voltage.keys() {
        if !g.has_edge(e) {
            return Err(Error::UnknownEdge(e.clone()));
        }
    }
    let mut total = Graph::new();
    let mut vertex_proj = BTreeMap::new();
    let mut edge_proj = BTreeMap::new();
    for v in g.vertices() {
        for sheet in 0..2 {
            let lv = total.add_vertex(lift_vertex(v, sheet));
            vertex_proj.insert(lv, v.clone());
        }
    }
    for (e, (u, v)) in g.edges() {
        let swap = voltage[e] as usize;
        for sheet in 0..2 {
            let le = lift_edge(e, sheet);
            total.add_edge(le.clone(), lift_vertex(u, sheet), lift_vertex(v, sheet ^ swap))?;
            edge_proj.insert(le, e.clone());
        }
    }
    Ok(DoubleCover {
        base: g.clone(),
        voltage: voltage.clone(),
        total,
        vertex_proj,
        edge_proj,
        label,
    })
}

/// BFS spanning tree rooted at the least vertex, exploring branches in
/// edge-id order. Returns the set of tree edge ids.
pub fn bfs_spanning_tree(g: &Graph) -> Result<Vec<EdgeId>> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let root = match g.vertices().next() {
        Some(v) => v.clone(),
        None => return Ok(Vec::new()),
    };
    let mut seen = std::collections::BTreeSet::new();
    seen.insert(root.clone());
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(root);
    let mut tree = Vec::new();
    while let Some(v) = queue.pop_front() {
        for b in g.star(&v)? {
            if let Some(other) = b.other {
                if !seen.contains(&other) {
                    seen.insert(other.clone());
                    tree.push(b.edge.clone());
                    queue.push_back(other);
                }
            }
        }
    }
    Ok(tree)
}

/// All connected degree-2 covers of `g`, one per nonzero voltage class
/// after tree gauge fixing: exactly `2^b1 - 1` covers, in bitstring order.
pub fn enumerate_connected_double_covers(g: &Graph) -> Result<Vec<DoubleCover>> {
    if g.has_cusps() {
        return Err(Error::CuspsPresent);
    }
    let tree = bfs_spanning_tree(g)?;
    let tree_set: std::collections::BTreeSet<&EdgeId> = tree.iter().collect();
    let free: Vec<EdgeId> = g
        .edge_ids()
        .filter(|e| !tree_set.contains(e))
        .cloned()
        .collect();
    let k = free.len();
    debug_assert_eq!(k, g.betti());
    let mut out = Vec::with_capacity((1usize << k).saturating_sub(1));
    for mask in 1u64..(1u64 << k) {
        let mut voltage: BTreeMap<EdgeId, bool> = BTreeMap::new();
        for e in &tree {
            voltage.insert(e.clone(), false);
        }
        let mut label = String::with_capacity(k);
        for (j, e) in free.iter().enumerate() {
            let bit = mask >> j & 1 == 1;
            voltage.insert(e.clone(), bit);
            label.push(if bit { '1' } else { '0' });
        }
        let dc = build_double_cover_labeled(g, &voltage, label)?;
        debug_assert!(dc.total.is_connected());
        out.push(dc);
    }
    Ok(out)
}

/// Permutation of {0, 1, 2}; voltage group for degree-3 covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Perm3(pub [usize; 3]);

impl Perm3 {
    pub const ALL: [Perm3; 6] = [
        Perm3([0, 1, 2]),
        Perm3([0, 2, 1]),
        Perm3([1, 0, 2]),
        Perm3([1, 2, 0]),
        Perm3([2, 0, 1]),
        Perm3([2, 1, 0]),
    ];

    pub fn apply(&self, s: usize) -> usize {
        self.0[s]
    }
}

/// Degree-3 covering from an S3 voltage; same pushforward contract as
/// `DoubleCover`, used only when the degree-2 constraint system is rank
/// deficient.
#[derive(Debug, Clone)]
pub struct TripleCover {
    base: Graph,
    total: Graph,
    edge_proj: BTreeMap<EdgeId, EdgeId>,
    label: String,
}

impl TripleCover {
    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn total(&self) -> &Graph {
        &self.total
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn edge_projection(&self) -> &BTreeMap<EdgeId, EdgeId> {
        &self.edge_proj
    }

    pub fn push_loop(&self, c: &Loop) -> Result<ConstraintRow> {
        let row = pushforward(&self.edge_proj, c)?;
        debug_assert!(row.coeffs.values().all(|&k| k <= 3));
        Ok(row)
    }

    pub fn lift_metric(&self, m: &MetricGraph) -> Result<MetricGraph> {
        let mut lengths = BTreeMap::new();
        for (e, base_e) in &self.edge_proj {
            lengths.insert(e.clone(), m.length(base_e)?.clone());
        }
        MetricGraph::new(self.total.clone(), lengths)
    }
}

pub fn build_triple_cover(g: &Graph, voltage: &BTreeMap<EdgeId, Perm3>) -> Result<TripleCover> {
    build_triple_cover_labeled(g, voltage, String::new())
}

fn build_triple_cover_labeled(
    g: &Graph,
    voltage: &BTreeMap<EdgeId, Perm3>,
    label: String,
) -> Result<TripleCover> {
    if g.has_cusps() {
        return Err(Error::CuspsPresent);
    }
    for e in g.edge_ids() {
        if !voltage.contains_key(e) {
            return Err(Error::Other(format!("voltage not defined on edge {e}")));
        }
    }
    let mut total = Graph::new();
    let mut edge_proj = BTreeMap::new();
    for v in g.vertices() {
        for sheet in 0..3 {
            total.add_vertex(lift_vertex(v, sheet));
        }
    }
    for (e, (u, v)) in g.edges() {
        let sigma = voltage[e];
        for sheet in 0..3 {
            let le = lift_edge(e, sheet);
            total.add_edge(le.clone(), lift_vertex(u, sheet), lift_vertex(v, sigma.apply(sheet)))?;
            edge_proj.insert(le, e.clone());
        }
    }
    Ok(TripleCover {
        base: g.clone(),
        total,
        edge_proj,
        label,
    })
}

/// Connected degree-3 covers in deterministic order: S3 voltages over the
/// non-tree edges (tree edges carry the identity), keeping assignments
/// whose total graph is connected, up to `limit` covers.
pub fn enumerate_connected_triple_covers(g: &Graph, limit: usize) -> Result<Vec<TripleCover>> {
    let tree = bfs_spanning_tree(g)?;
    let tree_set: std::collections::BTreeSet<&EdgeId> = tree.iter().collect();
    let free: Vec<EdgeId> = g
        .edge_ids()
        .filter(|e| !tree_set.contains(e))
        .cloned()
        .collect();
    let k = free.len();
    let mut out = Vec::new();
    let count = 6usize.checked_pow(k as u32).unwrap_or(usize::MAX);
    for mask in 0..count {
        if out.len() >= limit {
            break;
        }
        let mut voltage: BTreeMap<EdgeId, Perm3> = BTreeMap::new();
        for e in &tree {
            voltage.insert(e.clone(), Perm3::ALL[0]);
        }
        let mut label = String::with_capacity(k);
        let mut rem = mask;
        for e in &free {
            let idx = rem % 6;
            rem /= 6;
            voltage.insert(e.clone(), Perm3::ALL[idx]);
            label.push(char::from(b'0' + idx as u8));
        }
        let tc = build_triple_cover_labeled(g, &voltage, label)?;
        if tc.total.is_connected() {
            out.push(tc);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{dumbbell_graph, k4_graph, theta_graph};
    use crate::loops::{enumerate_loops, loop_length, DEFAULT_LOOP_CAP};
    use crate::rational::q_int;

    fn volt(pairs: &[(&str, bool)]) -> BTreeMap<EdgeId, bool> {
        pairs.iter().map(|(e, b)| (EdgeId::new(*e), *b)).collect()
    }

    #[test]
    fn dumbbell_cover_shape() {
        let g = dumbbell_graph();
        let dc = build_double_cover(&g, &volt(&[("a", true), ("b", false), ("c", true)])).unwrap();
        let t = dc.total();
        assert_eq!(t.vertex_count(), 4);
        assert_eq!(t.edge_count(), 6);
        assert!(t.is_connected());
        assert_eq!(t.betti(), 3);
    }

    #[test]
    fn trivial_voltage_gives_two_copies() {
        let g = theta_graph();
        let dc =
            build_double_cover(&g, &volt(&[("a", false), ("b", false), ("c", false)])).unwrap();
        assert_eq!(dc.total().components().len(), 2);
    }

    #[test]
    fn theta_single_swap_is_connected() {
        let g = theta_graph();
        let dc = build_double_cover(&g, &volt(&[("a", true), ("b", false), ("c", false)])).unwrap();
        assert!(dc.total().is_connected());
        assert_eq!(dc.total().vertex_count(), 4);
        assert_eq!(dc.total().edge_count(), 6);
    }

    #[test]
    fn cusps_are_rejected() {
        let mut g = theta_graph();
        g.add_cusp("x", "u").unwrap();
        let v = volt(&[("a", false), ("b", false), ("c", false)]);
        assert!(matches!(build_double_cover(&g, &v), Err(Error::CuspsPresent)));
        assert!(matches!(
            enumerate_connected_double_covers(&g),
            Err(Error::CuspsPresent)
        ));
    }

    #[test]
    fn cover_counts_match_betti() {
        for g in [theta_graph(), dumbbell_graph(), k4_graph()] {
            let covers = enumerate_connected_double_covers(&g).unwrap();
            assert_eq!(covers.len(), (1 << g.betti()) - 1);
            for dc in &covers {
                assert!(dc.total().is_connected());
                assert_eq!(dc.total().betti(), 2 * g.betti() - 1);
            }
        }
        let mut path = Graph::new();
        path.add_vertex("a");
        path.add_vertex("b");
        path.add_edge("e", "a", "b").unwrap();
        assert!(enumerate_connected_double_covers(&path).unwrap().is_empty());
    }

    #[test]
    fn dumbbell_pushforwards() {
        let g = dumbbell_graph();
        let dc = build_double_cover(&g, &volt(&[("a", true), ("b", false), ("c", true)])).unwrap();
        let loops = enumerate_loops(dc.total(), DEFAULT_LOOP_CAP).unwrap();
        let rows: Vec<BTreeMap<EdgeId, u32>> = loops
            .iter()
            .map(|c| dc.push_loop(c).unwrap().coeffs)
            .collect();
        let mk = |pairs: &[(&str, u32)]| -> BTreeMap<EdgeId, u32> {
            pairs.iter().map(|(e, k)| (EdgeId::new(*e), *k)).collect()
        };
        // the lifted 2-cycles over each self-loop, and four girth loops
        // crossing both bridge lifts
        assert!(rows.contains(&mk(&[("a", 2)])));
        assert!(rows.contains(&mk(&[("c", 2)])));
        assert!(rows.contains(&mk(&[("a", 1), ("b", 2), ("c", 1)])));
        assert!(rows.iter().all(|r| r.values().all(|&k| k <= 2)));
    }

    #[test]
    fn voltage_zero_loops_push_with_unit_coefficients() {
        let g = theta_graph();
        // swap only along c: the loop {a, b} lifts whole to each sheet
        let dc = build_double_cover(&g, &volt(&[("a", false), ("b", false), ("c", true)])).unwrap();
        let loops = enumerate_loops(dc.total(), DEFAULT_LOOP_CAP).unwrap();
        let ab = loops
            .iter()
            .map(|c| dc.push_loop(c).unwrap())
            .find(|r| r.coeff(&"a".into()) > 0 && r.coeff(&"b".into()) > 0 && r.coeff(&"c".into()) == 0)
            .expect("whole lift of the base loop {a,b}");
        assert_eq!(ab.coeff(&"a".into()), 1);
        assert_eq!(ab.coeff(&"b".into()), 1);
    }

    #[test]
    fn cover_loop_lengths_match_pushforward_dot_product() {
        let g = dumbbell_graph();
        let mut lengths = BTreeMap::new();
        lengths.insert(EdgeId::new("a"), q_int(1));
        lengths.insert(EdgeId::new("b"), q_int(5));
        lengths.insert(EdgeId::new("c"), q_int(1));
        let m = MetricGraph::new(g.clone(), lengths).unwrap();
        for dc in enumerate_connected_double_covers(&g).unwrap() {
            let lifted = dc.lift_metric(&m).unwrap();
            for c in enumerate_loops(dc.total(), DEFAULT_LOOP_CAP).unwrap() {
                let direct = loop_length(&c, &lifted).unwrap();
                let row = dc.push_loop(&c).unwrap();
                let dot = row
                    .coeffs
                    .iter()
                    .fold(q_int(0), |acc, (e, k)| acc + m.length(e).unwrap() * q_int(*k as i64));
                assert_eq!(direct, dot);
            }
        }
    }

    #[test]
    fn triple_covers_are_connected_and_project() {
        let g = theta_graph();
        let covers = enumerate_connected_triple_covers(&g, 100).unwrap();
        assert!(!covers.is_empty());
        for tc in &covers {
            assert!(tc.total().is_connected());
            assert_eq!(tc.total().vertex_count(), 3 * g.vertex_count());
            assert_eq!(tc.total().edge_count(), 3 * g.edge_count());
        }
    }
}
