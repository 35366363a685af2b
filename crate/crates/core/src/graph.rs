//! Finite multigraphs with optional cusps (half-edges carrying a single
//! endpoint), metric structures with exact rational edge lengths, and the
//! elementary surgeries: edge deletion, subgraph contraction, and
//! concatenation of two edges across a valency-2 vertex.
//!
//! Self-loops and parallel edges are permitted everywhere. A self-loop
//! contributes two branches to its vertex; a cusp contributes one.

use crate::error::{Error, Result};
use crate::rational::Q;
use num_traits::Signed;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(String);

impl VertexId {
    pub fn new(s: impl Into<String>) -> Self {
        VertexId(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl EdgeId {
    pub fn new(s: impl Into<String>) -> Self {
        EdgeId(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId::new(s)
    }
}

impl From<String> for VertexId {
    fn from(s: String) -> Self {
        VertexId(s)
    }
}

impl From<&str> for EdgeId {
    fn from(s: &str) -> Self {
        EdgeId::new(s)
    }
}

impl From<String> for EdgeId {
    fn from(s: String) -> Self {
        EdgeId(s)
    }
}

/// One branch of the adjacency star of a vertex. A full edge contributes a
/// branch at each endpoint (two at the same vertex for a self-loop); a cusp
/// contributes one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub edge: EdgeId,
    /// Other endpoint; equals the star's own vertex for self-loops,
    /// `None` for cusp branches.
    pub other: Option<VertexId>,
    /// True when the branch sits at the stored tail of the edge.
    pub from_tail: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: BTreeSet<VertexId>,
    /// Full edges; endpoint pair stored as given on insertion (tail, head).
    edges: BTreeMap<EdgeId, (VertexId, VertexId)>,
    /// Half-edges with a single endpoint.
    cusps: BTreeMap<EdgeId, VertexId>,
}

impl Graph {
    pub fn new() -> Self {
        Graph {
            vertices: BTreeSet::new(),
            edges: BTreeMap::new(),
            cusps: BTreeMap::new(),
        }
    }

    pub fn add_vertex(&mut self, v: impl Into<VertexId>) -> VertexId {
        let v = v.into();
        self.vertices.insert(v.clone());
        v
    }

    pub fn add_edge(
        &mut self,
        id: impl Into<EdgeId>,
        u: impl Into<VertexId>,
        v: impl Into<VertexId>,
    ) -> Result<EdgeId> {
        let id = id.into();
        let (u, v) = (u.into(), v.into());
        if self.edges.contains_key(&id) || self.cusps.contains_key(&id) {
            return Err(Error::DuplicateId(id.as_str().to_string()));
        }
        if !self.vertices.contains(&u) {
            return Err(Error::UnknownVertex(u));
        }
        if !self.vertices.contains(&v) {
            return Err(Error::UnknownVertex(v));
        }
        self.edges.insert(id.clone(), (u, v));
        Ok(id)
    }

    pub fn add_cusp(&mut self, id: impl Into<EdgeId>, v: impl Into<VertexId>) -> Result<EdgeId> {
        let id = id.into();
        let v = v.into();
        if self.edges.contains_key(&id) || self.cusps.contains_key(&id) {
            return Err(Error::DuplicateId(id.as_str().to_string()));
        }
        if !self.vertices.contains(&v) {
            return Err(Error::UnknownVertex(v));
        }
        self.cusps.insert(id.clone(), v);
        Ok(id)
    }

    pub fn vertices(&self) -> impl Iterator<Item = &VertexId> {
        self.vertices.iter()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Full edges only; cusps are not included.
    pub fn edges(&self) -> impl Iterator<Item = (&EdgeId, &(VertexId, VertexId))> {
        self.edges.iter()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = &EdgeId> {
        self.edges.keys()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn cusps(&self) -> impl Iterator<Item = (&EdgeId, &VertexId)> {
        self.cusps.iter()
    }

    pub fn cusp_count(&self) -> usize {
        self.cusps.len()
    }

    pub fn has_cusps(&self) -> bool {
        !self.cusps.is_empty()
    }

    pub fn has_vertex(&self, v: &VertexId) -> bool {
        self.vertices.contains(v)
    }

    pub fn has_edge(&self, e: &EdgeId) -> bool {
        self.edges.contains_key(e)
    }

    pub fn ends(&self, e: &EdgeId) -> Result<&(VertexId, VertexId)> {
        self.edges.get(e).ok_or_else(|| Error::UnknownEdge(e.clone()))
    }

    pub fn is_self_loop(&self, e: &EdgeId) -> Result<bool> {
        let (u, v) = self.ends(e)?;
        Ok(u == v)
    }

    /// All branches at `v`, ordered by (edge id, tail branch first).
    /// Self-loops contribute two branches, cusps one.
    pub fn star(&self, v: &VertexId) -> Result<Vec<Branch>> {
        if !self.vertices.contains(v) {
            return Err(Error::UnknownVertex(v.clone()));
        }
        let mut out = Vec::new();
        for (id, (a, b)) in &self.edges {
            if a == v {
                out.push(Branch {
                    edge: id.clone(),
                    other: Some(b.clone()),
                    from_tail: true,
                });
            }
            if b == v {
                out.push(Branch {
                    edge: id.clone(),
                    other: Some(a.clone()),
                    from_tail: false,
                });
            }
        }
        for (id, a) in &self.cusps {
            if a == v {
                out.push(Branch {
                    edge: id.clone(),
                    other: None,
                    from_tail: true,
                });
            }
        }
        Ok(out)
    }

    /// Number of branches abutting `v`: self-loops count twice, cusps once.
    pub fn valency(&self, v: &VertexId) -> Result<usize> {
        Ok(self.star(v)?.len())
    }

    pub fn min_valency(&self) -> usize {
        self.valencies().values().min().copied().unwrap_or(0)
    }

    /// Connected components of the underlying full-edge graph (cusps do not
    /// join anything). Components are sets of vertices.
    pub fn components(&self) -> Vec<BTreeSet<VertexId>> {
        let mut adjacency: BTreeMap<&VertexId, Vec<&VertexId>> = BTreeMap::new();
        for (a, b) in self.edges.values() {
            adjacency.entry(a).or_default().push(b);
            adjacency.entry(b).or_default().push(a);
        }
        let mut seen: BTreeSet<&VertexId> = BTreeSet::new();
        let mut out = Vec::new();
        for start in &self.vertices {
            if seen.contains(start) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut stack = vec![start];
            seen.insert(start);
            while let Some(v) = stack.pop() {
                comp.insert(v.clone());
                if let Some(others) = adjacency.get(v) {
                    for other in others {
                        if seen.insert(other) {
                            stack.push(other);
                        }
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    /// Valency of every vertex in one pass over the edges.
    pub fn valencies(&self) -> BTreeMap<&VertexId, usize> {
        let mut out: BTreeMap<&VertexId, usize> = self.vertices.iter().map(|v| (v, 0)).collect();
        for (a, b) in self.edges.values() {
            *out.get_mut(a).expect("endpoint declared") += 1;
            *out.get_mut(b).expect("endpoint declared") += 1;
        }
        for v in self.cusps.values() {
            *out.get_mut(v).expect("endpoint declared") += 1;
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// First Betti number |E| - |V| + #components; cusps are excluded.
    pub fn betti(&self) -> usize {
        let c = self.components().len();
        (self.edges.len() + c).saturating_sub(self.vertices.len())
    }

    /// Removes a full edge. Vertices stay, even when isolated.
    pub fn delete_edge(&self, e: &EdgeId) -> Result<Graph> {
        if !self.edges.contains_key(e) {
            return Err(Error::UnknownEdge(e.clone()));
        }
        let mut g = self.clone();
        g.edges.remove(e);
        Ok(g)
    }

    /// Collapses the connected subgraph spanned by `edges` to a single
    /// vertex (the least vertex id of the subgraph). Edges of the subgraph
    /// vanish; other edges reattach, possibly becoming self-loops.
    pub fn contract_subgraph(&self, edges: &BTreeSet<EdgeId>) -> Result<Graph> {
        let mut sub_vertices: BTreeSet<VertexId> = BTreeSet::new();
        for e in edges {
            let (u, v) = self.ends(e)?.clone();
            sub_vertices.insert(u);
            sub_vertices.insert(v);
        }
        if edges.is_empty() {
            return Err(Error::ContractDisconnected);
        }
        // connectivity of the subgraph on its own edge set
        let first = sub_vertices.iter().next().expect("nonempty").clone();
        let mut reach = BTreeSet::new();
        let mut stack = vec![first];
        while let Some(v) = stack.pop() {
            if !reach.insert(v.clone()) {
                continue;
            }
            for e in edges {
                let (a, b) = &self.edges[e];
                if a == &v && !reach.contains(b) {
                    stack.push(b.clone());
                }
                if b == &v && !reach.contains(a) {
                    stack.push(a.clone());
                }
            }
        }
        if reach != sub_vertices {
            return Err(Error::ContractDisconnected);
        }

        let hub = sub_vertices.iter().next().expect("nonempty").clone();
        let rename = |v: &VertexId| -> VertexId {
            if sub_vertices.contains(v) {
                hub.clone()
            } else {
                v.clone()
            }
        };
        let mut g = Graph::new();
        for v in &self.vertices {
            if !sub_vertices.contains(v) || v == &hub {
                g.add_vertex(v.clone());
            }
        }
        g.add_vertex(hub.clone());
        for (id, (u, v)) in &self.edges {
            if edges.contains(id) {
                continue;
            }
            g.add_edge(id.clone(), rename(u), rename(v))?;
        }
        for (id, v) in &self.cusps {
            g.add_cusp(id.clone(), rename(v))?;
        }
        Ok(g)
    }

    /// Joins edges `a` and `b` across their shared valency-2 vertex into a
    /// single edge named `a+b`. The shared vertex disappears.
    pub fn concatenate_edges(&self, a: &EdgeId, b: &EdgeId) -> Result<(Graph, EdgeId)> {
        let (a0, a1) = self.ends(a)?.clone();
        let (b0, b1) = self.ends(b)?.clone();
        if a == b {
            return Err(Error::BadConcatenation(2));
        }
        // shared vertex of valency exactly 2
        let mut shared = None;
        for v in [&a0, &a1] {
            if (v == &b0 || v == &b1) && self.valency(v)? == 2 {
                shared = Some(v.clone());
                break;
            }
        }
        let shared = match shared {
            Some(v) => v,
            None => {
                let v = if a1 == b0 || a1 == b1 { &a1 } else { &a0 };
                return Err(Error::BadConcatenation(self.valency(v).unwrap_or(0)));
            }
        };
        let far_a = if a0 == shared { a1 } else { a0 };
        let far_b = if b0 == shared { b1 } else { b0 };

        let new_id = EdgeId::new(format!("{}+{}", a.as_str().min(b.as_str()), a.as_str().max(b.as_str())));
        let mut g = Graph::new();
        for v in &self.vertices {
            if v != &shared {
                g.add_vertex(v.clone());
            }
        }
        for (id, (u, v)) in &self.edges {
            if id == a || id == b {
                continue;
            }
            g.add_edge(id.clone(), u.clone(), v.clone())?;
        }
        g.add_edge(new_id.clone(), far_a, far_b)?;
        for (id, v) in &self.cusps {
            g.add_cusp(id.clone(), v.clone())?;
        }
        Ok((g, new_id))
    }

    /// Splits edge `e` by a fresh valency-2 vertex; the halves are named
    /// `e.1` and `e.2`.
    pub fn subdivide_edge(&self, e: &EdgeId) -> Result<(Graph, VertexId, EdgeId, EdgeId)> {
        let (u, v) = self.ends(e)?.clone();
        let mid = VertexId::new(format!("{}*", e.as_str()));
        let e1 = EdgeId::new(format!("{}.1", e.as_str()));
        let e2 = EdgeId::new(format!("{}.2", e.as_str()));
        let mut g = self.clone();
        g.edges.remove(e);
        g.add_vertex(mid.clone());
        g.add_edge(e1.clone(), u, mid.clone())?;
        g.add_edge(e2.clone(), mid.clone(), v)?;
        Ok((g, mid, e1, e2))
    }
}

impl Default for Graph {
    fn default() -> Self {
        Graph::new()
    }
}

/// A graph with a strictly positive rational length on every full edge.
/// Cusps carry no length.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    graph: Graph,
    lengths: BTreeMap<EdgeId, Q>,
}

impl MetricGraph {
    pub fn new(graph: Graph, lengths: BTreeMap<EdgeId, Q>) -> Result<Self> {
        for e in graph.edge_ids() {
            match lengths.get(e) {
                None => return Err(Error::MissingLength(e.clone())),
                Some(l) if !l.is_positive() => {
                    return Err(Error::NonPositiveLength {
                        edge: e.clone(),
                        length: l.clone(),
                    })
                }
                _ => {}
            }
        }
        for e in lengths.keys() {
            if !graph.has_edge(e) {
                return Err(Error::UnknownEdge(e.clone()));
            }
        }
        Ok(MetricGraph { graph, lengths })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn lengths(&self) -> &BTreeMap<EdgeId, Q> {
        &self.lengths
    }

    pub fn length(&self, e: &EdgeId) -> Result<&Q> {
        self.lengths.get(e).ok_or_else(|| Error::MissingLength(e.clone()))
    }

    pub fn total_length(&self) -> Q {
        self.lengths.values().fold(Q::from_integer(0.into()), |a, b| a + b)
    }

    pub fn delete_edge(&self, e: &EdgeId) -> Result<MetricGraph> {
        let g = self.graph.delete_edge(e)?;
        let mut lengths = self.lengths.clone();
        lengths.remove(e);
        MetricGraph::new(g, lengths)
    }

    /// Concatenation carries the metric along: the new edge has length
    /// `f(a) + f(b)`.
    pub fn concatenate_edges(&self, a: &EdgeId, b: &EdgeId) -> Result<(MetricGraph, EdgeId)> {
        let la = self.length(a)?.clone();
        let lb = self.length(b)?.clone();
        let (g, joined) = self.graph.concatenate_edges(a, b)?;
        let mut lengths = self.lengths.clone();
        lengths.remove(a);
        lengths.remove(b);
        lengths.insert(joined.clone(), la + lb);
        Ok((MetricGraph::new(g, lengths)?, joined))
    }

    /// Splits `e` into two halves of the given lengths (they must sum to
    /// the original length).
    pub fn subdivide_edge(
        &self,
        e: &EdgeId,
        first_part: Q,
    ) -> Result<(MetricGraph, VertexId, EdgeId, EdgeId)> {
        let total = self.length(e)?.clone();
        let rest = &total - &first_part;
        if !first_part.is_positive() || !rest.is_positive() {
            return Err(Error::NonPositiveLength {
                edge: e.clone(),
                length: first_part,
            });
        }
        let (g, mid, e1, e2) = self.graph.subdivide_edge(e)?;
        let mut lengths = self.lengths.clone();
        lengths.remove(e);
        lengths.insert(e1.clone(), first_part);
        lengths.insert(e2.clone(), rest);
        Ok((MetricGraph::new(g, lengths)?, mid, e1, e2))
    }
}

// -- small named instances used across the test suites --

/// Two vertices joined by three parallel edges.
pub fn theta_graph() -> Graph {
    let mut g = Graph::new();
    g.add_vertex("u");
    g.add_vertex("v");
    g.add_edge("a", "u", "v").unwrap();
    g.add_edge("b", "u", "v").unwrap();
    g.add_edge("c", "u", "v").unwrap();
    g
}

/// Two self-loops joined by a bridge: loop `a` at `u`, bridge `b`, loop `c` at `v`.
pub fn dumbbell_graph() -> Graph {
    let mut g = Graph::new();
    g.add_vertex("u");
    g.add_vertex("v");
    g.add_edge("a", "u", "u").unwrap();
    g.add_edge("b", "u", "v").unwrap();
    g.add_edge("c", "v", "v").unwrap();
    g
}

/// Complete graph on four vertices.
pub fn k4_graph() -> Graph {
    let mut g = Graph::new();
    for v in ["p", "q", "r", "s"] {
        g.add_vertex(v);
    }
    g.add_edge("e1", "p", "q").unwrap();
    g.add_edge("e2", "p", "r").unwrap();
    g.add_edge("e3", "p", "s").unwrap();
    g.add_edge("e4", "q", "r").unwrap();
    g.add_edge("e5", "q", "s").unwrap();
    g.add_edge("e6", "r", "s").unwrap();
    g
}
