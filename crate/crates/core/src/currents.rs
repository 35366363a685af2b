//! Integer currents on graphs and finite tree windows.
//!
//! A current assigns an integer flow to every oriented edge,
//! antisymmetrically, and obeys Kirchhoff's law at every interior vertex.
//! Tree windows are finite truncations of infinite trees: their truncation
//! leaves are marked as boundary and are exempt from Kirchhoff's law. Two
//! one-directional splitting criteria are provided for the covering
//! attached to a current: vanishing of the flow on a metric ball certifies
//! SPLIT, a star residue that is nonzero mod `p^e` certifies NOT_SPLIT,
//! and line currents additionally admit the exact distance criterion.

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, MetricGraph, VertexId};
use crate::loops::{Loop, Step};
use crate::rational::{q_int, Q};
use crate::valuation::{split_threshold, Val};
use num_traits::Signed;
use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

/// Flow per edge along its stored tail-to-head orientation; missing edges
/// carry zero. Antisymmetry is implicit: the reverse orientation negates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Current {
    flows: BTreeMap<EdgeId, i64>,
}

impl Current {
    pub fn zero() -> Current {
        Current::default()
    }

    pub fn from_flows(flows: BTreeMap<EdgeId, i64>) -> Current {
        let flows = flows.into_iter().filter(|(_, f)| *f != 0).collect();
        Current { flows }
    }

    /// Flow along the stored orientation of `e`.
    pub fn flow(&self, e: &EdgeId) -> i64 {
        self.flows.get(e).copied().unwrap_or(0)
    }

    pub fn flow_along(&self, e: &EdgeId, forward: bool) -> i64 {
        if forward {
            self.flow(e)
        } else {
            -self.flow(e)
        }
    }

    pub fn support(&self) -> impl Iterator<Item = (&EdgeId, &i64)> {
        self.flows.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.flows.is_empty()
    }

    pub fn add(&self, other: &Current) -> Current {
        let mut flows = self.flows.clone();
        for (e, f) in &other.flows {
            *flows.entry(e.clone()).or_insert(0) += f;
        }
        Current::from_flows(flows)
    }

    /// Net outflow at `v`; zero at every interior vertex of a current.
    pub fn divergence(&self, g: &Graph, v: &VertexId) -> Result<i64> {
        if !g.has_vertex(v) {
            return Err(Error::UnknownVertex(v.clone()));
        }
        let mut net = 0i64;
        for (e, (u, w)) in g.edges() {
            let f = self.flow(e);
            if u == v {
                net += f;
            }
            if w == v {
                net -= f;
            }
        }
        Ok(net)
    }
}

/// Vertices (outside `exempt`) where Kirchhoff's law fails.
pub fn kirchhoff_violations(
    g: &Graph,
    c: &Current,
    exempt: &BTreeSet<VertexId>,
) -> Result<Vec<VertexId>> {
    let mut bad = Vec::new();
    for v in g.vertices() {
        if exempt.contains(v) {
            continue;
        }
        if c.divergence(g, v)? != 0 {
            bad.push(v.clone());
        }
    }
    Ok(bad)
}

/// The unit current of a simple loop: +1 along its orientation.
pub fn loop_current(g: &Graph, c: &Loop) -> Result<Current> {
    steps_current(g, c.steps())
}

/// The unit current of a simple open path (empty path gives the zero
/// current). Kirchhoff holds away from the two endpoints.
pub fn path_current(g: &Graph, steps: &[Step]) -> Result<Current> {
    validate_simple_path(g, steps)?;
    steps_current(g, steps)
}

fn steps_current(g: &Graph, steps: &[Step]) -> Result<Current> {
    let mut flows = BTreeMap::new();
    for s in steps {
        if !g.has_edge(&s.edge) {
            return Err(Error::UnknownEdge(s.edge.clone()));
        }
        let delta = if s.forward { 1 } else { -1 };
        let slot = flows.entry(s.edge.clone()).or_insert(0i64);
        if *slot != 0 {
            return Err(Error::InvalidPath(format!("edge {} used twice", s.edge)));
        }
        *slot = delta;
    }
    Ok(Current::from_flows(flows))
}

fn validate_simple_path(g: &Graph, steps: &[Step]) -> Result<()> {
    let mut seen_vertices: BTreeSet<VertexId> = BTreeSet::new();
    for k in 0..steps.len() {
        let here = &steps[k];
        if k + 1 < steps.len() {
            let next = &steps[k + 1];
            if here.head(g)? != next.tail(g)? {
                return Err(Error::InvalidPath(format!(
                    "steps {k} and {} do not share a vertex",
                    k + 1
                )));
            }
        }
        if !seen_vertices.insert(here.tail(g)?) {
            return Err(Error::InvalidPath("vertex visited twice".into()));
        }
    }
    if let Some(last) = steps.last() {
        if !seen_vertices.insert(last.head(g)?) {
            return Err(Error::InvalidPath("vertex visited twice".into()));
        }
    }
    Ok(())
}

/// A finite truncation of a metric tree. Truncation leaves form the
/// boundary; the optional marked line is a simple path between two
/// boundary vertices standing in for a bi-infinite line.
#[derive(Debug, Clone)]
pub struct TreeWindow {
    tree: MetricGraph,
    boundary: BTreeSet<VertexId>,
    marked_line: Option<Vec<Step>>,
}

impl TreeWindow {
    pub fn new(
        tree: MetricGraph,
        boundary: BTreeSet<VertexId>,
        marked_line: Option<Vec<Step>>,
    ) -> Result<Self> {
        let g = tree.graph();
        if g.has_cusps() {
            return Err(Error::CuspsPresent);
        }
        if g.edge_count() + 1 != g.vertex_count() || !g.is_connected() {
            return Err(Error::NotATree);
        }
        let valencies = g.valencies();
        for v in &boundary {
            match valencies.get(v) {
                None => return Err(Error::UnknownVertex(v.clone())),
                Some(1) => {}
                Some(_) => {
                    return Err(Error::InvalidLine(format!(
                        "boundary vertex {v} is not a leaf"
                    )))
                }
            }
        }
        if let Some(line) = &marked_line {
            validate_simple_path(g, line)
                .map_err(|e| Error::InvalidLine(format!("{e}")))?;
            let first = line
                .first()
                .ok_or_else(|| Error::InvalidLine("empty line".into()))?;
            let last = line.last().expect("nonempty");
            if !boundary.contains(&first.tail(g)?) || !boundary.contains(&last.head(g)?) {
                return Err(Error::InvalidLine(
                    "line ends must lie on the boundary".into(),
                ));
            }
        }
        Ok(TreeWindow {
            tree,
            boundary,
            marked_line,
        })
    }

    pub fn tree(&self) -> &MetricGraph {
        &self.tree
    }

    pub fn graph(&self) -> &Graph {
        self.tree.graph()
    }

    pub fn boundary(&self) -> &BTreeSet<VertexId> {
        &self.boundary
    }

    pub fn is_interior(&self, v: &VertexId) -> bool {
        self.graph().has_vertex(v) && !self.boundary.contains(v)
    }

    pub fn marked_line(&self) -> Option<&[Step]> {
        self.marked_line.as_deref()
    }

    /// The unit current of the marked line.
    pub fn line_current(&self) -> Result<Current> {
        let line = self
            .marked_line
            .as_ref()
            .ok_or_else(|| Error::InvalidLine("no marked line".into()))?;
        path_current(self.graph(), line)
    }

    /// Vertices the marked line passes through.
    pub fn line_vertices(&self) -> Result<BTreeSet<VertexId>> {
        let line = self
            .marked_line
            .as_ref()
            .ok_or_else(|| Error::InvalidLine("no marked line".into()))?;
        let g = self.graph();
        let mut out = BTreeSet::new();
        for s in line {
            out.insert(s.tail(g)?);
            out.insert(s.head(g)?);
        }
        Ok(out)
    }

    pub fn kirchhoff_ok(&self, c: &Current) -> Result<bool> {
        Ok(kirchhoff_violations(self.graph(), c, &self.boundary)?.is_empty())
    }
}

/// Exact single-source distances in a metric graph.
pub fn distances_from(m: &MetricGraph, src: &VertexId) -> Result<BTreeMap<VertexId, Q>> {
    let mut set = BTreeSet::new();
    set.insert(src.clone());
    distances_to_set(m, &set)
}

/// Exact distances to the nearest vertex of `sources`.
pub fn distances_to_set(
    m: &MetricGraph,
    sources: &BTreeSet<VertexId>,
) -> Result<BTreeMap<VertexId, Q>> {
    let g = m.graph();
    for s in sources {
        if !g.has_vertex(s) {
            return Err(Error::UnknownVertex(s.clone()));
        }
    }
    let mut adj: BTreeMap<&VertexId, Vec<(&EdgeId, &VertexId)>> = BTreeMap::new();
    for (e, (u, v)) in g.edges() {
        adj.entry(u).or_default().push((e, v));
        adj.entry(v).or_default().push((e, u));
    }
    let mut dist: BTreeMap<VertexId, Q> = BTreeMap::new();
    let mut heap: BinaryHeap<Reverse<(Q, VertexId)>> = BinaryHeap::new();
    for s in sources {
        dist.insert(s.clone(), q_int(0));
        heap.push(Reverse((q_int(0), s.clone())));
    }
    while let Some(Reverse((d, v))) = heap.pop() {
        if dist.get(&v).map(|best| &d > best).unwrap_or(false) {
            continue;
        }
        if let Some(branches) = adj.get(&v) {
            for (e, other) in branches {
                let nd = &d + m.length(e)?;
                let better = dist.get(*other).map(|cur| &nd < cur).unwrap_or(true);
                if better {
                    dist.insert((*other).clone(), nd.clone());
                    heap.push(Reverse((nd, (*other).clone())));
                }
            }
        }
    }
    Ok(dist)
}

pub fn tree_distance(m: &MetricGraph, a: &VertexId, b: &VertexId) -> Result<Q> {
    let d = distances_from(m, a)?;
    d.get(b).cloned().ok_or_else(|| Error::UnknownVertex(b.clone()))
}

/// Distances to a connected vertex set of a tree. Because paths in a tree
/// are unique and the set is connected, a single outward sweep assigns
/// every vertex its distance in one rational addition.
pub fn tree_distances_to_connected_set(
    m: &MetricGraph,
    sources: &BTreeSet<VertexId>,
) -> Result<BTreeMap<VertexId, Q>> {
    let g = m.graph();
    debug_assert!(g.edge_count() + 1 == g.vertex_count() && g.is_connected());
    let mut adj: BTreeMap<&VertexId, Vec<(&EdgeId, &VertexId)>> = BTreeMap::new();
    for (e, (u, v)) in g.edges() {
        adj.entry(u).or_default().push((e, v));
        adj.entry(v).or_default().push((e, u));
    }
    let mut dist: BTreeMap<VertexId, Q> = BTreeMap::new();
    let mut stack: Vec<&VertexId> = Vec::new();
    for s in sources {
        if !g.has_vertex(s) {
            return Err(Error::UnknownVertex(s.clone()));
        }
        dist.insert(s.clone(), q_int(0));
    }
    for s in sources {
        stack.push(s);
    }
    while let Some(v) = stack.pop() {
        let here = dist[v].clone();
        if let Some(branches) = adj.get(v) {
            for (e, other) in branches {
                if !dist.contains_key(*other) {
                    dist.insert((*other).clone(), &here + m.length(e)?);
                    stack.push(other);
                }
            }
        }
    }
    Ok(dist)
}

/// A partial isometry of a tree window onto itself: an injective,
/// incidence- and length-preserving map defined on part of the window.
#[derive(Debug, Clone, Default)]
pub struct WindowMap {
    pub vertex_map: BTreeMap<VertexId, VertexId>,
    pub edge_map: BTreeMap<EdgeId, EdgeId>,
}

impl WindowMap {
    pub fn identity(w: &TreeWindow) -> WindowMap {
        WindowMap {
            vertex_map: w.graph().vertices().map(|v| (v.clone(), v.clone())).collect(),
            edge_map: w.graph().edge_ids().map(|e| (e.clone(), e.clone())).collect(),
        }
    }

    pub fn validate(&self, w: &TreeWindow) -> Result<()> {
        let g = w.graph();
        let mut seen_v = BTreeSet::new();
        for (a, b) in &self.vertex_map {
            if !g.has_vertex(a) || !g.has_vertex(b) {
                return Err(Error::InvalidWindowMap(format!("unknown vertex {a} or {b}")));
            }
            if !seen_v.insert(b.clone()) {
                return Err(Error::InvalidWindowMap("vertex map not injective".into()));
            }
        }
        let mut seen_e = BTreeSet::new();
        for (e, e2) in &self.edge_map {
            let (u, v) = g.ends(e)?.clone();
            let (u2, v2) = g.ends(e2)?.clone();
            let (mu, mv) = match (self.vertex_map.get(&u), self.vertex_map.get(&v)) {
                (Some(a), Some(b)) => (a.clone(), b.clone()),
                _ => {
                    return Err(Error::InvalidWindowMap(format!(
                        "edge {e} mapped but an endpoint is not"
                    )))
                }
            };
            let straight = (mu.clone(), mv.clone()) == (u2.clone(), v2.clone());
            let flipped = (mv, mu) == (u2.clone(), v2.clone());
            if !straight && !flipped {
                return Err(Error::InvalidWindowMap(format!(
                    "edge {e} does not map onto the ends of {e2}"
                )));
            }
            if w.tree().length(e)? != w.tree().length(e2)? {
                return Err(Error::InvalidWindowMap(format!(
                    "edge {e} changes length under the map"
                )));
            }
            if !seen_e.insert(e2.clone()) {
                return Err(Error::InvalidWindowMap("edge map not injective".into()));
            }
        }
        Ok(())
    }

    /// True when the image of edge `e` keeps the tail-to-head orientation.
    fn keeps_orientation(&self, g: &Graph, e: &EdgeId, e2: &EdgeId) -> Result<bool> {
        let (u, _) = g.ends(e)?;
        let (u2, _) = g.ends(e2)?;
        Ok(self.vertex_map.get(u) == Some(u2))
    }

    /// Pushes a current forward; flow on edges outside the domain is
    /// dropped (to be checked against the boundary by the caller).
    pub fn push_current(&self, w: &TreeWindow, c: &Current) -> Result<Current> {
        let g = w.graph();
        let mut flows = BTreeMap::new();
        for (e, f) in c.support() {
            if let Some(e2) = self.edge_map.get(e) {
                let sign = if self.keeps_orientation(g, e, e2)? { 1 } else { -1 };
                *flows.entry(e2.clone()).or_insert(0) += sign * f;
            }
        }
        Ok(Current::from_flows(flows))
    }
}

/// Pointwise sum of the pushforwards of `c0` under the given window
/// self-maps. Fails when flow escapes the window across an interior
/// vertex (Kirchhoff would break there); loss through the boundary is
/// absorbed.
pub fn translate_sum(w: &TreeWindow, c0: &Current, maps: &[WindowMap]) -> Result<Current> {
    let mut total = Current::zero();
    for m in maps {
        m.validate(w)?;
        total = total.add(&m.push_current(w, c0)?);
    }
    let bad = kirchhoff_violations(w.graph(), &total, w.boundary())?;
    if let Some(v) = bad.first() {
        return Err(Error::TranslateEscapesWindow(v.clone()));
    }
    Ok(total)
}

/// Whether some edge at `v` carries flow that is nonzero mod `n`; this
/// certifies the attached degree-`n` covering is not split over `v`.
pub fn star_residue_nonzero(w: &TreeWindow, c: &Current, v: &VertexId, n: u64) -> Result<bool> {
    if n < 2 {
        return Err(Error::Other(format!("modulus must be >= 2, got {n}")));
    }
    if !w.graph().has_vertex(v) {
        return Err(Error::UnknownVertex(v.clone()));
    }
    if !w.is_interior(v) {
        return Err(Error::BoundaryVertex(v.clone()));
    }
    for b in w.graph().star(v)? {
        let f = c.flow(&b.edge);
        if !flow_divisible(f, n) {
            return Ok(true);
        }
    }
    Ok(false)
}

fn flow_divisible(flow: i64, n: u64) -> bool {
    if n > i64::MAX as u64 {
        // |flow| < n, so only zero is divisible
        flow == 0
    } else {
        flow.rem_euclid(n as i64) == 0
    }
}

fn power_modulus(p: u64, e: u32) -> u64 {
    p.checked_pow(e).unwrap_or(u64::MAX)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitVerdict {
    Split,
    NotSplit,
    Unknown,
}

/// Decides splitting of the `p^e`-covering attached to `c` over the
/// interior vertex `z`, combining the two one-directional criteria:
///
/// * flow identically zero on the metric ball of radius
///   `e + 1/(p-1) + margin` around `z` certifies SPLIT;
/// * star flow at `z` nonzero mod `p^e` certifies NOT_SPLIT;
/// * when `c` is exactly the marked-line current, the exact criterion
///   `d(z, line) > e + 1/(p-1)` decides;
/// * otherwise UNKNOWN.
pub fn split_by_vanishing(
    w: &TreeWindow,
    c: &Current,
    z: &VertexId,
    e: u32,
    p: u64,
    margin: &Q,
) -> Result<SplitVerdict> {
    if !w.graph().has_vertex(z) {
        return Err(Error::UnknownVertex(z.clone()));
    }
    if !w.is_interior(z) {
        return Err(Error::BoundaryVertex(z.clone()));
    }
    if e == 0 {
        return Ok(SplitVerdict::Split);
    }
    if !margin.is_positive() {
        return Err(Error::Other(format!(
            "margin must be positive, got {}",
            crate::rational::format_q(margin)
        )));
    }
    let threshold = split_threshold(p, e)?;
    let lambda = &threshold + margin;

    let dist = distances_from(w.tree(), z)?;
    for bv in w.boundary() {
        if dist[bv] < lambda {
            return Err(Error::BallExitsWindow {
                vertex: z.clone(),
                radius: lambda.clone(),
            });
        }
    }
    let ball_flow_zero = w.graph().edges().all(|(eid, (u, v))| {
        let near = std::cmp::min(&dist[u], &dist[v]);
        *near >= lambda || c.flow(eid) == 0
    });
    if ball_flow_zero {
        return Ok(SplitVerdict::Split);
    }
    if star_residue_nonzero(w, c, z, power_modulus(p, e))? {
        return Ok(SplitVerdict::NotSplit);
    }
    if let Some(_line) = w.marked_line() {
        if &w.line_current()? == c {
            let line_dist = {
                let targets = w.line_vertices()?;
                targets.iter().map(|t| dist[t].clone()).min().expect("line nonempty")
            };
            return Ok(if line_dist > threshold {
                SplitVerdict::Split
            } else {
                SplitVerdict::NotSplit
            });
        }
    }
    Ok(SplitVerdict::Unknown)
}

/// Exponent of the deviation bound `p^(d - lambda)` for a point at
/// distance `d` from the base point of a current vanishing on the
/// `lambda`-neighborhood.
pub fn deviation_bound_exponent(d: &Val, lambda: &Val) -> Result<Val> {
    match (d, lambda) {
        (Val::Finite(dv), Val::Finite(lv)) => {
            if dv.is_negative() {
                return Err(Error::NegativeValuation(dv.clone()));
            }
            if !lv.is_positive() {
                return Err(Error::Other("lambda must be positive".into()));
            }
            Ok(Val::Finite(dv - lv))
        }
        (Val::Infinite, Val::Finite(_)) => Ok(Val::Infinite),
        _ => Err(Error::Other("lambda must be finite".into())),
    }
}
