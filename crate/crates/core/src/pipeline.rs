//! End-to-end recovery of a hidden metric from split-oracle booleans.
//!
//! For a loop `C` of a graph, the universal cover contains the unrolled
//! line of `C`; pick the lift `z_0, z_1, ...` of a base vertex along it
//! and hang the line of a second loop `L` nearby. The degree-`p^e`
//! covering attached to the line current of `L` is split over `z` exactly
//! when `d(z, L) > e + 1/(p-1)`, so the splitting index
//! `m(z) = max(1, ceil(d(z, L) - 1/(p-1)))` is observable from split/no
//! booleans alone, and `d(z_i, L) = r + i * lg(C)` turns the sequence
//! `m(z_0), m(z_1), ...` into an exact window on `lg(C)`. Feeding the
//! recovered loop lengths of the graph and of all its connected double
//! covers to the constraint solver returns every edge length.
//!
//! The oracle side (window construction, distance evaluation) is the only
//! code that reads the hidden lengths; recovery consumes booleans.

use crate::covering::enumerate_connected_double_covers;
use crate::currents::{tree_distances_to_connected_set, TreeWindow};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, MetricGraph, VertexId};
use crate::loops::{loop_length, Loop, Step, DEFAULT_LOOP_CAP};
use crate::rational::{ceil_q, q, q_int, Q};
use crate::reconstruct::{
    constraint_matrix, extend_with_triple_covers, solve_lengths, CoverId, ConstraintSystem,
    TRIPLE_COVER_LIMIT,
};
use crate::valuation::is_prime;
use num_traits::{Signed, ToPrimitive};
use std::collections::{BTreeMap, BTreeSet};

/// Largest prime the oracle machinery accepts; keeps the interval
/// arithmetic inside fixed-width integers.
pub const MAX_ORACLE_PRIME: u64 = 1 << 20;

#[derive(Debug, Clone)]
pub struct RecoverConfig {
    pub p: u64,
    pub e_max: u32,
    pub i_max: usize,
    pub denom_bound: u64,
    pub max_degree: u32,
    pub loop_cap: usize,
}

impl RecoverConfig {
    pub fn new(p: u64) -> Self {
        RecoverConfig {
            p,
            e_max: 64,
            i_max: 256,
            denom_bound: 16,
            max_degree: 2,
            loop_cap: DEFAULT_LOOP_CAP,
        }
    }

    fn validate(&self) -> Result<()> {
        if !is_prime(self.p) {
            return Err(Error::NotPrime(self.p));
        }
        if self.p > MAX_ORACLE_PRIME {
            return Err(Error::Other(format!(
                "prime {} exceeds the oracle cap {MAX_ORACLE_PRIME}",
                self.p
            )));
        }
        if self.i_max == 0 {
            return Err(Error::IMaxTooSmall(0));
        }
        if self.denom_bound == 0 {
            return Err(Error::Other("denominator bound must be positive".into()));
        }
        Ok(())
    }
}

/// A truncated universal-cover window around the unrolled line of a loop:
/// the spine carries the marked lifts `z_0..z_N`, a second-loop line hangs
/// at `z_0`, and every interior vertex keeps its full base valency through
/// hanging branch stubs.
#[derive(Debug, Clone)]
pub struct CoverWindow {
    window: TreeWindow,
    z: Vec<VertexId>,
    dist_to_line: BTreeMap<VertexId, Q>,
    base_edge: BTreeMap<EdgeId, EdgeId>,
    period: Q,
    offset: Q,
}

impl CoverWindow {
    pub fn window(&self) -> &TreeWindow {
        &self.window
    }

    pub fn z_count(&self) -> usize {
        self.z.len()
    }

    pub fn z_vertex(&self, i: usize) -> &VertexId {
        &self.z[i]
    }

    /// Base edge covered by a window edge.
    pub fn base_edge(&self, e: &EdgeId) -> Option<&EdgeId> {
        self.base_edge.get(e)
    }

    /// Length of the unrolled loop (oracle-side data).
    pub fn period(&self) -> &Q {
        &self.period
    }

    /// Distance from `z_0` to the reference line (oracle-side data).
    pub fn offset(&self) -> &Q {
        &self.offset
    }

    pub fn distance_to_line(&self, v: &VertexId) -> Result<&Q> {
        self.dist_to_line
            .get(v)
            .ok_or_else(|| Error::UnknownVertex(v.clone()))
    }
}

/// Builds a window around `c` deep enough that the spine reaches metric
/// radius `depth` beyond `z_0`; errors when `depth` cannot hold one period
/// (`z_0` and `z_1`).
pub fn build_window(m: &MetricGraph, c: &Loop, depth: &Q) -> Result<CoverWindow> {
    let lg = loop_length(c, m)?;
    if depth < &lg {
        return Err(Error::DepthTooSmall(depth.clone()));
    }
    let periods = ceil_q(&(depth / &lg)).to_usize().unwrap_or(usize::MAX);
    build_window_with_periods(m, c, periods)
}

struct WalkStep {
    edge: EdgeId,
    forward: bool,
}

type Slot = (EdgeId, bool);

fn departure_slot(s: &Step) -> Slot {
    (s.edge.clone(), s.forward)
}

fn arrival_slot(s: &Step) -> Slot {
    (s.edge.clone(), !s.forward)
}

/// Non-backtracking walk from `anchor` whose first step avoids the two
/// spine slots; returns the steps and the index where the closing cycle
/// starts (the walk ends at the first repeated vertex).
fn second_loop_walk(g: &Graph, anchor: &VertexId, exclude: &[Slot]) -> Result<(Vec<WalkStep>, usize)> {
    let mut visited: BTreeMap<VertexId, usize> = BTreeMap::new();
    visited.insert(anchor.clone(), 0);
    let mut steps: Vec<WalkStep> = Vec::new();
    let mut current = anchor.clone();
    let mut forbidden: Option<Slot> = None;
    loop {
        let star = g.star(&current)?;
        let branch = star
            .iter()
            .filter(|b| b.other.is_some())
            .find(|b| {
                let slot = (b.edge.clone(), b.from_tail);
                if steps.is_empty() {
                    !exclude.contains(&slot)
                } else {
                    Some(&slot) != forbidden.as_ref()
                }
            })
            .ok_or_else(|| Error::ValencyTooLow {
                vertex: current.clone(),
                valency: star.len(),
                required: 3,
            })?;
        let to = branch.other.clone().expect("filtered");
        let step = WalkStep {
            edge: branch.edge.clone(),
            forward: branch.from_tail,
        };
        forbidden = Some((step.edge.clone(), !step.forward));
        steps.push(step);
        if let Some(&j) = visited.get(&to) {
            return Ok((steps, j));
        }
        visited.insert(to.clone(), steps.len());
        current = to;
        if steps.len() > g.vertex_count() + 2 {
            return Err(Error::Other("walk failed to close".into()));
        }
    }
}

struct WindowBuilder<'m> {
    m: &'m MetricGraph,
    g: Graph,
    lengths: BTreeMap<EdgeId, Q>,
    base_edge: BTreeMap<EdgeId, EdgeId>,
    used_slots: BTreeMap<VertexId, BTreeSet<Slot>>,
    image: BTreeMap<VertexId, VertexId>,
    vcount: usize,
    ecount: usize,
}

impl<'m> WindowBuilder<'m> {
    fn new(m: &'m MetricGraph) -> Self {
        WindowBuilder {
            m,
            g: Graph::new(),
            lengths: BTreeMap::new(),
            base_edge: BTreeMap::new(),
            used_slots: BTreeMap::new(),
            image: BTreeMap::new(),
            vcount: 0,
            ecount: 0,
        }
    }

    fn add_vertex(&mut self, image: &VertexId) -> VertexId {
        let id = VertexId::new(format!("w{}", self.vcount));
        self.vcount += 1;
        self.g.add_vertex(id.clone());
        self.image.insert(id.clone(), image.clone());
        self.used_slots.insert(id.clone(), BTreeSet::new());
        id
    }

    /// Lifts one traversal of `base` (in direction `forward`) starting at
    /// the window vertex `from`; creates the far vertex.
    fn add_step(&mut self, from: &VertexId, base: &EdgeId, forward: bool) -> Result<(VertexId, EdgeId)> {
        let (bu, bv) = self.m.graph().ends(base)?.clone();
        let (start_image, far_image) = if forward { (bu, bv) } else { (bv, bu) };
        debug_assert_eq!(
            self.image[from], start_image,
            "traversal must start at the matching endpoint"
        );
        let to = self.add_vertex(&far_image);
        let e = EdgeId::new(format!("k{}", self.ecount));
        self.ecount += 1;
        self.g.add_edge(e.clone(), from.clone(), to.clone())?;
        self.lengths.insert(e.clone(), self.m.length(base)?.clone());
        self.base_edge.insert(e.clone(), base.clone());
        self.used_slots.get_mut(from).unwrap().insert((base.clone(), forward));
        self.used_slots.get_mut(&to).unwrap().insert((base.clone(), !forward));
        Ok((to, e))
    }
}

/// Builds the window with `periods + 2` unrolled copies of the loop (one
/// margin period on each side) and `z_0..z_periods` marked.
pub(crate) fn build_window_with_periods(
    m: &MetricGraph,
    c: &Loop,
    periods: usize,
) -> Result<CoverWindow> {
    let g = m.graph();
    if g.has_cusps() {
        return Err(Error::CuspsPresent);
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if g.min_valency() < 3 {
        let v = g
            .vertices()
            .find(|v| g.valency(v).unwrap() < 3)
            .expect("witness exists")
            .clone();
        let valency = g.valency(&v)?;
        return Err(Error::ValencyTooLow {
            vertex: v,
            valency,
            required: 3,
        });
    }
    if periods == 0 {
        return Err(Error::DepthTooSmall(q_int(0)));
    }
    let lg = loop_length(c, m)?;
    let anchor = c.steps()[0].tail(g)?;

    // hunt a second loop: walk off the third branch at the anchor
    let mut spine_steps: Vec<Step> = c.steps().to_vec();
    let t = spine_steps.len();
    let out_slot = departure_slot(&spine_steps[0]);
    let in_slot = arrival_slot(&spine_steps[t - 1]);
    let (walk, j) = second_loop_walk(g, &anchor, &[out_slot.clone(), in_slot.clone()])?;
    let loop_steps: Vec<Step> = walk[j..]
        .iter()
        .map(|w| Step::new(w.edge.clone(), w.forward))
        .collect();
    let t_l = loop_steps.len();
    let closure = arrival_slot(&loop_steps[t_l - 1]);

    // if the reference line closes through the forward spine slot, flip
    // the spine orientation so any overlap lies on the negative side
    if j == 0 && closure == departure_slot(&spine_steps[0]) {
        spine_steps = spine_steps.iter().rev().map(Step::reversed).collect();
    }

    let mut b = WindowBuilder::new(m);

    // spine: (periods + 2) * t steps, z_i at index (i + 1) * t
    let n_steps = (periods + 2) * t;
    let mut spine_vertices = Vec::with_capacity(n_steps + 1);
    let mut spine_edges = Vec::with_capacity(n_steps);
    let first_image = spine_steps[0].tail(g)?;
    let mut cur = b.add_vertex(&first_image);
    spine_vertices.push(cur.clone());
    for idx in 0..n_steps {
        let s = &spine_steps[idx % t];
        let (next, e) = b.add_step(&cur, &s.edge, s.forward)?;
        spine_vertices.push(next.clone());
        spine_edges.push(e);
        cur = next;
    }
    let z: Vec<VertexId> = (0..=periods)
        .map(|i| spine_vertices[(i + 1) * t].clone())
        .collect();
    let z0 = z[0].clone();

    // connector (walk prefix before the cycle closes)
    let mut attach = z0.clone();
    for w in &walk[..j] {
        let (next, _) = b.add_step(&attach, &w.edge, w.forward)?;
        attach = next;
    }

    // backward ray of the reference line; when it closes through the
    // negative spine slot it first runs along the built spine
    let backward: Vec<Step> = loop_steps.iter().rev().map(Step::reversed).collect();
    let mut overlap = 0usize;
    if j == 0 && arrival_slot(&loop_steps[t_l - 1]) == arrival_slot(&spine_steps[t - 1]) {
        while overlap < t_l.saturating_sub(1) && overlap < t - 1 {
            let want = &backward[overlap];
            let spine_back = spine_steps[t - 1 - overlap].reversed();
            if want.edge == spine_back.edge && want.forward == spine_back.forward {
                overlap += 1;
            } else {
                break;
            }
        }
        debug_assert!(overlap >= 1, "closing slot matched the negative spine");
    }
    let mut line_steps_rev: Vec<Step> = Vec::new(); // from the attach outward, backward
    for idx in 0..overlap {
        // reuse the spine edge below z0
        line_steps_rev.push(Step::new(spine_edges[t - 1 - idx].clone(), false));
    }
    let mut bcur = if overlap > 0 {
        spine_vertices[t - overlap].clone()
    } else {
        attach.clone()
    };
    for qi in overlap..=t_l {
        let s = &backward[qi % t_l];
        let (next, e) = b.add_step(&bcur, &s.edge, s.forward)?;
        line_steps_rev.push(Step::new(e, true));
        bcur = next;
    }
    let backward_leaf = bcur;

    // forward ray
    let mut fsteps: Vec<Step> = Vec::new();
    let mut fcur = attach.clone();
    for qi in 0..=t_l {
        let s = &loop_steps[qi % t_l];
        let (next, e) = b.add_step(&fcur, &s.edge, s.forward)?;
        fsteps.push(Step::new(e, true));
        fcur = next;
    }
    let forward_leaf = fcur;

    // assemble the marked line from the backward leaf to the forward leaf
    let mut line: Vec<Step> = Vec::new();
    for s in line_steps_rev.iter().rev() {
        line.push(Step::new(s.edge.clone(), !s.forward));
    }
    line.extend(fsteps);

    // truncation leaves stay bare; everything else gets its missing
    // branches back as hanging stubs
    let mut boundary: BTreeSet<VertexId> = BTreeSet::new();
    boundary.insert(spine_vertices[0].clone());
    boundary.insert(spine_vertices[n_steps].clone());
    boundary.insert(backward_leaf);
    boundary.insert(forward_leaf);
    let settled: Vec<VertexId> = b.g.vertices().cloned().collect();
    for w in settled {
        if boundary.contains(&w) {
            continue;
        }
        let image = b.image[&w].clone();
        for branch in g.star(&image)? {
            if branch.other.is_none() {
                continue;
            }
            let slot = (branch.edge.clone(), branch.from_tail);
            if !b.used_slots[&w].contains(&slot) {
                let (leaf, _) = b.add_step(&w, &branch.edge, branch.from_tail)?;
                boundary.insert(leaf);
            }
        }
    }

    let tree = MetricGraph::new(b.g, b.lengths)?;
    let window = TreeWindow::new(tree, boundary, Some(line))?;
    let line_vertices = window.line_vertices()?;
    let dist_to_line = tree_distances_to_connected_set(window.tree(), &line_vertices)?;
    let offset = dist_to_line[&z0].clone();
    if cfg!(debug_assertions) {
        for (i, zi) in z.iter().enumerate() {
            let expected = &offset + &lg * q_int(i as i64);
            debug_assert_eq!(dist_to_line[zi], expected, "line distance drifts at z_{i}");
        }
    }
    Ok(CoverWindow {
        window,
        z,
        dist_to_line,
        base_edge: b.base_edge,
        period: lg,
        offset,
    })
}

/// Boolean interface the recovery side is allowed to consume.
pub trait SplitQuery {
    fn prime(&self) -> u64;
    fn z_count(&self) -> usize;
    /// Whether the `p^e`-covering is split over `z_index`.
    fn is_split(&self, z_index: usize, e: u32) -> bool;
}

/// The geometric split oracle: answers are computed solely as
/// `d(z, line) > e + 1/(p-1)` on the hidden window metric. The largest
/// splitting exponent per marked vertex is precomputed from the hidden
/// distances once, so each query is an integer comparison.
pub struct SplitOracle {
    window: CoverWindow,
    p: u64,
    /// Largest e with `d(z_i, line) > e + 1/(p-1)`; -1 when none.
    split_cap: Vec<i64>,
}

impl SplitOracle {
    pub fn new(window: CoverWindow, p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p > MAX_ORACLE_PRIME {
            return Err(Error::Other(format!(
                "prime {p} exceeds the oracle cap {MAX_ORACLE_PRIME}"
            )));
        }
        let c = q(1, p as i64 - 1);
        let split_cap = window
            .z
            .iter()
            .map(|zi| {
                // e < d - c, so the largest integer e is ceil(d - c) - 1
                let margin = &window.dist_to_line[zi] - &c;
                ceil_q(&margin).to_i64().unwrap_or(i64::MAX) - 1
            })
            .collect();
        Ok(SplitOracle {
            window,
            p,
            split_cap,
        })
    }
}

impl SplitQuery for SplitOracle {
    fn prime(&self) -> u64 {
        self.p
    }

    fn z_count(&self) -> usize {
        self.window.z_count()
    }

    fn is_split(&self, z_index: usize, e: u32) -> bool {
        e as i64 <= self.split_cap[z_index]
    }
}

/// Synthetic oracle following the defining rule on the arithmetic
/// distance sequence `d_i = offset + i * step`; test instrumentation.
pub struct SyntheticOracle {
    pub p: u64,
    pub offset: Q,
    pub step: Q,
    pub count: usize,
}

impl SplitQuery for SyntheticOracle {
    fn prime(&self) -> u64 {
        self.p
    }

    fn z_count(&self) -> usize {
        self.count
    }

    fn is_split(&self, z_index: usize, e: u32) -> bool {
        let d = &self.offset + &self.step * q_int(z_index as i64);
        d > q_int(e as i64) + q(1, self.p as i64 - 1)
    }
}

/// `max(1, ceil(d - 1/(p-1)))`: the value `splitting_index` recovers when
/// the oracle follows the defining rule at distance `d`.
pub fn splitting_index_formula(p: u64, d: &Q) -> u32 {
    let c = q(1, p as i64 - 1);
    let x = d - c;
    if !x.is_positive() {
        return 1;
    }
    ceil_q(&x).to_u32().unwrap_or(u32::MAX).max(1)
}

/// Smallest torsor exponent that fails to split over `z`, scanning
/// `e = 1, 2, ...`; equals `max(1, ceil(d(z, line) - 1/(p-1)))` under the
/// oracle's defining rule. Errors out when the covering still splits at
/// `e_max`.
pub fn splitting_index<O: SplitQuery>(oracle: &O, z_index: usize, e_max: u32) -> Result<u32> {
    for e in 1..=e_max {
        if !oracle.is_split(z_index, e) {
            return Ok(e);
        }
    }
    Err(Error::EMaxReached(e_max))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Frac {
    num: i128,
    den: i128, // > 0
}

impl Frac {
    fn new(num: i128, den: i128) -> Frac {
        debug_assert!(den > 0);
        Frac { num, den }
    }

    fn cmp(&self, other: &Frac) -> std::cmp::Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }

    fn to_q(self) -> Q {
        q(self.num as i64, self.den as i64)
    }
}

#[derive(Clone, Copy, Debug)]
struct Bound {
    value: Frac,
    strict: bool,
}

/// Recovers the loop length from splitting indices along the spine.
///
/// Each observed index pins `i * lg + rho` (with `rho = r - 1/(p-1)`
/// unknown) inside a unit window, so every index pair yields upper and
/// lower bounds on `lg`; their intersection is the exact feasible
/// interval, and the result is the unique rational with denominator at
/// most `denom_bound` inside it. In particular the single-index estimate
/// `m(z_i)/i` deviates from `lg` by less than `(|r - 1/(p-1)| + 1) / i`.
pub fn recover_loop_length<O: SplitQuery>(
    oracle: &O,
    i_max: usize,
    e_max: u32,
    denom_bound: u64,
) -> Result<Q> {
    if i_max == 0 {
        return Err(Error::IMaxTooSmall(0));
    }
    if denom_bound == 0 {
        return Err(Error::Other("denominator bound must be positive".into()));
    }
    let p = oracle.prime();
    let last = i_max.min(oracle.z_count().saturating_sub(1));

    // m is nondecreasing along the spine, so scans resume where they left off
    let mut ms: Vec<u32> = Vec::new();
    let mut e = 1u32;
    'indices: for i in 0..=last {
        loop {
            if e > e_max {
                break 'indices;
            }
            if oracle.is_split(i, e) {
                e += 1;
            } else {
                break;
            }
        }
        ms.push(e);
    }
    if ms.len() < 2 {
        return Err(Error::EMaxReached(e_max));
    }

    let pm1 = (p - 1) as i128;
    let mut lo = Bound {
        value: Frac::new(0, 1),
        strict: true,
    };
    let mut hi: Option<Bound> = None;
    let raise = |bound: &mut Bound, cand: Bound| {
        let ord = cand.value.cmp(&bound.value);
        if ord == std::cmp::Ordering::Greater
            || (ord == std::cmp::Ordering::Equal && cand.strict && !bound.strict)
        {
            *bound = cand;
        }
    };
    let lower = |hi: &mut Option<Bound>, cand: Bound| {
        let replace = match hi {
            None => true,
            Some(b) => {
                let ord = cand.value.cmp(&b.value);
                ord == std::cmp::Ordering::Less
                    || (ord == std::cmp::Ordering::Equal && cand.strict && !b.strict)
            }
        };
        if replace {
            *hi = Some(cand);
        }
    };
    for i in 0..ms.len() {
        for jdx in (i + 1)..ms.len() {
            let gap = (jdx - i) as i128;
            let diff = ms[jdx] as i128 - ms[i] as i128;
            if ms[jdx] >= 2 {
                raise(
                    &mut lo,
                    Bound {
                        value: Frac::new(diff - 1, gap),
                        strict: true,
                    },
                );
            }
            if ms[i] >= 2 {
                lower(
                    &mut hi,
                    Bound {
                        value: Frac::new(diff + 1, gap),
                        strict: true,
                    },
                );
            }
        }
    }
    // r >= 0 gives rho >= -1/(p-1): lg <= (m_j + 1/(p-1)) / j
    for (jdx, mj) in ms.iter().enumerate().skip(1) {
        lower(
            &mut hi,
            Bound {
                value: Frac::new(pm1 * *mj as i128 + 1, pm1 * jdx as i128),
                strict: false,
            },
        );
    }
    let hi = hi.expect("at least one upper bound from rho >= -1/(p-1)");

    let mut candidates: BTreeSet<(i128, i128)> = BTreeSet::new();
    for den in 1..=denom_bound as i128 {
        // smallest numerator strictly above lo
        let mut num = lo.value.num * den / lo.value.den;
        while Frac::new(num, den).cmp(&lo.value) != std::cmp::Ordering::Greater {
            num += 1;
        }
        loop {
            let cand = Frac::new(num, den);
            let ord = cand.cmp(&hi.value);
            let inside = match ord {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Equal => !hi.strict,
                std::cmp::Ordering::Greater => false,
            };
            if !inside {
                break;
            }
            if num > 0 {
                let g = gcd_i128(num, den);
                candidates.insert((num / g, den / g));
            }
            num += 1;
        }
    }
    match candidates.len() {
        1 => {
            let (num, den) = candidates.into_iter().next().expect("one candidate");
            Ok(q(num as i64, den as i64))
        }
        0 => Err(Error::NoCandidate {
            denom_bound,
            lo: lo.value.to_q(),
            hi: hi.value.to_q(),
        }),
        n => Err(Error::Ambiguous {
            denom_bound,
            lo: lo.value.to_q(),
            hi: hi.value.to_q(),
            count: n,
        }),
    }
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a.max(1)
}

/// Outcome of the full pipeline.
#[derive(Debug, Clone)]
pub struct RecoveryOutcome {
    pub recovered: MetricGraph,
    pub rows: usize,
    pub degree_used: u32,
}

fn periods_for(cfg: &RecoverConfig, target: &MetricGraph, lg: &Q) -> usize {
    // deep enough that the e budget, not the window, truncates the scan:
    // the walk keeps the line offset below the total edge length
    let depth = q_int(cfg.e_max as i64 + 2) + target.total_length() + lg;
    let periods = ceil_q(&(depth / lg)).to_usize().unwrap_or(usize::MAX);
    periods.clamp(1, cfg.i_max)
}

fn recover_rhs_for(
    cfg: &RecoverConfig,
    target: &MetricGraph,
    cycle: &Loop,
) -> Result<Q> {
    let periods = periods_for(cfg, target, &loop_length(cycle, target)?);
    let window = build_window_with_periods(target, cycle, periods)?;
    let oracle = SplitOracle::new(window, cfg.p)?;
    recover_loop_length(&oracle, cfg.i_max, cfg.e_max, cfg.denom_bound)
}

/// Runs the whole recovery: assemble the degree-2 constraint system of the
/// hidden graph's structure, recover every loop length through the split
/// oracle, and solve for the edge lengths. Degree-3 covers are brought in
/// only if the degree-2 system is rank deficient. The hidden lengths are
/// read exclusively by the oracle side.
pub fn recover_all(hidden: &MetricGraph, cfg: &RecoverConfig) -> Result<RecoveryOutcome> {
    cfg.validate()?;
    let structure = hidden.graph();
    if structure.min_valency() < 3 {
        let v = structure
            .vertices()
            .find(|v| structure.valency(v).unwrap() < 3)
            .expect("witness exists")
            .clone();
        let valency = structure.valency(&v)?;
        return Err(Error::ValencyTooLow {
            vertex: v,
            valency,
            required: 3,
        });
    }
    let mut sys: ConstraintSystem = constraint_matrix(structure, cfg.loop_cap)?;
    let double_covers = enumerate_connected_double_covers(structure)?;
    let mut lifted: BTreeMap<usize, MetricGraph> = BTreeMap::new();
    for (k, dc) in double_covers.iter().enumerate() {
        lifted.insert(k, dc.lift_metric(hidden)?);
    }
    let fill = |sys: &mut ConstraintSystem, from: usize, lifted3: &BTreeMap<usize, MetricGraph>| -> Result<()> {
        for idx in from..sys.rows.len() {
            let source = sys.sources[idx].clone();
            let target = match &source.cover {
                CoverId::Base => hidden,
                CoverId::Double(k) => &lifted[k],
                CoverId::Triple(k) => &lifted3[k],
            };
            sys.rows[idx].rhs = Some(recover_rhs_for(cfg, target, &source.cycle)?);
        }
        Ok(())
    };
    let no_triples = BTreeMap::new();
    fill(&mut sys, 0, &no_triples)?;
    let mut degree_used = 2;
    let lengths = match solve_lengths(&sys) {
        Ok(lengths) => lengths,
        Err(Error::RankDeficient { .. }) if cfg.max_degree >= 3 => {
            degree_used = 3;
            let before = sys.rows.len();
            extend_with_triple_covers(&mut sys, structure, cfg.loop_cap, TRIPLE_COVER_LIMIT)?;
            let triples =
                crate::covering::enumerate_connected_triple_covers(structure, TRIPLE_COVER_LIMIT)?;
            let mut lifted3 = BTreeMap::new();
            for (k, tc) in triples.iter().enumerate() {
                lifted3.insert(k, tc.lift_metric(hidden)?);
            }
            fill(&mut sys, before, &lifted3)?;
            solve_lengths(&sys)?
        }
        Err(e) => return Err(e),
    };
    let recovered = MetricGraph::new(structure.clone(), lengths)?;
    Ok(RecoveryOutcome {
        recovered,
        rows: sys.rows.len(),
        degree_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{dumbbell_graph, k4_graph, theta_graph};
    use crate::loops::enumerate_loops;

    fn metric(g: &Graph, lens: &[(&str, Q)]) -> MetricGraph {
        let lengths = lens
            .iter()
            .map(|(e, l)| (EdgeId::new(*e), l.clone()))
            .collect();
        MetricGraph::new(g.clone(), lengths).unwrap()
    }

    fn theta_metric() -> MetricGraph {
        let g = theta_graph();
        metric(&g, &[("a", q_int(1)), ("b", q_int(2)), ("c", q_int(3))])
    }

    #[test]
    fn window_spine_has_expected_period() {
        let m = theta_metric();
        let loops = enumerate_loops(m.graph(), 100).unwrap();
        let ab = loops
            .iter()
            .find(|c| {
                let mut ids: Vec<_> = c.sorted_edges();
                ids == vec![EdgeId::new("a"), EdgeId::new("b")]
            })
            .unwrap();
        let w = build_window(&m, ab, &q_int(10)).unwrap();
        assert_eq!(w.period(), &q_int(3));
        assert!(w.z_count() >= 2);
        for i in 0..w.z_count() {
            let d = w.distance_to_line(w.z_vertex(i)).unwrap();
            assert_eq!(d, &(w.offset() + q_int(i as i64) * q_int(3)));
        }
    }

    #[test]
    fn window_depth_errors() {
        let m = theta_metric();
        let loops = enumerate_loops(m.graph(), 100).unwrap();
        assert!(matches!(
            build_window(&m, &loops[0], &q_int(0)),
            Err(Error::DepthTooSmall(_))
        ));
    }

    #[test]
    fn dumbbell_window_unrolls_self_loop() {
        let g = dumbbell_graph();
        let m = metric(&g, &[("a", q_int(1)), ("b", q_int(5)), ("c", q_int(1))]);
        let loops = enumerate_loops(&g, 100).unwrap();
        let a_loop = loops
            .iter()
            .find(|c| c.sorted_edges() == vec![EdgeId::new("a")])
            .unwrap();
        let w = build_window(&m, a_loop, &q_int(10)).unwrap();
        assert_eq!(w.period(), &q_int(1));
        // the second loop sits across the bridge: r = 5
        assert_eq!(w.offset(), &q_int(5));
        for i in 0..w.z_count() {
            let d = w.distance_to_line(w.z_vertex(i)).unwrap();
            assert_eq!(d, &(q_int(5) + q_int(i as i64)));
        }
        // stubs at each period: the bridge branch hangs off every z_i
        let tree = w.window().graph();
        for i in 0..w.z_count() {
            assert_eq!(tree.valency(w.z_vertex(i)).unwrap(), 3);
        }
    }

    #[test]
    fn theta_window_line_shares_an_edge() {
        // the second loop of a theta shares edges with the measured one;
        // the overlap handling must keep distances arithmetic
        let m = theta_metric();
        let loops = enumerate_loops(m.graph(), 100).unwrap();
        for c in &loops {
            let w = build_window(&m, c, &q_int(12)).unwrap();
            let lg = w.period().clone();
            for i in 0..w.z_count() {
                let d = w.distance_to_line(w.z_vertex(i)).unwrap();
                assert_eq!(d, &(w.offset() + q_int(i as i64) * &lg));
            }
        }
    }

    #[test]
    fn splitting_index_matches_formula() {
        for (p, d) in [
            (2u64, q(7, 2)),
            (3, q(3, 2)),
            (2, q_int(0)),
            (5, q(49, 4)),
            (3, q(5, 2)),
        ] {
            let oracle = SyntheticOracle {
                p,
                offset: d.clone(),
                step: q_int(1),
                count: 4,
            };
            let got = splitting_index(&oracle, 0, 64).unwrap();
            assert_eq!(got, splitting_index_formula(p, &d), "p={p} d={d}");
        }
        // p=2, d=7/2: t = 5/2, m = 3
        assert_eq!(splitting_index_formula(2, &q(7, 2)), 3);
        // p=3, d=3/2: t = 1, m = 1
        assert_eq!(splitting_index_formula(3, &q(3, 2)), 1);
        // on the line
        assert_eq!(splitting_index_formula(5, &q_int(0)), 1);
    }

    #[test]
    fn splitting_index_e_max_exhaustion() {
        let oracle = SyntheticOracle {
            p: 2,
            offset: q_int(100),
            step: q_int(1),
            count: 4,
        };
        assert!(matches!(
            splitting_index(&oracle, 0, 8),
            Err(Error::EMaxReached(8))
        ));
    }

    #[test]
    fn recover_length_from_synthetic_sequences() {
        // lg = 2, r = 1/2, p = 2: m(z_i) = max(1, ceil(2i - 1/2)) = 2i
        let oracle = SyntheticOracle {
            p: 2,
            offset: q(1, 2),
            step: q_int(2),
            count: 64,
        };
        assert_eq!(recover_loop_length(&oracle, 10, 64, 4).unwrap(), q_int(2));

        // lg = 3/2 with denominator bound 2 and i_max 16
        let oracle = SyntheticOracle {
            p: 2,
            offset: q(1, 2),
            step: q(3, 2),
            count: 64,
        };
        assert_eq!(recover_loop_length(&oracle, 16, 64, 2).unwrap(), q(3, 2));
    }

    #[test]
    fn recover_length_argument_validation() {
        let oracle = SyntheticOracle {
            p: 2,
            offset: q_int(0),
            step: q_int(1),
            count: 64,
        };
        assert!(matches!(
            recover_loop_length(&oracle, 0, 64, 4),
            Err(Error::IMaxTooSmall(0))
        ));
    }

    #[test]
    fn recover_all_theta() {
        let hidden = theta_metric();
        let cfg = RecoverConfig {
            denom_bound: 2,
            ..RecoverConfig::new(2)
        };
        let out = recover_all(&hidden, &cfg).unwrap();
        assert_eq!(out.recovered, hidden);
        assert_eq!(out.degree_used, 2);
    }

    #[test]
    fn recover_all_dumbbell() {
        let g = dumbbell_graph();
        let hidden = metric(&g, &[("a", q_int(1)), ("b", q_int(5)), ("c", q_int(1))]);
        let cfg = RecoverConfig {
            denom_bound: 2,
            ..RecoverConfig::new(3)
        };
        let out = recover_all(&hidden, &cfg).unwrap();
        assert_eq!(out.recovered, hidden);
    }

    #[test]
    fn recover_all_k4() {
        let g = k4_graph();
        let hidden = metric(
            &g,
            &[
                ("e1", q(1, 2)),
                ("e2", q_int(1)),
                ("e3", q(1, 2)),
                ("e4", q_int(1)),
                ("e5", q(1, 2)),
                ("e6", q_int(1)),
            ],
        );
        let cfg = RecoverConfig {
            denom_bound: 2,
            ..RecoverConfig::new(2)
        };
        let out = recover_all(&hidden, &cfg).unwrap();
        assert_eq!(out.recovered, hidden);
    }

    #[test]
    fn recover_all_rejects_low_valency() {
        let mut g = Graph::new();
        g.add_vertex("a");
        g.add_vertex("b");
        g.add_edge("e1", "a", "b").unwrap();
        g.add_edge("e2", "a", "b").unwrap();
        let m = metric(&g, &[("e1", q_int(1)), ("e2", q_int(1))]);
        assert!(matches!(
            recover_all(&m, &RecoverConfig::new(2)),
            Err(Error::ValencyTooLow { .. })
        ));
    }
}
