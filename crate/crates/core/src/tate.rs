//! Interval calculus for punctured Tate curves: parameter selection
//! (n, l, m), the two splitting intervals of the glued order-p torsors on
//! the mn-circle reduction, the distinguishing procedure for two curves
//! with different period valuations, and the preimage-count witness for
//! punctured projective lines.

use crate::error::{Error, Result};
use crate::graph::{Graph, MetricGraph};
use crate::rational::{ceil_q, floor_q, format_q, q, q_int, Q};
use crate::valuation::{is_prime, preimage_count, KummerQuery};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use std::collections::BTreeSet;

/// Skeleton edge length of a projective line minus four points with
/// cross-ratio valuation `v > 0`; good reduction (`v <= 0`) has no edge.
pub fn p1_edge_length(v: &Q) -> Result<Q> {
    if !v.is_positive() {
        return Err(Error::NoEdge(v.clone()));
    }
    Ok(v.clone())
}

/// Parameters for the circle-reduction torsor construction over a curve
/// with period valuation `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TateParams {
    pub p: u64,
    pub v: Q,
    pub n: u64,
    pub l: u64,
    pub m: u64,
}

impl TateParams {
    pub fn new(p: u64, v: Q, n: u64, l: u64, m: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if !v.is_positive() {
            return Err(Error::NegativeValuation(v));
        }
        if n == 0 || n.gcd(&p) != 1 {
            return Err(Error::Other(format!("n = {n} must be nonzero and prime to p = {p}")));
        }
        let params = TateParams { p, v, n, l, m };
        if q_int(l as i64) < q_int(1) + params.overhang() * q_int(2) {
            return Err(Error::Other(format!(
                "l = {l} violates l >= 1 + 2np/((p-1)v)"
            )));
        }
        if q_int(m as i64) < q(2 * l as i64, n as i64) {
            return Err(Error::Other(format!("m = {m} violates m >= 2l/n")));
        }
        Ok(params)
    }

    /// The margin `np/(v(p-1))` eaten from each end of an interval.
    pub fn overhang(&self) -> Q {
        q((self.n * self.p) as i64, self.p as i64 - 1) / &self.v
    }

    pub fn circle_size(&self) -> u64 {
        self.m * self.n
    }
}

/// A closed rational interval together with its integer points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitInterval {
    pub lo: Q,
    pub hi: Q,
}

impl SplitInterval {
    pub fn length(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn integer_points(&self) -> BTreeSet<i64> {
        let lo = ceil_q(&self.lo).to_i64().expect("desk scale");
        let hi = floor_q(&self.hi).to_i64().expect("desk scale");
        (lo..=hi).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }
}

impl std::fmt::Display for SplitInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", format_q(&self.lo), format_q(&self.hi))
    }
}

/// Picks the minimal parameters shared by the two curves: smallest `n`
/// prime to `p` with `n >= va*vb*(p-1)/(|vb-va|*p)`, then smallest `l`
/// with `l >= 1 + 2np/((p-1)v)` for both valuations, then smallest
/// `m >= 2l/n`.
pub fn choose_parameters(va: &Q, vb: &Q, p: u64) -> Result<(TateParams, TateParams)> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if !va.is_positive() {
        return Err(Error::NegativeValuation(va.clone()));
    }
    if !vb.is_positive() {
        return Err(Error::NegativeValuation(vb.clone()));
    }
    if va == vb {
        return Err(Error::EqualValuations(va.clone()));
    }
    let gap = (vb - va).abs();
    let bound = va * vb * q(p as i64 - 1, p as i64) / gap;
    let mut n = ceil_q(&bound).to_u64().unwrap_or(1).max(1);
    while n % p == 0 {
        n += 1;
    }
    let vmin = va.min(vb).clone();
    let l_bound = q_int(1) + q((2 * n * p) as i64, p as i64 - 1) / &vmin;
    let l = ceil_q(&l_bound).to_u64().expect("desk scale");
    let m_bound = q(2 * l as i64, n as i64);
    let m = ceil_q(&m_bound).to_u64().expect("desk scale");
    Ok((
        TateParams::new(p, va.clone(), n, l, m)?,
        TateParams::new(p, vb.clone(), n, l, m)?,
    ))
}

/// Splitting range of the torsor ramified at the cusps over vertices 0 and
/// l, along the long arc: `[l + np/(v(p-1)), mn - np/(v(p-1))]`.
pub fn split_interval_long_arc(params: &TateParams) -> SplitInterval {
    let d = params.overhang();
    SplitInterval {
        lo: q_int(params.l as i64) + &d,
        hi: q_int(params.circle_size() as i64) - &d,
    }
}

/// Splitting range along the short arc: `[np/(v(p-1)), l - np/(v(p-1))]`.
pub fn split_interval_short_arc(params: &TateParams) -> SplitInterval {
    let d = params.overhang();
    SplitInterval {
        lo: d.clone(),
        hi: q_int(params.l as i64) - &d,
    }
}

/// Report produced by [`distinguish`].
#[derive(Debug, Clone)]
pub struct DistinguishReport {
    pub alpha: TateParams,
    pub beta: TateParams,
    pub long_alpha: SplitInterval,
    pub long_beta: SplitInterval,
    pub short_alpha: SplitInterval,
    pub short_beta: SplitInterval,
    pub sets_differ: bool,
    /// `2np/(v_min(p-1)) - 2np/(v_max(p-1))`, guaranteed >= 2.
    pub length_gap: Q,
}

/// Runs the full distinguishing procedure for period valuations
/// `va != vb`: choose shared parameters, compute both long-arc splitting
/// intervals, and report that their integer-point sets differ.
pub fn distinguish(va: &Q, vb: &Q, p: u64) -> Result<DistinguishReport> {
    let (alpha, beta) = choose_parameters(va, vb, p)?;
    let long_alpha = split_interval_long_arc(&alpha);
    let long_beta = split_interval_long_arc(&beta);
    let short_alpha = split_interval_short_arc(&alpha);
    let short_beta = split_interval_short_arc(&beta);
    let sets_differ = long_alpha.integer_points() != long_beta.integer_points();
    let small = if va < vb { &alpha } else { &beta };
    let large = if va < vb { &beta } else { &alpha };
    let length_gap = small.overhang() * q_int(2) - large.overhang() * q_int(2);
    Ok(DistinguishReport {
        alpha,
        beta,
        long_alpha,
        long_beta,
        short_alpha,
        short_beta,
        sets_differ,
        length_gap,
    })
}

/// The circle reduction: `mn` vertices joined in a cycle with edge length
/// `v/n` and `n` cusps abutting each vertex.
pub fn circle_graph(v: &Q, n: u64, m: u64) -> Result<MetricGraph> {
    if !v.is_positive() {
        return Err(Error::NegativeValuation(v.clone()));
    }
    if n == 0 || m == 0 {
        return Err(Error::Other("n and m must be positive".into()));
    }
    let size = m * n;
    let mut g = Graph::new();
    for i in 0..size {
        g.add_vertex(format!("x{i}"));
    }
    let mut lengths = std::collections::BTreeMap::new();
    let step = v / q_int(n as i64);
    for i in 0..size {
        let e = g.add_edge(
            format!("ring{i}"),
            format!("x{i}"),
            format!("x{}", (i + 1) % size),
        )?;
        lengths.insert(e, step.clone());
    }
    for i in 0..size {
        for j in 0..n {
            g.add_cusp(format!("cusp{i}.{j}"), format!("x{i}"))?;
        }
    }
    MetricGraph::new(g, lengths)
}

/// The three splitting-vertex patterns that form a basis of the space of
/// order-p torsors unramified outside the two chosen cusps: the long-arc
/// integer points, the short-arc integer points, and all vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisPatterns {
    pub long_arc: BTreeSet<i64>,
    pub short_arc: BTreeSet<i64>,
    pub everywhere: BTreeSet<i64>,
}

pub fn torsor_basis_patterns(params: &TateParams) -> Result<BasisPatterns> {
    let long = split_interval_long_arc(params);
    let short = split_interval_short_arc(params);
    let long_arc = long.integer_points();
    let short_arc = short.integer_points();
    if long_arc.is_empty() || short_arc.is_empty() {
        return Err(Error::EmptyInterval);
    }
    if !long_arc.is_disjoint(&short_arc) {
        return Err(Error::Other("splitting intervals overlap".into()));
    }
    let everywhere = (0..params.circle_size() as i64).collect();
    Ok(BasisPatterns {
        long_arc,
        short_arc,
        everywhere,
    })
}

/// Outcome of the preimage-count comparison for two punctured lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PreimageWitness {
    /// Preimage counts of the two disc points under `z -> z^(p^e)` with
    /// `e = vb - 1`; they differ whenever `p != 2`.
    Counts { alpha: BigUint, beta: BigUint },
    /// `p = 2`, `e = 1`: the degenerate case decided by the shapes of the
    /// two reductions rather than by counts.
    Unsupported,
}

/// Compares fiber cardinalities over the disc points of radius `p^-va`
/// and `p^-vb` under the canonical degree-`p^e` cover, `e = vb - 1`.
/// Requires integer valuations `0 < va < vb`.
pub fn preimage_witness(va: &Q, vb: &Q, p: u64) -> Result<PreimageWitness> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let bad = || Error::BadWitnessPair(va.clone(), vb.clone());
    if !va.is_integer() || !vb.is_integer() || !va.is_positive() || va >= vb {
        return Err(bad());
    }
    let e = (vb - q_int(1)).to_integer().to_u32().ok_or_else(bad)?;
    if p == 2 && e == 1 {
        return Ok(PreimageWitness::Unsupported);
    }
    let alpha = preimage_count(&KummerQuery::new(p, e, va.clone())?);
    let beta = preimage_count(&KummerQuery::new(p, e, vb.clone())?);
    if p != 2 && alpha == beta {
        return Err(Error::Other(
            "preimage counts coincide where the law forbids it".into(),
        ));
    }
    Ok(PreimageWitness::Counts { alpha, beta })
}
