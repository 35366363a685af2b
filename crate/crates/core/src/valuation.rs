//! Exact valuation arithmetic and the splitting law of the cyclic cover
//! `z -> z^(p^e)` over a disc point `B(1, r)` with `r = p^(-v)`.
//!
//! The number of preimage discs is `p^i` with `i = clamp(ceil(v - p/(p-1)), 0, e)`:
//! peeling one `z -> z^p` layer multiplies the fiber by `p` exactly while
//! the current valuation stays strictly above the knee `p/(p-1)`, and each
//! such layer lowers the valuation by 1. Interval boundaries tile because
//! `p/(p-1) = 1 + 1/(p-1)`; every boundary valuation is assigned to the
//! smaller preimage count, which is the one convention under which the
//! layer-by-layer composition law holds exactly. The cover is split (full
//! fiber of `p^e`) iff `v > e + 1/(p-1)` strictly.

use crate::error::{Error, Result};
use crate::rational::{ceil_q, q, Q};
use num_bigint::BigUint;
use num_traits::{Signed, ToPrimitive};
use std::cmp::Ordering;
use std::fmt;

/// An exact rational valuation or +infinity; radii are carried as
/// `r = p^(-Val)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Val {
    Finite(Q),
    Infinite,
}

impl Val {
    pub fn finite(x: Q) -> Self {
        Val::Finite(x)
    }

    pub fn as_finite(&self) -> Option<&Q> {
        match self {
            Val::Finite(x) => Some(x),
            Val::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Val::Infinite)
    }

    /// Addition; +infinity absorbs.
    pub fn add(&self, other: &Val) -> Val {
        match (self, other) {
            (Val::Finite(a), Val::Finite(b)) => Val::Finite(a + b),
            _ => Val::Infinite,
        }
    }

    pub fn sub_finite(&self, other: &Q) -> Val {
        match self {
            Val::Finite(a) => Val::Finite(a - other),
            Val::Infinite => Val::Infinite,
        }
    }
}

impl PartialOrd for Val {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Val {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Val::Infinite, Val::Infinite) => Ordering::Equal,
            (Val::Infinite, Val::Finite(_)) => Ordering::Greater,
            (Val::Finite(_), Val::Infinite) => Ordering::Less,
            (Val::Finite(a), Val::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Finite(x) => write!(f, "{}", crate::rational::format_q(x)),
            Val::Infinite => f.write_str("inf"),
        }
    }
}

impl From<Q> for Val {
    fn from(x: Q) -> Self {
        Val::Finite(x)
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// The splitting threshold `e + 1/(p-1)`.
pub fn split_threshold(p: u64, e: u32) -> Result<Q> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(q(e as i64, 1) + q(1, p as i64 - 1))
}

/// A query against the splitting law: prime `p`, exponent `e`, and the
/// valuation `v >= 0` of the disc radius.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KummerQuery {
    pub p: u64,
    pub e: u32,
    pub v: Q,
}

impl KummerQuery {
    pub fn new(p: u64, e: u32, v: Q) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if v.is_negative() {
            return Err(Error::NegativeValuation(v));
        }
        Ok(KummerQuery { p, e, v })
    }
}

/// The exponent `i` with `0 <= i <= e` such that the disc has `p^i`
/// preimages. Nondecreasing in `v`; zero at `v = 0`; equals `e` strictly
/// above the threshold `e + 1/(p-1)`.
pub fn preimage_exponent(query: &KummerQuery) -> u32 {
    let KummerQuery { p, e, v } = query;
    if *e == 0 {
        return 0;
    }
    let knee = q(*p as i64, *p as i64 - 1);
    let above = v - knee;
    if !above.is_positive() {
        return 0;
    }
    let i = ceil_q(&above).to_u32().unwrap_or(*e);
    i.min(*e)
}

/// Number of preimage discs, `p^preimage_exponent`.
pub fn preimage_count(query: &KummerQuery) -> BigUint {
    BigUint::from(query.p).pow(preimage_exponent(query))
}

/// Whether the cover is split over the disc: full fiber of `p^e` points.
/// The headline inequality is strict; `e = 0` is the identity cover,
/// split everywhere.
pub fn is_split_ball(query: &KummerQuery) -> bool {
    if query.e == 0 {
        return true;
    }
    let threshold = q(query.e as i64, 1) + q(1, query.p as i64 - 1);
    query.v > threshold
}

/// Valuation of the preimage-disc radius after pulling a disc of valuation
/// `v` back through one `z -> z^p` layer: `v - 1` above `p/(p-1)`, `v/p`
/// below (the image transport is `v -> min(p v, v + 1)`).
pub fn pullback_valuation(p: u64, v: &Q) -> Q {
    let knee = q(p as i64, p as i64 - 1);
    if *v >= knee {
        v - q(1, 1)
    } else {
        v / q(p as i64, 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q_int;

    fn kq(p: u64, e: u32, v: Q) -> KummerQuery {
        KummerQuery::new(p, e, v).unwrap()
    }

    #[test]
    fn thresholds() {
        assert_eq!(split_threshold(2, 1).unwrap(), q_int(2));
        assert_eq!(split_threshold(3, 2).unwrap(), q(5, 2));
        assert_eq!(split_threshold(5, 0).unwrap(), q(1, 4));
        assert!(matches!(split_threshold(1, 0), Err(Error::NotPrime(1))));
        assert!(matches!(split_threshold(4, 1), Err(Error::NotPrime(4))));
    }

    #[test]
    fn preimage_exponents() {
        assert_eq!(preimage_exponent(&kq(2, 1, q_int(0))), 0);
        assert_eq!(preimage_exponent(&kq(3, 2, q_int(3))), 2);
        assert_eq!(preimage_exponent(&kq(3, 2, q_int(1))), 0);
        assert_eq!(preimage_exponent(&kq(3, 0, q_int(7))), 0);
        assert_eq!(preimage_exponent(&kq(7, 0, q(1, 3))), 0);
    }

    #[test]
    fn boundary_goes_to_smaller_count() {
        // v exactly at e + 1/(p-1)
        assert_eq!(preimage_exponent(&kq(3, 2, q(5, 2))), 1);
        assert_eq!(preimage_exponent(&kq(2, 1, q_int(2))), 0);
        assert!(!is_split_ball(&kq(2, 1, q_int(2))));
        // interior boundaries too: over p=2 the fiber of B(1, 1/4) under
        // z^4 is the single point B(1, 1/2) pulled back once more
        assert_eq!(preimage_exponent(&kq(2, 2, q_int(2))), 0);
        // and the knee itself still yields a single disc
        assert_eq!(preimage_exponent(&kq(3, 2, q(3, 2))), 0);
    }

    #[test]
    fn split_predicate() {
        assert!(is_split_ball(&kq(2, 1, q_int(3))));
        assert!(!is_split_ball(&kq(2, 1, q_int(2))));
        // identity cover is split everywhere
        assert!(is_split_ball(&kq(3, 0, q_int(0))));
    }

    #[test]
    fn split_iff_full_exponent_strictly_above_threshold() {
        for p in [2u64, 3, 5] {
            for e in 0..=4u32 {
                let thr = split_threshold(p, e).unwrap();
                for num in 0..40i64 {
                    let v = q(num, 4);
                    let query = kq(p, e, v.clone());
                    if v > thr {
                        assert!(is_split_ball(&query));
                        assert_eq!(preimage_exponent(&query), e);
                    }
                    if is_split_ball(&query) && e > 0 {
                        assert!(v > thr);
                    }
                }
            }
        }
    }

    #[test]
    fn tiling_and_monotonicity() {
        for p in [2u64, 3, 5] {
            // interval boundaries coincide: p/(p-1) = 1 + 1/(p-1)
            assert_eq!(q(p as i64, p as i64 - 1), q_int(1) + q(1, p as i64 - 1));
            for e in 1..=5u32 {
                let mut last = 0u32;
                for num in 0..=((e as i64 + 3) * 12) {
                    let v = q(num, 12);
                    let i = preimage_exponent(&kq(p, e, v));
                    assert!(i >= last, "not monotone at p={p} e={e} v={num}/12");
                    assert!(i <= e);
                    last = i;
                }
                assert_eq!(preimage_exponent(&kq(p, e, q_int(0))), 0);
                assert_eq!(preimage_exponent(&kq(p, e, q_int(e as i64 + 3))), e);
            }
        }
    }

    #[test]
    fn composition_through_radius_transport() {
        // splitting z^(p^(a+b)) as z^(p^b) then z^(p^a): counts multiply
        // once the radius is pulled back through the b inner layers
        for p in [2u64, 3, 5] {
            for e in 1..=4u32 {
                for a in 1..e {
                    let b = e - a;
                    for num in 0..=((e as i64 + 2) * 6) {
                        let v = q(num, 6);
                        let whole = preimage_exponent(&kq(p, e, v.clone()));
                        let inner = preimage_exponent(&kq(p, b, v.clone()));
                        let mut pulled = v.clone();
                        for _ in 0..b {
                            pulled = pullback_valuation(p, &pulled);
                        }
                        let outer = preimage_exponent(&kq(p, a, pulled));
                        assert_eq!(
                            whole,
                            inner + outer,
                            "p={p} a={a} b={b} v={num}/6"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn val_ordering_and_absorption() {
        let a = Val::finite(q(3, 2));
        let b = Val::finite(q_int(2));
        assert!(a < b);
        assert!(b < Val::Infinite);
        assert_eq!(Val::Infinite.add(&a), Val::Infinite);
        assert_eq!(a.add(&b), Val::finite(q(7, 2)));
    }

    #[test]
    fn query_validation() {
        assert!(matches!(
            KummerQuery::new(6, 1, q_int(1)),
            Err(Error::NotPrime(6))
        ));
        assert!(matches!(
            KummerQuery::new(3, 1, q_int(-1)),
            Err(Error::NegativeValuation(_))
        ));
    }
}
