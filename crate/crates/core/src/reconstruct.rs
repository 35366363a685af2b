//! Reconstruction of edge lengths from loop lengths.
//!
//! Every simple cycle of a graph, and of each of its connected double
//! covers, yields one linear constraint on the base edge lengths: the
//! cycle length equals the pushforward-weighted sum of the edge lengths.
//! For graphs of minimal valency 3 the assembled system has full column
//! rank (verified instance by instance, with a degree-3 escalation path),
//! so exact Gaussian elimination recovers every edge length. A valency-2
//! vertex breaks this: its two incident edges enter every constraint
//! through their sum only.

use crate::covering::{
    enumerate_connected_double_covers, enumerate_connected_triple_covers, ConstraintRow,
};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph};
use crate::loops::{enumerate_loops, Loop};
use crate::rational::{q_int, Q};
use num_traits::Zero;
use std::collections::BTreeMap;

/// Where a constraint row came from: a loop of the base graph or of one
/// of the enumerated covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverId {
    Base,
    Double(usize),
    Triple(usize),
}

#[derive(Debug, Clone)]
pub struct RowSource {
    pub cover: CoverId,
    pub cycle: Loop,
}

#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub edge_order: Vec<EdgeId>,
    pub rows: Vec<ConstraintRow>,
    pub sources: Vec<RowSource>,
}

impl ConstraintSystem {
    pub fn row_vector(&self, idx: usize) -> Vec<Q> {
        let row = &self.rows[idx];
        self.edge_order
            .iter()
            .map(|e| q_int(row.coeff(e) as i64))
            .collect()
    }
}

/// Assembles the full degree-2 constraint system of `g`: one row per base
/// loop (coefficients in {0,1}) and one per loop of every connected double
/// cover (coefficients in {0,1,2}), in deterministic order. Coefficients
/// only; right-hand sides are attached by the caller.
pub fn constraint_matrix(g: &Graph, cap: usize) -> Result<ConstraintSystem> {
    if g.has_cusps() {
        return Err(Error::CuspsPresent);
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let edge_order: Vec<EdgeId> = g.edge_ids().cloned().collect();
    let mut rows = Vec::new();
    let mut sources = Vec::new();
    for cycle in enumerate_loops(g, cap)? {
        let coeffs: BTreeMap<EdgeId, u32> = cycle.edge_ids().map(|e| (e.clone(), 1)).collect();
        rows.push(ConstraintRow { coeffs, rhs: None });
        sources.push(RowSource {
            cover: CoverId::Base,
            cycle,
        });
    }
    for (k, dc) in enumerate_connected_double_covers(g)?.iter().enumerate() {
        for cycle in enumerate_loops(dc.total(), cap)? {
            rows.push(dc.push_loop(&cycle)?);
            sources.push(RowSource {
                cover: CoverId::Double(k),
                cycle,
            });
        }
    }
    Ok(ConstraintSystem {
        edge_order,
        rows,
        sources,
    })
}

/// Appends rows from connected degree-3 covers (at most `cover_limit` of
/// them); returns how many rows were added.
pub fn extend_with_triple_covers(
    sys: &mut ConstraintSystem,
    g: &Graph,
    cap: usize,
    cover_limit: usize,
) -> Result<usize> {
    let mut added = 0;
    for (k, tc) in enumerate_connected_triple_covers(g, cover_limit)?
        .iter()
        .enumerate()
    {
        for cycle in enumerate_loops(tc.total(), cap)? {
            sys.rows.push(tc.push_loop(&cycle)?);
            sys.sources.push(RowSource {
                cover: CoverId::Triple(k),
                cycle,
            });
            added += 1;
        }
    }
    Ok(added)
}

/// Incremental exact Gaussian elimination in reduced row-echelon form.
/// Pivoting follows the smallest edge index (column order).
struct Eliminator {
    ncols: usize,
    /// pivot column -> reduced row (ncols coefficients then the rhs)
    pivots: BTreeMap<usize, Vec<Q>>,
}

enum RowFate {
    NewPivot,
    Redundant,
    Inconsistent(Q),
}

impl Eliminator {
    fn new(ncols: usize) -> Self {
        Eliminator {
            ncols,
            pivots: BTreeMap::new(),
        }
    }

    fn rank(&self) -> usize {
        self.pivots.len()
    }

    fn add_row(&mut self, mut row: Vec<Q>) -> RowFate {
        debug_assert_eq!(row.len(), self.ncols + 1);
        for (col, prow) in &self.pivots {
            if !row[*col].is_zero() {
                let factor = row[*col].clone();
                for (x, p) in row.iter_mut().zip(prow.iter()) {
                    *x -= &factor * p;
                }
            }
        }
        let lead = (0..self.ncols).find(|c| !row[*c].is_zero());
        match lead {
            None => {
                if row[self.ncols].is_zero() {
                    RowFate::Redundant
                } else {
                    RowFate::Inconsistent(row[self.ncols].clone())
                }
            }
            Some(col) => {
                let inv = row[col].clone();
                for x in row.iter_mut() {
                    *x /= &inv;
                }
                // keep reduced form above the new pivot as well
                for prow in self.pivots.values_mut() {
                    if !prow[col].is_zero() {
                        let factor = prow[col].clone();
                        for (p, r) in prow.iter_mut().zip(row.iter()) {
                            *p -= &factor * r;
                        }
                    }
                }
                self.pivots.insert(col, row);
                RowFate::NewPivot
            }
        }
    }

    /// Basis of the kernel of the coefficient matrix, one vector per free
    /// column.
    fn null_space(&self, edge_order: &[EdgeId]) -> Vec<BTreeMap<EdgeId, Q>> {
        let mut basis = Vec::new();
        for free in 0..self.ncols {
            if self.pivots.contains_key(&free) {
                continue;
            }
            let mut vec: BTreeMap<EdgeId, Q> = BTreeMap::new();
            vec.insert(edge_order[free].clone(), q_int(1));
            for (col, row) in &self.pivots {
                if !row[free].is_zero() {
                    vec.insert(edge_order[*col].clone(), -row[free].clone());
                }
            }
            basis.push(vec);
        }
        basis
    }
}

/// Solves the system exactly. Every row must carry a right-hand side; the
/// solution is unique (rank equals the number of edges), and every row,
/// including redundant ones, is checked to have residual exactly zero.
pub fn solve_lengths(sys: &ConstraintSystem) -> Result<BTreeMap<EdgeId, Q>> {
    let n = sys.edge_order.len();
    let mut elim = Eliminator::new(n);
    for (i, row) in sys.rows.iter().enumerate() {
        let rhs = row.rhs.as_ref().ok_or(Error::MissingRhs(i))?;
        let mut vec = sys.row_vector(i);
        vec.push(rhs.clone());
        if let RowFate::Inconsistent(residual) = elim.add_row(vec) {
            return Err(Error::Inconsistent { row: i, residual });
        }
    }
    if elim.rank() < n {
        return Err(Error::RankDeficient {
            rank: elim.rank(),
            edges: n,
            null_space: elim.null_space(&sys.edge_order),
        });
    }
    let mut solution = BTreeMap::new();
    for (col, row) in &elim.pivots {
        solution.insert(sys.edge_order[*col].clone(), row[n].clone());
    }
    for (i, row) in sys.rows.iter().enumerate() {
        let mut residual = -row.rhs.clone().expect("checked above");
        for (e, k) in &row.coeffs {
            residual += q_int(*k as i64) * &solution[e];
        }
        if !residual.is_zero() {
            return Err(Error::Inconsistent { row: i, residual });
        }
    }
    Ok(solution)
}

/// Rank report for the loop-length constraint system of a graph.
#[derive(Debug, Clone)]
pub struct RankReport {
    pub full_rank: bool,
    pub rank: usize,
    pub edge_count: usize,
    /// Whether every vertex has valency at least 3 (reported separately;
    /// the rank computation runs either way).
    pub min_valency_ok: bool,
    /// 2 when double covers sufficed, 3 when the escalation was needed.
    pub degree_used: u32,
    pub null_space: Vec<BTreeMap<EdgeId, Q>>,
}

/// Checks that loop lengths determine every edge length: the constraint
/// system of base and double-cover loops has rank `|E|`. When it does not
/// and `max_degree >= 3`, degree-3 covers are brought in before reporting.
pub fn verify_full_rank(g: &Graph, max_degree: u32, cap: usize) -> Result<RankReport> {
    if g.has_cusps() {
        return Err(Error::CuspsPresent);
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.edge_count();
    let min_valency_ok = g.min_valency() >= 3;
    let mut elim = Eliminator::new(n);
    let edge_order: Vec<EdgeId> = g.edge_ids().cloned().collect();
    let index: BTreeMap<&EdgeId, usize> = edge_order.iter().enumerate().map(|(i, e)| (e, i)).collect();

    let feed = |elim: &mut Eliminator, row: &ConstraintRow| {
        let mut vec = vec![Q::zero(); n + 1];
        for (e, k) in &row.coeffs {
            vec[index[e]] = q_int(*k as i64);
        }
        elim.add_row(vec);
    };

    let mut degree_used = 2;
    'outer: for cycle in enumerate_loops(g, cap)? {
        let coeffs: BTreeMap<EdgeId, u32> = cycle.edge_ids().map(|e| (e.clone(), 1)).collect();
        feed(&mut elim, &ConstraintRow { coeffs, rhs: None });
        if elim.rank() == n {
            break 'outer;
        }
    }
    if elim.rank() < n {
        'covers: for dc in enumerate_connected_double_covers(g)? {
            for cycle in enumerate_loops(dc.total(), cap)? {
                feed(&mut elim, &dc.push_loop(&cycle)?);
                if elim.rank() == n {
                    break 'covers;
                }
            }
        }
    }
    if elim.rank() < n && max_degree >= 3 {
        degree_used = 3;
        'triples: for tc in enumerate_connected_triple_covers(g, TRIPLE_COVER_LIMIT)? {
            for cycle in enumerate_loops(tc.total(), cap)? {
                feed(&mut elim, &tc.push_loop(&cycle)?);
                if elim.rank() == n {
                    break 'triples;
                }
            }
        }
    }
    let rank = elim.rank();
    Ok(RankReport {
        full_rank: rank == n,
        rank,
        edge_count: n,
        min_valency_ok,
        degree_used,
        null_space: elim.null_space(&edge_order),
    })
}

/// How many degree-3 covers the escalation path will try.
pub const TRIPLE_COVER_LIMIT: usize = 4096;
