//! Exact-arithmetic toolkit for metric multigraphs and their finite covers:
//! simple-cycle enumeration, voltage double covers, the splitting law of
//! cyclic `z -> z^(p^e)` covers over disc points, integer currents on tree
//! windows, and reconstruction of all edge lengths from loop lengths
//! observed on the graph and its connected double covers.
//!
//! Everything is rational-exact; no floating point is used anywhere.

pub mod covering;
pub mod currents;
pub mod error;
pub mod gen;
pub mod graph;
pub mod io;
pub mod loops;
pub mod pipeline;
pub mod rational;
pub mod reconstruct;
pub mod tate;
pub mod valuation;

pub use covering::{enumerate_connected_double_covers, ConstraintRow, DoubleCover, TripleCover};
pub use error::Error;
pub use graph::{EdgeId, Graph, MetricGraph, VertexId};
pub use loops::{enumerate_loops, loop_length, Loop, Step, DEFAULT_LOOP_CAP};
pub use pipeline::{
    build_window, recover_all, recover_loop_length, splitting_index, CoverWindow, RecoverConfig,
    SplitOracle,
};
pub use rational::Q;
pub use reconstruct::{constraint_matrix, solve_lengths, verify_full_rank, ConstraintSystem};
pub use valuation::{is_split_ball, preimage_exponent, split_threshold, KummerQuery, Val};
