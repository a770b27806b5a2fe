//! View collection materialization and ordering.
//!
//! A collection of filter views over one base graph is materialized in three
//! steps: compute the edge boolean matrix (one membership bit per edge and
//! view), choose a column order that minimizes the number of membership
//! transitions, and emit the edge difference stream whose prefix sums
//! reconstruct each view.

pub mod ebm;
pub mod eds;
pub mod ordering;

pub use ebm::{
    compute_ebm, consecutive_blocks, diff_count, row_blocks, row_diffs, EdgeBooleanMatrix,
    ViewOrder,
};
pub use eds::{compute_eds, DiffEntry, EdgeDifferenceStream, EdsError};
pub use ordering::{
    brute_force_order, brute_force_tour_weight, christofides_order, christofides_tour_weight,
    hamming_clique, optimize_order, optimize_order_partitioned, pick_direction, CandidateOrder,
    HammingClique, OrderingError,
};
