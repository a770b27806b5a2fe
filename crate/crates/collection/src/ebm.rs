//! Edge boolean matrix: one row per base-graph edge, one membership bit per
//! view in the collection.

use strata_graph::gvdl::{eval_predicate, BoundPred};
use strata_graph::PropertyGraph;

/// A permutation of the views of a collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewOrder {
    perm: Vec<usize>,
}

impl ViewOrder {
    pub fn new(perm: Vec<usize>) -> Option<ViewOrder> {
        let k = perm.len();
        let mut seen = vec![false; k];
        for &p in &perm {
            if p >= k || seen[p] {
                return None;
            }
            seen[p] = true;
        }
        Some(ViewOrder { perm })
    }

    pub fn identity(k: usize) -> ViewOrder {
        ViewOrder {
            perm: (0..k).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn view_at(&self, position: usize) -> usize {
        self.perm[position]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    pub fn reversed(&self) -> ViewOrder {
        let mut perm = self.perm.clone();
        perm.reverse();
        ViewOrder { perm }
    }
}

/// Per-edge membership bits for the views of one collection. Rows are stored
/// as packed bit vectors since row-major access dominates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeBooleanMatrix {
    k: usize,
    words_per_row: usize,
    bits: Vec<u64>,
    view_names: Vec<String>,
}

impl EdgeBooleanMatrix {
    pub fn zeroed(rows: usize, view_names: Vec<String>) -> EdgeBooleanMatrix {
        let k = view_names.len();
        let words_per_row = k.div_ceil(64).max(1);
        EdgeBooleanMatrix {
            k,
            words_per_row,
            bits: vec![0; rows * words_per_row],
            view_names,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> usize {
        self.bits.len() / self.words_per_row
    }

    pub fn view_names(&self) -> &[String] {
        &self.view_names
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        debug_assert!(col < self.k);
        let w = row * self.words_per_row + col / 64;
        self.bits[w] >> (col % 64) & 1 == 1
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        debug_assert!(col < self.k);
        let w = row * self.words_per_row + col / 64;
        if value {
            self.bits[w] |= 1 << (col % 64);
        } else {
            self.bits[w] &= !(1 << (col % 64));
        }
    }

    /// The row's bits in the given column order.
    pub fn row_in_order(&self, row: usize, order: &ViewOrder) -> Vec<bool> {
        order.as_slice().iter().map(|&c| self.get(row, c)).collect()
    }

    /// Membership column as a plain bool vector.
    pub fn column(&self, col: usize) -> Vec<bool> {
        (0..self.rows()).map(|r| self.get(r, col)).collect()
    }

    /// Popcount of a column.
    pub fn column_ones(&self, col: usize) -> u64 {
        (0..self.rows()).filter(|&r| self.get(r, col)).count() as u64
    }
}

/// Runs every view predicate on every edge. The work is split into
/// `partitions` contiguous edge-ID ranges whose results are concatenated in
/// range order, so the output is identical for any partition count.
pub fn compute_ebm(
    g: &PropertyGraph,
    views: &[(String, BoundPred)],
    partitions: usize,
) -> EdgeBooleanMatrix {
    let names: Vec<String> = views.iter().map(|(n, _)| n.clone()).collect();
    let rows = g.edge_count();
    let mut ebm = EdgeBooleanMatrix::zeroed(rows, names);
    let partitions = partitions.max(1).min(rows.max(1));

    let chunk = rows.div_ceil(partitions).max(1);
    let bounds: Vec<(usize, usize)> = (0..partitions)
        .map(|p| (p * chunk, ((p + 1) * chunk).min(rows)))
        .filter(|(lo, hi)| lo < hi)
        .collect();

    let words_per_row = ebm.words_per_row;
    let fill = |lo: usize, hi: usize, out: &mut [u64]| {
        for row in lo..hi {
            let e = g.edge(row as u32);
            for (col, (_, pred)) in views.iter().enumerate() {
                if eval_predicate(pred, e, g) {
                    out[(row - lo) * words_per_row + col / 64] |= 1 << (col % 64);
                }
            }
        }
    };

    if bounds.len() <= 1 {
        let end = ebm.bits.len();
        fill(0, rows, &mut ebm.bits[..end]);
    } else {
        let mut parts: Vec<Vec<u64>> = Vec::with_capacity(bounds.len());
        std::thread::scope(|scope| {
            let handles: Vec<_> = bounds
                .iter()
                .map(|&(lo, hi)| {
                    scope.spawn(move || {
                        let mut out = vec![0u64; (hi - lo) * words_per_row];
                        fill(lo, hi, &mut out);
                        out
                    })
                })
                .collect();
            for h in handles {
                parts.push(h.join().expect("partition worker panicked"));
            }
        });
        ebm.bits = parts.concat();
    }
    ebm
}

/// Total number of edge-difference entries the collection produces under the
/// given order: per row, transitions in the bit sequence with an implicit
/// leading 0.
pub fn diff_count(ebm: &EdgeBooleanMatrix, order: &ViewOrder) -> u64 {
    assert_eq!(order.len(), ebm.k(), "order does not match the matrix");
    let mut total = 0u64;
    for row in 0..ebm.rows() {
        let mut prev = false;
        for &col in order.as_slice() {
            let cur = ebm.get(row, col);
            if cur != prev {
                total += 1;
                prev = cur;
            }
        }
    }
    total
}

/// Total number of maximal runs of 1-cells over all rows under the order.
pub fn consecutive_blocks(ebm: &EdgeBooleanMatrix, order: &ViewOrder) -> u64 {
    assert_eq!(order.len(), ebm.k(), "order does not match the matrix");
    let mut total = 0u64;
    for row in 0..ebm.rows() {
        let mut prev = false;
        for &col in order.as_slice() {
            let cur = ebm.get(row, col);
            if cur && !prev {
                total += 1;
            }
            prev = cur;
        }
    }
    total
}

/// Transition count of a single row, implicit leading 0.
pub fn row_diffs(bits: &[bool]) -> u64 {
    let mut prev = false;
    let mut total = 0;
    for &b in bits {
        if b != prev {
            total += 1;
            prev = b;
        }
    }
    total
}

/// Maximal 1-runs of a single row.
pub fn row_blocks(bits: &[bool]) -> u64 {
    let mut prev = false;
    let mut total = 0;
    for &b in bits {
        if b && !prev {
            total += 1;
        }
        prev = b;
    }
    total
}
