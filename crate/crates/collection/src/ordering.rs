//! Collection ordering: pick the view permutation that minimizes the total
//! number of edge differences.
//!
//! The optimizer pads the matrix with an all-zero column, builds the complete
//! graph whose edge weights are Hamming distances between columns, and runs
//! Christofides (MST + odd-vertex matching + Euler shortcut). Removing the
//! zero node from the tour leaves a chain, read in both directions; the
//! direction with fewer differences wins. An exhaustive enumerator over all
//! k! orders serves as the test oracle.

use crate::ebm::{diff_count, EdgeBooleanMatrix, ViewOrder};

/// Exact minimum-weight perfect matching is used up to this many odd-degree
/// vertices; beyond that a greedy nearest-pair matching takes over and the
/// usual 1.5x/3x bounds become heuristic.
pub const EXACT_MATCHING_LIMIT: usize = 12;

#[derive(Debug, thiserror::Error)]
pub enum OrderingError {
    #[error("exhaustive ordering supports at most {max} views, got {k}")]
    TooManyViews { k: usize, max: usize },
}

/// Complete graph over the zero-padded columns: node 0 is the all-zero
/// column, nodes 1..=k are the views. Weights are Hamming distances.
#[derive(Debug, Clone)]
pub struct HammingClique {
    n: usize,
    weight: Vec<u64>,
}

impl HammingClique {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, a: usize, b: usize) -> u64 {
        self.weight[a * self.n + b]
    }

    pub fn from_weights(n: usize, weight: Vec<u64>) -> HammingClique {
        assert_eq!(weight.len(), n * n);
        HammingClique { n, weight }
    }

    /// The differences a chain order produces, computed from the clique
    /// alone: the weight of the path that starts at the zero node and visits
    /// the views in order.
    pub fn chain_diffs(&self, order: &ViewOrder) -> u64 {
        let mut prev = 0usize;
        let mut total = 0;
        for &v in order.as_slice() {
            total += self.weight(prev, v + 1);
            prev = v + 1;
        }
        total
    }

    /// Weight of a full tour visiting the given clique nodes in order.
    fn tour_weight(&self, cycle: &[usize]) -> u64 {
        let mut total = 0;
        for i in 0..cycle.len() {
            total += self.weight(cycle[i], cycle[(i + 1) % cycle.len()]);
        }
        total
    }
}

/// Computes the clique from the matrix. Rows are split into `partitions`
/// contiguous ranges; each range contributes a partial distance matrix and
/// the partials are summed, so the result is partition-count independent.
pub fn hamming_clique(ebm: &EdgeBooleanMatrix, partitions: usize) -> HammingClique {
    let k = ebm.k();
    let n = k + 1;
    let rows = ebm.rows();
    let partitions = partitions.max(1).min(rows.max(1));
    let chunk = rows.div_ceil(partitions).max(1);
    let bounds: Vec<(usize, usize)> = (0..partitions)
        .map(|p| (p * chunk, ((p + 1) * chunk).min(rows)))
        .filter(|(lo, hi)| lo < hi)
        .collect();

    let partial = |lo: usize, hi: usize| -> Vec<u64> {
        // Column-major bit blocks over this row range; column 0 is the
        // all-zero padding.
        let words = (hi - lo).div_ceil(64).max(1);
        let mut cols = vec![0u64; n * words];
        for col in 0..k {
            for row in lo..hi {
                if ebm.get(row, col) {
                    let r = row - lo;
                    cols[(col + 1) * words + r / 64] |= 1 << (r % 64);
                }
            }
        }
        let mut d = vec![0u64; n * n];
        for a in 0..n {
            for b in (a + 1)..n {
                let mut count = 0;
                for w in 0..words {
                    count += (cols[a * words + w] ^ cols[b * words + w]).count_ones() as u64;
                }
                d[a * n + b] = count;
                d[b * n + a] = count;
            }
        }
        d
    };

    let mut weight = vec![0u64; n * n];
    if bounds.len() <= 1 {
        if let Some(&(lo, hi)) = bounds.first() {
            weight = partial(lo, hi);
        }
    } else {
        let mut parts: Vec<Vec<u64>> = Vec::with_capacity(bounds.len());
        std::thread::scope(|scope| {
            let handles: Vec<_> = bounds
                .iter()
                .map(|&(lo, hi)| scope.spawn(move || partial(lo, hi)))
                .collect();
            for h in handles {
                parts.push(h.join().expect("partition worker panicked"));
            }
        });
        for p in parts {
            for (acc, v) in weight.iter_mut().zip(p) {
                *acc += v;
            }
        }
    }
    HammingClique { n, weight }
}

/// The two chain directions Christofides yields, with their difference
/// counts.
#[derive(Debug, Clone)]
pub struct CandidateOrder {
    pub forward: ViewOrder,
    pub backward: ViewOrder,
    pub forward_diffs: u64,
    pub backward_diffs: u64,
}

/// Runs Christofides on the clique and returns the chain read in both
/// directions. Deterministic: all tie-breaks prefer smaller node indices.
pub fn christofides_order(clique: &HammingClique) -> CandidateOrder {
    let n = clique.n();
    assert!(n >= 2, "need at least one view");

    let mut multigraph: Vec<Vec<usize>> = vec![Vec::new(); n];
    let add_edge = |g: &mut Vec<Vec<usize>>, a: usize, b: usize| {
        g[a].push(b);
        g[b].push(a);
    };

    // MST (Prim from node 0; ties break lexicographically on
    // (cost, tree endpoint, new vertex)).
    let mut in_tree = vec![false; n];
    let mut best_cost = vec![u64::MAX; n];
    let mut best_from = vec![0usize; n];
    in_tree[0] = true;
    for v in 1..n {
        best_cost[v] = clique.weight(0, v);
        best_from[v] = 0;
    }
    for _ in 1..n {
        let mut pick = usize::MAX;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            if pick == usize::MAX
                || (best_cost[v], best_from[v], v) < (best_cost[pick], best_from[pick], pick)
            {
                pick = v;
            }
        }
        in_tree[pick] = true;
        add_edge(&mut multigraph, best_from[pick], pick);
        for v in 0..n {
            if !in_tree[v] && clique.weight(pick, v) < best_cost[v] {
                best_cost[v] = clique.weight(pick, v);
                best_from[v] = pick;
            }
        }
    }

    // Odd-degree vertices get a minimum-weight perfect matching (exact via
    // bitmask DP while small, greedy nearest pairs beyond the limit).
    let odd: Vec<usize> = (0..n).filter(|&v| multigraph[v].len() % 2 == 1).collect();
    debug_assert!(odd.len() % 2 == 0);
    for (a, b) in match_odd_vertices(clique, &odd) {
        add_edge(&mut multigraph, a, b);
    }

    // Euler circuit over MST + matching (Hierholzer, smallest neighbor
    // first), then shortcut repeated vertices into a Hamiltonian cycle.
    for adj in &mut multigraph {
        adj.sort_unstable();
        adj.reverse(); // pop() takes the smallest
    }
    let mut circuit = Vec::new();
    let mut stack = vec![0usize];
    while let Some(&v) = stack.last() {
        if let Some(w) = multigraph[v].pop() {
            // Remove the reverse copy of the undirected edge.
            let pos = multigraph[w]
                .iter()
                .position(|&x| x == v)
                .expect("edge copies stay paired");
            multigraph[w].remove(pos);
            stack.push(w);
        } else {
            circuit.push(v);
            stack.pop();
        }
    }

    let mut seen = vec![false; n];
    let mut cycle = Vec::with_capacity(n);
    for &v in &circuit {
        if !seen[v] {
            seen[v] = true;
            cycle.push(v);
        }
    }
    debug_assert_eq!(cycle.len(), n);
    debug_assert_eq!(cycle[0], 0);

    // Drop node 0; the rest is the chain of views.
    let chain: Vec<usize> = cycle[1..].iter().map(|&v| v - 1).collect();
    let forward = ViewOrder::new(chain).expect("chain visits every view once");
    let backward = forward.reversed();
    let forward_diffs = clique.chain_diffs(&forward);
    let backward_diffs = clique.chain_diffs(&backward);
    CandidateOrder {
        forward,
        backward,
        forward_diffs,
        backward_diffs,
    }
}

fn match_odd_vertices(clique: &HammingClique, odd: &[usize]) -> Vec<(usize, usize)> {
    let m = odd.len();
    if m == 0 {
        return Vec::new();
    }
    if m <= EXACT_MATCHING_LIMIT {
        // dp[mask] = min weight of a perfect matching on the vertices in
        // `mask`; the lowest set bit is always paired first, which also makes
        // the reconstruction deterministic.
        let full = (1usize << m) - 1;
        let mut dp = vec![u64::MAX; full + 1];
        dp[0] = 0;
        for mask in 1..=full {
            if mask.count_ones() % 2 == 1 {
                continue;
            }
            let i = mask.trailing_zeros() as usize;
            let rest = mask & !(1 << i);
            let mut bits = rest;
            let mut best = u64::MAX;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let prev = rest & !(1 << j);
                if dp[prev] != u64::MAX {
                    best = best.min(dp[prev] + clique.weight(odd[i], odd[j]));
                }
            }
            dp[mask] = best;
        }
        let mut pairs = Vec::with_capacity(m / 2);
        let mut mask = full;
        while mask != 0 {
            let i = mask.trailing_zeros() as usize;
            let rest = mask & !(1 << i);
            let mut bits = rest;
            let mut chosen = None;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let prev = rest & !(1 << j);
                if dp[prev] != u64::MAX
                    && dp[prev] + clique.weight(odd[i], odd[j]) == dp[mask]
                {
                    chosen = Some(j);
                    break;
                }
            }
            let j = chosen.expect("matching dp is consistent");
            pairs.push((odd[i], odd[j]));
            mask = rest & !(1 << j);
        }
        pairs
    } else {
        // Greedy nearest pair; approximation bounds are heuristic here.
        let mut remaining: Vec<usize> = odd.to_vec();
        let mut pairs = Vec::with_capacity(m / 2);
        while remaining.len() > 1 {
            let mut best = (0usize, 1usize);
            let mut best_w = u64::MAX;
            for i in 0..remaining.len() {
                for j in (i + 1)..remaining.len() {
                    let w = clique.weight(remaining[i], remaining[j]);
                    if w < best_w {
                        best_w = w;
                        best = (i, j);
                    }
                }
            }
            let (i, j) = best;
            let b = remaining.remove(j);
            let a = remaining.remove(i);
            pairs.push((a, b));
        }
        pairs
    }
}

/// Full Christofides pipeline: returns the better chain direction. Equal
/// directions break toward the one whose first view has the smaller original
/// index.
pub fn optimize_order(ebm: &EdgeBooleanMatrix) -> ViewOrder {
    optimize_order_partitioned(ebm, 1)
}

pub fn optimize_order_partitioned(ebm: &EdgeBooleanMatrix, partitions: usize) -> ViewOrder {
    let k = ebm.k();
    if k <= 1 {
        return ViewOrder::identity(k);
    }
    let clique = hamming_clique(ebm, partitions);
    let cand = christofides_order(&clique);
    pick_direction(&cand)
}

pub fn pick_direction(cand: &CandidateOrder) -> ViewOrder {
    if cand.forward_diffs < cand.backward_diffs {
        cand.forward.clone()
    } else if cand.backward_diffs < cand.forward_diffs {
        cand.backward.clone()
    } else if cand.forward.view_at(0) <= cand.backward.view_at(0) {
        cand.forward.clone()
    } else {
        cand.backward.clone()
    }
}

const BRUTE_FORCE_MAX_VIEWS: usize = 8;

/// Exact minimizer over all k! orders, k <= 8. Ties break toward the
/// lexicographically smallest permutation.
pub fn brute_force_order(ebm: &EdgeBooleanMatrix) -> Result<ViewOrder, OrderingError> {
    let k = ebm.k();
    if k > BRUTE_FORCE_MAX_VIEWS {
        return Err(OrderingError::TooManyViews {
            k,
            max: BRUTE_FORCE_MAX_VIEWS,
        });
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = perm.clone();
    let mut best_ds = diff_count(ebm, &ViewOrder::new(perm.clone()).unwrap());
    while next_permutation(&mut perm) {
        let ds = diff_count(ebm, &ViewOrder::new(perm.clone()).unwrap());
        if ds < best_ds {
            best_ds = ds;
            best = perm.clone();
        }
    }
    Ok(ViewOrder::new(best).unwrap())
}

/// Exhaustive optimal tour weight over the whole clique (node 0 fixed as the
/// start). Only for small cliques; the 1.5x tour-bound tests use it.
pub fn brute_force_tour_weight(clique: &HammingClique) -> Result<u64, OrderingError> {
    let n = clique.n();
    if n > BRUTE_FORCE_MAX_VIEWS + 1 {
        return Err(OrderingError::TooManyViews {
            k: n - 1,
            max: BRUTE_FORCE_MAX_VIEWS,
        });
    }
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best = u64::MAX;
    loop {
        let mut cycle = Vec::with_capacity(n);
        cycle.push(0);
        cycle.extend_from_slice(&rest);
        best = best.min(clique.tour_weight(&cycle));
        if !next_permutation(&mut rest) {
            break;
        }
    }
    Ok(best)
}

/// Weight of the tour Christofides produced (chain weight plus the closing
/// edge back to node 0).
pub fn christofides_tour_weight(clique: &HammingClique, cand: &CandidateOrder) -> u64 {
    let last = cand.forward.view_at(cand.forward.len() - 1) + 1;
    cand.forward_diffs + clique.weight(last, 0)
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}
