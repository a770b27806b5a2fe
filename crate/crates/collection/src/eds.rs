//! Edge difference stream: per-view signed edge additions and deletions whose
//! prefix sums reconstruct each view of the collection.

use std::collections::BTreeMap;

use strata_graph::EdgeId;

use crate::ebm::{diff_count, EdgeBooleanMatrix, ViewOrder};

/// One signed entry of the stream. `position` is 1-based: position t carries
/// the change from view t-1 (empty for t = 1) to view t in collection order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiffEntry {
    pub position: usize,
    pub edge: EdgeId,
    pub multiplicity: i8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeDifferenceStream {
    pub collection: String,
    /// View names in stream order.
    pub view_names: Vec<String>,
    /// Original view index per stream position.
    pub order: ViewOrder,
    /// Entries sorted by (position, edge id).
    pub entries: Vec<DiffEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum EdsError {
    #[error("position {0} is out of range")]
    BadPosition(usize),
    #[error("edge {edge} has net multiplicity {net} at position {position}")]
    BadReconstruction {
        edge: EdgeId,
        position: usize,
        net: i64,
    },
    #[error("malformed stream file: {0}")]
    Malformed(String),
}

impl EdgeDifferenceStream {
    pub fn k(&self) -> usize {
        self.view_names.len()
    }

    pub fn total_entries(&self) -> u64 {
        self.entries.len() as u64
    }

    /// Entries for one 1-based position.
    pub fn at_position(&self, position: usize) -> impl Iterator<Item = &DiffEntry> {
        self.entries.iter().filter(move |e| e.position == position)
    }

    /// Size of each view (its edge count) in stream order.
    pub fn view_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.k());
        let mut live = 0i64;
        let mut idx = 0;
        for t in 1..=self.k() {
            while idx < self.entries.len() && self.entries[idx].position == t {
                live += self.entries[idx].multiplicity as i64;
                idx += 1;
            }
            sizes.push(live as usize);
        }
        sizes
    }

    /// Diff set size per position.
    pub fn diff_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k()];
        for e in &self.entries {
            sizes[e.position - 1] += 1;
        }
        sizes
    }

    /// Accumulates entries through position t and returns the edge set of the
    /// view at t, verifying every edge nets to multiplicity 0 or 1.
    pub fn reconstruct(&self, position: usize) -> Result<Vec<EdgeId>, EdsError> {
        if position == 0 || position > self.k() {
            return Err(EdsError::BadPosition(position));
        }
        let mut net: BTreeMap<EdgeId, i64> = BTreeMap::new();
        for e in self.entries.iter().filter(|e| e.position <= position) {
            *net.entry(e.edge).or_insert(0) += e.multiplicity as i64;
        }
        let mut out = Vec::new();
        for (edge, m) in net {
            match m {
                0 => {}
                1 => out.push(edge),
                net => {
                    return Err(EdsError::BadReconstruction {
                        edge,
                        position,
                        net,
                    })
                }
            }
        }
        Ok(out)
    }

    /// Serializes the stream: a header naming the collection, order, and
    /// total entry count, then one `position,edge_id,multiplicity` record per
    /// entry in (position, edge) order.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("collection,{}\n", self.collection));
        out.push_str(&format!("order,{}\n", self.view_names.join("|")));
        out.push_str(&format!("total,{}\n", self.entries.len()));
        out.push_str("position,edge_id,multiplicity\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.position, e.edge, e.multiplicity));
        }
        out
    }

    pub fn deserialize(text: &str) -> Result<EdgeDifferenceStream, EdsError> {
        let mut lines = text.lines();
        let take = |lines: &mut std::str::Lines<'_>, key: &str| -> Result<String, EdsError> {
            let line = lines
                .next()
                .ok_or_else(|| EdsError::Malformed(format!("missing `{key}` line")))?;
            line.strip_prefix(&format!("{key},"))
                .map(|s| s.to_string())
                .ok_or_else(|| EdsError::Malformed(format!("expected `{key},...`, got `{line}`")))
        };
        let collection = take(&mut lines, "collection")?;
        let order_line = take(&mut lines, "order")?;
        let total: usize = take(&mut lines, "total")?
            .parse()
            .map_err(|_| EdsError::Malformed("bad total".into()))?;
        let header = lines.next().unwrap_or_default();
        if header != "position,edge_id,multiplicity" {
            return Err(EdsError::Malformed("missing column header".into()));
        }
        let view_names: Vec<String> = if order_line.is_empty() {
            Vec::new()
        } else {
            order_line.split('|').map(|s| s.to_string()).collect()
        };
        let mut entries = Vec::with_capacity(total);
        for line in lines {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let err = || EdsError::Malformed(format!("bad entry `{line}`"));
            let position = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
            let edge = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
            let multiplicity = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
            entries.push(DiffEntry {
                position,
                edge,
                multiplicity,
            });
        }
        if entries.len() != total {
            return Err(EdsError::Malformed(format!(
                "total says {total} but {} entries present",
                entries.len()
            )));
        }
        let order = ViewOrder::identity(view_names.len());
        Ok(EdgeDifferenceStream {
            collection,
            view_names,
            order,
            entries,
        })
    }
}

/// Materializes the difference stream for the collection under the given
/// order. The total entry count always equals `diff_count(ebm, order)`.
pub fn compute_eds(
    ebm: &EdgeBooleanMatrix,
    order: &ViewOrder,
    collection: &str,
) -> EdgeDifferenceStream {
    assert_eq!(order.len(), ebm.k(), "order does not match the matrix");
    let k = ebm.k();
    // Collect per position so entries come out sorted by (position, edge).
    let mut per_position: Vec<Vec<DiffEntry>> = vec![Vec::new(); k];
    for row in 0..ebm.rows() {
        let mut prev = false;
        for (t, &col) in order.as_slice().iter().enumerate() {
            let cur = ebm.get(row, col);
            if cur != prev {
                per_position[t].push(DiffEntry {
                    position: t + 1,
                    edge: row as EdgeId,
                    multiplicity: if cur { 1 } else { -1 },
                });
                prev = cur;
            }
        }
    }
    let entries: Vec<DiffEntry> = per_position.into_iter().flatten().collect();
    debug_assert_eq!(entries.len() as u64, diff_count(ebm, order));
    let view_names = order
        .as_slice()
        .iter()
        .map(|&v| ebm.view_names()[v].clone())
        .collect();
    EdgeDifferenceStream {
        collection: collection.to_string(),
        view_names,
        order: order.clone(),
        entries,
    }
}
