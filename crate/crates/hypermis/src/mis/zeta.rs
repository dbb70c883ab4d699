//! Completion counts for partial edges.
//!
//! For a partial edge `x` and `j >= 1`, `N_j(x)` is the set of distinct
//! completions `e \ x` over edges `e ⊇ x` with `|e| = |x| + j`; its scaled
//! size is `|N_j(x)|^(1/j)`. A node `v` only looks at partial edges that
//! contain it, which it can do once it knows the member lists of its
//! incident edges.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::netsim::{Metrics, Payload};

/// A value `count^(1/j)` kept as the exact pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Scaled {
    pub count: usize,
    pub j: usize,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled { count: 0, j: 1 };

    pub fn value(self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.count as f64).powf(1.0 / self.j as f64)
        }
    }

    pub fn max(self, other: Scaled) -> Scaled {
        if other.value() > self.value() + 1e-12 {
            other
        } else {
            self
        }
    }
}

impl Payload for Scaled {
    fn bits(&self, word: u64) -> u64 {
        2 * word
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaProfile {
    pub d: usize,
    /// `per_node[v][i - 2]`: best scaled count at `v` over partial edges
    /// completing to size `i`, for `i` in `2..=d`.
    pub per_node: Vec<Vec<f64>>,
    pub zeta: f64,
    pub witness: Scaled,
    pub metrics: Metrics,
}

/// Local computation at `v` from the member lists of its incident edges.
/// Returns the per-size maxima and the best pair.
pub fn node_zeta(v: usize, incident: &[&[usize]], d: usize) -> (Vec<f64>, Scaled) {
    let lists: BTreeSet<&[usize]> = incident.iter().copied().collect();
    let mut partials: BTreeSet<Vec<usize>> = BTreeSet::new();
    for e in &lists {
        let others: Vec<usize> = e.iter().copied().filter(|&u| u != v).collect();
        // proper subsets of e that contain v
        for mask in 0u64..(1u64 << others.len()) {
            if mask.count_ones() as usize == others.len() {
                continue;
            }
            let mut x: Vec<usize> = (0..others.len()).filter(|&i| mask >> i & 1 == 1).map(|i| others[i]).collect();
            x.push(v);
            x.sort_unstable();
            partials.insert(x);
        }
    }
    let mut per_size = vec![0.0f64; d.saturating_sub(1)];
    let mut best = Scaled::ZERO;
    for x in &partials {
        let mut by_size: BTreeMap<usize, usize> = BTreeMap::new();
        for e in &lists {
            if e.len() > x.len() && e.len() <= d && x.iter().all(|u| e.binary_search(u).is_ok()) {
                *by_size.entry(e.len()).or_insert(0) += 1;
            }
        }
        for (size, count) in by_size {
            let s = Scaled { count, j: size - x.len() };
            per_size[size - 2] = per_size[size - 2].max(s.value());
            best = best.max(s);
        }
    }
    (per_size, best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig1_vertex_four() {
        let e2: &[usize] = &[1, 3];
        let e3: &[usize] = &[2, 3];
        let (per, best) = node_zeta(3, &[e2, e3], 3);
        assert_eq!(best, Scaled { count: 2, j: 1 });
        assert_eq!(per, vec![2.0, 0.0]);
    }

    #[test]
    fn single_pair() {
        let e: &[usize] = &[0, 1];
        assert_eq!(node_zeta(0, &[e], 2).1.value(), 1.0);
        assert_eq!(node_zeta(0, &[], 2).1, Scaled::ZERO);
    }

    #[test]
    fn roots_compare_by_value() {
        let a = Scaled { count: 4, j: 2 };
        let b = Scaled { count: 3, j: 1 };
        assert_eq!(a.max(b), b);
        assert_eq!(Scaled { count: 2, j: 1 }.max(a), Scaled { count: 2, j: 1 });
    }
}
