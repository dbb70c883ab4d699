//! Subdivision graph `G'(G, H)` and an exhaustive check that its minimal
//! connected dominating sets avoid the subdividers of `E(G) \ E(H)`
//! exactly when `H` is a spanning connected subgraph of `G`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::generate::{connected_graph, spanning_tree};
use super::BenchError;
use crate::graph::Graph;

/// Largest `G'` the exhaustive check accepts.
pub const SCS_LIMIT: usize = 22;

#[derive(Debug, Clone, PartialEq)]
pub struct Subdivision {
    pub graph: Graph,
    /// Subdividing vertex of each edge of `G`, keyed `(u, v)` with `u < v`.
    pub subdivider: BTreeMap<(usize, usize), usize>,
    pub in_h: BTreeMap<(usize, usize), bool>,
    /// Pendant vertices, one per original vertex and per `H` subdivider.
    pub outer: Vec<usize>,
}

fn key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

/// Builds `G'`: vertices of `G` keep their ids, subdividers follow in edge
/// order, then the pendants.
pub fn subdivide(g: &Graph, h: &[(usize, usize)]) -> Result<Subdivision, BenchError> {
    let n = g.n();
    let mut in_h: BTreeMap<(usize, usize), bool> = g.edges().into_iter().map(|(u, v)| (key(u, v), false)).collect();
    for &(u, v) in h {
        match in_h.get_mut(&key(u, v)) {
            Some(x) => *x = true,
            None => return Err(BenchError::Infeasible(format!("({u}, {v}) is not an edge of G"))),
        }
    }
    let mut pairs = Vec::new();
    let mut subdivider = BTreeMap::new();
    let mut next = n;
    for &(u, v) in in_h.keys() {
        subdivider.insert((u, v), next);
        pairs.push((u, next));
        pairs.push((next, v));
        next += 1;
    }
    let mut outer = Vec::new();
    let anchors: Vec<usize> =
        (0..n).chain(in_h.iter().filter(|(_, &x)| x).map(|(k, _)| subdivider[k])).collect();
    for a in anchors {
        pairs.push((a, next));
        outer.push(next);
        next += 1;
    }
    Ok(Subdivision { graph: Graph::from_edges(next, pairs)?, subdivider, in_h, outer })
}

/// `H` touches every vertex of `G` and `(V(G), H)` is connected.
pub fn is_spanning_connected(g: &Graph, h: &[(usize, usize)]) -> bool {
    let sub = match Graph::from_edges(g.n(), h.iter().copied()) {
        Ok(s) => s,
        Err(_) => return false,
    };
    h.iter().all(|&(u, v)| g.has_edge(u, v)) && sub.is_connected()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScsVerdict {
    pub pass: bool,
    pub spanning_connected: bool,
    pub mcds_count: usize,
    /// An MCDS whose subdivider usage disagrees with `spanning_connected`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Vec<usize>>,
}

/// Enumerates every minimal connected dominating set of `G'(G, H)` and
/// checks the equivalence for each.
pub fn check_scs_reduction(g: &Graph, h: &[(usize, usize)]) -> Result<ScsVerdict, BenchError> {
    let sub = subdivide(g, h)?;
    let gp = &sub.graph;
    let n = gp.n();
    if n > SCS_LIMIT {
        return Err(BenchError::TooLarge { n, limit: SCS_LIMIT });
    }
    let closed: Vec<u32> =
        (0..n).map(|v| gp.neighbors(v).iter().fold(1u32 << v, |m, &u| m | 1 << u)).collect();
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let is_cds = |m: u32| -> bool {
        if m == 0 {
            return false;
        }
        let mut dom = 0u32;
        let mut bits = m;
        while bits != 0 {
            dom |= closed[bits.trailing_zeros() as usize];
            bits &= bits - 1;
        }
        if dom != full {
            return false;
        }
        let mut reach = 1u32 << m.trailing_zeros();
        loop {
            let mut grow = reach;
            let mut bits = reach;
            while bits != 0 {
                grow |= closed[bits.trailing_zeros() as usize] & m;
                bits &= bits - 1;
            }
            if grow == reach {
                return reach == m;
            }
            reach = grow;
        }
    };
    let cds: Vec<bool> = (0..=full).map(is_cds).collect();
    let forbidden: u32 =
        sub.in_h.iter().filter(|(_, &x)| !x).fold(0, |m, (k, _)| m | 1 << sub.subdivider[k]);
    let spanning = is_spanning_connected(g, h);
    let mut count = 0;
    for m in 0..=full {
        if !cds[m as usize] {
            continue;
        }
        let mut bits = m;
        let mut minimal = true;
        while bits != 0 {
            let b = bits & bits.wrapping_neg();
            if cds[(m ^ b) as usize] {
                minimal = false;
                break;
            }
            bits ^= b;
        }
        if !minimal {
            continue;
        }
        count += 1;
        if (m & forbidden == 0) != spanning {
            let set = (0..n).filter(|&v| m >> v & 1 == 1).collect();
            return Ok(ScsVerdict { pass: false, spanning_connected: spanning, mcds_count: count, counterexample: Some(set) });
        }
    }
    Ok(ScsVerdict { pass: count > 0, spanning_connected: spanning, mcds_count: count, counterexample: None })
}

/// Fifty deterministic `(G, H)` pairs small enough for the exhaustive
/// check, about half of them spanning connected.
pub fn scs_fixtures() -> Vec<(Graph, Vec<(usize, usize)>)> {
    let mut out = vec![
        (Graph::cycle(3), vec![(0, 1), (1, 2)]),
        (Graph::cycle(3), vec![(0, 1)]),
        (Graph::path(2), vec![(0, 1)]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5c5);
    while out.len() < 50 {
        let n = rng.gen_range(2..=5);
        let max = (n * (n - 1) / 2).min(6);
        let m = rng.gen_range(n - 1..=max);
        let g = connected_graph(&mut rng, n, m).expect("edge count in range");
        let mut h: Vec<(usize, usize)> = if rng.gen_bool(0.5) {
            let mut t = spanning_tree(&mut rng, &g);
            t.extend(g.edges().into_iter().filter(|_| rng.gen_bool(0.3)));
            t
        } else {
            g.edges().into_iter().filter(|_| rng.gen_bool(0.5)).collect()
        };
        h.sort_unstable();
        h.dedup();
        if 2 * n + m + h.len() <= SCS_LIMIT {
            out.push((g, h));
        }
    }
    out
}
