//! Centralized checkers and brute-force solvers.
//!
//! Every check returns a [`Verdict`]; a failing verdict names a concrete
//! witness. Exhaustive routines refuse inputs above their size guard.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;
use crate::hypergraph::Hypergraph;
use crate::mis::Scaled;

pub const ENUMERATION_LIMIT: usize = 20;
pub const MCDS_LIMIT: usize = 40;
pub const ZETA_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{what} is limited to n <= {limit}, got n = {n}")]
    TooLarge { what: &'static str, n: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    OutOfRange { vertex: usize },
    ContainedEdge { edge: usize },
    Extendable { vertex: usize },
    UnhitEdge { edge: usize },
    Redundant { vertex: usize },
    Undominated { vertex: usize },
    Disconnected { vertex: usize },
    NotInRestriction { vertex: usize },
    Monochromatic { edge: usize },
    BadColor { vertex: usize },
    Overlap { a: usize, b: usize },
    Unblocked { edge: usize },
    NotAdjacent { u: usize, v: usize },
    Extends { vertex: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Verdict {
    pub fn ok() -> Self {
        Verdict { pass: true, witness: None }
    }

    pub fn fail(w: Witness) -> Self {
        Verdict { pass: false, witness: Some(w) }
    }

    fn and(self, next: impl FnOnce() -> Verdict) -> Verdict {
        if self.pass {
            next()
        } else {
            self
        }
    }
}

fn mask(n: usize, set: &[usize]) -> Result<Vec<bool>, Witness> {
    let mut m = vec![false; n];
    for &v in set {
        if v >= n {
            return Err(Witness::OutOfRange { vertex: v });
        }
        m[v] = true;
    }
    Ok(m)
}

macro_rules! mask_or_fail {
    ($n:expr, $set:expr) => {
        match mask($n, $set) {
            Ok(m) => m,
            Err(w) => return Verdict::fail(w),
        }
    };
}

fn independent_mask(h: &Hypergraph, m: &[bool]) -> Verdict {
    match h.edges().iter().position(|e| e.iter().all(|&v| m[v])) {
        Some(edge) => Verdict::fail(Witness::ContainedEdge { edge }),
        None => Verdict::ok(),
    }
}

/// No edge lies inside `m`.
pub fn is_independent(h: &Hypergraph, m: &[usize]) -> Verdict {
    let m = mask_or_fail!(h.n(), m);
    independent_mask(h, &m)
}

/// Independent, and every outside vertex would complete an edge.
pub fn is_maximal_independent(h: &Hypergraph, m: &[usize]) -> Verdict {
    let mut m = mask_or_fail!(h.n(), m);
    independent_mask(h, &m).and(|| {
        let inc = h.incidence();
        for v in 0..h.n() {
            if m[v] {
                continue;
            }
            m[v] = true;
            let blocked = inc[v].iter().any(|&j| h.edge(j).iter().all(|&u| m[u]));
            m[v] = false;
            if !blocked {
                return Verdict::fail(Witness::Extendable { vertex: v });
            }
        }
        Verdict::ok()
    })
}

/// Every maximal independent set, each sorted, in lexicographic order.
pub fn enumerate_mis(h: &Hypergraph) -> Result<Vec<Vec<usize>>, OracleError> {
    let n = h.n();
    if n > ENUMERATION_LIMIT {
        return Err(OracleError::TooLarge { what: "MIS enumeration", n, limit: ENUMERATION_LIMIT });
    }
    let edges: Vec<u32> = h.edges().iter().map(|e| e.iter().fold(0u32, |a, &v| a | 1 << v)).collect();
    let independent = |s: u32| edges.iter().all(|&e| s & e != e);
    let mut out = Vec::new();
    for s in 0u32..(1u32 << n) {
        if independent(s) && (0..n).all(|v| s >> v & 1 == 1 || !independent(s | 1 << v)) {
            out.push((0..n).filter(|&v| s >> v & 1 == 1).collect::<Vec<_>>());
        }
    }
    out.sort();
    Ok(out)
}

/// Meets every edge and no single vertex can be dropped.
pub fn is_minimal_hitting_set(h: &Hypergraph, t: &[usize]) -> Verdict {
    let mut t = mask_or_fail!(h.n(), t);
    let unhit = |t: &[bool]| h.edges().iter().position(|e| !e.iter().any(|&v| t[v]));
    if let Some(edge) = unhit(&t) {
        return Verdict::fail(Witness::UnhitEdge { edge });
    }
    for v in 0..h.n() {
        if t[v] {
            t[v] = false;
            let still = unhit(&t).is_none();
            t[v] = true;
            if still {
                return Verdict::fail(Witness::Redundant { vertex: v });
            }
        }
    }
    Verdict::ok()
}

fn undominated(g: &Graph, m: &[bool]) -> Option<usize> {
    (0..g.n()).find(|&v| !m[v] && !g.neighbors(v).iter().any(|&u| m[u]))
}

pub fn is_dominating(g: &Graph, m: &[usize]) -> Verdict {
    let m = mask_or_fail!(g.n(), m);
    match undominated(g, &m) {
        Some(v) => Verdict::fail(Witness::Undominated { vertex: v }),
        None => Verdict::ok(),
    }
}

pub fn is_minimal_dominating(g: &Graph, m: &[usize]) -> Verdict {
    let mut mk = mask_or_fail!(g.n(), m);
    is_dominating(g, m).and(|| {
        for v in 0..g.n() {
            if mk[v] {
                mk[v] = false;
                let still = undominated(g, &mk).is_none();
                mk[v] = true;
                if still {
                    return Verdict::fail(Witness::Redundant { vertex: v });
                }
            }
        }
        Verdict::ok()
    })
}

/// Minimal dominating set drawn from `r`.
pub fn is_minimal_dominating_within(g: &Graph, r: &[usize], m: &[usize]) -> Verdict {
    let rm = mask_or_fail!(g.n(), r);
    match m.iter().find(|&&v| v >= g.n() || !rm[v]) {
        Some(&v) => Verdict::fail(Witness::NotInRestriction { vertex: v }),
        None => is_minimal_dominating(g, m),
    }
}

fn connected_mask(g: &Graph, m: &[bool]) -> Option<usize> {
    let start = (0..g.n()).find(|&v| m[v])?;
    let mut seen = vec![false; g.n()];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &w in g.neighbors(u) {
            if m[w] && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    (0..g.n()).find(|&v| m[v] && !seen[v])
}

/// `G[m]` is connected (the empty set counts as connected).
pub fn is_connected(g: &Graph, m: &[usize]) -> Verdict {
    let m = mask_or_fail!(g.n(), m);
    match connected_mask(g, &m) {
        Some(v) => Verdict::fail(Witness::Disconnected { vertex: v }),
        None => Verdict::ok(),
    }
}

/// Connected dominating set from which no single vertex can be dropped.
pub fn is_mcds(g: &Graph, m: &[usize]) -> Result<Verdict, OracleError> {
    if g.n() > MCDS_LIMIT {
        return Err(OracleError::TooLarge { what: "MCDS check", n: g.n(), limit: MCDS_LIMIT });
    }
    let mut mk = match mask(g.n(), m) {
        Ok(mk) => mk,
        Err(w) => return Ok(Verdict::fail(w)),
    };
    Ok(is_dominating(g, m).and(|| is_connected(g, m)).and(|| {
        for v in 0..g.n() {
            if mk[v] {
                mk[v] = false;
                let still = undominated(g, &mk).is_none() && connected_mask(g, &mk).is_none();
                mk[v] = true;
                if still {
                    return Verdict::fail(Witness::Redundant { vertex: v });
                }
            }
        }
        Verdict::ok()
    }))
}

/// Colors in `1..=palette` with no monochromatic edge. `colors[v]` is the
/// color of vertex `v`.
pub fn is_valid_coloring(h: &Hypergraph, colors: &[usize], palette: usize) -> Verdict {
    if colors.len() != h.n() {
        return Verdict::fail(Witness::BadColor { vertex: colors.len().min(h.n()) });
    }
    if let Some(v) = (0..h.n()).find(|&v| colors[v] == 0 || colors[v] > palette) {
        return Verdict::fail(Witness::BadColor { vertex: v });
    }
    match h.edges().iter().position(|e| e.iter().all(|&v| colors[v] == colors[e[0]])) {
        Some(edge) => Verdict::fail(Witness::Monochromatic { edge }),
        None => Verdict::ok(),
    }
}

/// Pairwise disjoint edges such that every other edge meets one of them.
pub fn is_maximal_matching(h: &Hypergraph, chosen: &[usize]) -> Verdict {
    let mut used = vec![None; h.n()];
    for &j in chosen {
        if j >= h.m() {
            return Verdict::fail(Witness::OutOfRange { vertex: j });
        }
        for &v in h.edge(j) {
            if let Some(a) = used[v] {
                if a != j {
                    return Verdict::fail(Witness::Overlap { a, b: j });
                }
            }
            used[v] = Some(j);
        }
    }
    match (0..h.m()).find(|&j| h.edge(j).iter().all(|&v| used[v].is_none())) {
        Some(edge) => Verdict::fail(Witness::Unblocked { edge }),
        None => Verdict::ok(),
    }
}

/// Pairwise adjacent and no outside vertex is adjacent to all of `l`.
pub fn is_maximal_clique(g: &Graph, l: &[usize]) -> Verdict {
    let lm = mask_or_fail!(g.n(), l);
    let l: Vec<usize> = (0..g.n()).filter(|&v| lm[v]).collect();
    for (i, &u) in l.iter().enumerate() {
        for &v in &l[i + 1..] {
            if !g.has_edge(u, v) {
                return Verdict::fail(Witness::NotAdjacent { u, v });
            }
        }
    }
    match (0..g.n()).find(|&v| !lm[v] && l.iter().all(|&u| g.has_edge(u, v))) {
        Some(v) => Verdict::fail(Witness::Extends { vertex: v }),
        None => Verdict::ok(),
    }
}

/// Largest completion count over every nonempty vertex subset `x` and
/// every `j >= 1` with `|x| + j <= d`.
pub fn zeta_by_enumeration(h: &Hypergraph, d: usize) -> Result<Scaled, OracleError> {
    let n = h.n();
    if n > ZETA_LIMIT {
        return Err(OracleError::TooLarge { what: "completion-count enumeration", n, limit: ZETA_LIMIT });
    }
    let edges: BTreeSet<u32> = h.edges().iter().map(|e| e.iter().fold(0u32, |a, &v| a | 1 << v)).collect();
    let mut best = Scaled::ZERO;
    for x in 1u32..(1u32 << n) {
        let size = x.count_ones() as usize;
        for j in 1..=d.saturating_sub(size) {
            let count = edges.iter().filter(|&&e| e & x == x && e.count_ones() as usize == size + j).count();
            if count > 0 {
                best = best.max(Scaled { count, j });
            }
        }
    }
    Ok(best)
}

/// The longest prefix of `order` that is independent in `h`.
pub fn independent_prefix(h: &Hypergraph, order: &[usize]) -> Vec<usize> {
    let mut m = vec![false; h.n()];
    let inc = h.incidence();
    let mut out = Vec::new();
    for &v in order {
        m[v] = true;
        if inc[v].iter().any(|&j| h.edge(j).iter().all(|&u| m[u])) {
            break;
        }
        out.push(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> Hypergraph {
        Hypergraph::build(4, [vec![0, 1, 2], vec![1, 3], vec![2, 3]]).unwrap()
    }

    #[test]
    fn independence() {
        let h = fig1();
        assert!(is_independent(&h, &[0, 1]).pass);
        assert_eq!(is_independent(&h, &[1, 3]).witness, Some(Witness::ContainedEdge { edge: 1 }));
        assert!(is_independent(&h, &[]).pass);
        assert!(is_maximal_independent(&h, &[0, 1]).pass);
        assert_eq!(is_maximal_independent(&h, &[0]).witness, Some(Witness::Extendable { vertex: 1 }));
        let free = Hypergraph::build(3, Vec::<Vec<usize>>::new()).unwrap();
        assert!(is_maximal_independent(&free, &[0, 1, 2]).pass);
        assert!(!is_independent(&h, &[7]).pass);
    }

    #[test]
    fn enumeration_and_duality() {
        let h = fig1();
        let fam = enumerate_mis(&h).unwrap();
        assert_eq!(fam, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2]]);
        for m in &fam {
            let t: Vec<usize> = (0..4).filter(|v| !m.contains(v)).collect();
            assert!(is_minimal_hitting_set(&h, &t).pass);
        }
        assert_eq!(enumerate_mis(&Hypergraph::build(2, [[0, 1]]).unwrap()).unwrap(), vec![vec![0], vec![1]]);
        assert_eq!(enumerate_mis(&Hypergraph::build(3, Vec::<Vec<usize>>::new()).unwrap()).unwrap(), vec![vec![0, 1, 2]]);
        assert!(is_minimal_hitting_set(&h, &[1, 2]).pass);
        assert!(!is_minimal_hitting_set(&h, &[0, 1, 2, 3]).pass);
        assert!(enumerate_mis(&Hypergraph::build(21, Vec::<Vec<usize>>::new()).unwrap()).is_err());
    }

    #[test]
    fn domination() {
        let p5 = Graph::path(5);
        assert!(is_mcds(&p5, &[1, 2, 3]).unwrap().pass);
        assert_eq!(is_mcds(&p5, &[1, 3]).unwrap().witness, Some(Witness::Disconnected { vertex: 3 }));
        assert!(is_mcds(&Graph::star(6), &[0]).unwrap().pass);
        assert!(is_minimal_dominating(&Graph::path(3), &[0, 2]).pass);
        assert_eq!(is_minimal_dominating(&Graph::path(3), &[0, 1]).witness, Some(Witness::Redundant { vertex: 0 }));
        assert!(!is_minimal_dominating_within(&Graph::path(3), &[0, 2], &[1]).pass);
        assert!(is_mcds(&Graph::path(41), &[]).is_err());
    }

    #[test]
    fn extras() {
        let h = fig1();
        assert!(is_valid_coloring(&h, &[1, 2, 2, 1], 3).pass);
        assert!(!is_valid_coloring(&h, &[1, 2, 2, 2], 3).pass);
        assert!(!is_valid_coloring(&h, &[1, 2, 4, 1], 3).pass);
        assert!(is_maximal_matching(&h, &[0]).pass);
        assert_eq!(is_maximal_matching(&h, &[0, 1]).witness, Some(Witness::Overlap { a: 0, b: 1 }));
        assert!(!is_maximal_matching(&Hypergraph::build(4, [[0, 1], [2, 3]]).unwrap(), &[0]).pass);
        let g = h.server_graph();
        assert!(is_maximal_clique(&g, &[0, 1, 2]).pass);
        assert_eq!(is_maximal_clique(&g, &[1, 2]).witness, Some(Witness::Extends { vertex: 0 }));
        assert!(is_maximal_clique(&Graph::complete(4), &[0, 1, 2, 3]).pass);
    }

    #[test]
    fn completion_counts() {
        assert_eq!(zeta_by_enumeration(&fig1(), 3).unwrap(), Scaled { count: 2, j: 1 });
        assert_eq!(zeta_by_enumeration(&Hypergraph::build(2, [[0, 1]]).unwrap(), 2).unwrap().value(), 1.0);
        assert_eq!(zeta_by_enumeration(&Hypergraph::build(2, Vec::<Vec<usize>>::new()).unwrap(), 2).unwrap().value(), 0.0);
    }

    #[test]
    fn prefix() {
        assert_eq!(independent_prefix(&fig1(), &[3, 1, 0, 2]), vec![3]);
        assert_eq!(independent_prefix(&fig1(), &[0, 1, 3]), vec![0, 1]);
    }
}
