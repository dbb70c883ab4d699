//! Seeded instance generators.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::graph::Graph;
use crate::hypergraph::Hypergraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `m` distinct edges, sizes uniform on `[2, dmax]`, members uniform.
    Random,
    /// `G(n, p)` as a 2-uniform hypergraph.
    Graph,
    /// A uniform random spanning tree shape plus extra random edges, `m`
    /// edges in total.
    Connected,
    Star,
    BridgeRing,
    ScsSubdivision,
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "random" => Family::Random,
            "graph" => Family::Graph,
            "connected" => Family::Connected,
            "star" => Family::Star,
            "bridge-ring" => Family::BridgeRing,
            "scs-subdivision" => Family::ScsSubdivision,
            _ => {
                return Err(format!(
                    "unknown family {s:?} (expected random, graph, connected, star, bridge-ring or scs-subdivision)"
                ))
            }
        })
    }
}

/// Generator parameters. Unused fields are ignored by a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub family: Family,
    pub n: usize,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub dmax: Option<usize>,
    /// Edge probability for `graph`.
    #[serde(default)]
    pub p: Option<f64>,
    /// Target diameter for `bridge-ring`.
    #[serde(default)]
    pub diameter: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl GenSpec {
    pub fn new(family: Family, n: usize) -> Self {
        GenSpec { family, n, m: None, dmax: None, p: None, diameter: None, seed: 0 }
    }

    pub fn label(&self) -> String {
        let mut s = format!("{}-n{}", serde_plain(self.family), self.n);
        for (k, v) in [("m", self.m), ("d", self.dmax), ("D", self.diameter)] {
            if let Some(v) = v {
                s.push_str(&format!("-{k}{v}"));
            }
        }
        if let Some(p) = self.p {
            s.push_str(&format!("-p{p}"));
        }
        s.push_str(&format!("-s{}", self.seed));
        s
    }
}

fn serde_plain(f: Family) -> &'static str {
    match f {
        Family::Random => "random",
        Family::Graph => "graph",
        Family::Connected => "connected",
        Family::Star => "star",
        Family::BridgeRing => "bridge-ring",
        Family::ScsSubdivision => "scs-subdivision",
    }
}

fn infeasible(msg: impl Into<String>) -> BenchError {
    BenchError::Infeasible(msg.into())
}

pub fn generate(params: &GenSpec) -> Result<Hypergraph, BenchError> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n;
    match params.family {
        Family::Random => {
            let m = params.m.ok_or_else(|| infeasible("random needs m"))?;
            let dmax = params.dmax.unwrap_or(3);
            random_hypergraph(&mut rng, n, m, 2, dmax)
        }
        Family::Graph => {
            let p = params.p.ok_or_else(|| infeasible("graph needs p"))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(infeasible(format!("edge probability {p} outside [0, 1]")));
            }
            let mut pairs = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(p) {
                        pairs.push((u, v));
                    }
                }
            }
            Ok(Graph::from_edges(n, pairs)?.to_hypergraph())
        }
        Family::Connected => {
            let m = params.m.unwrap_or(n.saturating_sub(1));
            Ok(connected_graph(&mut rng, n, m)?.to_hypergraph())
        }
        Family::Star => {
            if n == 0 {
                return Err(infeasible("star needs n >= 1"));
            }
            Ok(Graph::star(n).to_hypergraph())
        }
        Family::BridgeRing => {
            let d = params.diameter.ok_or_else(|| infeasible("bridge-ring needs a diameter"))?;
            Ok(bridge_ring(n, d)?.graph.to_hypergraph())
        }
        Family::ScsSubdivision => {
            let m = params.m.unwrap_or(n.saturating_sub(1));
            let g = connected_graph(&mut rng, n, m)?;
            let tree = spanning_tree(&mut rng, &g);
            Ok(super::scs::subdivide(&g, &tree)?.graph.to_hypergraph())
        }
    }
}

/// `m` distinct edges with sizes uniform on `[dmin, dmax]`.
pub fn random_hypergraph(
    rng: &mut impl Rng,
    n: usize,
    m: usize,
    dmin: usize,
    dmax: usize,
) -> Result<Hypergraph, BenchError> {
    if dmin == 0 || dmin > dmax {
        return Err(infeasible(format!("edge sizes [{dmin}, {dmax}] are empty")));
    }
    if dmax > n {
        return Err(infeasible(format!("edge size {dmax} exceeds n = {n}")));
    }
    let mut seen = BTreeSet::new();
    let mut edges = Vec::with_capacity(m);
    let all: Vec<usize> = (0..n).collect();
    let mut attempts = 0;
    while edges.len() < m {
        attempts += 1;
        if attempts > 100 * m.max(1) {
            return Err(infeasible(format!("could not draw {m} distinct edges on {n} vertices")));
        }
        let k = rng.gen_range(dmin..=dmax);
        let mut e: Vec<usize> = all.choose_multiple(rng, k).copied().collect();
        e.sort_unstable();
        if seen.insert(e.clone()) {
            edges.push(e);
        }
    }
    Ok(Hypergraph::build(n, edges)?)
}

/// Random recursive tree plus uniform extra edges, `m` edges in total.
pub fn connected_graph(rng: &mut impl Rng, n: usize, m: usize) -> Result<Graph, BenchError> {
    if n == 0 {
        return Err(infeasible("connected graph needs n >= 1"));
    }
    let max = n * (n - 1) / 2;
    if m + 1 < n || m > max {
        return Err(infeasible(format!("a connected graph on {n} vertices has {} to {max} edges, not {m}", n - 1)));
    }
    let mut label: Vec<usize> = (0..n).collect();
    label.shuffle(rng);
    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let (a, b) = (label[i], label[j]);
        pairs.insert((a.min(b), a.max(b)));
    }
    while pairs.len() < m {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    Ok(Graph::from_edges(n, pairs)?)
}

/// Spanning tree by random-order BFS from a random root.
pub fn spanning_tree(rng: &mut impl Rng, g: &Graph) -> Vec<(usize, usize)> {
    let n = g.n();
    if n == 0 {
        return Vec::new();
    }
    let mut seen = vec![false; n];
    let root = rng.gen_range(0..n);
    seen[root] = true;
    let mut queue = std::collections::VecDeque::from([root]);
    let mut tree = Vec::new();
    while let Some(u) = queue.pop_front() {
        let mut next: Vec<usize> = g.neighbors(u).to_vec();
        next.shuffle(rng);
        for v in next {
            if !seen[v] {
                seen[v] = true;
                tree.push((u.min(v), u.max(v)));
                queue.push_back(v);
            }
        }
    }
    tree.sort_unstable();
    tree
}

#[derive(Debug, Clone, PartialEq)]
pub struct BridgeRing {
    pub graph: Graph,
    /// Spacing between bridge vertices.
    pub spacing: usize,
    pub bridges: Vec<usize>,
    /// Vertices left out: `n - 4 * spacing * diameter`.
    pub discarded: usize,
}

/// Cycle of `4 d D` vertices with a bridge every `d` positions, joined to
/// the `d` nearest vertices on each side; `d` is the largest spacing with
/// `4 d D <= n`.
pub fn bridge_ring(n: usize, diameter: usize) -> Result<BridgeRing, BenchError> {
    if diameter == 0 || 4 * diameter > n {
        return Err(infeasible(format!("bridge-ring needs 1 <= D and 4 D <= n (n = {n}, D = {diameter})")));
    }
    let d = n / (4 * diameter);
    let size = 4 * d * diameter;
    let mut ring = bridge_ring_with(size, d)?;
    ring.discarded = n - size;
    Ok(ring)
}

/// The ring on `size` vertices with bridges every `spacing` positions.
pub fn bridge_ring_with(size: usize, spacing: usize) -> Result<BridgeRing, BenchError> {
    if spacing == 0 || size < 2 * spacing + 1 {
        return Err(infeasible(format!("ring of {size} is too short for spacing {spacing}")));
    }
    let bridges: Vec<usize> = (0..size).step_by(spacing).collect();
    let mut pairs = BTreeSet::new();
    for &b in &bridges {
        for t in 1..=spacing {
            for w in [(b + t) % size, (b + size - t) % size] {
                pairs.insert((b.min(w), b.max(w)));
            }
        }
    }
    Ok(BridgeRing { graph: Graph::from_edges(size, pairs)?, spacing, bridges, discarded: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_degrees() {
        let h = generate(&GenSpec::new(Family::Star, 5)).unwrap();
        assert_eq!(h.degrees(), vec![4, 1, 1, 1, 1]);
    }

    #[test]
    fn twelve_vertex_ring() {
        let r = bridge_ring(12, 1).unwrap();
        assert_eq!(r.spacing, 3);
        assert_eq!(r.bridges, vec![0, 3, 6, 9]);
        assert_eq!(r.graph.edge_count(), 20);
        for v in 0..12 {
            assert_eq!(r.graph.degree(v), if v % 3 == 0 { 6 } else { 2 });
        }
        let mut n0 = r.graph.neighbors(0).to_vec();
        n0.sort_unstable();
        assert_eq!(n0, vec![1, 2, 3, 9, 10, 11]);
    }

    #[test]
    fn ring_degrees_split_bridges() {
        for n in [16, 40, 99, 200] {
            for diameter in 1..=n / 8 {
                let r = bridge_ring(n, diameter).unwrap();
                assert_eq!(r.graph.n() + r.discarded, n);
                assert!(r.discarded < 4 * diameter);
                if r.spacing < 2 {
                    continue;
                }
                for v in 0..r.graph.n() {
                    let bridge = r.bridges.binary_search(&v).is_ok();
                    let deg = r.graph.degree(v);
                    assert!(if bridge { deg > 2 } else { deg == 2 }, "n {n} D {diameter} v {v}");
                }
            }
        }
        assert!(bridge_ring(7, 2).is_err());
    }

    #[test]
    fn random_family_shape() {
        let params = GenSpec { m: Some(30), dmax: Some(4), seed: 9, ..GenSpec::new(Family::Random, 12) };
        let h = generate(&params).unwrap();
        assert_eq!(h.m(), 30);
        assert!(h.edges().iter().all(|e| (2..=4).contains(&e.len())));
        assert_eq!(generate(&params).unwrap(), h);
        let bad = GenSpec { m: Some(3), dmax: Some(13), ..GenSpec::new(Family::Random, 12) };
        assert!(matches!(generate(&bad), Err(BenchError::Infeasible(_))));
    }

    #[test]
    fn connected_family() {
        for seed in 0..20 {
            let params = GenSpec { m: Some(25), seed, ..GenSpec::new(Family::Connected, 20) };
            let h = generate(&params).unwrap();
            assert_eq!(h.m(), 25);
            assert!(h.server_graph().is_connected());
        }
    }

    #[test]
    fn subdivision_family() {
        let params = GenSpec { m: Some(6), seed: 2, ..GenSpec::new(Family::ScsSubdivision, 5) };
        let h = generate(&params).unwrap();
        // 5 originals, 6 subdividers, 5 + 4 outer vertices
        assert_eq!(h.n(), 20);
        assert_eq!(h.m(), 12 + 9);
    }
}
