//! Dominating-set applications on standard graphs, each reduced to a
//! hypergraph MIS.
//!
//! * [`rmds`]: minimal dominating set inside a dominating subset `R`.
//!   Each vertex `v` becomes the edge `R ∩ N[v]`; the complement (within
//!   `R`) of an MIS is a minimal hitting set of those edges.
//! * [`bmds`]: random marking that keeps low-degree vertices, then RMDS on
//!   the marked set.
//! * [`mcds`]: level-by-level minimal covers along a BFS tree, which keeps
//!   the output connected.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;
use crate::hypergraph::Hypergraph;
use crate::mis::{solve, Engine, MisError, MisInstance};
use crate::netsim::{
    aggregate, bfs_tree, connected_components, elect_leader, mix, Forest, Metrics, Mode, Representation,
    Session, SimError, Topology,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AppError {
    #[error("restriction set does not dominate vertex {vertex}")]
    NotDominating { vertex: usize },
    #[error("vertex {vertex} is out of range")]
    OutOfRange { vertex: usize },
    #[error("graph must be connected")]
    Disconnected,
    #[error("invariant broken: {0}")]
    Invariant(String),
    #[error(transparent)]
    Mis(#[from] MisError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RmdsResult {
    pub set: Vec<usize>,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BmdsResult {
    pub set: Vec<usize>,
    pub metrics: Metrics,
    /// Average degree of the input, as `num/den`.
    pub delta: String,
    /// Marking probability used by vertices of degree above `2 delta`.
    pub high_degree_probability: f64,
    pub marked: Vec<usize>,
    /// Mean degree in the input graph over the output vertices.
    pub output_avg_degree: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McdsResult {
    pub set: Vec<usize>,
    pub metrics: Metrics,
    pub leader: usize,
    pub levels: usize,
    /// Rounds charged for relaying messages inside super-nodes.
    pub forwarding_rounds: u64,
}

fn check_ids(n: usize, ids: &[usize]) -> Result<Vec<bool>, AppError> {
    let mut m = vec![false; n];
    for &v in ids {
        if v >= n {
            return Err(AppError::OutOfRange { vertex: v });
        }
        m[v] = true;
    }
    Ok(m)
}

/// Minimal dominating set of `g` drawn from `r`. The hypergraph has a
/// server per vertex of `r` and a client per vertex of `g`; its network is
/// the server-client form of that hypergraph, which `g` can host.
pub fn rmds(g: &Graph, r: &[usize], engine: &Engine, mode: Mode, seed: u64) -> Result<RmdsResult, AppError> {
    let in_r = check_ids(g.n(), r)?;
    let servers: Vec<usize> = (0..g.n()).filter(|&v| in_r[v]).collect();
    let index: BTreeMap<usize, usize> = servers.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut edges = Vec::with_capacity(g.n());
    for v in 0..g.n() {
        let e: Vec<usize> =
            std::iter::once(v).chain(g.neighbors(v).iter().copied()).filter_map(|u| index.get(&u).copied()).collect();
        if e.is_empty() {
            return Err(AppError::NotDominating { vertex: v });
        }
        edges.push(e);
    }
    let h = Hypergraph::build(servers.len(), edges).expect("ids come from the index");
    let res = solve(&MisInstance::full(&h, Representation::ServerClient, mode), engine, seed)?;
    let mis: BTreeSet<usize> = res.set.into_iter().collect();
    let set = servers.iter().enumerate().filter(|(i, _)| !mis.contains(i)).map(|(_, &v)| v).collect();
    Ok(RmdsResult { set, metrics: res.metrics })
}

/// `t = 2 delta ln delta / ln ln delta` and the high-degree marking
/// probability `ln t / t`. Below `delta = e` the formula has no meaning and
/// high-degree vertices stay unmarked.
pub fn bmds_probability(delta: f64) -> (Option<f64>, f64) {
    if delta <= std::f64::consts::E {
        return (None, 0.0);
    }
    let t = 2.0 * delta * delta.ln() / delta.ln().ln();
    if t <= 1.0 {
        return (Some(t), 0.0);
    }
    (Some(t), (t.ln() / t).clamp(0.0, 1.0))
}

pub fn bmds(g: &Graph, engine: &Engine, mode: Mode, seed: u64) -> Result<BmdsResult, AppError> {
    let n = g.n();
    if n == 0 || !g.is_connected() {
        return Err(AppError::Disconnected);
    }
    let topo = Topology::from_graph(g);
    let mut sess = Session::new(&topo, mode, seed);
    let leader = elect_leader(&mut sess)?;
    let tree = bfs_tree(&mut sess, leader)?;
    let forest = Forest::from_bfs(&tree.forest);
    let values = forest.values_from(|v| Some((g.degree(v), 1usize)));
    let totals = aggregate(&mut sess, &forest, values, |a: &(usize, usize), b: &(usize, usize)| (a.0 + b.0, a.1 + b.1))?;
    let mut marked = vec![false; n];
    let mut delta = Ratio::from_integer(0u64);
    let mut prob = 0.0;
    for v in 0..n {
        let (sum, count) = totals[v][0].expect("connected graph reaches every vertex");
        delta = Ratio::new(sum as u64, count as u64);
        let df = sum as f64 / count as f64;
        prob = bmds_probability(df).1;
        marked[v] = if g.degree(v) as f64 > 2.0 * df { sess.rng(v).gen::<f64>() < prob } else { true };
    }
    let out: Vec<Vec<(usize, bool)>> =
        (0..n).map(|v| g.neighbors(v).iter().map(|&u| (u, marked[v])).collect()).collect();
    let inbox = sess.exchange(out)?;
    for v in 0..n {
        if !marked[v] && !inbox[v].iter().any(|&(_, m)| m) {
            marked[v] = true;
        }
    }
    let r: Vec<usize> = (0..n).filter(|&v| marked[v]).collect();
    if let Some(v) = (0..n).find(|&v| !marked[v] && !g.neighbors(v).iter().any(|&u| marked[u])) {
        return Err(AppError::Invariant(format!("marked set misses vertex {v}")));
    }
    let inner = rmds(g, &r, engine, mode, mix(seed, 1))?;
    let mut metrics = sess.metrics;
    metrics.absorb(&inner.metrics);
    let avg = if inner.set.is_empty() {
        0.0
    } else {
        inner.set.iter().map(|&v| g.degree(v)).sum::<usize>() as f64 / inner.set.len() as f64
    };
    Ok(BmdsResult {
        set: inner.set,
        metrics,
        delta: format!("{}/{}", delta.numer(), delta.denom()),
        high_degree_probability: prob,
        marked: r,
        output_avg_degree: avg,
    })
}

/// Hop diameter of `part` inside `g`.
fn inner_diameter(g: &Graph, part: &[usize]) -> usize {
    let inside: BTreeSet<usize> = part.iter().copied().collect();
    let mut best = 0;
    for &s in part {
        let mut dist = BTreeMap::from([(s, 0usize)]);
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let du = dist[&u];
            for &w in g.neighbors(u) {
                if inside.contains(&w) && !dist.contains_key(&w) {
                    dist.insert(w, du + 1);
                    queue.push_back(w);
                }
            }
        }
        best = best.max(dist.values().copied().max().unwrap_or(0));
    }
    best
}

/// Minimal connected dominating set. Levels are processed from the deepest
/// up; at level `i` every component of the current set and every level-`i`
/// vertex it does not dominate must be covered from level `i - 1`, and a
/// minimal cover is the complement of an MIS of that covering hypergraph.
pub fn mcds(g: &Graph, engine: &Engine, mode: Mode, seed: u64) -> Result<McdsResult, AppError> {
    let n = g.n();
    if n == 0 || !g.is_connected() {
        return Err(AppError::Disconnected);
    }
    let engine = match engine {
        Engine::DimReduced(_) => engine.clone(),
        e => Engine::DimReduced(Box::new(e.clone())),
    };
    let topo = Topology::from_graph(g);
    let mut sess = Session::new(&topo, mode, seed);
    let leader = elect_leader(&mut sess)?;
    let tree = bfs_tree(&mut sess, leader)?;
    let level: Vec<usize> = tree.forest.level.iter().map(|l| l.expect("connected")).collect();
    let k = tree.max_level[leader].unwrap_or(0);
    let mut in_m = vec![false; n];
    if k == 0 {
        in_m[leader] = true;
        return Ok(McdsResult { set: vec![leader], metrics: sess.metrics, leader, levels: 0, forwarding_rounds: 0 });
    }
    let mut forwarding = 0u64;
    let mut metrics = Metrics::default();

    for i in (1..=k).rev() {
        let labels = connected_components(&mut sess, &in_m)?;
        let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..n {
            if let Some(l) = labels[v] {
                comps.entry(l).or_default().push(v);
            }
        }
        comps.retain(|_, c| c.iter().any(|&v| level[v] == i));
        let plain: Vec<usize> = (0..n)
            .filter(|&v| level[v] == i && !in_m[v] && !g.neighbors(v).iter().any(|&u| in_m[u]))
            .collect();
        if i == 1 && comps.len() == 1 && plain.is_empty() {
            break;
        }
        if comps.is_empty() && plain.is_empty() {
            continue;
        }
        let servers: Vec<usize> = (0..n).filter(|&v| level[v] == i - 1).collect();
        let index: BTreeMap<usize, usize> = servers.iter().enumerate().map(|(j, &v)| (v, j)).collect();
        let cover = |members: &[usize]| -> Vec<usize> {
            let s: BTreeSet<usize> = members
                .iter()
                .flat_map(|&v| g.neighbors(v).iter().filter_map(|u| index.get(u).copied()))
                .collect();
            s.into_iter().collect()
        };
        let mut edges: Vec<Vec<usize>> = comps.values().map(|c| cover(c)).collect();
        edges.extend(plain.iter().map(|&v| cover(&[v])));
        if edges.iter().any(Vec::is_empty) {
            return Err(AppError::Invariant(format!("level {i} client without a parent")));
        }
        let h = Hypergraph::build(servers.len(), edges).expect("ids come from the index");
        let res = solve(&MisInstance::full(&h, Representation::ServerClient, mode), &engine, mix(seed, i as u64))?;
        // each logical round on a super-node's links is relayed through
        // the component, one hop per round, pipelined
        let relay = comps.values().map(|c| inner_diameter(g, c) as u64).max().unwrap_or(0);
        forwarding += res.metrics.rounds * relay;
        metrics.absorb(&res.metrics);
        let mis: BTreeSet<usize> = res.set.into_iter().collect();
        for (j, &v) in servers.iter().enumerate() {
            if !mis.contains(&j) {
                in_m[v] = true;
            }
        }
        check_level(g, &level, &in_m, i)?;
    }
    metrics.absorb(&sess.metrics);
    metrics.rounds += forwarding;
    let set = (0..n).filter(|&v| in_m[v]).collect();
    Ok(McdsResult { set, metrics, leader, levels: k, forwarding_rounds: forwarding })
}

/// After level `i`: every vertex on levels `i..` is dominated, and every
/// component of the set touches level `i - 1`.
fn check_level(g: &Graph, level: &[usize], in_m: &[bool], i: usize) -> Result<(), AppError> {
    let n = g.n();
    if let Some(v) = (0..n).find(|&v| level[v] >= i && !in_m[v] && !g.neighbors(v).iter().any(|&u| in_m[u])) {
        return Err(AppError::Invariant(format!("vertex {v} on level {} undominated after level {i}", level[v])));
    }
    let mut seen = vec![false; n];
    for s in 0..n {
        if !in_m[s] || seen[s] {
            continue;
        }
        let mut stack = vec![s];
        seen[s] = true;
        let mut touches = false;
        while let Some(u) = stack.pop() {
            touches |= level[u] + 1 == i;
            for &w in g.neighbors(u) {
                if in_m[w] && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if !touches {
            return Err(AppError::Invariant(format!("component of {s} misses level {}", i - 1)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{is_mcds, is_minimal_dominating, is_minimal_dominating_within};
    use rand::SeedableRng;

    fn kuw() -> Engine {
        Engine::KuwSqrt
    }

    pub(crate) fn random_connected(seed: u64, n: usize, extra: usize) -> Graph {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut pairs: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
        for _ in 0..extra {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a != b {
                pairs.push((a, b));
            }
        }
        Graph::from_edges(n, pairs).unwrap()
    }

    #[test]
    fn restricted_path() {
        let p = Graph::path(3);
        let r = rmds(&p, &[0, 2], &kuw(), Mode::congest(), 1).unwrap();
        assert_eq!(r.set, vec![0, 2]);
        assert_eq!(rmds(&p, &[0], &kuw(), Mode::congest(), 1).unwrap_err(), AppError::NotDominating { vertex: 2 });
    }

    #[test]
    fn restricted_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for seed in 0..30 {
            let g = random_connected(seed, 14, 8);
            let mut r: Vec<usize> = (0..14).filter(|_| rng.gen_bool(0.6)).collect();
            for v in 0..14 {
                if !r.contains(&v) && !g.neighbors(v).iter().any(|u| r.contains(u)) {
                    r.push(v);
                }
            }
            r.sort();
            let out = rmds(&g, &r, &kuw(), Mode::congest(), seed).unwrap();
            assert!(is_minimal_dominating_within(&g, &r, &out.set).pass);
        }
    }

    #[test]
    fn balanced_star_keeps_leaves() {
        let g = Graph::star(101);
        let out = bmds(&g, &kuw(), Mode::congest(), 4).unwrap();
        assert_eq!(out.set, (1..101).collect::<Vec<_>>());
        assert_eq!(out.output_avg_degree, 1.0);
        assert_eq!(out.delta, "200/101");
    }

    #[test]
    fn balanced_random() {
        for seed in 0..30 {
            let g = random_connected(seed, 16, 20);
            let out = bmds(&g, &kuw(), Mode::congest(), seed).unwrap();
            assert!(is_minimal_dominating(&g, &out.set).pass);
        }
        let k = Graph::complete(6);
        assert_eq!(bmds(&k, &kuw(), Mode::congest(), 1).unwrap().set.len(), 1);
    }

    #[test]
    fn probability_formula() {
        assert_eq!(bmds_probability(2.0), (None, 0.0));
        let (t, p) = bmds_probability(10.0);
        let t = t.unwrap();
        assert!((t - 2.0 * 10.0 * 10f64.ln() / 10f64.ln().ln()).abs() < 1e-9);
        assert!((p - t.ln() / t).abs() < 1e-12);
    }

    #[test]
    fn connected_path_and_star() {
        let out = mcds(&Graph::path(5), &kuw(), Mode::congest(), 0).unwrap();
        assert_eq!(out.set, vec![1, 2, 3]);
        assert_eq!(mcds(&Graph::star(7), &kuw(), Mode::congest(), 0).unwrap().set, vec![0]);
        assert_eq!(mcds(&Graph::new(1), &kuw(), Mode::congest(), 0).unwrap().set, vec![0]);
        assert_eq!(mcds(&Graph::path(2), &kuw(), Mode::congest(), 0).unwrap().set.len(), 1);
        assert_eq!(mcds(&Graph::new(2), &kuw(), Mode::congest(), 0).unwrap_err(), AppError::Disconnected);
    }

    #[test]
    fn connected_random() {
        for seed in 0..60 {
            let g = random_connected(seed, 5 + (seed as usize % 30), seed as usize % 25);
            let out = mcds(&g, &kuw(), Mode::congest(), seed).unwrap();
            let v = is_mcds(&g, &out.set).unwrap();
            assert!(v.pass, "seed {seed}: {:?} {:?}", out.set, v.witness);
        }
    }
}
