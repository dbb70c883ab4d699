//! Coloring, matching and maximal clique on hypergraphs, built on a
//! priority-based MIS step for ordinary graphs.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;
use crate::hypergraph::Hypergraph;
use crate::mis::engines::clog2;
use crate::netsim::{flood_ids, Extreme, Metrics, Mode, Representation, Session, SimError, Topology};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtrasError {
    #[error("edge {edge} has a single vertex and cannot be properly colored")]
    SingletonEdge { edge: usize },
    #[error("server graph is disconnected")]
    Disconnected,
    #[error("{what} did not finish within {iterations} iterations")]
    Timeout { what: &'static str, iterations: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
}

fn iteration_cap(n: usize) -> usize {
    50 * clog2(n).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LubyResult {
    pub set: Vec<usize>,
    pub iterations: usize,
    pub metrics: Metrics,
}

/// Luby's MIS on an ordinary graph. Each round every live vertex draws a
/// priority in `[1, n^4]`; a vertex whose `(priority, id)` beats every live
/// neighbor joins, and it and its neighbors retire.
pub fn luby_mis_2dim(g: &Graph, mode: Mode, seed: u64) -> Result<LubyResult, ExtrasError> {
    let n = g.n();
    let topo = Topology::from_graph(g);
    let mut sess = Session::new(&topo, mode, seed);
    let top = (n as u64).saturating_pow(4).max(1);
    let mut live = vec![true; n];
    let mut set = Vec::new();
    let mut iterations = 0;
    let cap = iteration_cap(n);
    while live.iter().any(|&x| x) {
        if iterations == cap {
            return Err(ExtrasError::Timeout { what: "luby", iterations });
        }
        iterations += 1;
        let prio: Vec<u64> = (0..n).map(|v| if live[v] { sess.rng(v).gen_range(1..=top) } else { 0 }).collect();
        let out = (0..n)
            .map(|v| if live[v] { g.neighbors(v).iter().map(|&u| (u, prio[v])).collect() } else { Vec::new() })
            .collect();
        let heard = sess.exchange(out)?;
        let joined: Vec<bool> =
            (0..n).map(|v| live[v] && heard[v].iter().all(|&(u, r)| (prio[v], v) > (r, u))).collect();
        let out = (0..n)
            .map(|v| if joined[v] { g.neighbors(v).iter().map(|&u| (u, ())).collect() } else { Vec::new() })
            .collect();
        let told = sess.exchange(out)?;
        for v in 0..n {
            if joined[v] {
                set.push(v);
                live[v] = false;
            } else if !told[v].is_empty() {
                live[v] = false;
            }
        }
    }
    set.sort_unstable();
    Ok(LubyResult { set, iterations, metrics: sess.metrics })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coloring {
    /// Color of each vertex, in `1..=palette`.
    pub colors: Vec<usize>,
    /// `max degree + 1`.
    pub palette: usize,
    /// The two-vertex edges the coloring was computed on.
    pub reduced: Vec<(usize, usize)>,
    pub iterations: usize,
    pub metrics: Metrics,
}

/// Pairs of a hypergraph joined by their carrier edge, one per pair.
struct Pairs {
    partners: Vec<Vec<(usize, usize)>>,
    list: Vec<(usize, usize)>,
}

impl Pairs {
    fn of(h: &Hypergraph) -> Result<Self, ExtrasError> {
        let mut carrier: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (j, e) in h.edges().iter().enumerate() {
            if e.len() < 2 {
                return Err(ExtrasError::SingletonEdge { edge: j });
            }
            carrier.entry((e[0], e[1])).or_insert(j);
        }
        let mut partners = vec![Vec::new(); h.n()];
        for (&(a, b), &j) in &carrier {
            partners[a].push((b, j));
            partners[b].push((a, j));
        }
        Ok(Pairs { partners, list: carrier.into_keys().collect() })
    }

    /// Delivers `msgs[v]` (partner, payload) along the pair, through the
    /// carrier's client when there is one. Inboxes hold (partner, payload).
    fn deliver<M: crate::netsim::Payload + Clone>(
        &self,
        sess: &mut Session<'_>,
        msgs: Vec<Vec<(usize, M)>>,
    ) -> Result<Vec<Vec<(usize, M)>>, SimError> {
        let topo = sess.topology();
        let n = msgs.len();
        let carrier = |v: usize, w: usize| self.partners[v].iter().find(|p| p.0 == w).map(|p| p.1).unwrap();
        match topo.representation() {
            Some(Representation::ServerClient) => {
                // a carrier's client knows its pair, so payloads travel bare
                let mut out = vec![Vec::new(); topo.node_count()];
                for (v, list) in msgs.into_iter().enumerate() {
                    for (w, m) in list {
                        out[v].push((topo.client(carrier(v, w)).unwrap(), m));
                    }
                }
                let at_clients = sess.exchange(out)?;
                let mut out = vec![Vec::new(); topo.node_count()];
                for (c, inbox) in at_clients.into_iter().enumerate().skip(n) {
                    let e = topo.hyperedge(c - n);
                    for (from, m) in inbox {
                        out[c].push((if from == e[0] { e[1] } else { e[0] }, m));
                    }
                }
                let relayed = sess.exchange(out)?;
                Ok(relayed
                    .into_iter()
                    .take(n)
                    .enumerate()
                    .map(|(v, list)| {
                        list.into_iter()
                            .map(|(c, m)| {
                                let e = topo.hyperedge(c - n);
                                (e[0] + e[1] - v, m)
                            })
                            .collect()
                    })
                    .collect())
            }
            _ => {
                let got = sess.exchange(msgs)?;
                Ok(got.into_iter().take(n).collect())
            }
        }
    }
}

/// `(max degree + 1)`-coloring with no monochromatic edge. Each edge is
/// replaced by the pair of its two smallest members; the pair graph is
/// colored by random trials, each vertex drawing from the colors in
/// `1..=deg+1` its neighbors have not taken.
pub fn hyper_coloring(h: &Hypergraph, repr: Representation, mode: Mode, seed: u64) -> Result<Coloring, ExtrasError> {
    let n = h.n();
    let pairs = Pairs::of(h)?;
    let topo = Topology::from_hypergraph(h, repr);
    let mut sess = Session::new(&topo, mode, seed);
    let mut colors = vec![0usize; n];
    let mut taken: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut iterations = 0;
    let cap = iteration_cap(n);
    while colors.contains(&0) {
        if iterations == cap {
            return Err(ExtrasError::Timeout { what: "coloring", iterations });
        }
        iterations += 1;
        let mut trial = vec![0usize; n];
        for v in 0..n {
            if colors[v] == 0 {
                let free: Vec<usize> =
                    (1..=pairs.partners[v].len() + 1).filter(|c| !taken[v].contains(c)).collect();
                trial[v] = *free.choose(sess.rng(v)).expect("palette exceeds colored neighbors");
            }
        }
        let out = (0..n)
            .map(|v| {
                if trial[v] == 0 {
                    Vec::new()
                } else {
                    pairs.partners[v].iter().map(|&(w, _)| (w, trial[v])).collect()
                }
            })
            .collect();
        let heard = pairs.deliver(&mut sess, out)?;
        let kept: Vec<bool> = (0..n).map(|v| trial[v] != 0 && heard[v].iter().all(|&(_, c)| c != trial[v])).collect();
        let out = (0..n)
            .map(|v| if kept[v] { pairs.partners[v].iter().map(|&(w, _)| (w, trial[v])).collect() } else { Vec::new() })
            .collect();
        let told = pairs.deliver(&mut sess, out)?;
        for v in 0..n {
            if kept[v] {
                colors[v] = trial[v];
            }
            taken[v].extend(told[v].iter().map(|&(_, c)| c));
        }
    }
    let palette = h.stats().max_degree + 1;
    Ok(Coloring { colors, palette, reduced: pairs.list, iterations, metrics: sess.metrics })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matching {
    pub edges: Vec<usize>,
    pub iterations: usize,
    pub metrics: Metrics,
}

/// Maximal matching in the server-client network: Luby on the line graph,
/// with servers relaying the best priority among their live clients.
pub fn maximal_matching(h: &Hypergraph, mode: Mode, seed: u64) -> Result<Matching, ExtrasError> {
    let (n, m) = (h.n(), h.m());
    let topo = Topology::from_hypergraph(h, Representation::ServerClient);
    let mut sess = Session::new(&topo, mode, seed);
    let top = (m as u64).saturating_pow(4).max(1);
    let nodes = topo.node_count();
    let mut live = vec![true; m];
    let mut chosen = Vec::new();
    let mut iterations = 0;
    let cap = iteration_cap(m.max(2));
    while live.iter().any(|&x| x) {
        if iterations == cap {
            return Err(ExtrasError::Timeout { what: "matching", iterations });
        }
        iterations += 1;
        let mut out: Vec<Vec<(usize, (u64, usize))>> = vec![Vec::new(); nodes];
        let mut prio = vec![0u64; m];
        for j in (0..m).filter(|&j| live[j]) {
            prio[j] = sess.rng(n + j).gen_range(1..=top);
            out[n + j] = h.edge(j).iter().map(|&v| (v, (prio[j], j))).collect();
        }
        let at_servers = sess.exchange(out)?;
        let mut out = vec![Vec::new(); nodes];
        for v in 0..n {
            if let Some(best) = at_servers[v].iter().map(|&(_, p)| p).max() {
                out[v] = at_servers[v].iter().map(|&(c, _)| (c, best)).collect();
            }
        }
        let replies = sess.exchange(out)?;
        let joined: Vec<bool> =
            (0..m).map(|j| live[j] && replies[n + j].iter().all(|&(_, p)| p == (prio[j], j))).collect();
        let mut out = vec![Vec::new(); nodes];
        for j in (0..m).filter(|&j| joined[j]) {
            out[n + j] = h.edge(j).iter().map(|&v| (v, ())).collect();
        }
        let taken = sess.exchange(out)?;
        let mut out = vec![Vec::new(); nodes];
        for v in 0..n {
            if !taken[v].is_empty() {
                out[v] = at_servers[v].iter().map(|&(c, _)| (c, ())).collect();
            }
        }
        let blocked = sess.exchange(out)?;
        for j in 0..m {
            if joined[j] {
                chosen.push(j);
            }
            if joined[j] || !blocked[n + j].is_empty() {
                live[j] = false;
            }
        }
    }
    chosen.sort_unstable();
    Ok(Matching { edges: chosen, iterations, metrics: sess.metrics })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliqueResult {
    pub set: Vec<usize>,
    pub coordinator: usize,
    pub iterations: usize,
    pub metrics: Metrics,
}

/// Maximal clique of the server graph, coordinated by the smallest id `s`.
/// `s` hands its neighbors a random permutation; a neighbor joins when all
/// live neighbors ranked above it are adjacent to it, and a neighbor that
/// misses any of the newly joined leaves. Both tests are counts compared
/// against numbers sent by `s`.
pub fn maximal_clique(h: &Hypergraph, mode: Mode, seed: u64) -> Result<CliqueResult, ExtrasError> {
    let n = h.n();
    if n == 0 || !h.server_graph().is_connected() {
        return Err(ExtrasError::Disconnected);
    }
    let topo = Topology::from_hypergraph(h, Representation::ServerClient);
    let nodes = topo.node_count();
    let mut sess = Session::new(&topo, mode, seed);
    let s = flood_ids(&mut sess, Extreme::Min)?[0];
    let clients_of = |v: usize| -> Vec<usize> { topo.incident_edges(v).iter().map(|&j| n + j).collect() };
    let members = |c: usize| -> &[usize] { h.edge(c - n) };

    // s reaches its neighbors through its clients
    let mut out = vec![Vec::new(); nodes];
    out[s] = clients_of(s).into_iter().map(|c| (c, ())).collect();
    let at = sess.exchange(out)?;
    let mut out = vec![Vec::new(); nodes];
    for c in n..nodes {
        if !at[c].is_empty() {
            out[c] = members(c).iter().filter(|&&v| v != s).map(|&v| (v, ())).collect();
        }
    }
    let told = sess.exchange(out)?;
    // route[u]: a client shared by u and s
    let route: Vec<Option<usize>> = (0..n).map(|u| told[u].iter().map(|&(c, _)| c).min()).collect();
    let mut out = vec![Vec::new(); nodes];
    for u in 0..n {
        if let Some(c) = route[u] {
            out[u].push((c, ()));
        }
    }
    let at = sess.exchange(out)?;
    let mut out = vec![Vec::new(); nodes];
    for c in n..nodes {
        out[c] = at[c].iter().map(|&(u, _)| (s, u)).collect();
    }
    let joined_s = sess.exchange(out)?;
    let mut group: Vec<usize> = joined_s[s].iter().map(|&(_, u)| u).collect();
    group.sort_unstable();
    group.dedup();
    let mut via: BTreeMap<usize, usize> = BTreeMap::new();
    for &(c, u) in &joined_s[s] {
        via.entry(u).or_insert(c);
    }

    let mut order = group.clone();
    order.shuffle(sess.rng(s));
    let rank: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &u)| (u, order.len() - i)).collect();
    let mut prio = vec![0usize; n];
    let routed = |sess: &mut Session<'_>, payload: &BTreeMap<usize, usize>| -> Result<Vec<Option<usize>>, SimError> {
        let mut out = vec![Vec::new(); nodes];
        for (&u, &x) in payload {
            out[s].push((via[&u], (u, x)));
        }
        let at = sess.exchange(out)?;
        let mut out = vec![Vec::new(); nodes];
        for c in n..nodes {
            out[c] = at[c].iter().map(|&(_, (u, x))| (u, x)).collect();
        }
        let got = sess.exchange(out)?;
        Ok((0..n).map(|u| got[u].first().map(|&(_, x)| x)).collect())
    };
    for (u, p) in routed(&mut sess, &rank)?.into_iter().enumerate() {
        if let Some(p) = p {
            prio[u] = p;
        }
    }
    // every member of the group tells the others sharing an edge its rank
    let announce = |sess: &mut Session<'_>, speakers: &[usize], value: &dyn Fn(usize) -> usize| {
        let mut out = vec![Vec::new(); nodes];
        for &u in speakers {
            out[u] = clients_of(u).into_iter().map(|c| (c, value(u))).collect();
        }
        let at = sess.exchange(out)?;
        let mut out = vec![Vec::new(); nodes];
        for c in n..nodes {
            for &(u, x) in &at[c] {
                out[c].extend(members(c).iter().filter(|&&w| w != u).map(|&w| (w, (u, x))));
            }
        }
        let got = sess.exchange(out)?;
        Ok::<_, SimError>(
            (0..n)
                .map(|w| got[w].iter().map(|&(_, p)| p).collect::<BTreeMap<usize, usize>>())
                .collect::<Vec<_>>(),
        )
    };
    let in_group: BTreeSet<usize> = group.iter().copied().collect();
    let heard = announce(&mut sess, &group, &|u| prio[u])?;
    // neighbors[u]: group neighbors of u and their ranks
    let mut neighbors: Vec<BTreeMap<usize, usize>> = (0..n)
        .map(|u| heard[u].iter().filter(|(w, _)| in_group.contains(w)).map(|(&w, &p)| (w, p)).collect())
        .collect();

    let mut live: BTreeSet<usize> = in_group.clone();
    let mut clique = vec![s];
    let mut iterations = 0;
    while !live.is_empty() {
        iterations += 1;
        let above: BTreeMap<usize, usize> =
            live.iter().map(|&u| (u, live.iter().filter(|&&w| prio[w] > prio[u]).count())).collect();
        let got = routed(&mut sess, &above)?;
        let marked: Vec<usize> = live
            .iter()
            .copied()
            .filter(|&u| neighbors[u].values().filter(|&&p| p > prio[u]).count() == got[u].unwrap())
            .collect();
        let heard = announce(&mut sess, &marked, &|_| 1)?;
        let marked_set: BTreeSet<usize> = marked.iter().copied().collect();
        let rest: Vec<usize> = live.iter().copied().filter(|u| !marked_set.contains(u)).collect();
        let count: BTreeMap<usize, usize> = rest.iter().map(|&u| (u, marked.len())).collect();
        let got = routed(&mut sess, &count)?;
        let leaving: Vec<usize> =
            rest.iter().copied().filter(|&u| heard[u].keys().filter(|w| marked_set.contains(w)).count() < got[u].unwrap()).collect();
        let heard_leave = announce(&mut sess, &leaving, &|_| 0)?;
        for u in 0..n {
            for w in heard_leave[u].keys().chain(marked.iter()) {
                neighbors[u].remove(w);
            }
        }
        for &u in marked.iter().chain(leaving.iter()) {
            live.remove(&u);
        }
        clique.extend(marked);
    }
    clique.sort_unstable();
    Ok(CliqueResult { set: clique, coordinator: s, iterations, metrics: sess.metrics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{is_maximal_clique, is_maximal_independent, is_maximal_matching, is_valid_coloring};
    use rand::SeedableRng;

    fn fig1() -> Hypergraph {
        Hypergraph::build(4, [vec![0, 1, 2], vec![1, 3], vec![2, 3]]).unwrap()
    }

    fn random_h(seed: u64, n: usize, m: usize, dmax: usize, min: usize) -> Hypergraph {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let edges: Vec<Vec<usize>> = (0..m)
            .map(|_| {
                let k = rng.gen_range(min..=dmax.min(n));
                let mut all: Vec<usize> = (0..n).collect();
                all.shuffle(&mut rng);
                all.truncate(k);
                all
            })
            .collect();
        Hypergraph::build(n, edges).unwrap()
    }

    #[test]
    fn luby_trivial_and_random() {
        assert_eq!(luby_mis_2dim(&Graph::new(5), Mode::congest(), 0).unwrap().set, vec![0, 1, 2, 3, 4]);
        assert_eq!(luby_mis_2dim(&Graph::path(2), Mode::congest(), 0).unwrap().set.len(), 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for seed in 0..200 {
            let n = rng.gen_range(1..=12);
            let pairs: Vec<(usize, usize)> = (0..rng.gen_range(0..=20))
                .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
                .filter(|(a, b)| a != b)
                .collect();
            let g = Graph::from_edges(n, pairs).unwrap();
            let out = luby_mis_2dim(&g, Mode::congest(), seed).unwrap();
            assert!(is_maximal_independent(&g.to_hypergraph(), &out.set).pass);
            assert_eq!(out.metrics.violations, 0);
        }
    }

    #[test]
    fn coloring_fig1() {
        for repr in [Representation::ServerClient, Representation::VertexCentric] {
            for seed in 0..20 {
                let c = hyper_coloring(&fig1(), repr, Mode::congest(), seed).unwrap();
                assert_eq!(c.reduced, vec![(0, 1), (1, 3), (2, 3)]);
                assert_eq!(c.palette, 3);
                assert!(is_valid_coloring(&fig1(), &c.colors, 3).pass);
            }
        }
        let one = Hypergraph::build(2, [vec![0, 1]]).unwrap();
        let c = hyper_coloring(&one, Representation::ServerClient, Mode::congest(), 1).unwrap();
        assert_ne!(c.colors[0], c.colors[1]);
        let bad = Hypergraph::build(2, [vec![0, 1], vec![1]]).unwrap();
        assert_eq!(
            hyper_coloring(&bad, Representation::ServerClient, Mode::congest(), 1).unwrap_err(),
            ExtrasError::SingletonEdge { edge: 1 }
        );
    }

    #[test]
    fn coloring_random() {
        for seed in 0..200 {
            let h = random_h(seed, 10, 12, 4, 2);
            let repr = if seed % 2 == 0 { Representation::ServerClient } else { Representation::VertexCentric };
            let c = hyper_coloring(&h, repr, Mode::congest(), seed).unwrap();
            assert!(is_valid_coloring(&h, &c.colors, c.palette).pass, "seed {seed}");
            for &(a, b) in &c.reduced {
                assert_ne!(c.colors[a], c.colors[b]);
            }
            assert_eq!(c.metrics.violations, 0);
        }
    }

    #[test]
    fn matching_cases() {
        for seed in 0..20 {
            assert_eq!(maximal_matching(&fig1(), Mode::congest(), seed).unwrap().edges.len(), 1);
        }
        let disjoint = Hypergraph::build(6, [vec![0, 1], vec![2, 3, 4], vec![5]]).unwrap();
        assert_eq!(maximal_matching(&disjoint, Mode::congest(), 0).unwrap().edges, vec![0, 1, 2]);
        for seed in 0..200 {
            let h = random_h(seed, 12, 10, 4, 1);
            let out = maximal_matching(&h, Mode::congest(), seed).unwrap();
            assert!(is_maximal_matching(&h, &out.edges).pass, "seed {seed}");
            assert_eq!(out.metrics.violations, 0);
        }
    }

    #[test]
    fn clique_cases() {
        let out = maximal_clique(&fig1(), Mode::congest(), 0).unwrap();
        assert_eq!(out.coordinator, 0);
        assert_eq!(out.set, vec![0, 1, 2]);
        let k = Hypergraph::build(5, [vec![0, 1, 2], vec![2, 3, 4], vec![0, 3], vec![0, 4], vec![1, 3], vec![1, 4]]).unwrap();
        assert_eq!(maximal_clique(&k, Mode::congest(), 3).unwrap().set, vec![0, 1, 2, 3, 4]);
        let mut checked = 0;
        for seed in 0..1000 {
            let h = random_h(seed, 9, 10, 3, 2);
            if !h.server_graph().is_connected() {
                continue;
            }
            checked += 1;
            let out = maximal_clique(&h, Mode::congest(), seed).unwrap();
            assert!(is_maximal_clique(&h.server_graph(), &out.set).pass, "seed {seed}: {:?}", out.set);
        }
        assert!(checked >= 200, "{checked}");
    }
}
