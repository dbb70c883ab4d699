//! Randomized low-diameter network decomposition run as node programs.
//!
//! Color classes are built one at a time. In each class every server `y`
//! draws a radius `r_y` from a truncated geometric law and announces its
//! id up to distance `r_y` in the server graph. A server `v` picks
//! `C(v)`, the largest id it heard, and joins the set centred at `C(v)`
//! when it sits strictly inside that ball. Servers already placed keep
//! relaying but never join again. The links that carried `y`'s id form the
//! container of the set centred at `y`; first-arrival links give a tree
//! rooted at `y` used later for aggregation.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::hypergraph::Hypergraph;
use crate::netsim::{
    ceil_log2, Forest, NodeCtx, NodeProgram, NodeRng, Outbox, Regime, Representation, Role, Session,
    SimError, Status, Topology, TreeSlot,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompositionError {
    #[error("{unassigned} hypernodes still unassigned after {colors} colors")]
    Unassigned { unassigned: usize, colors: usize },
    #[error("topology must be built from a hypergraph")]
    NotHypergraphTopology,
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// How one color class is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// All balls grow at once; a message may carry many ids (LOCAL).
    Parallel,
    /// Radius classes `j = 1..B` run one after another; each node forwards
    /// only the largest id it has seen (one id per message).
    SubIterations,
}

impl Schedule {
    pub fn for_regime(r: Regime) -> Self {
        match r {
            Regime::Local => Schedule::Parallel,
            Regime::Congest => Schedule::SubIterations,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DecompositionConfig {
    pub schedule: Schedule,
    /// Cap on color classes; `None` means `50 * max(1, ceil(log2 n))`.
    pub max_colors: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterSet {
    pub color: usize,
    pub center: usize,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Container {
    pub nodes: Vec<usize>,
    pub links: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub sets: Vec<ClusterSet>,
    /// `containers[i]` belongs to `sets[i]`.
    pub containers: Vec<Container>,
    /// Index into `sets` for every hypernode.
    pub set_of: Vec<usize>,
    pub colors: usize,
    /// Per color (index `color - 1`): the container trees of that color,
    /// keyed by set index.
    pub trees: Vec<Forest>,
}

impl Decomposition {
    pub fn color_of(&self, v: usize) -> usize {
        self.sets[self.set_of[v]].color
    }

    /// Number of containers holding each topology link.
    pub fn link_multiplicity(&self) -> HashMap<(usize, usize), usize> {
        let mut mult = HashMap::new();
        for c in &self.containers {
            for &l in &c.links {
                *mult.entry(l).or_insert(0) += 1;
            }
        }
        mult
    }

    /// Export record: sets with 1-based ids and a multiplicity histogram.
    pub fn to_json(&self, topo: &Topology) -> serde_json::Value {
        let sets: Vec<_> = self
            .sets
            .iter()
            .map(|s| {
                serde_json::json!({
                    "color": s.color,
                    "center": s.center + 1,
                    "members": s.members.iter().map(|v| v + 1).collect::<Vec<_>>(),
                })
            })
            .collect();
        let mult = self.link_multiplicity();
        let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
        for l in topo.links() {
            *hist.entry(mult.get(&l).copied().unwrap_or(0)).or_insert(0) += 1;
        }
        let hist: BTreeMap<String, usize> = hist.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        serde_json::json!({ "sets": sets, "link_multiplicity_histogram": hist })
    }
}

/// `B = ceil(log2 n)` (at least 1) and `q = n^(-1/B)`.
pub fn radius_params(n: usize) -> (usize, f64) {
    let b = (ceil_log2(n as u64) as usize).max(1);
    let q = (n.max(1) as f64).powf(-1.0 / b as f64);
    (b, q)
}

/// Truncated geometric radius: `P[r = j] = (1-q) q^(j-1)` for `j < B`,
/// `P[r = B] = q^(B-1)`.
pub fn draw_radius(rng: &mut impl Rng, b: usize, q: f64) -> usize {
    let mut r = 1;
    while r < b && rng.gen::<f64>() < q {
        r += 1;
    }
    r
}

/// What one node learned about one announced id.
#[derive(Debug, Clone, Copy)]
struct Heard {
    /// Hops the id may still travel from here; positive means strictly
    /// inside the ball.
    rem: usize,
    parent: Option<usize>,
}

#[derive(Default)]
struct NodeView {
    heard: BTreeMap<usize, Heard>,
    forwarded: Vec<usize>,
    /// Final maximum of each radius class (sub-iteration schedule only).
    finals: Vec<(usize, Heard)>,
}

struct ParallelBalls<'a> {
    budgets: &'a [usize],
}

impl NodeProgram for ParallelBalls<'_> {
    type State = NodeView;
    type Msg = Vec<(usize, usize)>;
    type Output = NodeView;

    fn init(&self, ctx: &NodeCtx<'_>, _: &mut NodeRng) -> NodeView {
        let mut v = NodeView::default();
        if ctx.role == Role::Server && self.budgets[ctx.id] > 0 {
            v.heard.insert(ctx.id, Heard { rem: self.budgets[ctx.id], parent: None });
        }
        v
    }

    fn step(
        &self,
        ctx: &NodeCtx<'_>,
        st: &mut NodeView,
        round: usize,
        inbox: &[(usize, Self::Msg)],
        _: &mut NodeRng,
        out: &mut Outbox<Self::Msg>,
    ) -> Status {
        let mut fresh: BTreeMap<usize, Heard> = BTreeMap::new();
        if round == 1 {
            if let Some(h) = st.heard.get(&ctx.id) {
                fresh.insert(ctx.id, *h);
            }
        }
        for (from, toks) in inbox {
            for &(y, rem) in toks {
                if st.heard.contains_key(&y) {
                    continue;
                }
                let e = fresh.entry(y).or_insert(Heard { rem, parent: Some(*from) });
                if rem > e.rem {
                    *e = Heard { rem, parent: Some(*from) };
                }
            }
        }
        let mut send = Vec::new();
        for (&y, &h) in &fresh {
            st.heard.insert(y, h);
        }
        for (&y, &h) in &fresh {
            if h.rem == 0 {
                continue;
            }
            let dominated = st.heard.range(y + 1..).any(|(_, o)| o.rem >= h.rem);
            if !dominated {
                send.push((y, h.rem - 1));
                st.forwarded.push(y);
            }
        }
        if !send.is_empty() {
            out.broadcast(ctx, send);
        }
        Status::Halted
    }

    fn output(&self, _: &NodeCtx<'_>, st: NodeView) -> NodeView {
        st
    }
}

struct MaxFlood<'a> {
    starts: &'a [bool],
    steps: usize,
}

#[derive(Default)]
struct FloodView {
    best: Option<usize>,
    view: NodeView,
}

impl NodeProgram for MaxFlood<'_> {
    type State = FloodView;
    type Msg = usize;
    type Output = FloodView;

    fn init(&self, ctx: &NodeCtx<'_>, _: &mut NodeRng) -> FloodView {
        let mut f = FloodView::default();
        if self.starts[ctx.id] {
            f.best = Some(ctx.id);
            f.view.heard.insert(ctx.id, Heard { rem: self.steps, parent: None });
        }
        f
    }

    fn step(
        &self,
        ctx: &NodeCtx<'_>,
        st: &mut FloodView,
        round: usize,
        inbox: &[(usize, usize)],
        _: &mut NodeRng,
        out: &mut Outbox<usize>,
    ) -> Status {
        let mut changed = round == 1 && st.best.is_some();
        for &(from, y) in inbox {
            st.view
                .heard
                .entry(y)
                .or_insert(Heard { rem: self.steps - (round - 1), parent: Some(from) });
            if st.best.is_none_or(|b| y > b) {
                st.best = Some(y);
                changed = true;
            }
        }
        if changed && round <= self.steps {
            let y = st.best.unwrap();
            st.view.forwarded.push(y);
            out.broadcast(ctx, y);
        }
        Status::Halted
    }

    fn output(&self, _: &NodeCtx<'_>, st: FloodView) -> FloodView {
        st
    }
}

/// Runs the decomposition on the network of `h`.
pub fn linial_saks(
    sess: &mut Session<'_>,
    h: &Hypergraph,
    cfg: DecompositionConfig,
) -> Result<Decomposition, DecompositionError> {
    let topo = sess.topology();
    let repr = topo.representation().ok_or(DecompositionError::NotHypergraphTopology)?;
    let hop = match repr {
        Representation::ServerClient => 2,
        Representation::VertexCentric => 1,
    };
    let n = h.n();
    let nodes = topo.node_count();
    let (b, q) = radius_params(n);
    let cap = cfg.max_colors.unwrap_or(50 * (ceil_log2(n as u64) as usize).max(1));

    let mut set_of = vec![usize::MAX; n];
    let mut unassigned = n;
    let mut sets = Vec::new();
    let mut containers = Vec::new();
    let mut trees = Vec::new();
    let mut color = 0;

    while unassigned > 0 {
        if color == cap {
            return Err(DecompositionError::Unassigned { unassigned, colors: color });
        }
        color += 1;
        // assigned vertices relay but no longer announce themselves
        let radius: Vec<usize> =
            (0..n).map(|v| if set_of[v] == usize::MAX { draw_radius(sess.rng(v), b, q) } else { 0 }).collect();

        // per node: everything heard, and ids forwarded
        let views: Vec<NodeView> = match cfg.schedule {
            Schedule::Parallel => {
                let mut budgets = vec![0; nodes];
                for v in 0..n {
                    budgets[v] = radius[v] * hop;
                }
                sess.run(&ParallelBalls { budgets: &budgets })?
            }
            Schedule::SubIterations => {
                let mut acc: Vec<NodeView> = (0..nodes).map(|_| NodeView::default()).collect();
                for j in 1..=b {
                    let mut starts = vec![false; nodes];
                    for v in 0..n {
                        starts[v] = radius[v] == j;
                    }
                    let steps = match repr {
                        Representation::ServerClient => 2 * j,
                        Representation::VertexCentric => j,
                    };
                    let flood = sess.run(&MaxFlood { starts: &starts, steps })?;
                    for (v, f) in flood.into_iter().enumerate() {
                        // only the final maximum of this radius class competes
                        if let Some(y) = f.best {
                            acc[v].finals.push((y, f.view.heard[&y]));
                        }
                        // keep tree and container records for every id
                        for (y, h) in f.view.heard {
                            acc[v].heard.entry(y).or_insert(h);
                        }
                        acc[v].forwarded.extend(f.view.forwarded);
                    }
                }
                acc
            }
        };

        // acknowledgements to first-arrival parents, one per heard id
        let mut acks: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
        for (v, view) in views.iter().enumerate() {
            for (&y, h) in &view.heard {
                if let Some(p) = h.parent {
                    acks[v].push((p, y));
                }
            }
        }
        let inbox = sess.exchange(acks)?;

        // C(v) and the strict-radius membership rule
        let mut joined: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..n {
            if set_of[v] != usize::MAX {
                continue;
            }
            let best = match cfg.schedule {
                Schedule::Parallel => views[v].heard.iter().next_back().map(|(&y, &h)| (y, h)),
                Schedule::SubIterations => views[v].finals.iter().copied().max_by_key(|(y, _)| *y),
            };
            if let Some((y, h)) = best {
                if h.rem > 0 {
                    joined.entry(y).or_default().push(v);
                }
            }
        }

        let mut slots: Vec<Vec<TreeSlot>> = vec![Vec::new(); nodes];
        for (center, members) in joined {
            let key = sets.len();
            for &v in &members {
                set_of[v] = key;
            }
            unassigned -= members.len();
            let mut links = Vec::new();
            for (v, view) in views.iter().enumerate() {
                if view.forwarded.contains(&center) {
                    for &w in topo.neighbors(v) {
                        links.push((v.min(w), v.max(w)));
                    }
                }
            }
            links.sort_unstable();
            links.dedup();
            let mut cnodes: Vec<usize> = links.iter().flat_map(|&(a, b)| [a, b]).collect();
            cnodes.push(center);
            cnodes.sort_unstable();
            cnodes.dedup();
            for &v in &cnodes {
                let parent = views[v].heard.get(&center).and_then(|h| h.parent);
                let children = inbox[v].iter().filter(|&&(_, y)| y == center).map(|&(c, _)| c).collect();
                slots[v].push(TreeSlot { key, parent, children });
            }
            sets.push(ClusterSet { color, center, members });
            containers.push(Container { nodes: cnodes, links });
        }
        trees.push(Forest { slots });
    }

    Ok(Decomposition { sets, containers, set_of, colors: color, trees })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NotCovered { vertex: usize },
    MultiplyCovered { vertex: usize },
    MemberOutsideContainer { set: usize, vertex: usize },
    ContainerDisconnected { set: usize },
    Diameter { set: usize, diameter: usize, bound: f64 },
    SharedHyperedge { edge: usize, sets: Vec<usize> },
    LinkMultiplicity { link: (usize, usize), count: usize, bound: f64 },
}

/// Constants in the diameter bound `c_d * log2 n` and the congestion bound
/// `c_e * log2^3 n`.
#[derive(Debug, Clone, Copy)]
pub struct Bounds {
    pub c_d: f64,
    pub c_e: f64,
}

/// Checks partition, container diameter, same-color hyperedge
/// disjointness and link multiplicity. An empty list means no violation.
pub fn verify_decomposition(d: &Decomposition, h: &Hypergraph, bounds: Bounds) -> Vec<Violation> {
    let n = h.n();
    let log_n = if n > 1 { (n as f64).log2() } else { 0.0 };
    let mut out = Vec::new();

    let mut count = vec![0usize; n];
    for s in &d.sets {
        for &v in &s.members {
            count[v] += 1;
        }
    }
    for (v, &c) in count.iter().enumerate() {
        match c {
            0 => out.push(Violation::NotCovered { vertex: v }),
            1 => {}
            _ => out.push(Violation::MultiplyCovered { vertex: v }),
        }
    }

    let dia_bound = bounds.c_d * log_n;
    for (i, (s, c)) in d.sets.iter().zip(&d.containers).enumerate() {
        for &v in &s.members {
            if c.nodes.binary_search(&v).is_err() {
                out.push(Violation::MemberOutsideContainer { set: i, vertex: v });
            }
        }
        match container_diameter(c) {
            None => out.push(Violation::ContainerDisconnected { set: i }),
            Some(dia) if dia as f64 > dia_bound + 1e-9 => {
                out.push(Violation::Diameter { set: i, diameter: dia, bound: dia_bound })
            }
            Some(_) => {}
        }
    }

    let owner: Vec<Option<usize>> = {
        let mut o = vec![None; n];
        for (i, s) in d.sets.iter().enumerate() {
            for &v in &s.members {
                o[v] = Some(i);
            }
        }
        o
    };
    for (j, e) in h.edges().iter().enumerate() {
        let mut by_color: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &v in e {
            if let Some(i) = owner[v] {
                let ids = by_color.entry(d.sets[i].color).or_default();
                if !ids.contains(&i) {
                    ids.push(i);
                }
            }
        }
        for (_, sets) in by_color {
            if sets.len() > 1 {
                out.push(Violation::SharedHyperedge { edge: j, sets });
            }
        }
    }

    let mult_bound = bounds.c_e * log_n.powi(3);
    let mut mult: Vec<((usize, usize), usize)> = d.link_multiplicity().into_iter().collect();
    mult.sort_unstable();
    for (link, c) in mult {
        if c as f64 > mult_bound + 1e-9 {
            out.push(Violation::LinkMultiplicity { link, count: c, bound: mult_bound });
        }
    }
    out
}

/// Hop diameter of a container using only its own links; `None` if it is
/// disconnected.
pub fn container_diameter(c: &Container) -> Option<usize> {
    let idx: HashMap<usize, usize> = c.nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adj = vec![Vec::new(); c.nodes.len()];
    for &(a, b) in &c.links {
        let (a, b) = (idx[&a], idx[&b]);
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut best = 0;
    for s in 0..c.nodes.len() {
        let mut dist = vec![usize::MAX; c.nodes.len()];
        dist[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &w in &adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    q.push_back(w);
                }
            }
        }
        let far = *dist.iter().max().unwrap_or(&0);
        if far == usize::MAX {
            return None;
        }
        best = best.max(far);
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::netsim::Mode;
    use rand::SeedableRng;

    const LOOSE: Bounds = Bounds { c_d: 8.0, c_e: 50.0 };

    fn decompose(h: &Hypergraph, repr: Representation, regime: Regime, seed: u64) -> Decomposition {
        let t = Topology::from_hypergraph(h, repr);
        let mut s = Session::new(&t, Mode::new(regime), seed);
        let cfg = DecompositionConfig { schedule: Schedule::for_regime(regime), max_colors: None };
        linial_saks(&mut s, h, cfg).unwrap()
    }

    #[test]
    fn radius_law() {
        assert_eq!(radius_params(64), (6, 0.5));
        let (b, q) = radius_params(64);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut hist = [0usize; 7];
        for _ in 0..20000 {
            hist[draw_radius(&mut rng, b, q)] += 1;
        }
        // P[r=1] = 1/2, P[r=6] = 1/32
        assert!((hist[1] as f64 / 20000.0 - 0.5).abs() < 0.02);
        assert!((hist[6] as f64 / 20000.0 - 1.0 / 32.0).abs() < 0.01);
        assert_eq!(radius_params(1).0, 1);
    }

    #[test]
    fn single_node() {
        let h = Hypergraph::build(1, Vec::<Vec<usize>>::new()).unwrap();
        for repr in [Representation::ServerClient, Representation::VertexCentric] {
            let d = decompose(&h, repr, Regime::Congest, 1);
            assert_eq!(d.sets, vec![ClusterSet { color: 1, center: 0, members: vec![0] }]);
            assert_eq!(d.containers[0].nodes, vec![0]);
            assert!(verify_decomposition(&d, &h, LOOSE).is_empty());
        }
    }

    #[test]
    fn settled_centers_stop_competing() {
        // with one radius class the larger id reaches the smaller with no
        // hops left; once settled it must step aside
        let h = Hypergraph::build(2, [[0, 1]]).unwrap();
        for regime in [Regime::Local, Regime::Congest] {
            let d = decompose(&h, Representation::VertexCentric, regime, 0);
            assert_eq!(d.colors, 2);
            assert!(verify_decomposition(&d, &h, LOOSE).is_empty());
        }
    }

    #[test]
    fn clique_and_cycle_pass_the_validator() {
        let k8 = Graph::complete(8).to_hypergraph();
        let c64 = Graph::cycle(64).to_hypergraph();
        for seed in 0..100 {
            for repr in [Representation::ServerClient, Representation::VertexCentric] {
                for regime in [Regime::Local, Regime::Congest] {
                    let d = decompose(&c64, repr, regime, seed);
                    assert_eq!(verify_decomposition(&d, &c64, LOOSE), vec![], "seed {seed}");
                    if seed < 20 {
                        let d = decompose(&k8, repr, regime, seed);
                        assert_eq!(verify_decomposition(&d, &k8, LOOSE), vec![]);
                    }
                }
            }
        }
    }

    #[test]
    fn planted_faults() {
        let h = Hypergraph::build(2, [[0, 1]]).unwrap();
        let whole = Container { nodes: vec![0, 1, 2], links: vec![(0, 2), (1, 2)] };
        let d = Decomposition {
            sets: vec![
                ClusterSet { color: 1, center: 0, members: vec![0] },
                ClusterSet { color: 1, center: 1, members: vec![1] },
            ],
            containers: vec![whole.clone(), whole.clone()],
            set_of: vec![0, 1],
            colors: 1,
            trees: Vec::new(),
        };
        let v = verify_decomposition(&d, &h, LOOSE);
        assert_eq!(v, vec![Violation::SharedHyperedge { edge: 0, sets: vec![0, 1] }]);

        let line = Graph::path(16);
        let h = line.to_hypergraph();
        let d = Decomposition {
            sets: vec![ClusterSet { color: 1, center: 0, members: (0..16).collect() }],
            containers: vec![Container { nodes: (0..16).collect(), links: line.edges() }],
            set_of: vec![0; 16],
            colors: 1,
            trees: Vec::new(),
        };
        let v = verify_decomposition(&d, &h, Bounds { c_d: 1.0, c_e: 50.0 });
        assert_eq!(v, vec![Violation::Diameter { set: 0, diameter: 15, bound: 4.0 }]);
    }

    #[test]
    fn trees_reach_every_member() {
        let h = Graph::cycle(40).to_hypergraph();
        let d = decompose(&h, Representation::ServerClient, Regime::Congest, 7);
        for (i, s) in d.sets.iter().enumerate() {
            let f = &d.trees[s.color - 1];
            for &v in &s.members {
                let mut cur = v;
                let mut hops = 0;
                loop {
                    let k = f.slot_index(cur, i).expect("member holds a slot");
                    match f.slots[cur][k].parent {
                        Some(p) => cur = p,
                        None => break,
                    }
                    hops += 1;
                    assert!(hops < 100);
                }
                assert_eq!(cur, s.center);
            }
        }
    }
}
