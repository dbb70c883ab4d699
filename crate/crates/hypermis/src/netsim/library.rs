//! Reusable node programs: extreme-id flooding (leader election), BFS
//! forests, convergecast/broadcast over trees, and min-label components.

use super::{NodeCtx, NodeProgram, NodeRng, Outbox, Payload, Session, SimError, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Max,
    Min,
}

impl Extreme {
    fn better(self, a: usize, b: Option<usize>) -> bool {
        match (self, b) {
            (_, None) => true,
            (Extreme::Max, Some(b)) => a > b,
            (Extreme::Min, Some(b)) => a < b,
        }
    }
}

/// Floods the extreme candidate id through each connected component.
/// Nodes whose candidate is `None` only relay.
pub struct Flood<'a> {
    pub candidates: &'a [Option<usize>],
    pub rule: Extreme,
}

impl NodeProgram for Flood<'_> {
    type State = Option<usize>;
    type Msg = usize;
    type Output = Option<usize>;

    fn init(&self, ctx: &NodeCtx<'_>, _: &mut NodeRng) -> Option<usize> {
        self.candidates[ctx.id]
    }

    fn step(
        &self,
        ctx: &NodeCtx<'_>,
        best: &mut Option<usize>,
        round: usize,
        inbox: &[(usize, usize)],
        _: &mut NodeRng,
        out: &mut Outbox<usize>,
    ) -> Status {
        let mut changed = round == 1 && best.is_some();
        for &(_, id) in inbox {
            if self.rule.better(id, *best) {
                *best = Some(id);
                changed = true;
            }
        }
        if changed {
            out.broadcast(ctx, best.unwrap());
        }
        Status::Halted
    }

    fn output(&self, _: &NodeCtx<'_>, best: Option<usize>) -> Option<usize> {
        best
    }
}

/// Extreme-id flooding where every node competes; returns each node's view.
pub fn flood_ids(sess: &mut Session<'_>, rule: Extreme) -> Result<Vec<usize>, SimError> {
    let cands: Vec<Option<usize>> = (0..sess.topology().node_count()).map(Some).collect();
    let out = sess.run(&Flood { candidates: &cands, rule })?;
    Ok(out.into_iter().map(|b| b.expect("every node competes")).collect())
}

/// Max-id leader election. Fails on a disconnected topology.
pub fn elect_leader(sess: &mut Session<'_>) -> Result<usize, SimError> {
    let views = flood_ids(sess, Extreme::Max)?;
    match views.first() {
        None => Err(SimError::Disconnected),
        Some(&l) if views.iter().all(|&v| v == l) => Ok(l),
        Some(_) => Err(SimError::Disconnected),
    }
}

/// BFS forest grown from a set of roots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BfsForest {
    pub level: Vec<Option<usize>>,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub root: Vec<Option<usize>>,
}

#[derive(Default)]
pub struct BfsState {
    level: Option<usize>,
    parent: Option<usize>,
    root: Option<usize>,
    children: Vec<usize>,
}

struct Bfs<'a> {
    is_root: &'a [bool],
}

impl NodeProgram for Bfs<'_> {
    type State = BfsState;
    type Msg = (usize, usize, Option<usize>);
    type Output = BfsState;

    fn init(&self, _: &NodeCtx<'_>, _: &mut NodeRng) -> BfsState {
        BfsState::default()
    }

    fn step(
        &self,
        ctx: &NodeCtx<'_>,
        st: &mut BfsState,
        round: usize,
        inbox: &[(usize, Self::Msg)],
        _: &mut NodeRng,
        out: &mut Outbox<Self::Msg>,
    ) -> Status {
        if round == 1 && self.is_root[ctx.id] {
            st.level = Some(0);
            st.root = Some(ctx.id);
            out.broadcast(ctx, (0, ctx.id, None));
            return Status::Halted;
        }
        for &(from, (_, _, parent)) in inbox {
            if parent == Some(ctx.id) {
                st.children.push(from);
            }
        }
        if st.level.is_none() {
            // inbox is sorted by sender, so the first entry is the smallest id
            if let Some(&(from, (level, root, _))) = inbox.iter().min_by_key(|(from, (l, _, _))| (*l, *from)) {
                st.level = Some(level + 1);
                st.parent = Some(from);
                st.root = Some(root);
                out.broadcast(ctx, (level + 1, root, Some(from)));
            }
        }
        Status::Halted
    }

    fn output(&self, _: &NodeCtx<'_>, mut st: BfsState) -> BfsState {
        st.children.sort_unstable();
        st
    }
}

pub fn bfs_forest(sess: &mut Session<'_>, is_root: &[bool]) -> Result<BfsForest, SimError> {
    let states = sess.run(&Bfs { is_root })?;
    let mut f = BfsForest {
        level: Vec::with_capacity(states.len()),
        parent: Vec::with_capacity(states.len()),
        children: Vec::with_capacity(states.len()),
        root: Vec::with_capacity(states.len()),
    };
    for s in states {
        f.level.push(s.level);
        f.parent.push(s.parent);
        f.children.push(s.children);
        f.root.push(s.root);
    }
    Ok(f)
}

/// A single-root BFS tree; every reached node also learns the maximum level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BfsTree {
    pub root: usize,
    pub forest: BfsForest,
    pub max_level: Vec<Option<usize>>,
}

impl BfsTree {
    pub fn unreachable(&self) -> Vec<usize> {
        (0..self.forest.level.len()).filter(|&v| self.forest.level[v].is_none()).collect()
    }
}

pub fn bfs_tree(sess: &mut Session<'_>, root: usize) -> Result<BfsTree, SimError> {
    let mut is_root = vec![false; sess.topology().node_count()];
    is_root[root] = true;
    let forest = bfs_forest(sess, &is_root)?;
    let trees = Forest::from_bfs(&forest);
    let values = trees.values_from(|v| forest.level[v]);
    let agg = aggregate(sess, &trees, values, |a: &usize, b: &usize| *a.max(b))?;
    let max_level = agg.into_iter().map(|slots| slots.into_iter().next().flatten()).collect();
    Ok(BfsTree { root, forest, max_level })
}

/// Membership of one node in one tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeSlot {
    pub key: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// A family of (possibly overlapping) trees, listed per node, slots sorted
/// by key.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Forest {
    pub slots: Vec<Vec<TreeSlot>>,
}

impl Forest {
    /// One tree per BFS root, keyed by the root id.
    pub fn from_bfs(f: &BfsForest) -> Self {
        let slots = (0..f.level.len())
            .map(|v| match f.root[v] {
                Some(key) => vec![TreeSlot { key, parent: f.parent[v], children: f.children[v].clone() }],
                None => Vec::new(),
            })
            .collect();
        Forest { slots }
    }

    pub fn node_count(&self) -> usize {
        self.slots.len()
    }

    /// Per-node, per-slot values where every slot of node `v` gets `value(v)`.
    pub fn values_from<T: Clone>(&self, value: impl Fn(usize) -> Option<T>) -> Vec<Vec<Option<T>>> {
        self.slots
            .iter()
            .enumerate()
            .map(|(v, s)| {
                let x = value(v);
                vec![x; s.len()]
            })
            .collect()
    }

    pub fn slot_index(&self, v: usize, key: usize) -> Option<usize> {
        self.slots[v].binary_search_by_key(&key, |s| s.key).ok()
    }

    pub fn depth(&self) -> usize {
        let mut best = 0;
        for v in 0..self.slots.len() {
            for s in &self.slots[v] {
                let mut d = 0;
                let mut cur = (v, s.parent);
                while let Some(p) = cur.1 {
                    d += 1;
                    let idx = self.slot_index(p, s.key).expect("parent holds the slot");
                    cur = (p, self.slots[p][idx].parent);
                }
                best = best.max(d);
            }
        }
        best
    }
}

#[derive(Debug, Clone)]
pub enum AggMsg<T> {
    Up(usize, Option<T>),
    Down(usize, Option<T>),
}

impl<T: Payload> Payload for AggMsg<T> {
    fn bits(&self, word: u64) -> u64 {
        let (AggMsg::Up(_, v) | AggMsg::Down(_, v)) = self;
        1 + word + v.bits(word)
    }
}

pub struct SlotState<T> {
    acc: Option<T>,
    waiting: usize,
    sent_up: bool,
    result: Option<Option<T>>,
}

struct Aggregate<'a, T, F> {
    forest: &'a Forest,
    values: Vec<Vec<Option<T>>>,
    combine: F,
}

impl<T: Clone, F: Fn(&T, &T) -> T> Aggregate<'_, T, F> {
    fn merge(&self, a: Option<T>, b: Option<T>) -> Option<T> {
        match (a, b) {
            (Some(a), Some(b)) => Some((self.combine)(&a, &b)),
            (a, None) => a,
            (None, b) => b,
        }
    }
}

impl<T: Payload + Clone, F: Fn(&T, &T) -> T> NodeProgram for Aggregate<'_, T, F> {
    type State = Vec<SlotState<T>>;
    type Msg = AggMsg<T>;
    type Output = Vec<Option<T>>;

    fn init(&self, ctx: &NodeCtx<'_>, _: &mut NodeRng) -> Self::State {
        self.forest.slots[ctx.id]
            .iter()
            .zip(&self.values[ctx.id])
            .map(|(s, v)| SlotState { acc: v.clone(), waiting: s.children.len(), sent_up: false, result: None })
            .collect()
    }

    fn step(
        &self,
        ctx: &NodeCtx<'_>,
        st: &mut Self::State,
        _: usize,
        inbox: &[(usize, Self::Msg)],
        _: &mut NodeRng,
        out: &mut Outbox<Self::Msg>,
    ) -> Status {
        let slots = &self.forest.slots[ctx.id];
        for (_, msg) in inbox {
            match msg {
                AggMsg::Up(key, v) => {
                    let i = self.forest.slot_index(ctx.id, *key).expect("known tree");
                    let acc = st[i].acc.take();
                    st[i].acc = self.merge(acc, v.clone());
                    st[i].waiting -= 1;
                }
                AggMsg::Down(key, v) => {
                    let i = self.forest.slot_index(ctx.id, *key).expect("known tree");
                    st[i].result = Some(v.clone());
                    for &c in &slots[i].children {
                        out.send(c, AggMsg::Down(*key, v.clone()));
                    }
                }
            }
        }
        for (i, s) in slots.iter().enumerate() {
            if st[i].waiting == 0 && !st[i].sent_up {
                st[i].sent_up = true;
                let acc = st[i].acc.clone();
                match s.parent {
                    Some(p) => out.send(p, AggMsg::Up(s.key, acc)),
                    None => {
                        for &c in &s.children {
                            out.send(c, AggMsg::Down(s.key, acc.clone()));
                        }
                        st[i].result = Some(acc);
                    }
                }
            }
        }
        Status::Halted
    }

    fn output(&self, _: &NodeCtx<'_>, st: Self::State) -> Vec<Option<T>> {
        st.into_iter().map(|s| s.result.flatten()).collect()
    }
}

/// Convergecast of `values` to each tree root followed by a broadcast of
/// the combined value. Returns, per node and slot, the tree's total.
pub fn aggregate<T, F>(
    sess: &mut Session<'_>,
    forest: &Forest,
    values: Vec<Vec<Option<T>>>,
    combine: F,
) -> Result<Vec<Vec<Option<T>>>, SimError>
where
    T: Payload + Clone,
    F: Fn(&T, &T) -> T,
{
    sess.run(&Aggregate { forest, values, combine })
}

/// Broadcasts each root's value down its tree.
pub fn broadcast<T: Payload + Clone>(
    sess: &mut Session<'_>,
    forest: &Forest,
    root_value: impl Fn(usize) -> Option<T>,
) -> Result<Vec<Vec<Option<T>>>, SimError> {
    let values = forest
        .slots
        .iter()
        .enumerate()
        .map(|(v, s)| s.iter().map(|slot| if slot.parent.is_none() { root_value(v) } else { None }).collect())
        .collect();
    aggregate(sess, forest, values, |a: &T, _: &T| a.clone())
}

struct MinLabel<'a> {
    active: &'a [bool],
}

impl NodeProgram for MinLabel<'_> {
    type State = Option<usize>;
    type Msg = usize;
    type Output = Option<usize>;

    fn init(&self, ctx: &NodeCtx<'_>, _: &mut NodeRng) -> Option<usize> {
        self.active[ctx.id].then_some(ctx.id)
    }

    fn step(
        &self,
        ctx: &NodeCtx<'_>,
        label: &mut Option<usize>,
        round: usize,
        inbox: &[(usize, usize)],
        _: &mut NodeRng,
        out: &mut Outbox<usize>,
    ) -> Status {
        let Some(cur) = *label else {
            return Status::Halted;
        };
        let best = inbox.iter().map(|&(_, l)| l).min().map_or(cur, |l| l.min(cur));
        if round == 1 || best < cur {
            *label = Some(best);
            for &v in ctx.neighbors {
                if self.active[v] {
                    out.send(v, best);
                }
            }
        }
        Status::Halted
    }

    fn output(&self, _: &NodeCtx<'_>, label: Option<usize>) -> Option<usize> {
        label
    }
}

/// Labels each active node with the smallest id of its component in the
/// subgraph induced by active nodes. Active nodes know which neighbours are
/// active.
pub fn connected_components(sess: &mut Session<'_>, active: &[bool]) -> Result<Vec<Option<usize>>, SimError> {
    sess.run(&MinLabel { active })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::netsim::{Mode, Topology};

    fn topo(g: &Graph) -> Topology {
        Topology::from_graph(g)
    }

    #[test]
    fn leader_is_max_id() {
        for g in [Graph::cycle(5), Graph::path(3), Graph::path(1)] {
            let t = topo(&g);
            let mut s = Session::new(&t, Mode::congest(), 3);
            assert_eq!(elect_leader(&mut s).unwrap(), g.n() - 1);
            assert_eq!(s.metrics.violations, 0);
        }
        let t = topo(&Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap());
        let mut s = Session::new(&t, Mode::congest(), 3);
        assert_eq!(elect_leader(&mut s), Err(SimError::Disconnected));
        let mut s = Session::new(&t, Mode::congest(), 3);
        assert_eq!(flood_ids(&mut s, Extreme::Min).unwrap(), vec![0, 0, 2, 2]);
    }

    #[test]
    fn bfs_levels() {
        let t = topo(&Graph::path(3));
        let mut s = Session::new(&t, Mode::congest(), 1);
        let b = bfs_tree(&mut s, 0).unwrap();
        assert_eq!(b.forest.level, vec![Some(0), Some(1), Some(2)]);
        assert_eq!(b.max_level, vec![Some(2); 3]);
        assert_eq!(b.forest.children, vec![vec![1], vec![2], vec![]]);

        let t = topo(&Graph::star(6));
        let mut s = Session::new(&t, Mode::congest(), 1);
        let b = bfs_tree(&mut s, 0).unwrap();
        assert!(b.forest.level[1..].iter().all(|&l| l == Some(1)));

        let t = topo(&Graph::cycle(4));
        let mut s = Session::new(&t, Mode::congest(), 1);
        let b = bfs_tree(&mut s, 2).unwrap();
        assert_eq!(b.forest.level, vec![Some(2), Some(1), Some(0), Some(1)]);
        assert_eq!(b.forest.parent[0], Some(1));
    }

    #[test]
    fn bfs_flags_unreachable() {
        let t = topo(&Graph::from_edges(3, [(0, 1)]).unwrap());
        let mut s = Session::new(&t, Mode::congest(), 1);
        assert_eq!(bfs_tree(&mut s, 0).unwrap().unreachable(), vec![2]);
    }

    #[test]
    fn convergecast_sums_and_max() {
        let g = Graph::star(7);
        let t = topo(&g);
        let mut s = Session::new(&t, Mode::congest(), 1);
        let b = bfs_tree(&mut s, 0).unwrap();
        let f = Forest::from_bfs(&b.forest);
        let sums = aggregate(&mut s, &f, f.values_from(|v| Some(g.degree(v))), |a: &usize, b: &usize| a + b).unwrap();
        assert!(sums.iter().all(|x| x[0] == Some(12)));

        let t = topo(&Graph::path(3));
        let mut s = Session::new(&t, Mode::congest(), 1);
        let b = bfs_tree(&mut s, 0).unwrap();
        let f = Forest::from_bfs(&b.forest);
        let vals = [3usize, 9, 1];
        let mx = aggregate(&mut s, &f, f.values_from(|v| Some(vals[v])), |a: &usize, b: &usize| *a.max(b)).unwrap();
        assert!(mx.iter().all(|x| x[0] == Some(9)));
        let down = broadcast(&mut s, &f, |v| Some(v + 40)).unwrap();
        assert!(down.iter().all(|x| x[0] == Some(40)));
    }

    #[test]
    fn average_degree_of_small_server_graph() {
        let h = crate::hypergraph::Hypergraph::build(4, [vec![0, 1, 2], vec![1, 3], vec![2, 3]]).unwrap();
        let g = h.server_graph();
        let t = topo(&g);
        let mut s = Session::new(&t, Mode::congest(), 1);
        let leader = elect_leader(&mut s).unwrap();
        let b = bfs_tree(&mut s, leader).unwrap();
        let f = Forest::from_bfs(&b.forest);
        let sums = aggregate(&mut s, &f, f.values_from(|v| Some((g.degree(v), 1usize))), |a: &(usize, usize), b: &(usize, usize)| {
            (a.0 + b.0, a.1 + b.1)
        })
        .unwrap();
        assert_eq!(sums[0][0], Some((10, 4)));
    }

    #[test]
    fn components_by_min_label() {
        let t = topo(&Graph::path(5));
        let mut s = Session::new(&t, Mode::congest(), 1);
        let active = [true, true, false, true, true];
        let l = connected_components(&mut s, &active).unwrap();
        assert_eq!(l, vec![Some(0), Some(0), None, Some(3), Some(3)]);
        let l = connected_components(&mut s, &[false; 5]).unwrap();
        assert!(l.iter().all(Option::is_none));
        let l = connected_components(&mut s, &[true; 5]).unwrap();
        assert!(l.iter().all(|&x| x == Some(0)));
    }
}
