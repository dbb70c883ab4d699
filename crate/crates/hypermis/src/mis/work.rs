//! Working hypergraph shared by the engines, plus the communication
//! primitives they are built from.
//!
//! The driver keeps a replica of what nodes know. Vertex statuses are node
//! knowledge; the member list of a working edge is what its host knows
//! (the client in the server-client form, the members themselves in the
//! vertex-centric form). Status changes reach the hosts only through
//! [`Work::sync`].

use std::collections::BTreeSet;

use crate::netsim::{
    bfs_forest, flood_ids, aggregate, Extreme, Forest, Payload, Representation, Session, SimError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum St {
    /// Not part of this (sub)problem.
    Idle,
    Active,
    In,
    Out,
}

/// A working edge: what is left of host hyperedge `host`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct WEdge {
    pub host: usize,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct Work {
    pub status: Vec<St>,
    pub edges: Vec<WEdge>,
    pending: Vec<usize>,
}

impl Work {
    pub fn new(status: Vec<St>, edges: Vec<WEdge>) -> Self {
        Work { status, edges, pending: Vec::new() }
    }

    /// Subproblem on the active vertices in `keep` with the given edges.
    pub fn sub(&self, keep: &[bool], edges: Vec<WEdge>) -> Work {
        let status = self
            .status
            .iter()
            .enumerate()
            .map(|(v, &s)| if s == St::Active && keep[v] { St::Active } else { St::Idle })
            .collect();
        Work::new(status, edges)
    }

    /// Copies the decisions of a finished subproblem.
    pub fn absorb(&mut self, sub: &Work) {
        for (v, &s) in sub.status.iter().enumerate() {
            if matches!(s, St::In | St::Out) && self.status[v] == St::Active {
                self.decide(v, s);
            }
        }
    }

    pub fn decide(&mut self, v: usize, s: St) {
        debug_assert_eq!(self.status[v], St::Active);
        self.status[v] = s;
        self.pending.push(v);
    }

    pub fn active(&self, v: usize) -> bool {
        self.status[v] == St::Active
    }

    pub fn any_active(&self) -> bool {
        self.status.contains(&St::Active)
    }

    pub fn members_in(&self) -> Vec<usize> {
        (0..self.status.len()).filter(|&v| self.status[v] == St::In).collect()
    }

    /// Working edges per vertex.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.status.len()];
        for (k, e) in self.edges.iter().enumerate() {
            for &v in &e.members {
                inc[v].push(k);
            }
        }
        inc
    }

    /// Hosts learn the statuses decided since the last call: members that
    /// joined the set leave their edges, edges with a removed member are
    /// satisfied and dropped.
    pub fn sync(&mut self, sess: &mut Session<'_>) -> Result<(), SimError> {
        if self.pending.is_empty() {
            return Ok(());
        }
        let topo = sess.topology();
        let pending: BTreeSet<usize> = std::mem::take(&mut self.pending).into_iter().collect();
        let mut out: Vec<Vec<(usize, bool)>> = vec![Vec::new(); topo.node_count()];
        for e in &self.edges {
            for &v in &e.members {
                if !pending.contains(&v) {
                    continue;
                }
                let joined = self.status[v] == St::In;
                match topo.client(e.host) {
                    Some(c) => out[v].push((c, joined)),
                    None => {
                        for &u in &e.members {
                            if u != v && !out[v].iter().any(|&(w, _)| w == u) {
                                out[v].push((u, joined));
                            }
                        }
                    }
                }
            }
        }
        sess.exchange(out)?;
        let status = &self.status;
        self.edges.retain(|e| !e.members.iter().any(|&v| status[v] == St::Out));
        for e in &mut self.edges {
            e.members.retain(|&v| status[v] != St::In);
        }
        debug_assert!(self.edges.iter().all(|e| !e.members.is_empty()));
        Ok(())
    }

    /// Members learn the current member lists of their edges. In the
    /// server-client form the client ships the list in chunks that fit one
    /// message; in the vertex-centric form members already know it from
    /// the status exchange.
    pub fn ship_lists(&self, sess: &mut Session<'_>) -> Result<(), SimError> {
        let topo = sess.topology();
        if topo.representation() != Some(Representation::ServerClient) {
            return Ok(());
        }
        let chunk = match sess.mode().budget(topo) {
            Some(b) => ((b / topo.word_bits()) as usize).saturating_sub(1).max(1),
            None => usize::MAX,
        };
        let mut out: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); topo.node_count()];
        for e in &self.edges {
            let c = topo.client(e.host).expect("server-client host");
            for part in e.members.chunks(chunk) {
                for &v in &e.members {
                    out[c].push((v, part.to_vec()));
                }
            }
        }
        sess.exchange(out)?;
        Ok(())
    }

    /// Folds per-incidence values over every working edge. `val(v, k)` is
    /// what member `v` contributes to edge `k` (`None`: stays silent). The
    /// host combines the contributions with `fold` and every member learns
    /// the result. Returns the result per edge, `None` where nobody spoke.
    pub fn edge_fold<T, R>(
        &self,
        sess: &mut Session<'_>,
        val: impl Fn(usize, usize) -> Option<T>,
        fold: impl Fn(&[(usize, T)]) -> R,
    ) -> Result<Vec<Option<R>>, SimError>
    where
        T: Payload + Clone,
        R: Payload + Clone,
    {
        let topo = sess.topology();
        let nodes = topo.node_count();
        let mut results = vec![None; self.edges.len()];
        if topo.representation() == Some(Representation::ServerClient) {
            let mut out: Vec<Vec<(usize, T)>> = vec![Vec::new(); nodes];
            for (k, e) in self.edges.iter().enumerate() {
                let c = topo.client(e.host).expect("server-client host");
                for &v in &e.members {
                    if let Some(x) = val(v, k) {
                        out[v].push((c, x));
                    }
                }
            }
            let inbox = sess.exchange(out)?;
            let mut back: Vec<Vec<(usize, R)>> = vec![Vec::new(); nodes];
            for (k, e) in self.edges.iter().enumerate() {
                let c = topo.client(e.host).unwrap();
                if inbox[c].is_empty() {
                    continue;
                }
                let r = fold(&inbox[c]);
                for &v in &e.members {
                    back[c].push((v, r.clone()));
                }
                results[k] = Some(r);
            }
            sess.exchange(back)?;
        } else {
            let mut out: Vec<Vec<(usize, (usize, T))>> = vec![Vec::new(); nodes];
            let mut own: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.edges.len()];
            for (k, e) in self.edges.iter().enumerate() {
                for &v in &e.members {
                    if let Some(x) = val(v, k) {
                        own[k].push((v, x.clone()));
                        for &u in &e.members {
                            if u != v {
                                out[v].push((u, (e.host, x.clone())));
                            }
                        }
                    }
                }
            }
            let inbox = sess.exchange(out)?;
            for (k, e) in self.edges.iter().enumerate() {
                // every member evaluates the same fold; read it at the first one
                let reader = e.members[0];
                let mut got: Vec<(usize, T)> = inbox[reader]
                    .iter()
                    .filter(|(_, (h, _))| *h == e.host)
                    .map(|(from, (_, x))| (*from, x.clone()))
                    .collect();
                if let Some(mine) = own[k].iter().find(|(v, _)| *v == reader) {
                    got.push(mine.clone());
                }
                got.sort_by_key(|(v, _)| *v);
                if !got.is_empty() {
                    results[k] = Some(fold(&got));
                }
            }
        }
        Ok(results)
    }
}

/// Trees over which a (sub)problem aggregates, and which tree each vertex
/// reports to.
#[derive(Debug, Clone)]
pub(crate) struct Scope {
    pub forest: Forest,
    pub key_of: Vec<Option<usize>>,
}

impl Scope {
    /// One BFS tree per component, rooted at the component's largest id.
    pub fn bfs(sess: &mut Session<'_>) -> Result<Scope, SimError> {
        let n = sess.topology().vertex_count();
        let leaders = flood_ids(sess, Extreme::Max)?;
        let is_root: Vec<bool> = leaders.iter().enumerate().map(|(v, &l)| v == l).collect();
        let f = bfs_forest(sess, &is_root)?;
        let key_of = (0..n).map(|v| f.root[v]).collect();
        Ok(Scope { forest: Forest::from_bfs(&f), key_of })
    }

    /// Convergecast plus broadcast inside each tree; every vertex gets the
    /// combined value of its own tree (`None` if nobody contributed).
    pub fn gather<T: Payload + Clone>(
        &self,
        sess: &mut Session<'_>,
        value: impl Fn(usize) -> Option<T>,
        combine: impl Fn(&T, &T) -> T,
    ) -> Result<Vec<Option<T>>, SimError> {
        let n = self.key_of.len();
        let values = self
            .forest
            .slots
            .iter()
            .enumerate()
            .map(|(node, slots)| {
                slots
                    .iter()
                    .map(|s| if node < n && self.key_of[node] == Some(s.key) { value(node) } else { None })
                    .collect()
            })
            .collect();
        let res = aggregate(sess, &self.forest, values, combine)?;
        Ok((0..n)
            .map(|v| {
                let key = self.key_of[v]?;
                let i = self.forest.slot_index(v, key)?;
                res[v][i].clone()
            })
            .collect())
    }
}
