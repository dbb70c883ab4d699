//! Engine loops over a working hypergraph.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use super::work::{Scope, St, WEdge, Work};
use super::zeta::{node_zeta, Scaled};
use super::{marking_probability, Engine, MisError, SamplingEvent};
use crate::netsim::{ceil_log2, Regime, Session};

pub(crate) fn clog2(x: usize) -> usize {
    ceil_log2(x as u64) as usize
}

pub(crate) struct Runner<'a, 't> {
    pub sess: &'a mut Session<'t>,
    pub scope: Scope,
    pub iterations: usize,
    pub sampling: Vec<SamplingEvent>,
    /// Priorities for the first marking round of the priority engine.
    pub forced: Option<Vec<u64>>,
    pub first_marks: Option<Vec<usize>>,
}

fn is_proper_subset(a: &[usize], b: &[usize]) -> bool {
    a.len() < b.len() && a.iter().all(|x| b.binary_search(x).is_ok())
}

fn retain_by(edges: &mut Vec<WEdge>, keep: impl Fn(usize) -> bool) {
    let mut k = 0;
    edges.retain(|_| {
        k += 1;
        keep(k - 1)
    });
}

impl<'a, 't> Runner<'a, 't> {
    pub fn new(sess: &'a mut Session<'t>, scope: Scope) -> Self {
        Runner { sess, scope, iterations: 0, sampling: Vec::new(), forced: None, first_marks: None }
    }

    fn n(&self) -> usize {
        self.sess.topology().vertex_count()
    }

    fn m(&self) -> usize {
        self.sess.topology().hyperedge_count()
    }

    pub fn core(&mut self, w: &mut Work, engine: &Engine) -> Result<(), MisError> {
        match engine {
            Engine::LocalMis => self.collect(w),
            Engine::BeameLuby { d } => self.beame_luby(w, *d),
            Engine::TuranRecursive { d } => self.turan(w, *d),
            Engine::KuwSqrt => self.kuw(w),
            Engine::DimReduced(inner) => self.dim_reduced(w, inner),
        }
    }

    /// Every vertex learns its whole tree's subproblem and applies the
    /// greedy-by-id rule to it.
    fn collect(&mut self, w: &mut Work) -> Result<(), MisError> {
        if self.sess.mode().regime != Regime::Local {
            return Err(MisError::RequiresLocal);
        }
        w.sync(self.sess)?;
        w.ship_lists(self.sess)?;
        let inc = w.incidence();
        type Sub = (Vec<usize>, Vec<Vec<usize>>);
        let all = self.scope.gather(
            self.sess,
            |v| w.active(v).then(|| (vec![v], inc[v].iter().map(|&k| w.edges[k].members.clone()).collect())),
            |a: &Sub, b: &Sub| {
                let vs: BTreeSet<usize> = a.0.iter().chain(&b.0).copied().collect();
                let es: BTreeSet<Vec<usize>> = a.1.iter().chain(&b.1).cloned().collect();
                (vs.into_iter().collect(), es.into_iter().collect())
            },
        )?;
        let mut solved: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for v in 0..self.n() {
            if !w.active(v) {
                continue;
            }
            let key = self.scope.key_of[v].expect("active vertex reports to a tree");
            let m = solved.entry(key).or_insert_with(|| {
                let (vs, es) = all[v].as_ref().expect("tree result");
                greedy_mis(vs, es)
            });
            let s = if m.contains(&v) { St::In } else { St::Out };
            w.decide(v, s);
        }
        self.iterations += 1;
        Ok(())
    }

    fn beame_luby(&mut self, w: &mut Work, fixed: Option<usize>) -> Result<(), MisError> {
        let n = self.n();
        let cap = 50 * clog2(n).max(1).pow(3);
        w.sync(self.sess)?;
        w.ship_lists(self.sess)?;
        let inc = w.incidence();
        let dims = self.scope.gather(
            self.sess,
            |v| w.active(v).then(|| inc[v].iter().map(|&k| w.edges[k].members.len()).max().unwrap_or(0)),
            |a, b| *a.max(b),
        )?;
        let mut bound = vec![2; n];
        for v in 0..n {
            if let Some(dim) = dims[v] {
                bound[v] = match fixed {
                    Some(d) if dim > d => return Err(MisError::DimensionExceeded { dim, bound: d }),
                    Some(d) => d,
                    None => dim.max(2),
                };
            }
        }

        let mut iters = 0;
        loop {
            w.sync(self.sess)?;
            w.ship_lists(self.sess)?;

            // cleanup
            let inc = w.incidence();
            for v in 0..n {
                if w.active(v) && inc[v].iter().any(|&k| w.edges[k].members.len() == 1) {
                    w.decide(v, St::Out);
                }
            }
            w.sync(self.sess)?;
            let inc = w.incidence();
            let flagged = w.edge_fold(
                self.sess,
                |v, k| {
                    let f = &w.edges[k].members;
                    Some(inc[v].iter().any(|&e| e != k && is_proper_subset(&w.edges[e].members, f)))
                },
                |xs: &[(usize, bool)]| xs.iter().any(|&(_, b)| b),
            )?;
            retain_by(&mut w.edges, |k| flagged[k] != Some(true));
            let inc = w.incidence();
            for v in 0..n {
                if w.active(v) && inc[v].is_empty() {
                    w.decide(v, St::In);
                }
            }
            if !w.any_active() {
                break;
            }

            let zeta = self.scope.gather(
                self.sess,
                |v| {
                    w.active(v).then(|| {
                        let lists: Vec<&[usize]> = inc[v].iter().map(|&k| w.edges[k].members.as_slice()).collect();
                        node_zeta(v, &lists, bound[v]).1
                    })
                },
                |a: &Scaled, b: &Scaled| a.max(*b),
            )?;

            if iters == cap {
                return Err(MisError::Timeout { engine: "beame-luby", iterations: iters, partial: w.members_in() });
            }
            iters += 1;
            let mut marked = vec![false; n];
            for v in 0..n {
                if w.active(v) {
                    let p = marking_probability(bound[v], zeta[v].expect("active vertex hears its tree").value());
                    marked[v] = self.sess.rng(v).gen::<f64>() < p;
                }
            }
            let full = w.edge_fold(
                self.sess,
                |v, _| w.active(v).then_some(marked[v]),
                |xs: &[(usize, bool)]| xs.iter().all(|&(_, b)| b),
            )?;
            for (k, r) in full.iter().enumerate() {
                if *r == Some(true) {
                    for &v in &w.edges[k].members {
                        marked[v] = false;
                    }
                }
            }
            for v in 0..n {
                if marked[v] {
                    w.decide(v, St::In);
                }
            }
        }
        self.iterations += iters;
        Ok(())
    }

    /// One sampling step on the edges of size at least `d`. `p(v)` is the
    /// sampling probability seen by `v`. Returns the sample after one
    /// vertex (the largest id) leaves every fully sampled edge.
    pub fn turan_step(&mut self, w: &Work, d: usize, p: impl Fn(usize) -> f64) -> Result<Vec<bool>, MisError> {
        let n = self.n();
        let mut sampled = vec![false; n];
        for v in 0..n {
            if w.active(v) {
                sampled[v] = self.sess.rng(v).gen::<f64>() < p(v);
            }
        }
        let full = w.edge_fold(
            self.sess,
            |v, k| (w.edges[k].members.len() >= d).then_some(sampled[v]),
            |xs: &[(usize, bool)]| xs.iter().all(|&(_, b)| b).then(|| xs.iter().map(|&(v, _)| v).max().unwrap()),
        )?;
        for r in full.into_iter().flatten().flatten() {
            sampled[r] = false;
        }
        Ok(sampled)
    }

    fn turan(&mut self, w: &mut Work, d: usize) -> Result<(), MisError> {
        if d < 2 {
            return Err(MisError::InvalidParameter(format!("dimension threshold {d} must be at least 2")));
        }
        let mut levels = 0;
        let mut cap = None;
        loop {
            w.sync(self.sess)?;
            if !w.any_active() {
                break;
            }
            w.ship_lists(self.sess)?;
            let inc = w.incidence();
            let degree = self.scope.gather(
                self.sess,
                |v| w.active(v).then(|| inc[v].iter().filter(|&&k| w.edges[k].members.len() >= d).count()),
                |a, b| *a.max(b),
            )?;
            let cap = *cap.get_or_insert_with(|| {
                let top = degree.iter().flatten().copied().max().unwrap_or(0).max(1) as f64;
                50 * (top.powf(1.0 / (d - 1) as f64).ceil() as usize).max(1)
            });
            if levels == cap {
                return Err(MisError::Timeout { engine: "turan-recursive", iterations: levels, partial: w.members_in() });
            }
            levels += 1;
            let keep = self.turan_step(w, d, |v| {
                let bound = degree[v].unwrap_or(0).max(1) as f64;
                bound.powf(-1.0 / (d - 1) as f64)
            })?;
            let inside = w.edge_fold(
                self.sess,
                |v, _| Some(keep[v]),
                |xs: &[(usize, bool)]| xs.iter().all(|&(_, b)| b),
            )?;
            let edges =
                w.edges.iter().enumerate().filter(|(k, _)| inside[*k] == Some(true)).map(|(_, e)| e.clone()).collect();
            let mut sub = w.sub(&keep, edges);
            self.beame_luby(&mut sub, Some((d - 1).max(2)))?;
            w.absorb(&sub);
        }
        self.iterations += levels;
        Ok(())
    }

    fn kuw(&mut self, w: &mut Work) -> Result<(), MisError> {
        let n = self.n();
        let cap = 50 * ((n as f64).sqrt().ceil() as usize).max(1);
        let top = (n as u64 * n as u64).max(1);
        let mut iters = 0;
        loop {
            w.sync(self.sess)?;
            if !w.any_active() {
                break;
            }
            if iters == cap {
                return Err(MisError::Timeout { engine: "kuw-sqrt", iterations: iters, partial: w.members_in() });
            }
            let forced = if iters == 0 { self.forced.take() } else { None };
            iters += 1;
            let mut r = vec![0u64; n];
            for v in 0..n {
                if w.active(v) {
                    r[v] = match &forced {
                        Some(f) => f[v],
                        None => self.sess.rng(v).gen_range(1..=top),
                    };
                }
            }
            let inc = w.incidence();
            let winner = w.edge_fold(
                self.sess,
                |v, _| w.active(v).then_some(r[v]),
                |xs: &[(usize, u64)]| xs.iter().max_by_key(|&&(v, p)| (p, v)).unwrap().0,
            )?;
            let marked: Vec<bool> =
                (0..n).map(|v| w.active(v) && !inc[v].iter().any(|&k| winner[k] == Some(v))).collect();
            if self.first_marks.is_none() {
                self.first_marks = Some((0..n).filter(|&v| marked[v]).collect());
            }
            let unmarked = w.edge_fold(
                self.sess,
                |v, _| w.active(v).then_some(marked[v]),
                |xs: &[(usize, bool)]| {
                    let left: Vec<usize> = xs.iter().filter(|(_, b)| !b).map(|&(v, _)| v).collect();
                    (left.len(), left.last().copied().unwrap_or(0))
                },
            )?;
            for v in 0..n {
                if !w.active(v) {
                    continue;
                }
                if marked[v] {
                    w.decide(v, St::In);
                } else if inc[v].iter().any(|&k| unmarked[k] == Some((1, v))) {
                    w.decide(v, St::Out);
                }
            }
        }
        self.iterations += iters;
        Ok(())
    }

    fn dim_reduced(&mut self, w: &mut Work, inner: &Engine) -> Result<(), MisError> {
        let n = self.n();
        let threshold = 3.0 * ((self.m() + n) as f64).log2();
        let cap = 50 * clog2(n).max(1);
        let mut rounds = 0;
        loop {
            w.sync(self.sess)?;
            if !w.any_active() {
                break;
            }
            if rounds == cap {
                return Err(MisError::Timeout { engine: "dim-reduced", iterations: rounds, partial: w.members_in() });
            }
            rounds += 1;
            let inc = w.incidence();
            let mut sampled = vec![false; n];
            let mut redo: Vec<bool> = (0..n).map(|v| w.active(v)).collect();
            let mut attempt = 0;
            let full = loop {
                if attempt == 50 {
                    return Err(MisError::DimensionRetries { attempts: attempt });
                }
                attempt += 1;
                for v in 0..n {
                    if redo[v] {
                        sampled[v] = self.sess.rng(v).gen_bool(0.5);
                    }
                }
                let full = w.edge_fold(
                    self.sess,
                    |v, _| w.active(v).then_some(sampled[v]),
                    |xs: &[(usize, bool)]| if xs.iter().all(|&(_, b)| b) { xs.len() } else { 0 },
                )?;
                let dims = self.scope.gather(
                    self.sess,
                    |v| w.active(v).then(|| inc[v].iter().map(|&k| full[k].unwrap_or(0)).max().unwrap_or(0)),
                    |a, b| *a.max(b),
                )?;
                let mut trees: BTreeMap<usize, usize> = BTreeMap::new();
                for v in 0..n {
                    if redo[v] {
                        trees.insert(self.scope.key_of[v].expect("active vertex reports to a tree"), dims[v].unwrap());
                    }
                }
                let mut bad = BTreeSet::new();
                for (key, max_dim) in trees {
                    let violated = max_dim as f64 > threshold;
                    self.sampling.push(SamplingEvent { max_dim, threshold, violated });
                    if violated {
                        bad.insert(key);
                    }
                }
                if bad.is_empty() {
                    break full;
                }
                for v in 0..n {
                    redo[v] = redo[v] && bad.contains(&self.scope.key_of[v].unwrap());
                }
            };
            let edges = w
                .edges
                .iter()
                .enumerate()
                .filter(|(k, _)| full[*k].is_some_and(|s| s > 0))
                .map(|(_, e)| e.clone())
                .collect();
            let mut sub = w.sub(&sampled, edges);
            self.core(&mut sub, inner)?;
            w.absorb(&sub);
        }
        self.iterations += rounds;
        Ok(())
    }
}

/// Adds vertices in increasing id order unless one would complete an edge.
pub(crate) fn greedy_mis(vertices: &[usize], edges: &[Vec<usize>]) -> BTreeSet<usize> {
    let mut m = BTreeSet::new();
    for &v in vertices {
        let blocked = edges.iter().any(|e| e.contains(&v) && e.iter().all(|u| *u == v || m.contains(u)));
        if !blocked {
            m.insert(v);
        }
    }
    m
}
