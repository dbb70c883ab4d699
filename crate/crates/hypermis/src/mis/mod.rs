//! Hypergraph MIS engines.
//!
//! Every engine runs on the simulated network of a host hypergraph and
//! solves the subgraph problem: find a maximal independent set of the
//! sub-hypergraph induced by the active vertices, while communicating over
//! the whole host network.
//!
//! * `local-mis`: decomposition, then per color each cluster learns its
//!   piece and applies the greedy rule (LOCAL only).
//! * `beame-luby`: decomposition, then per color the constant-dimension
//!   marking algorithm driven by completion counts.
//! * `turan-recursive`: decomposition, then per color the sampling
//!   recursion on large edges with `beame-luby` underneath.
//! * `kuw-sqrt`: random-priority marking, run directly.
//! * `dim-reduced:<inner>`: halving samples that keep the dimension
//!   logarithmic, each solved by `<inner>`.

pub(crate) mod engines;
mod work;
pub mod zeta;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::decomposition::{linial_saks, DecompositionConfig, DecompositionError, Schedule};
use crate::hypergraph::{Hypergraph, HypergraphError};
use crate::netsim::{Metrics, Mode, Regime, Representation, Session, SimError, Topology};
use engines::Runner;
use work::{Scope, St, WEdge, Work};
pub use zeta::{node_zeta, Scaled, ZetaProfile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MisError {
    #[error("{engine} hit its iteration cap after {iterations} iterations ({} vertices already in the set)", partial.len())]
    Timeout { engine: &'static str, iterations: usize, partial: Vec<usize> },
    #[error("color {color}: {source}")]
    InColor {
        color: usize,
        #[source]
        source: Box<MisError>,
    },
    #[error("working dimension {dim} exceeds the bound {bound}")]
    DimensionExceeded { dim: usize, bound: usize },
    #[error("sampled dimension stayed above the threshold after {attempts} attempts")]
    DimensionRetries { attempts: usize },
    #[error("local-mis needs the LOCAL regime")]
    RequiresLocal,
    #[error("{0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Engine choice. Parsed from `local-mis`, `beame-luby`, `turan-recursive`,
/// `kuw-sqrt` and `dim-reduced:<inner>`; the first two accept `:<d>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Engine {
    LocalMis,
    /// `d: None` uses the working dimension (at least 2).
    BeameLuby { d: Option<usize> },
    /// Edges of size at least `d` are sampled away.
    TuranRecursive { d: usize },
    KuwSqrt,
    DimReduced(Box<Engine>),
}

/// `d = 1 + ceil(1/eps)`.
pub fn dimension_for_eps(eps: f64) -> Result<usize, MisError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(MisError::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    Ok(1 + (1.0 / eps).ceil() as usize)
}

/// Largest useful threshold `log log n / (4 log log log n)`, at least 2.
pub fn extended_dimension(n: usize) -> usize {
    let ll = (n.max(2) as f64).log2().max(1.0).log2();
    let lll = ll.max(1.0).log2();
    if lll <= 0.0 {
        return 2;
    }
    ((ll / (4.0 * lll)).floor() as usize).max(2)
}

/// Smallest admissible eps, `1 / (log log n / (c log log log n) - 1)`, or
/// `None` when the expression is not positive at this `n`.
pub fn min_eps(n: usize, c: f64) -> Option<f64> {
    let ll = (n.max(2) as f64).log2().max(1.0).log2();
    let lll = ll.max(1.0).log2();
    if lll <= 0.0 {
        return None;
    }
    let den = ll / (c * lll) - 1.0;
    (den > 0.0).then(|| 1.0 / den)
}

/// Marking probability `1 / (2^(d+1) * zeta)`, and 1 when `zeta` is 0.
pub fn marking_probability(d: usize, zeta: f64) -> f64 {
    if zeta == 0.0 {
        1.0
    } else {
        (1.0 / (2f64.powi(d as i32 + 1) * zeta)).min(1.0)
    }
}

pub const DEFAULT_EPS_CONSTANT: f64 = 10.0;

impl FromStr for Engine {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "local-mis" => Ok(Engine::LocalMis),
            "beame-luby" => Ok(Engine::BeameLuby { d: None }),
            "turan-recursive" => Ok(Engine::TuranRecursive { d: 3 }),
            "kuw-sqrt" => Ok(Engine::KuwSqrt),
            _ => {
                let bad = || {
                    format!(
                        "unknown engine {s:?} (expected local-mis, beame-luby[:d], turan-recursive[:d|:eps=x], kuw-sqrt or dim-reduced:<inner>)"
                    )
                };
                // `:d` gives the dimension, `:eps=x` the exponent it comes from
                let dim = |x: &str| match x.strip_prefix("eps=") {
                    Some(e) => e.parse::<f64>().ok().and_then(|e| dimension_for_eps(e).ok()).ok_or_else(bad),
                    None => x.parse::<usize>().ok().filter(|&d| d >= 2).ok_or_else(bad),
                };
                if let Some(inner) = s.strip_prefix("dim-reduced:") {
                    Ok(Engine::DimReduced(Box::new(inner.parse()?)))
                } else if let Some(d) = s.strip_prefix("beame-luby:") {
                    Ok(Engine::BeameLuby { d: Some(dim(d)?) })
                } else if let Some(d) = s.strip_prefix("turan-recursive:") {
                    Ok(Engine::TuranRecursive { d: dim(d)? })
                } else {
                    Err(bad())
                }
            }
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Engine::LocalMis => f.write_str("local-mis"),
            Engine::BeameLuby { d: None } => f.write_str("beame-luby"),
            Engine::BeameLuby { d: Some(d) } => write!(f, "beame-luby:{d}"),
            Engine::TuranRecursive { d: 3 } => f.write_str("turan-recursive"),
            Engine::TuranRecursive { d } => write!(f, "turan-recursive:{d}"),
            Engine::KuwSqrt => f.write_str("kuw-sqrt"),
            Engine::DimReduced(inner) => write!(f, "dim-reduced:{inner}"),
        }
    }
}

/// A host hypergraph and the active vertices whose induced sub-hypergraph
/// is to be solved.
#[derive(Debug, Clone)]
pub struct MisInstance<'a> {
    pub host: &'a Hypergraph,
    pub active: Vec<bool>,
    pub representation: Representation,
    pub mode: Mode,
}

impl<'a> MisInstance<'a> {
    pub fn full(host: &'a Hypergraph, representation: Representation, mode: Mode) -> Self {
        MisInstance { host, active: vec![true; host.n()], representation, mode }
    }

    pub fn induced(
        host: &'a Hypergraph,
        keep: &[usize],
        representation: Representation,
        mode: Mode,
    ) -> Result<Self, MisError> {
        let view = host.induced(keep.iter().copied())?;
        Ok(MisInstance { host, active: view.kept.clone(), representation, mode })
    }

    /// Host edges that lie inside the active set.
    pub fn target_edges(&self) -> Vec<usize> {
        (0..self.host.m()).filter(|&j| self.host.edge(j).iter().all(|&v| self.active[v])).collect()
    }

    fn work(&self) -> Work {
        let status = self.active.iter().map(|&a| if a { St::Active } else { St::Idle }).collect();
        let edges = self
            .target_edges()
            .into_iter()
            .map(|j| WEdge { host: j, members: self.host.edge(j).to_vec() })
            .collect();
        Work::new(status, edges)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingEvent {
    /// Largest fully sampled edge in the tree that drew the sample.
    pub max_dim: usize,
    pub threshold: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Phase {
    pub name: String,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MisResult {
    pub set: Vec<usize>,
    pub metrics: Metrics,
    /// Outer iterations summed over every engine loop that ran.
    pub iterations: usize,
    pub phases: Vec<Phase>,
    pub sampling: Vec<SamplingEvent>,
    /// Marked vertices of the first priority round, when `kuw-sqrt` ran.
    pub first_marks: Option<Vec<usize>>,
}

/// Runs `f` with fresh metrics and records them as a phase.
fn phase<T>(
    sess: &mut Session<'_>,
    phases: &mut Vec<Phase>,
    name: &str,
    f: impl FnOnce(&mut Session<'_>) -> T,
) -> T {
    let saved = std::mem::take(&mut sess.metrics);
    let out = f(sess);
    let m = std::mem::replace(&mut sess.metrics, saved);
    sess.metrics.absorb(&m);
    phases.push(Phase { name: name.to_string(), metrics: m });
    out
}

/// Dispatches an engine name to its driver.
pub fn solve(inst: &MisInstance<'_>, engine: &Engine, seed: u64) -> Result<MisResult, MisError> {
    match engine {
        Engine::LocalMis | Engine::BeameLuby { .. } | Engine::TuranRecursive { .. } => {
            solve_subgraph_mis(inst, engine, seed)
        }
        Engine::KuwSqrt | Engine::DimReduced(_) => direct(inst, engine, seed, None),
    }
}

/// Decomposes the host network and solves the target color by color. An
/// edge takes part in color `c` (restricted to its color-`c` members) when
/// `c` is the largest color on it and none of its lower-color members was
/// rejected. Clusters of one color run `inner` side by side, each over its
/// own tree.
pub fn solve_subgraph_mis(inst: &MisInstance<'_>, inner: &Engine, seed: u64) -> Result<MisResult, MisError> {
    let topo = Topology::from_hypergraph(inst.host, inst.representation);
    let mut sess = Session::new(&topo, inst.mode, seed);
    let mut phases = Vec::new();
    let cfg = DecompositionConfig { schedule: Schedule::for_regime(inst.mode.regime), max_colors: None };
    let dec = phase(&mut sess, &mut phases, "decomposition", |s| linial_saks(s, inst.host, cfg))?;
    let n = inst.host.n();
    let mut top = inst.work();
    let mut runner = Runner::new(&mut sess, Scope { forest: Default::default(), key_of: Vec::new() });
    let mut filter = Metrics::default();
    let mut solve = Metrics::default();

    for c in 1..=dec.colors {
        let saved = std::mem::take(&mut runner.sess.metrics);
        let color = |v: usize| dec.color_of(v);
        let tag = top.edge_fold(
            runner.sess,
            |v, _| Some((color(v), top.status[v] == St::Out)),
            |xs: &[(usize, (usize, bool))]| {
                (xs.iter().map(|(_, (c, _))| *c).max().unwrap(), xs.iter().any(|(_, (_, r))| *r))
            },
        )?;
        let edges: Vec<WEdge> = top
            .edges
            .iter()
            .zip(&tag)
            .filter(|(_, t)| **t == Some((c, false)))
            .map(|(e, _)| WEdge { host: e.host, members: e.members.iter().copied().filter(|&v| color(v) == c).collect() })
            .collect();
        let keep: Vec<bool> = (0..n).map(|v| color(v) == c).collect();
        let mut sub = top.sub(&keep, edges);
        filter.absorb(&std::mem::take(&mut runner.sess.metrics));

        runner.scope = Scope {
            forest: dec.trees[c - 1].clone(),
            key_of: (0..n).map(|v| (color(v) == c).then_some(dec.set_of[v])).collect(),
        };
        runner.core(&mut sub, inner).map_err(|e| MisError::InColor { color: c, source: Box::new(e) })?;
        top.absorb(&sub);
        solve.absorb(&std::mem::replace(&mut runner.sess.metrics, saved));
    }
    runner.sess.metrics.absorb(&filter);
    runner.sess.metrics.absorb(&solve);
    phases.push(Phase { name: "edge-filter".into(), metrics: filter });
    phases.push(Phase { name: format!("inner:{inner}"), metrics: solve });
    let (iterations, sampling, first_marks) = (runner.iterations, runner.sampling, runner.first_marks);
    Ok(MisResult { set: top.members_in(), metrics: sess.metrics, iterations, phases, sampling, first_marks })
}

/// Runs `engine` over BFS trees of the host network, without decomposing.
fn direct(inst: &MisInstance<'_>, engine: &Engine, seed: u64, forced: Option<Vec<u64>>) -> Result<MisResult, MisError> {
    let topo = Topology::from_hypergraph(inst.host, inst.representation);
    let mut sess = Session::new(&topo, inst.mode, seed);
    let mut phases = Vec::new();
    let scope = phase(&mut sess, &mut phases, "bfs", Scope::bfs)?;
    let mut work = inst.work();
    let saved = std::mem::take(&mut sess.metrics);
    let mut runner = Runner::new(&mut sess, scope);
    runner.forced = forced;
    runner.core(&mut work, engine)?;
    let (iterations, sampling, first_marks) = (runner.iterations, runner.sampling, runner.first_marks);
    let m = std::mem::replace(&mut sess.metrics, saved);
    sess.metrics.absorb(&m);
    phases.push(Phase { name: engine.to_string(), metrics: m });
    Ok(MisResult { set: work.members_in(), metrics: sess.metrics, iterations, phases, sampling, first_marks })
}

/// Decomposition plus per-cluster collection under LOCAL.
pub fn local_mis(h: &Hypergraph, representation: Representation, seed: u64) -> Result<MisResult, MisError> {
    let inst = MisInstance::full(h, representation, Mode::local());
    solve_subgraph_mis(&inst, &Engine::LocalMis, seed)
}

/// The marking engine on its own, with a fixed dimension bound `d`.
pub fn beame_luby_mis(inst: &MisInstance<'_>, d: usize, seed: u64) -> Result<MisResult, MisError> {
    direct(inst, &Engine::BeameLuby { d: Some(d) }, seed, None)
}

/// The sampling recursion on its own, with threshold `d`.
pub fn delta_eps_mis(inst: &MisInstance<'_>, d: usize, seed: u64) -> Result<MisResult, MisError> {
    direct(inst, &Engine::TuranRecursive { d }, seed, None)
}

pub fn kuw_sqrt_mis(inst: &MisInstance<'_>, seed: u64) -> Result<MisResult, MisError> {
    direct(inst, &Engine::KuwSqrt, seed, None)
}

/// `kuw-sqrt` with the first round's priorities fixed (one per vertex).
pub fn kuw_sqrt_mis_with(inst: &MisInstance<'_>, seed: u64, first: &[u64]) -> Result<MisResult, MisError> {
    if first.len() != inst.host.n() {
        return Err(MisError::InvalidParameter(format!(
            "{} priorities for {} vertices",
            first.len(),
            inst.host.n()
        )));
    }
    direct(inst, &Engine::KuwSqrt, seed, Some(first.to_vec()))
}

pub fn dim_reduced_mis(inst: &MisInstance<'_>, inner: &Engine, seed: u64) -> Result<MisResult, MisError> {
    direct(inst, &Engine::DimReduced(Box::new(inner.clone())), seed, None)
}

/// Completion-count profile of the target, computed by the nodes and
/// combined over BFS trees.
pub fn compute_zeta(inst: &MisInstance<'_>, d: usize) -> Result<ZetaProfile, MisError> {
    let topo = Topology::from_hypergraph(inst.host, inst.representation);
    let mut sess = Session::new(&topo, inst.mode, 0);
    let scope = Scope::bfs(&mut sess)?;
    let work = inst.work();
    if let Some(dim) = work.edges.iter().map(|e| e.members.len()).max() {
        if dim > d {
            return Err(MisError::DimensionExceeded { dim, bound: d });
        }
    }
    work.ship_lists(&mut sess)?;
    let inc = work.incidence();
    let n = inst.host.n();
    let local: Vec<(Vec<f64>, Scaled)> = (0..n)
        .map(|v| {
            let lists: Vec<&[usize]> = inc[v].iter().map(|&k| work.edges[k].members.as_slice()).collect();
            node_zeta(v, &lists, d)
        })
        .collect();
    let best = scope.gather(&mut sess, |v| work.active(v).then_some(local[v].1), |a: &Scaled, b: &Scaled| a.max(*b))?;
    let witness = best.iter().flatten().fold(Scaled::ZERO, |a, b| a.max(*b));
    Ok(ZetaProfile {
        d,
        per_node: local.into_iter().map(|(p, _)| p).collect(),
        zeta: witness.value(),
        witness,
        metrics: sess.metrics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuranSample {
    pub kept: Vec<usize>,
    pub metrics: Metrics,
}

/// One sampling step: each active vertex is kept with probability
/// `delta_bound^(-1/(d-1))`, then the largest id leaves every fully kept
/// edge of size at least `d`.
pub fn turan_sample(inst: &MisInstance<'_>, d: usize, delta_bound: f64, seed: u64) -> Result<TuranSample, MisError> {
    if delta_bound < 1.0 || delta_bound.is_nan() {
        return Err(MisError::InvalidParameter(format!("degree bound {delta_bound} is below 1")));
    }
    if d < 2 {
        return Err(MisError::InvalidParameter(format!("dimension threshold {d} must be at least 2")));
    }
    let topo = Topology::from_hypergraph(inst.host, inst.representation);
    let mut sess = Session::new(&topo, inst.mode, seed);
    let work = inst.work();
    let p = delta_bound.powf(-1.0 / (d - 1) as f64);
    let mut runner = Runner::new(&mut sess, Scope { forest: Default::default(), key_of: Vec::new() });
    let keep = runner.turan_step(&work, d, |_| p)?;
    Ok(TuranSample { kept: (0..keep.len()).filter(|&v| keep[v]).collect(), metrics: sess.metrics })
}

/// Whether `regime` can run `engine`.
pub fn supports(engine: &Engine, regime: Regime) -> bool {
    match engine {
        Engine::LocalMis => regime == Regime::Local,
        Engine::DimReduced(inner) => supports(inner, regime),
        _ => true,
    }
}
