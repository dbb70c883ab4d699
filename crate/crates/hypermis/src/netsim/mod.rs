//! Synchronous round engine.
//!
//! A [`NodeProgram`] runs on every node of a [`Topology`]. In each round a
//! node sees the messages sent to it in the previous round, updates its
//! state and emits new messages. A node that reports [`Status::Halted`] is
//! skipped until a message arrives for it; a run ends once every node has
//! halted and no message is in flight.
//!
//! Under CONGEST each message must fit in `B = c0 * ceil(log2(n + m + 2))`
//! bits. Several messages on the same link in one logical round are
//! pipelined: the logical round is charged `ceil(total_bits / B)` physical
//! rounds. A single message larger than `B` is a bandwidth violation.

mod library;
mod topology;

pub use library::*;
pub use topology::{ceil_log2, Representation, Role, Topology};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Local,
    Congest,
}

impl std::str::FromStr for Regime {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "local" => Ok(Regime::Local),
            "congest" => Ok(Regime::Congest),
            _ => Err(format!("unknown regime {s:?} (expected local or congest)")),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Local => "local",
            Regime::Congest => "congest",
        })
    }
}

/// What to do when a single message exceeds the CONGEST budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enforcement {
    Flag,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mode {
    pub regime: Regime,
    pub c0: u64,
    pub enforcement: Enforcement,
}

pub const DEFAULT_C0: u64 = 4;

impl Mode {
    pub fn local() -> Self {
        Mode { regime: Regime::Local, c0: DEFAULT_C0, enforcement: Enforcement::Flag }
    }

    pub fn congest() -> Self {
        Mode { regime: Regime::Congest, c0: DEFAULT_C0, enforcement: Enforcement::Flag }
    }

    pub fn new(regime: Regime) -> Self {
        Mode { regime, ..Mode::local() }
    }

    /// Per-link per-round bit budget, `None` under LOCAL.
    pub fn budget(&self, topo: &Topology) -> Option<u64> {
        match self.regime {
            Regime::Local => None,
            Regime::Congest => Some((self.c0 * topo.word_bits()).max(1)),
        }
    }
}

/// Size accounting for message payloads. `word` is the width of one id.
pub trait Payload {
    fn bits(&self, word: u64) -> u64;
}

impl Payload for () {
    fn bits(&self, _: u64) -> u64 {
        0
    }
}

impl Payload for bool {
    fn bits(&self, _: u64) -> u64 {
        1
    }
}

impl Payload for usize {
    fn bits(&self, word: u64) -> u64 {
        word
    }
}

impl Payload for u64 {
    /// Integers that may exceed an id (priorities) are charged by magnitude.
    fn bits(&self, word: u64) -> u64 {
        (64 - self.leading_zeros() as u64).max(word)
    }
}

impl<T: Payload> Payload for Option<T> {
    fn bits(&self, word: u64) -> u64 {
        1 + self.as_ref().map_or(0, |v| v.bits(word))
    }
}

impl<T: Payload> Payload for Vec<T> {
    fn bits(&self, word: u64) -> u64 {
        word + self.iter().map(|v| v.bits(word)).sum::<u64>()
    }
}

impl<A: Payload, B: Payload> Payload for (A, B) {
    fn bits(&self, word: u64) -> u64 {
        self.0.bits(word) + self.1.bits(word)
    }
}

impl<A: Payload, B: Payload, C: Payload> Payload for (A, B, C) {
    fn bits(&self, word: u64) -> u64 {
        self.0.bits(word) + self.1.bits(word) + self.2.bits(word)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Running,
    Halted,
}

/// What a node knows about itself.
pub struct NodeCtx<'a> {
    pub id: usize,
    pub role: Role,
    pub neighbors: &'a [usize],
    pub topology: &'a Topology,
}

pub struct Outbox<M> {
    sends: Vec<(usize, M)>,
}

impl<M: Clone> Outbox<M> {
    pub fn send(&mut self, to: usize, msg: M) {
        self.sends.push((to, msg));
    }

    pub fn broadcast(&mut self, ctx: &NodeCtx<'_>, msg: M) {
        for &v in ctx.neighbors {
            self.sends.push((v, msg.clone()));
        }
    }
}

/// A distributed algorithm, one instance per node.
pub trait NodeProgram {
    type State;
    type Msg: Payload + Clone;
    type Output;

    fn init(&self, ctx: &NodeCtx<'_>, rng: &mut NodeRng) -> Self::State;

    /// One round. `inbox` holds `(sender, payload)` pairs sorted by sender.
    fn step(
        &self,
        ctx: &NodeCtx<'_>,
        state: &mut Self::State,
        round: usize,
        inbox: &[(usize, Self::Msg)],
        rng: &mut NodeRng,
        out: &mut Outbox<Self::Msg>,
    ) -> Status;

    fn output(&self, ctx: &NodeCtx<'_>, state: Self::State) -> Self::Output;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("node {from} sent to non-neighbor {to}")]
    NotNeighbor { from: usize, to: usize },
    #[error("no quiescence after {cap} rounds")]
    RoundCap { cap: usize },
    #[error("round {round}: {bits}-bit payload {from}->{to} exceeds the budget of {budget} bits")]
    OverBudget { round: usize, from: usize, to: usize, bits: u64, budget: u64 },
    #[error("topology is disconnected")]
    Disconnected,
}

/// Per-round summary for the optional event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundEvent {
    pub round: usize,
    pub messages: u64,
    pub max_bits: u64,
    pub charged: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    pub rounds: u64,
    pub messages: u64,
    pub max_bits: u64,
    pub violations: u64,
}

impl Metrics {
    pub fn absorb(&mut self, other: &Metrics) {
        self.rounds += other.rounds;
        self.messages += other.messages;
        self.max_bits = self.max_bits.max(other.max_bits);
        self.violations += other.violations;
    }
}

#[derive(Debug, Clone)]
pub struct RunTrace<O> {
    pub metrics: Metrics,
    pub logical_rounds: usize,
    pub outputs: Vec<O>,
    pub events: Option<Vec<RoundEvent>>,
}

/// Default cap on logical rounds: `50 * N^2` for `N` nodes.
pub fn default_round_cap(topo: &Topology) -> usize {
    let n = topo.node_count().max(1);
    50usize.saturating_mul(n).saturating_mul(n)
}

/// Derives a 64-bit seed from a parent seed and a tag.
pub fn mix(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn node_rng(seed: u64, node: usize) -> NodeRng {
    NodeRng::seed_from_u64(mix(seed, node as u64 + 1))
}

pub fn run<P: NodeProgram>(
    topo: &Topology,
    prog: &P,
    mode: Mode,
    seed: u64,
    max_rounds: usize,
) -> Result<RunTrace<P::Output>, SimError> {
    execute(topo, prog, mode, seed, max_rounds, false)
}

/// Like [`run`], also recording a per-round event log.
pub fn run_logged<P: NodeProgram>(
    topo: &Topology,
    prog: &P,
    mode: Mode,
    seed: u64,
    max_rounds: usize,
) -> Result<RunTrace<P::Output>, SimError> {
    execute(topo, prog, mode, seed, max_rounds, true)
}

fn execute<P: NodeProgram>(
    topo: &Topology,
    prog: &P,
    mode: Mode,
    seed: u64,
    max_rounds: usize,
    log: bool,
) -> Result<RunTrace<P::Output>, SimError> {
    let n = topo.node_count();
    let word = topo.word_bits();
    let budget = mode.budget(topo);
    let ctxs: Vec<NodeCtx<'_>> = (0..n)
        .map(|id| NodeCtx { id, role: topo.role(id), neighbors: topo.neighbors(id), topology: topo })
        .collect();
    let mut rngs: Vec<NodeRng> = (0..n).map(|v| node_rng(seed, v)).collect();
    let mut states: Vec<P::State> = (0..n).map(|v| prog.init(&ctxs[v], &mut rngs[v])).collect();
    let mut halted = vec![false; n];
    let mut inboxes: Vec<Vec<(usize, P::Msg)>> = (0..n).map(|_| Vec::new()).collect();
    let mut next: Vec<Vec<(usize, P::Msg)>> = (0..n).map(|_| Vec::new()).collect();
    let mut metrics = Metrics::default();
    let mut events = log.then(Vec::new);
    let mut charged_total = 0u64;
    let mut last_send = 0usize;
    let mut round = 0usize;
    let mut in_flight = false;
    let mut out = Outbox { sends: Vec::new() };

    loop {
        if !in_flight && halted.iter().all(|&h| h) {
            break;
        }
        if round >= max_rounds {
            return Err(SimError::RoundCap { cap: max_rounds });
        }
        round += 1;
        in_flight = false;
        let mut round_msgs = 0u64;
        let mut round_bits = 0u64;
        let mut charge = 1u64;
        for v in 0..n {
            let inbox = std::mem::take(&mut inboxes[v]);
            if halted[v] && inbox.is_empty() {
                continue;
            }
            let status = prog.step(&ctxs[v], &mut states[v], round, &inbox, &mut rngs[v], &mut out);
            halted[v] = status == Status::Halted;
            if out.sends.is_empty() {
                continue;
            }
            out.sends.sort_by_key(|(to, _)| *to);
            let mut i = 0;
            while i < out.sends.len() {
                let to = out.sends[i].0;
                if topo.neighbors(v).binary_search(&to).is_err() {
                    return Err(SimError::NotNeighbor { from: v, to });
                }
                let mut link_bits = 0u64;
                let mut worst = 0u64;
                while i < out.sends.len() && out.sends[i].0 == to {
                    let b = out.sends[i].1.bits(word);
                    link_bits += b;
                    worst = worst.max(b);
                    round_msgs += 1;
                    i += 1;
                }
                match budget {
                    None => round_bits = round_bits.max(link_bits),
                    Some(cap) => {
                        if worst > cap {
                            if mode.enforcement == Enforcement::Error {
                                return Err(SimError::OverBudget { round, from: v, to, bits: worst, budget: cap });
                            }
                            metrics.violations += 1;
                            round_bits = round_bits.max(worst);
                        } else {
                            round_bits = round_bits.max(link_bits.min(cap));
                        }
                        charge = charge.max(link_bits.div_ceil(cap));
                    }
                }
            }
            for (to, msg) in out.sends.drain(..) {
                next[to].push((v, msg));
            }
            in_flight = true;
        }
        std::mem::swap(&mut inboxes, &mut next);
        if in_flight {
            charged_total += charge;
            metrics.rounds = charged_total;
            last_send = round;
        } else {
            charged_total += 1;
        }
        metrics.messages += round_msgs;
        metrics.max_bits = metrics.max_bits.max(round_bits);
        if let Some(ev) = events.as_mut() {
            if in_flight {
                ev.push(RoundEvent { round, messages: round_msgs, max_bits: round_bits, charged: charge });
            }
        }
    }
    let outputs = states
        .into_iter()
        .enumerate()
        .map(|(v, s)| prog.output(&ctxs[v], s))
        .collect();
    Ok(RunTrace { metrics, logical_rounds: last_send, outputs, events })
}

/// Runs a sequence of programs on one topology, accumulating metrics.
///
/// Each run gets a fresh seed derived from the session seed. Drivers that
/// need per-node randomness between runs draw it from [`Session::rng`],
/// a persistent stream per node.
pub struct Session<'t> {
    topo: &'t Topology,
    mode: Mode,
    seed: u64,
    runs: u64,
    rngs: Vec<NodeRng>,
    pub metrics: Metrics,
}

impl<'t> Session<'t> {
    pub fn new(topo: &'t Topology, mode: Mode, seed: u64) -> Self {
        let rngs = (0..topo.node_count()).map(|v| node_rng(mix(seed, u64::MAX), v)).collect();
        Session { topo, mode, seed, runs: 0, rngs, metrics: Metrics::default() }
    }

    pub fn topology(&self) -> &'t Topology {
        self.topo
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn rng(&mut self, node: usize) -> &mut NodeRng {
        &mut self.rngs[node]
    }

    pub fn run<P: NodeProgram>(&mut self, prog: &P) -> Result<Vec<P::Output>, SimError> {
        self.runs += 1;
        let seed = mix(self.seed, self.runs);
        let trace = run(self.topo, prog, self.mode, seed, default_round_cap(self.topo))?;
        self.metrics.absorb(&trace.metrics);
        Ok(trace.outputs)
    }

    /// One communication round: node `v` sends `outgoing[v]`. Returns each
    /// node's inbox.
    pub fn exchange<M: Payload + Clone>(
        &mut self,
        outgoing: Vec<Vec<(usize, M)>>,
    ) -> Result<Vec<Vec<(usize, M)>>, SimError> {
        self.run(&OneShot { outgoing })
    }

    /// Adds rounds that are modelled rather than simulated.
    pub fn charge_rounds(&mut self, rounds: u64) {
        self.metrics.rounds += rounds;
    }
}

struct OneShot<M> {
    outgoing: Vec<Vec<(usize, M)>>,
}

impl<M: Payload + Clone> NodeProgram for OneShot<M> {
    type State = Vec<(usize, M)>;
    type Msg = M;
    type Output = Vec<(usize, M)>;

    fn init(&self, _: &NodeCtx<'_>, _: &mut NodeRng) -> Self::State {
        Vec::new()
    }

    fn step(
        &self,
        ctx: &NodeCtx<'_>,
        state: &mut Self::State,
        round: usize,
        inbox: &[(usize, M)],
        _: &mut NodeRng,
        out: &mut Outbox<M>,
    ) -> Status {
        if round == 1 {
            for (to, msg) in &self.outgoing[ctx.id] {
                out.send(*to, msg.clone());
            }
        } else {
            state.extend(inbox.iter().cloned());
        }
        Status::Halted
    }

    fn output(&self, _: &NodeCtx<'_>, state: Self::State) -> Self::Output {
        state
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::Hypergraph;

    fn fig1() -> Hypergraph {
        Hypergraph::build(4, [vec![0, 1, 2], vec![1, 3], vec![2, 3]]).unwrap()
    }

    struct Halt;
    impl NodeProgram for Halt {
        type State = ();
        type Msg = ();
        type Output = ();
        fn init(&self, _: &NodeCtx<'_>, _: &mut NodeRng) {}
        fn step(&self, _: &NodeCtx<'_>, _: &mut (), _: usize, _: &[(usize, ())], _: &mut NodeRng, _: &mut Outbox<()>) -> Status {
            Status::Halted
        }
        fn output(&self, _: &NodeCtx<'_>, _: ()) {}
    }

    struct SendId;
    impl NodeProgram for SendId {
        type State = Vec<usize>;
        type Msg = usize;
        type Output = Vec<usize>;
        fn init(&self, _: &NodeCtx<'_>, _: &mut NodeRng) -> Vec<usize> {
            Vec::new()
        }
        fn step(&self, ctx: &NodeCtx<'_>, st: &mut Vec<usize>, round: usize, inbox: &[(usize, usize)], _: &mut NodeRng, out: &mut Outbox<usize>) -> Status {
            if round == 1 {
                out.broadcast(ctx, ctx.id);
            }
            st.extend(inbox.iter().map(|&(_, id)| id));
            Status::Halted
        }
        fn output(&self, _: &NodeCtx<'_>, st: Vec<usize>) -> Vec<usize> {
            st
        }
    }

    /// Sends a payload of a fixed number of words to every neighbour.
    struct Fat(usize, usize);
    impl NodeProgram for Fat {
        type State = ();
        type Msg = Vec<usize>;
        type Output = ();
        fn init(&self, _: &NodeCtx<'_>, _: &mut NodeRng) {}
        fn step(&self, ctx: &NodeCtx<'_>, _: &mut (), round: usize, _: &[(usize, Vec<usize>)], _: &mut NodeRng, out: &mut Outbox<Vec<usize>>) -> Status {
            if round == 1 {
                for _ in 0..self.1 {
                    out.broadcast(ctx, vec![0; self.0]);
                }
            }
            Status::Halted
        }
        fn output(&self, _: &NodeCtx<'_>, _: ()) {}
    }

    #[test]
    fn halting_program_uses_no_rounds() {
        let t = Topology::from_hypergraph(&fig1(), Representation::ServerClient);
        let tr = run(&t, &Halt, Mode::congest(), 1, 10).unwrap();
        assert_eq!((tr.metrics.rounds, tr.metrics.messages), (0, 0));
    }

    #[test]
    fn one_shot_delivers_twice_the_links() {
        let t = Topology::from_hypergraph(&fig1(), Representation::ServerClient);
        let tr = run_logged(&t, &SendId, Mode::congest(), 1, 10).unwrap();
        assert_eq!(tr.metrics.messages, 14);
        assert_eq!(tr.metrics.rounds, 1);
        let ev = tr.events.unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!((ev[0].round, ev[0].messages), (1, 14));
        // synchrony: each node heard exactly its neighbours, one round later
        for v in 0..t.node_count() {
            let mut got = tr.outputs[v].clone();
            got.sort_unstable();
            assert_eq!(got, t.neighbors(v));
        }
    }

    #[test]
    fn identical_seeds_identical_traces() {
        let t = Topology::from_hypergraph(&fig1(), Representation::VertexCentric);
        let a = run_logged(&t, &SendId, Mode::local(), 9, 10).unwrap();
        let b = run_logged(&t, &SendId, Mode::local(), 9, 10).unwrap();
        assert_eq!(a.outputs, b.outputs);
        assert_eq!(a.metrics, b.metrics);
        assert_eq!(a.events, b.events);
    }

    #[test]
    fn congest_pipelines_and_flags() {
        let t = Topology::from_hypergraph(&fig1(), Representation::VertexCentric);
        let b = Mode::congest().budget(&t).unwrap();
        let w = t.word_bits();
        assert_eq!(b, 4 * w);
        // three 2-word messages per link: 3 * 3w bits = 9w, pipelined over 3 rounds
        let tr = run(&t, &Fat(2, 3), Mode::congest(), 1, 10).unwrap();
        assert_eq!(tr.metrics.violations, 0);
        assert_eq!(tr.metrics.rounds, 3);
        assert!(tr.metrics.max_bits <= b);
        // one 4-word message is 5w bits: over budget
        let tr = run(&t, &Fat(4, 1), Mode::congest(), 1, 10).unwrap();
        assert_eq!(tr.metrics.violations, t.link_count() as u64 * 2);
        assert!(tr.metrics.max_bits > b);
        let strict = Mode { enforcement: Enforcement::Error, ..Mode::congest() };
        assert!(matches!(run(&t, &Fat(4, 1), strict, 1, 10), Err(SimError::OverBudget { .. })));
        // LOCAL never charges extra rounds
        let tr = run(&t, &Fat(4, 3), Mode::local(), 1, 10).unwrap();
        assert_eq!((tr.metrics.rounds, tr.metrics.violations), (1, 0));
    }

    struct Chatter;
    impl NodeProgram for Chatter {
        type State = ();
        type Msg = bool;
        type Output = ();
        fn init(&self, _: &NodeCtx<'_>, _: &mut NodeRng) {}
        fn step(&self, ctx: &NodeCtx<'_>, _: &mut (), _: usize, _: &[(usize, bool)], _: &mut NodeRng, out: &mut Outbox<bool>) -> Status {
            out.broadcast(ctx, true);
            Status::Running
        }
        fn output(&self, _: &NodeCtx<'_>, _: ()) {}
    }

    #[test]
    fn round_cap_is_reported() {
        let t = Topology::from_hypergraph(&fig1(), Representation::VertexCentric);
        assert_eq!(run(&t, &Chatter, Mode::local(), 1, 5).unwrap_err(), SimError::RoundCap { cap: 5 });
    }
}
