//! Instance generation, experiment grids and result files.
//!
//! JSON is the full record; the CSV file carries the columns of
//! [`CSV_COLUMNS`] in that order.

pub mod generate;
pub mod scs;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::apps::{bmds, mcds, rmds, AppError};
use crate::extras::{hyper_coloring, maximal_clique, maximal_matching, ExtrasError};
use crate::graph::Graph;
use crate::hypergraph::{Hypergraph, HypergraphError};
use crate::mis::{solve, Engine, MisError, MisInstance};
use crate::netsim::{Metrics, Mode, Regime, Representation};
use crate::oracles::{
    is_maximal_clique, is_maximal_independent, is_maximal_matching, is_mcds, is_minimal_dominating,
    is_minimal_dominating_within, is_valid_coloring, OracleError, Verdict, MCDS_LIMIT,
};

pub use generate::{generate, Family, GenSpec};
pub use scs::{check_scs_reduction, scs_fixtures, subdivide, ScsVerdict};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("exhaustive check is limited to {limit} vertices, got {n}")]
    TooLarge { n: usize, limit: usize },
    #[error("instance is not a graph: edge {edge} has {size} vertices")]
    NotAGraph { edge: usize, size: usize },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Mis(#[from] MisError),
    #[error(transparent)]
    App(#[from] AppError),
    #[error(transparent)]
    Extras(#[from] ExtrasError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Hex SHA-256 of the canonical text form.
pub fn fingerprint(h: &Hypergraph) -> String {
    Sha256::digest(h.serialize().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// The graph behind a 2-uniform hypergraph.
pub fn as_graph(h: &Hypergraph) -> Result<Graph, BenchError> {
    if let Some((edge, e)) = h.edges().iter().enumerate().find(|(_, e)| e.len() != 2) {
        return Err(BenchError::NotAGraph { edge, size: e.len() });
    }
    Ok(Graph::from_edges(h.n(), h.edges().iter().map(|e| (e[0], e[1])))?)
}

/// Anything the runner can execute. Graph applications take an optional
/// `:<engine>` suffix for their MIS step (default `kuw-sqrt`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Algorithm {
    Mis(Engine),
    Rmds(Engine),
    Bmds(Engine),
    Mcds(Engine),
    Coloring,
    Matching,
    Clique,
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (head, tail) = match s.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (s, None),
        };
        let inner = || tail.map(str::parse).unwrap_or(Ok(Engine::KuwSqrt));
        Ok(match (head, tail) {
            ("rmds", _) => Algorithm::Rmds(inner()?),
            ("bmds", _) => Algorithm::Bmds(inner()?),
            ("mcds", _) => Algorithm::Mcds(inner()?),
            ("coloring", None) => Algorithm::Coloring,
            ("matching", None) => Algorithm::Matching,
            ("clique", None) => Algorithm::Clique,
            _ => Algorithm::Mis(s.parse()?),
        })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Mis(e) => write!(f, "{e}"),
            Algorithm::Rmds(e) => write!(f, "rmds:{e}"),
            Algorithm::Bmds(e) => write!(f, "bmds:{e}"),
            Algorithm::Mcds(e) => write!(f, "mcds:{e}"),
            Algorithm::Coloring => f.write_str("coloring"),
            Algorithm::Matching => f.write_str("matching"),
            Algorithm::Clique => f.write_str("clique"),
        }
    }
}

/// What one run produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutput {
    /// Vertex set, edge ids for matching, or the color of each vertex.
    pub output: Vec<usize>,
    /// Set size, or the number of distinct colors.
    pub output_size: usize,
    pub metrics: Metrics,
    pub iterations: Option<usize>,
    /// `None` when the instance is above the oracle's size guard.
    pub verdict: Option<Verdict>,
}

fn set_output(set: Vec<usize>, metrics: Metrics, iterations: Option<usize>, verdict: Option<Verdict>) -> RunOutput {
    RunOutput { output_size: set.len(), output: set, metrics, iterations, verdict }
}

/// Runs `algo` once and checks the output with the matching oracle.
pub fn run_algorithm(
    h: &Hypergraph,
    algo: &Algorithm,
    repr: Representation,
    mode: Mode,
    seed: u64,
) -> Result<RunOutput, BenchError> {
    Ok(match algo {
        Algorithm::Mis(engine) => {
            let r = solve(&MisInstance::full(h, repr, mode), engine, seed)?;
            let v = is_maximal_independent(h, &r.set);
            set_output(r.set, r.metrics, Some(r.iterations), Some(v))
        }
        Algorithm::Rmds(engine) => {
            let g = as_graph(h)?;
            let all: Vec<usize> = (0..g.n()).collect();
            let r = rmds(&g, &all, engine, mode, seed)?;
            let v = is_minimal_dominating_within(&g, &all, &r.set);
            set_output(r.set, r.metrics, None, Some(v))
        }
        Algorithm::Bmds(engine) => {
            let g = as_graph(h)?;
            let r = bmds(&g, engine, mode, seed)?;
            let v = is_minimal_dominating(&g, &r.set);
            set_output(r.set, r.metrics, None, Some(v))
        }
        Algorithm::Mcds(engine) => {
            let g = as_graph(h)?;
            let r = mcds(&g, engine, mode, seed)?;
            let v = if g.n() <= MCDS_LIMIT { is_mcds(&g, &r.set).ok() } else { None };
            set_output(r.set, r.metrics, None, v)
        }
        Algorithm::Coloring => {
            let c = hyper_coloring(h, repr, mode, seed)?;
            let v = is_valid_coloring(h, &c.colors, c.palette);
            let mut distinct = c.colors.clone();
            distinct.sort_unstable();
            distinct.dedup();
            RunOutput {
                output_size: distinct.len(),
                output: c.colors,
                metrics: c.metrics,
                iterations: Some(c.iterations),
                verdict: Some(v),
            }
        }
        Algorithm::Matching => {
            let r = maximal_matching(h, mode, seed)?;
            let v = is_maximal_matching(h, &r.edges);
            set_output(r.edges, r.metrics, Some(r.iterations), Some(v))
        }
        Algorithm::Clique => {
            let r = maximal_clique(h, mode, seed)?;
            let v = is_maximal_clique(&h.server_graph(), &r.set);
            set_output(r.set, r.metrics, Some(r.iterations), Some(v))
        }
    })
}

/// Output kinds `verify` can check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Mis,
    Rmds,
    Mcds,
    Coloring,
    Matching,
    Clique,
}

impl FromStr for Check {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "mis" => Check::Mis,
            "rmds" => Check::Rmds,
            "mcds" => Check::Mcds,
            "coloring" => Check::Coloring,
            "matching" => Check::Matching,
            "clique" => Check::Clique,
            _ => return Err(format!("unknown check {s:?} (expected mis, rmds, mcds, coloring, matching or clique)")),
        })
    }
}

/// Numbers from a candidate file: a JSON array or whitespace-separated
/// text with `#` comments.
fn candidate_numbers(text: &str) -> Result<Vec<usize>, BenchError> {
    if text.trim_start().starts_with('[') {
        return Ok(serde_json::from_str(text)?);
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_whitespace() {
            out.push(tok.parse().map_err(|_| {
                BenchError::Hypergraph(HypergraphError::Parse { line: i + 1, message: format!("bad number {tok:?}") })
            })?);
        }
    }
    Ok(out)
}

/// 1-based ids to 0-based, rejecting 0 and ids above `limit`.
fn zero_based(ids: Vec<usize>, limit: usize) -> Result<Vec<usize>, BenchError> {
    let mut out = Vec::with_capacity(ids.len());
    for id in ids {
        if id == 0 || id > limit {
            return Err(HypergraphError::VertexOutOfRange { id, n: limit }.into());
        }
        out.push(id - 1);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Checks a candidate against `h`. Vertex and edge ids are 1-based; a
/// coloring lists one color per vertex. `restrict` (ids) bounds RMDS and
/// defaults to every vertex.
pub fn verify(h: &Hypergraph, check: Check, candidate: &str, restrict: Option<&str>) -> Result<Verdict, BenchError> {
    let nums = candidate_numbers(candidate)?;
    Ok(match check {
        Check::Mis => is_maximal_independent(h, &zero_based(nums, h.n())?),
        Check::Rmds => {
            let g = as_graph(h)?;
            let r = match restrict {
                Some(t) => zero_based(candidate_numbers(t)?, h.n())?,
                None => (0..h.n()).collect(),
            };
            is_minimal_dominating_within(&g, &r, &zero_based(nums, h.n())?)
        }
        Check::Mcds => is_mcds(&as_graph(h)?, &zero_based(nums, h.n())?)?,
        Check::Coloring => is_valid_coloring(h, &nums, h.stats().max_degree + 1),
        Check::Matching => is_maximal_matching(h, &zero_based(nums, h.m())?),
        Check::Clique => is_maximal_clique(&h.server_graph(), &zero_based(nums, h.n())?),
    })
}

/// One run of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub fingerprint: String,
    pub instance: String,
    pub algorithm: String,
    pub representation: Representation,
    pub regime: Regime,
    pub seed: u64,
    pub rounds: u64,
    pub messages: u64,
    pub max_bits: u64,
    pub violations: u64,
    pub iterations: Option<usize>,
    pub output_size: usize,
    /// Oracle result; empty when the oracle was skipped or the run failed.
    pub verdict: Option<bool>,
    pub error: Option<String>,
    pub wall_ms: f64,
}

pub const CSV_COLUMNS: [&str; 15] = [
    "fingerprint",
    "instance",
    "algorithm",
    "representation",
    "regime",
    "seed",
    "rounds",
    "messages",
    "max_bits",
    "violations",
    "iterations",
    "output_size",
    "verdict",
    "error",
    "wall_ms",
];

impl ExperimentRecord {
    /// A record fails when the run errored or the oracle rejected it.
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.verdict != Some(false)
    }
}

pub fn run_record(
    label: &str,
    h: &Hypergraph,
    algo: &Algorithm,
    repr: Representation,
    regime: Regime,
    seed: u64,
) -> ExperimentRecord {
    run_record_with_output(label, h, algo, repr, regime, seed).0
}

/// Like [`run_record`], also returning the output when the run succeeded.
pub fn run_record_with_output(
    label: &str,
    h: &Hypergraph,
    algo: &Algorithm,
    repr: Representation,
    regime: Regime,
    seed: u64,
) -> (ExperimentRecord, Option<RunOutput>) {
    let start = Instant::now();
    let res = run_algorithm(h, algo, repr, Mode::new(regime), seed);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut rec = ExperimentRecord {
        fingerprint: fingerprint(h),
        instance: label.to_string(),
        algorithm: algo.to_string(),
        representation: repr,
        regime,
        seed,
        rounds: 0,
        messages: 0,
        max_bits: 0,
        violations: 0,
        iterations: None,
        output_size: 0,
        verdict: None,
        error: None,
        wall_ms,
    };
    match res {
        Ok(out) => {
            rec.rounds = out.metrics.rounds;
            rec.messages = out.metrics.messages;
            rec.max_bits = out.metrics.max_bits;
            rec.violations = out.metrics.violations;
            rec.iterations = out.iterations;
            rec.output_size = out.output_size;
            rec.verdict = out.verdict.as_ref().map(|v| v.pass);
            (rec, Some(out))
        }
        Err(e) => {
            rec.error = Some(e.to_string());
            (rec, None)
        }
    }
}

fn default_reprs() -> Vec<Representation> {
    vec![Representation::ServerClient]
}

fn default_regimes() -> Vec<Regime> {
    vec![Regime::Congest]
}

fn default_trials() -> u64 {
    1
}

/// Sweep file (TOML). Instances come from files, generators, or both.
///
/// ```toml
/// algorithms = ["kuw-sqrt", "mcds"]
/// representations = ["sc", "vc"]
/// regimes = ["congest"]
/// trials = 5
/// seed = 0
/// json = "results.json"
/// csv = "results.csv"
///
/// [[generate]]
/// family = "random"
/// n = 64
/// m = 64
/// dmax = 3
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub instances: Vec<PathBuf>,
    #[serde(default)]
    pub generate: Vec<GenSpec>,
    pub algorithms: Vec<String>,
    #[serde(default = "default_reprs")]
    pub representations: Vec<Representation>,
    #[serde(default = "default_regimes")]
    pub regimes: Vec<Regime>,
    /// Seeds `seed .. seed + trials` per cell.
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub json: Option<PathBuf>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

impl SweepConfig {
    /// Relative instance and output paths resolve against `base`.
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = read(path)?;
        let mut cfg: SweepConfig = toml::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in cfg.instances.iter_mut().chain(cfg.json.iter_mut()).chain(cfg.csv.iter_mut()) {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

pub fn read(path: &Path) -> Result<String, BenchError> {
    std::fs::read_to_string(path).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })
}

pub fn write(path: &Path, text: &str) -> Result<(), BenchError> {
    std::fs::write(path, text).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })
}

/// Reads an instance. `.gr` and `.graph` files hold the plain `u v` graph
/// format, anything else the hypergraph format.
pub fn load_instance(path: &Path) -> Result<Hypergraph, BenchError> {
    let text = read(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("gr" | "graph") => Ok(Graph::parse(&text)?.to_hypergraph()),
        _ => Ok(Hypergraph::parse(&text)?),
    }
}

/// Runs the full grid: instances × algorithms × representations × regimes
/// × seeds. Run failures are recorded and the grid continues; only bad
/// configuration aborts.
pub fn run_experiment(cfg: &SweepConfig) -> Result<Vec<ExperimentRecord>, BenchError> {
    let algos: Vec<Algorithm> =
        cfg.algorithms.iter().map(|a| a.parse().map_err(BenchError::Config)).collect::<Result<_, _>>()?;
    let mut instances: Vec<(String, Hypergraph)> = Vec::new();
    for p in &cfg.instances {
        instances.push((p.display().to_string(), load_instance(p)?));
    }
    for params in &cfg.generate {
        instances.push((params.label(), generate(params)?));
    }
    let mut records = Vec::new();
    for (label, h) in &instances {
        for algo in &algos {
            for &repr in &cfg.representations {
                for &regime in &cfg.regimes {
                    for seed in cfg.seed..cfg.seed + cfg.trials {
                        records.push(run_record(label, h, algo, repr, regime, seed));
                    }
                }
            }
        }
    }
    Ok(records)
}

/// Pretty JSON array. With `wall: false` the wall-clock field is zeroed so
/// reruns compare byte for byte.
pub fn records_json(records: &[ExperimentRecord], wall: bool) -> Result<String, BenchError> {
    if wall {
        return Ok(serde_json::to_string_pretty(records)?);
    }
    let stripped: Vec<ExperimentRecord> = records.iter().cloned().map(|r| ExperimentRecord { wall_ms: 0.0, ..r }).collect();
    Ok(serde_json::to_string_pretty(&stripped)?)
}

pub fn records_csv(records: &[ExperimentRecord]) -> Result<String, BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| BenchError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> Hypergraph {
        Hypergraph::build(4, [vec![0, 1, 2], vec![1, 3], vec![2, 3]]).unwrap()
    }

    #[test]
    fn algorithm_names() {
        for s in ["kuw-sqrt", "dim-reduced:beame-luby", "rmds:kuw-sqrt", "mcds:beame-luby:3", "coloring", "matching", "clique"] {
            assert_eq!(s.parse::<Algorithm>().unwrap().to_string(), s);
        }
        assert_eq!("mcds".parse::<Algorithm>().unwrap(), Algorithm::Mcds(Engine::KuwSqrt));
        assert!("clique:kuw-sqrt".parse::<Algorithm>().is_err());
    }

    #[test]
    fn fingerprint_is_canonical() {
        let a = fig1();
        let b = Hypergraph::build(4, [vec![3, 2], vec![2, 1, 0], vec![1, 3]]).unwrap();
        assert_ne!(a, b);
        let c = Hypergraph::build(4, [vec![0, 1, 2], vec![1, 3], vec![3, 2]]).unwrap();
        assert_eq!(fingerprint(&a), fingerprint(&c));
        assert_eq!(fingerprint(&a).len(), 64);
    }

    #[test]
    fn grid_counts_and_repeats() {
        let cfg = SweepConfig {
            instances: Vec::new(),
            generate: (0..3).map(|s| GenSpec { m: Some(8), dmax: Some(3), seed: s, ..GenSpec::new(Family::Random, 8) }).collect(),
            algorithms: vec!["kuw-sqrt".into(), "beame-luby".into()],
            representations: default_reprs(),
            regimes: default_regimes(),
            trials: 5,
            seed: 0,
            json: None,
            csv: None,
        };
        let a = run_experiment(&cfg).unwrap();
        assert_eq!(a.len(), 30);
        assert!(a.iter().all(ExperimentRecord::passed));
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(records_json(&a, false).unwrap(), records_json(&b, false).unwrap());
        let csv = records_csv(&a).unwrap();
        assert_eq!(csv.lines().next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(csv.lines().count(), 31);
    }

    #[test]
    fn failures_are_recorded() {
        let rec = run_record("fig1", &fig1(), &Algorithm::Mis(Engine::LocalMis), Representation::ServerClient, Regime::Congest, 0);
        assert!(rec.error.is_some());
        assert!(!rec.passed());
        let rec = run_record("fig1", &fig1(), &"mcds".parse().unwrap(), Representation::ServerClient, Regime::Congest, 0);
        assert!(rec.error.unwrap().contains("not a graph"));
    }

    #[test]
    fn every_algorithm_runs() {
        let g = generate(&GenSpec { m: Some(14), seed: 3, ..GenSpec::new(Family::Connected, 10) }).unwrap();
        for a in ["local-mis", "kuw-sqrt", "rmds", "bmds", "mcds", "coloring", "matching", "clique"] {
            let rec = run_record("g", &g, &a.parse().unwrap(), Representation::ServerClient, Regime::Local, 1);
            assert!(rec.passed(), "{a}: {rec:?}");
            assert_eq!(rec.verdict, Some(true));
        }
    }

    #[test]
    fn verify_candidates() {
        let h = fig1();
        assert!(verify(&h, Check::Mis, "1 4\n", None).unwrap().pass);
        assert!(verify(&h, Check::Mis, "[1, 2]", None).unwrap().pass);
        assert!(!verify(&h, Check::Mis, "1", None).unwrap().pass);
        assert!(verify(&h, Check::Coloring, "1 2 2 1", None).unwrap().pass);
        assert!(verify(&h, Check::Matching, "2", None).unwrap().pass);
        assert!(verify(&h, Check::Clique, "1 2 3", None).unwrap().pass);
        assert!(verify(&h, Check::Mis, "0", None).is_err());
        let p = Graph::path(5).to_hypergraph();
        assert!(verify(&p, Check::Mcds, "2 3 4", None).unwrap().pass);
        assert!(verify(&p, Check::Rmds, "2 5", Some("2 5")).unwrap().pass);
        assert!(!verify(&p, Check::Rmds, "2 4", Some("2 5")).unwrap().pass);
    }

    #[test]
    fn config_parses() {
        let cfg: SweepConfig = toml::from_str(
            "algorithms = [\"kuw-sqrt\"]\nrepresentations = [\"vc\"]\nregimes = [\"local\"]\ntrials = 2\n\n[[generate]]\nfamily = \"bridge-ring\"\nn = 24\ndiameter = 2\n",
        )
        .unwrap();
        assert_eq!(cfg.representations, vec![Representation::VertexCentric]);
        assert_eq!(cfg.regimes, vec![Regime::Local]);
        assert_eq!(cfg.generate[0].family, Family::BridgeRing);
        assert_eq!(run_experiment(&cfg).unwrap().len(), 2);
    }
}
