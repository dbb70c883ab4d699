//! Hypergraph data model, derived views and the line-oriented text format.

use std::collections::HashSet;
use std::fmt::Write as _;

use num_rational::Ratio;
use thiserror::Error;

use crate::graph::Graph;

pub type Vertex = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HypergraphError {
    #[error("vertex id {id} out of range (n = {n})")]
    VertexOutOfRange { id: usize, n: usize },
    #[error("edge {index} is empty")]
    EmptyEdge { index: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A hypergraph on the dense vertex ids `0..n`.
///
/// Edges are kept sorted and free of repeated ids. Duplicate edges are
/// collapsed unless the hypergraph was built with [`Hypergraph::build_multi`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hypergraph {
    n: usize,
    edges: Vec<Vec<Vertex>>,
}

/// Degree statistics. `avg_degree` is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stats {
    pub max_degree: usize,
    pub dim: usize,
    pub avg_degree: Ratio<u64>,
}

impl Hypergraph {
    pub fn build<I, E>(n: usize, edges: I) -> Result<Self, HypergraphError>
    where
        I: IntoIterator<Item = E>,
        E: IntoIterator<Item = Vertex>,
    {
        Self::build_inner(n, edges, true)
    }

    /// Like [`Hypergraph::build`] but keeps duplicate edges.
    pub fn build_multi<I, E>(n: usize, edges: I) -> Result<Self, HypergraphError>
    where
        I: IntoIterator<Item = E>,
        E: IntoIterator<Item = Vertex>,
    {
        Self::build_inner(n, edges, false)
    }

    fn build_inner<I, E>(n: usize, edges: I, dedup: bool) -> Result<Self, HypergraphError>
    where
        I: IntoIterator<Item = E>,
        E: IntoIterator<Item = Vertex>,
    {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (index, e) in edges.into_iter().enumerate() {
            let mut e: Vec<Vertex> = e.into_iter().collect();
            if e.is_empty() {
                return Err(HypergraphError::EmptyEdge { index });
            }
            if let Some(&id) = e.iter().find(|&&v| v >= n) {
                return Err(HypergraphError::VertexOutOfRange { id, n });
            }
            e.sort_unstable();
            e.dedup();
            if dedup && !seen.insert(e.clone()) {
                continue;
            }
            out.push(e);
        }
        Ok(Hypergraph { n, edges: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<Vertex>] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &[Vertex] {
        &self.edges[i]
    }

    pub fn degree(&self, v: Vertex) -> Result<usize, HypergraphError> {
        if v >= self.n {
            return Err(HypergraphError::VertexOutOfRange { id: v, n: self.n });
        }
        Ok(self.edges.iter().filter(|e| e.binary_search(&v).is_ok()).count())
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            for &v in e {
                deg[v] += 1;
            }
        }
        deg
    }

    /// For each vertex, the indices of the edges containing it.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.n];
        for (i, e) in self.edges.iter().enumerate() {
            for &v in e {
                inc[v].push(i);
            }
        }
        inc
    }

    pub fn stats(&self) -> Stats {
        let deg = self.degrees();
        let total: usize = deg.iter().sum();
        let avg_degree = if self.n == 0 {
            Ratio::from_integer(0)
        } else {
            Ratio::new(total as u64, self.n as u64)
        };
        Stats {
            max_degree: deg.iter().copied().max().unwrap_or(0),
            dim: self.dim(),
            avg_degree,
        }
    }

    pub fn dim(&self) -> usize {
        self.edges.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Co-occurrence graph: `u ~ v` iff some edge holds both.
    pub fn server_graph(&self) -> Graph {
        let mut pairs = Vec::new();
        for e in &self.edges {
            for (i, &u) in e.iter().enumerate() {
                for &v in &e[i + 1..] {
                    pairs.push((u, v));
                }
            }
        }
        Graph::from_pairs_unchecked(self.n, pairs)
    }

    pub fn bipartite(&self) -> BipartiteView {
        let links = self
            .edges
            .iter()
            .enumerate()
            .flat_map(|(j, e)| e.iter().map(move |&u| (u, j)))
            .collect();
        BipartiteView { servers: self.n, clients: self.m(), links }
    }

    pub fn induced<I>(&self, keep: I) -> Result<SubHypergraphView<'_>, HypergraphError>
    where
        I: IntoIterator<Item = Vertex>,
    {
        let mut kept = vec![false; self.n];
        for v in keep {
            if v >= self.n {
                return Err(HypergraphError::VertexOutOfRange { id: v, n: self.n });
            }
            kept[v] = true;
        }
        Ok(SubHypergraphView::from_mask(self, kept))
    }

    /// Parses the text format: a header `n m`, then `m` lines `k v1 .. vk`
    /// with 1-based ids. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, HypergraphError> {
        let mut lines = content_lines(text);
        let (hline, header) = lines.next().ok_or(HypergraphError::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let (n, m) = parse_header(hline, &header)?;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let (line, toks) = lines.next().ok_or(HypergraphError::Parse {
                line: hline,
                message: format!("expected {m} edge lines"),
            })?;
            let nums = parse_nums(line, &toks)?;
            let (&k, ids) = nums.split_first().ok_or(HypergraphError::Parse {
                line,
                message: "empty edge line".into(),
            })?;
            if ids.len() != k {
                return Err(HypergraphError::Parse {
                    line,
                    message: format!("edge length {k} but {} ids given", ids.len()),
                });
            }
            edges.push(one_based(line, ids, n)?);
        }
        if let Some((line, _)) = lines.next() {
            return Err(HypergraphError::Parse { line, message: "trailing content".into() });
        }
        Self::build(n, edges)
    }

    pub fn serialize(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.m());
        for e in &self.edges {
            let _ = write!(s, "{}", e.len());
            for &v in e {
                let _ = write!(s, " {}", v + 1);
            }
            s.push('\n');
        }
        s
    }
}

/// Edges of `base` whose vertices all lie in `kept`.
#[derive(Debug, Clone)]
pub struct SubHypergraphView<'a> {
    pub base: &'a Hypergraph,
    pub kept: Vec<bool>,
    pub kept_edges: Vec<usize>,
}

impl<'a> SubHypergraphView<'a> {
    pub fn from_mask(base: &'a Hypergraph, kept: Vec<bool>) -> Self {
        let kept_edges = base
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.iter().all(|&v| kept[v]))
            .map(|(i, _)| i)
            .collect();
        SubHypergraphView { base, kept, kept_edges }
    }

    pub fn full(base: &'a Hypergraph) -> Self {
        Self::from_mask(base, vec![true; base.n])
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.kept.iter().enumerate().filter(|(_, &k)| k).map(|(v, _)| v)
    }

    pub fn edges(&self) -> impl Iterator<Item = &[Vertex]> + '_ {
        self.kept_edges.iter().map(|&i| self.base.edge(i))
    }

    /// The view as a hypergraph on the same id space.
    pub fn to_hypergraph(&self) -> Hypergraph {
        Hypergraph {
            n: self.base.n,
            edges: self.edges().map(<[Vertex]>::to_vec).collect(),
        }
    }
}

/// Server-client realization: one server per vertex, one client per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteView {
    pub servers: usize,
    pub clients: usize,
    pub links: Vec<(Vertex, usize)>,
}

pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let toks: Vec<&str> = l.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

pub(crate) fn parse_nums(line: usize, toks: &[&str]) -> Result<Vec<usize>, HypergraphError> {
    toks.iter()
        .map(|t| {
            t.parse::<usize>().map_err(|_| HypergraphError::Parse {
                line,
                message: format!("not a non-negative integer: {t:?}"),
            })
        })
        .collect()
}

pub(crate) fn parse_header(line: usize, toks: &[&str]) -> Result<(usize, usize), HypergraphError> {
    match parse_nums(line, toks)?.as_slice() {
        &[n, m] => Ok((n, m)),
        _ => Err(HypergraphError::Parse { line, message: "header must be `n m`".into() }),
    }
}

pub(crate) fn one_based(line: usize, ids: &[usize], n: usize) -> Result<Vec<Vertex>, HypergraphError> {
    ids.iter()
        .map(|&id| {
            if id == 0 || id > n {
                Err(HypergraphError::Parse {
                    line,
                    message: format!("vertex id {id} out of range 1..={n}"),
                })
            } else {
                Ok(id - 1)
            }
        })
        .collect()
}
