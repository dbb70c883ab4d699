//! Simple undirected graphs (2-dimensional hypergraphs).

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::hypergraph::{content_lines, one_based, parse_header, parse_nums, Hypergraph, HypergraphError};

/// Undirected simple graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n] }
    }

    /// Builds from an edge list; rejects out-of-range ids and self-loops,
    /// collapses repeated pairs.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, HypergraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let edges: Vec<(usize, usize)> = edges.into_iter().collect();
        for &(u, v) in &edges {
            for id in [u, v] {
                if id >= n {
                    return Err(HypergraphError::VertexOutOfRange { id, n });
                }
            }
            if u == v {
                return Err(HypergraphError::Parse {
                    line: 0,
                    message: format!("self-loop at vertex {u}"),
                });
            }
        }
        Ok(Self::from_pairs_unchecked(n, edges))
    }

    pub(crate) fn from_pairs_unchecked(n: usize, pairs: Vec<(usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in pairs {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        Graph { adj }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, a) in self.adj.iter().enumerate() {
            out.extend(a.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Hop distances from `src`; `None` for unreachable vertices.
    pub fn bfs(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        let mut queue = VecDeque::from([src]);
        dist[src] = Some(0);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || self.bfs(0).iter().all(Option::is_some)
    }

    /// Component label per vertex: the smallest id in its component.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n()];
        for s in 0..self.n() {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = s;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &v in &self.adj[u] {
                    if label[v] == usize::MAX {
                        label[v] = s;
                        stack.push(v);
                    }
                }
            }
        }
        label
    }

    pub fn to_hypergraph(&self) -> Hypergraph {
        Hypergraph::build(self.n(), self.edges().into_iter().map(|(u, v)| [u, v]))
            .expect("graph edges are valid")
    }

    /// Parses `n m` followed by `m` lines `u v` (1-based).
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
            if nums.len() != 2 {
                return Err(HypergraphError::Parse { line, message: "edge line must be `u v`".into() });
            }
            let ids = one_based(line, &nums, n)?;
            if ids[0] == ids[1] {
                return Err(HypergraphError::Parse { line, message: "self-loop".into() });
            }
            edges.push((ids[0], ids[1]));
        }
        if let Some((line, _)) = lines.next() {
            return Err(HypergraphError::Parse { line, message: "trailing content".into() });
        }
        Ok(Self::from_pairs_unchecked(n, edges))
    }

    pub fn serialize(&self) -> String {
        let edges = self.edges();
        let mut s = format!("{} {}\n", self.n(), edges.len());
        for (u, v) in edges {
            let _ = writeln!(s, "{} {}", u + 1, v + 1);
        }
        s
    }

    pub fn path(n: usize) -> Self {
        Self::from_pairs_unchecked(n, (1..n).map(|i| (i - 1, i)).collect())
    }

    pub fn cycle(n: usize) -> Self {
        Self::from_pairs_unchecked(n, (0..n).map(|i| (i, (i + 1) % n)).filter(|(u, v)| u != v).collect())
    }

    pub fn star(n: usize) -> Self {
        Self::from_pairs_unchecked(n, (1..n).map(|i| (0, i)).collect())
    }

    pub fn complete(n: usize) -> Self {
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                pairs.push((u, v));
            }
        }
        Self::from_pairs_unchecked(n, pairs)
    }
}

/// Parses a line of 1-based vertex ids.
pub fn parse_id_list(text: &str, n: usize) -> Result<Vec<usize>, HypergraphError> {
    let mut out = Vec::new();
    for (line, toks) in content_lines(text) {
        out.extend(one_based(line, &parse_nums(line, &toks)?, n)?);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_round_trip() {
        let g = Graph::parse("3 2\n1 2\n2 3\n").unwrap();
        assert_eq!(g, Graph::path(3));
        assert_eq!(Graph::parse(&g.serialize()).unwrap(), g);
        assert!(Graph::parse("2 1\n1 1\n").is_err());
        assert!(Graph::parse("2 1\n1 3\n").is_err());
        assert!(Graph::parse("2 1\n1 2 3\n").is_err());
    }

    #[test]
    fn bfs_and_components() {
        let c = Graph::cycle(4);
        let d: Vec<usize> = c.bfs(0).into_iter().map(Option::unwrap).collect();
        assert_eq!(d, vec![0, 1, 2, 1]);
        let g = Graph::from_edges(5, [(0, 1), (3, 4)]).unwrap();
        assert_eq!(g.components(), vec![0, 0, 2, 3, 3]);
        assert!(!g.is_connected());
        assert!(Graph::star(5).is_connected());
    }

    #[test]
    fn id_lists() {
        assert_eq!(parse_id_list("3 1\n# c\n2\n", 3).unwrap(), vec![0, 1, 2]);
        assert!(parse_id_list("0", 3).is_err());
    }
}
