use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::hypergraph::Hypergraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Representation {
    #[serde(rename = "sc")]
    ServerClient,
    #[serde(rename = "vc")]
    VertexCentric,
}

impl std::str::FromStr for Representation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sc" | "server-client" => Ok(Representation::ServerClient),
            "vc" | "vertex-centric" => Ok(Representation::VertexCentric),
            _ => Err(format!("unknown representation {s:?} (expected sc or vc)")),
        }
    }
}

impl std::fmt::Display for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Representation::ServerClient => "sc",
            Representation::VertexCentric => "vc",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Server,
    Client,
    Plain,
}

/// Communication network. Servers (or plain nodes) are nodes `0..n`;
/// in the server-client form the client of hyperedge `j` is node `n + j`.
#[derive(Debug, Clone)]
pub struct Topology {
    roles: Vec<Role>,
    adj: Vec<Vec<usize>>,
    vertices: usize,
    hyperedges: Vec<Vec<usize>>,
    incident: Vec<Vec<usize>>,
    repr: Option<Representation>,
}

impl Topology {
    pub fn from_hypergraph(h: &Hypergraph, repr: Representation) -> Self {
        let n = h.n();
        let (roles, adj) = match repr {
            Representation::ServerClient => {
                let mut adj = vec![Vec::new(); n + h.m()];
                for (j, e) in h.edges().iter().enumerate() {
                    for &u in e {
                        adj[u].push(n + j);
                        adj[n + j].push(u);
                    }
                }
                for a in &mut adj {
                    a.sort_unstable();
                }
                let mut roles = vec![Role::Server; n];
                roles.extend(std::iter::repeat_n(Role::Client, h.m()));
                (roles, adj)
            }
            Representation::VertexCentric => {
                let g = h.server_graph();
                let adj = (0..n).map(|v| g.neighbors(v).to_vec()).collect();
                (vec![Role::Server; n], adj)
            }
        };
        Topology {
            roles,
            adj,
            vertices: n,
            hyperedges: h.edges().to_vec(),
            incident: h.incidence(),
            repr: Some(repr),
        }
    }

    /// A standard graph; every node is a plain node.
    pub fn from_graph(g: &Graph) -> Self {
        let n = g.n();
        let edges: Vec<Vec<usize>> = g.edges().into_iter().map(|(u, v)| vec![u, v]).collect();
        let mut incident = vec![Vec::new(); n];
        for (j, e) in edges.iter().enumerate() {
            for &u in e {
                incident[u].push(j);
            }
        }
        Topology {
            roles: vec![Role::Plain; n],
            adj: (0..n).map(|v| g.neighbors(v).to_vec()).collect(),
            vertices: n,
            hyperedges: edges,
            incident,
            repr: None,
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn link_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Number of hypernodes (servers or plain nodes).
    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn hyperedge_count(&self) -> usize {
        self.hyperedges.len()
    }

    pub fn representation(&self) -> Option<Representation> {
        self.repr
    }

    pub fn role(&self, v: usize) -> Role {
        self.roles[v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_link(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Node hosting hyperedge `j` in the server-client form.
    pub fn client(&self, j: usize) -> Option<usize> {
        (self.repr == Some(Representation::ServerClient)).then_some(self.vertices + j)
    }

    /// Member list of hyperedge `j` (local knowledge of its members).
    pub fn hyperedge(&self, j: usize) -> &[usize] {
        &self.hyperedges[j]
    }

    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    /// Bits needed for one id: `ceil(log2(n + m + 2))`.
    pub fn word_bits(&self) -> u64 {
        ceil_log2((self.vertices + self.hyperedges.len() + 2) as u64)
    }

    pub fn links(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, a) in self.adj.iter().enumerate() {
            out.extend(a.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    /// Node-level graph of the topology.
    pub fn as_graph(&self) -> Graph {
        Graph::from_pairs_unchecked(self.node_count(), self.links())
    }
}

pub fn ceil_log2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> Hypergraph {
        Hypergraph::build(4, [vec![0, 1, 2], vec![1, 3], vec![2, 3]]).unwrap()
    }

    #[test]
    fn fig1_views() {
        let sc = Topology::from_hypergraph(&fig1(), Representation::ServerClient);
        assert_eq!((sc.node_count(), sc.link_count()), (7, 7));
        assert_eq!(sc.client(1), Some(5));
        assert_eq!(sc.neighbors(5), &[1, 3]);
        let vc = Topology::from_hypergraph(&fig1(), Representation::VertexCentric);
        assert_eq!((vc.node_count(), vc.link_count()), (4, 5));
        assert_eq!(vc.client(0), None);
        assert_eq!(vc.incident_edges(3), &[1, 2]);
    }

    #[test]
    fn edgeless_vertex_centric() {
        let h = Hypergraph::build(3, Vec::<Vec<usize>>::new()).unwrap();
        let t = Topology::from_hypergraph(&h, Representation::VertexCentric);
        assert_eq!((t.node_count(), t.link_count()), (3, 0));
    }

    #[test]
    fn log_helper() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(9), 4);
        assert_eq!(ceil_log2(16), 4);
    }
}
