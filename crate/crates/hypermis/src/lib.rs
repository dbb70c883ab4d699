//! Distributed symmetry breaking on hypergraphs.
//!
//! The crate bundles a synchronous message-passing simulator
//! ([`netsim`]) with hypergraph maximal-independent-set algorithms
//! ([`mis`]), their graph applications ([`apps`]), coloring, matching
//! and clique routines ([`extras`]), exhaustive checkers ([`oracles`]) and
//! the instance generators and experiment runner behind the CLI
//! ([`bench`]).

pub mod apps;
pub mod bench;
pub mod decomposition;
pub mod extras;
pub mod graph;
pub mod hypergraph;
pub mod mis;
pub mod netsim;
pub mod oracles;

pub use graph::Graph;
pub use hypergraph::{Hypergraph, HypergraphError, Vertex};
