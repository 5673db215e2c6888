//! Vertices, edges, the 1D-partitioned distributed graph and edge-list IO.

pub mod codec;
pub mod dist;
pub mod edge;
pub mod io;

pub use dist::{build_distributed_graph, DistributedGraph, VertexClass};
pub use edge::{sort_lexicographic, EdgeId, TotalOrderKey, VertexId, Weight, WeightedEdge};
