//! Label exchange and relabeling between contraction and redistribution.

use std::collections::{HashMap, HashSet};

use crate::comm::{smart_alltoall, AlltoallPolicy};
use crate::error::Error;
use crate::graph::{DistributedGraph, VertexId, WeightedEdge};
use crate::transport::Communicator;
use crate::Result;

/// Delivers the new label of every remote-relevant source vertex: for each
/// edge `(u, v)` whose back edge `(v, u)` lives on another PE, `u`'s label
/// is sent there, deduplicated per `(destination, u)`. The result maps each
/// ghost vertex of this PE to its component root.
pub fn exchange_labels(
    labels: &HashMap<VertexId, VertexId>,
    graph: &DistributedGraph,
    policy: AlltoallPolicy,
    comm: &Communicator,
) -> Result<HashMap<VertexId, VertexId>> {
    let mut outgoing: Vec<Vec<(VertexId, VertexId)>> = vec![Vec::new(); comm.size()];
    let mut sent: HashSet<(usize, VertexId)> = HashSet::new();
    for e in &graph.local_edges {
        let dest = graph.home_of_edge(e.dst, e.src, e.weight);
        if dest != comm.rank() && sent.insert((dest, e.src)) {
            let label = labels
                .get(&e.src)
                .ok_or(Error::UnlabeledVertex(e.src))?;
            outgoing[dest].push((e.src, *label));
        }
    }
    let received = smart_alltoall(outgoing, policy, comm)?;
    let ghosts: HashMap<VertexId, VertexId> = received.into_iter().flatten().collect();

    // Every cut edge's remote endpoint must have been covered.
    for e in &graph.local_edges {
        if !labels.contains_key(&e.dst) && !ghosts.contains_key(&e.dst) {
            return Err(Error::MissingGhostLabel(e.dst));
        }
    }
    Ok(ghosts)
}

/// Rewrites both endpoints to their component roots and drops edges that
/// became self-loops.
pub fn relabel(
    labels: &HashMap<VertexId, VertexId>,
    ghosts: &HashMap<VertexId, VertexId>,
    edges: &[WeightedEdge],
) -> Result<Vec<WeightedEdge>> {
    let mut out = Vec::with_capacity(edges.len());
    for e in edges {
        let src = *labels.get(&e.src).ok_or(Error::UnlabeledVertex(e.src))?;
        let dst = *labels
            .get(&e.dst)
            .or_else(|| ghosts.get(&e.dst))
            .ok_or(Error::UnlabeledVertex(e.dst))?;
        if src != dst {
            out.push(WeightedEdge::new(src, dst, e.weight, e.id));
        }
    }
    Ok(out)
}
