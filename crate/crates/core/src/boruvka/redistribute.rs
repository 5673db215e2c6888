//! Rebuilding the distributed graph after a round, and routing the final
//! MSF ids back to their original home PEs.

use std::collections::HashMap;

use crate::comm::{distributed_sort, global_dedup_by_key, smart_alltoall, AlltoallPolicy};
use crate::error::Error;
use crate::graph::codec::{decode_edges, encode_edges};
use crate::graph::{build_distributed_graph, DistributedGraph, EdgeId, WeightedEdge};
use crate::transport::Communicator;
use crate::Result;

/// Sorts the relabeled edges globally, collapses parallel edges onto the
/// lightest (then lowest-id) one, and reestablishes the boundary arrays.
pub fn redistribute(
    edges: Vec<WeightedEdge>,
    comm: &Communicator,
) -> Result<DistributedGraph> {
    let sorted = distributed_sort(edges, |e| (e.src, e.dst, e.weight, e.id), comm)?;
    let deduped = global_dedup_by_key(sorted, |e| (e.src, e.dst), comm)?;
    build_distributed_graph(deduped, comm)
}

/// Compressed snapshot of the original input slice plus the replicated id
/// ranges, kept so MSF edges can be materialized at their home PEs after
/// the computation.
#[derive(Debug, Clone)]
pub struct EdgeIndex {
    compressed: Vec<u8>,
    /// `id_offsets[i]..id_offsets[i+1]` are the ids whose forward copy lives
    /// in rank i's original slice.
    id_offsets: Vec<u64>,
}

/// One materialized MSF edge in original input terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MsfEdge {
    pub id: EdgeId,
    pub src: u64,
    pub dst: u64,
    pub weight: u32,
}

impl EdgeIndex {
    /// Ids are assigned as the global rank of the undirected edge in the
    /// initial sorted order, so each slice's forward edges carry one
    /// contiguous id range; one allgather replicates the range starts.
    pub fn build(graph: &DistributedGraph, comm: &Communicator) -> Result<EdgeIndex> {
        let forward = graph.local_edges.iter().filter(|e| e.src < e.dst);
        let count = forward.clone().count() as u64;
        #[cfg(debug_assertions)]
        {
            let mut prev = None;
            for e in forward.clone() {
                debug_assert!(prev.map_or(true, |p| e.id == p + 1), "ids not contiguous");
                prev = Some(e.id);
            }
        }
        let counts = comm.allgather(count)?;
        let mut id_offsets = Vec::with_capacity(counts.len() + 1);
        let mut acc = 0;
        id_offsets.push(0);
        for c in counts {
            acc += c;
            id_offsets.push(acc);
        }
        Ok(EdgeIndex {
            compressed: encode_edges(&graph.local_edges)?,
            id_offsets,
        })
    }

    pub fn home_of_id(&self, id: EdgeId) -> usize {
        self.id_offsets.partition_point(|&off| off <= id) - 1
    }

    pub fn total_edges(&self) -> u64 {
        *self.id_offsets.last().unwrap_or(&0)
    }
}

/// Routes each found MSF id to the rank whose original slice holds the
/// forward copy; that rank decodes its compressed snapshot once and
/// materializes `(id, u, v, w)`.
pub fn redistribute_mst(
    mst_ids: Vec<EdgeId>,
    index: &EdgeIndex,
    policy: AlltoallPolicy,
    comm: &Communicator,
) -> Result<Vec<MsfEdge>> {
    let mut outgoing: Vec<Vec<EdgeId>> = vec![Vec::new(); comm.size()];
    for id in mst_ids {
        if id >= index.total_edges() {
            return Err(Error::UnknownEdgeId(id));
        }
        outgoing[index.home_of_id(id)].push(id);
    }
    let received = smart_alltoall(outgoing, policy, comm)?;

    let decoded = decode_edges(&index.compressed)?;
    let by_id: HashMap<EdgeId, &WeightedEdge> = decoded
        .iter()
        .filter(|e| e.src < e.dst)
        .map(|e| (e.id, e))
        .collect();
    let mut out = Vec::new();
    for id in received.into_iter().flatten() {
        let e = by_id.get(&id).ok_or(Error::UnknownEdgeId(id))?;
        out.push(MsfEdge {
            id,
            src: e.src,
            dst: e.dst,
            weight: e.weight,
        });
    }
    out.sort_unstable_by_key(|e| e.id);
    debug_assert!(
        out.windows(2).all(|w| w[0].id != w[1].id),
        "duplicate MSF id delivered"
    );
    Ok(out)
}
