//! Minimum-edge selection and component contraction via pointer doubling.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::comm::{smart_alltoall, AlltoallPolicy};
use crate::error::Error;
use crate::graph::{DistributedGraph, EdgeId, VertexId, WeightedEdge};
use crate::transport::Communicator;
use crate::Result;

/// Lightest incident edge of one local vertex.
#[derive(Debug, Clone, Copy)]
pub struct MinEdgeCandidate {
    pub vertex: VertexId,
    pub edge: WeightedEdge,
}

/// One segmented minimum scan over the sorted slice: the lightest incident
/// edge for every local non-shared vertex. Shared vertices emit nothing;
/// they are handled in the base case.
pub fn min_edges(graph: &DistributedGraph) -> Vec<MinEdgeCandidate> {
    let skip_first = graph.shares_with_prev();
    let skip_last = graph.shares_with_next();
    let first = graph.first_src();
    let last = graph.last_src();
    graph
        .src_runs()
        .filter(|(src, _)| {
            !(skip_first && Some(*src) == first || skip_last && Some(*src) == last)
        })
        .map(|(src, run)| MinEdgeCandidate {
            vertex: src,
            edge: *run
                .iter()
                .min_by_key(|e| e.mst_key())
                .expect("runs are nonempty"),
        })
        .collect()
}

struct Entry {
    parent: VertexId,
    done: bool,
    /// Candidate edge id; `None` for shared vertices (declared roots).
    candidate: Option<EdgeId>,
    /// The candidate turned out to be the duplicate half of a 2-cycle.
    duplicate: bool,
}

/// Converts the pseudo forest induced by the candidates into rooted stars.
/// 2-cycles are rooted at the smaller label, shared vertices are declared
/// component roots and answered without communication. Returns the local
/// label map, the edge ids entering the MSF this round, and the number of
/// doubling iterations.
pub fn contract_components(
    candidates: &[MinEdgeCandidate],
    graph: &DistributedGraph,
    policy: AlltoallPolicy,
    comm: &Communicator,
) -> Result<(HashMap<VertexId, VertexId>, Vec<EdgeId>, u64)> {
    let mut entries: BTreeMap<VertexId, Entry> = BTreeMap::new();
    for (src, _) in graph.src_runs() {
        // Shared vertices are roots; candidates overwrite the rest below.
        entries.insert(
            src,
            Entry {
                parent: src,
                done: true,
                candidate: None,
                duplicate: false,
            },
        );
    }
    for c in candidates {
        entries.insert(
            c.vertex,
            Entry {
                parent: c.edge.dst,
                done: false,
                candidate: Some(c.edge.id),
                duplicate: false,
            },
        );
    }

    let mut iterations = 0u64;
    let mut first_pass = true;
    loop {
        iterations += 1;
        if iterations > 80 {
            return Err(Error::DeadlockDetected(
                "pointer doubling failed to converge".into(),
            ));
        }
        // Askers this round, in deterministic order.
        let pending: Vec<VertexId> = entries
            .iter()
            .filter(|(_, e)| !e.done)
            .map(|(&u, _)| u)
            .collect();

        // Resolve locally what we can; batch the rest per owner.
        let mut remote: Vec<Vec<VertexId>> = vec![Vec::new(); comm.size()];
        let mut asked: HashSet<(usize, VertexId)> = HashSet::new();
        let mut answers: HashMap<VertexId, VertexId> = HashMap::new();
        for &u in &pending {
            let v = entries[&u].parent;
            if let Some(target) = entries.get(&v) {
                answers.insert(v, target.parent);
            } else if graph.is_shared_anywhere(v) {
                // Known root, no request needed.
            } else {
                let owner = graph.vertex_owner(v);
                if asked.insert((owner, v)) {
                    remote[owner].push(v);
                }
            }
        }
        let requests = smart_alltoall(remote, policy, comm)?;
        let mut replies: Vec<Vec<(VertexId, VertexId)>> = vec![Vec::new(); comm.size()];
        for (sender, vs) in requests.into_iter().enumerate() {
            for v in vs {
                let entry = entries.get(&v).ok_or(Error::UnlabeledVertex(v))?;
                replies[sender].push((v, entry.parent));
            }
        }
        let answered = smart_alltoall(replies, policy, comm)?;
        answers.extend(answered.into_iter().flatten());

        for &u in &pending {
            let v = entries[&u].parent;
            match answers.get(&v) {
                None => {
                    // Shared target: v is a component root.
                    entries.get_mut(&u).unwrap().done = true;
                }
                Some(&pv) => {
                    if first_pass && pv == u {
                        // 2-cycle; root at the smaller label, and exactly one
                        // of the two mutual candidates enters the MSF.
                        let root = u.min(v);
                        let e = entries.get_mut(&u).unwrap();
                        e.parent = root;
                        e.done = true;
                        e.duplicate = u == root;
                    } else {
                        let done = pv == v || graph.is_shared_anywhere(pv);
                        let e = entries.get_mut(&u).unwrap();
                        e.parent = pv;
                        e.done = done;
                    }
                }
            }
        }
        first_pass = false;
        let any_pending = entries.values().any(|e| !e.done);
        if !comm.allreduce_or(any_pending)? {
            break;
        }
    }

    let mut mst_ids: Vec<EdgeId> = entries
        .values()
        .filter(|e| !e.duplicate)
        .filter_map(|e| e.candidate)
        .collect();
    mst_ids.sort_unstable();
    let labels = entries.iter().map(|(&u, e)| (u, e.parent)).collect();
    Ok((labels, mst_ids, iterations))
}
