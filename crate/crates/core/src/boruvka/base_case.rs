//! Replicated base case: once few enough vertices remain, every PE holds
//! the full (dense-remapped) vertex set; per-round minimum edges come from
//! one vector allreduce and contraction proceeds identically everywhere
//! without further communication. Shared vertices participate here.

use std::collections::HashMap;

use crate::error::Error;
use crate::graph::{DistributedGraph, EdgeId, VertexId, Weight};
use crate::transport::Communicator;
use crate::Result;

/// Per-slot candidate for the vector allreduce: (weight, id, other dense
/// endpoint). The sentinel compares greater than every real edge.
type Slot = (Weight, EdgeId, u64);
const EMPTY: Slot = (Weight::MAX, EdgeId::MAX, u64::MAX);

pub struct BaseCaseOutcome {
    /// Chosen MSF ids; recorded on rank 0 only since every PE computes the
    /// same replicated result.
    pub mst_ids: Vec<EdgeId>,
    /// Final component root per base-case vertex, in original labels;
    /// replicated on every rank.
    pub roots: HashMap<VertexId, VertexId>,
    pub rounds: u64,
}

pub fn base_case(
    graph: &DistributedGraph,
    threshold: u64,
    comm: &Communicator,
) -> Result<BaseCaseOutcome> {
    // Dense remap, replicated via allgather. Owned sources are already
    // globally sorted, so the dense id is the position in the gathered list.
    let mut owned: Vec<VertexId> = graph.src_runs().map(|(v, _)| v).collect();
    if graph.shares_with_prev() {
        owned.remove(0);
    }
    let labels = comm.allgatherv(owned)?;
    let n = labels.len();
    if n as u64 > threshold {
        return Err(Error::VertexCountOverThreshold {
            count: n as u64,
            threshold,
        });
    }
    debug_assert!(labels.windows(2).all(|w| w[0] < w[1]));
    let dense = |v: VertexId| -> usize {
        labels
            .binary_search(&v)
            .expect("edge endpoint is a graph vertex")
    };

    // Local edges in dense space.
    let mut work: Vec<(usize, usize, Weight, EdgeId)> = graph
        .local_edges
        .iter()
        .map(|e| (dense(e.src), dense(e.dst), e.weight, e.id))
        .collect();

    let mut root: Vec<usize> = (0..n).collect();
    let mut mst_ids = Vec::new();
    let mut rounds = 0u64;
    loop {
        let mut slots = vec![EMPTY; n];
        for &(a, b, w, id) in &work {
            let cand = (w, id, b as u64);
            if cand < slots[a] {
                slots[a] = cand;
            }
        }
        let slots = comm.allreduce_vec(slots, |x, y| *x.min(y))?;
        if slots.iter().all(|s| *s == EMPTY) {
            break;
        }
        rounds += 1;

        // Replicated contraction: identical on every PE.
        let candidate = |s: usize| (slots[s] != EMPTY).then_some(slots[s]);
        let mut parent: Vec<usize> = (0..n).collect();
        for s in 0..n {
            if let Some((_, _, other)) = candidate(s) {
                parent[s] = other as usize;
            }
        }
        for s in 0..n {
            let Some((_, id, other)) = candidate(s) else {
                continue;
            };
            let v = other as usize;
            let two_cycle = candidate(v).is_some_and(|(_, vid, vo)| vid == id && vo as usize == s);
            if two_cycle && s < v {
                parent[s] = s;
            }
            if comm.rank() == 0 && !(two_cycle && s < v) {
                mst_ids.push(id);
            }
        }
        // Collapse to roots; parents now form rooted trees.
        let resolve = |parent: &[usize], mut x: usize| {
            while parent[x] != x {
                let p = parent[x];
                x = if parent[p] == p { p } else { parent[p] };
            }
            x
        };
        let new_root: Vec<usize> = (0..n).map(|s| resolve(&parent, s)).collect();
        for r in root.iter_mut() {
            *r = new_root[*r];
        }
        work = work
            .into_iter()
            .filter_map(|(a, b, w, id)| {
                let (ra, rb) = (new_root[a], new_root[b]);
                (ra != rb).then_some((ra, rb, w, id))
            })
            .collect();
    }

    mst_ids.sort_unstable();
    let roots = labels
        .iter()
        .enumerate()
        .map(|(v, &label)| (label, labels[root[v]]))
        .collect();
    Ok(BaseCaseOutcome {
        mst_ids,
        roots,
        rounds,
    })
}
