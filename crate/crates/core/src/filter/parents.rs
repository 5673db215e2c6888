//! Distributed component-representative array.
//!
//! `P` has one slot per vertex label of the preprocessed input; PE `i` owns
//! the index block `[i*n/p, (i+1)*n/p)`. Contraction rounds append parent
//! links, so slots form downward chains that pointer doubling compresses to
//! roots.

use std::collections::{HashMap, HashSet};

use crate::comm::{smart_alltoall, AlltoallPolicy};
use crate::error::Error;
use crate::graph::VertexId;
use crate::transport::Communicator;
use crate::Result;

#[derive(Debug, Clone)]
pub struct DistributedParentArray {
    /// Global slot count; slot of vertex `v` is `v - 1`.
    n: u64,
    p: u64,
    rank: usize,
    block_start: u64,
    /// Owned block, initially the identity.
    local: Vec<VertexId>,
}

fn block_bounds(n: u64, p: u64, rank: u64) -> (u64, u64) {
    (n * rank / p, n * (rank + 1) / p)
}

impl DistributedParentArray {
    pub fn new_identity(n: u64, comm: &Communicator) -> Self {
        let p = comm.size() as u64;
        let rank = comm.rank() as u64;
        let (start, end) = block_bounds(n, p, rank);
        DistributedParentArray {
            n,
            p,
            rank: comm.rank(),
            block_start: start,
            local: (start..end).map(|idx| idx + 1).collect(),
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Rank whose block holds `index`.
    pub fn owner_of_index(&self, index: u64) -> usize {
        debug_assert!(index < self.n);
        // Guess from the inverse of the block formula, then adjust.
        let mut r = (index * self.p / self.n.max(1)).min(self.p - 1);
        loop {
            let (start, end) = block_bounds(self.n, self.p, r);
            if index < start {
                r -= 1;
            } else if index >= end {
                r += 1;
            } else {
                return r as usize;
            }
        }
    }

    fn check_vertex(&self, v: VertexId) -> Result<u64> {
        if v == 0 || v > self.n {
            return Err(Error::IndexOutOfRange {
                index: v,
                n: self.n,
            });
        }
        Ok(v - 1)
    }

    pub fn local_get(&self, v: VertexId) -> Result<VertexId> {
        let idx = self.check_vertex(v)?;
        Ok(self.local[(idx - self.block_start) as usize])
    }

    fn local_set(&mut self, v: VertexId, parent: VertexId) {
        let idx = v - 1 - self.block_start;
        self.local[idx as usize] = parent;
    }

    /// Collective: routes `(vertex, parent)` pairs to their block owners.
    /// Every rank must participate, with an empty set where nothing changed.
    pub fn write_parents(
        &mut self,
        pairs: Vec<(VertexId, VertexId)>,
        policy: AlltoallPolicy,
        comm: &Communicator,
    ) -> Result<()> {
        let mut outgoing: Vec<Vec<(VertexId, VertexId)>> = vec![Vec::new(); comm.size()];
        for (v, parent) in pairs {
            let idx = self.check_vertex(v)?;
            outgoing[self.owner_of_index(idx)].push((v, parent));
        }
        let received = smart_alltoall(outgoing, policy, comm)?;
        for (v, parent) in received.into_iter().flatten() {
            self.local_set(v, parent);
        }
        Ok(())
    }

    /// Writes the entries this rank owns out of a replicated map; no
    /// communication.
    pub fn write_owned(
        &mut self,
        entries: impl Iterator<Item = (VertexId, VertexId)>,
    ) -> Result<()> {
        for (v, parent) in entries {
            let idx = self.check_vertex(v)?;
            if self.owner_of_index(idx) == self.rank {
                self.local_set(v, parent);
            }
        }
        Ok(())
    }

    /// Collective: resolves `vertices` through `P`, one batched request per
    /// owner with duplicates removed. Entries must be roots (run
    /// [`compress`](Self::compress) first when in doubt).
    pub fn request_labels(
        &self,
        vertices: &[VertexId],
        policy: AlltoallPolicy,
        comm: &Communicator,
    ) -> Result<HashMap<VertexId, VertexId>> {
        let mut wanted: Vec<VertexId> = vertices.to_vec();
        wanted.sort_unstable();
        wanted.dedup();
        let mut local_answers = HashMap::new();
        let mut outgoing: Vec<Vec<VertexId>> = vec![Vec::new(); comm.size()];
        for v in wanted {
            let idx = self.check_vertex(v)?;
            let owner = self.owner_of_index(idx);
            if owner == self.rank {
                local_answers.insert(v, self.local_get(v)?);
            } else {
                outgoing[owner].push(v);
            }
        }
        let requests = smart_alltoall(outgoing, policy, comm)?;
        let mut replies: Vec<Vec<(VertexId, VertexId)>> = vec![Vec::new(); comm.size()];
        for (sender, vs) in requests.into_iter().enumerate() {
            for v in vs {
                replies[sender].push((v, self.local_get(v)?));
            }
        }
        let answered = smart_alltoall(replies, policy, comm)?;
        local_answers.extend(answered.into_iter().flatten());
        Ok(local_answers)
    }

    /// Collective pointer doubling over the whole array until every entry is
    /// a root. Needs about `log2(depth)` iterations; a corrupted (cyclic)
    /// array is reported instead of looping.
    pub fn compress(&mut self, policy: AlltoallPolicy, comm: &Communicator) -> Result<u64> {
        let limit = 64 - self.n.leading_zeros() as u64 + 2;
        let mut iterations = 0;
        loop {
            // Parents of all distinct non-root targets.
            let targets: Vec<VertexId> = {
                let mut t: Vec<VertexId> = self
                    .local
                    .iter()
                    .enumerate()
                    .filter(|&(i, &parent)| parent != self.block_start + i as u64 + 1)
                    .map(|(_, &parent)| parent)
                    .collect();
                t.sort_unstable();
                t.dedup();
                t
            };
            let grandparents = self.request_labels(&targets, policy, comm)?;
            let mut changed = false;
            for (i, slot) in self.local.iter_mut().enumerate() {
                let own = self.block_start + i as u64 + 1;
                if *slot != own {
                    let gp = grandparents[slot];
                    if gp != *slot {
                        *slot = gp;
                        changed = true;
                    }
                }
            }
            if !comm.allreduce_or(changed)? {
                return Ok(iterations);
            }
            iterations += 1;
            if iterations > limit {
                return Err(Error::CycleDetected);
            }
        }
    }
}
