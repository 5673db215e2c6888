//! 1D-partitioned distributed graph state.
//!
//! The global edge sequence is lexicographically sorted and split into `p`
//! contiguous slices. Each PE replicates two boundary arrays holding every
//! PE's first and last edge (sentinel for empty slices); they localize the
//! home PE of an edge or vertex by binary search and classify shared
//! vertices without communication.

use crate::error::Error;
use crate::transport::Communicator;
use crate::Result;

use super::edge::{VertexId, Weight, WeightedEdge};

/// Role of a vertex from one PE's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexClass {
    /// All of the vertex's edges live here.
    Local,
    /// Appears only as the destination of a cut edge.
    Ghost,
    /// Edge run continues on an earlier PE.
    SharedWithPrev,
    /// Edge run continues on a later PE.
    SharedWithNext,
    SharedBoth,
}

#[derive(Debug, Clone)]
pub struct DistributedGraph {
    rank: usize,
    pub local_edges: Vec<WeightedEdge>,
    /// Replicated: first edge of each PE's slice, sentinel when empty.
    pub lexmin: Vec<WeightedEdge>,
    /// Replicated: last edge of each PE's slice, sentinel when empty.
    pub lexmax: Vec<WeightedEdge>,
    /// Ranks with nonempty slices, ascending.
    nonempty: Vec<usize>,
}

/// Assembles the replicated boundary arrays with one allgather. Global
/// sortedness is the caller's responsibility; debug builds verify it via
/// boundary comparison between rank-adjacent slices.
pub fn build_distributed_graph(
    local_sorted_edges: Vec<WeightedEdge>,
    comm: &Communicator,
) -> Result<DistributedGraph> {
    for (index, pair) in local_sorted_edges.windows(2).enumerate() {
        if pair[0].lex_key() > pair[1].lex_key() {
            return Err(Error::LocalOrderViolation { index });
        }
    }
    let first = local_sorted_edges
        .first()
        .copied()
        .unwrap_or(WeightedEdge::SENTINEL);
    let last = local_sorted_edges
        .last()
        .copied()
        .unwrap_or(WeightedEdge::SENTINEL);
    let boundaries = comm.allgather((first, last))?;
    let lexmin: Vec<WeightedEdge> = boundaries.iter().map(|b| b.0).collect();
    let lexmax: Vec<WeightedEdge> = boundaries.iter().map(|b| b.1).collect();

    #[cfg(debug_assertions)]
    {
        let nonempty: Vec<usize> = (0..lexmin.len())
            .filter(|&i| !lexmin[i].is_sentinel())
            .collect();
        for w in nonempty.windows(2) {
            if lexmax[w[0]].lex_key() > lexmin[w[1]].lex_key() {
                return Err(Error::GlobalOrderViolation {
                    left: w[0],
                    right: w[1],
                });
            }
        }
    }

    Ok(DistributedGraph::from_parts(
        comm.rank(),
        local_sorted_edges,
        lexmin,
        lexmax,
    ))
}

impl DistributedGraph {
    pub(crate) fn from_parts(
        rank: usize,
        local_edges: Vec<WeightedEdge>,
        lexmin: Vec<WeightedEdge>,
        lexmax: Vec<WeightedEdge>,
    ) -> Self {
        let nonempty = (0..lexmin.len())
            .filter(|&i| !lexmin[i].is_sentinel())
            .collect();
        DistributedGraph {
            rank,
            local_edges,
            lexmin,
            lexmax,
            nonempty,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn num_ranks(&self) -> usize {
        self.lexmin.len()
    }

    pub fn is_empty_rank(&self) -> bool {
        self.local_edges.is_empty()
    }

    fn home_of_key(&self, key: (VertexId, VertexId, Weight)) -> usize {
        debug_assert!(!self.nonempty.is_empty(), "graph has at least one edge");
        // Largest nonempty rank whose first edge is <= key.
        let idx = self
            .nonempty
            .partition_point(|&r| self.lexmin[r].lex_key() <= key);
        self.nonempty[idx.saturating_sub(1)]
    }

    /// Home PE of an edge known by its full key; for an edge actually present
    /// in the graph this is the rank whose slice contains it.
    pub fn home_of_edge(&self, src: VertexId, dst: VertexId, weight: Weight) -> usize {
        self.home_of_key((src, dst, weight))
    }

    /// First PE holding edges with source `v`, queried as `(v, 0)`.
    pub fn home_of_vertex_first(&self, v: VertexId) -> usize {
        self.home_of_key((v, 0, 0))
    }

    /// Unique rank holding all of `v`'s edges, valid for non-shared `v`.
    pub fn vertex_owner(&self, v: VertexId) -> usize {
        self.home_of_key((v, VertexId::MAX, Weight::MAX))
    }

    /// Whether `v`'s edge run straddles any slice boundary. Determined from
    /// the replicated boundary arrays alone, on any rank.
    pub fn is_shared_anywhere(&self, v: VertexId) -> bool {
        self.nonempty.windows(2).any(|w| {
            self.lexmax[w[0]].src == v && self.lexmin[w[1]].src == v
        })
    }

    pub fn first_src(&self) -> Option<VertexId> {
        self.local_edges.first().map(|e| e.src)
    }

    pub fn last_src(&self) -> Option<VertexId> {
        self.local_edges.last().map(|e| e.src)
    }

    /// My first source vertex also lives on an earlier PE.
    pub fn shares_with_prev(&self) -> bool {
        match self.first_src() {
            Some(v) => self
                .prev_nonempty()
                .is_some_and(|q| self.lexmax[q].src == v),
            None => false,
        }
    }

    /// My last source vertex also lives on a later PE.
    pub fn shares_with_next(&self) -> bool {
        match self.last_src() {
            Some(v) => self
                .next_nonempty()
                .is_some_and(|s| self.lexmin[s].src == v),
            None => false,
        }
    }

    pub fn prev_nonempty(&self) -> Option<usize> {
        self.nonempty.iter().rev().find(|&&r| r < self.rank).copied()
    }

    pub fn next_nonempty(&self) -> Option<usize> {
        self.nonempty.iter().find(|&&r| r > self.rank).copied()
    }

    fn occurs_as_src(&self, v: VertexId) -> bool {
        let i = self.local_edges.partition_point(|e| e.src < v);
        i < self.local_edges.len() && self.local_edges[i].src == v
    }

    /// Classifies `v` from this PE's point of view using only the replicated
    /// boundary arrays and local data; never communicates.
    pub fn classify_vertex(&self, v: VertexId) -> Result<VertexClass> {
        if self.occurs_as_src(v) {
            let prev = self.first_src() == Some(v) && self.shares_with_prev();
            let next = self.last_src() == Some(v) && self.shares_with_next();
            Ok(match (prev, next) {
                (true, true) => VertexClass::SharedBoth,
                (true, false) => VertexClass::SharedWithPrev,
                (false, true) => VertexClass::SharedWithNext,
                (false, false) => VertexClass::Local,
            })
        } else if self.local_edges.iter().any(|e| e.dst == v) {
            Ok(VertexClass::Ghost)
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    /// Iterates maximal runs of equal source vertex as `(src, range)`.
    pub fn src_runs(&self) -> SrcRuns<'_> {
        SrcRuns {
            edges: &self.local_edges,
            pos: 0,
        }
    }

    pub fn distinct_src_count(&self) -> u64 {
        self.src_runs().count() as u64
    }

    /// Local vertices counted once globally: a run shared with the previous
    /// PE is counted there.
    pub fn owned_vertex_count(&self) -> u64 {
        let d = self.distinct_src_count();
        if self.shares_with_prev() {
            d - 1
        } else {
            d
        }
    }

    /// Local vertices whose whole edge run lives here.
    pub fn nonshared_vertex_count(&self) -> u64 {
        let d = self.distinct_src_count();
        if d == 0 {
            return 0;
        }
        let first_shared = self.shares_with_prev();
        let last_shared = self.shares_with_next();
        if self.first_src() == self.last_src() {
            // Single distinct source.
            d - u64::from(first_shared || last_shared)
        } else {
            d - u64::from(first_shared) - u64::from(last_shared)
        }
    }

    pub fn global_vertex_count(&self, comm: &Communicator) -> Result<u64> {
        comm.allreduce_sum(self.owned_vertex_count())
    }

    pub fn global_nonshared_count(&self, comm: &Communicator) -> Result<u64> {
        comm.allreduce_sum(self.nonshared_vertex_count())
    }

    pub fn global_edge_count(&self, comm: &Communicator) -> Result<u64> {
        comm.allreduce_sum(self.local_edges.len() as u64)
    }
}

pub struct SrcRuns<'a> {
    edges: &'a [WeightedEdge],
    pos: usize,
}

impl<'a> Iterator for SrcRuns<'a> {
    type Item = (VertexId, &'a [WeightedEdge]);

    fn next(&mut self) -> Option<Self::Item> {
        if self.pos >= self.edges.len() {
            return None;
        }
        let start = self.pos;
        let src = self.edges[start].src;
        let mut end = start + 1;
        while end < self.edges.len() && self.edges[end].src == src {
            end += 1;
        }
        self.pos = end;
        Some((src, &self.edges[start..end]))
    }
}
