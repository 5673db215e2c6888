//! Distributed contraction MSF: per-round minimum edges, pointer-doubling
//! contraction, label exchange, relabeling and redistribution, with a
//! replicated base case once few vertices remain and a final routing of
//! MSF ids back to their original home PEs.

mod base_case;
mod contract;
mod labels;
mod redistribute;

pub use base_case::{base_case, BaseCaseOutcome};
pub use contract::{contract_components, min_edges, MinEdgeCandidate};
pub use labels::{exchange_labels, relabel};
pub use redistribute::{redistribute, redistribute_mst, EdgeIndex, MsfEdge};

use crate::comm::AlltoallPolicy;
use crate::filter::parents::DistributedParentArray;
use crate::graph::{DistributedGraph, EdgeId};
use crate::preproc::run_local_preprocessing;
use crate::report::{Phase, PhaseTimes};
use crate::transport::Pe;
use crate::Result;

/// Default vertex-count threshold for switching to the replicated base
/// case: `max(2p, 35000)`.
pub const BASE_CASE_FLOOR: u64 = 35_000;

#[derive(Debug, Clone)]
pub struct BoruvkaConfig {
    /// Overrides `max(2p, 35000)`; clamped to at least `p` so the up to
    /// `p - 1` uncontracted shared vertices always fit the base case.
    pub base_case_threshold: Option<u64>,
    pub preprocess: bool,
    pub alltoall: AlltoallPolicy,
}

impl Default for BoruvkaConfig {
    fn default() -> Self {
        BoruvkaConfig {
            base_case_threshold: None,
            preprocess: true,
            alltoall: AlltoallPolicy::Auto,
        }
    }
}

impl BoruvkaConfig {
    pub fn effective_threshold(&self, p: usize) -> u64 {
        let default = (2 * p as u64).max(BASE_CASE_FLOOR);
        self.base_case_threshold
            .unwrap_or(default)
            .max(p as u64)
    }
}

/// Counters exposed for the round-bound and halving checks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoundStats {
    pub rounds: u64,
    /// Global non-shared vertex count entering each round (index 0) and
    /// after each round.
    pub nonshared_counts: Vec<u64>,
    pub vertex_counts: Vec<u64>,
    pub base_case_rounds: u64,
    pub max_doubling_iterations: u64,
    /// Vertices merged away by local preprocessing, global.
    pub preprocessing_removed: u64,
    pub initial_vertices: u64,
}

/// Per-rank MSF output: this rank's share of the forest in original input
/// terms, the replicated total weight, and this rank's phase timings.
#[derive(Debug, Clone)]
pub struct MsfResult {
    pub edges: Vec<MsfEdge>,
    pub total_weight: u64,
    pub phase_timings: PhaseTimes,
}

/// Whole distributed MSF computation for this rank (Algorithm overview:
/// preprocess, contract rounds while the graph is large, replicated base
/// case, redistribute the MSF).
pub fn mst(graph: DistributedGraph, config: &BoruvkaConfig, pe: &mut Pe) -> Result<(MsfResult, RoundStats)> {
    let mut phases = PhaseTimes::default();
    let mut stats = RoundStats::default();
    let index = EdgeIndex::build(&graph, pe.comm())?;
    let ids = mst_rounds(graph, config, None, &mut phases, &mut stats, pe)?;
    let comm = pe.comm();
    let edges = phases.time(Phase::MstRedistribution, || {
        redistribute_mst(ids, &index, config.alltoall, comm)
    })?;
    let local_weight: u64 = edges.iter().map(|e| e.weight as u64).sum();
    let total_weight = pe.comm().allreduce_sum(local_weight)?;
    Ok((
        MsfResult {
            edges,
            total_weight,
            phase_timings: phases,
        },
        stats,
    ))
}

/// The contraction rounds and base case, without MSF redistribution; the
/// filter algorithm drives this directly with a parent array attached and
/// preprocessing disabled.
pub(crate) fn mst_rounds(
    graph: DistributedGraph,
    config: &BoruvkaConfig,
    mut parents: Option<&mut DistributedParentArray>,
    phases: &mut PhaseTimes,
    stats: &mut RoundStats,
    pe: &mut Pe,
) -> Result<Vec<EdgeId>> {
    let p = pe.size();
    let threshold = config.effective_threshold(p);
    let mut collected: Vec<EdgeId> = Vec::new();

    let mut g = graph;
    stats.initial_vertices = g.global_vertex_count(pe.comm())?;

    if config.preprocess {
        let (comm, rng) = pe.comm_and_rng();
        let outcome = phases.time(Phase::LocalPreprocessing, || {
            run_local_preprocessing(&g, config.alltoall, rng, comm)
        })?;
        collected.extend(&outcome.mst_edge_ids);
        stats.preprocessing_removed = comm.allreduce_sum(outcome.removed_vertices)?;
        if let Some(array) = parents.as_deref_mut() {
            let pairs = outcome
                .labels
                .iter()
                .filter(|(v, l)| v != l)
                .map(|(&v, &l)| (v, l))
                .collect();
            array.write_parents(pairs, config.alltoall, comm)?;
        }
        g = outcome.graph;
    }

    let mut vertex_count = g.global_vertex_count(pe.comm())?;
    let mut nonshared = g.global_nonshared_count(pe.comm())?;
    let mut edge_count = g.global_edge_count(pe.comm())?;
    stats.vertex_counts.push(vertex_count);
    stats.nonshared_counts.push(nonshared);

    while vertex_count > threshold && edge_count > 0 {
        let comm = pe.comm();
        let candidates = phases.time(Phase::MinEdges, || min_edges(&g));
        let (local_labels, new_ids, doubling) = phases.time(Phase::Contraction, || {
            contract_components(&candidates, &g, config.alltoall, comm)
        })?;
        collected.extend(&new_ids);
        stats.max_doubling_iterations = stats.max_doubling_iterations.max(doubling);
        if let Some(array) = parents.as_deref_mut() {
            let pairs = local_labels
                .iter()
                .filter(|(v, l)| v != l)
                .map(|(&v, &l)| (v, l))
                .collect();
            array.write_parents(pairs, config.alltoall, comm)?;
        }
        let ghosts = phases.time(Phase::LabelExchange, || {
            exchange_labels(&local_labels, &g, config.alltoall, comm)
        })?;
        g = phases.time(Phase::Redistribute, || -> Result<DistributedGraph> {
            let edges = relabel(&local_labels, &ghosts, &g.local_edges)?;
            redistribute(edges, comm)
        })?;

        stats.rounds += 1;
        vertex_count = g.global_vertex_count(comm)?;
        let next_nonshared = g.global_nonshared_count(comm)?;
        edge_count = g.global_edge_count(comm)?;
        stats.vertex_counts.push(vertex_count);
        stats.nonshared_counts.push(next_nonshared);
        // Re-partitioning can turn up to p-1 previously shared vertices into
        // non-shared ones; contraction itself at least halves the rest.
        debug_assert!(
            next_nonshared <= nonshared / 2 + (p as u64 - 1),
            "halving violated: {nonshared} -> {next_nonshared}"
        );
        nonshared = next_nonshared;
    }

    let comm = pe.comm();
    let outcome = phases.time(Phase::BaseCase, || base_case(&g, threshold, comm))?;
    collected.extend(&outcome.mst_ids);
    stats.base_case_rounds = outcome.rounds;
    if let Some(array) = parents.as_deref_mut() {
        array.write_owned(
            outcome
                .roots
                .iter()
                .filter(|(v, r)| v != r)
                .map(|(&v, &r)| (v, r)),
        )?;
    }
    Ok(collected)
}
