//! Communication-free contraction of provably local MST edges.
//!
//! A guarded per-PE contraction merges a vertex along its minimum incident
//! edge only when that edge is local with both endpoints non-shared; by the
//! cut property those edges are MSF edges and no other PE needs to know.
//! The surviving graph has every remaining vertex's lightest incident edge
//! on a cut. Afterwards ghost labels are refreshed once and the global sort
//! order is reestablished, mostly locally.

use std::collections::{HashMap, HashSet};

use rand::Rng;

use crate::comm::{distributed_sort, smart_alltoall, AlltoallPolicy};
use crate::error::Error;
use crate::graph::{
    build_distributed_graph, DistributedGraph, EdgeId, VertexId, WeightedEdge,
};
use crate::transport::Communicator;
use crate::Result;

/// Fraction of local edges below which preprocessing is skipped.
pub const LOCAL_EDGE_FRACTION: f64 = 0.10;
/// Quantile of the weight sample used as the hashed-dedup pivot.
pub const DEDUP_LIGHT_FRACTION: f64 = 0.10;
/// Hash-based dedup is skipped when the table would outgrow the cache.
pub const DEDUP_TABLE_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Default)]
pub struct LocalContractionResult {
    /// Relabeled surviving edges, unsorted.
    pub contracted_edges: Vec<WeightedEdge>,
    /// Ids of contracted edges; provably MSF members.
    pub mst_edge_ids: Vec<EdgeId>,
    /// Original local vertex to component root.
    pub local_label: HashMap<VertexId, VertexId>,
}

/// Per-PE decision from local data only: worth contracting iff at least 10%
/// of the local slice's edges have both endpoints on this PE (inclusive).
pub fn should_preprocess(graph: &DistributedGraph) -> bool {
    if graph.local_edges.is_empty() {
        return false;
    }
    let srcs: Vec<VertexId> = graph.src_runs().map(|(v, _)| v).collect();
    let local = graph
        .local_edges
        .iter()
        .filter(|e| srcs.binary_search(&e.dst).is_ok())
        .count();
    (local as f64) >= LOCAL_EDGE_FRACTION * graph.local_edges.len() as f64
}

/// Guarded local contraction rounds. Shared vertices do not participate at
/// all: they are never merged into anything and nothing merges into them.
pub fn local_boruvka_guarded(graph: &DistributedGraph) -> LocalContractionResult {
    let original_srcs: Vec<VertexId> = graph.src_runs().map(|(v, _)| v).collect();
    let shared_first = graph.shares_with_prev().then(|| graph.first_src().unwrap());
    let shared_last = graph.shares_with_next().then(|| graph.last_src().unwrap());
    let is_shared = |v: VertexId| shared_first == Some(v) || shared_last == Some(v);

    let mut label: HashMap<VertexId, VertexId> =
        original_srcs.iter().map(|&v| (v, v)).collect();
    let mut work = graph.local_edges.clone();
    let mut current: HashSet<VertexId> = original_srcs.iter().copied().collect();
    let mut mst_edge_ids = Vec::new();

    loop {
        // Minimum incident edge per current vertex.
        let mut min_edge: HashMap<VertexId, WeightedEdge> = HashMap::new();
        for e in &work {
            min_edge
                .entry(e.src)
                .and_modify(|m| {
                    if e.mst_key() < m.mst_key() {
                        *m = *e;
                    }
                })
                .or_insert(*e);
        }
        // A vertex contracts only when its overall minimum is a local edge
        // with both endpoints non-shared.
        let selected: HashMap<VertexId, WeightedEdge> = min_edge
            .iter()
            .filter(|(&u, e)| {
                !is_shared(u) && current.contains(&e.dst) && !is_shared(e.dst)
            })
            .map(|(&u, &e)| (u, e))
            .collect();
        if selected.is_empty() {
            break;
        }

        let mut parent: HashMap<VertexId, VertexId> =
            selected.iter().map(|(&u, e)| (u, e.dst)).collect();
        for (&u, e) in &selected {
            let v = e.dst;
            let two_cycle = selected.get(&v).is_some_and(|back| back.id == e.id);
            if two_cycle && u < v {
                parent.insert(u, u);
            }
            if !(two_cycle && u < v) {
                mst_edge_ids.push(e.id);
            }
        }

        let root_of = |parent: &HashMap<VertexId, VertexId>, start: VertexId| -> VertexId {
            let mut x = start;
            loop {
                let Some(&p) = parent.get(&x) else { return x };
                if p == x {
                    return x;
                }
                x = p;
            }
        };
        let roots: HashMap<VertexId, VertexId> = current
            .iter()
            .map(|&v| (v, root_of(&parent, v)))
            .collect();

        for l in label.values_mut() {
            *l = roots[l];
        }
        current = roots.values().copied().collect();
        work = work
            .iter()
            .filter_map(|e| {
                let src = roots[&e.src];
                let dst = roots.get(&e.dst).copied().unwrap_or(e.dst);
                (src != dst).then(|| WeightedEdge::new(src, dst, e.weight, e.id))
            })
            .collect();
    }

    mst_edge_ids.sort_unstable();
    LocalContractionResult {
        contracted_edges: work,
        mst_edge_ids,
        local_label: label,
    }
}

/// Removes parallel edges keeping per directed endpoint pair the lightest
/// (then lowest-id) edge. Edges lighter than a sampled pivot go through a
/// hash table so the bulk of the input is filtered without sorting it; the
/// hashed path is skipped when the table would exceed [`DEDUP_TABLE_CAP`].
pub fn dedup_parallel_hashed(
    edges: Vec<WeightedEdge>,
    light_fraction: f64,
    rng: &mut impl Rng,
) -> Vec<WeightedEdge> {
    if edges.len() < 32 {
        return sort_scan_dedup(edges);
    }
    let sample_count = (edges.len() / 100).max(1);
    let mut sample: Vec<u32> = (0..sample_count)
        .map(|_| edges[rng.gen_range(0..edges.len())].weight)
        .collect();
    sample.sort_unstable();
    let pivot = sample[((light_fraction * sample.len() as f64) as usize).min(sample.len() - 1)];

    let mut light: Vec<&WeightedEdge> = edges.iter().filter(|e| e.weight < pivot).collect();
    if light.len() > DEDUP_TABLE_CAP {
        return sort_scan_dedup(edges);
    }
    light.sort_unstable_by_key(|e| (e.src, e.dst, e.mst_key()));
    let mut table: HashMap<(VertexId, VertexId), (u32, EdgeId)> =
        HashMap::with_capacity(light.len());
    for e in light {
        table.entry((e.src, e.dst)).or_insert(e.mst_key());
    }
    let survivors: Vec<WeightedEdge> = edges
        .into_iter()
        .filter(|e| match table.get(&(e.src, e.dst)) {
            Some(&kept) => kept == e.mst_key(),
            None => true,
        })
        .collect();
    sort_scan_dedup(survivors)
}

fn sort_scan_dedup(mut edges: Vec<WeightedEdge>) -> Vec<WeightedEdge> {
    edges.sort_unstable_by_key(|e| (e.src, e.dst, e.mst_key()));
    edges.dedup_by_key(|e| (e.src, e.dst));
    edges
}

/// Everything the MST drivers need from one preprocessing pass.
pub struct PreprocOutcome {
    pub graph: DistributedGraph,
    pub mst_edge_ids: Vec<EdgeId>,
    /// Original local vertex to component root, identity when skipped.
    pub labels: HashMap<VertexId, VertexId>,
    /// Vertices removed on this PE.
    pub removed_vertices: u64,
}

/// Full collective preprocessing pass: guarded contraction where the 10%
/// rule holds, hashed parallel dedup, one ghost-label refresh routed over
/// the original graph, and sort-order reestablishment.
pub fn run_local_preprocessing(
    graph: &DistributedGraph,
    policy: AlltoallPolicy,
    rng: &mut impl Rng,
    comm: &Communicator,
) -> Result<PreprocOutcome> {
    let result = if should_preprocess(graph) {
        local_boruvka_guarded(graph)
    } else {
        LocalContractionResult {
            contracted_edges: graph.local_edges.clone(),
            mst_edge_ids: Vec::new(),
            local_label: graph.src_runs().map(|(v, _)| (v, v)).collect(),
        }
    };
    let removed_vertices = result
        .local_label
        .iter()
        .filter(|(v, l)| v != l)
        .count() as u64;

    let deduped = dedup_parallel_hashed(result.contracted_edges, DEDUP_LIGHT_FRACTION, rng);

    // Ghost refresh: send u's new label wherever an edge (u, v)'s back edge
    // lives on another PE, deduplicated per (destination, u). For cut edges
    // this is the home of (v, u); it also covers back edges sitting in a
    // shared vertex's run on the neighbor. Routing uses the original graph
    // whose keys both sides still agree on.
    let original_srcs: HashSet<VertexId> = graph.src_runs().map(|(v, _)| v).collect();
    let mut outgoing: Vec<Vec<(VertexId, VertexId)>> = vec![Vec::new(); comm.size()];
    let mut sent: HashSet<(usize, VertexId)> = HashSet::new();
    for e in &graph.local_edges {
        let dest = graph.home_of_edge(e.dst, e.src, e.weight);
        if dest != comm.rank() && sent.insert((dest, e.src)) {
            outgoing[dest].push((e.src, result.local_label[&e.src]));
        }
    }
    let received = smart_alltoall(outgoing, policy, comm)?;
    let ghost_map: HashMap<VertexId, VertexId> =
        received.into_iter().flatten().collect();

    let mut updated = deduped;
    for e in &mut updated {
        if !original_srcs.contains(&e.dst) {
            e.dst = *ghost_map
                .get(&e.dst)
                .ok_or(Error::MissingGhostLabel(e.dst))?;
        }
    }

    let new_graph = reestablish_sorted(updated, graph, comm)?;
    Ok(PreprocOutcome {
        graph: new_graph,
        mst_edge_ids: result.mst_edge_ids,
        labels: result.local_label,
        removed_vertices,
    })
}

/// Restores the globally sorted layout after local contraction. Contraction
/// keeps every new source inside its PE's original source range, so a local
/// sort almost suffices; only the edge runs of boundary-shared vertices must
/// be merged with the rank-adjacent neighbor. When those runs dominate a
/// slice anywhere, everything falls back to one full distributed sort.
pub fn reestablish_sorted(
    mut edges: Vec<WeightedEdge>,
    original: &DistributedGraph,
    comm: &Communicator,
) -> Result<DistributedGraph> {
    let full_key = |e: &WeightedEdge| (e.src, e.dst, e.weight, e.id);
    edges.sort_unstable_by_key(full_key);

    let prev_partner = original
        .shares_with_prev()
        .then(|| original.prev_nonempty().expect("shared implies neighbor"));
    let next_partner = original
        .shares_with_next()
        .then(|| original.next_nonempty().expect("shared implies neighbor"));

    let prefix_len = match original.first_src() {
        Some(v) if prev_partner.is_some() => edges.partition_point(|e| e.src <= v),
        _ => 0,
    };
    let suffix_start = match original.last_src() {
        Some(v) if next_partner.is_some() => edges.partition_point(|e| e.src < v),
        _ => edges.len(),
    };

    let boundary = prefix_len + (edges.len() - suffix_start);
    let fallback = boundary > edges.len() / 2 || prefix_len > suffix_start;
    if comm.allreduce_or(fallback)? {
        let sorted = distributed_sort(edges, full_key, comm)?;
        return build_distributed_graph(sorted, comm);
    }

    let suffix: Vec<WeightedEdge> = edges.split_off(suffix_start);
    let middle: Vec<WeightedEdge> = edges.split_off(prefix_len);
    let prefix = edges;

    let mut outgoing: Vec<Vec<WeightedEdge>> = vec![Vec::new(); comm.size()];
    if let Some(q) = prev_partner {
        outgoing[q] = prefix.clone();
    }
    if let Some(s) = next_partner {
        outgoing[s] = suffix.clone();
    }
    let received = comm.alltoallv(outgoing)?;

    // Merge each boundary run with the partner's part; the earlier rank
    // keeps the first elements, sizes stay as they were.
    let my_prefix = if let Some(q) = prev_partner {
        let mut merged = received[q].clone();
        merged.extend(prefix.iter().copied());
        merged.sort_unstable_by_key(full_key);
        merged.split_off(merged.len() - prefix.len())
    } else {
        prefix
    };
    let my_suffix = if let Some(s) = next_partner {
        let mut merged = suffix.clone();
        merged.extend(received[s].iter().copied());
        merged.sort_unstable_by_key(full_key);
        merged.truncate(suffix.len());
        merged
    } else {
        suffix
    };

    let mut out = my_prefix;
    out.extend(middle);
    out.extend(my_suffix);
    build_distributed_graph(out, comm)
}
