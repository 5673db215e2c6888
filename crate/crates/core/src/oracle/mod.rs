//! Sequential reference algorithms and verification utilities: the ground
//! truth for the distributed engine.

mod union_find;

pub use union_find::UnionFind;

use std::collections::HashMap;

use crate::error::Error;
use crate::graph::{EdgeId, VertexId, WeightedEdge};
use crate::Result;

/// Result of a sequential MSF computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    /// Chosen edge ids, ascending.
    pub ids: Vec<EdgeId>,
    pub total_weight: u64,
    pub component_count: usize,
    /// Vertex to component representative (smallest label in component).
    pub roots: HashMap<VertexId, VertexId>,
}

/// Deduplicated undirected view of an edge list: each id once, plus the
/// dense index of every vertex label.
struct DenseGraph {
    edges: Vec<WeightedEdge>,
    labels: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
}

impl DenseGraph {
    fn new(edges: &[WeightedEdge]) -> Self {
        let mut seen = HashMap::new();
        let mut unique = Vec::new();
        for e in edges {
            if seen.insert(e.id, ()).is_none() {
                let (lo, hi) = e.endpoints_lo_hi();
                unique.push(WeightedEdge::new(lo, hi, e.weight, e.id));
            }
        }
        let mut labels: Vec<VertexId> = edges
            .iter()
            .flat_map(|e| [e.src, e.dst])
            .collect();
        labels.sort_unstable();
        labels.dedup();
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i))
            .collect();
        DenseGraph {
            edges: unique,
            labels,
            index,
        }
    }

    fn result(&self, uf: &mut UnionFind, ids: Vec<EdgeId>, total_weight: u64) -> OracleResult {
        let mut ids = ids;
        ids.sort_unstable();
        // Representative of a component: its smallest vertex label.
        let mut rep: HashMap<usize, VertexId> = HashMap::new();
        for (i, &label) in self.labels.iter().enumerate() {
            let root = uf.find(i);
            rep.entry(root)
                .and_modify(|r| *r = (*r).min(label))
                .or_insert(label);
        }
        let roots = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, &label)| (label, rep[&uf.find(i)]))
            .collect();
        OracleResult {
            ids,
            total_weight,
            component_count: uf.component_count(),
            roots,
        }
    }
}

/// Kruskal with union-find; the exact unique MSF under the total order
/// (weight, smaller endpoint, larger endpoint, id). Accepts directed or
/// single-direction edge lists; back edges collapse by id.
pub fn kruskal(edges: &[WeightedEdge]) -> OracleResult {
    let dense = DenseGraph::new(edges);
    let mut sorted = dense.edges.clone();
    sorted.sort_unstable_by_key(|e| e.total_order_key());
    let mut uf = UnionFind::new(dense.labels.len());
    let mut ids = Vec::new();
    let mut total = 0u64;
    for e in &sorted {
        if uf.union(dense.index[&e.src], dense.index[&e.dst]) {
            ids.push(e.id);
            total += e.weight as u64;
        }
    }
    dense.result(&mut uf, ids, total)
}

/// Literal sequential contraction rounds: per vertex pick the lightest
/// incident edge, root the pseudo trees, contract, drop self-loops and
/// parallels, repeat. Also returns the number of rounds, which is at most
/// `ceil(log2 n)`.
pub fn sequential_boruvka(edges: &[WeightedEdge]) -> (OracleResult, usize) {
    let dense = DenseGraph::new(edges);
    let n = dense.labels.len();
    let mut uf = UnionFind::new(n);
    let mut ids = Vec::new();
    let mut total = 0u64;

    // Working edges on dense indices.
    let mut work: Vec<(usize, usize, u32, EdgeId)> = dense
        .edges
        .iter()
        .map(|e| (dense.index[&e.src], dense.index[&e.dst], e.weight, e.id))
        .collect();
    let mut rounds = 0;
    while !work.is_empty() {
        rounds += 1;
        // Lightest incident edge per vertex.
        let mut min_edge: HashMap<usize, (u32, EdgeId, usize)> = HashMap::new();
        for &(a, b, w, id) in &work {
            for (u, v) in [(a, b), (b, a)] {
                let cand = (w, id, v);
                min_edge
                    .entry(u)
                    .and_modify(|m| {
                        if (cand.0, cand.1) < (m.0, m.1) {
                            *m = cand;
                        }
                    })
                    .or_insert(cand);
            }
        }
        // Pseudo trees: parent[u] = other endpoint of u's minimum edge;
        // 2-cycles rooted at the smaller label.
        let mut parent: HashMap<usize, usize> = HashMap::new();
        for (&u, &(_, _, v)) in &min_edge {
            parent.insert(u, v);
        }
        for (&u, &(w, id, v)) in &min_edge {
            let two_cycle = min_edge.get(&v).is_some_and(|&(_, vid, vv)| vv == u && vid == id);
            if two_cycle && u < v {
                parent.insert(u, u);
            }
            let records = !(two_cycle && u < v);
            if records && uf.union(u, v) {
                ids.push(id);
                total += w as u64;
            }
        }
        let root_of = |parent: &HashMap<usize, usize>, mut x: usize| {
            loop {
                let p = parent[&x];
                if p == x {
                    return x;
                }
                let pp = parent[&p];
                if pp == p {
                    return p;
                }
                x = pp;
            }
        };
        // Contract: relabel endpoints to component roots, drop self-loops.
        let mut next = Vec::with_capacity(work.len());
        for (a, b, w, id) in work {
            let ra = root_of(&parent, a);
            let rb = root_of(&parent, b);
            if ra != rb {
                next.push((ra.min(rb), ra.max(rb), w, id));
            }
        }
        // Parallel edges: keep the lightest.
        next.sort_unstable_by_key(|&(a, b, w, id)| (a, b, w, id));
        next.dedup_by_key(|&mut (a, b, ..)| (a, b));
        work = next;
    }
    debug_assert!(n <= 1 || rounds <= (n as f64).log2().ceil() as usize);
    (dense.result(&mut uf, ids, total), rounds)
}

/// Quicksort-style recursion: compute the MSF of the light half first, drop
/// heavy edges already inside one of its components, then recurse on the
/// survivors.
pub fn filter_kruskal(edges: &[WeightedEdge]) -> OracleResult {
    const BASE: usize = 16;
    let dense = DenseGraph::new(edges);
    let mut uf = UnionFind::new(dense.labels.len());
    let mut ids = Vec::new();
    let mut total = 0u64;

    fn base_case(
        mut edges: Vec<WeightedEdge>,
        index: &HashMap<VertexId, usize>,
        uf: &mut UnionFind,
        ids: &mut Vec<EdgeId>,
        total: &mut u64,
    ) {
        edges.sort_unstable_by_key(|e| e.total_order_key());
        for e in edges {
            if uf.union(index[&e.src], index[&e.dst]) {
                ids.push(e.id);
                *total += e.weight as u64;
            }
        }
    }

    fn rec(
        edges: Vec<WeightedEdge>,
        index: &HashMap<VertexId, usize>,
        uf: &mut UnionFind,
        ids: &mut Vec<EdgeId>,
        total: &mut u64,
    ) {
        if edges.len() <= BASE {
            base_case(edges, index, uf, ids, total);
            return;
        }
        let mut ws = [
            edges[edges.len() / 4].weight,
            edges[edges.len() / 2].weight,
            edges[3 * edges.len() / 4].weight,
        ];
        ws.sort_unstable();
        let pivot = ws[1];
        let (light, heavy): (Vec<_>, Vec<_>) = edges.iter().partition(|e| e.weight <= pivot);
        if heavy.is_empty() {
            // Degenerate pivot, no progress possible by weight.
            base_case(light, index, uf, ids, total);
            return;
        }
        rec(light, index, uf, ids, total);
        let survivors: Vec<WeightedEdge> = heavy
            .into_iter()
            .filter(|e| uf.find(index[&e.src]) != uf.find(index[&e.dst]))
            .collect();
        rec(survivors, index, uf, ids, total);
    }

    rec(dense.edges.clone(), &dense.index, &mut uf, &mut ids, &mut total);
    dense.result(&mut uf, ids, total)
}

/// Verdict of [`verify_msf`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    Cycle,
    NotSpanning,
    WrongWeight,
}

/// Checks a candidate id set against the graph: acyclic, spanning per
/// component, and total weight equal to the Kruskal oracle.
pub fn verify_msf(graph_edges: &[WeightedEdge], candidate_ids: &[EdgeId]) -> Result<Verdict> {
    let dense = DenseGraph::new(graph_edges);
    let by_id: HashMap<EdgeId, &WeightedEdge> = dense.edges.iter().map(|e| (e.id, e)).collect();
    let mut uf = UnionFind::new(dense.labels.len());
    let mut total = 0u64;
    for id in candidate_ids {
        let e = by_id.get(id).ok_or(Error::UnknownId(*id))?;
        if !uf.union(dense.index[&e.src], dense.index[&e.dst]) {
            return Ok(Verdict::Cycle);
        }
        total += e.weight as u64;
    }
    let oracle = kruskal(graph_edges);
    if uf.component_count() != oracle.component_count {
        return Ok(Verdict::NotSpanning);
    }
    if total != oracle.total_weight {
        return Ok(Verdict::WrongWeight);
    }
    Ok(Verdict::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn undirected(list: &[(u64, u64, u32)]) -> Vec<WeightedEdge> {
        crate::graph::io::build_global_edge_list(list).unwrap().1
    }

    #[test]
    fn kruskal_triangle() {
        // Edges sorted by (lo, hi): (1,2,4) id 0, (1,3,5) id 1, (2,3,3) id 2.
        let edges = undirected(&[(1, 2, 4), (2, 3, 3), (1, 3, 5)]);
        let out = kruskal(&edges);
        assert_eq!(out.total_weight, 7);
        assert_eq!(out.ids, vec![0, 2]);
        assert_eq!(out.component_count, 1);
    }

    #[test]
    fn kruskal_takes_all_tree_edges() {
        let edges = undirected(&[(1, 2, 9), (2, 3, 1), (3, 4, 5)]);
        let out = kruskal(&edges);
        assert_eq!(out.ids.len(), 3);
        assert_eq!(out.total_weight, 15);
    }

    #[test]
    fn kruskal_empty_graph() {
        let out = kruskal(&[]);
        assert!(out.ids.is_empty());
        assert_eq!(out.total_weight, 0);
        assert_eq!(out.component_count, 0);
    }

    #[test]
    fn boruvka_round_bound_on_path() {
        let list: Vec<(u64, u64, u32)> = (1..8).map(|i| (i, i + 1, i as u32)).collect();
        let edges = undirected(&list);
        let (out, rounds) = sequential_boruvka(&edges);
        assert_eq!(out.ids.len(), 7);
        assert!(rounds <= 3, "path of 8 should finish in <= 3 rounds, took {rounds}");
    }

    #[test]
    fn boruvka_single_vertex_zero_rounds() {
        let (_, rounds) = sequential_boruvka(&[]);
        assert_eq!(rounds, 0);
    }

    #[test]
    fn oracles_agree_on_random_instances() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let n = rng.gen_range(2..64);
            let m = rng.gen_range(1..256);
            let list: Vec<(u64, u64, u32)> = (0..m)
                .filter_map(|_| {
                    let u = rng.gen_range(1..=n);
                    let v = rng.gen_range(1..=n);
                    (u != v).then_some((u, v, rng.gen_range(1..255)))
                })
                .collect();
            if list.is_empty() {
                continue;
            }
            let edges = undirected(&list);
            let k = kruskal(&edges);
            let (b, _) = sequential_boruvka(&edges);
            let f = filter_kruskal(&edges);
            assert_eq!(k.ids, b.ids);
            assert_eq!(k.ids, f.ids);
            assert_eq!(k.total_weight, f.total_weight);
        }
    }

    #[test]
    fn filter_kruskal_all_weights_equal() {
        let edges = undirected(&[(1, 2, 5), (2, 3, 5), (1, 3, 5), (3, 4, 5), (1, 4, 5)]);
        assert_eq!(filter_kruskal(&edges).ids, kruskal(&edges).ids);
    }

    #[test]
    fn verify_accepts_oracle_output() {
        let edges = undirected(&[(1, 2, 4), (2, 3, 3), (1, 3, 5), (4, 5, 1)]);
        let oracle = kruskal(&edges);
        assert_eq!(verify_msf(&edges, &oracle.ids).unwrap(), Verdict::Ok);
    }

    #[test]
    fn verify_flags_missing_edge() {
        let edges = undirected(&[(1, 2, 4), (2, 3, 3), (1, 3, 5)]);
        let oracle = kruskal(&edges);
        assert_eq!(
            verify_msf(&edges, &oracle.ids[..1]).unwrap(),
            Verdict::NotSpanning
        );
    }

    #[test]
    fn verify_flags_heavier_swap() {
        // Swap the weight-3 MSF edge for the weight-5 cycle closer.
        let edges = undirected(&[(1, 2, 4), (2, 3, 3), (1, 3, 5)]);
        assert_eq!(verify_msf(&edges, &[0, 1]).unwrap(), Verdict::WrongWeight);
    }

    #[test]
    fn verify_flags_cycle_and_unknown_id() {
        let edges = undirected(&[(1, 2, 4), (2, 3, 3), (1, 3, 5), (3, 4, 1)]);
        assert_eq!(verify_msf(&edges, &[0, 1, 2]).unwrap(), Verdict::Cycle);
        assert!(matches!(verify_msf(&edges, &[99]), Err(Error::UnknownId(99))));
    }
}
