//! Seeded graph generators emitting globally sorted, 1D-partitioned,
//! back-edge-complete weighted edge lists.
//!
//! Candidate undirected pairs are produced per PE from counter-based RNG
//! streams over globally partitioned index spaces, deduplicated and sorted
//! collectively, assigned ids by global rank, mirrored, and sorted again
//! into the distributed graph layout. Generation under any PE count yields
//! the same global sequence.

pub mod streams;

use rand::Rng;

use crate::comm::{distributed_sort, global_dedup_by_key};
use crate::error::Error;
use crate::graph::{build_distributed_graph, DistributedGraph, VertexId, Weight, WeightedEdge};
use crate::transport::{run_spmd, Communicator};
use crate::Result;

use streams::{keyed_rng, weight_for_pair, DOMAIN_PAIR, DOMAIN_POINT};

/// Graph family with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `m` distinct undirected pairs sampled uniformly over `n` vertices.
    Gnm { n: u64, m: u64 },
    /// 4-neighborhoods on a rows x cols lattice.
    Grid2d { rows: u64, cols: u64 },
    /// `n` points uniform in the unit square, edges within distance `d`.
    Rgg2d { n: u64, d: f64 },
    /// `n` points uniform in the unit cube, edges within distance `d`.
    Rgg3d { n: u64, d: f64 },
    /// Recursive adjacency-matrix descent with Graph500 probabilities.
    Rmat { scale: u32, edges: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub family: Family,
    pub seed: Option<u64>,
    /// Weights are uniform in `[wmin, wmax)`.
    pub wmin: Weight,
    pub wmax: Weight,
}

pub const DEFAULT_WMIN: Weight = 1;
pub const DEFAULT_WMAX: Weight = 255;

/// Graph500 quadrant probabilities (a, b, c); d is the remainder 0.05.
const RMAT_A: f64 = 0.57;
const RMAT_B: f64 = 0.19;
const RMAT_C: f64 = 0.19;

impl GeneratorSpec {
    /// Parses spec strings like `gnm:n=4096,m=32768,seed=1`,
    /// `grid2d:rows=64,cols=64`, `rgg2d:n=4096,d=0.03` (or `deg=` for a
    /// target average degree), `rgg3d:n=...`, `rmat:scale=12,edges=65536`.
    pub fn parse(text: &str) -> Result<GeneratorSpec> {
        let bad = |msg: &str| Error::InvalidSpec(format!("{msg} in `{text}`"));
        let (family_name, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut fields = std::collections::HashMap::new();
        for item in rest.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| bad("expected key=value"))?;
            fields.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get_u64 = |fields: &std::collections::HashMap<String, String>, key: &str| {
            fields
                .get(key)
                .ok_or_else(|| bad(&format!("missing `{key}`")))?
                .parse::<u64>()
                .map_err(|_| bad(&format!("`{key}` must be an integer")))
        };
        let get_f64 = |fields: &std::collections::HashMap<String, String>, key: &str| {
            fields
                .get(key)
                .ok_or_else(|| bad(&format!("missing `{key}`")))?
                .parse::<f64>()
                .map_err(|_| bad(&format!("`{key}` must be a number")))
        };
        let family = match family_name {
            "gnm" => Family::Gnm {
                n: get_u64(&fields, "n")?,
                m: get_u64(&fields, "m")?,
            },
            "grid2d" => Family::Grid2d {
                rows: get_u64(&fields, "rows")?,
                cols: get_u64(&fields, "cols")?,
            },
            "rgg2d" | "rgg3d" => {
                let n = get_u64(&fields, "n")?;
                let dim = if family_name == "rgg2d" { 2 } else { 3 };
                let d = if fields.contains_key("d") {
                    get_f64(&fields, "d")?
                } else if fields.contains_key("deg") {
                    rgg_radius_for_degree(n, get_f64(&fields, "deg")?, dim)
                } else {
                    return Err(bad("missing `d` or `deg`"));
                };
                if dim == 2 {
                    Family::Rgg2d { n, d }
                } else {
                    Family::Rgg3d { n, d }
                }
            }
            "rmat" => Family::Rmat {
                scale: get_u64(&fields, "scale")? as u32,
                edges: get_u64(&fields, "edges")?,
            },
            other => return Err(bad(&format!("unknown family `{other}`"))),
        };
        let seed = fields.get("seed").map(|s| {
            s.parse::<u64>()
                .map_err(|_| bad("`seed` must be an integer"))
        });
        let seed = match seed {
            Some(r) => Some(r?),
            None => None,
        };
        let wmin = fields
            .get("wmin")
            .map(|s| s.parse::<Weight>().map_err(|_| bad("bad wmin")))
            .transpose()?
            .unwrap_or(DEFAULT_WMIN);
        let wmax = fields
            .get("wmax")
            .map(|s| s.parse::<Weight>().map_err(|_| bad("bad wmax")))
            .transpose()?
            .unwrap_or(DEFAULT_WMAX);
        let spec = GeneratorSpec {
            family,
            seed,
            wmin,
            wmax,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.wmin < 1 || self.wmax <= self.wmin {
            return bad(format!("weight range [{}, {}) is empty", self.wmin, self.wmax));
        }
        match self.family {
            Family::Gnm { n, m } => {
                if n < 1 {
                    return bad("gnm needs n >= 1".into());
                }
                if m > n * (n - 1) / 2 {
                    return bad(format!("gnm m={m} exceeds n*(n-1)/2"));
                }
            }
            Family::Grid2d { rows, cols } => {
                if rows < 1 || cols < 1 {
                    return bad("grid2d needs rows, cols >= 1".into());
                }
            }
            Family::Rgg2d { n, d } | Family::Rgg3d { n, d } => {
                if n < 1 || d <= 0.0 {
                    return bad("rgg needs n >= 1 and d > 0".into());
                }
            }
            Family::Rmat { scale, edges } => {
                if scale < 1 || scale > 31 {
                    return bad("rmat needs 1 <= scale <= 31".into());
                }
                let n = 1u64 << scale;
                if edges > n * (n - 1) / 2 {
                    return bad(format!("rmat edges={edges} exceeds n*(n-1)/2"));
                }
            }
        }
        Ok(())
    }
}

/// Radius giving an expected average degree `deg` for uniform random
/// geometric graphs, from the expected-degree formula; an approximation that
/// ignores boundary effects.
pub fn rgg_radius_for_degree(n: u64, deg: f64, dim: u32) -> f64 {
    let n = n as f64;
    match dim {
        2 => (deg / (n * std::f64::consts::PI)).sqrt(),
        _ => (3.0 * deg / (4.0 * n * std::f64::consts::PI)).cbrt(),
    }
}

/// Contiguous share of the global index range `[0, total)` for one rank.
fn index_slice(total: u64, p: u64, rank: u64) -> std::ops::Range<u64> {
    (total * rank / p)..(total * (rank + 1) / p)
}

/// Generates the family's edge set collectively and builds the distributed
/// graph: both directions present, weights shared per undirected pair, ids
/// assigned as the global rank of the undirected edge in sorted order.
pub fn generate(
    spec: &GeneratorSpec,
    default_seed: u64,
    comm: &Communicator,
) -> Result<DistributedGraph> {
    spec.validate()?;
    let seed = spec.seed.unwrap_or(default_seed);
    let pairs = match spec.family {
        Family::Gnm { n, m } => sample_distinct_pairs(m, seed, comm, |rng| {
            let u = rng.gen_range(1..=n);
            let mut v = rng.gen_range(1..n);
            if v >= u {
                v += 1;
            }
            Some((u.min(v), u.max(v)))
        })?,
        Family::Grid2d { rows, cols } => grid2d_pairs(rows, cols, comm),
        Family::Rgg2d { n, d } => rgg_pairs(n, d, 2, seed, comm),
        Family::Rgg3d { n, d } => rgg_pairs(n, d, 3, seed, comm),
        Family::Rmat { scale, edges } => sample_distinct_pairs(edges, seed, comm, |rng| {
            let (mut u, mut v) = (0u64, 0u64);
            for _ in 0..scale {
                let r: f64 = rng.gen();
                let (qu, qv) = if r < RMAT_A {
                    (0, 0)
                } else if r < RMAT_A + RMAT_B {
                    (0, 1)
                } else if r < RMAT_A + RMAT_B + RMAT_C {
                    (1, 0)
                } else {
                    (1, 1)
                };
                u = u * 2 + qu;
                v = v * 2 + qv;
            }
            (u != v).then(|| (u.min(v) + 1, u.max(v) + 1))
        })?,
    };
    finish_from_pairs(pairs, seed, spec.wmin, spec.wmax, comm)
}

/// Shared tail of every family: weight, sort, id assignment, mirroring.
fn finish_from_pairs(
    pairs: Vec<(VertexId, VertexId)>,
    seed: u64,
    wmin: Weight,
    wmax: Weight,
    comm: &Communicator,
) -> Result<DistributedGraph> {
    let weighted: Vec<(VertexId, VertexId, Weight)> = pairs
        .into_iter()
        .map(|(lo, hi)| (lo, hi, weight_for_pair(seed, lo, hi, wmin, wmax)))
        .collect();
    let canonical = distributed_sort(weighted, |&(lo, hi, _)| (lo, hi), comm)?;
    let (offset, _) = comm.exclusive_prefix_sum(canonical.len() as u64)?;

    let mut directed = Vec::with_capacity(canonical.len() * 2);
    for (i, &(lo, hi, w)) in canonical.iter().enumerate() {
        let id = offset + i as u64;
        directed.push(WeightedEdge::new(lo, hi, w, id));
        directed.push(WeightedEdge::new(hi, lo, w, id));
    }
    let directed = distributed_sort(directed, |e| (e.src, e.dst, e.weight), comm)?;
    build_distributed_graph(directed, comm)
}

/// Uniform rejection sampling of `target` distinct undirected pairs. The
/// attempt space `[0, attempts)` is partitioned over PEs and regenerated
/// with doubled size until `target` distinct pairs exist; keeping the pairs
/// with the smallest attempt indices makes the result the same as
/// sequential rejection sampling.
fn sample_distinct_pairs<F>(
    target: u64,
    seed: u64,
    comm: &Communicator,
    pair_for_attempt: F,
) -> Result<Vec<(VertexId, VertexId)>>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Option<(VertexId, VertexId)>,
{
    if target == 0 {
        return Ok(Vec::new());
    }
    let p = comm.size() as u64;
    let rank = comm.rank() as u64;
    let cap = target.saturating_mul(32).max(4096);
    let mut attempts = target.saturating_mul(2).max(64);
    loop {
        let my = index_slice(attempts, p, rank);
        let mut candidates: Vec<(VertexId, VertexId, u64)> = Vec::with_capacity(my.len());
        for k in my {
            let mut rng = keyed_rng(seed, DOMAIN_PAIR, k, 0);
            if let Some((lo, hi)) = pair_for_attempt(&mut rng) {
                candidates.push((lo, hi, k));
            }
        }
        let sorted = distributed_sort(candidates, |c| *c, comm)?;
        let kept = global_dedup_by_key(sorted, |&(lo, hi, _)| (lo, hi), comm)?;
        let count = comm.allreduce_sum(kept.len() as u64)?;
        if count >= target {
            // First `target` pairs in attempt order.
            let by_attempt = distributed_sort(kept, |&(_, _, k)| k, comm)?;
            let (offset, _) = comm.exclusive_prefix_sum(by_attempt.len() as u64)?;
            return Ok(by_attempt
                .into_iter()
                .enumerate()
                .filter(|(i, _)| offset + *i as u64 < target)
                .map(|(_, (lo, hi, _))| (lo, hi))
                .collect());
        }
        if attempts >= cap {
            return Err(Error::InvalidSpec(format!(
                "could not sample {target} distinct pairs within {cap} attempts"
            )));
        }
        attempts = (attempts * 2).min(cap);
    }
}

fn grid2d_pairs(rows: u64, cols: u64, comm: &Communicator) -> Vec<(VertexId, VertexId)> {
    let label = |r: u64, c: u64| r * cols + c + 1;
    let horizontal = rows * cols.saturating_sub(1);
    let vertical = rows.saturating_sub(1) * cols;
    let my = index_slice(horizontal + vertical, comm.size() as u64, comm.rank() as u64);
    my.map(|idx| {
        if idx < horizontal {
            let (r, c) = (idx / (cols - 1), idx % (cols - 1));
            (label(r, c), label(r, c + 1))
        } else {
            let idx = idx - horizontal;
            let (r, c) = (idx / cols, idx % cols);
            (label(r, c), label(r + 1, c))
        }
    })
    .collect()
}

fn rgg_pairs(
    n: u64,
    d: f64,
    dim: u32,
    seed: u64,
    comm: &Communicator,
) -> Vec<(VertexId, VertexId)> {
    // Every PE regenerates all points; candidate pairs are then emitted by
    // the owner of the smaller index only.
    let points: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            let mut rng = keyed_rng(seed, DOMAIN_POINT, i, 0);
            let mut q = [0.0; 3];
            for v in q.iter_mut().take(dim as usize) {
                *v = rng.gen::<f64>();
            }
            q
        })
        .collect();
    let cell_of = |q: &[f64; 3]| -> (i64, i64, i64) {
        (
            (q[0] / d) as i64,
            (q[1] / d) as i64,
            if dim == 3 { (q[2] / d) as i64 } else { 0 },
        )
    };
    let mut cells: std::collections::HashMap<(i64, i64, i64), Vec<u64>> =
        std::collections::HashMap::new();
    for (i, q) in points.iter().enumerate() {
        cells.entry(cell_of(q)).or_default().push(i as u64);
    }
    let my = index_slice(n, comm.size() as u64, comm.rank() as u64);
    let dz = if dim == 3 { 1 } else { 0 };
    let mut pairs = Vec::new();
    for i in my {
        let qi = &points[i as usize];
        let (cx, cy, cz) = cell_of(qi);
        for ox in -1..=1 {
            for oy in -1..=1 {
                for oz in -dz..=dz {
                    let Some(bucket) = cells.get(&(cx + ox, cy + oy, cz + oz)) else {
                        continue;
                    };
                    for &j in bucket {
                        if j <= i {
                            continue;
                        }
                        let qj = &points[j as usize];
                        let dist2 = (0..dim as usize)
                            .map(|k| (qi[k] - qj[k]) * (qi[k] - qj[k]))
                            .sum::<f64>();
                        if dist2 <= d * d {
                            pairs.push((i + 1, j + 1));
                        }
                    }
                }
            }
        }
    }
    pairs
}

/// True when generating under `p1` and `p2` PEs yields identical global
/// sorted edge sequences, weights and ids included.
pub fn partition_independence_check(
    spec: &GeneratorSpec,
    default_seed: u64,
    p1: usize,
    p2: usize,
) -> Result<bool> {
    let gather = |p: usize| -> Result<Vec<WeightedEdge>> {
        let out = run_spmd(p, default_seed, |pe| {
            let g = generate(spec, default_seed, pe.comm())?;
            pe.comm().allgatherv(g.local_edges.clone())
        })?;
        Ok(out.into_iter().next().expect("p >= 1"))
    };
    Ok(gather(p1)? == gather(p2)?)
}
