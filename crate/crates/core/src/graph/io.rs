//! Edge-list file formats.
//!
//! Binary: 16-byte header (magic `MSTF`, version u16, flags u16, vertex
//! count u64, all little endian) followed by the delta-compressed payload of
//! the full directed, sorted, id-carrying edge sequence.
//!
//! Text: one `u v w` triple per line, whitespace separated decimal,
//! undirected; back edges are implied on load.

use std::fs;
use std::path::Path;

use crate::error::Error;
use crate::Result;

use super::codec::{decode_edges, encode_edges};
use super::edge::{sort_lexicographic, VertexId, Weight, WeightedEdge};

const MAGIC: &[u8; 4] = b"MSTF";
const VERSION: u16 = 1;

pub fn write_binary(path: &Path, n: u64, edges: &[WeightedEdge]) -> Result<u64> {
    let payload = encode_edges(edges)?;
    let mut bytes = Vec::with_capacity(16 + payload.len());
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&0u16.to_le_bytes());
    bytes.extend_from_slice(&n.to_le_bytes());
    bytes.extend_from_slice(&payload);
    fs::write(path, &bytes)?;
    Ok(bytes.len() as u64)
}

pub fn read_binary(path: &Path) -> Result<(u64, Vec<WeightedEdge>)> {
    let bytes = fs::read(path)?;
    if bytes.len() < 16 || &bytes[0..4] != MAGIC {
        return Err(Error::MalformedFile("missing MSTF header".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::MalformedFile(format!(
            "unsupported version {version}"
        )));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let edges = decode_edges(&bytes[16..])?;
    Ok((n, edges))
}

pub fn read_text(path: &Path) -> Result<Vec<(VertexId, VertexId, Weight)>> {
    let content = fs::read_to_string(path)?;
    let mut triples = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let parse = |field: Option<&str>| -> Result<u64> {
            field
                .ok_or_else(|| Error::MalformedFile(format!("line {}: expected `u v w`", lineno + 1)))?
                .parse::<u64>()
                .map_err(|e| Error::MalformedFile(format!("line {}: {e}", lineno + 1)))
        };
        let u = parse(fields.next())?;
        let v = parse(fields.next())?;
        let w = parse(fields.next())?;
        if w == 0 || w > Weight::MAX as u64 {
            return Err(Error::MalformedFile(format!(
                "line {}: weight must be in 1..=2^32-1",
                lineno + 1
            )));
        }
        triples.push((u, v, w as Weight));
    }
    Ok(triples)
}

/// Turns raw undirected triples into the canonical global edge sequence:
/// parallel edges collapse to the lightest (then lowest input position),
/// ids are assigned by the rank of the undirected edge in sorted order and
/// shared with the back edge, and the result is lexicographically sorted.
/// Returns `(max vertex label, directed edges)`.
pub fn build_global_edge_list(
    triples: &[(VertexId, VertexId, Weight)],
) -> Result<(u64, Vec<WeightedEdge>)> {
    let mut canonical: Vec<(VertexId, VertexId, Weight)> = Vec::with_capacity(triples.len());
    let mut n = 0;
    for &(u, v, w) in triples {
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if u == 0 || v == 0 {
            return Err(Error::MalformedFile("vertex labels start at 1".into()));
        }
        if w == 0 {
            return Err(Error::MalformedFile("weights start at 1".into()));
        }
        n = n.max(u).max(v);
        canonical.push((u.min(v), u.max(v), w));
    }
    canonical.sort_unstable();
    canonical.dedup_by_key(|&mut (lo, hi, _)| (lo, hi));

    let mut directed = Vec::with_capacity(canonical.len() * 2);
    for (id, &(lo, hi, w)) in canonical.iter().enumerate() {
        directed.push(WeightedEdge::new(lo, hi, w, id as u64));
        directed.push(WeightedEdge::new(hi, lo, w, id as u64));
    }
    sort_lexicographic(&mut directed);
    Ok((n, directed))
}

/// Contiguous, balanced slice of a global list for one rank.
pub fn slice_for_rank(total: usize, p: usize, rank: usize) -> std::ops::Range<usize> {
    let lo = total * rank / p;
    let hi = total * (rank + 1) / p;
    lo..hi
}
