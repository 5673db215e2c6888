//! Delta-compressed edge list storage.
//!
//! Each record of a lexicographically sorted edge sequence is encoded as
//! four little-endian base-128 varints (continuation bit in the MSB):
//! `src - prev_src` (plain, sortedness makes it non-negative), `dst - src`
//! (zigzag), `weight` (plain) and `id - prev_id` (zigzag), with `prev_src`
//! and `prev_id` seeded to 0.

use crate::error::Error;
use crate::Result;

use super::edge::WeightedEdge;

const MAX_VARINT_BYTES: usize = 10;

pub fn write_uvarint(buf: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            buf.push(byte);
            return;
        }
        buf.push(byte | 0x80);
    }
}

pub fn read_uvarint(bytes: &[u8], pos: &mut usize) -> Result<u64> {
    let mut value = 0u64;
    let mut shift = 0u32;
    for i in 0..MAX_VARINT_BYTES {
        let Some(&byte) = bytes.get(*pos) else {
            return Err(Error::TruncatedStream);
        };
        *pos += 1;
        let payload = (byte & 0x7f) as u64;
        if i == MAX_VARINT_BYTES - 1 && payload > 1 {
            return Err(Error::ContinuationOverflow);
        }
        value |= payload << shift;
        if byte & 0x80 == 0 {
            return Ok(value);
        }
        shift += 7;
    }
    Err(Error::ContinuationOverflow)
}

/// zigzag(x) = (x << 1) XOR (x >> 63), arithmetic shift.
fn zigzag(x: i64) -> u64 {
    ((x << 1) ^ (x >> 63)) as u64
}

fn unzigzag(v: u64) -> i64 {
    ((v >> 1) as i64) ^ -((v & 1) as i64)
}

fn write_delta(buf: &mut Vec<u8>, value: u64, base: u64) {
    write_uvarint(buf, zigzag(value.wrapping_sub(base) as i64));
}

fn read_delta(bytes: &[u8], pos: &mut usize, base: u64) -> Result<u64> {
    Ok(base.wrapping_add(unzigzag(read_uvarint(bytes, pos)?) as u64))
}

/// Encodes a `(src, dst, weight)`-sorted edge sequence.
pub fn encode_edges(edges: &[WeightedEdge]) -> Result<Vec<u8>> {
    let mut buf = Vec::with_capacity(edges.len() * 6);
    let mut prev_src = 0u64;
    let mut prev_id = 0u64;
    for pair in edges.windows(2) {
        if pair[0].lex_key() > pair[1].lex_key() {
            return Err(Error::UnsortedInput);
        }
    }
    for e in edges {
        write_uvarint(&mut buf, e.src - prev_src);
        write_delta(&mut buf, e.dst, e.src);
        write_uvarint(&mut buf, e.weight as u64);
        write_delta(&mut buf, e.id, prev_id);
        prev_src = e.src;
        prev_id = e.id;
    }
    Ok(buf)
}

/// Exact inverse of [`encode_edges`].
pub fn decode_edges(bytes: &[u8]) -> Result<Vec<WeightedEdge>> {
    let mut edges = Vec::new();
    let mut pos = 0;
    let mut prev_src = 0u64;
    let mut prev_id = 0u64;
    while pos < bytes.len() {
        let src = prev_src + read_uvarint(bytes, &mut pos)?;
        let dst = read_delta(bytes, &mut pos, src)?;
        let weight = read_uvarint(bytes, &mut pos)? as u32;
        let id = read_delta(bytes, &mut pos, prev_id)?;
        edges.push(WeightedEdge::new(src, dst, weight, id));
        prev_src = src;
        prev_id = id;
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::edge::sort_lexicographic;

    #[test]
    fn uvarint_300_is_two_bytes() {
        let mut buf = Vec::new();
        write_uvarint(&mut buf, 300);
        assert_eq!(buf, vec![0xAC, 0x02]);
    }

    #[test]
    fn first_record_fields() {
        let edges = [WeightedEdge::new(3, 5, 1, 0)];
        let bytes = encode_edges(&edges).unwrap();
        // src delta 3, zigzag(5 - 3) = 4
        assert_eq!(bytes[0], 0x03);
        assert_eq!(bytes[1], 0x04);
    }

    #[test]
    fn empty_stream_round_trips() {
        assert_eq!(encode_edges(&[]).unwrap(), Vec::<u8>::new());
        assert!(decode_edges(&[]).unwrap().is_empty());
    }

    #[test]
    fn unsorted_input_is_rejected() {
        let edges = [WeightedEdge::new(5, 1, 1, 0), WeightedEdge::new(3, 1, 1, 1)];
        assert!(matches!(encode_edges(&edges), Err(Error::UnsortedInput)));
    }

    #[test]
    fn truncated_stream_is_rejected() {
        let edges = [WeightedEdge::new(3, 5, 7, 2)];
        let bytes = encode_edges(&edges).unwrap();
        for cut in 1..bytes.len() {
            assert!(matches!(
                decode_edges(&bytes[..cut]),
                Err(Error::TruncatedStream)
            ));
        }
    }

    #[test]
    fn overlong_varint_is_rejected() {
        let bytes = [0xff; 11];
        let mut pos = 0;
        assert!(matches!(
            read_uvarint(&bytes, &mut pos),
            Err(Error::ContinuationOverflow)
        ));
    }

    #[test]
    fn extreme_values_round_trip() {
        let edges = vec![
            WeightedEdge::new(1, u64::MAX, u32::MAX, u64::MAX),
            WeightedEdge::new(u64::MAX - 1, 1, 1, 0),
        ];
        let decoded = decode_edges(&encode_edges(&edges).unwrap()).unwrap();
        assert_eq!(decoded, edges);
    }

    #[test]
    fn random_sorted_edges_round_trip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut edges: Vec<WeightedEdge> = (0..1000)
            .map(|i| {
                WeightedEdge::new(
                    rng.gen_range(1..5000),
                    rng.gen_range(1..5000),
                    rng.gen_range(1..255),
                    i,
                )
            })
            .collect();
        sort_lexicographic(&mut edges);
        let decoded = decode_edges(&encode_edges(&edges).unwrap()).unwrap();
        assert_eq!(decoded, edges);
    }
}
