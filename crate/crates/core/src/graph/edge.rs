/// Vertex label; real vertices are labeled `1..=n`.
pub type VertexId = u64;
/// Abstract edge cost, at least 1.
pub type Weight = u32;
/// Global edge identifier, shared by an edge and its back edge.
pub type EdgeId = u64;

/// Directed weighted edge, the universal unit of data movement. For every
/// input edge `(u, v, w)` the back edge `(v, u, w)` exists somewhere in the
/// distributed input carrying the same id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeightedEdge {
    pub src: VertexId,
    pub dst: VertexId,
    pub weight: Weight,
    pub id: EdgeId,
}

impl WeightedEdge {
    pub const fn new(src: VertexId, dst: VertexId, weight: Weight, id: EdgeId) -> Self {
        WeightedEdge {
            src,
            dst,
            weight,
            id,
        }
    }

    /// Marker for empty PEs in the replicated boundary arrays; compares
    /// greater than every real edge so binary search stays monotone.
    pub const SENTINEL: WeightedEdge =
        WeightedEdge::new(VertexId::MAX, VertexId::MAX, Weight::MAX, EdgeId::MAX);

    pub fn is_sentinel(&self) -> bool {
        self.src == VertexId::MAX && self.dst == VertexId::MAX
    }

    /// Key of the global lexicographic edge order.
    pub fn lex_key(&self) -> (VertexId, VertexId, Weight) {
        (self.src, self.dst, self.weight)
    }

    /// Tie-breaking key making the minimum spanning forest unique.
    pub fn total_order_key(&self) -> TotalOrderKey {
        let (lo, hi) = self.endpoints_lo_hi();
        TotalOrderKey {
            weight: self.weight,
            lo,
            hi,
            id: self.id,
        }
    }

    /// Contraction-stable comparison key. Ids are assigned as the global
    /// rank of the undirected edge in the initial sorted order, so for equal
    /// weights ascending id equals ascending (lo, hi) of the *original*
    /// endpoints; minimizing (weight, id) therefore selects the same edge as
    /// the [`TotalOrderKey`] on the uncontracted graph, no matter how often
    /// endpoints have been relabeled since.
    pub fn mst_key(&self) -> (Weight, EdgeId) {
        (self.weight, self.id)
    }

    pub fn reversed(&self) -> WeightedEdge {
        WeightedEdge::new(self.dst, self.src, self.weight, self.id)
    }

    pub fn endpoints_lo_hi(&self) -> (VertexId, VertexId) {
        if self.src <= self.dst {
            (self.src, self.dst)
        } else {
            (self.dst, self.src)
        }
    }
}

/// Strict total order over undirected edges: weight first, then the smaller
/// endpoint, then the larger one, with the edge id deciding between true
/// parallels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TotalOrderKey {
    pub weight: Weight,
    pub lo: VertexId,
    pub hi: VertexId,
    pub id: EdgeId,
}

/// Sorts a slice into the global lexicographic edge order.
pub fn sort_lexicographic(edges: &mut [WeightedEdge]) {
    edges.sort_unstable_by_key(|e| (e.src, e.dst, e.weight, e.id));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_order_is_symmetric_in_direction() {
        let e = WeightedEdge::new(9, 2, 5, 17);
        assert_eq!(e.total_order_key(), e.reversed().total_order_key());
        assert_eq!(e.total_order_key().lo, 2);
        assert_eq!(e.total_order_key().hi, 9);
    }

    #[test]
    fn sentinel_sorts_last() {
        let real = WeightedEdge::new(u64::MAX - 1, u64::MAX, u32::MAX, 0);
        assert!(real.lex_key() < WeightedEdge::SENTINEL.lex_key());
    }
}
