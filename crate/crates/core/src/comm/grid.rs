//! Two-level sparse all-to-all over a virtual PE grid.
//!
//! For exchanges with small messages the direct all-to-all pays up to `p`
//! startups per PE. Arranging the PEs in a `c = floor(sqrt(p))` column grid
//! and routing every record over one intermediate hop caps the number of
//! communication partners per phase at about `sqrt(p)` for the price of a
//! doubled volume.

use crate::transport::Communicator;
use crate::Result;

/// Grid geometry for `p` ranks: `c = floor(sqrt(p))` columns and
/// `r = ceil(p / c)` rows, with `c <= r <= c + 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridCoords {
    pub p: usize,
    pub columns: usize,
    pub rows: usize,
}

impl GridCoords {
    pub fn new(p: usize) -> Self {
        assert!(p >= 1);
        let columns = (p as f64).sqrt().floor() as usize;
        let columns = columns.max(1);
        let rows = p.div_ceil(columns);
        debug_assert!(columns <= rows && rows <= columns + 2);
        GridCoords { p, columns, rows }
    }

    pub fn column(&self, rank: usize) -> usize {
        rank % self.columns
    }

    pub fn row(&self, rank: usize) -> usize {
        rank / self.columns
    }

    /// Whether `rank` lies in an incomplete last row.
    pub fn in_incomplete_row(&self, rank: usize) -> bool {
        self.p % self.columns != 0 && self.row(rank) == self.rows - 1
    }
}

/// Intermediate rank for a record from `i` to `j`: the PE in row `row(j)`
/// and column `column(i)`. When `j` lies in an incomplete last row the
/// intermediate sits in row `column(j)` instead, and `j` is virtually
/// appended to that row for the second exchange.
pub fn grid_intermediate(i: usize, j: usize, p: usize) -> usize {
    let g = GridCoords::new(p);
    let row = if g.in_incomplete_row(j) {
        g.column(j)
    } else {
        g.row(j)
    };
    row * g.columns + g.column(i)
}

/// Group label for the second exchange: complete rows stay together and
/// each incomplete-row member joins the row matching its column.
fn phase2_row(rank: usize, g: &GridCoords) -> usize {
    if g.in_incomplete_row(rank) {
        g.column(rank)
    } else {
        g.row(rank)
    }
}

struct Routed<T> {
    dest: u32,
    sender: u32,
    payload: T,
}

/// Batch exchange through one intermediate hop; delivers record-for-record
/// the same result as [`Communicator::alltoallv`], final order restored from
/// the sender tag carried with each record.
pub fn two_level_alltoall<T: Send + 'static>(
    batch: Vec<Vec<T>>,
    comm: &Communicator,
) -> Result<Vec<Vec<T>>> {
    let p = comm.size();
    assert_eq!(batch.len(), p);
    let g = GridCoords::new(p);
    let me = comm.rank();

    // Column groups carry phase 1, augmented row groups phase 2. Building
    // both up front keeps split() in program order on every rank.
    let column_comm = comm.split(g.column(me), me)?;
    let row_comm = comm.split(phase2_row(me, &g), me)?;

    // Phase 1: send each record to the intermediate in my column.
    let mut phase1: Vec<Vec<Routed<T>>> = (0..column_comm.size()).map(|_| Vec::new()).collect();
    // Rank t in my column has global rank row(t) * c + column(me); its rank
    // inside the column communicator is its row (split keyed by rank).
    for (dest, records) in batch.into_iter().enumerate() {
        if records.is_empty() {
            continue;
        }
        let inter = grid_intermediate(me, dest, p);
        let inter_in_column = g.row(inter);
        for payload in records {
            phase1[inter_in_column].push(Routed {
                dest: dest as u32,
                sender: me as u32,
                payload,
            });
        }
    }
    let received = column_comm.alltoallv(phase1)?;

    // Phase 2: forward to final destinations inside the augmented row.
    let row_members = row_comm.allgather(me)?;
    let global_to_row: std::collections::HashMap<usize, usize> = row_members
        .iter()
        .enumerate()
        .map(|(row_rank, &global)| (global, row_rank))
        .collect();
    let mut phase2: Vec<Vec<Routed<T>>> = (0..row_comm.size()).map(|_| Vec::new()).collect();
    for sender_records in received {
        for record in sender_records {
            let row_rank = *global_to_row
                .get(&(record.dest as usize))
                .expect("intermediate shares a row with the destination");
            phase2[row_rank].push(record);
        }
    }
    let landed = row_comm.alltoallv(phase2)?;

    // Restore the per-original-sender layout. All records of one sender pass
    // through a single intermediate, so concatenating in intermediate order
    // keeps each sender's send order intact.
    let mut result: Vec<Vec<T>> = (0..p).map(|_| Vec::new()).collect();
    for intermediate_records in landed {
        for record in intermediate_records {
            debug_assert_eq!(record.dest as usize, me);
            result[record.sender as usize].push(record.payload);
        }
    }
    Ok(result)
}

/// How a batch exchange is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlltoallStrategy {
    Direct,
    TwoLevelGrid,
}

/// Caller override for strategy selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlltoallPolicy {
    /// Grid when the global average message is small, direct otherwise.
    #[default]
    Auto,
    ForceDirect,
    ForceGrid,
}

/// Bytes per message below which indirect delivery pays off.
pub const GRID_BYTE_THRESHOLD: u64 = 500;

/// Picks the strategy all ranks will use; the average is taken over global
/// counts with one allreduce so every rank decides identically.
pub fn select_strategy<T>(
    batch: &[Vec<T>],
    policy: AlltoallPolicy,
    comm: &Communicator,
) -> Result<AlltoallStrategy> {
    match policy {
        AlltoallPolicy::ForceDirect => return Ok(AlltoallStrategy::Direct),
        AlltoallPolicy::ForceGrid => return Ok(AlltoallStrategy::TwoLevelGrid),
        AlltoallPolicy::Auto => {}
    }
    if comm.size() < 4 {
        return Ok(AlltoallStrategy::Direct);
    }
    let record = std::mem::size_of::<T>() as u64;
    let local_bytes: u64 = batch.iter().map(|b| b.len() as u64 * record).sum();
    let local_msgs = batch.iter().filter(|b| !b.is_empty()).count() as u64;
    let totals = comm.allreduce_vec(vec![local_bytes, local_msgs], |a, b| a + b)?;
    let (bytes, msgs) = (totals[0], totals[1]);
    if msgs > 0 && bytes / msgs < GRID_BYTE_THRESHOLD {
        Ok(AlltoallStrategy::TwoLevelGrid)
    } else {
        Ok(AlltoallStrategy::Direct)
    }
}

/// Batch exchange with automatic strategy selection. The result equals the
/// direct exchange either way.
pub fn smart_alltoall<T: Send + 'static>(
    batch: Vec<Vec<T>>,
    policy: AlltoallPolicy,
    comm: &Communicator,
) -> Result<Vec<Vec<T>>> {
    match select_strategy(&batch, policy, comm)? {
        AlltoallStrategy::Direct => comm.alltoallv(batch),
        AlltoallStrategy::TwoLevelGrid => two_level_alltoall(batch, comm),
    }
}
