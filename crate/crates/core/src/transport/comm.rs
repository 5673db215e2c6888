use std::cell::RefCell;
use std::rc::Rc;
use std::sync::Arc;

use crate::error::Error;
use crate::Result;

use super::cell::{Cell, Liveness};
use super::stats::CommStats;

pub(crate) struct Group {
    pub size: usize,
    /// World ranks of the members, indexed by group rank.
    pub members: Vec<usize>,
    pub cell: Cell,
}

impl Group {
    pub fn new(members: Vec<usize>) -> Self {
        Group {
            size: members.len(),
            cell: Cell::new(members.clone()),
            members,
        }
    }
}

/// Handle to one PE's view of a communicator.
///
/// Every collective must be entered by all members in the same program
/// order; the runtime detects mismatches and abandoned rendezvous instead
/// of deadlocking. Results of a collective are identical on all ranks
/// (element order fixed by ascending rank), which is what makes whole runs
/// reproducible.
pub struct Communicator {
    group: Arc<Group>,
    rank: usize,
    liveness: Arc<Liveness>,
    stats: Rc<RefCell<CommStats>>,
}

impl Communicator {
    pub(crate) fn new(
        group: Arc<Group>,
        rank: usize,
        liveness: Arc<Liveness>,
        stats: Rc<RefCell<CommStats>>,
    ) -> Self {
        Communicator {
            group,
            rank,
            liveness,
            stats,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn size(&self) -> usize {
        self.group.size
    }

    pub fn stats(&self) -> CommStats {
        self.stats.borrow().clone()
    }

    fn exchange<T, R, F>(&self, kind: &'static str, input: T, combine: F) -> Result<R>
    where
        T: Send + 'static,
        R: Send + 'static,
        F: FnOnce(Vec<T>) -> Vec<R>,
    {
        self.group
            .cell
            .exchange(self.rank, kind, input, combine, &self.liveness)
    }

    /// Personalized sparse all-to-all. `batches[j]` holds the records for
    /// rank `j`; the result at rank `j` holds, per sender in ascending rank
    /// order, exactly the records addressed to `j` in the sender's order.
    pub fn alltoallv<T: Send + 'static>(&self, batches: Vec<Vec<T>>) -> Result<Vec<Vec<T>>> {
        let p = self.size();
        assert_eq!(batches.len(), p, "one batch per destination rank");
        {
            let mut stats = self.stats.borrow_mut();
            let dests = batches.iter().filter(|b| !b.is_empty()).count() as u64;
            let records: u64 = batches.iter().map(|b| b.len() as u64).sum();
            let bytes = records * std::mem::size_of::<T>() as u64;
            stats.record_exchange(dests, records, bytes);
        }
        self.exchange("alltoallv", batches, move |mut deposits| {
            let mut results: Vec<Vec<Vec<T>>> = (0..p).map(|_| Vec::with_capacity(p)).collect();
            for sender in deposits.iter_mut() {
                for (dest, records) in sender.drain(..).enumerate() {
                    results[dest].push(records);
                }
            }
            results
        })
    }

    /// Element-wise reduction of equal-length vectors; `op` is folded over
    /// ranks in ascending order and must be associative for the result to be
    /// meaningful. All ranks receive the reduced vector.
    pub fn allreduce_vec<T, F>(&self, values: Vec<T>, op: F) -> Result<Vec<T>>
    where
        T: Clone + Send + 'static,
        F: Fn(&T, &T) -> T,
    {
        self.stats.borrow_mut().allreduce_calls += 1;
        let p = self.size();
        let reduced: std::result::Result<Arc<Vec<T>>, (usize, usize)> =
            self.exchange("allreduce", values, move |deposits| {
                let mut iter = deposits.into_iter();
                let mut acc = iter.next().expect("p >= 1");
                for v in iter {
                    if acc.len() != v.len() {
                        let err = Err((acc.len(), v.len()));
                        return (0..p).map(|_| err.clone()).collect();
                    }
                    acc = acc.iter().zip(v.iter()).map(|(x, y)| op(x, y)).collect();
                }
                let shared = Ok(Arc::new(acc));
                (0..p).map(|_| shared.clone()).collect()
            })?;
        match reduced {
            Ok(v) => Ok((*v).clone()),
            Err((a, b)) => Err(Error::LengthMismatch(a, b)),
        }
    }

    pub fn allreduce_sum(&self, value: u64) -> Result<u64> {
        Ok(self.allreduce_vec(vec![value], |a, b| a + b)?[0])
    }

    pub fn allreduce_max(&self, value: u64) -> Result<u64> {
        Ok(self.allreduce_vec(vec![value], |a, b| *a.max(b))?[0])
    }

    pub fn allreduce_min(&self, value: u64) -> Result<u64> {
        Ok(self.allreduce_vec(vec![value], |a, b| *a.min(b))?[0])
    }

    pub fn allreduce_or(&self, value: bool) -> Result<bool> {
        Ok(self.allreduce_vec(vec![value], |a, b| *a || *b)?[0])
    }

    /// Concatenation of all contributions in rank order, replicated.
    pub fn allgatherv<T: Clone + Send + 'static>(&self, local: Vec<T>) -> Result<Vec<T>> {
        self.stats.borrow_mut().allgather_calls += 1;
        let p = self.size();
        let gathered: Arc<Vec<T>> = self.exchange("allgatherv", local, move |deposits| {
            let shared = Arc::new(deposits.into_iter().flatten().collect::<Vec<T>>());
            (0..p).map(|_| shared.clone()).collect()
        })?;
        Ok((*gathered).clone())
    }

    /// One value per rank, replicated in rank order.
    pub fn allgather<T: Clone + Send + 'static>(&self, value: T) -> Result<Vec<T>> {
        self.allgatherv(vec![value])
    }

    /// `Some(value)` must be passed exactly at `root`.
    pub fn broadcast<T: Clone + Send + 'static>(&self, value: Option<T>, root: usize) -> Result<T> {
        self.stats.borrow_mut().broadcast_calls += 1;
        let p = self.size();
        debug_assert!((self.rank == root) == value.is_some());
        let out: Arc<T> = self.exchange("broadcast", value, move |mut deposits| {
            let v = deposits[root].take().expect("root supplied no value");
            let shared = Arc::new(v);
            (0..p).map(|_| shared.clone()).collect()
        })?;
        Ok((*out).clone())
    }

    /// Exclusive prefix sum over ranks; also returns the global total.
    pub fn exclusive_prefix_sum(&self, value: u64) -> Result<(u64, u64)> {
        self.stats.borrow_mut().prefix_sum_calls += 1;
        self.exchange("prefix_sum", value, move |deposits| {
            let total: u64 = deposits.iter().sum();
            let mut acc = 0;
            deposits
                .iter()
                .map(|v| {
                    let before = acc;
                    acc += v;
                    (before, total)
                })
                .collect()
        })
    }

    pub fn barrier(&self) -> Result<()> {
        let p = self.size();
        self.stats.borrow_mut().barrier_calls += 1;
        self.exchange("barrier", (), move |_| vec![(); p])
    }

    /// Splits the communicator into disjoint sub-communicators, one per
    /// `color`; members are ranked by `(key, old rank)` within each color.
    pub fn split(&self, color: usize, key: usize) -> Result<Communicator> {
        self.stats.borrow_mut().split_calls += 1;
        let p = self.size();
        let parent_members = self.group.members.clone();
        let (group, new_rank): (Arc<Group>, usize) =
            self.exchange("split", (color, key), move |deposits| {
                let mut order: Vec<(usize, usize, usize)> = deposits
                    .iter()
                    .enumerate()
                    .map(|(rank, &(color, key))| (color, key, rank))
                    .collect();
                order.sort_unstable();
                let mut results: Vec<Option<(Arc<Group>, usize)>> = (0..p).map(|_| None).collect();
                let mut i = 0;
                while i < order.len() {
                    let color = order[i].0;
                    let mut local_ranks = Vec::new();
                    let mut j = i;
                    while j < order.len() && order[j].0 == color {
                        local_ranks.push(order[j].2);
                        j += 1;
                    }
                    let world = local_ranks.iter().map(|&r| parent_members[r]).collect();
                    let group = Arc::new(Group::new(world));
                    for (new_rank, &old_rank) in local_ranks.iter().enumerate() {
                        results[old_rank] = Some((group.clone(), new_rank));
                    }
                    i = j;
                }
                results
                    .into_iter()
                    .map(|r| r.expect("rank grouped"))
                    .collect()
            })?;
        Ok(Communicator::new(
            group,
            new_rank,
            self.liveness.clone(),
            self.stats.clone(),
        ))
    }
}
