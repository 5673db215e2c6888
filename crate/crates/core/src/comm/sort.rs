//! Distributed comparison sort.
//!
//! Small inputs (average below 512 elements per PE) go through a recursive
//! quicksort that halves the communicator like a hypercube dimension per
//! level; larger inputs use single-level sample sort with regular sampling,
//! the splitters taken from a recursively sorted sample. Every element is
//! tagged with its origin `(rank, index)` so keys are globally distinct and
//! duplicate-heavy inputs still split evenly. The result is globally sorted
//! and rebalanced to exact slices.

use crate::transport::Communicator;
use crate::Result;

/// Average elements per PE below which the quicksort path is used.
pub const HYPERCUBE_THRESHOLD: u64 = 512;
/// Samples per PE for splitter selection.
pub const OVERSAMPLING: usize = 16;

struct Tagged<K, T> {
    key: (K, u32, u64),
    value: T,
}

/// Sorts the union of all ranks' `local` sequences by `key_fn`; ties broken
/// by origin rank and index. Returns this rank's slice of the globally
/// sorted sequence, balanced to within one element of `total / p`.
pub fn distributed_sort<T, K, F>(
    local: Vec<T>,
    key_fn: F,
    comm: &Communicator,
) -> Result<Vec<T>>
where
    T: Send + 'static,
    K: Ord + Clone + Send + 'static,
    F: Fn(&T) -> K,
{
    let rank = comm.rank() as u32;
    let tagged: Vec<Tagged<K, T>> = local
        .into_iter()
        .enumerate()
        .map(|(idx, value)| Tagged {
            key: (key_fn(&value), rank, idx as u64),
            value,
        })
        .collect();
    let total = comm.allreduce_sum(tagged.len() as u64)?;
    let sorted = if total == 0 {
        tagged
    } else if total / comm.size() as u64 < HYPERCUBE_THRESHOLD {
        hypercube_sort(tagged, comm)?
    } else {
        sample_sort(tagged, comm)?
    };
    let balanced = rebalance(sorted, comm)?;
    Ok(balanced.into_iter().map(|t| t.value).collect())
}

fn local_sort<K: Ord, T>(items: &mut [Tagged<K, T>]) {
    items.sort_unstable_by(|a, b| a.key.cmp(&b.key));
}

/// Up to eight evenly spaced keys of a locally sorted sequence.
fn probe_keys<K: Clone, T>(items: &[Tagged<K, T>]) -> Vec<(K, u32, u64)> {
    let n = items.len();
    if n == 0 {
        return Vec::new();
    }
    let count = n.min(8);
    (0..count)
        .map(|i| items[i * n / count].key.clone())
        .collect()
}

fn hypercube_sort<K, T>(
    mut items: Vec<Tagged<K, T>>,
    comm: &Communicator,
) -> Result<Vec<Tagged<K, T>>>
where
    K: Ord + Clone + Send + 'static,
    T: Send + 'static,
{
    local_sort(&mut items);
    let p = comm.size();
    if p == 1 {
        return Ok(items);
    }
    let mut probes = comm.allgatherv(probe_keys(&items))?;
    let h = p / 2;
    let side = usize::from(comm.rank() >= h);
    if probes.is_empty() {
        // Whole group empty; keep the collective schedule aligned.
        let sub = comm.split(side, comm.rank())?;
        return hypercube_sort(items, &sub);
    }
    probes.sort_unstable();
    let pivot = probes[probes.len() / 2].clone();

    let cut = items.partition_point(|t| t.key <= pivot);
    let high = items.split_off(cut);
    let low = items;
    let mut batches: Vec<Vec<Tagged<K, T>>> = (0..p).map(|_| Vec::new()).collect();
    batches[comm.rank() % h] = low;
    batches[h + comm.rank() % (p - h)] = high;
    let received = comm.alltoallv(batches)?;
    let mine: Vec<Tagged<K, T>> = received.into_iter().flatten().collect();

    let sub = comm.split(side, comm.rank())?;
    hypercube_sort(mine, &sub)
}

fn sample_sort<K, T>(
    mut items: Vec<Tagged<K, T>>,
    comm: &Communicator,
) -> Result<Vec<Tagged<K, T>>>
where
    K: Ord + Clone + Send + 'static,
    T: Send + 'static,
{
    local_sort(&mut items);
    let p = comm.size();

    let samples: Vec<(K, u32, u64)> = if items.is_empty() {
        Vec::new()
    } else {
        (0..OVERSAMPLING)
            .map(|i| items[i * items.len() / OVERSAMPLING].key.clone())
            .collect()
    };
    let sorted_samples = hypercube_sort(
        samples
            .into_iter()
            .enumerate()
            .map(|(idx, key)| Tagged {
                key: (key, comm.rank() as u32, idx as u64),
                value: (),
            })
            .collect(),
        comm,
    )?;

    // Global sample positions total*r/p for r in 1..p become the splitters.
    let lens = comm.allgather(sorted_samples.len() as u64)?;
    let total: u64 = lens.iter().sum();
    let offset: u64 = lens[..comm.rank()].iter().sum();
    let mut owned_splitters: Vec<(u64, (K, u32, u64))> = Vec::new();
    for r in 1..p as u64 {
        let target = total * r / p as u64;
        if target >= offset && target < offset + sorted_samples.len() as u64 {
            let key = sorted_samples[(target - offset) as usize].key.0.clone();
            owned_splitters.push((r, key));
        }
    }
    let mut splitters = comm.allgatherv(owned_splitters)?;
    splitters.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let splitters: Vec<(K, u32, u64)> = splitters.into_iter().map(|(_, k)| k).collect();

    // items are sorted, so buckets are contiguous slices.
    let mut batches: Vec<Vec<Tagged<K, T>>> = Vec::with_capacity(p);
    let mut rest = items;
    for splitter in &splitters {
        let cut = rest.partition_point(|t| t.key <= *splitter);
        let tail = rest.split_off(cut);
        batches.push(rest);
        rest = tail;
    }
    batches.push(rest);
    debug_assert_eq!(batches.len(), p);

    let received = comm.alltoallv(batches)?;
    let mut mine: Vec<Tagged<K, T>> = received.into_iter().flatten().collect();
    local_sort(&mut mine);
    Ok(mine)
}

/// Keeps the first element of every key-run of a globally sorted sequence.
/// Runs straddling slice boundaries are resolved from one allgather of the
/// boundary keys: a rank drops its leading run when the nearest earlier
/// nonempty rank ends in the same key, so exactly the globally first element
/// of each run survives.
pub fn global_dedup_by_key<T, K, F>(
    mut local: Vec<T>,
    key_fn: F,
    comm: &Communicator,
) -> Result<Vec<T>>
where
    T: Send + 'static,
    K: Eq + Clone + Send + 'static,
    F: Fn(&T) -> K,
{
    local.dedup_by_key(|t| key_fn(t));
    let bounds: Vec<Option<(K, K)>> = comm.allgather(
        local
            .first()
            .map(|f| (key_fn(f), key_fn(local.last().expect("nonempty")))),
    )?;
    if let Some(first) = local.first() {
        let my_first = key_fn(first);
        let prev_last = bounds[..comm.rank()]
            .iter()
            .rev()
            .find_map(|b| b.as_ref().map(|(_, last)| last.clone()));
        if prev_last == Some(my_first) {
            local.remove(0);
        }
    }
    Ok(local)
}

/// Redistributes already globally sorted rank slices so rank `r` holds the
/// global index range `[total*r/p, total*(r+1)/p)`.
fn rebalance<K, T>(items: Vec<Tagged<K, T>>, comm: &Communicator) -> Result<Vec<Tagged<K, T>>>
where
    K: Ord + Clone + Send + 'static,
    T: Send + 'static,
{
    let p = comm.size();
    let len = items.len() as u64;
    let (offset, total) = comm.exclusive_prefix_sum(len)?;
    let mut batches: Vec<Vec<Tagged<K, T>>> = (0..p).map(|_| Vec::new()).collect();
    let mut iter = items.into_iter();
    for (r, batch) in batches.iter_mut().enumerate() {
        let lo = (total * r as u64 / p as u64).max(offset);
        let hi = (total * (r as u64 + 1) / p as u64).min(offset + len);
        if hi > lo {
            batch.extend(iter.by_ref().take((hi - lo) as usize));
        }
    }
    debug_assert!(iter.next().is_none());
    let received = comm.alltoallv(batches)?;
    Ok(received.into_iter().flatten().collect())
}
