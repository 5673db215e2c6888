use rand::Rng;

use crate::error::Error;
use crate::graph::Weight;
use crate::transport::Communicator;
use crate::Result;

use super::sort::distributed_sort;

/// Weight sample fraction used for pivot selection.
pub const PIVOT_SAMPLE_RATE: f64 = 0.01;

/// Global median of a random weight sample: every nonempty PE draws
/// `max(1, ceil(rate * local_count))` values with replacement, the samples
/// are sorted with the distributed sorter, and the element at
/// `floor(total / 2)` is broadcast from its owner. A rate of 1 or more uses
/// all local values.
pub fn sampled_median(
    values: &[Weight],
    sample_rate: f64,
    rng: &mut impl Rng,
    comm: &Communicator,
) -> Result<Weight> {
    let samples: Vec<Weight> = if values.is_empty() {
        Vec::new()
    } else if sample_rate >= 1.0 {
        values.to_vec()
    } else {
        let k = ((sample_rate * values.len() as f64).ceil() as usize).max(1);
        (0..k)
            .map(|_| values[rng.gen_range(0..values.len())])
            .collect()
    };
    let sorted = distributed_sort(samples, |w| *w, comm)?;

    let lens = comm.allgather(sorted.len() as u64)?;
    let total: u64 = lens.iter().sum();
    if total == 0 {
        return Err(Error::EmptyGlobalInput);
    }
    let target = total / 2;
    let mut offset = 0;
    let mut owner = 0;
    for (rank, &len) in lens.iter().enumerate() {
        if target < offset + len {
            owner = rank;
            break;
        }
        offset += len;
    }
    let value = if comm.rank() == owner {
        Some(sorted[(target - offset) as usize])
    } else {
        None
    };
    comm.broadcast(value, owner)
}
