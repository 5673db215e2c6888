//! Communication primitives layered on the transport: grid-indirect sparse
//! all-to-all, strategy selection, distributed sorting and pivot selection.

mod grid;
mod median;
mod sort;

pub use grid::{
    grid_intermediate, select_strategy, smart_alltoall, two_level_alltoall, AlltoallPolicy,
    AlltoallStrategy, GridCoords, GRID_BYTE_THRESHOLD,
};
pub use median::{sampled_median, PIVOT_SAMPLE_RATE};
pub use sort::{distributed_sort, global_dedup_by_key, HYPERCUBE_THRESHOLD, OVERSAMPLING};
