use serde::Serialize;

/// Communication counters kept per PE.
///
/// Counters are monotone within a run and deterministic for fixed inputs,
/// which makes them usable both for startup-cost accounting and for
/// "this step must not communicate" assertions in tests.
#[derive(Debug, Default, Clone, PartialEq, Eq, Serialize)]
pub struct CommStats {
    /// Nonempty destination buffers over all batch exchanges.
    pub messages_sent: u64,
    /// Records handed to batch exchanges.
    pub records_sent: u64,
    /// Payload bytes handed to batch exchanges.
    pub bytes_sent: u64,
    pub alltoallv_calls: u64,
    pub allreduce_calls: u64,
    pub allgather_calls: u64,
    pub broadcast_calls: u64,
    pub prefix_sum_calls: u64,
    pub barrier_calls: u64,
    pub split_calls: u64,
    /// Batch exchanges routed through the two-level grid.
    pub grid_alltoall_calls: u64,
    /// Largest number of distinct destinations in any single exchange.
    pub max_exchange_dests: u64,
}

impl CommStats {
    pub fn record_exchange(&mut self, dests: u64, records: u64, bytes: u64) {
        self.alltoallv_calls += 1;
        self.messages_sent += dests;
        self.records_sent += records;
        self.bytes_sent += bytes;
        self.max_exchange_dests = self.max_exchange_dests.max(dests);
    }

    /// Element-wise sum, used to aggregate per-rank stats into a run report.
    pub fn merge(&mut self, other: &CommStats) {
        self.messages_sent += other.messages_sent;
        self.records_sent += other.records_sent;
        self.bytes_sent += other.bytes_sent;
        self.alltoallv_calls += other.alltoallv_calls;
        self.allreduce_calls += other.allreduce_calls;
        self.allgather_calls += other.allgather_calls;
        self.broadcast_calls += other.broadcast_calls;
        self.prefix_sum_calls += other.prefix_sum_calls;
        self.barrier_calls += other.barrier_calls;
        self.split_calls += other.split_calls;
        self.grid_alltoall_calls += other.grid_alltoall_calls;
        self.max_exchange_dests = self.max_exchange_dests.max(other.max_exchange_dests);
    }
}
