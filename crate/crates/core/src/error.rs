use thiserror::Error;

/// Errors raised anywhere in the engine.
///
/// A single enum keeps error plumbing through the SPMD runtime simple: rank
/// programs return `Result<T, Error>` and the runtime propagates the first
/// failing rank's error.
#[derive(Debug, Error)]
pub enum Error {
    // --- graph model ---
    #[error("local edge slice is not sorted at index {index}")]
    LocalOrderViolation { index: usize },
    #[error("global edge order violated between ranks {left} and {right}")]
    GlobalOrderViolation { left: usize, right: usize },
    #[error("edge input is not sorted")]
    UnsortedInput,
    #[error("varint stream ended mid-value")]
    TruncatedStream,
    #[error("varint continuation exceeds 10 bytes")]
    ContinuationOverflow,
    #[error("vertex {0} does not occur on this rank")]
    UnknownVertex(u64),
    #[error("edge list contains a self loop {0}-{0}")]
    SelfLoop(u64),

    // --- transport ---
    #[error("rank {rank} failed: {message}")]
    PeFailure { rank: usize, message: String },
    #[error("collective mismatch or abandoned rendezvous: {0}")]
    DeadlockDetected(String),
    #[error("allreduce vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    // --- comm primitives ---
    #[error("no values available for global median")]
    EmptyGlobalInput,

    // --- boruvka ---
    #[error("label missing for ghost vertex {0}")]
    MissingGhostLabel(u64),
    #[error("vertex {0} has no label")]
    UnlabeledVertex(u64),
    #[error("base case entered with {count} vertices above threshold {threshold}")]
    VertexCountOverThreshold { count: u64, threshold: u64 },
    #[error("edge id {0} not found on its home rank")]
    UnknownEdgeId(u64),

    // --- filter ---
    #[error("parent array index {index} out of range for n = {n}")]
    IndexOutOfRange { index: u64, n: u64 },
    #[error("parent compression did not converge (corrupted parent array)")]
    CycleDetected,

    // --- oracle ---
    #[error("unknown edge id {0} in candidate set")]
    UnknownId(u64),

    // --- cli / io ---
    #[error("invalid generator or run spec: {0}")]
    InvalidSpec(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed input file: {0}")]
    MalformedFile(String),
}
