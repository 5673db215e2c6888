//! Run reports: phase timings, communication statistics, verification
//! outcome. The JSON schema is stable; field order follows the struct.

use std::time::Instant;

use serde::Serialize;

use crate::transport::CommStats;

/// Algorithm phases named in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    LocalPreprocessing,
    MinEdges,
    Contraction,
    LabelExchange,
    Redistribute,
    BaseCase,
    Filter,
    PivotSelection,
    MstRedistribution,
}

/// Wall-clock seconds per phase, accumulated per rank.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PhaseTimes {
    pub local_preprocessing: f64,
    pub min_edges: f64,
    pub contraction: f64,
    pub label_exchange: f64,
    pub redistribute: f64,
    pub base_case: f64,
    pub filter: f64,
    pub pivot_selection: f64,
    pub mst_redistribution: f64,
}

impl PhaseTimes {
    fn slot(&mut self, phase: Phase) -> &mut f64 {
        match phase {
            Phase::LocalPreprocessing => &mut self.local_preprocessing,
            Phase::MinEdges => &mut self.min_edges,
            Phase::Contraction => &mut self.contraction,
            Phase::LabelExchange => &mut self.label_exchange,
            Phase::Redistribute => &mut self.redistribute,
            Phase::BaseCase => &mut self.base_case,
            Phase::Filter => &mut self.filter,
            Phase::PivotSelection => &mut self.pivot_selection,
            Phase::MstRedistribution => &mut self.mst_redistribution,
        }
    }

    /// Runs `f`, charging its wall time to `phase`.
    pub fn time<R>(&mut self, phase: Phase, f: impl FnOnce() -> R) -> R {
        let start = Instant::now();
        let out = f();
        *self.slot(phase) += start.elapsed().as_secs_f64();
        out
    }

    pub fn total(&self) -> f64 {
        self.local_preprocessing
            + self.min_edges
            + self.contraction
            + self.label_exchange
            + self.redistribute
            + self.base_case
            + self.filter
            + self.pivot_selection
            + self.mst_redistribution
    }

    pub fn max_with(&self, other: &PhaseTimes) -> PhaseTimes {
        PhaseTimes {
            local_preprocessing: self.local_preprocessing.max(other.local_preprocessing),
            min_edges: self.min_edges.max(other.min_edges),
            contraction: self.contraction.max(other.contraction),
            label_exchange: self.label_exchange.max(other.label_exchange),
            redistribute: self.redistribute.max(other.redistribute),
            base_case: self.base_case.max(other.base_case),
            filter: self.filter.max(other.filter),
            pivot_selection: self.pivot_selection.max(other.pivot_selection),
            mst_redistribution: self.mst_redistribution.max(other.mst_redistribution),
        }
    }
}

/// Everything one `run` invocation reports.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub algorithm: String,
    pub p: usize,
    pub graph: String,
    pub seed: u64,
    pub n: u64,
    /// Directed edge count of the input.
    pub m_directed: u64,
    pub msf_total_weight: u64,
    pub msf_edge_count: u64,
    pub rounds: u64,
    pub base_case_rounds: u64,
    pub filter_base_calls: u64,
    pub verified: Option<bool>,
    pub comm: CommStats,
    pub phase_seconds: PhaseTimes,
    pub total_seconds: f64,
    /// Input directed edges per second of total runtime.
    pub throughput_eps: f64,
}

impl RunReport {
    /// The report with every timing field zeroed; reruns with identical
    /// arguments must agree on this projection byte for byte.
    pub fn determinism_view(&self) -> RunReport {
        let mut view = self.clone();
        view.phase_seconds = PhaseTimes::default();
        view.total_seconds = 0.0;
        view.throughput_eps = 0.0;
        view
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
