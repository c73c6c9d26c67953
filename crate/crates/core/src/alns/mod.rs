//! Adaptive large neighbourhood search.

mod bank;
mod config;
mod search;

pub use bank::{sa_accept, OperatorBank, OperatorList, OperatorState};
pub use config::{AlnsParams, SearchConfig};
pub use search::{
    initial_solution, run_alns, run_alns_observed, should_terminate, solve, AlnsOutcome,
    IterationInfo, Score, SearchTrace, TraceRow,
};
