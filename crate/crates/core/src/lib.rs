//! Multi-purpose pickup and delivery with exchangeable vehicle modules.
//!
//! Platforms carry one passenger or freight module at a time and may swap it
//! at service depots. The crate provides the instance model on the expanded
//! node graph, a feasibility checker and evaluator, an adaptive large
//! neighbourhood search, an LP exporter with an exact oracle for small
//! instances, and the scenario generator used for batch studies.

pub mod alns;
pub mod destroy;
pub mod ensemble;
pub mod instance;
pub mod milp;
pub mod repair;
pub mod report;
pub mod scenario;
pub mod solution;

pub use instance::{
    CostParams, DepotSpec, FleetParams, Instance, InstanceError, InstanceSpec, NodeClass,
    NodeIndexLayout, RequestKind, RequestSpec, ServiceDepotSpec, TimeWindow,
};
pub use solution::{
    check_feasibility, evaluate, FeasibilityReport, ObjectiveBreakdown, Route, Solution,
};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("schema: {0}")]
    Schema(String),
    /// Instance exceeds the size cap of an exhaustive routine.
    #[error("guard: {0}")]
    Guard(String),
    #[error("infeasible solution:\n{0}")]
    Infeasible(FeasibilityReport),
    #[error("solver output: {0}")]
    Import(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
