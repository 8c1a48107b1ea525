//! Per-round primitive selection against the depth memory, and the
//! fixed-rate loop that commits primitives with their stops.

mod config;
mod round;
mod runner;

use thiserror::Error;

use crate::primitives::PrimitiveError;

pub use config::{Evaluation, PlannerConfig, UnknownPolicy};
pub use round::{
    check_primitive, cost, plan_round, CandidateDiagnostics, CandidateVerdict, CheckResult,
    DecisionKind, InfeasibleReason, PlanDecision, Segment,
};
pub use runner::{
    ForwardArcPlanner, LocalPlanner, PlanInput, PlanningLoop, RoundRecord, StepOutcome,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlannerError {
    #[error("invalid planner configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Primitive(#[from] PrimitiveError),
}
