//! Vehicle-to-rescue-point allocation.
//!
//! Minimizes total travel time subject to every served point receiving at
//! least its seat-equivalent demand, each vehicle going to at most one point.

mod exact;
mod greedy;
mod instance;
mod oracle;
mod plan;
mod shelters;

use thiserror::Error;

pub use exact::{prune_dominated, solve_exact, DEFAULT_EXACT_CAP};
pub use greedy::solve_greedy;
pub use instance::{
    build_instance, seat_demand, AllocationInstance, BuiltInstance, Notice, PointDemand, ResourceSupply,
    NON_AMBULATORY_SEATS,
};
pub use oracle::{brute_force_oracle, ORACLE_LIMIT};
pub use plan::{AllocationPlan, AssignedResource, PlanStatus, PointAllocation, SolverKind, COST_EPS};
pub use shelters::{
    assign_shelters, ShelterAllocation, ShelterAssignment, ShelterDemand, ShelterOccupancy, Shortfall,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AllocError {
    #[error("travel-time matrix does not match {points} points by {resources} resources")]
    Shape { points: usize, resources: usize },
    #[error("{0}: rescue point needs at least one evacuee and a priority of 1 or more")]
    InvalidPoint(String),
    #[error("travel times must be finite and non-negative")]
    InvalidTime,
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("no travel times for {0}")]
    MissingTimes(String),
    #[error("{vehicles} candidate vehicles exceed the exact solver cap of {cap}")]
    InstanceTooLarge { vehicles: usize, cap: usize },
    #[error("{assignments} assignments exceed the oracle limit")]
    OracleTooLarge { assignments: u64 },
}

impl AllocError {
    pub fn code(&self) -> &'static str {
        match self {
            AllocError::Shape { .. } => "shape_mismatch",
            AllocError::InvalidPoint(_) => "invalid_point",
            AllocError::InvalidTime => "invalid_time",
            AllocError::DuplicateId(_) => "duplicate_id",
            AllocError::MissingTimes(_) => "missing_times",
            AllocError::InstanceTooLarge { .. } => "instance_too_large",
            AllocError::OracleTooLarge { .. } => "oracle_too_large",
        }
    }
}
