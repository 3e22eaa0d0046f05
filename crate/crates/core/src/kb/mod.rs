//! Ontology-backed knowledge base: a closed-schema triple store with typed
//! views for moving resources, rescue points and shelters.

mod entities;
pub mod file;
pub mod schema;
mod store;
mod triple;

pub use entities::{
    materialize_all, materialize_entities, materialize_moving_resources, materialize_rescue_points,
    materialize_shelters, validate_consistency, ConsistencyError, ConsistencyReport, Entities,
    EntityKind, EntitySet, MovingResource, RescuePoint, Shelter, Violation, ViolationKind,
};
pub use schema::{Class, Predicate, ResourceStatus, VehicleClass};
pub use store::{Assertion, Pattern, Retraction, SharedKnowledgeBase, TripleStore};
pub use triple::{Rejection, Term, Triple};
