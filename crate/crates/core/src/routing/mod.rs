//! Offline street routing: graph files, nearest-node snapping, shortest-path
//! travel times and address lookup.

mod gazetteer;
mod graph;
mod matrix;

use thiserror::Error;

pub use gazetteer::{normalize_address, Gazetteer};
pub use graph::{Edge, NodeId, RoadGraph, DEFAULT_SPEED_KMH};
pub use matrix::{build_travel_time_matrix, straight_line_seconds, FallbackPolicy, RoutingContext, TravelTimeMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoutingError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: edge endpoint {node} is not a declared node")]
    DanglingEdgeEndpoint { line: usize, node: NodeId },
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("address not found: {0}")]
    AddressNotFound(String),
    #[error("{entity_id}: cannot geocode address `{address}`")]
    GeocodeFailed { entity_id: String, address: String },
    #[error("{entity_id}: neither coordinates nor address given")]
    NoLocation { entity_id: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl RoutingError {
    pub fn code(&self) -> &'static str {
        match self {
            RoutingError::Parse { .. } => "parse_error",
            RoutingError::DanglingEdgeEndpoint { .. } => "dangling_edge_endpoint",
            RoutingError::EmptyGraph => "empty_graph",
            RoutingError::UnknownNode(_) => "unknown_node",
            RoutingError::AddressNotFound(_) => "address_not_found",
            RoutingError::GeocodeFailed { .. } => "geocode_failure",
            RoutingError::NoLocation { .. } => "no_location",
            RoutingError::Io { .. } => "io_error",
        }
    }
}
