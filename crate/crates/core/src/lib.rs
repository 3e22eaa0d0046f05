//! Evacuation resource allocation: a triple-store knowledge base of
//! driver/vehicle pairs, rescue points and shelters; offline road routing; and
//! a seat-coverage allocator that minimizes total travel time.

pub mod allocator;
pub mod document;
pub mod geo;
pub mod kb;
pub mod pipeline;
pub mod report;
pub mod routing;
pub mod scenario;
pub mod service;
