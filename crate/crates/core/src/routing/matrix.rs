use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::{NodeId, RoadGraph, DEFAULT_SPEED_KMH};
use super::{Gazetteer, RoutingError};
use crate::geo::{haversine_unchecked, GeoPoint};
use crate::kb::{MovingResource, RescuePoint, VehicleClass};

/// What to do when the road graph has no path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FallbackPolicy {
    /// Great-circle distance at the urban default speed.
    #[default]
    StraightLine,
    /// Leave the pair unreachable.
    Exclude,
}

impl std::str::FromStr for FallbackPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "straight-line" | "straight_line" => Ok(FallbackPolicy::StraightLine),
            "exclude" => Ok(FallbackPolicy::Exclude),
            other => Err(format!("unknown fallback policy `{other}`")),
        }
    }
}

pub fn straight_line_seconds(a: GeoPoint, b: GeoPoint) -> f64 {
    haversine_unchecked(a, b) / (DEFAULT_SPEED_KMH / 3.6)
}

/// `times[u][v]`: seconds for resource `v` to reach rescue point `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TravelTimeMatrix {
    pub point_ids: Vec<String>,
    pub resource_ids: Vec<String>,
    pub times: Vec<Vec<Option<f64>>>,
}

impl TravelTimeMatrix {
    pub fn get(&self, point: usize, resource: usize) -> Option<f64> {
        self.times[point][resource]
    }
}

/// Graph plus geocoder plus fallback rule: everything needed to turn entities
/// into travel times.
#[derive(Debug, Clone)]
pub struct RoutingContext<'a> {
    pub graph: &'a RoadGraph,
    pub gazetteer: &'a Gazetteer,
    pub fallback: FallbackPolicy,
}

impl<'a> RoutingContext<'a> {
    pub fn new(graph: &'a RoadGraph, gazetteer: &'a Gazetteer, fallback: FallbackPolicy) -> Self {
        Self {
            graph,
            gazetteer,
            fallback,
        }
    }

    /// Coordinates first, then the gazetteer.
    pub fn resolve(
        &self,
        entity_id: &str,
        location: Option<GeoPoint>,
        address: Option<&str>,
    ) -> Result<GeoPoint, RoutingError> {
        if let Some(p) = location {
            return Ok(p);
        }
        let Some(address) = address else {
            return Err(RoutingError::NoLocation {
                entity_id: entity_id.to_string(),
            });
        };
        self.gazetteer.geocode(address).map_err(|_| RoutingError::GeocodeFailed {
            entity_id: entity_id.to_string(),
            address: address.to_string(),
        })
    }

    fn fallback_time(&self, a: GeoPoint, b: GeoPoint) -> Option<f64> {
        match self.fallback {
            FallbackPolicy::StraightLine => Some(straight_line_seconds(a, b)),
            FallbackPolicy::Exclude => None,
        }
    }

    /// Times from one origin to many destinations with a single search.
    pub fn times_from(&self, origin: GeoPoint, destinations: &[GeoPoint]) -> Vec<Option<f64>> {
        let source = self.graph.snap_to_node(origin);
        let reached: HashMap<NodeId, f64> = self
            .graph
            .travel_times_from(source)
            .expect("snapped node belongs to the graph");
        destinations
            .iter()
            .map(|&d| match reached.get(&self.graph.snap_to_node(d)) {
                Some(&t) => Some(t),
                None => self.fallback_time(origin, d),
            })
            .collect()
    }
}

/// Rows follow `points`, columns follow `resources`.
pub fn build_travel_time_matrix(
    ctx: &RoutingContext<'_>,
    resources: &[MovingResource],
    points: &[RescuePoint],
) -> Result<TravelTimeMatrix, RoutingError> {
    let point_coords = points
        .iter()
        .map(|p| ctx.resolve(&p.id, p.location, p.address.as_deref()))
        .collect::<Result<Vec<_>, _>>()?;
    let resource_coords = resources
        .iter()
        .map(|r| ctx.resolve(&r.id, r.location, r.address.as_deref()))
        .collect::<Result<Vec<_>, _>>()?;

    // boats never use the street graph
    let columns: Vec<Vec<Option<f64>>> = resources
        .par_iter()
        .zip(resource_coords.par_iter())
        .map(|(r, &origin)| {
            if r.vehicle_class == VehicleClass::Boat {
                point_coords.iter().map(|&d| Some(straight_line_seconds(origin, d))).collect()
            } else {
                ctx.times_from(origin, &point_coords)
            }
        })
        .collect();

    let times = (0..points.len())
        .map(|u| columns.iter().map(|col| col[u]).collect())
        .collect();
    Ok(TravelTimeMatrix {
        point_ids: points.iter().map(|p| p.id.clone()).collect(),
        resource_ids: resources.iter().map(|r| r.id.clone()).collect(),
        times,
    })
}
