//! The plan document shared by the CLI, the service and the console.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::allocator::{
    AllocationInstance, AllocationPlan, Notice, PlanStatus, ShelterAssignment, SolverKind,
};
use crate::geo::GeoPoint;
use crate::kb::{MovingResource, RescuePoint, Shelter, VehicleClass};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseAssignment {
    pub point_id: String,
    pub resource_id: String,
    pub time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceRow {
    pub resource_id: String,
    pub driver_id: String,
    pub vehicle_id: String,
    pub vehicle_class: VehicleClass,
    pub seats: u32,
    pub time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShelterRow {
    pub shelter_id: String,
    pub shelter_name: String,
    pub persons: u32,
    pub time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointBlock {
    pub point_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
    pub location: GeoPoint,
    pub priority: u32,
    pub nb_people: u32,
    pub nb_disabled: u32,
    /// Seat-equivalents: people plus two per disabled person.
    pub demand: u32,
    pub seats_delivered: u32,
    pub served: bool,
    pub deficit: u32,
    pub resources: Vec<ResourceRow>,
    pub shelters: Vec<ShelterRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub status: PlanStatus,
    pub solver: SolverKind,
    pub objective_s: f64,
    pub vehicles_used: usize,
    pub points_served: usize,
    pub points_unserved: usize,
    /// Candidate resources, in id order; the columns of the matrix.
    pub resource_ids: Vec<String>,
    /// Non-zero entries of the distribution matrix, by point id then resource id.
    pub assignments: Vec<SparseAssignment>,
    /// By priority, then id.
    pub per_point: Vec<PointBlock>,
    pub shelters: ShelterAssignment,
    #[serde(default)]
    pub notices: Vec<Notice>,
}

impl PlanDocument {
    /// Joins solver indices back to the entities they came from.
    ///
    /// `resources`, `points` and `point_locations` must cover every id in
    /// `inst`; `point_locations` is parallel to `points`.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        inst: &AllocationInstance,
        plan: &AllocationPlan,
        resources: &[MovingResource],
        points: &[RescuePoint],
        point_locations: &[GeoPoint],
        shelters: &[Shelter],
        shelter_assignment: ShelterAssignment,
        notices: Vec<Notice>,
    ) -> Self {
        let resource_of = |id: &str| resources.iter().find(|r| r.id == id).expect("resource in instance");
        let point_pos = |id: &str| points.iter().position(|p| p.id == id).expect("point in instance");

        let mut assignments: Vec<SparseAssignment> = plan
            .pairs()
            .into_iter()
            .map(|(u, v)| SparseAssignment {
                point_id: inst.points()[u].id.clone(),
                resource_id: inst.resources()[v].id.clone(),
                time_s: inst.time(u, v).expect("assigned pair is reachable"),
            })
            .collect();
        assignments.sort_by(|a, b| (&a.point_id, &a.resource_id).cmp(&(&b.point_id, &b.resource_id)));

        let per_point = plan
            .per_point
            .iter()
            .map(|pa| {
                let id = &inst.points()[pa.point].id;
                let at = point_pos(id);
                let p = &points[at];
                let rows = pa
                    .assigned
                    .iter()
                    .map(|a| {
                        let r = resource_of(&inst.resources()[a.resource].id);
                        ResourceRow {
                            resource_id: r.id.clone(),
                            driver_id: r.driver_id.clone(),
                            vehicle_id: r.vehicle_id.clone(),
                            vehicle_class: r.vehicle_class,
                            seats: a.seats,
                            time_s: a.time_s,
                        }
                    })
                    .collect();
                let shelter_rows = shelter_assignment
                    .allocations
                    .iter()
                    .filter(|s| &s.point_id == id)
                    .map(|s| ShelterRow {
                        shelter_id: s.shelter_id.clone(),
                        shelter_name: shelters
                            .iter()
                            .find(|x| x.id == s.shelter_id)
                            .map_or(s.shelter_id.clone(), |x| x.label().to_string()),
                        persons: s.persons,
                        time_s: s.time_s,
                    })
                    .collect();
                PointBlock {
                    point_id: id.clone(),
                    address: p.address.clone(),
                    location: point_locations[at],
                    priority: p.priority,
                    nb_people: p.nb_people,
                    nb_disabled: p.nb_disabled,
                    demand: pa.demand,
                    seats_delivered: pa.seats_delivered,
                    served: pa.served,
                    deficit: pa.deficit,
                    resources: rows,
                    shelters: shelter_rows,
                }
            })
            .collect();

        let points_served = plan.served_count();
        Self {
            status: plan.status,
            solver: plan.solver,
            objective_s: plan.objective,
            vehicles_used: plan.vehicles_used,
            points_served,
            points_unserved: inst.point_count() - points_served,
            resource_ids: inst.resources().iter().map(|r| r.id.clone()).collect(),
            assignments,
            per_point,
            shelters: shelter_assignment,
            notices,
        }
    }

    /// Resources the plan sends somewhere.
    pub fn assigned_resources(&self) -> BTreeSet<&str> {
        self.assignments.iter().map(|a| a.resource_id.as_str()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
