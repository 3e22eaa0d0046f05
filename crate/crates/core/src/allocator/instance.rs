use serde::{Deserialize, Serialize};

use super::AllocError;
use crate::kb::{MovingResource, RescuePoint};
use crate::routing::TravelTimeMatrix;

/// Seats a non-ambulatory person takes up.
pub const NON_AMBULATORY_SEATS: u32 = 2;

/// Seat-equivalent demand of a rescue point.
pub fn seat_demand(nb_people: u32, nb_disabled: u32) -> u32 {
    nb_people + NON_AMBULATORY_SEATS * nb_disabled
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointDemand {
    pub id: String,
    pub nb_people: u32,
    pub nb_disabled: u32,
    pub priority: u32,
}

impl PointDemand {
    pub fn new(id: impl Into<String>, nb_people: u32, nb_disabled: u32, priority: u32) -> Self {
        Self {
            id: id.into(),
            nb_people,
            nb_disabled,
            priority,
        }
    }

    pub fn demand(&self) -> u32 {
        seat_demand(self.nb_people, self.nb_disabled)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceSupply {
    pub id: String,
    pub seats: u32,
}

impl ResourceSupply {
    pub fn new(id: impl Into<String>, seats: u32) -> Self {
        Self { id: id.into(), seats }
    }
}

/// Solver input. Points and resources are kept sorted by id, so index order
/// is id order; `times[u][v]` is `None` for pairs that may not be assigned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationInstance {
    points: Vec<PointDemand>,
    resources: Vec<ResourceSupply>,
    times: Vec<Vec<Option<f64>>>,
}

impl AllocationInstance {
    pub fn new(
        points: Vec<PointDemand>,
        resources: Vec<ResourceSupply>,
        times: Vec<Vec<Option<f64>>>,
    ) -> Result<Self, AllocError> {
        if times.len() != points.len() || times.iter().any(|row| row.len() != resources.len()) {
            return Err(AllocError::Shape {
                points: points.len(),
                resources: resources.len(),
            });
        }
        if let Some(p) = points.iter().find(|p| p.demand() == 0 || p.priority == 0) {
            return Err(AllocError::InvalidPoint(p.id.clone()));
        }
        if times.iter().flatten().flatten().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(AllocError::InvalidTime);
        }
        let mut pi: Vec<usize> = (0..points.len()).collect();
        pi.sort_by(|&a, &b| points[a].id.cmp(&points[b].id));
        let mut ri: Vec<usize> = (0..resources.len()).collect();
        ri.sort_by(|&a, &b| resources[a].id.cmp(&resources[b].id));
        for w in pi.windows(2) {
            if points[w[0]].id == points[w[1]].id {
                return Err(AllocError::DuplicateId(points[w[0]].id.clone()));
            }
        }
        for w in ri.windows(2) {
            if resources[w[0]].id == resources[w[1]].id {
                return Err(AllocError::DuplicateId(resources[w[0]].id.clone()));
            }
        }
        let times = pi.iter().map(|&u| ri.iter().map(|&v| times[u][v]).collect()).collect();
        Ok(Self {
            points: pi.iter().map(|&u| points[u].clone()).collect(),
            resources: ri.iter().map(|&v| resources[v].clone()).collect(),
            times,
        })
    }

    pub fn points(&self) -> &[PointDemand] {
        &self.points
    }

    pub fn resources(&self) -> &[ResourceSupply] {
        &self.resources
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn resource_count(&self) -> usize {
        self.resources.len()
    }

    pub fn time(&self, point: usize, resource: usize) -> Option<f64> {
        self.times[point][resource]
    }

    pub fn demand(&self, point: usize) -> u32 {
        self.points[point].demand()
    }

    pub fn seats(&self, resource: usize) -> u32 {
        self.resources[resource].seats
    }

    /// Point indices by priority, then id.
    pub fn priority_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.points.len()).collect();
        order.sort_by(|&a, &b| {
            (self.points[a].priority, &self.points[a].id).cmp(&(self.points[b].priority, &self.points[b].id))
        });
        order
    }

    /// Copy with the point priorities replaced, in point index order.
    pub fn with_priorities(&self, priorities: &[u32]) -> Self {
        let mut out = self.clone();
        for (p, &prio) in out.points.iter_mut().zip(priorities) {
            p.priority = prio.max(1);
        }
        out
    }

    /// Copy with one more resource.
    pub fn with_resource(&self, resource: ResourceSupply, times: &[Option<f64>]) -> Result<Self, AllocError> {
        let mut resources = self.resources.clone();
        resources.push(resource);
        let rows = self
            .times
            .iter()
            .zip(times)
            .map(|(row, &t)| {
                let mut row = row.clone();
                row.push(t);
                row
            })
            .collect();
        Self::new(self.points.clone(), resources, rows)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum Notice {
    /// Nothing to allocate; not an error.
    EmptyPoints,
    ResourceUnreachable { resource_id: String },
}

#[derive(Debug, Clone)]
pub struct BuiltInstance {
    pub instance: AllocationInstance,
    pub notices: Vec<Notice>,
}

/// Keeps available resources, computes seat-equivalent demands and drops
/// resources that cannot reach any point.
pub fn build_instance(
    resources: &[MovingResource],
    points: &[RescuePoint],
    matrix: &TravelTimeMatrix,
) -> Result<BuiltInstance, AllocError> {
    let mut notices = Vec::new();
    if points.is_empty() {
        notices.push(Notice::EmptyPoints);
    }
    let row_of = |id: &str| matrix.point_ids.iter().position(|p| p == id);
    let col_of = |id: &str| matrix.resource_ids.iter().position(|r| r == id);
    let rows = points
        .iter()
        .map(|p| row_of(&p.id).ok_or_else(|| AllocError::MissingTimes(p.id.clone())))
        .collect::<Result<Vec<_>, _>>()?;

    let mut supplies = Vec::new();
    let mut columns: Vec<Vec<Option<f64>>> = Vec::new();
    for r in resources.iter().filter(|r| r.is_available()) {
        let col = col_of(&r.id).ok_or_else(|| AllocError::MissingTimes(r.id.clone()))?;
        let times: Vec<Option<f64>> = rows.iter().map(|&u| matrix.times[u][col]).collect();
        if !points.is_empty() && times.iter().all(Option::is_none) {
            notices.push(Notice::ResourceUnreachable {
                resource_id: r.id.clone(),
            });
            continue;
        }
        supplies.push(ResourceSupply::new(&r.id, r.seats));
        columns.push(times);
    }
    let demands = points
        .iter()
        .map(|p| PointDemand::new(&p.id, p.nb_people, p.nb_disabled, p.priority))
        .collect();
    let times = (0..points.len())
        .map(|u| columns.iter().map(|c| c[u]).collect())
        .collect();
    Ok(BuiltInstance {
        instance: AllocationInstance::new(demands, supplies, times)?,
        notices,
    })
}
