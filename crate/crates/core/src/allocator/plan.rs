use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::AllocationInstance;

/// Two objective values closer than this are a tie.
pub const COST_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    Optimal,
    Heuristic,
    Infeasible,
}

impl PlanStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlanStatus::Optimal => "optimal",
            PlanStatus::Heuristic => "heuristic",
            PlanStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Exact,
    Greedy,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignedResource {
    pub resource: usize,
    pub seats: u32,
    pub time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointAllocation {
    pub point: usize,
    pub demand: u32,
    pub seats_delivered: u32,
    pub served: bool,
    /// Seat-equivalents still missing after the leftover reachable fleet is
    /// counted; 0 for served points.
    pub deficit: u32,
    /// Ordered by travel time, then resource id.
    pub assigned: Vec<AssignedResource>,
}

/// Solver output. Indices refer to the instance it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationPlan {
    /// `matrix[u][v]`: resource `v` goes to point `u`.
    pub matrix: Vec<Vec<bool>>,
    pub objective: f64,
    pub vehicles_used: usize,
    pub status: PlanStatus,
    pub solver: SolverKind,
    /// In priority order, then id.
    pub per_point: Vec<PointAllocation>,
}

impl AllocationPlan {
    /// `assignment[v]` is the point resource `v` serves, if any. Points with
    /// `served[u] == false` must not receive resources.
    pub fn from_assignment(
        inst: &AllocationInstance,
        assignment: &[Option<usize>],
        served: &[bool],
        solver: SolverKind,
    ) -> Self {
        let (x, y) = (inst.point_count(), inst.resource_count());
        let mut matrix = vec![vec![false; y]; x];
        for (v, a) in assignment.iter().enumerate() {
            if let Some(u) = *a {
                matrix[u][v] = true;
            }
        }
        let objective = canonical_cost(inst, &matrix);
        let vehicles_used = assignment.iter().flatten().count();

        let per_point = inst
            .priority_order()
            .into_iter()
            .map(|u| {
                let mut assigned: Vec<AssignedResource> = (0..y)
                    .filter(|&v| matrix[u][v])
                    .map(|v| AssignedResource {
                        resource: v,
                        seats: inst.seats(v),
                        time_s: inst.time(u, v).expect("assigned pair is reachable"),
                    })
                    .collect();
                assigned.sort_by(|a, b| a.time_s.total_cmp(&b.time_s).then(a.resource.cmp(&b.resource)));
                let seats_delivered = assigned.iter().map(|a| a.seats).sum();
                let deficit = if served[u] {
                    0
                } else {
                    let leftover: u32 = (0..y)
                        .filter(|&v| assignment[v].is_none() && inst.time(u, v).is_some())
                        .map(|v| inst.seats(v))
                        .sum();
                    inst.demand(u).saturating_sub(leftover)
                };
                PointAllocation {
                    point: u,
                    demand: inst.demand(u),
                    seats_delivered,
                    served: served[u],
                    deficit,
                    assigned,
                }
            })
            .collect();

        let status = if served.iter().all(|&s| s) {
            match solver {
                SolverKind::Greedy => PlanStatus::Heuristic,
                SolverKind::Exact | SolverKind::Oracle => PlanStatus::Optimal,
            }
        } else {
            PlanStatus::Infeasible
        };
        Self {
            matrix,
            objective,
            vehicles_used,
            status,
            solver,
            per_point,
        }
    }

    /// Resource → point map recovered from the matrix.
    pub fn assignment(&self) -> Vec<Option<usize>> {
        let y = self.matrix.first().map_or(0, Vec::len);
        (0..y)
            .map(|v| self.matrix.iter().position(|row| row[v]))
            .collect()
    }

    /// Assigned `(point, resource)` pairs in index order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, row) in self.matrix.iter().enumerate() {
            for (v, &on) in row.iter().enumerate() {
                if on {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn served_count(&self) -> usize {
        self.per_point.iter().filter(|p| p.served).count()
    }

    /// The tie-break chain: total time, vehicle count, then assigned pairs
    /// compared lexicographically.
    pub fn compare_key(&self, other: &Self) -> Ordering {
        compare_cost(self.objective, other.objective)
            .then(self.vehicles_used.cmp(&other.vehicles_used))
            .then_with(|| self.pairs().cmp(&other.pairs()))
    }
}

pub(crate) fn compare_cost(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= COST_EPS {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

/// Sum of assigned times in (point, resource) index order.
pub(crate) fn canonical_cost(inst: &AllocationInstance, matrix: &[Vec<bool>]) -> f64 {
    let mut total = 0.0;
    for (u, row) in matrix.iter().enumerate() {
        for (v, &on) in row.iter().enumerate() {
            if on {
                total += inst.time(u, v).expect("assigned pair is reachable");
            }
        }
    }
    total
}
