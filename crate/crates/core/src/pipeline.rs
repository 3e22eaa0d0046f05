//! Request in, plan document out: geocoding, travel times, solving and
//! shelter placement. The CLI and the service both go through [`Engine::recommend`].

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocator::{
    assign_shelters, build_instance, solve_exact, AllocationInstance, AllocationPlan, solve_greedy, AllocError, ShelterDemand, DEFAULT_EXACT_CAP,
};
use crate::document::PlanDocument;
use crate::geo::GeoPoint;
use crate::kb::{EntitySet, RescuePoint};
use crate::routing::{build_travel_time_matrix, FallbackPolicy, Gazetteer, RoadGraph, RoutingContext, RoutingError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    Exact,
    Greedy,
    /// Exact when the fleet fits under the cap, greedy otherwise.
    #[default]
    Auto,
}

impl std::str::FromStr for SolverChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(SolverChoice::Exact),
            "greedy" => Ok(SolverChoice::Greedy),
            "auto" => Ok(SolverChoice::Auto),
            other => Err(format!("unknown solver `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverOptions {
    #[serde(default)]
    pub solver: SolverChoice,
    /// Falls back to the deployment default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<FallbackPolicy>,
    /// Overrides the deployment's exact-solver cap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_cap: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RescuePointSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<GeoPoint>,
    #[serde(default)]
    pub nb_people: u32,
    #[serde(default)]
    pub nb_disabled: u32,
    #[serde(default = "default_priority")]
    pub priority: u32,
}

fn default_priority() -> u32 {
    1
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecommendationRequest {
    #[serde(default)]
    pub points: Vec<RescuePointSpec>,
    #[serde(default)]
    pub options: SolverOptions,
}

impl RecommendationRequest {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("invalid request: {}", .0.iter().map(|f| format!("{}: {}", f.field, f.message)).collect::<Vec<_>>().join("; "))]
    Validation(Vec<FieldError>),
    #[error("no available resources")]
    NoAvailableResources,
    #[error("routing: {0}")]
    Routing(#[from] RoutingError),
    #[error("allocator: {0}")]
    Allocation(#[from] AllocError),
}

impl PipelineError {
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::Validation(_) => "validation_error",
            PipelineError::NoAvailableResources => "no_available_resources",
            PipelineError::Routing(e) => e.code(),
            PipelineError::Allocation(e) => e.code(),
        }
    }

    /// Which layer the failure came from.
    pub fn module(&self) -> &'static str {
        match self {
            PipelineError::Validation(_) | PipelineError::NoAvailableResources => "pipeline",
            PipelineError::Routing(_) => "routing",
            PipelineError::Allocation(_) => "allocator",
        }
    }
}

/// Checks one spec; field names are prefixed with `prefix`.
pub fn validate_spec(spec: &RescuePointSpec, prefix: &str) -> Vec<FieldError> {
    let mut errors = Vec::new();
    let mut bad = |field: &str, message: &str| {
        errors.push(FieldError {
            field: format!("{prefix}{field}"),
            message: message.to_string(),
        })
    };
    if spec.nb_people + spec.nb_disabled == 0 {
        bad("nb_people", "a rescue point needs at least one person");
    }
    if spec.priority == 0 {
        bad("priority", "priority must be 1 or more");
    }
    if spec.location.is_none() && spec.address.as_deref().is_none_or(|a| a.trim().is_empty()) {
        bad("address", "give an address or coordinates");
    }
    if let Some(p) = spec.location {
        if p.validate().is_err() {
            bad("location", "coordinates out of range");
        }
    }
    if let Some(id) = &spec.id {
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            bad("id", "identifiers are non-empty and contain no whitespace");
        }
    }
    errors
}

/// Turns request specs into rescue points. Unnamed points are numbered by
/// position: `RescuePoint_01`, `RescuePoint_02`, ...
pub fn resolve_specs(specs: &[RescuePointSpec]) -> Result<Vec<RescuePoint>, PipelineError> {
    let mut errors = Vec::new();
    let mut seen = BTreeSet::new();
    let mut points = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let prefix = format!("points[{i}].");
        errors.extend(validate_spec(spec, &prefix));
        let id = spec.id.clone().unwrap_or_else(|| format!("RescuePoint_{:02}", i + 1));
        if !seen.insert(id.clone()) {
            errors.push(FieldError {
                field: format!("{prefix}id"),
                message: format!("duplicate rescue point id {id}"),
            });
        }
        points.push(RescuePoint {
            id,
            address: spec.address.clone(),
            location: spec.location,
            nb_people: spec.nb_people,
            nb_disabled: spec.nb_disabled,
            priority: spec.priority,
        });
    }
    if errors.is_empty() {
        Ok(points)
    } else {
        Err(PipelineError::Validation(errors))
    }
}

/// Static inputs of a deployment.
#[derive(Debug, Clone, Copy)]
pub struct Engine<'a> {
    pub graph: &'a RoadGraph,
    pub gazetteer: &'a Gazetteer,
    pub exact_cap: usize,
    pub fallback: FallbackPolicy,
}

impl<'a> Engine<'a> {
    pub fn new(graph: &'a RoadGraph, gazetteer: &'a Gazetteer) -> Self {
        Self {
            graph,
            gazetteer,
            exact_cap: DEFAULT_EXACT_CAP,
            fallback: FallbackPolicy::default(),
        }
    }

    pub fn with_exact_cap(mut self, cap: usize) -> Self {
        self.exact_cap = cap;
        self
    }

    pub fn with_fallback(mut self, fallback: FallbackPolicy) -> Self {
        self.fallback = fallback;
        self
    }

    /// Runs the whole chain against a snapshot of the knowledge base.
    /// Rescue points come from the request; resources and shelters from
    /// `kb`.
    pub fn recommend(&self, kb: &EntitySet, request: &RecommendationRequest) -> Result<PlanDocument, PipelineError> {
        let options = &request.options;
        let cap = options.exact_cap.unwrap_or(self.exact_cap);
        self.recommend_with(kb, request, |inst| match options.solver {
            SolverChoice::Exact => solve_exact(inst, cap),
            SolverChoice::Greedy => Ok(solve_greedy(inst)),
            SolverChoice::Auto => match solve_exact(inst, cap) {
                Err(AllocError::InstanceTooLarge { .. }) => Ok(solve_greedy(inst)),
                other => other,
            },
        })
    }

    /// [`Engine::recommend`] with a caller-chosen solver; the request's
    /// solver options are ignored.
    pub fn recommend_with(
        &self,
        kb: &EntitySet,
        request: &RecommendationRequest,
        solve: impl FnOnce(&AllocationInstance) -> Result<AllocationPlan, AllocError>,
    ) -> Result<PlanDocument, PipelineError> {
        let options = &request.options;
        let points = resolve_specs(&request.points)?;
        let ctx = RoutingContext::new(self.graph, self.gazetteer, options.fallback.unwrap_or(self.fallback));

        let available: Vec<_> = kb.moving_resources.iter().filter(|r| r.is_available()).cloned().collect();
        if !points.is_empty() && available.is_empty() {
            return Err(PipelineError::NoAvailableResources);
        }
        let point_locations = points
            .iter()
            .map(|p| ctx.resolve(&p.id, p.location, p.address.as_deref()))
            .collect::<Result<Vec<_>, _>>()?;
        let located: Vec<RescuePoint> = points
            .iter()
            .zip(&point_locations)
            .map(|(p, &at)| RescuePoint {
                location: Some(at),
                ..p.clone()
            })
            .collect();

        let matrix = build_travel_time_matrix(&ctx, &available, &located)?;
        let built = build_instance(&available, &located, &matrix)?;
        let inst = &built.instance;
        let plan = solve(inst)?;

        let shelter_locations = kb
            .shelters
            .iter()
            .map(|s| ctx.resolve(&s.id, s.location, s.address.as_deref()))
            .collect::<Result<Vec<_>, _>>()?;
        let demands: Vec<ShelterDemand> = plan
            .per_point
            .iter()
            .filter(|pa| pa.served)
            .map(|pa| {
                let id = &inst.points()[pa.point].id;
                let at = located.iter().position(|p| &p.id == id).expect("point in instance");
                ShelterDemand {
                    point_id: id.clone(),
                    evacuees: located[at].evacuees(),
                    times: ctx.times_from(point_locations[at], &shelter_locations),
                }
            })
            .collect();
        let shelters = assign_shelters(&demands, &kb.shelters);

        Ok(PlanDocument::assemble(
            inst,
            &plan,
            &available,
            &located,
            &point_locations,
            &kb.shelters,
            shelters,
            built.notices,
        ))
    }
}
