//! Dispatch desk: availability reports, rescue-point and shelter upkeep,
//! recommendations and decisions. Transport-agnostic; the HTTP server is a
//! thin layer over [`Dispatcher`].

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::document::PlanDocument;
use crate::geo::GeoPoint;
use crate::kb::file::{read_store, save_store};
use crate::kb::{
    materialize_all, validate_consistency, Class, EntitySet, Predicate, ResourceStatus, RescuePoint,
    SharedKnowledgeBase, Shelter, Term, TripleStore,
};
use crate::pipeline::{validate_spec, Engine, FieldError, PipelineError, RecommendationRequest, RescuePointSpec, SolverOptions};
use crate::routing::{FallbackPolicy, Gazetteer, RoadGraph, RoutingContext};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvailabilityReport {
    pub resource_id: String,
    pub available: bool,
    pub location: GeoPoint,
    pub reported_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvailabilityAck {
    pub resource_id: String,
    /// False when the report repeats the latest one.
    pub changed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ShelterSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<GeoPoint>,
    pub capacity: u32,
    #[serde(default)]
    pub occupied: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationResponse {
    pub request_id: String,
    pub plan: PlanDocument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum Decision {
    Accept,
    Revise {
        points: Vec<RescuePointSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        options: Option<SolverOptions>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum DecisionOutcome {
    Accepted { request_id: String, dispatched: Vec<String> },
    Revised { request_id: String, response: RecommendationResponse },
}

/// What a driver's app sees when it polls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchNotice {
    pub resource_id: String,
    pub status: ResourceStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<GeoPoint>,
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown resource {0}")]
    UnknownResource(String),
    #[error("report for {resource_id} at {received} is older than the stored one at {stored}")]
    StaleReport {
        resource_id: String,
        stored: DateTime<Utc>,
        received: DateTime<Utc>,
    },
    #[error("invalid input")]
    Validation(Vec<FieldError>),
    #[error("cannot geocode `{address}`")]
    GeocodeFailure { address: String },
    #[error("unknown request {0}")]
    UnknownRequest(String),
    #[error("request {0} already has a decision")]
    AlreadyDecided(String),
    #[error(transparent)]
    Pipeline(PipelineError),
    #[error("knowledge base is inconsistent: {0}")]
    Consistency(String),
    #[error("storage: {0}")]
    Storage(String),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownResource(_) => "unknown_resource",
            ServiceError::StaleReport { .. } => "stale_report",
            ServiceError::Validation(_) => "validation_error",
            ServiceError::GeocodeFailure { .. } => "geocode_failure",
            ServiceError::UnknownRequest(_) => "unknown_request",
            ServiceError::AlreadyDecided(_) => "already_decided",
            ServiceError::Pipeline(e) => e.code(),
            ServiceError::Consistency(_) => "consistency_error",
            ServiceError::Storage(_) => "storage_error",
        }
    }

    pub fn details(&self) -> serde_json::Value {
        match self {
            ServiceError::UnknownResource(id) => json!({ "resource_id": id }),
            ServiceError::StaleReport {
                resource_id,
                stored,
                received,
            } => json!({ "resource_id": resource_id, "stored": stored, "received": received }),
            ServiceError::Validation(fields) | ServiceError::Pipeline(PipelineError::Validation(fields)) => {
                json!({ "fields": fields })
            }
            ServiceError::GeocodeFailure { address } => json!({ "address": address }),
            ServiceError::UnknownRequest(id) | ServiceError::AlreadyDecided(id) => json!({ "request_id": id }),
            ServiceError::Pipeline(e) => json!({ "module": e.module() }),
            ServiceError::Consistency(_) | ServiceError::Storage(_) => json!({}),
        }
    }
}

impl From<PipelineError> for ServiceError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Validation(fields) => ServiceError::Validation(fields),
            other => ServiceError::Pipeline(other),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    pub exact_cap: Option<usize>,
    pub fallback: FallbackPolicy,
    /// Triple file rewritten after every change.
    pub kb_path: Option<PathBuf>,
    /// Append-only JSON-lines record of requests, responses and decisions.
    pub log_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
enum LogEntry {
    Availability {
        report: AvailabilityReport,
    },
    Recommendation {
        request_id: String,
        request: RecommendationRequest,
        response: RecommendationResponse,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        revises: Option<String>,
    },
    Decision {
        request_id: String,
        decision: Decision,
        decided_at: DateTime<Utc>,
    },
}

#[derive(Debug, Clone)]
struct RequestRecord {
    request: RecommendationRequest,
    response: RecommendationResponse,
    decision: Option<Decision>,
}

#[derive(Debug, Default)]
struct State {
    last_report: HashMap<String, AvailabilityReport>,
    requests: BTreeMap<String, RequestRecord>,
    /// resource id → (request id, point id) of its current mission
    missions: HashMap<String, (String, String)>,
    next_request: u64,
    log: Option<File>,
}

pub struct Dispatcher {
    kb: SharedKnowledgeBase,
    graph: RoadGraph,
    gazetteer: Gazetteer,
    config: ServiceConfig,
    state: Mutex<State>,
}

impl std::fmt::Debug for Dispatcher {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dispatcher").field("config", &self.config).finish_non_exhaustive()
    }
}

fn storage<E: std::fmt::Display>(e: E) -> ServiceError {
    ServiceError::Storage(e.to_string())
}

impl Dispatcher {
    /// Replays the decision log, if configured and present, so earlier
    /// requests can still be decided and ids keep counting up.
    pub fn new(
        store: TripleStore,
        graph: RoadGraph,
        gazetteer: Gazetteer,
        config: ServiceConfig,
    ) -> Result<Self, ServiceError> {
        let mut state = State {
            next_request: 1,
            ..State::default()
        };
        if let Some(path) = &config.log_path {
            if path.exists() {
                replay(path, &mut state)?;
            }
            let file = OpenOptions::new().create(true).append(true).open(path).map_err(storage)?;
            state.log = Some(file);
        }
        Ok(Self {
            kb: SharedKnowledgeBase::new(store),
            graph,
            gazetteer,
            config,
            state: Mutex::new(state),
        })
    }

    /// Loads the KB from `config.kb_path` when that file exists, otherwise
    /// starts from `seed`.
    pub fn open(
        seed: Option<&EntitySet>,
        graph: RoadGraph,
        gazetteer: Gazetteer,
        config: ServiceConfig,
    ) -> Result<Self, ServiceError> {
        let store = match &config.kb_path {
            Some(p) if p.exists() => read_store(p).map_err(storage)?,
            _ => match seed {
                Some(e) => e.to_store().map_err(storage)?,
                None => TripleStore::new(),
            },
        };
        let report = validate_consistency(&store);
        if !report.is_ok() {
            return Err(ServiceError::Consistency(format!("{} violations", report.violations.len())));
        }
        let d = Self::new(store, graph, gazetteer, config)?;
        d.persist_kb(&d.kb.read())?;
        Ok(d)
    }

    pub fn knowledge_base(&self) -> &SharedKnowledgeBase {
        &self.kb
    }

    fn engine(&self) -> Engine<'_> {
        let mut e = Engine::new(&self.graph, &self.gazetteer).with_fallback(self.config.fallback);
        if let Some(cap) = self.config.exact_cap {
            e = e.with_exact_cap(cap);
        }
        e
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn persist_kb(&self, store: &TripleStore) -> Result<(), ServiceError> {
        match &self.config.kb_path {
            Some(p) => save_store(store, p).map_err(storage),
            None => Ok(()),
        }
    }

    fn append(state: &mut State, entry: &LogEntry) -> Result<(), ServiceError> {
        if let Some(f) = state.log.as_mut() {
            let mut line = serde_json::to_string(entry).map_err(storage)?;
            line.push('\n');
            f.write_all(line.as_bytes()).map_err(storage)?;
            f.flush().map_err(storage)?;
        }
        Ok(())
    }

    /// Typed views of the current KB. Callers get a snapshot; later writes
    /// do not show through.
    pub fn entities(&self) -> Result<EntitySet, ServiceError> {
        let snapshot = self.kb.snapshot();
        materialize_all(&snapshot).map_err(|e| ServiceError::Consistency(e.to_string()))
    }

    pub fn report_availability(&self, r: AvailabilityReport) -> Result<AvailabilityAck, ServiceError> {
        if r.location.validate().is_err() {
            return Err(ServiceError::Validation(vec![FieldError {
                field: "location".into(),
                message: "coordinates out of range".into(),
            }]));
        }
        let mut state = self.lock();
        let mut kb = self.kb.write();
        let known = kb
            .objects(&r.resource_id, Predicate::RdfType)
            .any(|t| t.as_id() == Some(Class::MovingResource.iri().as_str()));
        if !known {
            return Err(ServiceError::UnknownResource(r.resource_id));
        }
        if let Some(prev) = state.last_report.get(&r.resource_id) {
            if *prev == r {
                return Ok(AvailabilityAck {
                    resource_id: r.resource_id,
                    changed: false,
                });
            }
            if r.reported_at < prev.reported_at {
                return Err(ServiceError::StaleReport {
                    resource_id: r.resource_id,
                    stored: prev.reported_at,
                    received: r.reported_at,
                });
            }
        }
        let status = if r.available {
            ResourceStatus::Available
        } else {
            ResourceStatus::Unavailable
        };
        kb.set_value(&r.resource_id, Predicate::HasStatus, Term::id(status.as_str()))
            .and_then(|_| kb.set_value(&r.resource_id, Predicate::HasLocation, Term::text(r.location.to_string())))
            .map_err(storage)?;
        self.persist_kb(&kb)?;
        drop(kb);
        state.missions.remove(&r.resource_id);
        Self::append(&mut state, &LogEntry::Availability { report: r.clone() })?;
        state.last_report.insert(r.resource_id.clone(), r.clone());
        Ok(AvailabilityAck {
            resource_id: r.resource_id,
            changed: true,
        })
    }

    fn resolve_location(&self, location: Option<GeoPoint>, address: Option<&str>) -> Result<GeoPoint, ServiceError> {
        let ctx = RoutingContext::new(&self.graph, &self.gazetteer, self.config.fallback);
        ctx.resolve("", location, address).map_err(|_| ServiceError::GeocodeFailure {
            address: address.unwrap_or_default().to_string(),
        })
    }

    fn next_free_id(kb: &TripleStore, prefix: &str) -> String {
        (1..)
            .map(|n| format!("{prefix}_{n:02}"))
            .find(|id| kb.objects(id, Predicate::RdfType).next().is_none())
            .expect("some id is free")
    }

    fn replace_subject(kb: &mut TripleStore, id: &str, triples: Vec<crate::kb::Triple>) -> Result<(), ServiceError> {
        let mut next = kb.clone();
        let old: Vec<_> = next.query(crate::kb::Pattern::any().subject(id)).collect();
        for t in &old {
            next.retract_triple(t);
        }
        next.assert_all(triples).map_err(storage)?;
        let report = validate_consistency(&next);
        if let Some(v) = report.violations.iter().find(|v| v.subject == id) {
            return Err(ServiceError::Validation(vec![FieldError {
                field: "id".into(),
                message: format!("{}: {}", v.subject, v.kind.code()),
            }]));
        }
        *kb = next;
        Ok(())
    }

    /// Creates or replaces a rescue point; returns its id.
    pub fn upsert_rescue_point(&self, spec: RescuePointSpec) -> Result<String, ServiceError> {
        let errors = validate_spec(&spec, "");
        if !errors.is_empty() {
            return Err(ServiceError::Validation(errors));
        }
        let location = self.resolve_location(spec.location, spec.address.as_deref())?;
        let mut kb = self.kb.write();
        let id = match spec.id {
            Some(id) => id,
            None => Self::next_free_id(&kb, "RescuePoint"),
        };
        let point = RescuePoint {
            id: id.clone(),
            address: spec.address,
            location: Some(location),
            nb_people: spec.nb_people,
            nb_disabled: spec.nb_disabled,
            priority: spec.priority,
        };
        Self::replace_subject(&mut kb, &id, point.to_triples())?;
        self.persist_kb(&kb)?;
        Ok(id)
    }

    /// Creates or replaces a shelter; returns its id.
    pub fn upsert_shelter(&self, spec: ShelterSpec) -> Result<String, ServiceError> {
        let mut errors = Vec::new();
        if spec.capacity == 0 {
            errors.push(FieldError {
                field: "capacity".into(),
                message: "capacity must be positive".into(),
            });
        }
        if spec.occupied > spec.capacity {
            errors.push(FieldError {
                field: "occupied".into(),
                message: "occupied exceeds capacity".into(),
            });
        }
        if spec.location.is_none() && spec.address.is_none() {
            errors.push(FieldError {
                field: "address".into(),
                message: "give an address or coordinates".into(),
            });
        }
        if !errors.is_empty() {
            return Err(ServiceError::Validation(errors));
        }
        let location = self.resolve_location(spec.location, spec.address.as_deref())?;
        let mut kb = self.kb.write();
        let id = match spec.id {
            Some(id) => id,
            None => Self::next_free_id(&kb, "Shelter"),
        };
        let shelter = Shelter {
            id: id.clone(),
            name: spec.name,
            address: spec.address,
            location: Some(location),
            capacity: spec.capacity,
            occupied: spec.occupied,
        };
        Self::replace_subject(&mut kb, &id, shelter.to_triples())?;
        self.persist_kb(&kb)?;
        Ok(id)
    }

    fn solve(&self, request: &RecommendationRequest) -> Result<PlanDocument, ServiceError> {
        let entities = self.entities()?;
        Ok(self.engine().recommend(&entities, request)?)
    }

    fn store_response(
        &self,
        state: &mut State,
        request: RecommendationRequest,
        plan: PlanDocument,
        revises: Option<String>,
    ) -> Result<RecommendationResponse, ServiceError> {
        let request_id = format!("req-{:06}", state.next_request);
        let response = RecommendationResponse {
            request_id: request_id.clone(),
            plan,
        };
        Self::append(
            state,
            &LogEntry::Recommendation {
                request_id: request_id.clone(),
                request: request.clone(),
                response: response.clone(),
                revises,
            },
        )?;
        state.next_request += 1;
        state.requests.insert(
            request_id,
            RequestRecord {
                request,
                response: response.clone(),
                decision: None,
            },
        );
        Ok(response)
    }

    pub fn request_recommendations(&self, request: RecommendationRequest) -> Result<RecommendationResponse, ServiceError> {
        // solve outside the state lock on a KB snapshot
        let plan = self.solve(&request)?;
        let mut state = self.lock();
        self.store_response(&mut state, request, plan, None)
    }

    pub fn recommendation(&self, request_id: &str) -> Option<RecommendationResponse> {
        self.lock().requests.get(request_id).map(|r| r.response.clone())
    }

    pub fn record_decision(&self, request_id: &str, decision: Decision) -> Result<DecisionOutcome, ServiceError> {
        {
            let state = self.lock();
            let record = state
                .requests
                .get(request_id)
                .ok_or_else(|| ServiceError::UnknownRequest(request_id.to_string()))?;
            if record.decision.is_some() {
                return Err(ServiceError::AlreadyDecided(request_id.to_string()));
            }
        }
        match decision {
            Decision::Accept => {
                let mut state = self.lock();
                let record = state
                    .requests
                    .get(request_id)
                    .ok_or_else(|| ServiceError::UnknownRequest(request_id.to_string()))?;
                if record.decision.is_some() {
                    return Err(ServiceError::AlreadyDecided(request_id.to_string()));
                }
                let plan = record.response.plan.clone();
                let mut kb = self.kb.write();
                let mut next = kb.clone();
                for a in &plan.assignments {
                    next.set_value(&a.resource_id, Predicate::HasStatus, Term::id(ResourceStatus::Dispatched.as_str()))
                        .map_err(storage)?;
                }
                self.persist_kb(&next)?;
                *kb = next;
                drop(kb);
                Self::append(
                    &mut state,
                    &LogEntry::Decision {
                        request_id: request_id.to_string(),
                        decision: Decision::Accept,
                        decided_at: Utc::now(),
                    },
                )?;
                for a in &plan.assignments {
                    state
                        .missions
                        .insert(a.resource_id.clone(), (request_id.to_string(), a.point_id.clone()));
                }
                state.requests.get_mut(request_id).unwrap().decision = Some(Decision::Accept);
                let dispatched = plan.assigned_resources().into_iter().map(str::to_string).collect();
                Ok(DecisionOutcome::Accepted {
                    request_id: request_id.to_string(),
                    dispatched,
                })
            }
            Decision::Revise { points, options } => {
                // omitted options mean "same as before"
                let old_options = self.lock().requests.get(request_id).map(|r| r.request.options.clone());
                let request = RecommendationRequest {
                    points: points.clone(),
                    options: options.clone().or(old_options).unwrap_or_default(),
                };
                let plan = self.solve(&request)?;
                let mut state = self.lock();
                let record = state
                    .requests
                    .get(request_id)
                    .ok_or_else(|| ServiceError::UnknownRequest(request_id.to_string()))?;
                if record.decision.is_some() {
                    return Err(ServiceError::AlreadyDecided(request_id.to_string()));
                }
                let decision = Decision::Revise { points, options };
                Self::append(
                    &mut state,
                    &LogEntry::Decision {
                        request_id: request_id.to_string(),
                        decision: decision.clone(),
                        decided_at: Utc::now(),
                    },
                )?;
                state.requests.get_mut(request_id).unwrap().decision = Some(decision);
                let response = self.store_response(&mut state, request, plan, Some(request_id.to_string()))?;
                Ok(DecisionOutcome::Revised {
                    request_id: request_id.to_string(),
                    response,
                })
            }
        }
    }

    /// Poll target for the driver app.
    pub fn dispatch_notice(&self, resource_id: &str) -> Result<DispatchNotice, ServiceError> {
        let entities = self.entities()?;
        let r = entities
            .moving_resources
            .iter()
            .find(|r| r.id == resource_id)
            .ok_or_else(|| ServiceError::UnknownResource(resource_id.to_string()))?;
        let state = self.lock();
        let mission = match r.status {
            ResourceStatus::Dispatched => state.missions.get(resource_id).cloned(),
            _ => None,
        };
        let block = mission.as_ref().and_then(|(req, point)| {
            state
                .requests
                .get(req)
                .and_then(|rec| rec.response.plan.per_point.iter().find(|b| &b.point_id == point).cloned())
        });
        Ok(DispatchNotice {
            resource_id: resource_id.to_string(),
            status: r.status,
            request_id: mission.as_ref().map(|m| m.0.clone()),
            point_id: mission.map(|m| m.1),
            address: block.as_ref().and_then(|b| b.address.clone()),
            location: block.map(|b| b.location),
        })
    }
}

fn replay(path: &Path, state: &mut State) -> Result<(), ServiceError> {
    let file = File::open(path).map_err(storage)?;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(storage)?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: LogEntry =
            serde_json::from_str(&line).map_err(|e| ServiceError::Storage(format!("{}:{}: {e}", path.display(), i + 1)))?;
        match entry {
            LogEntry::Availability { report } => {
                state.missions.remove(&report.resource_id);
                state.last_report.insert(report.resource_id.clone(), report);
            }
            LogEntry::Recommendation {
                request_id,
                request,
                response,
                ..
            } => {
                if let Some(n) = request_id.strip_prefix("req-").and_then(|n| n.parse::<u64>().ok()) {
                    state.next_request = state.next_request.max(n + 1);
                }
                state.requests.insert(
                    request_id,
                    RequestRecord {
                        request,
                        response,
                        decision: None,
                    },
                );
            }
            LogEntry::Decision {
                request_id, decision, ..
            } => {
                if let Some(rec) = state.requests.get_mut(&request_id) {
                    if decision == Decision::Accept {
                        for a in &rec.response.plan.assignments {
                            state
                                .missions
                                .insert(a.resource_id.clone(), (request_id.clone(), a.point_id.clone()));
                        }
                    }
                    rec.decision = Some(decision);
                }
            }
        }
    }
    Ok(())
}
