//! Routes, auth and error mapping over [`evac_core::service::Dispatcher`].

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use clap::Parser;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use evac_core::kb::EntitySet;
use evac_core::pipeline::{RecommendationRequest, RescuePointSpec};
use evac_core::routing::{FallbackPolicy, Gazetteer, RoadGraph};
use evac_core::service::{AvailabilityReport, Decision, Dispatcher, ServiceConfig, ServiceError, ShelterSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Driver,
    DecisionMaker,
}

#[derive(Debug, Clone)]
pub struct Tokens {
    pub driver: String,
    pub decision_maker: String,
}

impl Tokens {
    fn role_of(&self, headers: &HeaderMap) -> Option<Role> {
        let value = headers.get(header::AUTHORIZATION)?.to_str().ok()?;
        let token = value.strip_prefix("Bearer ")?.trim();
        if token == self.driver {
            Some(Role::Driver)
        } else if token == self.decision_maker {
            Some(Role::DecisionMaker)
        } else {
            None
        }
    }
}

#[derive(Clone)]
struct AppState {
    desk: Arc<Dispatcher>,
    tokens: Arc<Tokens>,
}

/// A problem document with its HTTP status.
#[derive(Debug)]
pub struct Problem {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
    pub details: Value,
}

impl Problem {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            code: code.to_string(),
            message: message.into(),
            details: json!({}),
        }
    }
}

impl From<ServiceError> for Problem {
    fn from(e: ServiceError) -> Self {
        let status = match &e {
            ServiceError::UnknownResource(_) | ServiceError::UnknownRequest(_) => StatusCode::NOT_FOUND,
            ServiceError::StaleReport { .. } | ServiceError::AlreadyDecided(_) => StatusCode::CONFLICT,
            // solver and routing diagnostics are answers, not transport failures
            ServiceError::Validation(_) | ServiceError::GeocodeFailure { .. } | ServiceError::Pipeline(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            ServiceError::Consistency(_) | ServiceError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self {
            status,
            code: e.code().to_string(),
            message: e.to_string(),
            details: e.details(),
        }
    }
}

impl IntoResponse for Problem {
    fn into_response(self) -> Response {
        let body = json!({ "code": self.code, "message": self.message, "details": self.details });
        (self.status, Json(body)).into_response()
    }
}

type Reply<T> = Result<(StatusCode, Json<T>), Problem>;

fn allow(state: &AppState, headers: &HeaderMap, role: Role) -> Result<(), Problem> {
    match state.tokens.role_of(headers) {
        None => Err(Problem::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or unknown bearer token")),
        Some(r) if r != role => Err(Problem::new(StatusCode::FORBIDDEN, "forbidden", "token role may not use this endpoint")),
        Some(_) => Ok(()),
    }
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, Problem> {
    serde_json::from_slice(body).map_err(|e| {
        let mut p = Problem::new(StatusCode::BAD_REQUEST, "malformed_body", e.to_string());
        p.details = json!({ "line": e.line(), "column": e.column() });
        p
    })
}

/// Runs a desk call off the async threads; solves can take a while.
async fn blocking<T, F>(state: &AppState, f: F) -> Result<T, Problem>
where
    F: FnOnce(&Dispatcher) -> Result<T, ServiceError> + Send + 'static,
    T: Send + 'static,
{
    let desk = Arc::clone(&state.desk);
    tokio::task::spawn_blocking(move || f(&desk))
        .await
        .map_err(|e| Problem::new(StatusCode::INTERNAL_SERVER_ERROR, "internal_error", e.to_string()))?
        .map_err(Problem::from)
}

fn ok<T: Serialize>(status: StatusCode, v: T) -> Reply<T> {
    Ok((status, Json(v)))
}

async fn post_availability(State(s): State<AppState>, headers: HeaderMap, body: Bytes) -> Reply<impl Serialize> {
    allow(&s, &headers, Role::Driver)?;
    let report: AvailabilityReport = parse(&body)?;
    ok(StatusCode::OK, blocking(&s, move |d| d.report_availability(report)).await?)
}

async fn get_dispatch(State(s): State<AppState>, headers: HeaderMap, Path(id): Path<String>) -> Reply<impl Serialize> {
    allow(&s, &headers, Role::Driver)?;
    ok(StatusCode::OK, blocking(&s, move |d| d.dispatch_notice(&id)).await?)
}

async fn post_rescue_point(State(s): State<AppState>, headers: HeaderMap, body: Bytes) -> Reply<Value> {
    allow(&s, &headers, Role::DecisionMaker)?;
    let spec: RescuePointSpec = parse(&body)?;
    let id = blocking(&s, move |d| d.upsert_rescue_point(spec)).await?;
    ok(StatusCode::CREATED, json!({ "id": id }))
}

async fn post_shelter(State(s): State<AppState>, headers: HeaderMap, body: Bytes) -> Reply<Value> {
    allow(&s, &headers, Role::DecisionMaker)?;
    let spec: ShelterSpec = parse(&body)?;
    let id = blocking(&s, move |d| d.upsert_shelter(spec)).await?;
    ok(StatusCode::CREATED, json!({ "id": id }))
}

async fn entities(s: &AppState, headers: &HeaderMap) -> Result<EntitySet, Problem> {
    allow(s, headers, Role::DecisionMaker)?;
    blocking(s, |d| d.entities()).await
}

async fn get_rescue_points(State(s): State<AppState>, headers: HeaderMap) -> Reply<impl Serialize> {
    ok(StatusCode::OK, entities(&s, &headers).await?.rescue_points)
}

async fn get_shelters(State(s): State<AppState>, headers: HeaderMap) -> Reply<impl Serialize> {
    ok(StatusCode::OK, entities(&s, &headers).await?.shelters)
}

async fn get_resources(State(s): State<AppState>, headers: HeaderMap) -> Reply<impl Serialize> {
    ok(StatusCode::OK, entities(&s, &headers).await?.moving_resources)
}

async fn post_recommendation(State(s): State<AppState>, headers: HeaderMap, body: Bytes) -> Reply<impl Serialize> {
    allow(&s, &headers, Role::DecisionMaker)?;
    let request: RecommendationRequest = parse(&body)?;
    ok(StatusCode::CREATED, blocking(&s, move |d| d.request_recommendations(request)).await?)
}

async fn get_recommendation(State(s): State<AppState>, headers: HeaderMap, Path(id): Path<String>) -> Reply<impl Serialize> {
    allow(&s, &headers, Role::DecisionMaker)?;
    let found = blocking(&s, {
        let id = id.clone();
        move |d| Ok(d.recommendation(&id))
    })
    .await?;
    match found {
        Some(r) => ok(StatusCode::OK, r),
        None => Err(ServiceError::UnknownRequest(id).into()),
    }
}

async fn post_decision(
    State(s): State<AppState>,
    headers: HeaderMap,
    Path(id): Path<String>,
    body: Bytes,
) -> Reply<impl Serialize> {
    allow(&s, &headers, Role::DecisionMaker)?;
    let decision: Decision = parse(&body)?;
    ok(StatusCode::OK, blocking(&s, move |d| d.record_decision(&id, decision)).await?)
}

async fn not_found() -> Problem {
    Problem::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

pub fn router(desk: Arc<Dispatcher>, tokens: Tokens) -> Router {
    let state = AppState {
        desk,
        tokens: Arc::new(tokens),
    };
    Router::new()
        .route("/health", get(|| async { Json(json!({ "status": "ok" })) }))
        .route("/availability", post(post_availability))
        // resource ids contain slashes
        .route("/dispatch/{*resource_id}", get(get_dispatch))
        .route("/resources", get(get_resources))
        .route("/rescue-points", post(post_rescue_point).get(get_rescue_points))
        .route("/shelters", post(post_shelter).get(get_shelters))
        .route("/recommendations", post(post_recommendation))
        .route("/recommendations/{id}", get(get_recommendation))
        .route("/recommendations/{id}/decision", post(post_decision))
        .fallback(not_found)
        .with_state(state)
}

#[derive(Debug, Clone, Parser)]
#[command(name = "evac-service", about = "Evacuation dispatch HTTP service")]
pub struct ServerArgs {
    /// Road graph file.
    #[arg(long, env = "EVAC_GRAPH")]
    pub graph: PathBuf,
    /// Address gazetteer (TSV).
    #[arg(long, env = "EVAC_GAZETTEER")]
    pub gazetteer: PathBuf,
    /// Triple file; created from --entities on first start.
    #[arg(long, env = "EVAC_KB")]
    pub kb: Option<PathBuf>,
    /// Seed entities (TOML), used when the KB file does not exist yet.
    #[arg(long, env = "EVAC_ENTITIES")]
    pub entities: Option<PathBuf>,
    /// Append-only request/decision log (JSON lines).
    #[arg(long, env = "EVAC_LOG")]
    pub log: Option<PathBuf>,
    #[arg(long, env = "EVAC_EXACT_CAP")]
    pub exact_cap: Option<usize>,
    #[arg(long, env = "EVAC_FALLBACK", default_value = "straight-line")]
    pub fallback: FallbackPolicy,
    #[arg(long, env = "EVAC_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
    #[arg(long, env = "EVAC_DRIVER_TOKEN")]
    pub driver_token: String,
    #[arg(long, env = "EVAC_DECISION_TOKEN")]
    pub decision_token: String,
}

impl ServerArgs {
    /// Loads the inputs and builds the desk.
    pub fn dispatcher(&self) -> Result<Dispatcher, String> {
        let graph = RoadGraph::load(&self.graph).map_err(|e| format!("{}: {e}", self.graph.display()))?;
        let gazetteer = Gazetteer::load(&self.gazetteer).map_err(|e| format!("{}: {e}", self.gazetteer.display()))?;
        let seed = match &self.entities {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
                Some(EntitySet::from_toml(&text).map_err(|e| format!("{}: {e}", p.display()))?)
            }
            None => None,
        };
        let config = ServiceConfig {
            exact_cap: self.exact_cap,
            fallback: self.fallback,
            kb_path: self.kb.clone(),
            log_path: self.log.clone(),
        };
        Dispatcher::open(seed.as_ref(), graph, gazetteer, config).map_err(|e| e.to_string())
    }

    pub fn tokens(&self) -> Tokens {
        Tokens {
            driver: self.driver_token.clone(),
            decision_maker: self.decision_token.clone(),
        }
    }
}
