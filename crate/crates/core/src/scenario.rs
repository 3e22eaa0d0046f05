//! Scenario bundles: a directory with a `scenario.toml` manifest naming the
//! entity, graph, gazetteer and request files, plus an optional golden plan.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::allocator::{brute_force_oracle, solve_exact, PlanStatus, SolverKind};
use crate::document::PlanDocument;
use crate::kb::{materialize_all, ConsistencyError, EntitySet};
use crate::pipeline::{Engine, PipelineError, RecommendationRequest};
use crate::routing::{Gazetteer, RoadGraph, RoutingError};

pub const MANIFEST_FILE: &str = "scenario.toml";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub name: Option<String>,
    pub entities: PathBuf,
    pub graph: PathBuf,
    pub gazetteer: PathBuf,
    pub request: PathBuf,
    #[serde(default)]
    pub expected: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct ScenarioBundle {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub entities: EntitySet,
    pub graph: RoadGraph,
    pub gazetteer: Gazetteer,
    pub request: RecommendationRequest,
    pub expected: Option<PlanDocument>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("missing {role} file {}", path.display())]
    MissingFile { role: &'static str, path: PathBuf },
    #[error("{}{}: {message}", file.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Parse {
        file: PathBuf,
        line: Option<usize>,
        message: String,
    },
    #[error("kb: {0}")]
    Kb(String),
    #[error("kb: {0}")]
    Consistency(#[from] ConsistencyError),
    #[error("{}: {}", .0.module(), .0)]
    Pipeline(#[from] PipelineError),
}

impl ScenarioError {
    pub fn code(&self) -> &'static str {
        match self {
            ScenarioError::MissingFile { .. } => "missing_file",
            ScenarioError::Parse { .. } => "parse_error",
            ScenarioError::Kb(_) => "kb_rejected",
            ScenarioError::Consistency(_) => "consistency_error",
            ScenarioError::Pipeline(e) => e.code(),
        }
    }
}

fn read(role: &'static str, path: &Path) -> Result<String, ScenarioError> {
    std::fs::read_to_string(path).map_err(|_| ScenarioError::MissingFile {
        role,
        path: path.to_path_buf(),
    })
}

fn existing(role: &'static str, path: PathBuf) -> Result<PathBuf, ScenarioError> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(ScenarioError::MissingFile { role, path })
    }
}

fn toml_error(file: &Path, text: &str, e: toml::de::Error) -> ScenarioError {
    let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    ScenarioError::Parse {
        file: file.to_path_buf(),
        line,
        message: e.message().to_string(),
    }
}

fn routing_error(file: &Path, e: RoutingError) -> ScenarioError {
    match e {
        RoutingError::Parse { line, message } => ScenarioError::Parse {
            file: file.to_path_buf(),
            line: Some(line),
            message,
        },
        RoutingError::DanglingEdgeEndpoint { line, node } => ScenarioError::Parse {
            file: file.to_path_buf(),
            line: Some(line),
            message: format!("edge endpoint {node} is not a declared node"),
        },
        other => ScenarioError::Parse {
            file: file.to_path_buf(),
            line: None,
            message: other.to_string(),
        },
    }
}

pub fn load_scenario(dir: &Path) -> Result<ScenarioBundle, ScenarioError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = read("manifest", &manifest_path)?;
    let manifest: Manifest = toml::from_str(&text).map_err(|e| toml_error(&manifest_path, &text, e))?;

    // check every file exists before parsing any of them
    let entities_path = existing("entities", dir.join(&manifest.entities))?;
    let graph_path = existing("graph", dir.join(&manifest.graph))?;
    let gazetteer_path = existing("gazetteer", dir.join(&manifest.gazetteer))?;
    let request_path = existing("request", dir.join(&manifest.request))?;
    let expected_path = manifest
        .expected
        .as_ref()
        .map(|p| existing("expected", dir.join(p)))
        .transpose()?;

    let text = read("entities", &entities_path)?;
    let entities = EntitySet::from_toml(&text).map_err(|e| toml_error(&entities_path, &text, e))?;
    let graph = RoadGraph::load(&graph_path).map_err(|e| routing_error(&graph_path, e))?;
    let gazetteer = Gazetteer::load(&gazetteer_path).map_err(|e| routing_error(&gazetteer_path, e))?;
    let text = read("request", &request_path)?;
    let request = RecommendationRequest::from_toml(&text).map_err(|e| toml_error(&request_path, &text, e))?;
    let expected = match expected_path {
        Some(path) => {
            let text = read("expected", &path)?;
            Some(PlanDocument::from_json(&text).map_err(|e| ScenarioError::Parse {
                file: path.clone(),
                line: Some(e.line()),
                message: e.to_string(),
            })?)
        }
        None => None,
    };

    Ok(ScenarioBundle {
        dir: dir.to_path_buf(),
        manifest,
        entities,
        graph,
        gazetteer,
        request,
        expected,
    })
}

impl ScenarioBundle {
    /// Loads the entities into a knowledge base, checks it, and reads the
    /// typed views back out, exactly as the service does.
    pub fn knowledge_base(&self) -> Result<EntitySet, ScenarioError> {
        let store = self.entities.to_store().map_err(|e| ScenarioError::Kb(e.to_string()))?;
        Ok(materialize_all(&store)?)
    }

    pub fn engine(&self) -> Engine<'_> {
        Engine::new(&self.graph, &self.gazetteer)
    }
}

pub fn run_scenario(bundle: &ScenarioBundle) -> Result<PlanDocument, ScenarioError> {
    let kb = bundle.knowledge_base()?;
    Ok(bundle.engine().recommend(&kb, &bundle.request)?)
}

/// The bundle's plan from the exact solver next to the brute-force one.
pub fn oracle_check(bundle: &ScenarioBundle) -> Result<(PlanDocument, PlanDocument), ScenarioError> {
    let kb = bundle.knowledge_base()?;
    let engine = bundle.engine();
    let cap = bundle.request.options.exact_cap.unwrap_or(engine.exact_cap);
    let exact = engine.recommend_with(&kb, &bundle.request, |inst| solve_exact(inst, cap))?;
    let oracle = engine.recommend_with(&kb, &bundle.request, brute_force_oracle)?;
    Ok((exact, oracle))
}

/// True when two plans agree on everything but the solver label.
pub fn same_plan(a: &PlanDocument, b: &PlanDocument) -> bool {
    let relabel = |d: &PlanDocument| PlanDocument {
        solver: SolverKind::Exact,
        ..d.clone()
    };
    relabel(a) == relabel(b)
}

/// 0 for optimal or heuristic plans, 2 for infeasible ones.
pub fn exit_code(doc: &PlanDocument) -> i32 {
    match doc.status {
        PlanStatus::Optimal | PlanStatus::Heuristic => 0,
        PlanStatus::Infeasible => 2,
    }
}

/// Exit code for a failed run.
pub const ERROR_EXIT_CODE: i32 = 1;
