//! Local HTTP facade over the solvers, for the what-if UI and scripts.
//! Unauthenticated: bind it to localhost only.

use std::net::SocketAddr;
use std::sync::{Arc, RwLock};
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use geopriv_core::error::Violation;
use geopriv_core::{
    protected_k, solve, validate_instance, Error, Instance, Limits, PlanStatus, ProblemSpec, RawInstance, ScoreKind,
    SolveReport, SolverKind,
};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::CorsLayer;

use crate::views::{photo_views, ranked_locations, PhotoView, PlanView, ProblemInput, RankedLocation, TOP_LOCATIONS};

pub const DEFAULT_TIME_CAP: Duration = Duration::from_secs(30);

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Hard cap on every solve; requests may only ask for less.
    pub max_time_cap: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self { max_time_cap: DEFAULT_TIME_CAP }
    }
}

/// Append-only: an id always resolves to the instance it was issued for.
#[derive(Debug, Default)]
pub struct Registry {
    instances: RwLock<Vec<Arc<Instance>>>,
}

impl Registry {
    pub fn insert(&self, instance: Instance) -> String {
        let mut guard = self.instances.write().expect("registry lock poisoned");
        guard.push(Arc::new(instance));
        format!("inst-{}", guard.len() - 1)
    }

    pub fn get(&self, id: &str) -> Option<Arc<Instance>> {
        let index: usize = id.strip_prefix("inst-")?.parse().ok()?;
        self.instances.read().expect("registry lock poisoned").get(index).cloned()
    }
}

#[derive(Debug, Clone)]
struct AppState {
    registry: Arc<Registry>,
    config: ServiceConfig,
}

pub fn router(config: ServiceConfig) -> Router {
    let state = AppState { registry: Arc::new(Registry::default()), config };
    Router::new()
        .route("/api/v1/instances", post(create_instance))
        .route("/api/v1/instances/{id}/summary", get(summary))
        .route("/api/v1/solve", post(solve_request))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(config)).await?;
    Ok(())
}

#[derive(Debug)]
enum ApiError {
    BadRequest(String),
    Invalid(Vec<Violation>),
    NotFound(String),
    Infeasible(Box<SolveResponse>, String),
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        match self {
            ApiError::BadRequest(msg) => (StatusCode::BAD_REQUEST, Json(json!({ "error": msg }))).into_response(),
            ApiError::Invalid(errors) => {
                (StatusCode::BAD_REQUEST, Json(json!({ "error": "invalid instance", "errors": errors }))).into_response()
            }
            ApiError::NotFound(msg) => (StatusCode::NOT_FOUND, Json(json!({ "error": msg }))).into_response(),
            ApiError::Infeasible(body, reason) => (
                StatusCode::UNPROCESSABLE_ENTITY,
                Json(json!({ "error": "infeasible", "reason": reason, "plan": body.plan, "report": body.report })),
            )
                .into_response(),
            ApiError::Internal(msg) => {
                (StatusCode::INTERNAL_SERVER_ERROR, Json(json!({ "error": msg }))).into_response()
            }
        }
    }
}

fn parse_instance(raw: RawInstance) -> Result<Instance, ApiError> {
    validate_instance(raw).map_err(|v| ApiError::Invalid(v.0))
}

async fn create_instance(State(state): State<AppState>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let raw: RawInstance =
        serde_json::from_slice(&body).map_err(|e| ApiError::Invalid(vec![json_violation(e.to_string())]))?;
    let id = state.registry.insert(parse_instance(raw)?);
    Ok((StatusCode::CREATED, Json(json!({ "id": id }))))
}

fn json_violation(message: String) -> Violation {
    Violation { row: None, column: None, message }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub id: String,
    pub num_photos: usize,
    pub num_locations: usize,
    pub true_location: usize,
    pub score_kind: ScoreKind,
    pub photos: Vec<PhotoView>,
    pub top_locations: Vec<RankedLocation>,
    pub protected_k: usize,
}

async fn summary(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Summary>, ApiError> {
    let inst = state.registry.get(&id).ok_or_else(|| ApiError::NotFound(format!("unknown instance id {id:?}")))?;
    let all: Vec<usize> = (0..inst.num_photos()).collect();
    Ok(Json(Summary {
        id,
        num_photos: inst.num_photos(),
        num_locations: inst.num_locations(),
        true_location: inst.true_location(),
        score_kind: inst.score_kind(),
        photos: photo_views(&inst),
        top_locations: ranked_locations(&inst, &vec![true; inst.num_photos()], TOP_LOCATIONS),
        protected_k: protected_k(&inst, &all).map_err(|e| ApiError::Internal(e.to_string()))?,
    }))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum InstanceRef {
    Id(String),
    Inline(RawInstance),
}

#[derive(Debug, Clone, Deserialize)]
pub struct SolveRequest {
    pub instance: InstanceRef,
    #[serde(flatten)]
    pub problem: ProblemInput,
    #[serde(default)]
    pub solver: Option<String>,
    #[serde(default)]
    pub time_cap_secs: Option<f64>,
    #[serde(default)]
    pub node_cap: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvedPhoto {
    pub id: String,
    pub true_score: f64,
    pub deleted: bool,
    pub pinned: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReportView {
    pub solver: String,
    pub proved_optimal: bool,
    pub nodes_explored: u64,
    pub best_bound: f64,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResponse {
    pub plan: PlanView,
    pub report: SolveReportView,
    pub photos: Vec<SolvedPhoto>,
    /// Ranked scores of the full collection.
    pub before: Vec<RankedLocation>,
    /// Ranked scores of the kept photos.
    pub after: Vec<RankedLocation>,
}

fn respond(inst: &Instance, spec: &ProblemSpec, solver: SolverKind, report: &SolveReport) -> SolveResponse {
    let kept = report.plan.kept_mask(inst.num_photos());
    SolveResponse {
        plan: PlanView::new(inst, &report.plan),
        report: SolveReportView {
            solver: solver.name().to_string(),
            proved_optimal: report.proved_optimal,
            nodes_explored: report.nodes_explored,
            best_bound: report.best_bound,
            wall_time_ms: report.wall_time.as_secs_f64() * 1e3,
        },
        photos: photo_views(inst)
            .into_iter()
            .enumerate()
            .map(|(i, p)| SolvedPhoto {
                id: p.id,
                true_score: p.true_score,
                deleted: !kept[i],
                pinned: spec.keep_set.binary_search(&i).is_ok(),
            })
            .collect(),
        before: ranked_locations(inst, &vec![true; inst.num_photos()], TOP_LOCATIONS),
        after: ranked_locations(inst, &kept, TOP_LOCATIONS),
    }
}

fn solver_error(e: Error) -> ApiError {
    match e {
        Error::UnsupportedSolver { .. } | Error::InvalidSpec(_) | Error::InvalidLimits(_) | Error::TooLarge { .. } => {
            ApiError::BadRequest(e.to_string())
        }
        other => ApiError::Internal(other.to_string()),
    }
}

async fn run_blocking(
    inst: Arc<Instance>,
    spec: ProblemSpec,
    solver: SolverKind,
    limits: Limits,
) -> Result<SolveReport, ApiError> {
    tokio::task::spawn_blocking(move || solve(&inst, &spec, solver, limits))
        .await
        .map_err(|e| ApiError::Internal(format!("solver task failed: {e}")))?
        .map_err(solver_error)
}

async fn solve_request(State(state): State<AppState>, body: Bytes) -> Result<Json<SolveResponse>, ApiError> {
    let request: SolveRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(format!("invalid request: {e}")))?;
    let inst = match request.instance {
        InstanceRef::Id(id) => {
            state.registry.get(&id).ok_or_else(|| ApiError::NotFound(format!("unknown instance id {id:?}")))?
        }
        InstanceRef::Inline(raw) => Arc::new(parse_instance(raw)?),
    };
    let spec = request.problem.to_spec(&inst).map_err(ApiError::BadRequest)?;
    let solver: SolverKind = match request.solver.as_deref() {
        Some(name) => name.parse().map_err(ApiError::BadRequest)?,
        None => SolverKind::Exact,
    };
    let cap = match request.time_cap_secs {
        Some(secs) => Duration::try_from_secs_f64(secs)
            .map_err(|_| ApiError::BadRequest("time_cap_secs must be a non-negative number".into()))?
            .min(state.config.max_time_cap),
        None => state.config.max_time_cap,
    };
    let mut limits = Limits::default().with_time_cap(cap);
    if let Some(nodes) = request.node_cap {
        limits = limits.with_node_cap(nodes);
    }

    let report = run_blocking(inst.clone(), spec.clone(), solver, limits).await?;
    let response = respond(&inst, &spec, solver, &report);
    if report.plan.status != PlanStatus::Infeasible {
        return Ok(Json(response));
    }
    let reason = infeasibility_reason(inst, &spec, solver, limits).await?;
    Err(ApiError::Infeasible(Box::new(response), reason))
}

async fn infeasibility_reason(
    inst: Arc<Instance>,
    spec: &ProblemSpec,
    solver: SolverKind,
    limits: Limits,
) -> Result<String, ApiError> {
    if solver == SolverKind::Greedy {
        return Ok("greedy found no plan; an exact solver may still find one".into());
    }
    if !spec.keep_set.is_empty() {
        let unpinned = spec.clone().with_keep(Vec::new());
        let free = run_blocking(inst, unpinned, solver, limits).await?;
        if free.plan.status != PlanStatus::Infeasible {
            return Ok("pinned photos force true location into top-k".into());
        }
    }
    Ok("no deletion set that keeps a photo moves the true location out of the top-k".into())
}
