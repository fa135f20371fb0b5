//! HTTP/JSON API for catalog browsing, single-platform assessment projects
//! and multi-platform rankings.
//!
//! Handlers are thin adapters: they parse the request, call the engine and
//! the store, and serialize whatever the engine returns.

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::Deserialize;
use tower_http::services::ServeDir;

use platform_rater_core::assessment::ProjectUpdate;
use platform_rater_core::export::{layers_csv, ranking_csv, report_csv};
use platform_rater_core::{
    filter_criteria, kiviat_series, AssessmentProject, Catalog, ConsensusRule, ConsistencyConfig,
    Dimension, DocumentKind, Layer, RankingInput, RankingResult, Store, StoreError,
};

mod error;

pub use error::{ApiError, ApiJson, ApiPath, ApiQuery, ErrorCode, ErrorDetail};

/// How often a mutation without `expected_version` is retried after losing a race.
const MAX_RETRIES: usize = 8;

const PLACEHOLDER_PAGE: &str = include_str!("../static/index.html");

#[derive(Clone)]
pub struct AppState {
    pub catalog: Arc<Catalog>,
    pub store: Store,
    pub consistency: ConsistencyConfig,
}

impl AppState {
    pub fn new(catalog: Catalog, store: Store) -> Self {
        AppState {
            catalog: Arc::new(catalog),
            store,
            consistency: ConsistencyConfig::default(),
        }
    }
}

/// Builds the application. Static files come from `static_dir` when given,
/// otherwise a built-in landing page is served at `/`.
pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/catalog", get(get_catalog))
        .route("/catalog/criteria", get(list_criteria))
        .route("/projects", post(create_project).get(list_projects))
        .route("/projects/{id}", get(get_project).put(update_project))
        .route("/projects/{id}/responses", post(record_response))
        .route("/projects/{id}/snapshots", post(take_snapshot))
        .route("/projects/{id}/report", get(project_report))
        .route("/projects/{id}/report.csv", get(project_report_csv))
        .route("/projects/{id}/layers.csv", get(project_layers_csv))
        .route("/rankings", post(create_ranking).get(list_rankings))
        .route("/rankings/{id}", get(get_ranking))
        .route("/rankings/{id}/kiviat", get(ranking_kiviat))
        .route("/rankings/{id}/result.csv", get(ranking_result_csv))
        .fallback(api_not_found)
        .with_state(state);

    let app = Router::new().nest("/api", api);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app
            .route("/", get(|| async { Html(PLACEHOLDER_PAGE) }))
            .route("/index.html", get(|| async { Html(PLACEHOLDER_PAGE) })),
    }
}

/// Serves `app` on `listener` until the future resolves or the process ends.
pub async fn serve(
    listener: tokio::net::TcpListener,
    app: Router,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await
}

async fn api_not_found() -> ApiError {
    ApiError::not_found("no such endpoint")
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))?
}

fn csv_response(body: String) -> Response {
    ([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], body).into_response()
}

fn internal(e: impl std::fmt::Display) -> ApiError {
    ApiError::new(ErrorCode::Internal, e.to_string())
}

fn new_id() -> String {
    uuid::Uuid::new_v4().simple().to_string()
}

// ---- catalog ----

async fn get_catalog(State(state): State<AppState>) -> Json<Catalog> {
    Json(state.catalog.as_ref().clone())
}

#[derive(Deserialize)]
struct CriteriaQuery {
    dimension: Option<String>,
    layer: Option<String>,
}

async fn list_criteria(
    State(state): State<AppState>,
    ApiQuery(q): ApiQuery<CriteriaQuery>,
) -> Result<Response, ApiError> {
    let mut err = ApiError::validation("invalid filter");
    let mut dimension = None;
    let mut layer = None;
    if let Some(s) = q.dimension.as_deref().filter(|s| !s.is_empty()) {
        match s.parse::<Dimension>() {
            Ok(d) => dimension = Some(d),
            Err(e) => err = err.with_detail("dimension", e.to_string()),
        }
    }
    if let Some(s) = q.layer.as_deref().filter(|s| !s.is_empty()) {
        match s.parse::<Layer>() {
            Ok(l) => layer = Some(l),
            Err(e) => err = err.with_detail("layer", e.to_string()),
        }
    }
    if !err.details.is_empty() {
        return Err(err);
    }
    Ok(Json(filter_criteria(&state.catalog, dimension, layer)).into_response())
}

// ---- projects ----

#[derive(Deserialize)]
struct CreateProject {
    #[serde(default)]
    id: Option<String>,
    name: String,
    platform_name: String,
    #[serde(default)]
    platform_description: String,
    selected_criteria: Vec<String>,
    #[serde(default)]
    consensus: Option<ConsensusRule>,
}

fn load_project(state: &AppState, id: &str) -> Result<(AssessmentProject, u64), ApiError> {
    let doc = state.store.load(DocumentKind::SingleAssessment, id)?;
    let project = serde_json::from_value(doc.payload).map_err(internal)?;
    Ok((project, doc.version))
}

/// Load, apply `f`, save; conflicts are retried only when the caller did not
/// pin a version.
fn mutate_project<R>(
    state: &AppState,
    id: &str,
    expected_version: Option<u64>,
    f: impl Fn(&mut AssessmentProject, DateTime<Utc>) -> Result<R, ApiError>,
) -> Result<(AssessmentProject, R), ApiError> {
    let mut attempts = 0;
    loop {
        let (mut project, current) = load_project(state, id)?;
        if let Some(expected) = expected_version {
            if expected != current {
                return Err(StoreError::Conflict {
                    kind: DocumentKind::SingleAssessment,
                    id: id.to_string(),
                    expected,
                    current,
                }
                .into());
            }
        }
        let out = f(&mut project, state.store.now())?;
        let payload = serde_json::to_value(&project).map_err(internal)?;
        match state
            .store
            .save(DocumentKind::SingleAssessment, id, payload, Some(current))
        {
            Ok(_) => return Ok((project, out)),
            Err(StoreError::Conflict { .. })
                if expected_version.is_none() && attempts < MAX_RETRIES =>
            {
                attempts += 1;
            }
            Err(e) => return Err(e.into()),
        }
    }
}

async fn create_project(
    State(state): State<AppState>,
    ApiJson(body): ApiJson<CreateProject>,
) -> Result<Response, ApiError> {
    blocking(move || {
        let id = body.id.unwrap_or_else(new_id);
        let mut project = AssessmentProject::create(
            &state.catalog,
            id.clone(),
            body.name,
            body.platform_name,
            body.platform_description,
            body.selected_criteria,
            state.store.now(),
        )?;
        if let Some(rule) = body.consensus {
            project.consensus = rule;
        }
        let payload = serde_json::to_value(&project).map_err(internal)?;
        state
            .store
            .save(DocumentKind::SingleAssessment, &id, payload, Some(0))?;
        Ok((
            StatusCode::CREATED,
            [(header::LOCATION, format!("/api/projects/{id}"))],
            Json(project),
        )
            .into_response())
    })
    .await
}

async fn list_projects(State(state): State<AppState>) -> Result<Response, ApiError> {
    blocking(move || {
        let list = state.store.list(Some(DocumentKind::SingleAssessment))?;
        Ok(Json(list).into_response())
    })
    .await
}

async fn get_project(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<String>,
) -> Result<Json<AssessmentProject>, ApiError> {
    blocking(move || Ok(Json(load_project(&state, &id)?.0))).await
}

#[derive(Deserialize)]
struct UpdateProject {
    expected_version: u64,
    #[serde(flatten)]
    update: ProjectUpdate,
}

async fn update_project(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<String>,
    ApiJson(body): ApiJson<UpdateProject>,
) -> Result<Json<AssessmentProject>, ApiError> {
    blocking(move || {
        let (project, ()) = mutate_project(&state, &id, Some(body.expected_version), |p, at| {
            Ok(p.update(&state.catalog, body.update.clone(), at)?)
        })?;
        Ok(Json(project))
    })
    .await
}

#[derive(Deserialize)]
struct RecordResponse {
    question: String,
    assessor: String,
    value: i64,
    #[serde(default)]
    expected_version: Option<u64>,
}

async fn record_response(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<String>,
    ApiJson(body): ApiJson<RecordResponse>,
) -> Result<Json<AssessmentProject>, ApiError> {
    blocking(move || {
        let (project, _) = mutate_project(&state, &id, body.expected_version, |p, at| {
            Ok(p.record_response(&state.catalog, &body.assessor, &body.question, body.value, at)?)
        })?;
        Ok(Json(project))
    })
    .await
}

#[derive(Deserialize)]
struct TakeSnapshot {
    #[serde(default)]
    label: String,
    #[serde(default)]
    expected_version: Option<u64>,
}

#[derive(serde::Serialize)]
struct SnapshotTaken {
    snapshot_id: String,
    project: AssessmentProject,
}

async fn take_snapshot(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<String>,
    ApiJson(body): ApiJson<TakeSnapshot>,
) -> Result<Response, ApiError> {
    blocking(move || {
        let (project, snapshot_id) =
            mutate_project(&state, &id, body.expected_version, |p, at| {
                Ok(p.snapshot(body.label.clone(), at))
            })?;
        Ok((
            StatusCode::CREATED,
            Json(SnapshotTaken {
                snapshot_id,
                project,
            }),
        )
            .into_response())
    })
    .await
}

async fn project_report(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<String>,
) -> Result<Response, ApiError> {
    blocking(move || {
        let (project, _) = load_project(&state, &id)?;
        Ok(Json(project.satisfaction_report(&state.catalog)).into_response())
    })
    .await
}

async fn project_report_csv(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<String>,
) -> Result<Response, ApiError> {
    blocking(move || {
        let (project, _) = load_project(&state, &id)?;
        Ok(csv_response(report_csv(&project.satisfaction_report(&state.catalog))))
    })
    .await
}

async fn project_layers_csv(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<String>,
) -> Result<Response, ApiError> {
    blocking(move || {
        let (project, _) = load_project(&state, &id)?;
        Ok(csv_response(layers_csv(&project.satisfaction_report(&state.catalog))))
    })
    .await
}

// ---- rankings ----

fn load_ranking(state: &AppState, id: &str) -> Result<RankingResult, ApiError> {
    let doc = state.store.load(DocumentKind::RankingResult, id)?;
    serde_json::from_value(doc.payload).map_err(internal)
}

async fn create_ranking(
    State(state): State<AppState>,
    ApiJson(input): ApiJson<RankingInput>,
) -> Result<Response, ApiError> {
    blocking(move || {
        let result = input.evaluate(&state.consistency)?;
        let id = new_id();
        let input_payload = serde_json::to_value(&input).map_err(internal)?;
        let result_payload = serde_json::to_value(&result).map_err(internal)?;
        state
            .store
            .save(DocumentKind::MultiAssessment, &id, input_payload, Some(0))?;
        state
            .store
            .save(DocumentKind::RankingResult, &id, result_payload, Some(0))?;
        Ok((
            StatusCode::CREATED,
            [(header::LOCATION, format!("/api/rankings/{id}"))],
            Json(result),
        )
            .into_response())
    })
    .await
}

async fn list_rankings(State(state): State<AppState>) -> Result<Response, ApiError> {
    blocking(move || {
        let list = state.store.list(Some(DocumentKind::MultiAssessment))?;
        Ok(Json(list).into_response())
    })
    .await
}

async fn get_ranking(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<String>,
) -> Result<Json<RankingResult>, ApiError> {
    blocking(move || Ok(Json(load_ranking(&state, &id)?))).await
}

async fn ranking_kiviat(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<String>,
) -> Result<Response, ApiError> {
    blocking(move || Ok(Json(kiviat_series(&load_ranking(&state, &id)?)).into_response())).await
}

async fn ranking_result_csv(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<String>,
) -> Result<Response, ApiError> {
    blocking(move || Ok(csv_response(ranking_csv(&load_ranking(&state, &id)?)))).await
}
