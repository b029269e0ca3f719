//! HTTP+JSON surface: control plane, data plane and recommendation endpoints.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use uptrendz_core::catalog::{AttributeValue, CatalogError, NewInteraction};
use uptrendz_core::gateway::{Gateway, RecommendationRequest, ServeError};
use uptrendz_core::registry::{
    AttributeSpec, DomainConfig, NewEntityType, NewInteractionType, NewScenario, RegistryError,
};
use uptrendz_core::{Error, Platform};

/// Request bodies above this are rejected before parsing; the per-record
/// limit is enforced by the catalog itself.
const BODY_LIMIT: usize = 4 << 20;

#[derive(Clone)]
pub struct AppState {
    pub platform: Arc<Platform>,
    pub gateway: Arc<Gateway>,
}

impl AppState {
    pub fn new(platform: Arc<Platform>, gateway: Arc<Gateway>) -> Self {
        Self { platform, gateway }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/domains", post(create_domain).get(list_domains))
        .route("/domains/{d}", get(readback))
        .route("/domains/{d}/entity-types", post(define_entity_type))
        .route("/domains/{d}/entity-types/{t}/attributes", post(extend_entity_type))
        .route("/domains/{d}/interaction-types", post(define_interaction_type))
        .route("/domains/{d}/scenarios", post(create_scenario))
        .route("/domains/{d}/catalog/{t}/{id}", put(upsert_entity).get(get_entity))
        .route("/domains/{d}/interactions", post(record_interaction))
        .route("/domains/{d}/scenarios/{s}/recommendations", get(recommend))
        .route("/registry/violations", get(violations))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state)
}

/// JSON error body `{error, code, detail}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ApiError {
    pub error: String,
    pub code: u16,
    pub detail: String,
}

impl ApiError {
    fn new(code: u16, error: &str, detail: impl Into<String>) -> Self {
        Self { error: error.into(), code, detail: detail.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.code).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

fn registry_status(e: &RegistryError) -> u16 {
    match e {
        RegistryError::UnknownDomain(_) => 404,
        RegistryError::UnknownEntityType(_)
        | RegistryError::UnknownInteractionType(_)
        | RegistryError::UnknownScenario(_) => 422,
        RegistryError::DuplicateName(_)
        | RegistryError::DuplicateEntityType(_)
        | RegistryError::DuplicateInteractionType(_)
        | RegistryError::DuplicateScenario(_) => 409,
        _ => 400,
    }
}

fn catalog_status(e: &CatalogError) -> u16 {
    match e {
        CatalogError::UnknownDomain(_) | CatalogError::UnknownEntityType(_) => 404,
        CatalogError::UnknownTarget { .. } | CatalogError::UnknownInteractionType(_) => 422,
        CatalogError::PayloadTooLarge(_) => 413,
        CatalogError::CorruptLog { .. } | CatalogError::Io(_) => 500,
        _ => 400,
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Registry(r) => registry_status(r),
            Error::Catalog(c) => catalog_status(c),
            Error::Storage(_) => 500,
        };
        ApiError::new(code, e.kind(), e.to_string())
    }
}

impl From<ServeError> for ApiError {
    fn from(e: ServeError) -> Self {
        ApiError::new(e.status(), e.kind(), e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        let code = e.status().as_u16();
        ApiError::new(code, "InvalidBody", e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::new(400, "InvalidRequest", e.body_text())
    }
}

type ApiResult<T> = Result<T, ApiError>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, Error> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(500, "Internal", e.to_string()))?
        .map_err(ApiError::from)
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({"status": "ok"}))
}

#[derive(Deserialize)]
struct CreateDomain {
    name: String,
}

async fn create_domain(
    State(s): State<AppState>,
    body: Result<Json<CreateDomain>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let Json(body) = body?;
    let domain = blocking(move || s.platform.create_system_domain(&body.name)).await?;
    Ok((StatusCode::CREATED, Json(domain)))
}

async fn list_domains(State(s): State<AppState>) -> Json<Vec<String>> {
    Json(s.platform.domain_ids().into_iter().map(|d| d.to_string()).collect())
}

async fn readback(State(s): State<AppState>, Path(d): Path<String>) -> ApiResult<Json<DomainConfig>> {
    Ok(Json((*s.platform.domain_config(&d)?).clone()))
}

async fn define_entity_type(
    State(s): State<AppState>,
    Path(d): Path<String>,
    body: Result<Json<NewEntityType>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let Json(body) = body?;
    let schema = blocking(move || s.platform.define_entity_schema(&d, body)).await?;
    Ok((StatusCode::CREATED, Json(schema)))
}

#[derive(Deserialize)]
struct ExtendSchema {
    attributes: Vec<AttributeSpec>,
}

async fn extend_entity_type(
    State(s): State<AppState>,
    Path((d, t)): Path<(String, String)>,
    body: Result<Json<ExtendSchema>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let Json(body) = body?;
    let schema = blocking(move || s.platform.extend_entity_schema(&d, &t, body.attributes)).await?;
    Ok(Json(schema))
}

async fn define_interaction_type(
    State(s): State<AppState>,
    Path(d): Path<String>,
    body: Result<Json<NewInteractionType>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let Json(body) = body?;
    let ty = blocking(move || s.platform.define_interaction_type(&d, body)).await?;
    Ok((StatusCode::CREATED, Json(ty)))
}

async fn create_scenario(
    State(s): State<AppState>,
    Path(d): Path<String>,
    body: Result<Json<NewScenario>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let Json(body) = body?;
    let scenario = blocking(move || s.platform.create_scenario(&d, body)).await?;
    Ok((StatusCode::CREATED, Json(scenario)))
}

async fn upsert_entity(
    State(s): State<AppState>,
    Path((d, t, id)): Path<(String, String, String)>,
    body: Result<Json<BTreeMap<String, AttributeValue>>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let Json(values) = body?;
    let ack = blocking(move || s.platform.upsert_entity(&d, &t, &id, values)).await?;
    Ok(Json(ack))
}

async fn get_entity(
    State(s): State<AppState>,
    Path((d, t, id)): Path<(String, String, String)>,
) -> ApiResult<impl IntoResponse> {
    let record = s.platform.entity(&d, &t, &id).map_err(|e| match e {
        Error::Catalog(CatalogError::UnknownTarget { entity_type, id }) => {
            ApiError::new(404, "UnknownEntity", format!("no {entity_type} with id {id:?}"))
        }
        other => other.into(),
    })?;
    Ok(Json((*record).clone()))
}

async fn record_interaction(
    State(s): State<AppState>,
    Path(d): Path<String>,
    body: Result<Json<NewInteraction>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let Json(event) = body?;
    let ack = blocking(move || s.platform.record_interaction(&d, event)).await?;
    Ok(Json(ack))
}

async fn recommend(
    State(s): State<AppState>,
    Path((d, scenario)): Path<(String, String)>,
    query: Result<Query<RecommendationRequest>, QueryRejection>,
) -> ApiResult<impl IntoResponse> {
    let Query(req) = query?;
    let (tx, rx) = tokio::sync::oneshot::channel();
    s.gateway.submit(&d, &scenario, req, move |result| {
        let _ = tx.send(result);
    })?;
    let response = rx.await.map_err(|_| ApiError::from(ServeError::Unavailable))??;
    Ok(Json(response))
}

async fn violations(State(s): State<AppState>) -> impl IntoResponse {
    Json(s.platform.validate_registry())
}

/// Parses a bootstrap document: one domain configuration or an array of them.
pub fn parse_config_documents(text: &str) -> serde_json::Result<Vec<DomainConfig>> {
    match serde_json::from_str::<serde_json::Value>(text)? {
        serde_json::Value::Array(items) => items.into_iter().map(serde_json::from_value).collect(),
        single => Ok(vec![serde_json::from_value(single)?]),
    }
}
