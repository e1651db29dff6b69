//! Route handlers. Every body is JSON except the summary SVG; errors are
//! `{"error": message}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use cae_core::argument::NodeId;
use cae_core::confidence::{valuation_report, ConfidenceValuation, ValuationReport};
use cae_core::defeaters::{prioritise, DefeaterError, PrioritisationPlan, PrioritisationWeights};
use cae_core::delphi::{assign_roles, default_roles, run_session, BackendSpec, DelphiConfig, DelphiError, DelphiSession, Panel};
use cae_core::report::{visual_summary, ReportError, SummaryAxes};
use cae_core::soundness::ValidityMap;
use cae_core::{evaluate_validity, propagate, whatif, CaseDocument, ConfidenceError, Method, PropagationOptions, Verdict};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::store::{CaseListing, CaseStore, Snapshot, StoreError};

pub type AppState = Arc<CaseStore>;

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl ToString) -> Self {
        ApiError { status, message: message.to_string() }
    }

    fn bad_request(message: impl ToString) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn unprocessable(message: impl ToString) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match &e {
            StoreError::UnknownCase(_) | StoreError::UnknownVersion { .. } | StoreError::UnknownDefeater(_) => {
                StatusCode::NOT_FOUND
            }
            StoreError::AlreadyResolved { .. } => StatusCode::CONFLICT,
            StoreError::IdMismatch { .. } | StoreError::Invalid(_) => StatusCode::UNPROCESSABLE_ENTITY,
            StoreError::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e)
    }
}

impl From<ConfidenceError> for ApiError {
    fn from(e: ConfidenceError) -> Self {
        ApiError::unprocessable(e)
    }
}

impl From<DefeaterError> for ApiError {
    fn from(e: DefeaterError) -> Self {
        match e {
            DefeaterError::InvalidWeights(_) => ApiError::bad_request(e),
            DefeaterError::UnknownDefeater(_) => ApiError::new(StatusCode::NOT_FOUND, e),
            _ => ApiError::unprocessable(e),
        }
    }
}

impl From<ReportError> for ApiError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::OrdinalOutOfRange { .. } => ApiError::bad_request(e),
            ReportError::MissingTop(_) => ApiError::unprocessable(e),
        }
    }
}

impl From<DelphiError> for ApiError {
    fn from(e: DelphiError) -> Self {
        ApiError::unprocessable(e)
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::unprocessable(format!("malformed request body: {e}")))
}

fn parse_method(method: Option<&str>) -> ApiResult<Method> {
    method.map_or(Ok(Method::default()), |m| m.parse().map_err(ApiError::bad_request))
}

fn parse_node(id: &str) -> ApiResult<NodeId> {
    NodeId::new(id).map_err(|e| ApiError::new(StatusCode::NOT_FOUND, e))
}

fn options(allow_missing_warrant: bool) -> PropagationOptions {
    PropagationOptions { allow_missing_warrant, ..PropagationOptions::default() }
}

#[derive(Debug, Serialize)]
pub struct VersionRef {
    pub id: String,
    pub version: u64,
}

impl VersionRef {
    fn of(id: &str, snap: &Snapshot) -> Json<Self> {
        Json(VersionRef { id: id.to_string(), version: snap.version })
    }
}

pub async fn list_cases(State(store): State<AppState>) -> Json<Vec<CaseListing>> {
    Json(store.list())
}

#[derive(Debug, Default, Deserialize)]
pub struct CaseQuery {
    version: Option<u64>,
    method: Option<String>,
    #[serde(default)]
    allow_missing_warrant: bool,
}

#[derive(Debug, Serialize)]
pub struct CaseView {
    pub id: String,
    pub version: u64,
    pub document: CaseDocument,
    pub validity: ValidityMap,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valuation: Option<ValuationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valuation_error: Option<String>,
}

/// A case that cannot be valued (for example, missing assignments) is
/// still returned with its validity; the reason goes in `valuation_error`.
pub async fn get_case(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<CaseQuery>,
) -> ApiResult<Json<CaseView>> {
    let method = parse_method(q.method.as_deref())?;
    let snap = store.get(&id, q.version)?;
    let (valuation, valuation_error) = match valuation_report(&snap.graph, method, &options(q.allow_missing_warrant)) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(Json(CaseView {
        id,
        version: snap.version,
        document: snap.graph.to_document(),
        validity: evaluate_validity(&snap.graph),
        valuation,
        valuation_error,
    }))
}

pub async fn put_case(State(store): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<VersionRef>> {
    let doc = CaseDocument::from_json(std::str::from_utf8(&body).map_err(ApiError::unprocessable)?)
        .map_err(ApiError::unprocessable)?;
    let snap = store.put(&id, doc)?;
    Ok(VersionRef::of(&id, &snap))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResolveBody {
    verdict: Verdict,
}

pub async fn resolve(
    State(store): State<AppState>,
    Path((id, defeater)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult<Json<VersionRef>> {
    let defeater = parse_node(&defeater)?;
    let ResolveBody { verdict } = parse_body(&body)?;
    let snap = store.resolve(&id, &defeater, verdict)?;
    Ok(VersionRef::of(&id, &snap))
}

/// Entries merge into the current assignments.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssignmentsBody {
    #[serde(default)]
    posterior: BTreeMap<NodeId, f64>,
    #[serde(default)]
    warrant_conf: BTreeMap<NodeId, f64>,
}

pub async fn set_assignments(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<VersionRef>> {
    let change: AssignmentsBody = parse_body(&body)?;
    let snap = store.update(&id, |g| {
        let mut assign = g.assignments().clone();
        assign.posterior.extend(change.posterior);
        assign.warrant_conf.extend(change.warrant_conf);
        Ok(g.with_assignments(assign)?)
    })?;
    Ok(VersionRef::of(&id, &snap))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WhatIfBody {
    overrides: BTreeMap<NodeId, f64>,
    #[serde(default)]
    method: Option<String>,
    #[serde(default)]
    version: Option<u64>,
    #[serde(default)]
    allow_missing_warrant: bool,
}

#[derive(Debug, Serialize)]
pub struct WhatIfView {
    pub id: String,
    pub version: u64,
    pub method: Method,
    pub baseline_top: f64,
    pub top: f64,
    /// Change at two decimals, as displayed.
    pub delta: f64,
    pub raw_delta: f64,
    pub valuation: ConfidenceValuation<f64>,
}

/// Evaluates overrides without storing them.
pub async fn whatif_case(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<WhatIfView>> {
    let req: WhatIfBody = parse_body(&body)?;
    let method = parse_method(req.method.as_deref())?;
    let snap = store.get(&id, req.version)?;
    let w = whatif(&snap.graph, snap.graph.assignments(), method, &req.overrides, &options(req.allow_missing_warrant))?;
    Ok(Json(WhatIfView {
        id,
        version: snap.version,
        method,
        baseline_top: w.baseline_top,
        top: w.top,
        delta: w.delta_top,
        raw_delta: w.raw_delta_top,
        valuation: w.valuation,
    }))
}

#[derive(Debug, Deserialize)]
pub struct PrioritisationQuery {
    wp: Option<f64>,
    wi: Option<f64>,
    we: Option<f64>,
    method: Option<String>,
    version: Option<u64>,
}

pub async fn prioritisation(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<PrioritisationQuery>,
) -> ApiResult<Json<PrioritisationPlan>> {
    let method = parse_method(q.method.as_deref())?;
    let weights = PrioritisationWeights::new(q.wp.unwrap_or(1.0), q.wi.unwrap_or(1.0), q.we.unwrap_or(1.0))?;
    let snap = store.get(&id, q.version)?;
    let plan = prioritise(&snap.graph, snap.graph.assignments(), method, &weights, &PropagationOptions::default())?;
    Ok(Json(plan))
}

#[derive(Debug, Deserialize)]
pub struct SummaryQuery {
    ev: Option<u8>,
    aq: Option<u8>,
    sa: Option<u8>,
    method: Option<String>,
    version: Option<u64>,
}

pub async fn summary_svg(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<SummaryQuery>,
) -> ApiResult<Response> {
    let method = parse_method(q.method.as_deref())?;
    let axes = SummaryAxes::new(q.ev.unwrap_or(3), q.aq.unwrap_or(3), q.sa.unwrap_or(3))?;
    let snap = store.get(&id, q.version)?;
    let valuation = propagate(&snap.graph, snap.graph.assignments(), method, &PropagationOptions::default())?;
    let summary = visual_summary(&snap.graph, &valuation, axes)?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], summary.svg).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DelphiBody {
    scenario: String,
    backend: BackendSpec,
    #[serde(default)]
    config: DelphiConfig,
    #[serde(default)]
    n_experts: Option<usize>,
}

/// Runs a whole session on the blocking pool. Only scripted and simulated
/// backends are accepted.
pub async fn delphi_session(body: Bytes) -> ApiResult<Json<DelphiSession>> {
    let req: DelphiBody = parse_body(&body)?;
    if !req.backend.is_fixture() {
        return Err(ApiError::bad_request("the service runs scripted and simulated backends only"));
    }
    let panel = match req.n_experts {
        Some(n) => assign_roles(n, &default_roles())?,
        None => Panel::default(),
    };
    let backend = req.backend.build()?;
    let session = tokio::task::spawn_blocking(move || run_session(&req.scenario, &panel, &req.config, backend.as_ref()))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e))??;
    Ok(Json(session))
}
