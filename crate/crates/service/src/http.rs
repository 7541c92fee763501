//! JSON-over-HTTP routes.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use copula_crm::engine::{CohortDecision, MtdEstimate, Restrictions, TrialStatus};
use copula_crm::{DesignConfig, Outcome, StandardizedDose};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::ServiceError;
use crate::store::{Snapshot, TrialService};
use crate::SCHEMA_VERSION;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Validation { .. } => StatusCode::BAD_REQUEST,
            ServiceError::Conflict(_) => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let mut error = json!({ "code": self.code(), "message": self.to_string() });
        if let ServiceError::Validation { field, .. } = &self {
            error["field"] = json!(field);
        }
        (status, Json(json!({ "schema_version": SCHEMA_VERSION, "error": error }))).into_response()
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateTrialRequest {
    #[serde(default)]
    pub config: DesignConfig,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomesRequest {
    pub outcomes: [Outcome; 2],
    /// Optional echo of the assigned doses, checked against the assignment.
    #[serde(default)]
    pub doses: Option<[StandardizedDose; 2]>,
}

/// Body of `GET /trials/{id}`.
#[derive(Debug, Serialize)]
pub struct TrialView<'a> {
    pub schema_version: u32,
    pub trial_id: &'a str,
    pub label: Option<&'a str>,
    #[serde(flatten)]
    pub status: &'a TrialStatus,
    pub config: &'a DesignConfig,
    pub patients_treated: usize,
    pub dlt_count: usize,
    pub cohorts: &'a [copula_crm::engine::CohortRecord],
    pub pending: Option<&'a copula_crm::engine::CohortAssignment>,
    pub restrictions: &'a Restrictions,
    pub posterior: Option<&'a copula_crm::engine::PosteriorSummary>,
    pub mtd_preview: Option<MtdEstimate>,
    pub final_estimate: Option<&'a MtdEstimate>,
    pub last_decision: Option<&'a CohortDecision>,
    pub event_count: u64,
}

pub fn trial_view(s: &Snapshot) -> Result<Value, ServiceError> {
    let view = TrialView {
        schema_version: SCHEMA_VERSION,
        trial_id: &s.trial_id,
        label: s.label.as_deref(),
        status: &s.state.status,
        config: &s.state.config,
        patients_treated: s.state.patients_treated(),
        dlt_count: s.state.dlt_count(),
        cohorts: &s.state.cohorts,
        pending: s.state.pending.as_ref(),
        restrictions: &s.state.restrictions,
        posterior: s.state.posterior.as_ref(),
        mtd_preview: s.mtd_preview()?,
        final_estimate: s.state.final_estimate.as_ref(),
        last_decision: s.last_decision.as_ref(),
        event_count: s.event_count,
    };
    serde_json::to_value(view).map_err(|e| ServiceError::Io(std::io::Error::other(e)))
}

fn parse<T: DeserializeOwned + Default>(body: &Bytes) -> Result<T, ServiceError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    parse_required(body)
}

fn parse_required<T: DeserializeOwned>(body: &Bytes) -> Result<T, ServiceError> {
    serde_json::from_slice(body).map_err(|e| ServiceError::validation("body", e.to_string()))
}

async fn blocking<T, F>(f: F) -> Result<T, ServiceError>
where
    F: FnOnce() -> Result<T, ServiceError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Io(std::io::Error::other(e)))?
}

async fn create_trial(State(svc): State<Arc<TrialService>>, body: Bytes) -> Result<Response, ServiceError> {
    let req: CreateTrialRequest = parse(&body)?;
    let created = blocking(move || svc.create(req.config, req.label)).await?;
    let mut view = trial_view(&created.snapshot)?;
    view["assignment"] = json!(created.assignment);
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

async fn record_outcomes(
    State(svc): State<Arc<TrialService>>,
    Path((id, cohort)): Path<(String, String)>,
    body: Bytes,
) -> Result<Response, ServiceError> {
    let cohort: usize = cohort
        .parse()
        .map_err(|_| ServiceError::validation("cohort", format!("`{cohort}` is not a cohort index")))?;
    let req: OutcomesRequest = parse_required(&body)?;
    let recorded = blocking(move || svc.record_outcomes(&id, cohort, req.outcomes, req.doses)).await?;
    let mut view = trial_view(&recorded.snapshot)?;
    view["decision"] = json!(recorded.decision);
    Ok(Json(view).into_response())
}

async fn get_trial(State(svc): State<Arc<TrialService>>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    let snap = blocking(move || svc.get(&id)).await?;
    Ok(Json(trial_view(&snap)?).into_response())
}

async fn get_mtd(State(svc): State<Arc<TrialService>>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    let snap = blocking(move || svc.get(&id)).await?;
    let estimate = snap.mtd_preview()?;
    Ok(Json(json!({
        "schema_version": SCHEMA_VERSION,
        "trial_id": snap.trial_id,
        "final": snap.state.final_estimate.is_some(),
        "medians": snap.state.posterior.as_ref().map(|p| p.medians),
        "estimate": estimate,
    }))
    .into_response())
}

async fn get_events(State(svc): State<Arc<TrialService>>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    let events = blocking(move || {
        let events = svc.events(&id)?;
        Ok((id, events))
    })
    .await?;
    Ok(Json(json!({
        "schema_version": SCHEMA_VERSION,
        "trial_id": events.0,
        "events": events.1,
    }))
    .into_response())
}

async fn list_trials(State(svc): State<Arc<TrialService>>) -> Result<Response, ServiceError> {
    let ids = blocking(move || svc.list()).await?;
    Ok(Json(json!({ "schema_version": SCHEMA_VERSION, "trials": ids })).into_response())
}

async fn not_found() -> ServiceError {
    ServiceError::NotFound("route".into())
}

pub fn router(service: Arc<TrialService>) -> Router {
    Router::new()
        .route("/trials", post(create_trial).get(list_trials))
        .route("/trials/{id}", get(get_trial))
        .route("/trials/{id}/mtd", get(get_mtd))
        .route("/trials/{id}/events", get(get_events))
        .route("/trials/{id}/cohorts/{k}/outcomes", post(record_outcomes))
        .fallback(not_found)
        .with_state(service)
}

/// Binds `addr` and serves until ctrl-c.
pub async fn serve(addr: SocketAddr, service: Arc<TrialService>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    serve_on(listener, service).await
}

pub async fn serve_on(listener: tokio::net::TcpListener, service: Arc<TrialService>) -> std::io::Result<()> {
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
