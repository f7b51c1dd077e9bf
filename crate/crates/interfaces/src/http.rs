//! JSON API over one network held in memory.
//!
//! Evidence may be sent as a map (`{"v2": "(64-74]"}`, or a list of states
//! for a set) or as a list of `var=state` strings. Targets accept the same
//! map form or a single `var=state` string. Failures return
//! `{"error": <name>, "message": <text>}`.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cardionet_core::analysis::{
    compare_proportions, influential_findings, prevalence_table, whatif_improvements, BetaPosterior,
    DEFAULT_COMPARISON_SAMPLES,
};
use cardionet_core::inference::{parse_evidence, parse_item, posterior_marginals, InferenceError, Marginal, Method};
use cardionet_core::io::NetworkDocument;
use cardionet_core::{BayesianNetwork, Evidence};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{answer_query, parse_method, AppError};

#[derive(Serialize)]
struct ErrorBody {
    error: &'static str,
    message: String,
}

impl IntoResponse for AppError {
    fn into_response(self) -> Response {
        let status = match &self {
            AppError::Inference(InferenceError::ZeroEvidence) => StatusCode::UNPROCESSABLE_ENTITY,
            AppError::Analysis(cardionet_core::analysis::AnalysisError::Inference(InferenceError::ZeroEvidence)) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            e if e.is_client_error() => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = ErrorBody {
            error: self.name(),
            message: self.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum EvidenceInput {
    Items(Vec<String>),
    Map(Evidence),
}

impl Default for EvidenceInput {
    fn default() -> Self {
        EvidenceInput::Map(Evidence::new())
    }
}

impl EvidenceInput {
    fn resolve(self) -> Result<Evidence, AppError> {
        match self {
            EvidenceInput::Map(e) => Ok(e),
            EvidenceInput::Items(items) => Ok(parse_evidence(&items)?),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum TargetInput {
    Item(String),
    Map(Evidence),
}

impl TargetInput {
    fn resolve(self) -> Result<Evidence, AppError> {
        let target = match self {
            TargetInput::Map(e) => e,
            TargetInput::Item(item) => {
                let (var, states) = parse_item(&item)?;
                Evidence::new().with_any(var, states)
            }
        };
        if target.is_empty() {
            return Err(AppError::Request("target must name at least one variable".into()));
        }
        Ok(target)
    }
}

/// `{"v5": "normal"}` or `["v5=normal", ...]`; the list form keeps its order.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ImprovementInput {
    Items(Vec<String>),
    Map(BTreeMap<String, String>),
}

impl ImprovementInput {
    fn resolve(self) -> Result<Vec<(String, String)>, AppError> {
        match self {
            ImprovementInput::Map(m) => Ok(m.into_iter().collect()),
            ImprovementInput::Items(items) => items.iter().map(|i| single_state(i)).collect(),
        }
    }
}

/// Parses `var=state`, rejecting state sets.
pub(crate) fn single_state(item: &str) -> Result<(String, String), AppError> {
    let (var, mut states) = parse_item(item)?;
    if states.len() != 1 {
        return Err(AppError::Request(format!("{item:?} must name exactly one state")));
    }
    Ok((var, states.remove(0)))
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OutcomeInput {
    Item(String),
    Pair { variable: String, states: Vec<String> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryRequest {
    #[serde(default)]
    evidence: EvidenceInput,
    target: TargetInput,
    /// `ve` or `enum`; the long names are accepted too.
    #[serde(default)]
    method: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarginalsRequest {
    #[serde(default)]
    evidence: EvidenceInput,
}

#[derive(Debug, Serialize)]
struct MarginalsResponse {
    evidence: Evidence,
    marginals: Vec<Marginal>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InfluenceRequest {
    evidence: EvidenceInput,
    target: TargetInput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WhatIfRequest {
    base: EvidenceInput,
    improvements: ImprovementInput,
    target: TargetInput,
    #[serde(default)]
    combined: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PrevalenceRequest {
    group: String,
    outcomes: Vec<OutcomeInput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompareRequest {
    a: [f64; 2],
    b: [f64; 2],
    #[serde(default)]
    samples: Option<u64>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    variables: usize,
}

type Shared = Arc<BayesianNetwork>;

fn decode<T: DeserializeOwned>(body: &Bytes) -> Result<T, AppError> {
    serde_json::from_slice(body).map_err(|e| AppError::Request(format!("invalid request body: {e}")))
}

/// Runs CPU-bound work off the async executor.
async fn compute<T, F>(net: Shared, body: Bytes, f: F) -> Result<Json<T>, AppError>
where
    T: Send + 'static,
    F: FnOnce(&BayesianNetwork, Bytes) -> Result<T, AppError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&net, body))
        .await
        .map_err(|e| AppError::Request(format!("worker failed: {e}")))?
        .map(Json)
}

async fn health(State(net): State<Shared>) -> Json<Health> {
    Json(Health {
        status: "ok",
        variables: net.len(),
    })
}

async fn network(State(net): State<Shared>) -> Json<NetworkDocument> {
    Json(NetworkDocument::from_network(&net))
}

async fn query(State(net): State<Shared>, body: Bytes) -> Result<impl IntoResponse, AppError> {
    compute(net, body, |net, body| {
        let req: QueryRequest = decode(&body)?;
        let (evidence, target) = (req.evidence.resolve()?, req.target.resolve()?);
        let method = match req.method.as_deref() {
            None => Method::Elimination,
            Some(m) => parse_method(m).ok_or_else(|| AppError::Request(format!("unknown method {m:?}")))?,
        };
        answer_query(net, &evidence, &target, method)
    })
    .await
}

async fn marginals(State(net): State<Shared>, body: Bytes) -> Result<impl IntoResponse, AppError> {
    compute(net, body, |net, body| {
        let req: MarginalsRequest = if body.is_empty() {
            MarginalsRequest {
                evidence: EvidenceInput::default(),
            }
        } else {
            decode(&body)?
        };
        let evidence = req.evidence.resolve()?;
        let marginals = posterior_marginals(net, &evidence)?;
        Ok(MarginalsResponse { evidence, marginals })
    })
    .await
}

async fn influence(State(net): State<Shared>, body: Bytes) -> Result<impl IntoResponse, AppError> {
    compute(net, body, |net, body| {
        let req: InfluenceRequest = decode(&body)?;
        Ok(influential_findings(net, &req.evidence.resolve()?, &req.target.resolve()?)?)
    })
    .await
}

async fn whatif(State(net): State<Shared>, body: Bytes) -> Result<impl IntoResponse, AppError> {
    compute(net, body, |net, body| {
        let req: WhatIfRequest = decode(&body)?;
        Ok(whatif_improvements(
            net,
            &req.base.resolve()?,
            &req.improvements.resolve()?,
            &req.target.resolve()?,
            req.combined,
        )?)
    })
    .await
}

async fn prevalence(State(net): State<Shared>, body: Bytes) -> Result<impl IntoResponse, AppError> {
    compute(net, body, |net, body| {
        let req: PrevalenceRequest = decode(&body)?;
        let outcomes = req
            .outcomes
            .into_iter()
            .map(|o| match o {
                OutcomeInput::Item(item) => Ok(parse_item(&item)?),
                OutcomeInput::Pair { variable, states } => Ok((variable, states)),
            })
            .collect::<Result<Vec<_>, AppError>>()?;
        Ok(prevalence_table(net, &req.group, &outcomes)?)
    })
    .await
}

async fn compare_beta(State(net): State<Shared>, body: Bytes) -> Result<impl IntoResponse, AppError> {
    compute(net, body, |_, body| {
        let req: CompareRequest = decode(&body)?;
        let first = BetaPosterior::new(req.a[0], req.a[1])?;
        let second = BetaPosterior::new(req.b[0], req.b[1])?;
        Ok(compare_proportions(
            first,
            second,
            req.samples.unwrap_or(DEFAULT_COMPARISON_SAMPLES),
            req.seed.unwrap_or(0),
        )?)
    })
    .await
}

pub fn router(net: BayesianNetwork) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/network", get(network))
        .route("/api/query", post(query))
        .route("/api/marginals", post(marginals))
        .route("/api/influence", post(influence))
        .route("/api/whatif", post(whatif))
        .route("/api/prevalence", post(prevalence))
        .route("/api/compare-beta", post(compare_beta))
        .with_state(Arc::new(net))
}

/// Serves until the process is stopped. `on_ready` receives the bound
/// address, which matters when port 0 was requested.
pub async fn serve(net: BayesianNetwork, addr: SocketAddr, on_ready: impl FnOnce(SocketAddr)) -> Result<(), AppError> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| AppError::io(addr.to_string(), e))?;
    let bound = listener.local_addr().map_err(|e| AppError::io(addr.to_string(), e))?;
    on_ready(bound);
    axum::serve(listener, router(net))
        .await
        .map_err(|e| AppError::io(bound.to_string(), e))
}
