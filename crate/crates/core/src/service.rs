//! Local HTTP API over one corpus and its triage session.

use std::collections::HashMap;
use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::export::{export_graph, ExportError, ExportFormat};
use crate::extract::{extract_all, ConceptType, DomainRules, Gazetteer};
use crate::links::{link_all, LinkKind, DEFAULT_MIN_TOKENS};
use crate::metrics::{presets, MetricCombination, MetricTable, MetricsError};
use crate::model::Corpus;
use crate::textprep::{build_term_index, IndexOptions, TermIndex};
use crate::triage::{CoverageTracker, Status, TriageError, TriageSession};

pub const DEFAULT_PORT: u16 = 7431;
pub const MAX_PAGE: usize = 500;
pub const DEFAULT_PAGE: usize = 50;

/// Corpus, index, metrics and session of one running service.
pub struct Workspace {
    pub corpus: Corpus,
    pub index: TermIndex,
    pub metrics: MetricTable,
    session: TriageSession,
    tracker: CoverageTracker,
    session_path: Option<PathBuf>,
}

impl Workspace {
    /// Indexes the corpus and either loads the session at `session_path` or
    /// seeds a new one (and writes it there).
    pub fn open(
        corpus: Corpus,
        session_path: Option<&Path>,
        gazetteer: &Gazetteer,
        options: IndexOptions,
    ) -> Result<Self, TriageError> {
        let index = build_term_index(&corpus, options);
        let session = match session_path {
            Some(p) if p.exists() => {
                let s = TriageSession::load(p)?;
                s.check_corpus(&corpus)?;
                s
            }
            _ => {
                let candidates = extract_all(&corpus, gazetteer, &DomainRules::default());
                let mut s = TriageSession::new(&corpus, &index, candidates)?;
                s.links = link_all(&corpus, DEFAULT_MIN_TOKENS);
                if let Some(p) = session_path {
                    s.save(p)?;
                }
                s
            }
        };
        Ok(Self::with_session(corpus, index, session, session_path.map(Path::to_path_buf)))
    }

    pub fn with_session(corpus: Corpus, index: TermIndex, session: TriageSession, session_path: Option<PathBuf>) -> Self {
        let metrics = MetricTable::build(&corpus, &index);
        // Rank once up front so the first page request is a cache hit.
        let _ = metrics.ranking(session.combination());
        let tracker = CoverageTracker::new(&corpus, &index, &session);
        Workspace { corpus, index, metrics, session, tracker, session_path }
    }

    pub fn session(&self) -> &TriageSession {
        &self.session
    }

    fn persist(&self) -> Result<(), TriageError> {
        match &self.session_path {
            Some(p) => self.session.save(p),
            None => Ok(()),
        }
    }

    pub fn classify(&mut self, key: &str, status: Status, ty: Option<ConceptType>) -> Result<u64, TriageError> {
        let resolved = self.session.resolve_key(&self.index, key);
        let before = resolved.as_deref().map_or(Status::Unclassified, |k| self.session.status(k));
        let revision = self.session.classify(&self.index, key, status, ty)?;
        if let Some(k) = resolved {
            self.tracker.update(&self.corpus, &self.index, &k, before, status);
        }
        self.persist()?;
        Ok(revision)
    }

    pub fn set_combination(&mut self, c: MetricCombination) -> Result<u64, TriageError> {
        let revision = self.session.set_combination(c)?;
        let _ = self.metrics.ranking(self.session.combination());
        self.persist()?;
        Ok(revision)
    }

    pub fn coverage(&self) -> crate::triage::CoverageReport {
        self.tracker.report(&self.session, &self.index)
    }

    /// One page of ranked terms with the given status (`None` = any).
    pub fn terms_page(&self, status: Option<Status>, offset: usize, limit: usize) -> Result<Vec<TermRow>, MetricsError> {
        let ranking = self.metrics.ranking(self.session.combination())?;
        let rows = ranking
            .iter()
            .filter(|r| status.is_none_or(|s| self.session.status(&r.key) == s))
            .skip(offset)
            .take(limit.min(MAX_PAGE))
            .map(|r| {
                let rec = self.index.get(&r.key).expect("ranked terms come from the index");
                TermRow {
                    key: r.key.clone(),
                    surface: rec.display_surface().to_string(),
                    score: r.score,
                    count: r.count,
                    silo_spread: rec.silos().len(),
                    status: self.session.status(&r.key),
                    concept_type: self.session.concept_type(&r.key),
                }
            })
            .collect();
        Ok(rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TermRow {
    pub key: String,
    pub surface: String,
    pub score: f64,
    pub count: usize,
    /// Number of silos the term occurs in.
    pub silo_spread: usize,
    pub status: Status,
    #[serde(rename = "type", skip_serializing_if = "Option::is_none")]
    pub concept_type: Option<ConceptType>,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("port {0} is already in use")]
    PortInUse(u16),
    #[error(transparent)]
    Session(#[from] TriageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Error body: `{"code": ..., "message": ...}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status: StatusCode::BAD_REQUEST, code, message: message.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "code": self.code, "message": self.message }))).into_response()
    }
}

impl From<TriageError> for ApiError {
    fn from(e: TriageError) -> Self {
        let (status, code) = match &e {
            TriageError::UnknownTerm(_) => (StatusCode::NOT_FOUND, "unknown-term"),
            TriageError::InvalidStatus(_) => (StatusCode::BAD_REQUEST, "invalid-status"),
            TriageError::CorpusMismatch { .. } => (StatusCode::CONFLICT, "corpus-mismatch"),
            TriageError::InvalidCombination(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid-combination"),
            TriageError::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "storage-error"),
            TriageError::Corrupt(_) => (StatusCode::INTERNAL_SERVER_ERROR, "corrupt-session"),
        };
        ApiError { status, code, message: e.to_string() }
    }
}

impl From<MetricsError> for ApiError {
    fn from(e: MetricsError) -> Self {
        TriageError::from(e).into()
    }
}

impl From<ExportError> for ApiError {
    fn from(e: ExportError) -> Self {
        ApiError::bad_request("unsupported-format", e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request("bad-request", e.body_text())
    }
}

type Shared = Arc<RwLock<Workspace>>;
type ApiResult<T> = Result<T, ApiError>;

fn read(state: &Shared) -> std::sync::RwLockReadGuard<'_, Workspace> {
    state.read().unwrap_or_else(|p| p.into_inner())
}

fn write(state: &Shared) -> std::sync::RwLockWriteGuard<'_, Workspace> {
    state.write().unwrap_or_else(|p| p.into_inner())
}

fn param_usize(q: &HashMap<String, String>, name: &str, default: usize) -> ApiResult<usize> {
    match q.get(name) {
        None => Ok(default),
        Some(v) if v.is_empty() => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| ApiError::bad_request("bad-request", format!("{name} must be a non-negative integer"))),
    }
}

async fn list_terms(State(state): State<Shared>, Query(q): Query<HashMap<String, String>>) -> ApiResult<Json<Vec<TermRow>>> {
    let status = match q.get("status").map(String::as_str) {
        None | Some("") => Some(Status::Unclassified),
        Some(s) if s.eq_ignore_ascii_case("all") => None,
        Some(s) => Some(s.parse::<Status>()?),
    };
    if let Some(sort) = q.get("sort").filter(|s| !s.is_empty() && *s != "score") {
        return Err(ApiError::bad_request("bad-request", format!("unsupported sort {sort:?}")));
    }
    let offset = param_usize(&q, "offset", 0)?;
    let limit = param_usize(&q, "limit", DEFAULT_PAGE)?.min(MAX_PAGE);
    let ws = read(&state);
    Ok(Json(ws.terms_page(status, offset, limit)?))
}

#[derive(Debug, Deserialize)]
struct ClassifyBody {
    status: String,
    #[serde(rename = "type")]
    concept_type: Option<String>,
}

async fn classify(
    State(state): State<Shared>,
    UrlPath(key): UrlPath<String>,
    body: Result<Json<ClassifyBody>, JsonRejection>,
) -> ApiResult<Json<serde_json::Value>> {
    let Json(body) = body?;
    let status: Status = body.status.parse()?;
    let ty = match body.concept_type.as_deref() {
        None | Some("") => None,
        Some(t) => Some(
            ConceptType::from_name(t).ok_or_else(|| ApiError::bad_request("invalid-type", format!("unknown concept type {t:?}")))?,
        ),
    };
    let revision = write(&state).classify(&key, status, ty)?;
    Ok(Json(json!({ "revision": revision })))
}

async fn occurrences(State(state): State<Shared>, UrlPath(key): UrlPath<String>) -> ApiResult<impl IntoResponse> {
    let ws = read(&state);
    Ok(Json(ws.session.occurrences_of(&ws.corpus, &ws.index, &key)?))
}

async fn coverage(State(state): State<Shared>) -> impl IntoResponse {
    Json(read(&state).coverage())
}

async fn progress(State(state): State<Shared>) -> impl IntoResponse {
    let ws = read(&state);
    Json(ws.session.progress(&ws.index))
}

async fn get_combination(State(state): State<Shared>) -> impl IntoResponse {
    Json(read(&state).session.combination().clone())
}

#[derive(Debug, Deserialize)]
struct CombinationBody {
    name: Option<String>,
    weights: HashMap<String, f64>,
}

async fn put_combination(
    State(state): State<Shared>,
    body: Result<Json<CombinationBody>, JsonRejection>,
) -> ApiResult<Json<serde_json::Value>> {
    let Json(body) = body?;
    let c = MetricCombination::from_named(body.name.unwrap_or_else(|| "custom".into()), body.weights)?;
    let mut ws = write(&state);
    let revision = ws.set_combination(c)?;
    Ok(Json(json!({ "revision": revision, "combination": ws.session.combination() })))
}

async fn list_presets() -> impl IntoResponse {
    Json(presets())
}

async fn candidates(State(state): State<Shared>) -> impl IntoResponse {
    Json(read(&state).session.candidates.clone())
}

async fn links(State(state): State<Shared>, Query(q): Query<HashMap<String, String>>) -> ApiResult<impl IntoResponse> {
    let kind = match q.get("kind").map(String::as_str) {
        None | Some("") => None,
        Some(k) => Some(LinkKind::from_name(k).ok_or_else(|| ApiError::bad_request("bad-request", format!("unknown link kind {k:?}")))?),
    };
    let ws = read(&state);
    let out: Vec<_> = ws.session.links.iter().filter(|l| kind.is_none_or(|k| l.kind == k)).cloned().collect();
    Ok(Json(out))
}

#[derive(Debug, Deserialize)]
struct ExportBody {
    format: String,
}

async fn export(State(state): State<Shared>, body: Result<Json<ExportBody>, JsonRejection>) -> ApiResult<Response> {
    let Json(body) = body?;
    let format = ExportFormat::from_name(&body.format)?;
    let ws = read(&state);
    let bytes = export_graph(&ws.session, &ws.corpus, &ws.index, format);
    Ok(([(header::CONTENT_TYPE, format.media_type())], bytes).into_response())
}

async fn not_found() -> ApiError {
    ApiError { status: StatusCode::NOT_FOUND, code: "not-found", message: "no such endpoint".into() }
}

pub fn router(workspace: Workspace) -> Router {
    router_shared(Arc::new(RwLock::new(workspace)))
}

pub fn router_shared(state: Arc<RwLock<Workspace>>) -> Router {
    let api = Router::new()
        .route("/terms", get(list_terms))
        .route("/terms/{key}/classify", post(classify))
        .route("/terms/{key}/occurrences", get(occurrences))
        .route("/coverage", get(coverage))
        .route("/progress", get(progress))
        .route("/combination", get(get_combination).put(put_combination))
        .route("/presets", get(list_presets))
        .route("/candidates", get(candidates))
        .route("/links", get(links))
        .route("/export", post(export));
    Router::new().nest("/api", api).fallback(not_found).with_state(state)
}

/// Serves on the loopback interface until the process is stopped.
pub async fn serve(workspace: Workspace, port: u16) -> Result<(), ServiceError> {
    let addr = SocketAddr::from((Ipv4Addr::LOCALHOST, port));
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| match e.kind() {
        std::io::ErrorKind::AddrInUse => ServiceError::PortInUse(port),
        _ => ServiceError::Io(e),
    })?;
    axum::serve(listener, router(workspace)).await?;
    Ok(())
}
