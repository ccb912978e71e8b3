//! HTTP session service for interactive exploration.
//!
//! A session holds one loaded (and by default standardized) cloud with its
//! coloring variables. Graph requests name a radius, landmark policy and
//! seed; the cover for that triple is computed once per session and reused
//! for every recoloring, filter and layout asked of it.
//!
//! | method | path                                  |
//! |--------|---------------------------------------|
//! | GET    | `/health`                             |
//! | GET    | `/fixtures`                           |
//! | POST   | `/sessions`                           |
//! | GET    | `/sessions/{id}`                      |
//! | GET    | `/sessions/{id}/graph`                |
//! | GET    | `/sessions/{id}/balls/{ball}/members` |

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::{Path as FsPath, PathBuf};
use std::sync::{Arc, Mutex, PoisonError, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tdabm::cover::{build_cover, Cover, CoverConfig, LandmarkPolicy};
use tdabm::graph::{coloring_above, coloring_below, filter_by, set_coloring, BallGraph};
use tdabm::ingest::{euclidean, read_csv, standardize, ColoringVariable, PointCloud};
use tdabm::layout::{spring_layout, Layout, LayoutConfig};
use tdabm::render::export_value;
use tdabm::Error;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;
use uuid::Uuid;

#[derive(Debug, Clone, Default)]
pub struct ServeConfig {
    /// Directory of CSV files that sessions may load by name.
    pub fixtures: Option<PathBuf>,
    /// Static files (the explorer build) served at `/`.
    pub assets: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidEps(_) | Error::UnknownColoring { .. } | Error::InvalidConfig(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            Error::UnknownBall(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, e.body_text())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct CoverKey {
    eps_bits: u64,
    policy: LandmarkPolicy,
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct LayoutKey {
    cover: CoverKey,
    seed: u64,
    k_bits: Option<u64>,
    iterations: usize,
}

/// A cover and its graph colored by every session variable and axis.
struct Built {
    cover: Cover,
    graph: BallGraph,
}

struct Session {
    id: String,
    /// Values as uploaded, for member listings.
    raw: PointCloud,
    /// What the cover is built on.
    cloud: PointCloud,
    colorings: Vec<ColoringVariable>,
    standardized: bool,
    covers: Mutex<HashMap<CoverKey, Arc<Built>>>,
    layouts: Mutex<HashMap<LayoutKey, Arc<Layout>>>,
}

impl Session {
    fn coloring_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.colorings.iter().map(|c| c.name.clone()).collect();
        names.extend(self.cloud.columns().iter().cloned());
        names
    }

    fn descriptor(&self) -> Value {
        json!({
            "session": self.id,
            "n": self.cloud.n(),
            "k": self.cloud.k(),
            "columns": self.cloud.columns(),
            "colorings": self.coloring_names(),
            "standardized": self.standardized,
        })
    }

    fn build(&self, key: CoverKey) -> tdabm::Result<Built> {
        let config = CoverConfig {
            eps: f64::from_bits(key.eps_bits),
            policy: key.policy,
            seed: key.seed,
        };
        let cover = build_cover(&self.cloud, &config)?;
        let mut graph = BallGraph::from_cover(&cover);
        for axis in self.cloud.columns() {
            graph = set_coloring(&graph, &cover, &self.cloud.column_variable(axis)?)?;
        }
        for c in &self.colorings {
            graph = set_coloring(&graph, &cover, c)?;
        }
        Ok(Built { cover, graph })
    }
}

/// Looks `key` up in `cache`, computing it off the async runtime when
/// missing. Two racing requests may both compute; the first insert wins so
/// every caller sees the same object.
async fn get_or_compute<K, V, F>(cache: &Mutex<HashMap<K, Arc<V>>>, key: K, compute: F) -> ApiResult<Arc<V>>
where
    K: std::hash::Hash + Eq + Copy,
    V: Send + Sync + 'static,
    F: FnOnce() -> tdabm::Result<V> + Send + 'static,
{
    if let Some(v) = lock(cache).get(&key) {
        return Ok(v.clone());
    }
    let value = tokio::task::spawn_blocking(compute)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(lock(cache).entry(key).or_insert_with(|| Arc::new(value)).clone())
}

fn lock<T>(m: &Mutex<T>) -> std::sync::MutexGuard<'_, T> {
    // Entries are immutable once inserted, so a panic elsewhere cannot leave
    // the map half-written.
    m.lock().unwrap_or_else(PoisonError::into_inner)
}

struct AppState {
    config: ServeConfig,
    sessions: RwLock<HashMap<String, Arc<Session>>>,
}

impl AppState {
    fn session(&self, id: &str) -> ApiResult<Arc<Session>> {
        self.sessions
            .read()
            .unwrap_or_else(PoisonError::into_inner)
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("unknown session `{id}`")))
    }
}

type Shared = Arc<AppState>;

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
struct NewSession {
    csv: Option<String>,
    fixture: Option<String>,
    axes: Vec<String>,
    #[serde(default)]
    colors: Vec<String>,
    #[serde(default = "default_true")]
    standardize: bool,
}

#[derive(Debug, Deserialize)]
struct CoverQuery {
    eps: f64,
    #[serde(default)]
    policy: Option<LandmarkPolicy>,
    #[serde(default)]
    seed: u64,
}

impl CoverQuery {
    fn key(&self) -> ApiResult<CoverKey> {
        CoverConfig::sequential(self.eps).validate()?;
        Ok(CoverKey {
            eps_bits: self.eps.to_bits(),
            policy: self.policy.unwrap_or(LandmarkPolicy::Sequential),
            seed: self.seed,
        })
    }
}

#[derive(Debug, Deserialize)]
struct GraphQuery {
    // Not a flattened `CoverQuery`: flattening defeats number parsing in
    // query strings.
    eps: f64,
    #[serde(default)]
    policy: Option<LandmarkPolicy>,
    #[serde(default)]
    seed: u64,
    coloring: Option<String>,
    #[serde(default)]
    layout_seed: u64,
    k: Option<f64>,
    iterations: Option<usize>,
    /// Keep balls whose coloring is strictly above / below this value.
    above: Option<f64>,
    below: Option<f64>,
}

fn fixture_path(dir: Option<&FsPath>, name: &str) -> ApiResult<PathBuf> {
    let dir = dir.ok_or_else(|| ApiError::not_found("no fixture directory configured"))?;
    let plain = !name.is_empty() && !name.contains(['/', '\\']) && name != "." && name != "..";
    if !plain {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            format!("bad fixture name `{name}`"),
        ));
    }
    let path = dir.join(name);
    if !path.is_file() {
        return Err(ApiError::not_found(format!("no fixture `{name}`")));
    }
    Ok(path)
}

async fn health() -> &'static str {
    "ok"
}

async fn list_fixtures(State(state): State<Shared>) -> ApiResult<Json<Value>> {
    let Some(dir) = &state.config.fixtures else {
        return Ok(Json(json!({ "fixtures": [] })));
    };
    let mut names = Vec::new();
    let entries =
        std::fs::read_dir(dir).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    for entry in entries.flatten() {
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(".csv") {
            names.push(name);
        }
    }
    names.sort();
    Ok(Json(json!({ "fixtures": names })))
}

async fn create_session(
    State(state): State<Shared>,
    body: Result<Json<NewSession>, JsonRejection>,
) -> ApiResult<Response> {
    let Json(req) = body?;
    let text = match (&req.csv, &req.fixture) {
        (Some(csv), None) => csv.clone(),
        (None, Some(name)) => {
            let path = fixture_path(state.config.fixtures.as_deref(), name)?;
            tokio::fs::read_to_string(&path)
                .await
                .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        }
        _ => {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "give exactly one of `csv` and `fixture`",
            ))
        }
    };
    if req.axes.is_empty() {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "`axes` must name at least one column",
        ));
    }
    let axes: Vec<&str> = req.axes.iter().map(String::as_str).collect();
    let colors: Vec<&str> = req.colors.iter().map(String::as_str).collect();
    let (raw, colorings) = read_csv(text.as_bytes(), &axes, &colors)?;
    let cloud = if req.standardize {
        standardize(&raw)?
    } else {
        raw.clone()
    };

    let id = Uuid::new_v4().to_string();
    let session = Arc::new(Session {
        id: id.clone(),
        raw,
        cloud,
        colorings,
        standardized: req.standardize,
        covers: Mutex::default(),
        layouts: Mutex::default(),
    });
    log::info!("session {id}: {} points, {} axes", session.cloud.n(), session.cloud.k());
    let body = session.descriptor();
    state
        .sessions
        .write()
        .unwrap_or_else(PoisonError::into_inner)
        .insert(id, session);
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn describe_session(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    Ok(Json(state.session(&id)?.descriptor()))
}

async fn built(session: &Arc<Session>, key: CoverKey) -> ApiResult<Arc<Built>> {
    let s = session.clone();
    get_or_compute(&session.covers, key, move || s.build(key)).await
}

fn json_bytes(value: &Value) -> Response {
    // Map keys are sorted, so equal values give equal bytes.
    let body = serde_json::to_vec(value).expect("a Value always serializes");
    (
        [(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))],
        body,
    )
        .into_response()
}

async fn graph(
    State(state): State<Shared>,
    Path(id): Path<String>,
    query: Result<Query<GraphQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let session = state.session(&id)?;
    let Query(q) = query?;
    let cover_key = CoverQuery {
        eps: q.eps,
        policy: q.policy,
        seed: q.seed,
    }
    .key()?;
    let layout_config = LayoutConfig {
        k: q.k,
        seed: q.layout_seed,
        iterations: q.iterations.unwrap_or(LayoutConfig::default().iterations),
    };
    layout_config.validate()?;

    let coloring = match q.coloring {
        Some(c) => c,
        None => session.coloring_names().remove(0),
    };
    let built = built(&session, cover_key).await?;
    let graph = built.graph.with_only_coloring(&coloring)?;

    let layout_key = LayoutKey {
        cover: cover_key,
        seed: layout_config.seed,
        k_bits: layout_config.k.map(f64::to_bits),
        iterations: layout_config.iterations,
    };
    // Laid out before filtering so that discs keep their place when the
    // filter changes.
    let full = built.clone();
    let layout = get_or_compute(&session.layouts, layout_key, move || {
        spring_layout(&full.graph, &layout_config)
    })
    .await?;

    let mut shown = graph;
    if let Some(t) = q.above {
        shown = filter_by(&shown, coloring_above(&coloring, t));
    }
    if let Some(t) = q.below {
        shown = filter_by(&shown, coloring_below(&coloring, t));
    }
    let mut value = export_value(&shown, &built.cover, Some(&layout))?;
    value["coloring"] = json!(coloring);
    value["policy"] = json!(cover_key.policy);
    value["seed"] = json!(cover_key.seed);
    Ok(json_bytes(&value))
}

async fn members(
    State(state): State<Shared>,
    Path((id, ball)): Path<(String, usize)>,
    query: Result<Query<CoverQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let session = state.session(&id)?;
    let Query(q) = query?;
    let key = q.key()?;
    let built = built(&session, key).await?;
    let b = built
        .cover
        .ball(ball)
        .ok_or_else(|| ApiError::not_found(format!("unknown ball {ball}")))?;

    let landmark = session.cloud.row(b.landmark);
    let rows: Vec<Value> = b
        .members
        .iter()
        .map(|&p| {
            let mut values = serde_json::Map::new();
            for (name, v) in session.raw.columns().iter().zip(session.raw.row(p)) {
                values.insert(name.clone(), json!(v));
            }
            for c in &session.colorings {
                values.insert(c.name.clone(), json!(c.values[p]));
            }
            json!({
                "point": session.cloud.index()[p],
                "distance": euclidean(session.cloud.row(p), landmark),
                "values": values,
            })
        })
        .collect();
    let value = json!({
        "ball": b.id,
        "landmark": session.cloud.index()[b.landmark],
        "eps": built.cover.eps(),
        "size": b.size(),
        "rows": rows,
    });
    Ok(json_bytes(&value))
}

fn is_local_origin(origin: &HeaderValue) -> bool {
    let Ok(origin) = origin.to_str() else {
        return false;
    };
    let rest = origin
        .strip_prefix("http://")
        .or_else(|| origin.strip_prefix("https://"))
        .unwrap_or("");
    let host = if let Some(v6) = rest.strip_prefix('[') {
        v6.split(']').next().map(|h| format!("[{h}]")).unwrap_or_default()
    } else {
        rest.split(':').next().unwrap_or("").to_string()
    };
    matches!(host.as_str(), "localhost" | "127.0.0.1" | "[::1]")
}

pub fn router(config: ServeConfig) -> Router {
    let assets = config.assets.clone();
    let state = Arc::new(AppState {
        config,
        sessions: RwLock::default(),
    });
    let cors = CorsLayer::new()
        .allow_origin(AllowOrigin::predicate(|origin, _| is_local_origin(origin)))
        .allow_methods(tower_http::cors::Any)
        .allow_headers(tower_http::cors::Any);
    let api = Router::new()
        .route("/health", get(health))
        .route("/fixtures", get(list_fixtures))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(describe_session))
        .route("/sessions/{id}/graph", get(graph))
        .route("/sessions/{id}/balls/{ball}/members", get(members))
        .with_state(state);
    let app = match assets {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    app.layer(cors)
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, config: ServeConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(config)).await
}
