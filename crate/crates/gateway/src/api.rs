//! Read-only JSON API over a [`RecordStore`] snapshot.
//!
//! | route | body |
//! |---|---|
//! | `GET /records` | [`QueryPage`] |
//! | `GET /properties` | [`PropertiesView`] |
//! | `GET /stats` | [`StatsView`] |
//! | `GET /scatter` | [`ScatterView`] |
//! | `GET /healthz` | [`Health`] |
//!
//! Errors use the envelope `{"error": <code>, "detail": <message>}` with
//! status 400 for malformed parameters and 404 for unknown properties or
//! routes. Property names in parameters may be any synonym the unit registry
//! knows.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use anyhow::{Context, Result};
use axum::extract::{Query, State};
use axum::http::{Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use polyrec::extract::UnitRegistry;
use polyrec::store::{CompositionCounts, QueryError, QueryPage, RecordFilter, RecordStore, ScatterPoint, ScatterScope};
use polyrec::CompositionClass;
use serde::{Deserialize, Serialize};
use tower_http::cors::{Any, CorsLayer};

pub const DEFAULT_PAGE_SIZE: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, detail: impl Into<String>) -> Self {
        ApiError { status, body: ErrorBody { error: error.into(), detail: detail.into() } }
    }

    fn bad_request(error: &str, detail: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, error, detail)
    }

    fn unknown_property(name: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "unknown_property", format!("no records for property {name:?}"))
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let code = match e {
            QueryError::MalformedRange { .. } => "malformed_range",
            QueryError::PageSize(_) => "invalid_page_size",
            QueryError::Page => "invalid_page",
        };
        ApiError::bad_request(code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCount {
    pub property: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertiesView {
    pub properties: Vec<PropertyCount>,
}

/// Composition counts and unique polymers cover the whole store; the yearly
/// counts honour the request's record filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsView {
    pub composition: CompositionCounts,
    pub unique_polymers: usize,
    pub yearly: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterView {
    pub x: String,
    pub y: String,
    pub unit_x: Option<String>,
    pub unit_y: Option<String>,
    pub scope: ScatterScope,
    pub points: Vec<ScatterPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub records: usize,
}

pub fn properties_view(store: &RecordStore, min_count: usize) -> PropertiesView {
    PropertiesView {
        properties: store
            .property_histogram(min_count)
            .into_iter()
            .map(|(property, count)| PropertyCount { property, count })
            .collect(),
    }
}

pub fn stats_view(store: &RecordStore, filter: &RecordFilter) -> Result<StatsView, QueryError> {
    Ok(StatsView {
        composition: store.composition_counts(),
        unique_polymers: store.count_unique_polymers(),
        yearly: store.yearly_counts(filter)?,
    })
}

/// Properties resolve through the registry's synonyms before lookup.
pub fn scatter_view(
    store: &RecordStore,
    registry: &UnitRegistry,
    x: &str,
    y: &str,
    scope: ScatterScope,
) -> Result<ScatterView, String> {
    let (x, y) = (registry.canonical_name(x), registry.canonical_name(y));
    let points = store.scatter_pairs(&x, &y, scope)?;
    let unit = |p: &str| registry.property(p).map(|s| s.canonical_unit.clone());
    Ok(ScatterView { unit_x: unit(&x), unit_y: unit(&y), x, y, scope, points })
}

/// The record store being served plus where it came from. Clones share the
/// snapshot; [`AppState::reload`] swaps it atomically, so a request sees
/// either the old or the new store and never a mix.
#[derive(Clone)]
pub struct AppState {
    snapshot: Arc<RwLock<Arc<RecordStore>>>,
    registry: Arc<UnitRegistry>,
    source: Option<PathBuf>,
}

impl AppState {
    pub fn new(store: RecordStore, registry: UnitRegistry) -> Self {
        AppState { snapshot: Arc::new(RwLock::new(Arc::new(store))), registry: Arc::new(registry), source: None }
    }

    pub fn from_file(path: impl AsRef<Path>, registry: UnitRegistry) -> Result<Self> {
        let path = path.as_ref();
        let mut state = AppState::new(load_store(path)?, registry);
        state.source = Some(path.to_path_buf());
        Ok(state)
    }

    pub fn snapshot(&self) -> Arc<RecordStore> {
        Arc::clone(&self.snapshot.read().unwrap_or_else(|e| e.into_inner()))
    }

    pub fn registry(&self) -> &UnitRegistry {
        &self.registry
    }

    /// Re-reads the records file and swaps the snapshot. A failed read keeps
    /// the current snapshot.
    pub fn reload(&self) -> Result<usize> {
        let Some(path) = &self.source else {
            return Ok(self.snapshot().len());
        };
        let store = Arc::new(load_store(path)?);
        let n = store.len();
        *self.snapshot.write().unwrap_or_else(|e| e.into_inner()) = store;
        Ok(n)
    }
}

fn load_store(path: &Path) -> Result<RecordStore> {
    RecordStore::load(path).with_context(|| format!("loading records {}", path.display()))
}

pub fn router(state: AppState) -> Router {
    let cors = CorsLayer::new().allow_origin(Any).allow_methods([Method::GET]).allow_headers(Any);
    Router::new()
        .route("/records", get(records))
        .route("/properties", get(properties))
        .route("/stats", get(stats))
        .route("/scatter", get(scatter))
        .route("/healthz", get(healthz))
        .fallback(not_found)
        .layer(cors)
        .with_state(state)
}

type Params = Query<HashMap<String, String>>;

/// Typed access to query parameters; rejects names outside `allowed`.
struct ParamReader<'a> {
    params: &'a HashMap<String, String>,
}

impl<'a> ParamReader<'a> {
    fn new(params: &'a HashMap<String, String>, allowed: &[&str]) -> Result<Self, ApiError> {
        let mut unknown: Vec<&str> = params.keys().map(String::as_str).filter(|k| !allowed.contains(k)).collect();
        unknown.sort_unstable();
        if let Some(k) = unknown.first() {
            return Err(ApiError::bad_request("unknown_parameter", format!("unknown query parameter {k:?}")));
        }
        Ok(ParamReader { params })
    }

    fn text(&self, name: &str) -> Option<&'a str> {
        self.params.get(name).map(String::as_str).filter(|s| !s.trim().is_empty())
    }

    fn parse<T: std::str::FromStr>(&self, name: &str) -> Result<Option<T>, ApiError> {
        self.text(name)
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| ApiError::bad_request("invalid_parameter", format!("cannot parse {name}={s:?}")))
            })
            .transpose()
    }

    fn float(&self, name: &str) -> Result<Option<f64>, ApiError> {
        match self.parse::<f64>(name)? {
            Some(v) if v.is_nan() => {
                Err(ApiError::bad_request("invalid_parameter", format!("{name} must be a number")))
            }
            v => Ok(v),
        }
    }
}

const FILTER_PARAMS: [&str; 8] = ["property", "material", "min", "max", "year_min", "year_max", "class", "keyword"];

fn read_filter(p: &ParamReader<'_>, store: &RecordStore, registry: &UnitRegistry) -> Result<RecordFilter, ApiError> {
    let property = match p.text("property") {
        Some(name) => {
            let canonical = registry.canonical_name(name);
            if !store.has_property(&canonical) {
                return Err(ApiError::unknown_property(name));
            }
            Some(canonical)
        }
        None => None,
    };
    let value_range = match (p.float("min")?, p.float("max")?) {
        (None, None) => None,
        (lo, hi) => Some((lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY))),
    };
    let year_range = match (p.parse::<i32>("year_min")?, p.parse::<i32>("year_max")?) {
        (None, None) => None,
        (lo, hi) => Some((lo.unwrap_or(i32::MIN), hi.unwrap_or(i32::MAX))),
    };
    let filter = RecordFilter {
        property,
        material: p.text("material").map(str::to_string),
        value_range,
        year_range,
        class: p.parse::<CompositionClass>("class")?,
        keyword: p.text("keyword").map(str::to_string),
    };
    filter.validate()?;
    Ok(filter)
}

async fn records(State(state): State<AppState>, Query(params): Params) -> Result<Json<QueryPage>, ApiError> {
    let allowed: Vec<&str> = FILTER_PARAMS.iter().copied().chain(["page", "page_size"]).collect();
    let p = ParamReader::new(&params, &allowed)?;
    let store = state.snapshot();
    let filter = read_filter(&p, &store, state.registry())?;
    let page = p.parse::<usize>("page")?.unwrap_or(1);
    let page_size = p.parse::<usize>("page_size")?.unwrap_or(DEFAULT_PAGE_SIZE);
    Ok(Json(store.query(&filter, page, page_size)?))
}

async fn properties(State(state): State<AppState>, Query(params): Params) -> Result<Json<PropertiesView>, ApiError> {
    let p = ParamReader::new(&params, &["min_count"])?;
    let min_count = p.parse::<usize>("min_count")?.unwrap_or(0);
    Ok(Json(properties_view(&state.snapshot(), min_count)))
}

async fn stats(State(state): State<AppState>, Query(params): Params) -> Result<Json<StatsView>, ApiError> {
    let p = ParamReader::new(&params, &FILTER_PARAMS)?;
    let store = state.snapshot();
    let filter = read_filter(&p, &store, state.registry())?;
    Ok(Json(stats_view(&store, &filter)?))
}

async fn scatter(State(state): State<AppState>, Query(params): Params) -> Result<Json<ScatterView>, ApiError> {
    let p = ParamReader::new(&params, &["x", "y", "scope"])?;
    let (Some(x), Some(y)) = (p.text("x"), p.text("y")) else {
        return Err(ApiError::bad_request("missing_parameter", "both x and y are required"));
    };
    let scope = match p.text("scope") {
        Some(s) => s.parse::<ScatterScope>().map_err(|e| ApiError::bad_request("invalid_parameter", e))?,
        None => ScatterScope::SameRecordMaterials,
    };
    let store = state.snapshot();
    scatter_view(&store, state.registry(), x, y, scope).map(Json).map_err(|name| ApiError::unknown_property(&name))
}

async fn healthz(State(state): State<AppState>) -> Json<Health> {
    Json(Health { status: "ok".into(), records: state.snapshot().len() })
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route")
}
