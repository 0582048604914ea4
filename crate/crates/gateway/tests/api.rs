use std::path::PathBuf;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use polyrec::extract::UnitRegistry;
use polyrec::store::{QueryPage, RecordFilter, RecordStore, ScatterScope};
use polyrec::synth::synthetic_records;
use polyrec::{jsonl, CompositionClass, MaterialPropertyRecord};
use polyrec_gateway::api::{self, router, AppState, ErrorBody, Health, PropertiesView, ScatterView, StatsView};
use serde::de::DeserializeOwned;
use serde_json::Value;
use tower::ServiceExt;

fn golden_records() -> Vec<MaterialPropertyRecord> {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/golden/records.jsonl");
    jsonl::read(p).unwrap()
}

fn store() -> RecordStore {
    let mut records = golden_records();
    records.extend(synthetic_records(2000, 21));
    RecordStore::from_records(records)
}

fn app() -> (Router, RecordStore) {
    let s = store();
    (router(AppState::new(s.clone(), UnitRegistry::shipped().clone())), s)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let res = app.clone().oneshot(Request::get(uri).body(Body::empty()).unwrap()).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn get_ok<T: DeserializeOwned>(app: &Router, uri: &str) -> T {
    let (status, body) = get(app, uri).await;
    assert_eq!(status, StatusCode::OK, "{uri}: {body}");
    serde_json::from_value(body).unwrap()
}

async fn get_err(app: &Router, uri: &str, status: StatusCode) -> ErrorBody {
    let (got, body) = get(app, uri).await;
    assert_eq!(got, status, "{uri}: {body}");
    serde_json::from_value(body).unwrap()
}

#[tokio::test]
async fn records_equal_direct_store_queries() {
    let (app, store) = app();
    let tg = "glass transition temperature";
    let cases: Vec<(&str, RecordFilter, usize, usize)> = vec![
        ("/records", RecordFilter::default(), 1, api::DEFAULT_PAGE_SIZE),
        (
            "/records?property=glass+transition+temperature&min=100&max=200",
            RecordFilter { property: Some(tg.into()), value_range: Some((100.0, 200.0)), ..Default::default() },
            1,
            api::DEFAULT_PAGE_SIZE,
        ),
        (
            "/records?property=Tg&min=100&page=2&page_size=7",
            RecordFilter { property: Some(tg.into()), value_range: Some((100.0, f64::INFINITY)), ..Default::default() },
            2,
            7,
        ),
        (
            "/records?material=PS&class=neat&year_min=2010&year_max=2015&page_size=1000",
            RecordFilter {
                material: Some("PS".into()),
                class: Some(CompositionClass::Neat),
                year_range: Some((2010, 2015)),
                ..Default::default()
            },
            1,
            1000,
        ),
        (
            "/records?keyword=pmma&max=0",
            RecordFilter {
                keyword: Some("pmma".into()),
                value_range: Some((f64::NEG_INFINITY, 0.0)),
                ..Default::default()
            },
            1,
            api::DEFAULT_PAGE_SIZE,
        ),
    ];
    for (uri, filter, page, size) in cases {
        let got: QueryPage = get_ok(&app, uri).await;
        let want = store.query(&filter, page, size).unwrap();
        assert_eq!(got, want, "{uri}");
        assert!(got.total > 0, "{uri} should match something");
    }
}

#[tokio::test]
async fn page_beyond_end_is_empty_with_total() {
    let (app, store) = app();
    let total = store.len();
    let got: QueryPage = get_ok(&app, "/records?page=100000&page_size=10").await;
    assert!(got.records.is_empty());
    assert_eq!(got.total, total);
}

#[tokio::test]
async fn properties_stats_and_health_equal_store_views() {
    let (app, store) = app();
    let props: PropertiesView = get_ok(&app, "/properties").await;
    assert_eq!(props, api::properties_view(&store, 0));
    let props: PropertiesView = get_ok(&app, "/properties?min_count=300").await;
    assert_eq!(props, api::properties_view(&store, 300));
    assert!(props.properties.iter().all(|p| p.count >= 300));

    let stats: StatsView = get_ok(&app, "/stats").await;
    assert_eq!(stats, api::stats_view(&store, &RecordFilter::default()).unwrap());
    let c = stats.composition;
    assert_eq!(c.neat + c.blend + c.composite, c.total);

    let filter = RecordFilter { keyword: Some("polystyrene".into()), ..Default::default() };
    let stats: StatsView = get_ok(&app, "/stats?keyword=polystyrene").await;
    assert_eq!(stats.yearly, store.yearly_counts(&filter).unwrap());

    let health: Health = get_ok(&app, "/healthz").await;
    assert_eq!(health.status, "ok");
    assert_eq!(health.records, store.len());
}

#[tokio::test]
async fn scatter_equals_store_pairs() {
    let (app, store) = app();
    let (x, y) = ("tensile strength", "elongation at break");
    for (uri, scope) in [
        ("/scatter?x=tensile+strength&y=elongation+at+break", ScatterScope::SameRecordMaterials),
        ("/scatter?x=tensile+strength&y=elongation+at+break&scope=same_document", ScatterScope::SameDocument),
    ] {
        let got: ScatterView = get_ok(&app, uri).await;
        assert_eq!(got.points, store.scatter_pairs(x, y, scope).unwrap(), "{uri}");
        assert!(!got.points.is_empty());
        assert_eq!(got.scope, scope);
        assert_eq!((got.unit_x.as_deref(), got.unit_y.as_deref()), (Some("MPa"), Some("%")));
    }
}

#[tokio::test]
async fn property_synonyms_resolve_through_the_registry() {
    let (app, _) = app();
    let a: QueryPage = get_ok(&app, "/records?property=Tg&page_size=1000").await;
    let b: QueryPage = get_ok(&app, "/records?property=glass+transition+temperature&page_size=1000").await;
    assert_eq!(a, b);
    let s: ScatterView = get_ok(&app, "/scatter?x=Tg&y=Tm").await;
    assert_eq!((s.x.as_str(), s.y.as_str()), ("glass transition temperature", "melting temperature"));
}

#[tokio::test]
async fn malformed_parameters_are_400_with_a_reason() {
    let (app, _) = app();
    let cases = [
        ("/records?page_size=0", "invalid_page_size"),
        ("/records?page_size=1001", "invalid_page_size"),
        ("/records?page=0", "invalid_page"),
        ("/records?page=-1", "invalid_parameter"),
        ("/records?min=200&max=100", "malformed_range"),
        ("/records?year_min=2020&year_max=2010", "malformed_range"),
        ("/records?min=abc", "invalid_parameter"),
        ("/records?min=NaN", "invalid_parameter"),
        ("/records?class=alloy", "invalid_parameter"),
        ("/records?propety=Tg", "unknown_parameter"),
        ("/stats?min=5&max=1", "malformed_range"),
        ("/properties?min_count=many", "invalid_parameter"),
        ("/scatter?x=Tg", "missing_parameter"),
        ("/scatter?x=Tg&y=Tm&scope=same_paper", "invalid_parameter"),
    ];
    for (uri, code) in cases {
        let e = get_err(&app, uri, StatusCode::BAD_REQUEST).await;
        assert_eq!(e.error, code, "{uri}: {}", e.detail);
        assert!(!e.detail.is_empty());
    }
}

#[tokio::test]
async fn unknown_properties_and_routes_are_404() {
    let (app, _) = app();
    for uri in ["/records?property=unobtainium", "/scatter?x=Tg&y=unobtainium", "/stats?property=hardness"] {
        assert_eq!(get_err(&app, uri, StatusCode::NOT_FOUND).await.error, "unknown_property", "{uri}");
    }
    assert_eq!(get_err(&app, "/nope", StatusCode::NOT_FOUND).await.error, "not_found");
}

#[tokio::test]
async fn cors_allows_any_origin() {
    let (app, _) = app();
    let req = Request::get("/healthz").header(header::ORIGIN, "http://localhost:5173").body(Body::empty()).unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    assert_eq!(res.headers().get(header::ACCESS_CONTROL_ALLOW_ORIGIN).unwrap(), "*");

    let preflight = Request::options("/records")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "GET")
        .body(Body::empty())
        .unwrap();
    let res = app.oneshot(preflight).await.unwrap();
    assert!(res.status().is_success());
    assert!(res.headers().get(header::ACCESS_CONTROL_ALLOW_METHODS).unwrap().to_str().unwrap().contains("GET"));
}

#[tokio::test]
async fn write_methods_are_rejected() {
    let (app, _) = app();
    let res = app.oneshot(Request::post("/records").body(Body::from("{}")).unwrap()).await.unwrap();
    assert_eq!(res.status(), StatusCode::METHOD_NOT_ALLOWED);
}

fn checksum(path: &std::path::Path) -> u64 {
    use std::hash::{DefaultHasher, Hasher};
    let mut h = DefaultHasher::new();
    h.write(&std::fs::read(path).unwrap());
    h.finish()
}

#[tokio::test]
async fn serving_never_modifies_the_records_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.jsonl");
    store().save(&path).unwrap();
    let before = (checksum(&path), std::fs::metadata(&path).unwrap().modified().unwrap());

    let state = AppState::from_file(&path, UnitRegistry::shipped().clone()).unwrap();
    let app = router(state.clone());
    for uri in [
        "/records?property=Tg&min=0",
        "/records?page_size=0",
        "/properties",
        "/stats?material=PS",
        "/scatter?x=tensile+strength&y=elongation+at+break",
        "/healthz",
    ] {
        get(&app, uri).await;
    }
    state.reload().unwrap();
    for method in ["POST", "PUT", "DELETE", "PATCH"] {
        let req = Request::builder().method(method).uri("/records").body(Body::from("[]")).unwrap();
        assert!(!app.clone().oneshot(req).await.unwrap().status().is_success());
    }
    let after = (checksum(&path), std::fs::metadata(&path).unwrap().modified().unwrap());
    assert_eq!(before, after);
}

#[tokio::test]
async fn reload_swaps_the_snapshot_and_keeps_it_on_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.jsonl");
    let golden = golden_records();
    jsonl::write(&path, &golden).unwrap();
    let state = AppState::from_file(&path, UnitRegistry::shipped().clone()).unwrap();
    let app = router(state.clone());
    assert_eq!(get_ok::<Health>(&app, "/healthz").await.records, golden.len());

    let mut more = golden.clone();
    more.extend(synthetic_records(100, 3));
    jsonl::write(&path, &more).unwrap();
    assert_eq!(get_ok::<Health>(&app, "/healthz").await.records, golden.len());
    assert_eq!(state.reload().unwrap(), more.len());
    assert_eq!(get_ok::<Health>(&app, "/healthz").await.records, more.len());

    std::fs::write(&path, "{not json\n").unwrap();
    assert!(state.reload().is_err());
    assert_eq!(get_ok::<Health>(&app, "/healthz").await.records, more.len());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_readers_see_whole_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.jsonl");
    let small = synthetic_records(50, 1);
    let large = synthetic_records(400, 2);
    jsonl::write(&path, &small).unwrap();
    let state = AppState::from_file(&path, UnitRegistry::shipped().clone()).unwrap();
    let app = router(state.clone());

    let writer = {
        let state = state.clone();
        let path = path.clone();
        tokio::task::spawn_blocking(move || {
            for i in 0..20 {
                let batch = if i % 2 == 0 { &large } else { &small };
                jsonl::write(&path, batch).unwrap();
                state.reload().unwrap();
            }
        })
    };
    let mut readers = Vec::new();
    for _ in 0..8 {
        let app = app.clone();
        readers.push(tokio::spawn(async move {
            for _ in 0..25 {
                let page: QueryPage = get_ok(&app, "/records?page_size=1000").await;
                assert!(page.total == 50 || page.total == 400, "partial snapshot: {}", page.total);
                assert_eq!(page.records.len(), page.total);
            }
        }));
    }
    writer.await.unwrap();
    for r in readers {
        r.await.unwrap();
    }
}
