mod common;

use std::collections::BTreeSet;
use std::path::Path;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use pim_concept_miner::extract::Gazetteer;
use pim_concept_miner::service::{router, ApiError, Workspace, MAX_PAGE};
use pim_concept_miner::textprep::IndexOptions;
use pim_concept_miner::triage::{TriageError, TriageSession};

fn app(session: Option<&Path>) -> Router {
    let ws = Workspace::open(common::scenario_corpus(), session, &Gazetteer::bundled(), IndexOptions::default()).unwrap();
    router(ws)
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, String, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header(header::CONTENT_TYPE, "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let res = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = res.status();
    let ctype = res
        .headers()
        .get(header::CONTENT_TYPE)
        .map(|v| v.to_str().unwrap().to_string())
        .unwrap_or_default();
    let bytes = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, ctype, bytes)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (s, _, b) = call(app, Method::GET, uri, None).await;
    (s, serde_json::from_slice(&b).unwrap())
}

async fn send(app: &Router, method: Method, uri: &str, body: Value) -> (StatusCode, Value) {
    let (s, _, b) = call(app, method, uri, Some(body)).await;
    (s, serde_json::from_slice(&b).unwrap())
}

async fn post(app: &Router, key: &str, body: Value) -> (StatusCode, Value) {
    send(app, Method::POST, &format!("/api/terms/{key}/classify"), body).await
}

fn keys(rows: &Value) -> Vec<String> {
    rows.as_array().unwrap().iter().map(|r| r["key"].as_str().unwrap().to_string()).collect()
}

fn assert_error(res: (StatusCode, Value), status: StatusCode, code: &str) {
    assert_eq!(res.0, status, "{}", res.1);
    assert_eq!(res.1["code"], code, "{}", res.1);
    assert!(res.1["message"].as_str().is_some_and(|m| !m.is_empty()));
}

#[tokio::test]
async fn terms_paging_and_filters() {
    let app = app(None);
    let (s, first) = get(&app, "/api/terms").await;
    assert_eq!(s, StatusCode::OK);
    let rows = first.as_array().unwrap();
    assert_eq!(rows.len(), 50);
    for r in rows {
        assert_eq!(r["status"], "unclassified");
        for field in ["key", "surface", "score", "count", "siloSpread"] {
            assert!(!r[field].is_null(), "{field} missing in {r}");
        }
    }
    let scores: Vec<f64> = rows.iter().map(|r| r["score"].as_f64().unwrap()).collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));

    // Pages concatenate to the full list.
    let (_, all) = get(&app, "/api/terms?status=all&limit=500").await;
    let all = keys(&all);
    let mut paged = Vec::new();
    for offset in (0..all.len()).step_by(37) {
        let (_, page) = get(&app, &format!("/api/terms?status=all&offset={offset}&limit=37")).await;
        paged.extend(keys(&page));
    }
    assert_eq!(paged, all);

    let (_, capped) = get(&app, "/api/terms?status=all&limit=100000").await;
    assert!(capped.as_array().unwrap().len() <= MAX_PAGE);
    let (_, empty) = get(&app, "/api/terms?offset=100000").await;
    assert_eq!(empty, json!([]));

    assert_error(get(&app, "/api/terms?status=maybe").await, StatusCode::BAD_REQUEST, "invalid-status");
    assert_error(get(&app, "/api/terms?limit=-1").await, StatusCode::BAD_REQUEST, "bad-request");
    assert_error(get(&app, "/api/terms?sort=alpha").await, StatusCode::BAD_REQUEST, "bad-request");
}

#[tokio::test]
async fn classify_moves_terms_between_lists() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("session.json");
    let app = app(Some(&path));
    let before = TriageSession::load(&path).unwrap().revision;

    let (s, body) = send(&app, Method::POST, "/api/terms/mlkg/classify", json!({"status": "promising", "type": "project"})).await;
    assert_eq!(s, StatusCode::OK);
    let rev = body["revision"].as_u64().unwrap();
    assert_eq!(rev, before + 1);
    assert_eq!(TriageSession::load(&path).unwrap().revision, rev);

    let (_, open) = get(&app, "/api/terms?status=all&limit=500").await;
    let row = open.as_array().unwrap().iter().find(|r| r["key"] == "mlkg").unwrap().clone();
    assert_eq!(row["status"], "promising");
    assert_eq!(row["type"], "project");
    assert_eq!(row["siloSpread"], 3);
    let (_, unclassified) = get(&app, "/api/terms?limit=500").await;
    assert!(!keys(&unclassified).contains(&"mlkg".to_string()));
    let (_, promising) = get(&app, "/api/terms?status=promising&limit=500").await;
    assert!(keys(&promising).contains(&"mlkg".to_string()));

    let (s, body) = send(&app, Method::POST, "/api/terms/THE/classify", json!({"status": "discarded"})).await;
    assert_eq!(s, StatusCode::OK, "{body}");
    let (_, discarded) = get(&app, "/api/terms?status=discarded").await;
    assert_eq!(keys(&discarded), vec!["the"]);
    assert!(discarded[0].get("type").is_none());

    assert_error(post(&app, "no-such-term", json!({"status": "promising"})).await, StatusCode::NOT_FOUND, "unknown-term");
    assert_error(post(&app, "mlkg", json!({"status": "unclassified"})).await, StatusCode::BAD_REQUEST, "invalid-status");
    assert_error(post(&app, "mlkg", json!({"status": "yes"})).await, StatusCode::BAD_REQUEST, "invalid-status");
    assert_error(post(&app, "mlkg", json!({"status": "promising", "type": "animal"})).await, StatusCode::BAD_REQUEST, "invalid-type");
    assert_error(post(&app, "mlkg", json!({"state": "promising"})).await, StatusCode::BAD_REQUEST, "bad-request");
    assert_eq!(TriageSession::load(&path).unwrap().revision, rev + 1);
}

#[tokio::test]
async fn occurrences_with_context() {
    let app = app(None);
    let (s, rows) = get(&app, "/api/terms/mlkg/occurrences").await;
    assert_eq!(s, StatusCode::OK);
    let rows = rows.as_array().unwrap();
    assert!(rows.len() >= 3);
    let silos: BTreeSet<&str> = rows.iter().map(|r| r["silo"].as_str().unwrap()).collect();
    assert_eq!(silos.len(), 3);
    for r in rows {
        assert_eq!(r["surface"].as_str().unwrap().to_lowercase(), "mlkg");
        let (a, b) = (r["charStart"].as_u64().unwrap(), r["charEnd"].as_u64().unwrap());
        assert_eq!(b - a, 4);
        assert!(r["before"].is_string() && r["after"].is_string() && r["summary"].is_string());
        assert!(r["itemId"].is_string() && r["fieldKind"].is_string());
    }

    // Candidate labels resolve too, including ones with spaces.
    let (s, rows) = get(&app, "/api/terms/Anna%20Brown/occurrences").await;
    assert_eq!(s, StatusCode::OK, "{rows}");
    assert!(!rows.as_array().unwrap().is_empty());

    assert_error(get(&app, "/api/terms/zzzz/occurrences").await, StatusCode::NOT_FOUND, "unknown-term");
}

#[tokio::test]
async fn coverage_and_progress_follow_classification() {
    let app = app(None);
    let (_, p0) = get(&app, "/api/progress").await;
    let total = p0["total"].as_u64().unwrap();
    let sum = |p: &Value| ["unclassified", "promising", "discarded"].iter().map(|k| p[k].as_u64().unwrap()).sum::<u64>();
    assert_eq!(sum(&p0), total);

    let (_, c0) = get(&app, "/api/coverage").await;
    for silo in ["Mail", "Calendar", "Bookmark"] {
        let s = &c0["silos"][silo];
        assert_eq!(s["covered"].as_u64().unwrap() + s["uncovered"].as_u64().unwrap(), s["total"].as_u64().unwrap());
    }
    assert_eq!(c0["terms"], p0);

    send(&app, Method::POST, "/api/terms/mlkg/classify", json!({"status": "promising"})).await;
    let (_, p1) = get(&app, "/api/progress").await;
    assert_eq!(p1["promising"].as_u64().unwrap(), p0["promising"].as_u64().unwrap() + 1);
    assert_eq!(p1["unclassified"].as_u64().unwrap(), p0["unclassified"].as_u64().unwrap() - 1);
    let (_, c1) = get(&app, "/api/coverage").await;
    for silo in ["Mail", "Calendar", "Bookmark"] {
        assert!(c1["silos"][silo]["covered"].as_u64() >= c0["silos"][silo]["covered"].as_u64());
    }
    assert!(c1["silos"]["Bookmark"]["covered"].as_u64().unwrap() > 0);

    // Coverage matches a scan of every item.
    let corpus = common::scenario_corpus();
    let promising: BTreeSet<String> = {
        let (_, rows) = get(&app, "/api/terms?status=promising&limit=500").await;
        keys(&rows).into_iter().collect()
    };
    let want = common::oracles::naive_coverage(&corpus, |k| {
        if promising.contains(k) {
            pim_concept_miner::triage::Status::Promising
        } else {
            pim_concept_miner::triage::Status::Unclassified
        }
    });
    assert_eq!(c1["silos"], serde_json::to_value(&want).unwrap());
}

#[tokio::test]
async fn combination_changes_the_order() {
    let app = app(None);
    let (_, c) = get(&app, "/api/combination").await;
    assert_eq!(c["name"], "balanced");

    let (_, presets) = get(&app, "/api/presets").await;
    let names: Vec<&str> = presets.as_array().unwrap().iter().map(|p| p["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["balanced", "acronyms & projects", "frequent topics", "folder concepts"]);

    let (s, body) = send(
        &app,
        Method::PUT,
        "/api/combination",
        json!({"name": "acronyms & projects", "weights": {"acronymScore": 3, "siloSpread": 2, "rarity": 1}}),
    )
    .await;
    assert_eq!(s, StatusCode::OK, "{body}");
    assert!(body["revision"].as_u64().unwrap() >= 1);
    assert_eq!(body["combination"]["name"], "acronyms & projects");
    let (_, top) = get(&app, "/api/terms?limit=1").await;
    assert_eq!(keys(&top), vec!["mlkg"]);

    send(&app, Method::PUT, "/api/combination", json!({"weights": {"tf": 1}})).await;
    let (_, top) = get(&app, "/api/terms?status=all&limit=5").await;
    let counts: Vec<u64> = top.as_array().unwrap().iter().map(|r| r["count"].as_u64().unwrap()).collect();
    assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{counts:?}");

    for bad in [json!({"weights": {"tf": -1}}), json!({"weights": {"tf": 0}}), json!({"weights": {"loudness": 1}}), json!({"weights": {}})] {
        assert_error(send(&app, Method::PUT, "/api/combination", bad).await, StatusCode::UNPROCESSABLE_ENTITY, "invalid-combination");
    }
    assert_error(send(&app, Method::PUT, "/api/combination", json!({"name": "x"})).await, StatusCode::BAD_REQUEST, "bad-request");
}

#[tokio::test]
async fn candidates_and_links() {
    let app = app(None);
    let (_, cands) = get(&app, "/api/candidates").await;
    let cands = cands.as_array().unwrap();
    let find = |label: &str| cands.iter().find(|c| c["label"] == label);
    assert_eq!(find("Mercurtainment").unwrap()["conceptType"], "organization");
    assert_eq!(find("Kaiserslautern").unwrap()["conceptType"], "place");
    assert_eq!(find("Anna Brown").unwrap()["conceptType"], "person");

    let (_, all) = get(&app, "/api/links").await;
    let (_, temporal) = get(&app, "/api/links?kind=temporal").await;
    let (_, urls) = get(&app, "/api/links?kind=sharedUrl").await;
    let (_, copied) = get(&app, "/api/links?kind=copiedText").await;
    let n = |v: &Value| v.as_array().unwrap().len();
    assert_eq!(n(&temporal), 1);
    assert!(n(&urls) >= 1 && n(&copied) >= 1);
    assert_eq!(n(&all), n(&temporal) + n(&urls) + n(&copied));
    assert_eq!(temporal[0]["detail"], "2019-02-11");
    assert_error(get(&app, "/api/links?kind=gossip").await, StatusCode::BAD_REQUEST, "bad-request");
}

#[tokio::test]
async fn export_formats() {
    let app = app(None);
    send(&app, Method::POST, "/api/terms/mlkg/classify", json!({"status": "promising", "type": "project"})).await;

    let (s, ctype, ttl) = call(&app, Method::POST, "/api/export", Some(json!({"format": "ttl"}))).await;
    assert_eq!(s, StatusCode::OK);
    assert!(ctype.starts_with("text/turtle"), "{ctype}");
    let triples: Vec<String> = oxttl::TurtleParser::new()
        .for_slice(&ttl)
        .map(|t| t.expect("valid turtle").to_string())
        .collect();
    let vocab = "urn:pim-concepts:vocab#";
    let mlkg = "<urn:pim-concepts:concept:mlkg>";
    assert!(triples.contains(&format!("{mlkg} <{vocab}conceptType> <{vocab}Project>")));
    let occurs = triples.iter().filter(|t| t.starts_with(mlkg) && t.contains("occursIn")).count();
    assert!(occurs >= 3, "{occurs}");
    assert_eq!(triples.iter().filter(|t| t.contains(&format!("> <{vocab}temporal> <"))).count(), 1);
    assert!(triples.iter().any(|t| t.contains("extractedFrom")));
    let items = triples.iter().filter(|t| t.ends_with(&format!("<{vocab}Item>"))).count();
    assert_eq!(items, 70);

    let (s, ctype, body) = call(&app, Method::POST, "/api/export", Some(json!({"format": "json"}))).await;
    assert_eq!(s, StatusCode::OK);
    assert!(ctype.starts_with("application/json"));
    let graph: Value = serde_json::from_slice(&body).unwrap();
    let concept = graph["concepts"].as_array().unwrap().iter().find(|c| c["key"] == "mlkg").unwrap().clone();
    assert_eq!(concept["type"], "project");
    assert!(concept["occursIn"].as_array().unwrap().len() >= 3);
    assert_eq!(graph["items"].as_array().unwrap().len(), 70);

    assert_error(send(&app, Method::POST, "/api/export", json!({"format": "xml"})).await, StatusCode::BAD_REQUEST, "unsupported-format");
}

#[tokio::test]
async fn unknown_routes_and_error_mapping() {
    let app = app(None);
    assert_error(get(&app, "/api/nothing").await, StatusCode::NOT_FOUND, "not-found");
    let (s, _, _) = call(&app, Method::DELETE, "/api/terms", None).await;
    assert_eq!(s, StatusCode::METHOD_NOT_ALLOWED);

    let e = ApiError::from(TriageError::CorpusMismatch { expected: "a".into(), found: "b".into() });
    assert_eq!((e.status, e.code), (StatusCode::CONFLICT, "corpus-mismatch"));
}

#[test]
fn reopening_checks_the_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("session.json");
    drop(app(Some(&path)));
    let mut rng = common::rng(1);
    let other = common::random_corpus(&mut rng, 5);
    let err = Workspace::open(other, Some(&path), &Gazetteer::bundled(), IndexOptions::default()).err().unwrap();
    assert!(matches!(err, TriageError::CorpusMismatch { .. }), "{err}");
    // The same corpus picks the session up again.
    assert!(Workspace::open(common::scenario_corpus(), Some(&path), &Gazetteer::bundled(), IndexOptions::default()).is_ok());
}
