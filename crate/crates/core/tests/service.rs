use std::fs;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use serde_json::Value;
use tempfile::TempDir;
use tower::ServiceExt;

use cvri::pipeline::{run_pipeline, OutputLayout, ProjectConfig, ScenarioSnapshot, Stage};
use cvri::service::router;
use cvri::synth::{SynthOptions, SyntheticCounty};
use cvri::Error;

struct Fixture {
    _dir: TempDir,
    out: PathBuf,
    snapshot: Arc<ScenarioSnapshot>,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in");
        SyntheticCounty::generate(&SynthOptions {
            seed: 5,
            persons: 300,
            gps_persons: 0,
        })
        .unwrap()
        .write_to(&input, 1)
        .unwrap();
        let config = ProjectConfig::load(input.join("config.toml")).unwrap();
        let out = dir.path().join("out");
        let run = run_pipeline(&config, &Stage::ALL, &out).unwrap();
        Fixture {
            _dir: dir,
            out,
            snapshot: Arc::new(run.snapshot.expect("snapshot after a full run")),
        }
    })
}

fn app() -> Router {
    router(fixture().snapshot.clone())
}

async fn get(uri: &str) -> (StatusCode, Vec<u8>) {
    let resp = app()
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = resp.status();
    (status, to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec())
}

async fn get_json(uri: &str) -> (StatusCode, Value) {
    let (status, body) = get(uri).await;
    (status, serde_json::from_slice(&body).unwrap_or(Value::Null))
}

#[tokio::test]
async fn meta_describes_the_snapshot() {
    let (status, meta) = get_json("/meta").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(meta["steps"], 96);
    assert_eq!(meta["step_minutes"], 15);
    assert_eq!(meta["timesteps"][40], "10:00");
    assert_eq!(meta["classes"].as_array().unwrap().len(), 8);
    assert_eq!(meta["classes"][1]["label"], "c02");
    assert_eq!(meta["grid"]["rows"], 20);
    assert_eq!(meta["default_weights"]["demographic"], 0.4);
    assert_eq!(
        meta["aspects"],
        serde_json::json!(["demographic", "activity", "building_env"])
    );
    assert_eq!(meta["content_hash"], fixture().snapshot.content_hash());
}

#[tokio::test]
async fn degenerate_weights_return_the_demographic_ranks() {
    let (_, vri) = get_json("/vri?t=0&qd=1&qa=0&qb=0").await;
    let (_, layer) = get_json("/layers/demographic").await;
    let ranks = layer["ranks"].as_array().unwrap();
    let values = vri["values"].as_array().unwrap();
    assert_eq!(ranks.len(), 400);
    for (r, v) in ranks.iter().zip(values) {
        assert_eq!(r.as_f64(), v.as_f64());
    }
    assert_eq!(vri["weights"]["demographic"], 1.0);
}

#[tokio::test]
async fn weights_are_normalized_before_composition() {
    let (s1, a) = get("/vri?t=33&qd=2&qa=2&qb=1").await;
    let (s2, b) = get("/vri?t=33&qd=4&qa=4&qb=2").await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["weights"]["building_env"], 0.2);
}

#[tokio::test]
async fn csv_body_equals_exported_frame() {
    let (status, body) = get("/vri?t=40&format=csv").await;
    assert_eq!(status, StatusCode::OK);
    let exported = fs::read(OutputLayout::new(&fixture().out).frame(40, "csv")).unwrap();
    assert!(body == exported);
}

#[tokio::test]
async fn activity_layer_matches_snapshot() {
    let (status, body) = get_json("/layers/activity?t=5").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["timestep"], 5);
    let expect: Vec<Option<u8>> = fixture().snapshot.layers.activity[5].ranks.clone();
    let got: Vec<Option<u8>> = serde_json::from_value(body["ranks"].clone()).unwrap();
    assert_eq!(got, expect);
}

#[tokio::test]
async fn buildings_and_png() {
    let (status, body) = get_json("/buildings?t=40").await;
    assert_eq!(status, StatusCode::OK);
    let list = body["buildings"].as_array().unwrap();
    assert_eq!(list.len(), 500);
    assert!(list[0]["occupancy"].as_array().unwrap().len() == 8);

    let (status, png) = get("/frames.png?t=40&ramp=blues&cell_px=2").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(&png[..8], b"\x89PNG\r\n\x1a\n");
}

#[tokio::test]
async fn errors_carry_code_and_message() {
    let cases = [
        ("/vri?t=96", StatusCode::NOT_FOUND, "unknown_timestep"),
        ("/vri?t=-1", StatusCode::NOT_FOUND, "unknown_timestep"),
        ("/vri?t=abc", StatusCode::BAD_REQUEST, "invalid_parameter"),
        ("/vri", StatusCode::BAD_REQUEST, "missing_parameter"),
        ("/vri?t=1&qd=-1&qa=1&qb=1", StatusCode::BAD_REQUEST, "invalid_weights"),
        ("/vri?t=1&qd=0&qa=0&qb=0", StatusCode::BAD_REQUEST, "invalid_weights"),
        ("/vri?t=1&qd=1", StatusCode::BAD_REQUEST, "invalid_weights"),
        ("/vri?t=1&qd=x&qa=1&qb=1", StatusCode::BAD_REQUEST, "invalid_weights"),
        ("/vri?t=1&format=xml", StatusCode::BAD_REQUEST, "invalid_parameter"),
        ("/layers/wind", StatusCode::NOT_FOUND, "unknown_aspect"),
        ("/layers/activity", StatusCode::BAD_REQUEST, "missing_parameter"),
        ("/buildings?t=200", StatusCode::NOT_FOUND, "unknown_timestep"),
        ("/frames.png?t=1&ramp=viridis", StatusCode::BAD_REQUEST, "unknown_ramp"),
        (
            "/frames.png?t=1&cell_px=0",
            StatusCode::BAD_REQUEST,
            "invalid_parameter",
        ),
        ("/nope", StatusCode::NOT_FOUND, "not_found"),
    ];
    for (uri, status, code) in cases {
        let (got, body) = get_json(uri).await;
        assert_eq!(got, status, "{uri}");
        assert_eq!(body["code"], code, "{uri}");
        assert!(!body["message"].as_str().unwrap().is_empty(), "{uri}");
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_identical_requests_agree() {
    let tasks: Vec<_> = (0..16).map(|_| tokio::spawn(get("/vri?t=70&qd=1&qa=3&qb=2"))).collect();
    let mut bodies = Vec::new();
    for t in tasks {
        bodies.push(t.await.unwrap().1);
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn snapshot_requires_assess_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    SyntheticCounty::generate(&SynthOptions {
        seed: 6,
        persons: 100,
        gps_persons: 0,
    })
    .unwrap()
    .write_to(&input, 1)
    .unwrap();
    let config = ProjectConfig::load(input.join("config.toml")).unwrap();
    let out = dir.path().join("out");
    run_pipeline(&config, &[Stage::Fit, Stage::Simulate, Stage::Map], &out).unwrap();
    match ScenarioSnapshot::load(&config, &OutputLayout::new(&out)) {
        Err(Error::MissingStage { requires, .. }) => assert_eq!(requires, "assess"),
        other => panic!("expected MissingStage, got {:?}", other.map(|_| ())),
    }
}
