//! Read-only HTTP API over a [`ScenarioSnapshot`].
//!
//! | route | response |
//! |---|---|
//! | `GET /meta` | grid, time grid, class labels, default weights, ramps |
//! | `GET /layers/{aspect}?t=` | ranks (row-major) and grid |
//! | `GET /vri?t=&qd=&qa=&qb=[&format=csv]` | composed V, weights echoed normalized |
//! | `GET /buildings?t=` | per-building occupancy and scores |
//! | `GET /frames.png?t=&qd=&qa=&qb=&ramp=&cell_px=` | rendered frame |
//!
//! Errors are JSON `{"code", "message"}`: 400 for malformed queries, 404 for
//! unknown timesteps, aspects and routes.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;

use crate::activity::{step_clock, ActivityClass, STEPS, STEP_MINUTES};
use crate::error::Error;
use crate::geo::{render, write_values_csv, GridSpec, Timestep, DEFAULT_RAMP, RAMPS};
use crate::pipeline::ScenarioSnapshot;
use crate::vri::{Aspect, VRIWeights};

type Snap = Arc<ScenarioSnapshot>;
type Params = Query<HashMap<String, String>>;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            code,
            message: message.into(),
        }
    }

    fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::MissingStep(_) => Self::not_found("unknown_timestep", e.to_string()),
            Error::InvalidWeights(_) => Self::bad_request("invalid_weights", e.to_string()),
            Error::UnknownRamp { .. } => Self::bad_request("unknown_ramp", e.to_string()),
            _ => Self {
                status: StatusCode::INTERNAL_SERVER_ERROR,
                code: "internal",
                message: e.to_string(),
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Json(json!({ "code": self.code, "message": self.message }));
        (self.status, body).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

fn param<'a>(q: &'a HashMap<String, String>, key: &str) -> Option<&'a str> {
    q.get(key).map(String::as_str)
}

/// `t` as a step index: 400 if missing or not an integer, 404 if outside the day.
fn timestep(q: &HashMap<String, String>) -> ApiResult<usize> {
    let raw =
        param(q, "t").ok_or_else(|| ApiError::bad_request("missing_parameter", "query parameter `t` is required"))?;
    let t: i64 = raw
        .parse()
        .map_err(|_| ApiError::bad_request("invalid_parameter", format!("`t` must be an integer, got `{raw}`")))?;
    if !(0..STEPS as i64).contains(&t) {
        return Err(ApiError::not_found(
            "unknown_timestep",
            format!("timestep {t} is outside 0..{STEPS}"),
        ));
    }
    Ok(t as usize)
}

/// Raw `qd,qa,qb` normalized to sum 1; the snapshot's defaults when none
/// are given.
pub fn query_weights(q: &HashMap<String, String>, default: VRIWeights) -> ApiResult<VRIWeights> {
    let keys = ["qd", "qa", "qb"];
    let given: Vec<Option<&str>> = keys.iter().map(|k| param(q, k)).collect();
    if given.iter().all(Option::is_none) {
        return Ok(default);
    }
    let mut v = [0.0; 3];
    for (i, (k, raw)) in keys.iter().zip(&given).enumerate() {
        let raw = raw.ok_or_else(|| ApiError::bad_request("invalid_weights", "give qd, qa and qb together"))?;
        v[i] = raw
            .parse::<f64>()
            .map_err(|_| ApiError::bad_request("invalid_weights", format!("`{k}` must be a number, got `{raw}`")))?;
    }
    Ok(VRIWeights::normalized(v[0], v[1], v[2])?)
}

#[derive(Serialize)]
struct WeightsEcho {
    demographic: f64,
    activity: f64,
    building_env: f64,
}

impl From<VRIWeights> for WeightsEcho {
    fn from(w: VRIWeights) -> Self {
        Self {
            demographic: w.demographic(),
            activity: w.activity(),
            building_env: w.building_env(),
        }
    }
}

async fn meta(State(s): State<Snap>) -> Json<serde_json::Value> {
    let classes: Vec<_> = ActivityClass::ALL
        .iter()
        .map(|c| json!({ "label": c.label(), "description": c.description() }))
        .collect();
    Json(json!({
        "grid": s.config.grid,
        "steps": STEPS,
        "step_minutes": STEP_MINUTES,
        "timesteps": (0..STEPS).map(step_clock).collect::<Vec<_>>(),
        "classes": classes,
        "aspects": Aspect::ALL.map(Aspect::as_str),
        "default_weights": WeightsEcho::from(s.config.weights),
        "ramps": RAMPS.iter().map(|r| r.id).collect::<Vec<_>>(),
        "default_ramp": DEFAULT_RAMP,
        "content_hash": s.content_hash(),
    }))
}

#[derive(Serialize)]
struct LayerBody<'a> {
    aspect: Aspect,
    timestep: Timestep,
    grid: &'a GridSpec,
    ranks: &'a [Option<u8>],
}

async fn layer(State(s): State<Snap>, Path(aspect): Path<String>, Query(q): Params) -> ApiResult<Response> {
    let aspect: Aspect = aspect
        .parse()
        .map_err(|e: Error| ApiError::not_found("unknown_aspect", e.to_string()))?;
    let t = if aspect.is_static() && param(&q, "t").is_none() {
        0
    } else {
        timestep(&q)?
    };
    let l = s.layers.layer(aspect, t)?;
    Ok(Json(LayerBody {
        aspect,
        timestep: l.timestep,
        grid: &l.grid,
        ranks: &l.ranks,
    })
    .into_response())
}

#[derive(Serialize)]
struct VriBody<'a> {
    timestep: usize,
    grid: &'a GridSpec,
    weights: WeightsEcho,
    values: Vec<Option<f64>>,
}

async fn vri(State(s): State<Snap>, Query(q): Params) -> ApiResult<Response> {
    let t = timestep(&q)?;
    let w = query_weights(&q, s.config.weights)?;
    let map = s.compose(t, &w)?;
    match param(&q, "format") {
        None | Some("json") => Ok(Json(VriBody {
            timestep: t,
            grid: &s.config.grid,
            weights: w.into(),
            values: map.values,
        })
        .into_response()),
        Some("csv") => {
            let mut buf = Vec::new();
            write_values_csv(&map, &mut buf)?;
            Ok(([(header::CONTENT_TYPE, "text/csv")], buf).into_response())
        }
        Some(other) => Err(ApiError::bad_request(
            "invalid_parameter",
            format!("unknown format `{other}` (json or csv)"),
        )),
    }
}

async fn buildings(State(s): State<Snap>, Query(q): Params) -> ApiResult<Response> {
    let t = timestep(&q)?;
    let status = s.building_status(t)?;
    Ok(Json(json!({ "timestep": t, "buildings": status })).into_response())
}

async fn frame_png(State(s): State<Snap>, Query(q): Params) -> ApiResult<Response> {
    let t = timestep(&q)?;
    let w = query_weights(&q, s.config.weights)?;
    let ramp = param(&q, "ramp").unwrap_or(&s.config.render.ramp);
    let cell_px = match param(&q, "cell_px") {
        None => s.config.render.cell_px,
        Some(raw) => raw
            .parse::<u32>()
            .ok()
            .filter(|v| (1..=64).contains(v))
            .ok_or_else(|| ApiError::bad_request("invalid_parameter", "`cell_px` must be an integer in 1..=64"))?,
    };
    let png = render(&s.compose(t, &w)?, ramp, cell_px)?.to_png()?;
    Ok(([(header::CONTENT_TYPE, "image/png")], png).into_response())
}

async fn fallback() -> ApiError {
    ApiError::not_found("not_found", "no such route")
}

pub fn router(snapshot: Arc<ScenarioSnapshot>) -> Router {
    Router::new()
        .route("/meta", get(meta))
        .route("/layers/{aspect}", get(layer))
        .route("/vri", get(vri))
        .route("/buildings", get(buildings))
        .route("/frames.png", get(frame_png))
        .fallback(fallback)
        .with_state(snapshot)
}

/// Serves the API until the process is stopped.
pub async fn serve(snapshot: Arc<ScenarioSnapshot>, addr: SocketAddr) -> crate::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::io(addr.to_string(), e))?;
    axum::serve(listener, router(snapshot))
        .await
        .map_err(|e| Error::io(addr.to_string(), e))
}
