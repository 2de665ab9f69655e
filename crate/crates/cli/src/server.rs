//! JSON-over-HTTP front end. Stateless: every request carries its whole
//! scenario and runs on the blocking pool.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pbs::{Preset, Topology, WarsDistributions};
use serde::Serialize;
use tower_http::services::ServeDir;

use crate::api::{execute, ApiError, Operation};
use crate::config::{parse_scenario, FieldError};

pub const DEFAULT_MAX_TRIALS: u64 = 10_000_000;

#[derive(Clone, Debug)]
pub struct ServeOptions {
    pub max_trials: u64,
    pub static_dir: Option<PathBuf>,
}

impl Default for ServeOptions {
    fn default() -> Self {
        ServeOptions {
            max_trials: DEFAULT_MAX_TRIALS,
            static_dir: None,
        }
    }
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<String>,
}

fn error_response(status: StatusCode, field: Option<String>, error: String) -> Response {
    (status, Json(ErrorBody { error, field })).into_response()
}

impl From<FieldError> for Response {
    fn from(e: FieldError) -> Self {
        let field = (!e.field.is_empty()).then_some(e.field);
        error_response(StatusCode::BAD_REQUEST, field, e.message)
    }
}

fn api_error(e: ApiError) -> Response {
    match e {
        ApiError::Field(f) => f.into(),
        e if e.is_client_error() => error_response(StatusCode::BAD_REQUEST, None, e.to_string()),
        e => error_response(StatusCode::INTERNAL_SERVER_ERROR, None, e.to_string()),
    }
}

#[derive(Serialize)]
struct PresetInfo {
    name: &'static str,
    topology: Topology,
    distributions: WarsDistributions,
}

#[derive(Serialize)]
struct PresetList {
    presets: Vec<PresetInfo>,
}

async fn presets() -> Json<PresetList> {
    let mut presets: Vec<PresetInfo> = Preset::ALL
        .into_iter()
        .map(|p| PresetInfo {
            name: p.name(),
            topology: Topology::Uniform,
            distributions: p.distributions(),
        })
        .collect();
    presets.push(PresetInfo {
        name: "wan",
        topology: Topology::wan(),
        distributions: Preset::LnkdDisk.distributions(),
    });
    Json(PresetList { presets })
}

async fn run(op: Operation, opts: Arc<ServeOptions>, body: Bytes) -> Response {
    let mut cfg = match parse_scenario(&body) {
        Ok(cfg) => cfg,
        Err(e) => return e.into(),
    };
    let mut warnings = Vec::new();
    cfg.seed.get_or_insert_with(rand::random);
    if op.simulates() {
        if let Some(trials) = cfg.trials.filter(|&t| t > opts.max_trials) {
            warnings.push(format!("trials {trials} exceeds the server cap; clamped to {}", opts.max_trials));
            cfg.trials = Some(opts.max_trials);
        }
    }
    match tokio::task::spawn_blocking(move || execute(op, &cfg)).await {
        Ok(Ok(mut result)) => {
            result.warnings = warnings;
            Json(result).into_response()
        }
        Ok(Err(e)) => api_error(e),
        Err(join) => error_response(StatusCode::INTERNAL_SERVER_ERROR, None, join.to_string()),
    }
}

pub fn router(opts: ServeOptions) -> Router {
    let static_dir = opts.static_dir.clone();
    let mut api = Router::new().route("/api/presets", get(presets));
    for op in Operation::ALL {
        api = api.route(
            &format!("/api/{}", op.name()),
            post(move |State(opts): State<Arc<ServeOptions>>, body: Bytes| run(op, opts, body)),
        );
    }
    let app = api.with_state(Arc::new(opts));
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

pub async fn serve(listener: tokio::net::TcpListener, opts: ServeOptions) -> std::io::Result<()> {
    axum::serve(listener, router(opts))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
