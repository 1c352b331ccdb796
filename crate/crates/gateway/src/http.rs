//! `GET /experts?q=<text>&n=<int>` and `GET /healthz`.
//!
//! The engine is loaded off the request path; until it is ready `/experts`
//! answers 503. Once set it is never mutated.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use expertvote::engine::Engine;
use expertvote::Error;
use serde_json::json;

use crate::ExpertsResponse;

#[derive(Clone, Default)]
pub struct AppState {
    engine: Arc<OnceLock<Engine>>,
}

impl AppState {
    pub fn ready(engine: Engine) -> Self {
        let state = AppState::default();
        state.set_engine(engine);
        state
    }

    /// Publishes the engine; later calls are ignored.
    pub fn set_engine(&self, engine: Engine) {
        let _ = self.engine.set(engine);
    }

    pub fn is_ready(&self) -> bool {
        self.engine.get().is_some()
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/experts", get(experts))
        .route("/healthz", get(healthz))
        .with_state(state)
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

async fn healthz() -> &'static str {
    "ok"
}

async fn experts(State(state): State<AppState>, Query(params): Query<HashMap<String, String>>) -> Response {
    let Some(q) = params.get("q").filter(|q| !q.trim().is_empty()) else {
        return error(StatusCode::BAD_REQUEST, "missing query parameter `q`");
    };
    let Some(engine) = state.engine.get() else {
        return error(StatusCode::SERVICE_UNAVAILABLE, "index not ready");
    };
    let n = match params.get("n") {
        None => engine.config().experts,
        Some(raw) => match raw.parse::<usize>() {
            Ok(n) => n,
            Err(_) => return error(StatusCode::BAD_REQUEST, format!("`n` must be a non-negative integer, got {raw:?}")),
        },
    };
    match engine.search(q, n) {
        Ok(ranking) => Json(ExpertsResponse::from_ranking(engine, q, &ranking)).into_response(),
        Err(e @ Error::Argument(_)) => error(StatusCode::BAD_REQUEST, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}
