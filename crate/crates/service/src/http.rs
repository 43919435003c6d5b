//! JSON over HTTP. Every handler takes one snapshot at the start of the
//! request and answers from it alone.

use std::io;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Serialize;
use serde_json::json;

use crate::api::{self, ApiError, ErrorCode};
use crate::snapshot::SharedSnapshot;

pub type AppState = Arc<SharedSnapshot>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/channels", get(channels))
        .route("/api/templates", get(templates))
        .route("/api/config", get(config))
        .route("/api/recommend", post(recommend))
        .route("/api/validate", post(validate))
        .route("/api/render", post(render))
        .fallback(not_found)
        .with_state(state)
}

fn json_response(status: StatusCode, body: &impl Serialize) -> Response {
    let bytes = serde_json::to_vec(body).expect("response serializes");
    (status, [(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

fn respond<T: Serialize>(result: Result<T, ApiError>) -> Response {
    match result {
        Ok(body) => json_response(StatusCode::OK, &body),
        Err(e) => {
            let status = StatusCode::from_u16(e.code.http_status()).expect("valid status");
            json_response(status, &e)
        }
    }
}

async fn channels(State(state): State<AppState>) -> Response {
    respond(Ok(api::handle_channels(&state.get())))
}

async fn templates(State(state): State<AppState>) -> Response {
    respond(Ok(api::handle_templates(&state.get())))
}

async fn config(State(state): State<AppState>) -> Response {
    respond(Ok(api::handle_config(&state.get())))
}

async fn recommend(State(state): State<AppState>, body: Bytes) -> Response {
    let snapshot = state.get();
    respond(api::parse_request(&body).and_then(|r| api::handle_recommend(&snapshot, &r)))
}

async fn validate(State(state): State<AppState>, body: Bytes) -> Response {
    let snapshot = state.get();
    respond(api::parse_request(&body).and_then(|r| api::handle_validate(&snapshot, &r)))
}

async fn render(State(state): State<AppState>, body: Bytes) -> Response {
    let snapshot = state.get();
    respond(api::parse_request(&body).and_then(|r| api::handle_render(&snapshot, &r)))
}

async fn not_found(uri: axum::http::Uri) -> Response {
    respond::<()>(Err(ApiError::new(
        ErrorCode::NotFound,
        format!("no endpoint at {}", uri.path()),
        json!({ "path": uri.path() }),
    )))
}

/// Serves until Ctrl-C. On Unix, SIGHUP reloads the data from disk.
pub async fn serve(state: AppState, addr: SocketAddr) -> io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("cmf: listening on http://{}", listener.local_addr()?);
    #[cfg(unix)]
    {
        let state = state.clone();
        let mut hup = tokio::signal::unix::signal(tokio::signal::unix::SignalKind::hangup())?;
        tokio::spawn(async move {
            while hup.recv().await.is_some() {
                match state.reload() {
                    Ok(s) => eprintln!("cmf: reloaded {} templates", s.catalog().len()),
                    Err(errors) => {
                        eprintln!("cmf: reload failed, keeping the previous data");
                        for e in errors {
                            eprintln!("  {e}");
                        }
                    }
                }
            }
        });
    }
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
