//! HTTP front end for the invoker.
//!
//! | Method | Path                      | Body           | Reply                 |
//! |--------|---------------------------|----------------|-----------------------|
//! | PUT    | `/function/{name}`        | guest source   | status JSON           |
//! | POST   | `/function/{name}`        | request JSON   | the function's reply  |
//! | GET    | `/function/{name}/status` |                | status JSON           |
//! | GET    | `/function/{name}/trace`  |                | handler table JSON    |
//!
//! Invocation replies carry an `x-served-by` header naming the sandbox that
//! produced them.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response as HttpResponse};
use axum::routing::{get, put};
use axum::{Json, Router};
use serde_json::json;

use super::{InvokeError, Invoker};
use crate::upstream::Request;

pub const SERVED_BY: &str = "x-served-by";

fn error(status: StatusCode, msg: impl ToString) -> HttpResponse {
    (status, Json(json!({ "error": msg.to_string() }))).into_response()
}

fn invoke_error(e: InvokeError) -> HttpResponse {
    match e {
        InvokeError::NotFound(_) => error(StatusCode::NOT_FOUND, e),
        InvokeError::Parse(_) => error(StatusCode::BAD_REQUEST, e),
    }
}

async fn register(State(inv): State<Arc<Invoker>>, Path(name): Path<String>, body: Bytes) -> HttpResponse {
    let Ok(source) = std::str::from_utf8(&body) else {
        return error(StatusCode::BAD_REQUEST, "source must be UTF-8");
    };
    match inv.register(&name, source) {
        Ok(status) => (StatusCode::CREATED, Json(status)).into_response(),
        Err(e) => invoke_error(e),
    }
}

async fn invoke(State(inv): State<Arc<Invoker>>, Path(name): Path<String>, body: Bytes) -> HttpResponse {
    let body = if body.iter().all(u8::is_ascii_whitespace) {
        serde_json::Value::Null
    } else {
        match serde_json::from_slice(&body) {
            Ok(v) => v,
            Err(e) => return error(StatusCode::BAD_REQUEST, format!("request body is not JSON: {e}")),
        }
    };
    let req = Request::post(format!("/function/{name}"), body);
    let result = tokio::task::spawn_blocking(move || inv.dispatch(&name, &req)).await;
    match result {
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e),
        Ok(Err(e)) => invoke_error(e),
        Ok(Ok(inv)) => {
            let status = StatusCode::from_u16(inv.response.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
            let mut resp = (status, Json(inv.response.body)).into_response();
            resp.headers_mut()
                .insert(SERVED_BY, HeaderValue::from_static(inv.served_by.as_str()));
            resp
        }
    }
}

async fn status(State(inv): State<Arc<Invoker>>, Path(name): Path<String>) -> HttpResponse {
    match inv.status(&name) {
        Ok(s) => Json(s).into_response(),
        Err(e) => invoke_error(e),
    }
}

async fn trace(State(inv): State<Arc<Invoker>>, Path(name): Path<String>) -> HttpResponse {
    let f = match inv.function(&name) {
        Ok(f) => f,
        Err(e) => return invoke_error(e),
    };
    match tokio::task::spawn_blocking(move || f.trace()).await {
        Ok(Some(t)) => Json(t.to_json()).into_response(),
        Ok(None) => error(StatusCode::CONFLICT, format!("`{name}` runs in container mode")),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e),
    }
}

pub fn router(inv: Arc<Invoker>) -> Router {
    Router::new()
        .route("/function/{name}", put(register).post(invoke))
        .route("/function/{name}/status", get(status))
        .route("/function/{name}/trace", get(trace))
        .with_state(inv)
}

/// Serves `inv` on `addr` until the process exits.
pub async fn serve(inv: Arc<Invoker>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("invoker listening on {}", listener.local_addr()?);
    axum::serve(listener, router(inv)).await
}
