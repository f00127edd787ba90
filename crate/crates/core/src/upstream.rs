//! Requests, responses and the client used for outbound `get`/`post` calls.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

/// An inbound request to a serverless function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub method: String,
    pub path: String,
    #[serde(default)]
    pub body: Json,
}

impl Request {
    pub fn post(path: impl Into<String>, body: Json) -> Self {
        Request {
            method: "POST".into(),
            path: path.into(),
            body,
        }
    }

    /// The payload delivered to `listen` callbacks.
    pub fn to_json(&self) -> Json {
        serde_json::json!({ "method": self.method, "path": self.path, "body": self.body })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub status: u16,
    pub body: Json,
}

impl Response {
    pub fn ok(body: Json) -> Self {
        Response { status: 200, body }
    }

    pub fn error(status: u16, msg: impl Into<String>) -> Self {
        Response {
            status,
            body: serde_json::json!({ "error": msg.into() }),
        }
    }

    /// The body as compact JSON text.
    pub fn body_text(&self) -> String {
        self.body.to_string()
    }
}

/// Outbound HTTP as seen by guest programs. `None` means the call failed;
/// the callback then receives `undefined`.
pub trait UpstreamClient: Send + Sync {
    fn get(&self, path: &str) -> Option<Json>;
    fn post(&self, path: &str, body: &Json) -> Option<Json>;
}

/// Upstream client that talks JSON over HTTP to `base_url`.
pub struct HttpUpstream {
    base: String,
    agent: ureq::Agent,
}

impl HttpUpstream {
    pub fn new(base_url: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(5)))
            .http_status_as_error(false)
            .max_idle_connections(256)
            .max_idle_connections_per_host(128)
            .build()
            .new_agent();
        HttpUpstream {
            base: base_url.into().trim_end_matches('/').to_string(),
            agent,
        }
    }

    fn url(&self, path: &str) -> String {
        if path.starts_with("http://") || path.starts_with("https://") {
            path.to_string()
        } else {
            format!("{}/{}", self.base, path.trim_start_matches('/'))
        }
    }

    fn read(resp: Result<ureq::http::Response<ureq::Body>, ureq::Error>) -> Option<Json> {
        let mut resp = resp.ok()?;
        if !resp.status().is_success() {
            return None;
        }
        resp.body_mut().read_json::<Json>().ok()
    }
}

impl UpstreamClient for HttpUpstream {
    fn get(&self, path: &str) -> Option<Json> {
        Self::read(self.agent.get(&self.url(path)).call())
    }

    fn post(&self, path: &str, body: &Json) -> Option<Json> {
        Self::read(self.agent.post(&self.url(path)).send_json(body))
    }
}

/// An upstream that answers every call with `undefined`.
pub struct NoUpstream;

impl UpstreamClient for NoUpstream {
    fn get(&self, _: &str) -> Option<Json> {
        None
    }

    fn post(&self, _: &str, _: &Json) -> Option<Json> {
        None
    }
}
