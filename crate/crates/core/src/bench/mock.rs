//! Mock upstream services for the benchmarks.
//!
//! Routes (paths are relative to the mock's base URL):
//!
//! - `GET passwords.json`: the user database.
//! - `POST storage/upload`: stores `{bucket, name, content}`, replies `{name, length}`.
//! - `POST github/repos/{owner}/{repo}/statuses/{sha}`: replies `{id, state, url}`.
//! - `GET datastore/accounts/{id}`: `{balance, version}`; 404 if the account is new.
//! - `GET datastore/transactions/{txid}`: `{balance}`; 404 if not committed.
//! - `POST datastore/commit`: version-checked update, replies `{committed, balance}`.
//!
//! Anything else is a 404, which guests see as `undefined`.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json as AxumJson, Router};
use parking_lot::Mutex;
use serde_json::{json, Value as Json};

use super::USERS;
use crate::upstream::UpstreamClient;

/// Account store with transactional, idempotent commits.
#[derive(Debug, Default, Clone)]
pub struct Bank {
    accounts: HashMap<String, (i64, i64)>,
    transactions: HashMap<String, i64>,
}

impl Bank {
    pub fn account(&self, id: &str) -> Option<Json> {
        self.accounts
            .get(id)
            .map(|(balance, version)| json!({ "balance": balance, "version": version }))
    }

    pub fn transaction(&self, txid: &str) -> Option<Json> {
        self.transactions.get(txid).map(|b| json!({ "balance": b }))
    }

    /// Applies `{account, txid, version, balance}` if the version matches.
    /// Re-committing a known transaction reports its original balance.
    pub fn commit(&mut self, body: &Json) -> Json {
        let (Some(account), Some(txid), Some(version), Some(balance)) = (
            body["account"].as_str(),
            body["txid"].as_str(),
            body["version"].as_i64(),
            body["balance"].as_i64(),
        ) else {
            return json!({ "committed": false });
        };
        if let Some(b) = self.transactions.get(txid) {
            return json!({ "committed": true, "balance": b });
        }
        let current = self.accounts.get(account).map_or(0, |a| a.1);
        if current != version {
            return json!({ "committed": false });
        }
        self.accounts.insert(account.to_string(), (balance, version + 1));
        self.transactions.insert(txid.to_string(), balance);
        json!({ "committed": true, "balance": balance })
    }

    /// Runs one banking request sequentially, as the guest would.
    pub fn replay(&mut self, req: &Json) -> Json {
        let txid = req["txid"].as_str().unwrap_or_default();
        if let Some(b) = self.transactions.get(txid) {
            return json!({ "txid": txid, "balance": b });
        }
        let account = req["account"].as_str().unwrap_or_default();
        let (balance, version) = self.accounts.get(account).copied().unwrap_or((0, 0));
        let mut amount = req["amount"].as_i64().unwrap_or_default();
        if req["type"] == "withdraw" {
            amount = -amount;
        }
        if balance + amount < 0 {
            return json!({ "error": "insufficient funds", "balance": balance });
        }
        let res = self.commit(&json!({
            "account": account, "txid": txid, "version": version, "balance": balance + amount
        }));
        if res["committed"] == true {
            json!({ "txid": txid, "balance": res["balance"] })
        } else {
            json!({ "error": "conflict" })
        }
    }
}

fn fnv(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}

/// In-process mock upstream. One instance holds one copy of the state.
pub struct MockUpstream {
    delay: Duration,
    bank: Mutex<Bank>,
    uploads: Mutex<HashMap<String, String>>,
}

impl Default for MockUpstream {
    fn default() -> Self {
        Self::new(Duration::ZERO)
    }
}

impl MockUpstream {
    pub fn new(delay: Duration) -> Self {
        MockUpstream {
            delay,
            bank: Mutex::new(Bank::default()),
            uploads: Mutex::new(HashMap::new()),
        }
    }

    pub fn bank(&self) -> Bank {
        self.bank.lock().clone()
    }

    fn pause(&self) {
        if !self.delay.is_zero() {
            std::thread::sleep(self.delay);
        }
    }

    pub fn handle_get(&self, path: &str) -> Option<Json> {
        let path = path.trim_start_matches('/');
        if path == "passwords.json" {
            return Some(Json::Object(
                USERS.iter().map(|(u, p)| (u.to_string(), json!(p))).collect(),
            ));
        }
        if let Some(id) = path.strip_prefix("datastore/accounts/") {
            return self.bank.lock().account(id);
        }
        if let Some(txid) = path.strip_prefix("datastore/transactions/") {
            return self.bank.lock().transaction(txid);
        }
        None
    }

    pub fn handle_post(&self, path: &str, body: &Json) -> Option<Json> {
        let path = path.trim_start_matches('/');
        if path == "storage/upload" {
            let name = body["name"].as_str()?;
            let content = body["content"].as_str()?;
            self.uploads.lock().insert(name.to_string(), content.to_string());
            return Some(json!({ "name": name, "length": content.chars().count() }));
        }
        if path == "datastore/commit" {
            return Some(self.bank.lock().commit(body));
        }
        if let Some(rest) = path.strip_prefix("github/repos/") {
            let (_, sha) = rest.rsplit_once("/statuses/")?;
            let state = body["state"].as_str()?;
            let id = fnv(&format!("{path}:{state}")) % 1_000_000_000;
            return Some(json!({
                "id": id,
                "state": state,
                "url": format!("https://api.github.com/repos/{rest}"),
                "sha": sha,
            }));
        }
        None
    }
}

impl UpstreamClient for MockUpstream {
    fn get(&self, path: &str) -> Option<Json> {
        self.pause();
        self.handle_get(path)
    }

    fn post(&self, path: &str, body: &Json) -> Option<Json> {
        self.pause();
        self.handle_post(path, body)
    }
}

fn reply(v: Option<Json>) -> Response {
    match v {
        Some(v) => AxumJson(v).into_response(),
        None => (StatusCode::NOT_FOUND, AxumJson(json!({ "error": "no such route" }))).into_response(),
    }
}

async fn get_route(State(m): State<Arc<MockUpstream>>, Path(path): Path<String>) -> Response {
    if !m.delay.is_zero() {
        tokio::time::sleep(m.delay).await;
    }
    reply(m.handle_get(&path))
}

async fn post_route(State(m): State<Arc<MockUpstream>>, Path(path): Path<String>, body: Bytes) -> Response {
    if !m.delay.is_zero() {
        tokio::time::sleep(m.delay).await;
    }
    let body: Json = serde_json::from_slice(&body).unwrap_or(Json::Null);
    reply(m.handle_post(&path, &body))
}

pub fn router(m: Arc<MockUpstream>) -> Router {
    Router::new()
        .route("/{*path}", get(get_route).post(post_route))
        .with_state(m)
}

/// Serves the mock on `addr` until the process exits.
pub async fn serve(m: Arc<MockUpstream>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("mock upstream listening on {}", listener.local_addr()?);
    axum::serve(listener, router(m)).await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replaying_a_transaction_leaves_the_store_unchanged() {
        let mut bank = Bank::default();
        let req = json!({ "account": "a", "txid": "t1", "type": "deposit", "amount": 5 });
        assert_eq!(bank.replay(&req), json!({ "txid": "t1", "balance": 5 }));
        let before = bank.clone();
        assert_eq!(bank.replay(&req), json!({ "txid": "t1", "balance": 5 }));
        assert_eq!((bank.accounts, bank.transactions), (before.accounts, before.transactions));
    }

    #[test]
    fn stale_versions_do_not_commit() {
        let mut bank = Bank::default();
        let c = |tx: &str, v: i64| json!({ "account": "a", "txid": tx, "version": v, "balance": 1 });
        assert_eq!(bank.commit(&c("t1", 0))["committed"], true);
        assert_eq!(bank.commit(&c("t2", 0))["committed"], false);
    }
}
