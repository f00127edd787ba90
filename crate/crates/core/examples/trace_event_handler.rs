//! Trace a program with an asynchronous callback. Each callback gets its own
//! numbered handler in the table; the main body records an event node that
//! points at it.

use accel::instrument::{compile_source, InstrumentOptions};
use accel::interp::Session;
use accel::upstream::UpstreamClient;
use accel::zipper::BuilderState;
use serde_json::{json, Value as Json};

struct Canned;

impl UpstreamClient for Canned {
    fn get(&self, path: &str) -> Option<Json> {
        Some(json!({ "path": path, "greeting": "hello" }))
    }
    fn post(&self, _: &str, body: &Json) -> Option<Json> {
        Some(body.clone())
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let src = "let F = function(resp) { out = resp.greeting; }; let r = get('example.com', F);";
    let opts = InstrumentOptions {
        globals: vec!["out".into()],
    };
    let p = compile_source(src, &opts)?;
    let mut b = BuilderState::new();
    let r = Session::new(&p, &Canned).tracer(&mut b).global("out", Json::Null).run();
    println!("out = {}, callbacks run = {}", r.globals["out"], r.events);
    for (n, h) in b.handlers.iter() {
        println!("handler {n} ({}, {}): {}", h.arg_id, h.env_id, h.body);
    }
    Ok(())
}
