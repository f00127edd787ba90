//! Trace a request handler, then run the finished tree in the executor with a
//! per-request arena and compare against the interpreter.

use std::time::Instant;

use accel::bench::mock::MockUpstream;
use accel::exec::{execute_request, CompiledProgram, ExecLimits, RequestArena, StatsRecord};
use accel::instrument::{compile_source, InstrumentOptions};
use accel::interp::{run_plain, run_request};
use accel::upstream::Request;
use accel::zipper::BuilderState;
use serde_json::json;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let src = accel::bench::by_name("authorize").expect("benchmark").source;
    let p = compile_source(&src, &InstrumentOptions::default())?;
    let upstream = MockUpstream::default();

    let mut b = BuilderState::new();
    for pw in ["secret", "wrong"] {
        let req = Request::post("/", json!({ "username": "alice", "password": pw }));
        run_request(&p, &mut b, &req, &upstream);
    }
    let cp = CompiledProgram::new(b.handlers.clone());

    let mut arena = RequestArena::new(ExecLimits::default());
    for (id, (user, pw)) in [("bob", "hunter2"), ("bob", "guess"), ("eve", "x")].into_iter().enumerate() {
        let req = Request::post("/", json!({ "username": user, "password": pw }));
        let started = Instant::now();
        let r = execute_request(&cp, &req, &upstream, &mut arena);
        let reference = run_plain(&p, &req, &upstream).response;
        println!("{user}/{pw}: executor {:?}, interpreter {:?}", r.outcome, reference);
        println!("  {}", serde_json::to_string(&StatsRecord::new(id as u64, &r, started))?);
    }
    Ok(())
}
