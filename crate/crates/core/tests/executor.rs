use std::sync::Arc;

use accel::bench::mock::MockUpstream;
use accel::exec::{execute_request, AbortReason, CompiledProgram, ExecLimits, ExecOutcome, Execution, RequestArena};
use accel::instrument::{compile_source, InstrumentOptions};
use accel::interp::{run_plain, Session};
use accel::upstream::{NoUpstream, Request};
use accel::zipper::BuilderState;
use serde_json::{json, Value as Json};

fn globals(names: &[&str]) -> InstrumentOptions {
    InstrumentOptions {
        globals: names.iter().map(|s| s.to_string()).collect(),
    }
}

/// Traces `src` once per global binding and compiles the resulting table.
fn trace_runs(src: &str, names: &[&str], runs: &[Json]) -> CompiledProgram {
    let p = compile_source(src, &globals(names)).unwrap();
    let mut b = BuilderState::new();
    for vals in runs {
        let mut s = Session::new(&p, &NoUpstream).tracer(&mut b);
        for (n, v) in names.iter().zip(vals.as_array().unwrap()) {
            s = s.global(n, v.clone());
        }
        let r = s.run();
        assert!(r.trace_error.is_none(), "{:?}", r.trace_error);
    }
    CompiledProgram::new(b.handlers.clone())
}

fn exec_globals(cp: &CompiledProgram, names: &[&str], vals: Json) -> (ExecOutcome, serde_json::Map<String, Json>, usize) {
    let mut arena = RequestArena::new(ExecLimits::default());
    let mut e = Execution::new(cp, &mut arena, &NoUpstream);
    for (n, v) in names.iter().zip(vals.as_array().unwrap()) {
        e = e.global(n, v.clone());
    }
    let r = e.run();
    let g = r.globals.into_iter().collect();
    (r.outcome, g, r.stats.live_cells)
}

const IF_SRC: &str = "if (x < 0) y = x * -1; else y = x;";

#[test]
fn completed_if_trace_runs_both_branches() {
    let cp = trace_runs(IF_SRC, &["x", "y"], &[json!([-3, null]), json!([10, null])]);
    let (o, g, live) = exec_globals(&cp, &["x", "y"], json!([10, null]));
    assert_eq!(o, ExecOutcome::Pending);
    assert_eq!(g["y"], json!(10));
    assert_eq!(live, 0);
    let (_, g, _) = exec_globals(&cp, &["x", "y"], json!([-4, null]));
    assert_eq!(g["y"], json!(4));
}

#[test]
fn untraced_branch_aborts_with_unknown() {
    let cp = trace_runs(IF_SRC, &["x", "y"], &[json!([-3, null])]);
    let (o, _, live) = exec_globals(&cp, &["x", "y"], json!([10, null]));
    assert_eq!(o, ExecOutcome::Aborted(AbortReason::Unknown));
    assert_eq!(live, 0);
}

#[test]
fn loops_run_past_the_traced_iteration_count() {
    let src = "let i = 0; while (i < n) { s = s + i; i = i + 1; }";
    let cp = trace_runs(src, &["n", "s"], &[json!([3, 0])]);
    let (_, g, _) = exec_globals(&cp, &["n", "s"], json!([100, 0]));
    assert_eq!(g["s"], json!(4950));
}

fn authorize() -> (accel::instrument::InstrumentedProgram, CompiledProgram) {
    let src = accel::bench::by_name("authorize").unwrap().source;
    let p = compile_source(&src, &InstrumentOptions::default()).unwrap();
    let mut b = BuilderState::new();
    let up = MockUpstream::default();
    for pw in ["secret", "wrong"] {
        let req = Request::post("/", json!({ "username": "alice", "password": pw }));
        let r = Session::new(&p, &up).tracer(&mut b).request(&req).run();
        assert!(r.trace_error.is_none());
    }
    (p, CompiledProgram::new(b.handlers.clone()))
}

#[test]
fn authorize_matches_the_interpreter_through_the_mock() {
    let (p, cp) = authorize();
    let up = MockUpstream::default();
    for (u, pw) in [("alice", "secret"), ("bob", "hunter2"), ("bob", "nope"), ("mallory", "x")] {
        let req = Request::post("/", json!({ "username": u, "password": pw }));
        let mut arena = RequestArena::new(ExecLimits::default());
        let r = execute_request(&cp, &req, &up, &mut arena);
        let reference = run_plain(&p, &req, &up).response.unwrap();
        assert_eq!(r.outcome, ExecOutcome::Responded(reference), "{u}/{pw}");
        assert_eq!(r.stats.live_cells, 0);
    }
}

#[test]
fn concurrent_requests_are_isolated() {
    let (_, cp) = authorize();
    let cp = Arc::new(cp);
    let up = MockUpstream::default();
    std::thread::scope(|s| {
        for t in 0..8 {
            let (cp, up) = (cp.clone(), &up);
            s.spawn(move || {
                let mut arena = RequestArena::new(ExecLimits::default());
                for i in 0..200 {
                    let good = (i + t) % 3 != 0;
                    let pw = if good { "pa55" } else { "nope" };
                    let req = Request::post("/", json!({ "username": "carol", "password": pw }));
                    let r = execute_request(&cp, &req, up, &mut arena);
                    let want = if good { "ok" } else { "error" };
                    assert_eq!(r.outcome, ExecOutcome::Responded(json!(want)));
                    assert_eq!(r.stats.live_cells, 0);
                }
            });
        }
    });
}

#[test]
fn closures_share_mutable_state_across_callbacks() {
    let src = "let c = require('containerless');
        let n = 0;
        function bump(x) { n = n + x; }
        c.listen(function(req) {
          bump(req.body.k);
          bump(1);
          c.respond({ total: n, twice: n * 2 });
        });";
    let p = compile_source(src, &InstrumentOptions::default()).unwrap();
    let mut b = BuilderState::new();
    let req = Request::post("/", json!({ "k": 4 }));
    let r = Session::new(&p, &NoUpstream).tracer(&mut b).request(&req).run();
    assert!(r.trace_error.is_none(), "{:?}", r.trace_error);
    let cp = CompiledProgram::new(b.handlers.clone());
    let req = Request::post("/", json!({ "k": 10 }));
    let mut arena = RequestArena::new(ExecLimits::default());
    let out = execute_request(&cp, &req, &NoUpstream, &mut arena);
    assert_eq!(out.outcome, ExecOutcome::Responded(json!({ "total": 11, "twice": 22 })));
}
