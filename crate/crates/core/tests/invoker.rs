use std::sync::Arc;
use std::time::Duration;

use accel::bench::mock::MockUpstream;
use accel::bench::stack::LocalStack;
use accel::bench::{self, Generator};
use accel::exec::{AbortReason, ExecLimits};
use accel::invoker::{InvokeError, Invoker, InvokerConfig, Mode, ServedBy};
use accel::upstream::Request;
use serde_json::{json, Value as Json};

fn config(trace_after: usize) -> InvokerConfig {
    InvokerConfig {
        trace_after,
        ..InvokerConfig::default()
    }
}

fn invoker(trace_after: usize) -> Invoker {
    Invoker::new(config(trace_after), Arc::new(MockUpstream::default()))
}

fn login(u: &str, p: &str) -> Request {
    Request::post("/", json!({ "username": u, "password": p }))
}

#[test]
fn tracing_then_containerless() {
    let inv = invoker(5);
    let def = bench::by_name("authorize").unwrap();
    let st = inv.register("auth", &def.source).unwrap();
    assert_eq!(st.mode, Mode::Tracing);
    for i in 0..5 {
        let pw = if i % 2 == 0 { "secret" } else { "bad" };
        let r = inv.dispatch("auth", &login("alice", pw)).unwrap();
        assert_eq!(r.served_by, ServedBy::Tracer);
    }
    let st = inv.status("auth").unwrap();
    assert_eq!(st.mode, Mode::Containerless);
    assert_eq!(st.traced_event_count, 5);
    let r = inv.dispatch("auth", &login("dave", "letmein")).unwrap();
    assert_eq!(r.served_by, ServedBy::Executor);
    assert_eq!(r.response.body, json!("ok"));
    assert_eq!(r.arena.unwrap().live_cells, 0);
    let st = inv.status("auth").unwrap();
    assert_eq!((st.requests, st.served_by_tracer, st.served_by_executor), (6, 5, 1));
    assert!(st.latency.is_some());
}

#[test]
fn failing_requests_do_not_count_towards_the_switch() {
    let inv = invoker(2);
    inv.register("f", "let c = require('containerless'); c.listen(function(req) { c.respond(req.body.a.b); });")
        .unwrap();
    let bad = inv.dispatch("f", &Request::post("/", json!({}))).unwrap();
    assert_eq!(bad.response.status, 500);
    assert_eq!(inv.status("f").unwrap().traced_event_count, 0);
    for _ in 0..2 {
        inv.dispatch("f", &Request::post("/", json!({ "a": { "b": 1 } }))).unwrap();
    }
    assert_eq!(inv.status("f").unwrap().mode, Mode::Containerless);
}

#[test]
fn unknown_functions_are_not_found() {
    let inv = invoker(5);
    assert!(matches!(inv.dispatch("nope", &login("a", "b")), Err(InvokeError::NotFound(_))));
    assert!(matches!(inv.register("bad", "let = ;"), Err(InvokeError::Parse(_))));
}

#[test]
fn unsupported_features_stay_in_container_mode() {
    let inv = invoker(1);
    let st = inv
        .register("ev", "let c = require('containerless'); c.listen(function(r) { c.respond(eval('1')); });")
        .unwrap();
    assert_eq!(st.mode, Mode::ContainerOnly);
    assert!(st.container_reason.is_some());
    let r = inv.dispatch("ev", &login("a", "b")).unwrap();
    assert_eq!(r.served_by, ServedBy::Unsupported);
    assert_eq!(r.response.status, 501);
}

#[test]
fn recursion_runs_in_the_interpreter_only() {
    let inv = invoker(1);
    let src = "let c = require('containerless');
        function fact(n) { if (n < 2) { return 1; } return n * fact(n - 1); }
        c.listen(function(r) { c.respond(fact(r.body)); });";
    let st = inv.register("fact", src).unwrap();
    assert_eq!(st.mode, Mode::ContainerOnly);
    let r = inv.dispatch("fact", &Request::post("/", json!(5))).unwrap();
    assert_eq!(r.served_by, ServedBy::Interpreter);
    assert_eq!(r.response.body, json!(120));
}

#[test]
fn limits_abort_without_bouncing() {
    let inv = Invoker::new(
        InvokerConfig {
            trace_after: 1,
            limits: ExecLimits {
                max_instructions: 50_000,
                ..ExecLimits::default()
            },
            ..InvokerConfig::default()
        },
        Arc::new(MockUpstream::default()),
    );
    let src = "let c = require('containerless');
        c.listen(function(r) { let i = 0; while (i < r.body) { i = i + 1; } c.respond(i); });";
    inv.register("count", src).unwrap();
    inv.dispatch("count", &Request::post("/", json!(3))).unwrap();
    let r = inv.dispatch("count", &Request::post("/", json!(1_000_000))).unwrap();
    assert_eq!(r.abort, Some(AbortReason::InstructionLimit));
    assert_eq!(r.served_by, ServedBy::Fallback);
    assert_eq!(r.response.body, json!(1_000_000));
    let st = inv.status("count").unwrap();
    assert_eq!((st.mode, st.bounce_count), (Mode::Containerless, 0));
}

#[test]
fn repeated_bounces_give_up_on_tracing() {
    let inv = Invoker::new(
        InvokerConfig {
            trace_after: 3,
            max_bounces: 1,
            ..InvokerConfig::default()
        },
        Arc::new(MockUpstream::default()),
    );
    let def = bench::by_name("status").unwrap();
    inv.register("s", &def.source).unwrap();
    let mut g = Generator::new(&def, 5);
    for round in 0..2 {
        while inv.status("s").unwrap().mode == Mode::Tracing {
            inv.dispatch("s", &g.warmup()).unwrap();
        }
        let r = inv.dispatch("s", &g.adversarial()).unwrap();
        assert_eq!(r.abort, Some(AbortReason::Unknown), "round {round}");
        assert_eq!(r.served_by, ServedBy::Fallback);
    }
    let st = inv.status("s").unwrap();
    assert_eq!((st.mode, st.bounce_count), (Mode::ContainerOnly, 2));
    assert_eq!(inv.dispatch("s", &g.adversarial()).unwrap().served_by, ServedBy::Interpreter);
}

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(Duration::from_secs(10)))
        .build()
        .new_agent()
}

fn served_by(r: &ureq::http::Response<ureq::Body>) -> String {
    r.headers()["x-served-by"].to_str().unwrap().to_string()
}

#[test]
fn http_endpoints() {
    let stack = LocalStack::start(config(3), Duration::ZERO).unwrap();
    let a = agent();
    let url = |p: &str| format!("{}{p}", stack.invoker_url);
    let src = bench::by_name("authorize").unwrap().source;

    let mut r = a.put(url("/function/auth")).send(src.as_bytes()).unwrap();
    assert_eq!(r.status(), 201);
    let st: Json = r.body_mut().read_json().unwrap();
    assert_eq!(st["mode"], "tracing");

    let r = a.put(url("/function/broken")).send("let = ;".as_bytes()).unwrap();
    assert_eq!(r.status(), 400);
    let r = a.post(url("/function/missing")).send("{}".as_bytes()).unwrap();
    assert_eq!(r.status(), 404);
    let r = a.post(url("/function/auth")).send("{not json".as_bytes()).unwrap();
    assert_eq!(r.status(), 400);

    for pw in ["secret", "no", "secret"] {
        let mut r = a
            .post(url("/function/auth"))
            .send_json(json!({ "username": "alice", "password": pw }))
            .unwrap();
        assert_eq!(served_by(&r), "tracer");
        let body: Json = r.body_mut().read_json().unwrap();
        assert_eq!(body, json!(if pw == "secret" { "ok" } else { "error" }));
    }
    let mut r = a
        .post(url("/function/auth"))
        .send_json(json!({ "username": "bob", "password": "hunter2" }))
        .unwrap();
    assert_eq!(served_by(&r), "executor");
    assert_eq!(r.body_mut().read_to_string().unwrap(), "\"ok\"");

    let mut r = a.get(url("/function/auth/status")).call().unwrap();
    let st: Json = r.body_mut().read_json().unwrap();
    assert_eq!(st["mode"], "containerless");
    assert_eq!(st["servedByExecutor"], 1);

    let mut r = a.get(url("/function/auth/trace")).call().unwrap();
    assert_eq!(r.status(), 200);
    let t: Json = r.body_mut().read_json().unwrap();
    assert!(t.to_string().contains("respond"));

    a.put(url("/function/ev"))
        .send("let c = require('containerless'); c.listen(function(r) { c.respond(eval('1')); });".as_bytes())
        .unwrap();
    assert_eq!(a.get(url("/function/ev/trace")).call().unwrap().status(), 409);
    let r = a.post(url("/function/ev")).send("1".as_bytes()).unwrap();
    assert_eq!(r.status(), 501);
    assert_eq!(served_by(&r), "unsupported");
}
