//! Golden rows for the worked tracing examples.

use std::collections::VecDeque;

use accel::ast::BinOp;
use accel::instrument::{compile_source, InstrumentOptions, InstrumentedProgram};
use accel::interp::{Session, Step};
use accel::trace::{EnvEntry, EventKind, HandlerTable, Trace};
use accel::upstream::{NoUpstream, UpstreamClient};
use accel::zipper::{BuilderState, Frame};
use serde_json::{json, Value as Json};

#[derive(Debug, Clone)]
struct Row {
    step: String,
    c: Trace,
    kappa: Vec<Frame>,
    alpha: Vec<Trace>,
    handlers: HandlerTable,
}

fn record(
    p: &InstrumentedProgram,
    b: &mut BuilderState,
    globals: &[(&str, Json)],
    upstream: &dyn UpstreamClient,
) -> Vec<Row> {
    let mut rows = Vec::new();
    let mut obs = |s: Step<'_>, b: &BuilderState| {
        rows.push(Row {
            step: match s {
                Step::Rt(rt) => rt.to_string(),
                Step::Builtin(f) => format!("{f:?}"),
                Step::LoadHandler(n) => format!("loadHandler({n})"),
                Step::SaveHandler(n) => format!("saveHandler({n})"),
            },
            c: b.current.clone(),
            kappa: b.context.clone(),
            alpha: b.args_top_first(),
            handlers: b.handlers.clone(),
        });
    };
    let mut s = Session::new(p, upstream).tracer(b).observer(&mut obs);
    for (k, v) in globals {
        s = s.global(k, v.clone());
    }
    let r = s.run();
    assert!(r.trace_error.is_none(), "{:?}", r.trace_error);
    rows
}

fn find<'r>(rows: &'r [Row], step: &str) -> &'r Row {
    rows.iter()
        .find(|r| r.step.starts_with(step))
        .unwrap_or_else(|| panic!("no step {step} in {:?}", rows.iter().map(|r| &r.step).collect::<Vec<_>>()))
}

fn opts(globals: &[&str]) -> InstrumentOptions {
    InstrumentOptions {
        globals: globals.iter().map(|s| s.to_string()).collect(),
    }
}

fn seq(done: Vec<Trace>, todo: Vec<Trace>) -> Frame {
    Frame::Seq {
        done,
        todo: VecDeque::from(todo),
    }
}

// if-example

pub const IF_SRC: &str = "if (x < 0) y = x * -1; else y = x;";

fn cond() -> Trace {
    Trace::binary(BinOp::Lt, Trace::var("x"), Trace::int(0))
}

fn then_branch() -> Trace {
    Trace::set(Trace::var("y"), Trace::binary(BinOp::Mul, Trace::var("x"), Trace::int(-1)))
}

fn else_branch() -> Trace {
    Trace::set(Trace::var("y"), Trace::var("x"))
}

pub fn if_example_first_run_negative() {
    let p = compile_source(IF_SRC, &opts(&["x", "y"])).unwrap();
    let mut b = BuilderState::new();
    let rows = record(&p, &mut b, &[("x", json!(-5))], &NoUpstream);
    let states: Vec<(Trace, Vec<Frame>)> = rows[..4].iter().map(|r| (r.c.clone(), r.kappa.clone())).collect();
    let frame = Frame::IfTrue {
        cond: cond(),
        els: Trace::Unknown,
    };
    assert_eq!(
        states,
        vec![
            (Trace::Unknown, vec![]),
            (Trace::Unknown, vec![frame.clone()]),
            (then_branch(), vec![frame]),
            (Trace::if_(cond(), then_branch(), Trace::Unknown), vec![]),
        ]
    );
}

pub fn if_example_second_run_completes_the_tree() {
    let p = compile_source(IF_SRC, &opts(&["x", "y"])).unwrap();
    let mut b = BuilderState::new();
    record(&p, &mut b, &[("x", json!(-5))], &NoUpstream);
    let rows = record(&p, &mut b, &[("x", json!(7))], &NoUpstream);
    let partial = Trace::if_(cond(), then_branch(), Trace::Unknown);
    let frame = Frame::IfFalse {
        cond: cond(),
        then: then_branch(),
    };
    let states: Vec<(Trace, Vec<Frame>)> = rows[..4].iter().map(|r| (r.c.clone(), r.kappa.clone())).collect();
    let full = Trace::if_(cond(), then_branch(), else_branch());
    assert_eq!(
        states,
        vec![
            (partial, vec![]),
            (Trace::Unknown, vec![frame.clone()]),
            (else_branch(), vec![frame]),
            (full.clone(), vec![]),
        ]
    );
    assert_eq!(b.handlers.get(0).unwrap().body, full);
    assert_eq!(full.unknown_count(), 0);
}

// fun-example

pub fn fun_example_eleven_rows() {
    let src = "let x = 10; let F = function(y) { return x + y; }; let foo = F(3);";
    let p = compile_source(src, &InstrumentOptions::default()).unwrap();
    let mut b = BuilderState::new();
    let rows = record(&p, &mut b, &[], &NoUpstream);

    let let_x = Trace::let_("x", Trace::int(10));
    let env = Trace::Env {
        entries: vec![EnvEntry {
            name: "x".into(),
            addr: Trace::VarAddr { name: "x".into() },
        }],
    };
    let let_f = Trace::let_("F", env);
    let let_env = Trace::let_("$env", Trace::var("F"));
    let let_y = Trace::let_("y", Trace::int(3));
    let brk = Trace::brk(
        "$return",
        Trace::binary(BinOp::Add, Trace::env_read(Trace::var("$env"), "x"), Trace::var("y")),
    );
    let ret_block = Trace::label("$return", Trace::block(vec![let_env.clone(), let_y.clone(), brk.clone()]));
    let outer = seq(vec![let_x.clone(), let_f.clone()], vec![]);
    let named = Frame::Named { name: "foo".into() };
    let label = Frame::Label {
        label: "$return".into(),
    };
    let fn_outer = vec![outer.clone(), named.clone(), label.clone()];
    let with = |f: Frame| {
        let mut k = fn_outer.clone();
        k.push(f);
        k
    };

    let expected: Vec<(&str, Trace, Vec<Trace>, Vec<Frame>)> = vec![
        ("loadMain", Trace::Unknown, vec![], vec![]),
        (
            "let(x",
            let_x.clone(),
            vec![],
            vec![seq(vec![], vec![Trace::Unknown, Trace::Unknown])],
        ),
        ("let(F", let_f.clone(), vec![], vec![seq(vec![let_x.clone()], vec![Trace::Unknown])]),
        (
            "pushArg(F)",
            Trace::Unknown,
            vec![Trace::var("F"), Trace::int(3)],
            vec![outer.clone()],
        ),
        ("label(", Trace::Unknown, vec![Trace::var("F"), Trace::int(3)], fn_outer.clone()),
        (
            "let($env",
            let_env.clone(),
            vec![Trace::int(3)],
            with(seq(vec![], vec![Trace::Unknown, Trace::Unknown])),
        ),
        ("let(y", let_y.clone(), vec![], with(seq(vec![let_env.clone()], vec![Trace::Unknown]))),
        ("break(", brk.clone(), vec![], with(seq(vec![let_env.clone(), let_y.clone()], vec![]))),
        ("popTo(", ret_block.clone(), vec![], vec![outer.clone(), named.clone()]),
    ];
    for (step, c, alpha, kappa) in expected {
        let r = find(&rows, step);
        assert_eq!((&r.c, &r.alpha, &r.kappa), (&c, &alpha, &kappa), "row {step}");
    }
    let after_pop_to = rows.iter().position(|r| r.step.starts_with("popTo(")).unwrap();
    let let_foo = Trace::let_("foo", ret_block);
    assert_eq!(rows[after_pop_to + 1].step, "pop()");
    assert_eq!(
        (&rows[after_pop_to + 1].c, &rows[after_pop_to + 1].kappa),
        (&let_foo, &vec![outer])
    );
    let last = Trace::block(vec![let_x, let_f, let_foo]);
    assert_eq!((&rows[after_pop_to + 2].c, rows[after_pop_to + 2].kappa.len()), (&last, 0));
    assert_eq!(b.handlers.get(0).unwrap().body, last);
}

// get-example

struct Example;

impl UpstreamClient for Example {
    fn get(&self, path: &str) -> Option<Json> {
        (path == "example.com").then(|| json!("hello"))
    }
    fn post(&self, _: &str, _: &Json) -> Option<Json> {
        None
    }
}

pub fn get_example_six_states() {
    let src = "let F = function(resp) { out = resp; }; let r = get('example.com', F);";
    let p = compile_source(src, &opts(&["out"])).unwrap();
    let mut b = BuilderState::new();
    let rows = record(&p, &mut b, &[], &Example);

    let let_f = Trace::let_("F", Trace::Env { entries: vec![] });
    let outer = seq(vec![let_f.clone()], vec![]);
    let named = Frame::Named { name: "r".into() };
    let event = Trace::Event {
        event: EventKind::Get,
        arg: Box::new(Trace::string("example.com")),
        env: Box::new(Trace::var("F")),
        handler: 1,
    };

    // 1: the callee, URL and callback are on the argument stack.
    let r1 = find(&rows, "named(r)");
    assert_eq!(r1.c, Trace::Unknown);
    assert_eq!(r1.alpha, vec![Trace::var("get"), Trace::string("example.com"), Trace::var("F")]);
    assert_eq!(r1.kappa, vec![outer.clone(), named.clone()]);
    assert_eq!(r1.handlers.len(), 1);
    assert_eq!(r1.handlers.get(0).unwrap().body, Trace::Unknown);

    // 2: the shim records the event and allocates handler 1.
    let r2 = find(&rows, "Get");
    assert_eq!((&r2.c, r2.alpha.len(), &r2.kappa), (&event, 0, &vec![outer, named]));
    let h1 = r2.handlers.get(1).unwrap();
    assert_eq!((h1.arg_id.as_str(), h1.env_id.as_str(), &h1.body), ("$arg1", "$env1", &Trace::Unknown));

    // 3: main is saved.
    let main = Trace::block(vec![let_f, Trace::let_("r", event)]);
    let r3 = find(&rows, "saveHandler(0)");
    assert_eq!((&r3.c, r3.kappa.len()), (&main, 0));
    assert_eq!(r3.handlers.get(0).unwrap().body, main);

    // 4: the callback's argument and env are loaded.
    let r4 = find(&rows, "loadHandler(1)");
    assert_eq!(
        (&r4.c, &r4.alpha, r4.kappa.len()),
        (&Trace::Unknown, &vec![Trace::var("$env1"), Trace::var("$arg1")], 0)
    );

    // 5: the callback has run.
    let body = Trace::label(
        "$return",
        Trace::block(vec![
            Trace::let_("$env", Trace::var("$env1")),
            Trace::let_("resp", Trace::var("$arg1")),
            Trace::set(Trace::var("out"), Trace::var("resp")),
        ]),
    );
    let save1 = rows.iter().position(|r| r.step == "saveHandler(1)").unwrap();
    let r5 = &rows[save1 - 1];
    assert_eq!((&r5.c, r5.alpha.len(), r5.kappa.len()), (&body, 0, 0));
    assert_eq!(r5.handlers.get(1).unwrap().body, Trace::Unknown);

    // 6: handler 1 is saved.
    let r6 = &rows[save1];
    assert_eq!(r6.handlers.get(1).unwrap().body, body);
    assert_eq!(b.handlers.get(1).unwrap().body, body);
}
