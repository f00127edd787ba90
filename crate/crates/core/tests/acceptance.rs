//! One test per acceptance criterion. Each prints a single `PASS` or `FAIL`
//! line; run with `--nocapture` to see them.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use accel::ast::{BinOp, Lit};
use accel::bench::fuzz::equivalence_fuzz;
use accel::bench::load::{run_load, LoadConfig};
use accel::bench::mock::MockUpstream;
use accel::bench::stack::LocalStack;
use accel::bench::{self, Generator, Kind};
use accel::exec::{AbortReason, CompiledProgram, ExecLimits, ExecOutcome, Execution, RequestArena};
use accel::instrument::{compile_source, InstrumentOptions};
use accel::interp::{GuestError, Session, Step};
use accel::invoker::{Invocation, Invoker, InvokerConfig, Mode, ServedBy};
use accel::trace::{HandlerTable, Trace};
use accel::upstream::{NoUpstream, Request};
use accel::zipper::BuilderState;
use common::golden;
use serde_json::{json, Value as Json};

// Criteria run one at a time so the timed ones do not compete for CPU.
static SERIAL: Mutex<()> = Mutex::new(());

fn criterion(id: u32, name: &str, check: impl FnOnce() -> Result<String, String>) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let outcome = match catch_unwind(AssertUnwindSafe(check)) {
        Ok(r) => r,
        Err(p) => Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into())),
    };
    match outcome {
        Ok(detail) => println!("acceptance {id:>2} {name}: PASS ({detail})"),
        Err(why) => {
            println!("acceptance {id:>2} {name}: FAIL ({why})");
            panic!("criterion {id} failed: {why}");
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

#[test]
fn c01_if_example_golden_rows() {
    criterion(1, "if-example golden rows", || {
        let started = Instant::now();
        golden::if_example_first_run_negative();
        golden::if_example_second_run_completes_the_tree();
        let elapsed = started.elapsed();
        ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
        Ok(format!("both runs match row by row in {elapsed:?}"))
    });
}

#[test]
fn c02_fun_example_golden_rows() {
    criterion(2, "fun-example golden rows", || {
        golden::fun_example_eleven_rows();
        Ok("11 rows match".into())
    });
}

#[test]
fn c03_get_example_golden_states() {
    criterion(3, "get-example golden states", || {
        golden::get_example_six_states();
        Ok("6 states match".into())
    });
}

#[test]
fn c04_zipper_plug_agrees_with_pop() {
    criterion(4, "zipper plug and pop agree", || {
        let s = common::seeded_walks(2024, 10_000)?;
        let observed = observed_steps()?;
        Ok(format!(
            "{} random steps ({} applied, {} rejected), {observed} steps of traced executions",
            s.steps, s.applied, s.rejected
        ))
    });
}

/// Checks the zipper invariants after every runtime operation of the golden
/// programs and of traced benchmark requests.
fn observed_steps() -> Result<usize, String> {
    let mut steps = 0;
    let mut failure = None;
    let mut check = |_: Step<'_>, b: &BuilderState| {
        steps += 1;
        let tree = b.plugged();
        if failure.is_none() {
            if let Err(e) = tree.check_well_formed() {
                failure = Some(format!("ill-formed `{tree}`: {e}"));
            } else if common::pop_all(b) != tree {
                failure = Some(format!("plug and pop disagree on `{tree}`"));
            }
        }
    };
    for (src, globals) in [
        (golden::IF_SRC, vec!["x", "y"]),
        ("let x = 10; let F = function(y) { return x + y; }; let foo = F(3);", vec![]),
    ] {
        let opts = InstrumentOptions {
            globals: globals.iter().map(|g| g.to_string()).collect(),
        };
        let p = compile_source(src, &opts).map_err(|e| e.to_string())?;
        let mut b = BuilderState::new();
        for x in [-5, 7] {
            Session::new(&p, &NoUpstream)
                .tracer(&mut b)
                .observer(&mut check)
                .global("x", json!(x))
                .run();
        }
    }
    for def in bench::all() {
        let p = compile_source(&def.source, &InstrumentOptions::default()).map_err(|e| e.to_string())?;
        let up = MockUpstream::default();
        let mut b = BuilderState::new();
        let mut gen = Generator::new(&def, 4);
        let n = if def.kind == Kind::Maze { 1 } else { 15 };
        for _ in 0..n {
            let req = gen.request();
            Session::new(&p, &up).tracer(&mut b).observer(&mut check).request(&req).run();
        }
    }
    match failure {
        Some(f) => Err(f),
        None => Ok(steps),
    }
}

#[test]
fn c05_equivalence_fuzz() {
    criterion(5, "equivalence with container-only", || {
        let started = Instant::now();
        let mut total = 0;
        for def in bench::all() {
            let v = equivalence_fuzz(&def, 500, 500, InvokerConfig::default()).map_err(|e| e.to_string())?;
            ensure(v.passed(), || format!("{}: {}", def.name, serde_json::to_string(&v).unwrap()))?;
            ensure(v.served_by_executor > 0, || format!("{}: executor never used", def.name))?;
            total += v.requests;
        }
        let elapsed = started.elapsed();
        ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
        Ok(format!("{total} requests byte-identical in {:.1}s", elapsed.as_secs_f64()))
    });
}

fn pair(a: &Invoker, b: &Invoker, name: &str, req: &Request) -> Result<Invocation, String> {
    let x = a.dispatch(name, req).map_err(|e| e.to_string())?;
    let y = b.dispatch(name, req).map_err(|e| e.to_string())?;
    ensure(x.response == y.response, || {
        format!("{name}: {} != {} for {}", x.response.body_text(), y.response.body_text(), req.body)
    })?;
    Ok(x)
}

#[test]
fn c06_fallback_and_bounce_limit() {
    criterion(6, "fallback on unknown and bounce limit", || {
        let config = InvokerConfig {
            trace_after: 25,
            ..InvokerConfig::default()
        };
        let max = config.max_bounces;
        for def in bench::all() {
            let accel = Invoker::new(config.clone(), Arc::new(MockUpstream::default()));
            let reference = Invoker::container_only(config.clone(), Arc::new(MockUpstream::default()));
            accel.register(def.name, &def.source).map_err(|e| e.to_string())?;
            reference.register(def.name, &def.source).map_err(|e| e.to_string())?;
            let mut gen = Generator::new(&def, 6);
            let mode = || accel.status(def.name).unwrap().mode;
            for round in 0..=max {
                let mut warm = 0;
                while mode() == Mode::Tracing {
                    pair(&accel, &reference, def.name, &gen.warmup())?;
                    warm += 1;
                    ensure(warm < 1000, || format!("{}: never left tracing", def.name))?;
                }
                let before = accel.status(def.name).unwrap().bounce_count;
                let r = pair(&accel, &reference, def.name, &gen.adversarial())?;
                ensure(r.abort == Some(AbortReason::Unknown), || {
                    format!("{} round {round}: abort {:?}", def.name, r.abort)
                })?;
                ensure(r.served_by == ServedBy::Fallback, || format!("{}: {:?}", def.name, r.served_by))?;
                let st = accel.status(def.name).unwrap();
                ensure(st.bounce_count == before + 1, || format!("{}: bounces {}", def.name, st.bounce_count))?;
                let want = if round < max { Mode::Tracing } else { Mode::ContainerOnly };
                ensure(st.mode == want, || format!("{} round {round}: mode {:?}", def.name, st.mode))?;
            }
            for i in 0..60 {
                let req = if i % 2 == 0 { gen.warmup() } else { gen.request() };
                let r = pair(&accel, &reference, def.name, &req)?;
                ensure(r.served_by == ServedBy::Interpreter, || format!("{}: {:?}", def.name, r.served_by))?;
            }
            ensure(mode() == Mode::ContainerOnly, || format!("{}: left container mode", def.name))?;
        }
        Ok(format!("6 benchmarks, {} bounces each, then container-only", max + 1))
    });
}

#[test]
fn c07_retrace_is_idempotent() {
    criterion(7, "re-tracing a request is idempotent", || {
        for def in bench::all() {
            let inv = Invoker::new(
                InvokerConfig {
                    trace_after: usize::MAX,
                    ..InvokerConfig::default()
                },
                Arc::new(MockUpstream::default()),
            );
            inv.register(def.name, &def.source).map_err(|e| e.to_string())?;
            let f = inv.function(def.name).unwrap();
            let mut gen = Generator::new(&def, 7);
            for _ in 0..20 {
                inv.dispatch(def.name, &gen.request()).unwrap();
            }
            let req = gen.warmup();
            if def.kind == Kind::Banking {
                // The first commit and its replays take different paths.
                inv.dispatch(def.name, &req).unwrap();
            }
            let first = inv.dispatch(def.name, &req).unwrap();
            let after_once = f.builder();
            let second = inv.dispatch(def.name, &req).unwrap();
            let after_twice = f.builder();
            ensure(first.served_by == ServedBy::Tracer && second.served_by == ServedBy::Tracer, || {
                format!("{}: not traced", def.name)
            })?;
            ensure(first.response == second.response, || format!("{}: responses differ", def.name))?;
            ensure(after_once == after_twice, || format!("{}: (c, T) changed", def.name))?;
            ensure(after_once.handlers.len() > 1, || format!("{}: empty table", def.name))?;
        }
        Ok("(c, T) unchanged for 6 benchmarks".into())
    });
}

fn looping_invoker(limits: ExecLimits) -> Invoker {
    Invoker::new(
        InvokerConfig {
            trace_after: 1,
            limits,
            interp_timeout: Duration::from_millis(300),
            ..InvokerConfig::default()
        },
        Arc::new(MockUpstream::default()),
    )
}

#[test]
fn c08_resource_bounds() {
    criterion(8, "resource bounds", || {
        let mut table = HandlerTable::new();
        table.get_mut(0).unwrap().body = Trace::While {
            cond: Box::new(Trace::Const { value: Lit::Bool(true) }),
            body: Box::new(Trace::block(vec![])),
        };
        let cp = CompiledProgram::new(table);
        let mut arena = RequestArena::new(ExecLimits::default());
        let r = Execution::new(&cp, &mut arena, &NoUpstream).run();
        ensure(r.outcome == ExecOutcome::Aborted(AbortReason::InstructionLimit), || {
            format!("while (true): {:?}", r.outcome)
        })?;
        ensure(r.stats.live_cells == 0, || "while (true) leaked".into())?;

        let spin = looping_invoker(ExecLimits {
            max_instructions: 1_000_000,
            ..ExecLimits::default()
        });
        spin.register(
            "spin",
            "let c = require('containerless');
             c.listen(function(r) { let i = 0; while (i !== r.body) { i = i + 1; } c.respond(i); });",
        )
        .unwrap();
        spin.dispatch("spin", &Request::post("/", json!(2))).unwrap();
        let r = spin.dispatch("spin", &Request::post("/", json!(-1))).unwrap();
        ensure(r.abort == Some(AbortReason::InstructionLimit), || format!("spin: {:?}", r.abort))?;
        ensure(r.arena.is_some_and(|a| a.live_cells == 0), || "spin leaked".into())?;

        let bomb = looping_invoker(ExecLimits {
            max_bytes: 1 << 20,
            ..ExecLimits::default()
        });
        bomb.register(
            "bomb",
            "let c = require('containerless');
             c.listen(function(r) {
               let a = []; let i = 0;
               while (i < r.body) { a[i] = [i, i, i, i, i, i, i, i]; i = i + 1; }
               c.respond(i);
             });",
        )
        .unwrap();
        bomb.dispatch("bomb", &Request::post("/", json!(3))).unwrap();
        let r = bomb.dispatch("bomb", &Request::post("/", json!(100_000_000))).unwrap();
        ensure(r.abort == Some(AbortReason::MemoryLimit), || format!("bomb: {:?}", r.abort))?;
        ensure(r.arena.is_some_and(|a| a.live_cells == 0), || "bomb leaked".into())?;
        ensure(bomb.status("bomb").unwrap().mode == Mode::Containerless, || "limits bounced".into())?;

        let config = InvokerConfig {
            trace_after: 20,
            ..InvokerConfig::default()
        };
        let mut executed = 0;
        for def in bench::all() {
            let v = equivalence_fuzz(&def, 200, 8, config.clone()).map_err(|e| e.to_string())?;
            ensure(v.max_live_cells == 0, || format!("{}: {} live cells", def.name, v.max_live_cells))?;
            executed += v.served_by_executor + v.served_by_fallback;
        }
        Ok(format!("limits hit, 0 live cells after {executed} executor requests"))
    });
}

fn operand_source(l: &Lit, object: bool) -> String {
    if object {
        "({})".into()
    } else {
        format!("({l})")
    }
}

fn operand_trace(l: &Lit, object: bool) -> Trace {
    if object {
        Trace::Object { fields: vec![] }
    } else {
        Trace::Const { value: l.clone() }
    }
}

/// Evaluates `a op b` in the interpreter and in the executor.
fn both_sides(op: BinOp, a: &(Lit, bool), b: &(Lit, bool)) -> (Result<Json, String>, Result<Json, String>) {
    let src = format!(
        "y = {} {} {};",
        operand_source(&a.0, a.1),
        op.symbol(),
        operand_source(&b.0, b.1)
    );
    let p = compile_source(
        &src,
        &InstrumentOptions {
            globals: vec!["y".into()],
        },
    )
    .unwrap_or_else(|e| panic!("{src}: {e}"));
    let r = Session::new(&p, &NoUpstream).global("y", Json::Null).run();
    let interp = match r.response {
        Err(GuestError::Type(e)) => Err(e.to_string()),
        _ => Ok(r.globals["y"].clone()),
    };
    let mut table = HandlerTable::new();
    table.get_mut(0).unwrap().body = Trace::set(
        Trace::var("y"),
        Trace::binary(op, operand_trace(&a.0, a.1), operand_trace(&b.0, b.1)),
    );
    let cp = CompiledProgram::new(table);
    let mut arena = RequestArena::new(ExecLimits::default());
    let e = Execution::new(&cp, &mut arena, &NoUpstream).global("y", Json::Null).run();
    let exec = match e.outcome {
        ExecOutcome::Aborted(AbortReason::DynTypeError(m)) => Err(m),
        ExecOutcome::Pending => Ok(e.globals["y"].clone()),
        other => Err(format!("unexpected {other:?}")),
    };
    (interp, exec)
}

#[test]
fn c09_coercions() {
    criterion(9, "1 + true and the coercion table", || {
        let one_true = both_sides(BinOp::Add, &(Lit::Int(1), false), &(Lit::Bool(true), false));
        ensure(one_true == (Ok(json!(2)), Ok(json!(2))), || format!("1 + true: {one_true:?}"))?;
        let operands = [
            (Lit::Undefined, false),
            (Lit::Bool(true), false),
            (Lit::Bool(false), false),
            (Lit::Int(3), false),
            (Lit::Int(0), false),
            (Lit::Float(0.5), false),
            (Lit::str("s"), false),
            (Lit::str(""), false),
            (Lit::Undefined, true),
        ];
        let mut cases = 0;
        let mut errors = 0;
        for op in BinOp::ALL {
            for a in &operands {
                for b in &operands {
                    let (i, e) = both_sides(op, a, b);
                    ensure(i.is_ok() == e.is_ok() && (i.is_err() || i == e), || {
                        format!("{:?} {} {:?}: interpreter {i:?}, executor {e:?}", a, op.symbol(), b)
                    })?;
                    cases += 1;
                    errors += usize::from(i.is_err());
                }
            }
        }
        Ok(format!("{cases} operator cases agree, {errors} raise type errors in both"))
    });
}

#[test]
fn c10_latency_dips_after_the_switch() {
    criterion(10, "latency drops after switching to the executor", || {
        let def = bench::by_name("authorize").unwrap();
        let stack = LocalStack::start(InvokerConfig::default(), Duration::from_millis(1)).map_err(|e| e.to_string())?;
        stack.invoker.register(def.name, &def.source).map_err(|e| e.to_string())?;
        let report = run_load(
            &def,
            &LoadConfig {
                base_url: stack.invoker_url.clone(),
                streams: 10,
                duration: Duration::from_secs(60),
                seed: 10,
            },
        );
        let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"));
        let json_path = dir.join("acceptance-latency.json");
        std::fs::write(&json_path, serde_json::to_string_pretty(&report).unwrap()).map_err(|e| e.to_string())?;
        std::fs::write(dir.join("acceptance-latency.csv"), report.to_csv()).map_err(|e| e.to_string())?;
        print!("{}", report.render());
        ensure(report.errors == 0, || format!("{} errors", report.errors))?;
        ensure(report.dips_again(), || {
            format!(
                "median before {:?} ms, after {:?} ms",
                report.pre_switch_median_ms, report.post_switch_median_ms
            )
        })?;
        Ok(format!(
            "median {:.2} ms before, {:.2} ms after, report at {}",
            report.pre_switch_median_ms.unwrap(),
            report.post_switch_median_ms.unwrap(),
            json_path.display()
        ))
    });
}
