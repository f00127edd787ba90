//! Build a trace tree for a conditional over two runs, printing the zipper
//! state after every runtime operation.

use accel::instrument::{compile_source, dump, InstrumentOptions};
use accel::interp::{Session, Step};
use accel::upstream::NoUpstream;
use accel::zipper::BuilderState;
use serde_json::json;

fn main() -> Result<(), accel::Error> {
    let opts = InstrumentOptions {
        globals: vec!["x".into(), "y".into()],
    };
    let p = compile_source("if (x < 0) y = x * -1; else y = x;", &opts)?;
    println!("instrumented:\n{}", dump(&p));

    let mut b = BuilderState::new();
    for x in [-5, 7] {
        println!("\nrun with x = {x}");
        let mut show = |s: Step<'_>, b: &BuilderState| {
            let step = match s {
                Step::Rt(rt) => rt.to_string(),
                other => format!("{other:?}"),
            };
            println!("  {step:28} c = {:40} depth(κ) = {}", b.current.to_string(), b.context.len());
        };
        let r = Session::new(&p, &NoUpstream)
            .tracer(&mut b)
            .observer(&mut show)
            .global("x", json!(x))
            .run();
        println!("  y = {}", r.globals["y"]);
    }
    let main = &b.handlers.get(0).expect("main handler").body;
    println!("\nfinal tree: {main}");
    println!("unknown leaves left: {}", main.unknown_count());
    Ok(())
}
