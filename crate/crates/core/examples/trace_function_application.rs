//! Trace a closure application. The call is inlined under a `$return` label
//! and captured variables are read through the closure's environment.

use accel::instrument::{compile_source, InstrumentOptions};
use accel::interp::Session;
use accel::upstream::NoUpstream;
use accel::zipper::BuilderState;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let src = "let x = 10; let F = function(y) { return x + y; }; let foo = F(3);";
    let p = compile_source(src, &InstrumentOptions::default())?;
    let mut b = BuilderState::new();
    let r = Session::new(&p, &NoUpstream).tracer(&mut b).run();
    if let Some(e) = r.trace_error {
        return Err(e.into());
    }
    println!("{}", b.handlers.get(0).expect("main").body);
    println!("{}", serde_json::to_string_pretty(&b.handlers.to_json())?);
    Ok(())
}
