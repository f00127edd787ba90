//! Operators over dynamically typed values, evaluated by the interpreter.

use accel::instrument::{compile_source, InstrumentOptions};
use accel::interp::Session;
use accel::upstream::NoUpstream;
use serde_json::Value as Json;

fn main() {
    let opts = InstrumentOptions {
        globals: vec!["y".into()],
    };
    for expr in [
        "1 + true",
        "'n = ' + 4.5",
        "7 / 2",
        "9007199254740992 + 1",
        "undefined + 1",
        "'a' < 'b'",
        "0 || 'fallback'",
        "2 === 2.0",
        "'5' * 2",
        "({}) + 1",
    ] {
        let p = compile_source(&format!("y = {expr};"), &opts).expect("compiles");
        let r = Session::new(&p, &NoUpstream).global("y", Json::Null).run();
        match r.response {
            Err(accel::interp::GuestError::Type(e)) => println!("{expr:24} type error: {e}"),
            _ => println!("{expr:24} {}", r.globals["y"]),
        }
    }
}
