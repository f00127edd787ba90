//! Register a function over HTTP, invoke it until it switches to the
//! executor, and read its status and trace.

use std::time::Duration;

use accel::bench::{self, stack::LocalStack};
use accel::invoker::InvokerConfig;
use serde_json::{json, Value as Json};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = InvokerConfig {
        trace_after: 4,
        ..InvokerConfig::default()
    };
    let stack = LocalStack::start(config, Duration::ZERO)?;
    let base = format!("{}/function/status", stack.invoker_url);
    let http: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();

    let source = bench::by_name("status").expect("benchmark").source;
    let mut r = http.put(&base).send(source.as_bytes())?;
    println!("PUT {} -> {}", r.status(), r.body_mut().read_to_string()?);

    for (build, ok) in [(1, true), (2, false), (3, true), (4, false), (5, true)] {
        let body = json!({ "repo": "org/app", "sha": "c0ffee00", "build": build, "ok": ok });
        let mut r = http.post(&base).send_json(body)?;
        let by = r.headers()["x-served-by"].to_str()?.to_string();
        println!("POST build {build} -> {} [{by}] {}", r.status(), r.body_mut().read_to_string()?);
    }

    let status: Json = http.get(format!("{base}/status")).call()?.body_mut().read_json()?;
    println!("status: {status}");
    let trace: Json = http.get(format!("{base}/trace")).call()?.body_mut().read_json()?;
    println!("trace: {}", serde_json::to_string_pretty(&trace)?);
    Ok(())
}
