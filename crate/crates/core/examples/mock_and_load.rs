//! Start the mock upstream and the invoker on loopback ports, drive a
//! benchmark with closed-loop streams and print the latency report.
//!
//! `cargo run --example mock_and_load -- maze 8`

use std::time::Duration;

use accel::bench::{self, load, stack::LocalStack};
use accel::invoker::InvokerConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "authorize".into());
    let secs: u64 = args.next().map_or(Ok(5), |s| s.parse())?;
    let def = bench::by_name(&name).ok_or("unknown benchmark")?;

    let stack = LocalStack::start(InvokerConfig::default(), Duration::from_millis(1))?;
    stack.invoker.register(def.name, &def.source)?;
    println!("invoker at {}, mock at {}", stack.invoker_url, stack.mock_url);

    let report = load::run_load(
        &def,
        &load::LoadConfig {
            base_url: stack.invoker_url.clone(),
            streams: 4,
            duration: Duration::from_secs(secs),
            seed: 1,
        },
    );
    print!("{}", report.render());
    println!("latency drops after the switch: {}", report.dips_again());
    Ok(())
}
