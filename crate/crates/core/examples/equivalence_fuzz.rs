//! Send the same seeded requests to an accelerated invoker and a
//! container-only one and compare every response byte for byte.

use accel::bench::{self, fuzz::equivalence_fuzz};
use accel::invoker::InvokerConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = InvokerConfig {
        trace_after: 30,
        ..InvokerConfig::default()
    };
    for def in bench::all() {
        let v = equivalence_fuzz(&def, 150, 42, config.clone())?;
        println!(
            "{:13} {:>4} requests  {:>3} traced  {:>4} executed  {:>2} fallbacks  {} divergences  {}",
            v.benchmark,
            v.requests,
            v.served_by_tracer,
            v.served_by_executor,
            v.served_by_fallback,
            v.divergences,
            if v.passed() { "ok" } else { "FAILED" }
        );
    }
    Ok(())
}
