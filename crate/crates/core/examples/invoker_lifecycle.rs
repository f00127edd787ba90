//! Walk one function through the invoker's modes: tracing, containerless,
//! a bounce back to tracing on an untraced path, and finally container-only
//! once the bounce budget is spent.

use std::sync::Arc;

use accel::bench::mock::MockUpstream;
use accel::bench::{self, Generator};
use accel::invoker::{Invoker, InvokerConfig, Mode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = InvokerConfig {
        trace_after: 10,
        max_bounces: 2,
        ..InvokerConfig::default()
    };
    let inv = Invoker::new(config, Arc::new(MockUpstream::default()));
    let def = bench::by_name("upload").expect("benchmark");
    inv.register(def.name, &def.source)?;
    let mut gen = Generator::new(&def, 1);

    while inv.status(def.name)?.mode != Mode::ContainerOnly {
        while inv.status(def.name)?.mode == Mode::Tracing {
            inv.dispatch(def.name, &gen.warmup())?;
        }
        let st = inv.status(def.name)?;
        println!("{:?} after {} traced requests", st.mode, st.traced_event_count);
        let r = inv.dispatch(def.name, &gen.adversarial())?;
        println!(
            "  untraced input: served by {}, abort {:?}, status {}",
            r.served_by.as_str(),
            r.abort,
            r.response.status
        );
    }
    let r = inv.dispatch(def.name, &gen.request())?;
    println!("container-only: served by {}", r.served_by.as_str());
    println!("{}", serde_json::to_string_pretty(&inv.status(def.name)?)?);
    Ok(())
}
