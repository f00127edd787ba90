use accel::bench::fuzz::equivalence_fuzz;
use accel::bench::{self, Generator};
use accel::instrument::{compile_source, InstrumentOptions};
use accel::invoker::InvokerConfig;

#[test]
fn every_benchmark_compiles_with_tracing() {
    for def in bench::all() {
        compile_source(&def.source, &InstrumentOptions::default()).unwrap_or_else(|e| panic!("{}: {e}", def.name));
    }
}

#[test]
fn every_benchmark_is_equivalent_under_a_short_warmup() {
    let config = InvokerConfig {
        trace_after: 20,
        ..InvokerConfig::default()
    };
    for def in bench::all() {
        let v = equivalence_fuzz(&def, 120, 11, config.clone()).unwrap();
        println!("{}", serde_json::to_string(&v).unwrap());
        assert!(v.passed(), "{}: {v:?}", def.name);
        assert!(v.served_by_executor > 0, "{}: never left the interpreter: {v:?}", def.name);
    }
}

#[test]
fn generators_replay_identically() {
    for def in bench::all() {
        let a: Vec<_> = {
            let mut g = Generator::new(&def, 3);
            (0..50).map(|_| g.request()).collect()
        };
        let mut g = Generator::new(&def, 3);
        let b: Vec<_> = (0..50).map(|_| g.request()).collect();
        assert_eq!(a, b);
    }
}
