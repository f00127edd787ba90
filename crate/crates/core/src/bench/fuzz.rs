//! Equivalence fuzzing: the full invoker against a container-only one.

use std::sync::Arc;

use serde::Serialize;
use serde_json::Value as Json;

use super::mock::MockUpstream;
use super::{BenchmarkDef, Generator, Oracle};
use crate::invoker::{InvokeError, Invoker, InvokerConfig, Mode, ServedBy};

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Divergence {
    pub index: usize,
    pub seed: u64,
    pub request: Json,
    pub accelerated: String,
    pub reference: String,
    pub served_by: ServedBy,
}

#[derive(Debug, Clone, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FuzzVerdict {
    pub benchmark: String,
    pub requests: usize,
    pub divergences: usize,
    pub first_divergence: Option<Divergence>,
    pub oracle_failures: Vec<String>,
    pub served_by_tracer: usize,
    pub served_by_interpreter: usize,
    pub served_by_executor: usize,
    pub served_by_fallback: usize,
    /// Largest arena live-cell count seen after an executor request.
    pub max_live_cells: usize,
    pub final_mode: Mode,
}

impl FuzzVerdict {
    pub fn passed(&self) -> bool {
        self.divergences == 0 && self.oracle_failures.is_empty() && self.max_live_cells == 0
    }
}

/// Sends `n` seeded requests to a normal invoker and a container-only one,
/// each with its own mock upstream, and byte-compares the response bodies.
pub fn equivalence_fuzz(
    def: &BenchmarkDef,
    n: usize,
    seed: u64,
    config: InvokerConfig,
) -> Result<FuzzVerdict, InvokeError> {
    let accel = Invoker::new(config.clone(), Arc::new(MockUpstream::default()));
    let reference = Invoker::container_only(config, Arc::new(MockUpstream::default()));
    accel.register(def.name, &def.source)?;
    reference.register(def.name, &def.source)?;
    let mut gen = Generator::new(def, seed);
    let mut oracle = Oracle::new();
    let mut v = FuzzVerdict {
        benchmark: def.name.to_string(),
        ..FuzzVerdict::default()
    };
    for index in 0..n {
        let req = gen.request();
        let a = accel.dispatch(def.name, &req)?;
        let b = reference.dispatch(def.name, &req)?;
        match a.served_by {
            ServedBy::Tracer => v.served_by_tracer += 1,
            ServedBy::Interpreter | ServedBy::Unsupported => v.served_by_interpreter += 1,
            ServedBy::Executor => v.served_by_executor += 1,
            ServedBy::Fallback => v.served_by_fallback += 1,
        }
        if let Some(stats) = a.arena {
            v.max_live_cells = v.max_live_cells.max(stats.live_cells);
        }
        let (ab, bb) = (a.response.body_text(), b.response.body_text());
        if ab != bb || a.response.status != b.response.status {
            v.divergences += 1;
            if v.first_divergence.is_none() {
                v.first_divergence = Some(Divergence {
                    index,
                    seed,
                    request: req.body.clone(),
                    accelerated: ab,
                    reference: bb,
                    served_by: a.served_by,
                });
            }
        }
        if let Err(e) = oracle.check(def.kind, &req.body, &b.response.body) {
            v.oracle_failures.push(e);
        }
        v.requests += 1;
    }
    v.final_mode = accel.status(def.name)?.mode;
    Ok(v)
}
