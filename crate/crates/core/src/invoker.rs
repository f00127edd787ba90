//! The invoker: per-function mode machine over the interpreter and executor.
//!
//! A function starts in [`Mode::Tracing`]: requests run in interpreter
//! instances and one of them grows the trace. After `trace_after` clean traced
//! requests the handler table is snapshotted and the function switches to
//! [`Mode::Containerless`]. An executor abort sends the request back to an
//! interpreter; after more than `max_bounces` aborts the function stays in
//! [`Mode::ContainerOnly`].

pub mod http;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use parking_lot::{Condvar, Mutex, RwLock};
use serde::Serialize;
use thiserror::Error;

use crate::desugar::desugar;
use crate::exec::{
    execute_request, AbortReason, ArenaStats, CompiledProgram, ExecLimits, ExecOutcome, RequestArena, StatsRecord,
};
use crate::instrument::{instrument, lower_plain, InstrumentOptions, InstrumentedProgram};
use crate::interp::{run_plain, run_request, InterpLimits, RunResult, Session};
use crate::parse::{parse, ParseError};
use crate::trace::HandlerTable;
use crate::upstream::{Request, Response, UpstreamClient};
use crate::zipper::BuilderState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Mode {
    #[default]
    Tracing,
    Containerless,
    ContainerOnly,
}

#[derive(Debug, Clone)]
pub struct InvokerConfig {
    /// Clean traced requests before switching to the executor.
    pub trace_after: usize,
    pub max_bounces: u32,
    pub limits: ExecLimits,
    /// Concurrent interpreter instances per function, tracer included.
    pub pool_size: usize,
    pub interp_timeout: Duration,
}

impl Default for InvokerConfig {
    fn default() -> Self {
        InvokerConfig {
            trace_after: 100,
            max_bounces: 3,
            limits: ExecLimits::default(),
            pool_size: 6,
            interp_timeout: Duration::from_secs(5),
        }
    }
}

#[derive(Debug, Error)]
pub enum InvokeError {
    #[error("no function named `{0}`")]
    NotFound(String),
    #[error(transparent)]
    Parse(ParseError),
}

/// Who produced a response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ServedBy {
    /// The tracing interpreter instance.
    Tracer,
    Interpreter,
    Executor,
    /// An interpreter, after the executor aborted.
    Fallback,
    /// Nothing ran; the function cannot be executed.
    Unsupported,
}

impl ServedBy {
    pub fn as_str(self) -> &'static str {
        match self {
            ServedBy::Tracer => "tracer",
            ServedBy::Interpreter => "interpreter",
            ServedBy::Executor => "executor",
            ServedBy::Fallback => "fallback",
            ServedBy::Unsupported => "unsupported",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub response: Response,
    pub served_by: ServedBy,
    /// Set when the executor aborted before the fallback ran.
    pub abort: Option<AbortReason>,
    /// Arena usage, when the executor ran.
    pub arena: Option<ArenaStats>,
    pub latency: Duration,
}

struct Pool {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Pool);

impl Pool {
    fn new(n: usize) -> Self {
        Pool {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock();
        while *free == 0 {
            self.cv.wait(&mut free);
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock() += 1;
        self.0.cv.notify_one();
    }
}

struct ModeState {
    mode: Mode,
    compiled: Option<CompiledProgram>,
    traced_events: usize,
    bounces: u32,
}

#[derive(Default)]
struct Counters {
    requests: u64,
    by_tracer: u64,
    by_interpreter: u64,
    by_executor: u64,
    by_fallback: u64,
    latencies_us: Vec<u64>,
}

const LATENCY_WINDOW: usize = 10_000;

/// Log target for executor stats records, one JSON object per line.
pub const STATS_TARGET: &str = "accel::stats";

static NEXT_EXEC_ID: AtomicU64 = AtomicU64::new(0);

/// A registered function.
pub struct FunctionRecord {
    pub name: String,
    pub source: String,
    plain: Option<Arc<InstrumentedProgram>>,
    traced: Option<Arc<InstrumentedProgram>>,
    state: RwLock<ModeState>,
    tracer: Mutex<BuilderState>,
    pool: Pool,
    counters: Mutex<Counters>,
    /// Why the function can never leave container mode, if it cannot.
    pub container_reason: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LatencySummary {
    pub p50_us: u64,
    pub p95_us: u64,
    pub p99_us: u64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FunctionStatus {
    pub name: String,
    pub mode: Mode,
    pub traced_event_count: usize,
    pub bounce_count: u32,
    pub requests: u64,
    pub served_by_tracer: u64,
    pub served_by_interpreter: u64,
    pub served_by_executor: u64,
    pub served_by_fallback: u64,
    pub latency: Option<LatencySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub container_reason: Option<String>,
}

fn percentile(sorted: &[u64], p: f64) -> u64 {
    let i = ((sorted.len() as f64 - 1.0) * p).round() as usize;
    sorted[i.min(sorted.len() - 1)]
}

fn interp_response(r: &RunResult) -> Response {
    match &r.response {
        Ok(body) => Response::ok(body.clone()),
        Err(e) => Response::error(e.status(), e.to_string()),
    }
}

impl FunctionRecord {
    fn compile(name: &str, source: &str, config: &InvokerConfig) -> Result<Self, ParseError> {
        let opts = InstrumentOptions::default();
        let (plain, traced, reason) = match parse(source) {
            Err(e) if e.is_unsupported() => (None, None, Some(e.to_string())),
            Err(e) => return Err(e),
            Ok(p) => {
                let p = desugar(&p);
                match (lower_plain(&p, &opts), instrument(&p, &opts)) {
                    (Ok(plain), Ok(traced)) => (Some(Arc::new(plain)), Some(Arc::new(traced)), None),
                    (Ok(plain), Err(e)) => (Some(Arc::new(plain)), None, Some(e.to_string())),
                    (Err(e), _) => (None, None, Some(e.to_string())),
                }
            }
        };
        let mode = if traced.is_some() { Mode::Tracing } else { Mode::ContainerOnly };
        Ok(FunctionRecord {
            name: name.to_string(),
            source: source.to_string(),
            plain,
            traced,
            state: RwLock::new(ModeState {
                mode,
                compiled: None,
                traced_events: 0,
                bounces: 0,
            }),
            tracer: Mutex::new(BuilderState::new()),
            pool: Pool::new(config.pool_size),
            counters: Mutex::new(Counters::default()),
            container_reason: reason,
        })
    }

    pub fn mode(&self) -> Mode {
        self.state.read().mode
    }

    pub fn status(&self) -> FunctionStatus {
        let s = self.state.read();
        let c = self.counters.lock();
        let latency = (!c.latencies_us.is_empty()).then(|| {
            let mut v = c.latencies_us.clone();
            v.sort_unstable();
            LatencySummary {
                p50_us: percentile(&v, 0.5),
                p95_us: percentile(&v, 0.95),
                p99_us: percentile(&v, 0.99),
            }
        });
        FunctionStatus {
            name: self.name.clone(),
            mode: s.mode,
            traced_event_count: s.traced_events,
            bounce_count: s.bounces,
            requests: c.requests,
            served_by_tracer: c.by_tracer,
            served_by_interpreter: c.by_interpreter,
            served_by_executor: c.by_executor,
            served_by_fallback: c.by_fallback,
            latency,
            container_reason: self.container_reason.clone(),
        }
    }

    /// The current handler table, if the function is traced.
    pub fn trace(&self) -> Option<HandlerTable> {
        let s = self.state.read();
        match s.mode {
            Mode::ContainerOnly => None,
            Mode::Containerless => s.compiled.as_ref().map(|c| c.handlers().clone()),
            Mode::Tracing => Some(self.tracer.lock().handlers.clone()),
        }
    }

    /// The tracer's full state, for inspection in tests.
    pub fn builder(&self) -> BuilderState {
        self.tracer.lock().clone()
    }

    fn interpret(&self, req: &Request, upstream: &dyn UpstreamClient, timeout: Duration) -> Response {
        let Some(p) = &self.plain else {
            return Response::error(501, self.container_reason.clone().unwrap_or_default());
        };
        let _permit = self.pool.acquire();
        let r = Session::new(p, upstream)
            .request(req)
            .limits(InterpLimits {
                timeout,
                ..Default::default()
            })
            .run();
        interp_response(&r)
    }

    /// Runs `req` on the tracer if it is free, growing the trace.
    fn try_trace(&self, req: &Request, upstream: &dyn UpstreamClient, config: &InvokerConfig) -> Option<Response> {
        let traced = self.traced.as_ref()?;
        let mut b = self.tracer.try_lock()?;
        if self.mode() != Mode::Tracing {
            return None;
        }
        let _permit = self.pool.acquire();
        let snapshot = b.clone();
        let r = run_request(traced, &mut b, req, upstream);
        let clean = r.trace_error.is_none() && r.response.is_ok() && b.context.is_empty() && b.args.is_empty();
        if !clean {
            if let Some(e) = &r.trace_error {
                log::debug!("{}: trace discarded: {e}", self.name);
            }
            *b = snapshot;
        } else {
            let mut s = self.state.write();
            s.traced_events += 1;
            if s.mode == Mode::Tracing && s.traced_events >= config.trace_after {
                log::info!(
                    "{}: switching to containerless after {} traced requests",
                    self.name,
                    s.traced_events
                );
                s.compiled = Some(CompiledProgram::new(b.handlers.clone()));
                s.mode = Mode::Containerless;
            }
        }
        Some(interp_response(&r))
    }

    fn bounce(&self, config: &InvokerConfig, reason: &AbortReason) {
        let mut s = self.state.write();
        s.bounces += 1;
        if s.mode == Mode::ContainerOnly {
            return;
        }
        if s.bounces > config.max_bounces {
            log::warn!("{}: {} bounces, giving up on tracing", self.name, s.bounces);
            s.mode = Mode::ContainerOnly;
            s.compiled = None;
        } else {
            log::info!("{}: executor aborted ({reason}), back to tracing", self.name);
            s.mode = Mode::Tracing;
            s.traced_events = 0;
        }
    }

    pub fn dispatch(&self, req: &Request, upstream: &dyn UpstreamClient, config: &InvokerConfig) -> Invocation {
        let started = Instant::now();
        let (mode, compiled) = {
            let s = self.state.read();
            (s.mode, s.compiled.clone())
        };
        let mut arena_stats = None;
        let (response, served_by, abort) = match (mode, compiled) {
            (Mode::Containerless, Some(cp)) => {
                let mut arena = RequestArena::new(config.limits);
                let r = execute_request(&cp, req, upstream, &mut arena);
                if log::log_enabled!(target: STATS_TARGET, log::Level::Debug) {
                    let id = NEXT_EXEC_ID.fetch_add(1, Ordering::Relaxed);
                    if let Ok(line) = serde_json::to_string(&StatsRecord::new(id, &r, started)) {
                        log::debug!(target: STATS_TARGET, "{line}");
                    }
                }
                arena_stats = Some(r.stats);
                let outcome = match r.outcome {
                    ExecOutcome::Pending => ExecOutcome::Aborted(AbortReason::Divergence("no response".into())),
                    o => o,
                };
                match outcome {
                    ExecOutcome::Responded(body) => (Response::ok(body), ServedBy::Executor, None),
                    ExecOutcome::Pending => unreachable!("mapped above"),
                    ExecOutcome::Aborted(reason) => {
                        if matches!(reason, AbortReason::Unknown | AbortReason::Divergence(_)) {
                            self.bounce(config, &reason);
                        }
                        let resp = self.interpret(req, upstream, config.interp_timeout);
                        (resp, ServedBy::Fallback, Some(reason))
                    }
                }
            }
            (Mode::Tracing, _) => match self.try_trace(req, upstream, config) {
                Some(resp) => (resp, ServedBy::Tracer, None),
                None => (
                    self.interpret(req, upstream, config.interp_timeout),
                    ServedBy::Interpreter,
                    None,
                ),
            },
            _ if self.plain.is_none() => (
                Response::error(501, self.container_reason.clone().unwrap_or_default()),
                ServedBy::Unsupported,
                None,
            ),
            _ => (
                self.interpret(req, upstream, config.interp_timeout),
                ServedBy::Interpreter,
                None,
            ),
        };
        let latency = started.elapsed();
        let mut c = self.counters.lock();
        c.requests += 1;
        match served_by {
            ServedBy::Tracer => c.by_tracer += 1,
            ServedBy::Interpreter | ServedBy::Unsupported => c.by_interpreter += 1,
            ServedBy::Executor => c.by_executor += 1,
            ServedBy::Fallback => c.by_fallback += 1,
        }
        if c.latencies_us.len() >= LATENCY_WINDOW {
            c.latencies_us.remove(0);
        }
        c.latencies_us.push(latency.as_micros() as u64);
        Invocation {
            response,
            served_by,
            abort,
            arena: arena_stats,
            latency,
        }
    }
}

/// All registered functions plus their shared upstream.
pub struct Invoker {
    pub config: InvokerConfig,
    upstream: Arc<dyn UpstreamClient>,
    functions: RwLock<HashMap<String, Arc<FunctionRecord>>>,
    /// Forces every function into container mode.
    container_only: bool,
}

impl Invoker {
    pub fn new(config: InvokerConfig, upstream: Arc<dyn UpstreamClient>) -> Self {
        Invoker {
            config,
            upstream,
            functions: RwLock::new(HashMap::new()),
            container_only: false,
        }
    }

    /// An invoker that never traces: the reference for equivalence tests.
    pub fn container_only(config: InvokerConfig, upstream: Arc<dyn UpstreamClient>) -> Self {
        Invoker {
            container_only: true,
            ..Invoker::new(config, upstream)
        }
    }

    /// Compiles and (re)registers `name`. Programs using unsupported
    /// features register in container mode.
    pub fn register(&self, name: &str, source: &str) -> Result<FunctionStatus, InvokeError> {
        let rec = FunctionRecord::compile(name, source, &self.config).map_err(InvokeError::Parse)?;
        if self.container_only {
            rec.state.write().mode = Mode::ContainerOnly;
        }
        let status = rec.status();
        self.functions.write().insert(name.to_string(), Arc::new(rec));
        Ok(status)
    }

    pub fn function(&self, name: &str) -> Result<Arc<FunctionRecord>, InvokeError> {
        self.functions
            .read()
            .get(name)
            .cloned()
            .ok_or_else(|| InvokeError::NotFound(name.to_string()))
    }

    pub fn dispatch(&self, name: &str, req: &Request) -> Result<Invocation, InvokeError> {
        Ok(self.function(name)?.dispatch(req, self.upstream.as_ref(), &self.config))
    }

    pub fn status(&self, name: &str) -> Result<FunctionStatus, InvokeError> {
        Ok(self.function(name)?.status())
    }

    pub fn upstream(&self) -> &Arc<dyn UpstreamClient> {
        &self.upstream
    }
}

/// Runs `req` through the interpreter only, as the reference semantics.
pub fn reference_response(p: &InstrumentedProgram, req: &Request, upstream: &dyn UpstreamClient) -> Response {
    interp_response(&run_plain(p, req, upstream))
}
