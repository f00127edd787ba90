//! Tree-walking interpreter for instrumented guest programs.
//!
//! This is the slow sandbox. It runs programs with or without a tracer; when
//! a [`BuilderState`] is attached, the runtime calls interleaved by the
//! compiler grow the trace as a side effect.

use std::cell::{Cell as StdCell, RefCell};
use std::collections::VecDeque;
use std::rc::Rc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use indexmap::IndexMap;
use serde_json::Value as Json;
use thiserror::Error;

use crate::ast::{is_builtin, BinOp, Expr, Lit, BUILTINS};
use crate::instrument::{IFunction, IInit, IStmt, InstrumentedProgram, Rt};
use crate::ops::{self, OpResult, Operand, Prim, RefKind};
use crate::trace::{EventKind, Trace};
use crate::upstream::{Request, UpstreamClient};
use crate::zipper::{BuilderState, Leaf, TraceError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GuestError {
    #[error("{0}")]
    Type(#[from] ops::TypeError),
    #[error("ReferenceError: `{0}` is not defined")]
    Reference(String),
    #[error("request timed out")]
    Timeout,
    #[error("function finished without responding")]
    NoResponse,
    #[error("respond called twice")]
    DoubleRespond,
    #[error("out of memory")]
    OutOfMemory,
}

impl GuestError {
    /// HTTP status reported to clients.
    pub fn status(&self) -> u16 {
        match self {
            GuestError::Timeout | GuestError::NoResponse => 504,
            _ => 500,
        }
    }
}

fn type_err<T>(msg: impl Into<String>) -> Result<T, GuestError> {
    Err(GuestError::Type(ops::TypeError(msg.into())))
}

pub type Cell = Rc<RefCell<Value>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Get,
    Post,
    Respond,
    Listen,
}

impl Builtin {
    fn from_name(name: &str) -> Option<Builtin> {
        match name {
            "get" => Some(Builtin::Get),
            "post" => Some(Builtin::Post),
            "respond" => Some(Builtin::Respond),
            "listen" => Some(Builtin::Listen),
            _ => None,
        }
    }
}

pub struct Closure {
    func: Arc<IFunction>,
    scope: Scope,
}

#[derive(Clone)]
pub enum Value {
    Undefined,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(Rc<str>),
    Object(Rc<RefCell<IndexMap<String, Value>>>),
    Array(Rc<RefCell<Vec<Value>>>),
    Closure(Rc<Closure>),
    Builtin(Builtin),
}

impl std::fmt::Debug for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Closure(_) => f.write_str("<function>"),
            Value::Builtin(b) => write!(f, "<builtin {b:?}>"),
            other => write!(f, "{}", other.to_json()),
        }
    }
}

impl Value {
    pub fn str(s: &str) -> Value {
        Value::Str(Rc::from(s))
    }

    fn operand(&self) -> Operand<'_> {
        match self {
            Value::Undefined => Operand::Undefined,
            Value::Bool(b) => Operand::Bool(*b),
            Value::Int(i) => Operand::Int(*i),
            Value::Float(x) => Operand::Float(*x),
            Value::Str(s) => Operand::Str(s),
            Value::Object(o) => Operand::Ref(RefKind::Object, Rc::as_ptr(o) as *const u8 as usize),
            Value::Array(a) => Operand::Ref(RefKind::Array, Rc::as_ptr(a) as *const u8 as usize),
            Value::Closure(c) => Operand::Ref(RefKind::Function, Rc::as_ptr(c) as *const u8 as usize),
            Value::Builtin(b) => Operand::Ref(RefKind::Function, *b as usize),
        }
    }

    fn from_prim(p: Prim) -> Value {
        match p {
            Prim::Undefined => Value::Undefined,
            Prim::Bool(b) => Value::Bool(b),
            Prim::Int(i) => Value::Int(i),
            Prim::Float(x) => Value::Float(x),
            Prim::Str(s) => Value::Str(Rc::from(s)),
        }
    }

    pub fn from_lit(l: &Lit) -> Value {
        match l {
            Lit::Undefined => Value::Undefined,
            Lit::Bool(b) => Value::Bool(*b),
            Lit::Int(i) => Value::Int(*i),
            Lit::Float(x) => Value::Float(*x),
            Lit::Str(s) => Value::str(s),
        }
    }

    pub fn truthy(&self) -> bool {
        ops::truthy(&self.operand())
    }

    /// JSON encoding; functions and `undefined` are dropped from objects
    /// and become `null` elsewhere.
    pub fn to_json(&self) -> Json {
        match self {
            Value::Undefined | Value::Closure(_) | Value::Builtin(_) => Json::Null,
            Value::Bool(b) => Json::Bool(*b),
            Value::Int(i) => Json::from(*i),
            Value::Float(x) => ops::number_to_json(*x),
            Value::Str(s) => Json::String(s.to_string()),
            Value::Object(o) => Json::Object(
                o.borrow()
                    .iter()
                    .filter(|(_, v)| !matches!(v, Value::Undefined | Value::Closure(_) | Value::Builtin(_)))
                    .map(|(k, v)| (k.clone(), v.to_json()))
                    .collect(),
            ),
            Value::Array(a) => Json::Array(a.borrow().iter().map(Value::to_json).collect()),
        }
    }

    pub fn from_json(j: &Json) -> Value {
        match j {
            Json::Null => Value::Undefined,
            Json::Bool(b) => Value::Bool(*b),
            Json::Number(n) => match n.as_i64() {
                Some(i) if i.abs() <= ops::MAX_SAFE_INT => Value::Int(i),
                _ => Value::Float(n.as_f64().unwrap_or(f64::NAN)),
            },
            Json::String(s) => Value::str(s),
            Json::Array(items) => Value::Array(Rc::new(RefCell::new(items.iter().map(Value::from_json).collect()))),
            Json::Object(m) => Value::Object(Rc::new(RefCell::new(
                m.iter().map(|(k, v)| (k.clone(), Value::from_json(v))).collect(),
            ))),
        }
    }
}

struct ScopeNode {
    vars: RefCell<Vec<(String, Cell)>>,
    parent: Option<Scope>,
}

type Scope = Rc<ScopeNode>;

fn new_scope(parent: Option<Scope>) -> Scope {
    Rc::new(ScopeNode {
        vars: RefCell::new(Vec::new()),
        parent,
    })
}

fn lookup(scope: &Scope, name: &str) -> Option<Cell> {
    let mut s = Some(scope);
    while let Some(node) = s {
        if let Some((_, c)) = node.vars.borrow().iter().rev().find(|(n, _)| n == name) {
            return Some(c.clone());
        }
        s = node.parent.as_ref();
    }
    None
}

fn declare(scope: &Scope, name: &str, v: Value) {
    scope.vars.borrow_mut().push((name.to_string(), Rc::new(RefCell::new(v))));
}

enum Flow {
    Normal,
    Break(String),
    Return(Value),
}

enum PendingOp {
    Listen,
    Get(String),
    Post(String, Json),
}

struct Completion {
    handler: Option<usize>,
    callback: Value,
    op: PendingOp,
}

/// A tracing operation, reported to observers after it succeeds.
#[derive(Debug, Clone, Copy)]
pub enum Step<'r> {
    Rt(&'r Rt),
    /// A builtin shim has updated the trace.
    Builtin(Builtin),
    LoadHandler(usize),
    SaveHandler(usize),
}

/// Callback run after each tracing operation.
pub type Observer<'a> = dyn FnMut(Step<'_>, &BuilderState) + 'a;

#[derive(Debug, Clone)]
pub struct InterpLimits {
    pub timeout: Duration,
    /// Cumulative allocation budget in approximate bytes.
    pub alloc_budget: usize,
}

impl Default for InterpLimits {
    fn default() -> Self {
        InterpLimits {
            timeout: Duration::from_secs(5),
            alloc_budget: 256 << 20,
        }
    }
}

/// Result of running a program once.
#[derive(Debug)]
pub struct RunResult {
    /// The responded value, or why there is none.
    pub response: Result<Json, GuestError>,
    /// Set if tracing stopped part-way because of a trace error.
    pub trace_error: Option<TraceError>,
    /// Final values of host globals.
    pub globals: IndexMap<String, Json>,
    /// Number of callbacks dispatched by the event loop.
    pub events: usize,
}

/// One run of a program: top level, then the event loop until it drains.
pub struct Session<'a> {
    program: &'a InstrumentedProgram,
    tracer: Option<&'a mut BuilderState>,
    trace_error: Option<TraceError>,
    observer: Option<&'a mut Observer<'a>>,
    upstream: &'a dyn UpstreamClient,
    request: Option<Json>,
    root: Scope,
    queue: VecDeque<Completion>,
    response: Option<Json>,
    deadline: Instant,
    allocated: StdCell<usize>,
    limits: InterpLimits,
    events: usize,
}

impl<'a> Session<'a> {
    pub fn new(program: &'a InstrumentedProgram, upstream: &'a dyn UpstreamClient) -> Self {
        let root = new_scope(None);
        for b in BUILTINS {
            declare(&root, b, Value::Builtin(Builtin::from_name(b).expect("builtin")));
        }
        for g in &program.globals {
            declare(&root, g, Value::Undefined);
        }
        let limits = InterpLimits::default();
        Session {
            program,
            tracer: None,
            trace_error: None,
            observer: None,
            upstream,
            request: None,
            root,
            queue: VecDeque::new(),
            response: None,
            deadline: Instant::now() + limits.timeout,
            allocated: StdCell::new(0),
            limits,
            events: 0,
        }
    }

    /// Attaches a tracer. Runtime calls are skipped without one.
    pub fn tracer(mut self, b: &'a mut BuilderState) -> Self {
        if self.program.traced {
            self.tracer = Some(b);
        }
        self
    }

    pub fn observer(mut self, f: &'a mut Observer<'a>) -> Self {
        self.observer = Some(f);
        self
    }

    pub fn request(mut self, req: &Request) -> Self {
        self.request = Some(req.to_json());
        self
    }

    pub fn limits(mut self, limits: InterpLimits) -> Self {
        self.deadline = Instant::now() + limits.timeout;
        self.limits = limits;
        self
    }

    pub fn global(self, name: &str, v: Json) -> Self {
        if let Some(c) = lookup(&self.root, name) {
            *c.borrow_mut() = Value::from_json(&v);
        }
        self
    }

    pub fn run(mut self) -> RunResult {
        let outcome = self.run_inner();
        let globals = self
            .program
            .globals
            .iter()
            .map(|g| {
                let v = lookup(&self.root, g).map_or(Json::Null, |c| c.borrow().to_json());
                (g.clone(), v)
            })
            .collect();
        let response = match outcome {
            Err(e) => Err(e),
            Ok(()) => self.response.take().ok_or(GuestError::NoResponse),
        };
        RunResult {
            response,
            trace_error: self.trace_error,
            globals,
            events: self.events,
        }
    }

    fn run_inner(&mut self) -> Result<(), GuestError> {
        let scope = self.root.clone();
        let body = &self.program.body;
        match self.group(body, &scope)? {
            Flow::Normal => {}
            _ => return type_err("control flow escaped the top level"),
        }
        while let Some(c) = self.queue.pop_front() {
            self.check_deadline()?;
            let payload = match &c.op {
                PendingOp::Listen => match &self.request {
                    Some(r) => Value::from_json(r),
                    None => continue,
                },
                PendingOp::Get(url) => self.upstream.get(url).map_or(Value::Undefined, |j| Value::from_json(&j)),
                PendingOp::Post(url, body) => self
                    .upstream
                    .post(url, body)
                    .map_or(Value::Undefined, |j| Value::from_json(&j)),
            };
            self.events += 1;
            self.dispatch(c.handler, &c.callback, payload)?;
        }
        Ok(())
    }

    fn tracing(&self) -> bool {
        self.tracer.is_some() && self.trace_error.is_none()
    }

    fn trace_op<T>(&mut self, f: impl FnOnce(&mut BuilderState) -> Result<T, TraceError>) -> Option<T> {
        if !self.tracing() {
            return None;
        }
        let b = self.tracer.as_deref_mut().expect("tracing");
        match f(b) {
            Ok(v) => Some(v),
            Err(e) => {
                log::debug!("tracing stopped: {e}");
                self.trace_error = Some(e);
                None
            }
        }
    }

    fn dispatch(&mut self, handler: Option<usize>, callback: &Value, payload: Value) -> Result<(), GuestError> {
        let Value::Closure(cl) = callback else {
            return type_err("callback is not a function");
        };
        let arity = cl.func.params.len();
        if let Some(n) = handler {
            if self.trace_op(|b| b.load_handler_padded(n, arity.saturating_sub(1))).is_some() {
                self.notify(Step::LoadHandler(n));
            }
        }
        let cl = cl.clone();
        self.call_closure(&cl, vec![payload])?;
        if let Some(n) = handler {
            if arity == 0 {
                self.trace_op(|b| b.pop_arg().map(drop));
            }
            if self.trace_op(|b| b.save_handler(n)).is_some() {
                self.notify(Step::SaveHandler(n));
            }
        }
        Ok(())
    }

    fn notify(&mut self, step: Step<'_>) {
        if let (Some(obs), Some(b)) = (self.observer.as_mut(), self.tracer.as_deref()) {
            obs(step, b);
        }
    }

    fn check_deadline(&self) -> Result<(), GuestError> {
        if Instant::now() > self.deadline {
            Err(GuestError::Timeout)
        } else {
            Ok(())
        }
    }

    fn charge(&self, bytes: usize) -> Result<(), GuestError> {
        let total = self.allocated.get() + bytes;
        self.allocated.set(total);
        if total > self.limits.alloc_budget {
            Err(GuestError::OutOfMemory)
        } else {
            Ok(())
        }
    }

    fn rt(&mut self, rt: &Rt) {
        if !self.tracing() {
            return;
        }
        let ok = self
            .trace_op(|b| match rt {
                Rt::Let { name, value } => b.record(Leaf::Let {
                    name: name.clone(),
                    value: value.clone(),
                }),
                Rt::LetPopArg { name } => {
                    let value = b.pop_arg()?;
                    b.record(Leaf::Let {
                        name: name.clone(),
                        value,
                    })
                }
                Rt::Set { target, value } => b.record(Leaf::Set {
                    target: target.clone(),
                    value: value.clone(),
                }),
                Rt::Break { label, value } => b.record(Leaf::Break {
                    label: label.clone(),
                    value: value.clone(),
                }),
                Rt::Empty => b.record(Leaf::Empty),
                Rt::EnterSeq(n) => b.enter_seq(*n),
                Rt::SeqNext => b.seq_next(),
                Rt::IfTrue(t) => b.if_true(t.clone()),
                Rt::IfFalse(t) => b.if_false(t.clone()),
                Rt::While(t) => b.enter_while(t.clone()),
                Rt::Label(l) => b.enter_label(l),
                Rt::Named(x) => b.enter_named(x),
                Rt::Pop => b.pop(),
                Rt::PopTo(l) => b.pop_to(l),
                Rt::PushArg(t) => {
                    b.push_arg(t.clone());
                    Ok(())
                }
                Rt::LoadMain => b.load_main(),
                Rt::SaveHandler(n) => b.save_handler(*n),
            })
            .is_some();
        if ok {
            self.notify(Step::Rt(rt));
        }
    }

    fn group(&mut self, g: &[IStmt], scope: &Scope) -> Result<Flow, GuestError> {
        for s in g {
            match self.stmt(s, scope)? {
                Flow::Normal => {}
                other => return Ok(other),
            }
        }
        Ok(Flow::Normal)
    }

    fn stmt(&mut self, s: &IStmt, scope: &Scope) -> Result<Flow, GuestError> {
        match s {
            IStmt::Rt(rt) => self.rt(rt),
            IStmt::Let { name, init } => {
                let v = match init {
                    IInit::Expr(e) => self.eval(e, scope)?,
                    IInit::Function(f) => Value::Closure(Rc::new(Closure {
                        func: f.clone(),
                        scope: scope.clone(),
                    })),
                    IInit::Call { callee, args } => self.call(callee, args, scope)?,
                };
                declare(scope, name, v);
            }
            IStmt::Assign { target, value } => {
                let v = self.eval(value, scope)?;
                self.assign(target, v, scope)?;
            }
            IStmt::Block(g) => return self.group(g, &new_scope(Some(scope.clone()))),
            IStmt::If { cond, then, els } => {
                let branch = if self.eval(cond, scope)?.truthy() { then } else { els };
                return self.group(branch, &new_scope(Some(scope.clone())));
            }
            IStmt::While { cond, body } => loop {
                self.check_deadline()?;
                if !self.eval(cond, scope)?.truthy() {
                    break;
                }
                match self.group(body, &new_scope(Some(scope.clone())))? {
                    Flow::Normal => {}
                    other => return Ok(other),
                }
            },
            IStmt::Labeled { label, body } => {
                return match self.group(body, &new_scope(Some(scope.clone())))? {
                    Flow::Break(l) if l == *label => Ok(Flow::Normal),
                    other => Ok(other),
                }
            }
            IStmt::Break(l) => return Ok(Flow::Break(l.clone())),
            IStmt::Return(e) => return Ok(Flow::Return(self.eval(e, scope)?)),
        }
        Ok(Flow::Normal)
    }

    fn call(&mut self, callee: &str, args: &[Expr], scope: &Scope) -> Result<Value, GuestError> {
        let f = lookup(scope, callee)
            .ok_or_else(|| GuestError::Reference(callee.to_string()))?
            .borrow()
            .clone();
        let args = args.iter().map(|a| self.eval(a, scope)).collect::<Result<Vec<_>, _>>()?;
        match f {
            Value::Closure(cl) => {
                if self.tracing() && args.len() != cl.func.params.len() {
                    self.trace_error = Some(TraceError::Divergence(format!(
                        "`{callee}` expects {} arguments, got {}",
                        cl.func.params.len(),
                        args.len()
                    )));
                }
                self.call_closure(&cl, args)
            }
            Value::Builtin(b) => self.builtin(b, args),
            other => type_err(format!("`{callee}` is not a function ({})", other.operand().type_name())),
        }
    }

    fn call_closure(&mut self, cl: &Closure, args: Vec<Value>) -> Result<Value, GuestError> {
        self.check_deadline()?;
        let scope = new_scope(Some(cl.scope.clone()));
        let mut args = args.into_iter();
        for p in &cl.func.params {
            declare(&scope, p, args.next().unwrap_or(Value::Undefined));
        }
        match self.group(&cl.func.body, &scope)? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(Value::Undefined),
            Flow::Break(l) => type_err(format!("break to `{l}` escaped a function")),
        }
    }

    fn builtin(&mut self, b: Builtin, args: Vec<Value>) -> Result<Value, GuestError> {
        let expected = match b {
            Builtin::Get | Builtin::Post => 2,
            Builtin::Respond | Builtin::Listen => 1,
        };
        if args.len() != expected {
            return type_err(format!("{b:?} expects {expected} arguments, got {}", args.len()));
        }
        // Shim protocol: the callee's own env is on top, then the arguments.
        let traces = self.trace_op(|t| {
            t.pop_arg()?;
            (0..expected).map(|_| t.pop_arg()).collect::<Result<Vec<_>, _>>()
        });
        let traced = traces.is_some();
        let mut args = args.into_iter();
        match b {
            Builtin::Respond => {
                let v = args.next().expect("arity checked");
                if self.response.is_some() {
                    return Err(GuestError::DoubleRespond);
                }
                if let Some(mut ts) = traces {
                    let t = ts.remove(0);
                    self.trace_op(|b| b.record(Leaf::Respond { value: t }));
                }
                self.response = Some(v.to_json());
            }
            Builtin::Listen => {
                let cb = args.next().expect("arity checked");
                let handler = traces.and_then(|mut ts| {
                    let t_cb = ts.remove(0);
                    self.trace_op(|b| b.new_handler(EventKind::Listen, Trace::undefined(), t_cb))
                });
                self.queue.push_back(Completion {
                    handler,
                    callback: cb,
                    op: PendingOp::Listen,
                });
            }
            Builtin::Get => {
                let url = args.next().expect("arity checked");
                let cb = args.next().expect("arity checked");
                let Value::Str(url) = url else {
                    return type_err("get: url must be a string");
                };
                let handler = traces.and_then(|mut ts| {
                    let (t_url, t_cb) = (ts.remove(0), ts.remove(0));
                    self.trace_op(|b| b.new_handler(EventKind::Get, t_url, t_cb))
                });
                self.queue.push_back(Completion {
                    handler,
                    callback: cb,
                    op: PendingOp::Get(url.to_string()),
                });
            }
            Builtin::Post => {
                let req = args.next().expect("arity checked");
                let cb = args.next().expect("arity checked");
                let Value::Object(o) = &req else {
                    return type_err("post: argument must be an object with `url` and `body`");
                };
                let (url, body) = {
                    let o = o.borrow();
                    let url = match o.get("url") {
                        Some(Value::Str(s)) => s.to_string(),
                        _ => return type_err("post: `url` must be a string"),
                    };
                    (url, o.get("body").map_or(Json::Null, Value::to_json))
                };
                let handler = traces.and_then(|mut ts| {
                    let (t_arg, t_cb) = (ts.remove(0), ts.remove(0));
                    self.trace_op(|b| b.new_handler(EventKind::Post, t_arg, t_cb))
                });
                self.queue.push_back(Completion {
                    handler,
                    callback: cb,
                    op: PendingOp::Post(url, body),
                });
            }
        }
        if traced && self.tracing() {
            self.notify(Step::Builtin(b));
        }
        Ok(Value::Undefined)
    }

    fn eval(&mut self, e: &Expr, scope: &Scope) -> Result<Value, GuestError> {
        Ok(match e {
            Expr::Const { value } => Value::from_lit(value),
            Expr::Var { name } => lookup(scope, name)
                .ok_or_else(|| GuestError::Reference(name.clone()))?
                .borrow()
                .clone(),
            Expr::Binary { op, left, right } => {
                let l = self.eval(left, scope)?;
                match op {
                    BinOp::And if !l.truthy() => return Ok(l),
                    BinOp::Or if l.truthy() => return Ok(l),
                    _ => {}
                }
                let r = self.eval(right, scope)?;
                self.binop(*op, l, r)?
            }
            Expr::Unary { op, operand } => {
                let v = self.eval(operand, scope)?;
                Value::from_prim(ops::unop(*op, v.operand())?)
            }
            Expr::Member { object, property } => {
                let o = self.eval(object, scope)?;
                let p = self.eval(property, scope)?;
                self.get_member(&o, &p)?
            }
            Expr::Object { fields } => {
                let mut m = IndexMap::with_capacity(fields.len());
                for (k, v) in fields {
                    let v = self.eval(v, scope)?;
                    self.charge(k.len() + 24)?;
                    m.insert(k.clone(), v);
                }
                Value::Object(Rc::new(RefCell::new(m)))
            }
            Expr::Array { items } => {
                let items = items.iter().map(|v| self.eval(v, scope)).collect::<Result<Vec<_>, _>>()?;
                self.charge(16 * items.len() + 16)?;
                Value::Array(Rc::new(RefCell::new(items)))
            }
            Expr::Call { .. } | Expr::Function(_) => return type_err("unexpected call in expression"),
        })
    }

    fn binop(&self, op: BinOp, l: Value, r: Value) -> Result<Value, GuestError> {
        Ok(match ops::binop(op, l.operand(), r.operand())? {
            OpResult::Left => l,
            OpResult::Right => r,
            OpResult::Prim(p) => {
                if let Prim::Str(s) = &p {
                    self.charge(s.len() + 16)?;
                }
                Value::from_prim(p)
            }
        })
    }

    fn get_member(&self, o: &Value, p: &Value) -> Result<Value, GuestError> {
        let key = p.operand();
        match o {
            Value::Object(m) => {
                let k = ops::property_key(&key)?;
                Ok(m.borrow().get(&k).cloned().unwrap_or(Value::Undefined))
            }
            Value::Array(a) => {
                let a = a.borrow();
                if matches!(key, Operand::Str("length")) {
                    return Ok(Value::Int(a.len() as i64));
                }
                Ok(ops::array_index(&key)
                    .and_then(|i| a.get(i).cloned())
                    .unwrap_or(Value::Undefined))
            }
            Value::Str(s) => {
                if matches!(key, Operand::Str("length")) {
                    return Ok(Value::Int(s.chars().count() as i64));
                }
                Ok(ops::array_index(&key)
                    .and_then(|i| s.chars().nth(i))
                    .map_or(Value::Undefined, |c| Value::str(c.encode_utf8(&mut [0; 4]))))
            }
            Value::Undefined => type_err(format!(
                "cannot read property {} of undefined",
                ops::property_key(&key).unwrap_or_default()
            )),
            _ => Ok(Value::Undefined),
        }
    }

    fn assign(&mut self, target: &Expr, v: Value, scope: &Scope) -> Result<(), GuestError> {
        match target {
            Expr::Var { name } => {
                let cell = lookup(scope, name).ok_or_else(|| GuestError::Reference(name.clone()))?;
                *cell.borrow_mut() = v;
                Ok(())
            }
            Expr::Member { object, property } => {
                let o = self.eval(object, scope)?;
                let p = self.eval(property, scope)?;
                self.set_member(&o, &p, v)
            }
            _ => type_err("invalid assignment target"),
        }
    }

    fn set_member(&self, o: &Value, p: &Value, v: Value) -> Result<(), GuestError> {
        let key = p.operand();
        match o {
            Value::Object(m) => {
                let k = ops::property_key(&key)?;
                self.charge(k.len() + 24)?;
                m.borrow_mut().insert(k, v);
                Ok(())
            }
            Value::Array(a) => {
                let Some(i) = ops::array_index(&key) else {
                    return type_err("array index must be a non-negative integer");
                };
                let mut a = a.borrow_mut();
                if i >= a.len() {
                    self.charge(16 * (i + 1 - a.len()))?;
                    a.resize(i + 1, Value::Undefined);
                }
                a[i] = v;
                Ok(())
            }
            other => type_err(format!("cannot set a property on {}", other.operand().type_name())),
        }
    }
}

/// Runs one request without tracing.
pub fn run_plain(p: &InstrumentedProgram, req: &Request, upstream: &dyn UpstreamClient) -> RunResult {
    Session::new(p, upstream).request(req).run()
}

/// Runs one request, growing `builder`.
pub fn run_request(
    p: &InstrumentedProgram,
    builder: &mut BuilderState,
    req: &Request,
    upstream: &dyn UpstreamClient,
) -> RunResult {
    Session::new(p, upstream).tracer(builder).request(req).run()
}

/// True if `name` refers to a builtin rather than a guest binding.
pub fn is_builtin_name(name: &str) -> bool {
    is_builtin(name)
}
