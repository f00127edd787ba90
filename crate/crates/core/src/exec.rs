//! The trace executor: runs a handler table directly against events.
//!
//! Every container value of a request lives in a [`RequestArena`], which is
//! cleared wholesale when the request finishes. Loops and handler entries are
//! metered; exceeding either limit aborts the request, as does reaching an
//! unknown node.

use std::collections::VecDeque;
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;
use std::time::Instant;

use indexmap::IndexMap;
use serde::Serialize;
use serde_json::Value as Json;

use crate::ast::{BinOp, Lit};
use crate::ops::{self, OpResult, Operand, Prim, RefKind};
use crate::trace::{EventKind, HandlerTable, Trace};
use crate::upstream::{Request, UpstreamClient};

/// Index of a slot in a [`RequestArena`].
pub type Addr = u32;

#[derive(Debug, Clone, PartialEq)]
pub enum Dyn {
    Undefined,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(Rc<str>),
    Object(Addr),
    Array(Addr),
    /// A closure environment; closures are represented by their env.
    Env(Addr),
    Address(Addr),
}

impl Dyn {
    fn operand(&self) -> Operand<'_> {
        match self {
            Dyn::Undefined => Operand::Undefined,
            Dyn::Bool(b) => Operand::Bool(*b),
            Dyn::Int(i) => Operand::Int(*i),
            Dyn::Float(x) => Operand::Float(*x),
            Dyn::Str(s) => Operand::Str(s),
            Dyn::Object(a) => Operand::Ref(RefKind::Object, *a as usize),
            Dyn::Array(a) => Operand::Ref(RefKind::Array, *a as usize),
            Dyn::Env(a) => Operand::Ref(RefKind::Function, *a as usize),
            Dyn::Address(a) => Operand::Ref(RefKind::Env, *a as usize),
        }
    }

    pub fn truthy(&self) -> bool {
        ops::truthy(&self.operand())
    }

    fn from_lit(l: &Lit) -> Dyn {
        match l {
            Lit::Undefined => Dyn::Undefined,
            Lit::Bool(b) => Dyn::Bool(*b),
            Lit::Int(i) => Dyn::Int(*i),
            Lit::Float(x) => Dyn::Float(*x),
            Lit::Str(s) => Dyn::Str(Rc::from(s.as_str())),
        }
    }
}

/// Why a request left the executor without a response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", content = "detail")]
pub enum AbortReason {
    /// An untraced path was reached.
    Unknown,
    DynTypeError(String),
    InstructionLimit,
    MemoryLimit,
    /// The trace and the request disagree in a way the interpreter must
    /// settle, such as a missing or repeated response.
    Divergence(String),
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbortReason::Unknown => f.write_str("UNKNOWN"),
            AbortReason::DynTypeError(m) => write!(f, "DynTypeError: {m}"),
            AbortReason::InstructionLimit => f.write_str("InstructionLimit"),
            AbortReason::MemoryLimit => f.write_str("MemoryLimit"),
            AbortReason::Divergence(m) => write!(f, "divergence: {m}"),
        }
    }
}

impl From<ops::TypeError> for AbortReason {
    fn from(e: ops::TypeError) -> Self {
        AbortReason::DynTypeError(e.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExecOutcome {
    Responded(Json),
    /// The handler finished; the request is still waiting on events.
    Pending,
    Aborted(AbortReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecLimits {
    pub max_instructions: u64,
    pub max_bytes: usize,
}

impl Default for ExecLimits {
    fn default() -> Self {
        ExecLimits {
            max_instructions: 10_000_000,
            max_bytes: 128 << 20,
        }
    }
}

#[derive(Debug, Clone)]
enum Slot {
    Cell(Dyn),
    Object(IndexMap<String, Dyn>),
    Array(Vec<Dyn>),
    Env(Vec<(String, Addr)>),
}

/// Per-request store for every cell, object, array and env.
#[derive(Debug)]
pub struct RequestArena {
    slots: Vec<Slot>,
    bytes: usize,
    peak_bytes: usize,
    instructions: u64,
    limits: ExecLimits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ArenaStats {
    pub peak_bytes: usize,
    pub instructions: u64,
    pub cells_allocated: usize,
    /// Slots still live after the clear. Always zero.
    pub live_cells: usize,
}

const SLOT_BYTES: usize = 32;

impl RequestArena {
    pub fn new(limits: ExecLimits) -> Self {
        RequestArena {
            slots: Vec::new(),
            bytes: 0,
            peak_bytes: 0,
            instructions: 0,
            limits,
        }
    }

    pub fn live_cells(&self) -> usize {
        self.slots.len()
    }

    pub fn bytes_used(&self) -> usize {
        self.bytes
    }

    /// Counts one instruction at a loop head or handler entry.
    pub fn check_budget(&mut self) -> Result<(), AbortReason> {
        self.instructions += 1;
        if self.instructions > self.limits.max_instructions {
            Err(AbortReason::InstructionLimit)
        } else {
            Ok(())
        }
    }

    fn charge(&mut self, bytes: usize) -> Result<(), AbortReason> {
        self.bytes += bytes;
        self.peak_bytes = self.peak_bytes.max(self.bytes);
        if self.bytes > self.limits.max_bytes {
            Err(AbortReason::MemoryLimit)
        } else {
            Ok(())
        }
    }

    fn alloc(&mut self, slot: Slot) -> Result<Addr, AbortReason> {
        let extra = match &slot {
            Slot::Object(m) => m.keys().map(|k| k.len() + SLOT_BYTES).sum(),
            Slot::Array(v) => v.len() * 16,
            Slot::Env(e) => e.len() * SLOT_BYTES,
            Slot::Cell(_) => 0,
        };
        self.charge(SLOT_BYTES + extra)?;
        let a = Addr::try_from(self.slots.len()).map_err(|_| AbortReason::MemoryLimit)?;
        self.slots.push(slot);
        Ok(a)
    }

    fn cell(&mut self, v: Dyn) -> Result<Addr, AbortReason> {
        self.alloc(Slot::Cell(v))
    }

    fn read(&self, a: Addr) -> Dyn {
        match &self.slots[a as usize] {
            Slot::Cell(v) => v.clone(),
            _ => unreachable!("address {a} is not a cell"),
        }
    }

    fn write(&mut self, a: Addr, v: Dyn) {
        self.slots[a as usize] = Slot::Cell(v);
    }

    /// Frees everything at once and reports usage.
    pub fn end_request(&mut self) -> ArenaStats {
        let cells_allocated = self.slots.len();
        self.slots.clear();
        self.slots.shrink_to(1024);
        let stats = ArenaStats {
            peak_bytes: self.peak_bytes,
            instructions: self.instructions,
            cells_allocated,
            live_cells: self.slots.len(),
        };
        self.bytes = 0;
        self.peak_bytes = 0;
        self.instructions = 0;
        stats
    }

    pub fn alloc_json(&mut self, j: &Json) -> Result<Dyn, AbortReason> {
        Ok(match j {
            Json::Null => Dyn::Undefined,
            Json::Bool(b) => Dyn::Bool(*b),
            Json::Number(n) => match n.as_i64() {
                Some(i) if i.abs() <= ops::MAX_SAFE_INT => Dyn::Int(i),
                _ => Dyn::Float(n.as_f64().unwrap_or(f64::NAN)),
            },
            Json::String(s) => {
                self.charge(s.len())?;
                Dyn::Str(Rc::from(s.as_str()))
            }
            Json::Array(items) => {
                let items = items.iter().map(|v| self.alloc_json(v)).collect::<Result<Vec<_>, _>>()?;
                Dyn::Array(self.alloc(Slot::Array(items))?)
            }
            Json::Object(m) => {
                let mut fields = IndexMap::with_capacity(m.len());
                for (k, v) in m {
                    let v = self.alloc_json(v)?;
                    fields.insert(k.clone(), v);
                }
                Dyn::Object(self.alloc(Slot::Object(fields))?)
            }
        })
    }

    pub fn to_json(&self, v: &Dyn) -> Json {
        let drop = |v: &Dyn| matches!(v, Dyn::Undefined | Dyn::Env(_) | Dyn::Address(_));
        match v {
            Dyn::Undefined | Dyn::Env(_) | Dyn::Address(_) => Json::Null,
            Dyn::Bool(b) => Json::Bool(*b),
            Dyn::Int(i) => Json::from(*i),
            Dyn::Float(x) => ops::number_to_json(*x),
            Dyn::Str(s) => Json::String(s.to_string()),
            Dyn::Object(a) => match &self.slots[*a as usize] {
                Slot::Object(m) => Json::Object(
                    m.iter()
                        .filter(|(_, v)| !drop(v))
                        .map(|(k, v)| (k.clone(), self.to_json(v)))
                        .collect(),
                ),
                _ => Json::Null,
            },
            Dyn::Array(a) => match &self.slots[*a as usize] {
                Slot::Array(items) => Json::Array(items.iter().map(|v| self.to_json(v)).collect()),
                _ => Json::Null,
            },
        }
    }
}

/// An immutable handler table ready for execution.
#[derive(Debug, Clone)]
pub struct CompiledProgram {
    handlers: Arc<HandlerTable>,
}

impl CompiledProgram {
    pub fn new(handlers: HandlerTable) -> Self {
        CompiledProgram {
            handlers: Arc::new(handlers),
        }
    }

    pub fn handlers(&self) -> &HandlerTable {
        &self.handlers
    }
}

enum Flow {
    Normal,
    Break(String, Dyn),
}

type Res<T> = Result<T, AbortReason>;

fn type_err<T>(msg: impl Into<String>) -> Res<T> {
    Err(AbortReason::DynTypeError(msg.into()))
}

enum PendingOp {
    Listen,
    Get(String),
    Post(String, Json),
}

struct PendingEvent {
    handler: usize,
    env: Dyn,
    op: PendingOp,
}

#[derive(Debug, Clone)]
pub struct ExecResult {
    pub outcome: ExecOutcome,
    pub globals: IndexMap<String, Json>,
    pub stats: ArenaStats,
    pub events: usize,
}

/// One request's run through a [`CompiledProgram`].
pub struct Execution<'a> {
    cp: &'a CompiledProgram,
    arena: &'a mut RequestArena,
    upstream: &'a dyn UpstreamClient,
    request: Option<Json>,
    globals: IndexMap<String, Addr>,
    init_globals: Vec<(String, Json)>,
    scopes: Vec<Vec<(String, Addr)>>,
    queue: VecDeque<PendingEvent>,
    response: Option<Json>,
    events: usize,
}

impl<'a> Execution<'a> {
    pub fn new(cp: &'a CompiledProgram, arena: &'a mut RequestArena, upstream: &'a dyn UpstreamClient) -> Self {
        Execution {
            cp,
            arena,
            upstream,
            request: None,
            globals: IndexMap::new(),
            init_globals: Vec::new(),
            scopes: Vec::new(),
            queue: VecDeque::new(),
            response: None,
            events: 0,
        }
    }

    pub fn request(mut self, req: &Request) -> Self {
        self.request = Some(req.to_json());
        self
    }

    /// Declares a host global with an initial value.
    pub fn global(mut self, name: &str, v: Json) -> Self {
        self.init_globals.push((name.to_string(), v));
        self
    }

    pub fn run(mut self) -> ExecResult {
        let outcome = match self.run_inner() {
            Ok(()) => match self.response.take() {
                Some(r) => ExecOutcome::Responded(r),
                None if self.request.is_none() => ExecOutcome::Pending,
                None => ExecOutcome::Aborted(AbortReason::Divergence("no response".into())),
            },
            Err(reason) => ExecOutcome::Aborted(reason),
        };
        let globals = self
            .globals
            .iter()
            .map(|(k, a)| (k.clone(), self.arena.to_json(&self.arena.read(*a))))
            .collect();
        let stats = self.arena.end_request();
        ExecResult {
            outcome,
            globals,
            stats,
            events: self.events,
        }
    }

    fn run_inner(&mut self) -> Res<()> {
        for (k, v) in std::mem::take(&mut self.init_globals) {
            let v = self.arena.alloc_json(&v)?;
            let a = self.arena.cell(v)?;
            self.globals.insert(k, a);
        }
        self.execute_event(0, Dyn::Undefined, Dyn::Undefined)?;
        while let Some(ev) = self.queue.pop_front() {
            let payload = match &ev.op {
                PendingOp::Listen => match &self.request {
                    Some(r) => {
                        let r = r.clone();
                        self.arena.alloc_json(&r)?
                    }
                    None => continue,
                },
                PendingOp::Get(url) => match self.upstream.get(url) {
                    Some(j) => self.arena.alloc_json(&j)?,
                    None => Dyn::Undefined,
                },
                PendingOp::Post(url, body) => match self.upstream.post(url, body) {
                    Some(j) => self.arena.alloc_json(&j)?,
                    None => Dyn::Undefined,
                },
            };
            self.events += 1;
            self.execute_event(ev.handler, payload, ev.env)?;
        }
        Ok(())
    }

    /// Runs handler `n` with its argument and the env stored when its event
    /// was issued.
    fn execute_event(&mut self, n: usize, arg: Dyn, env: Dyn) -> Res<()> {
        self.arena.check_budget()?;
        let handlers = self.cp.handlers.clone();
        let h = handlers
            .get(n)
            .ok_or_else(|| AbortReason::Divergence(format!("no handler {n}")))?;
        let arg = self.arena.cell(arg)?;
        let env = self.arena.cell(env)?;
        self.scopes = vec![vec![(h.arg_id.clone(), arg), (h.env_id.clone(), env)]];
        match self.exec(&h.body)? {
            Flow::Normal => Ok(()),
            Flow::Break(l, _) => type_err(format!("break to `{l}` escaped handler {n}")),
        }
    }

    fn lookup(&self, name: &str) -> Res<Addr> {
        for scope in self.scopes.iter().rev() {
            if let Some((_, a)) = scope.iter().rev().find(|(n, _)| n == name) {
                return Ok(*a);
            }
        }
        self.globals
            .get(name)
            .copied()
            .ok_or_else(|| AbortReason::DynTypeError(format!("`{name}` is not defined")))
    }

    fn scoped(&mut self, t: &Trace) -> Res<Flow> {
        self.scopes.push(Vec::new());
        let r = self.exec(t);
        self.scopes.pop();
        r
    }

    fn exec(&mut self, t: &Trace) -> Res<Flow> {
        match t {
            Trace::Unknown => return Err(AbortReason::Unknown),
            Trace::Block { body } => {
                self.scopes.push(Vec::new());
                for s in body {
                    match self.exec(s) {
                        Ok(Flow::Normal) => {}
                        other => {
                            self.scopes.pop();
                            return other;
                        }
                    }
                }
                self.scopes.pop();
            }
            Trace::If { cond, then, els } => {
                let branch = if self.eval(cond)?.truthy() { then } else { els };
                return self.scoped(branch);
            }
            Trace::While { cond, body } => loop {
                self.arena.check_budget()?;
                if !self.eval(cond)?.truthy() {
                    break;
                }
                match self.scoped(body)? {
                    Flow::Normal => {}
                    brk => return Ok(brk),
                }
            },
            Trace::Let { name, value } => {
                let v = self.eval(value)?;
                let a = self.arena.cell(v)?;
                self.scopes.last_mut().expect("scope").push((name.clone(), a));
            }
            Trace::Set { target, value } => {
                let v = self.eval(value)?;
                self.assign(target, v)?;
            }
            Trace::Label { .. } | Trace::Event { .. } | Trace::Respond { .. } => {
                self.eval(t)?;
            }
            Trace::Break { label, value } => {
                let v = self.eval(value)?;
                return Ok(Flow::Break(label.clone(), v));
            }
            _ => {
                self.eval(t)?;
            }
        }
        Ok(Flow::Normal)
    }

    fn eval(&mut self, t: &Trace) -> Res<Dyn> {
        Ok(match t {
            Trace::Unknown => return Err(AbortReason::Unknown),
            Trace::Const { value } => Dyn::from_lit(value),
            Trace::Var { name } => self.arena.read(self.lookup(name)?),
            Trace::Binary { op, left, right } => {
                let l = self.eval(left)?;
                match op {
                    BinOp::And if !l.truthy() => return Ok(l),
                    BinOp::Or if l.truthy() => return Ok(l),
                    _ => {}
                }
                let r = self.eval(right)?;
                match ops::binop(*op, l.operand(), r.operand())? {
                    OpResult::Left => l,
                    OpResult::Right => r,
                    OpResult::Prim(p) => self.prim(p)?,
                }
            }
            Trace::Unary { op, operand } => {
                let v = self.eval(operand)?;
                let p = ops::unop(*op, v.operand())?;
                self.prim(p)?
            }
            Trace::Member { object, property } => {
                let o = self.eval(object)?;
                let p = self.eval(property)?;
                self.get_member(&o, &p)?
            }
            Trace::Object { fields } => {
                let mut m = IndexMap::with_capacity(fields.len());
                for f in fields {
                    let v = self.eval(&f.value)?;
                    m.insert(f.name.clone(), v);
                }
                Dyn::Object(self.arena.alloc(Slot::Object(m))?)
            }
            Trace::Array { items } => {
                let items = items.iter().map(|v| self.eval(v)).collect::<Res<Vec<_>>>()?;
                Dyn::Array(self.arena.alloc(Slot::Array(items))?)
            }
            Trace::Env { entries } => {
                let mut env = Vec::with_capacity(entries.len());
                for e in entries {
                    let Dyn::Address(a) = self.eval(&e.addr)? else {
                        return type_err("env entry is not an address");
                    };
                    env.push((e.name.clone(), a));
                }
                Dyn::Env(self.arena.alloc(Slot::Env(env))?)
            }
            Trace::VarAddr { name } => Dyn::Address(self.lookup(name)?),
            Trace::EnvAddr { env, name } => Dyn::Address(self.env_slot(env, name)?),
            Trace::EnvRead { env, name } => {
                let a = self.env_slot(env, name)?;
                self.arena.read(a)
            }
            Trace::Label { label, body } => match self.scoped(body)? {
                Flow::Normal => Dyn::Undefined,
                Flow::Break(l, v) if l == *label => v,
                Flow::Break(l, _) => return type_err(format!("break to `{l}` escaped label `{label}`")),
            },
            Trace::Event {
                event,
                arg,
                env,
                handler,
            } => {
                let arg = self.eval(arg)?;
                let env = self.eval(env)?;
                if !matches!(env, Dyn::Env(_)) {
                    return type_err("callback is not a function");
                }
                let op = match event {
                    EventKind::Listen => PendingOp::Listen,
                    EventKind::Get => match arg {
                        Dyn::Str(s) => PendingOp::Get(s.to_string()),
                        _ => return type_err("get: url must be a string"),
                    },
                    EventKind::Post => {
                        let Dyn::Object(o) = arg else {
                            return type_err("post: argument must be an object with `url` and `body`");
                        };
                        let Slot::Object(m) = &self.arena.slots[o as usize] else {
                            unreachable!("object address")
                        };
                        let url = match m.get("url") {
                            Some(Dyn::Str(s)) => s.to_string(),
                            _ => return type_err("post: `url` must be a string"),
                        };
                        let body = m.get("body").map_or(Json::Null, |b| self.arena.to_json(b));
                        PendingOp::Post(url, body)
                    }
                };
                self.queue.push_back(PendingEvent {
                    handler: *handler,
                    env,
                    op,
                });
                Dyn::Undefined
            }
            Trace::Respond { value } => {
                let v = self.eval(value)?;
                if self.response.is_some() {
                    return Err(AbortReason::Divergence("respond called twice".into()));
                }
                self.response = Some(self.arena.to_json(&v));
                Dyn::Undefined
            }
            Trace::Block { .. } | Trace::If { .. } | Trace::While { .. } | Trace::Let { .. } | Trace::Set { .. } | Trace::Break { .. } => {
                return type_err(format!("statement in expression position: {t}"))
            }
        })
    }

    fn prim(&mut self, p: Prim) -> Res<Dyn> {
        Ok(match p {
            Prim::Undefined => Dyn::Undefined,
            Prim::Bool(b) => Dyn::Bool(b),
            Prim::Int(i) => Dyn::Int(i),
            Prim::Float(x) => Dyn::Float(x),
            Prim::Str(s) => {
                self.arena.charge(s.len() + 16)?;
                Dyn::Str(Rc::from(s))
            }
        })
    }

    fn env_slot(&mut self, env: &Trace, name: &str) -> Res<Addr> {
        let Dyn::Env(e) = self.eval(env)? else {
            return type_err(format!("reading `{name}` from a non-env"));
        };
        match &self.arena.slots[e as usize] {
            Slot::Env(entries) => entries
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, a)| *a)
                .ok_or_else(|| AbortReason::DynTypeError(format!("env has no `{name}`"))),
            _ => unreachable!("env address"),
        }
    }

    fn get_member(&mut self, o: &Dyn, p: &Dyn) -> Res<Dyn> {
        let key = p.operand();
        match o {
            Dyn::Object(a) => {
                let k = ops::property_key(&key)?;
                let Slot::Object(m) = &self.arena.slots[*a as usize] else {
                    unreachable!("object address")
                };
                Ok(m.get(&k).cloned().unwrap_or(Dyn::Undefined))
            }
            Dyn::Array(a) => {
                let Slot::Array(items) = &self.arena.slots[*a as usize] else {
                    unreachable!("array address")
                };
                if matches!(key, Operand::Str("length")) {
                    return Ok(Dyn::Int(items.len() as i64));
                }
                Ok(ops::array_index(&key)
                    .and_then(|i| items.get(i).cloned())
                    .unwrap_or(Dyn::Undefined))
            }
            Dyn::Str(s) => {
                if matches!(key, Operand::Str("length")) {
                    return Ok(Dyn::Int(s.chars().count() as i64));
                }
                Ok(ops::array_index(&key)
                    .and_then(|i| s.chars().nth(i))
                    .map_or(Dyn::Undefined, |c| Dyn::Str(Rc::from(c.encode_utf8(&mut [0; 4]) as &str))))
            }
            Dyn::Undefined => type_err(format!(
                "cannot read property {} of undefined",
                ops::property_key(&key).unwrap_or_default()
            )),
            _ => Ok(Dyn::Undefined),
        }
    }

    fn assign(&mut self, target: &Trace, v: Dyn) -> Res<()> {
        match target {
            Trace::Var { name } => {
                let a = self.lookup(name)?;
                self.arena.write(a, v);
                Ok(())
            }
            Trace::EnvRead { env, name } => {
                let a = self.env_slot(env, name)?;
                self.arena.write(a, v);
                Ok(())
            }
            Trace::Member { object, property } => {
                let o = self.eval(object)?;
                let p = self.eval(property)?;
                self.set_member(&o, &p, v)
            }
            _ => type_err("invalid assignment target"),
        }
    }

    fn set_member(&mut self, o: &Dyn, p: &Dyn, v: Dyn) -> Res<()> {
        let key = p.operand();
        match o {
            Dyn::Object(a) => {
                let k = ops::property_key(&key)?;
                self.arena.charge(k.len() + SLOT_BYTES)?;
                let Slot::Object(m) = &mut self.arena.slots[*a as usize] else {
                    unreachable!("object address")
                };
                m.insert(k, v);
                Ok(())
            }
            Dyn::Array(a) => {
                let Some(i) = ops::array_index(&key) else {
                    return type_err("array index must be a non-negative integer");
                };
                let len = match &self.arena.slots[*a as usize] {
                    Slot::Array(items) => items.len(),
                    _ => unreachable!("array address"),
                };
                if i >= len {
                    self.arena.charge(16 * (i + 1 - len))?;
                }
                let Slot::Array(items) = &mut self.arena.slots[*a as usize] else {
                    unreachable!("array address")
                };
                if i >= items.len() {
                    items.resize(i + 1, Dyn::Undefined);
                }
                items[i] = v;
                Ok(())
            }
            other => type_err(format!("cannot set a property on {}", other.operand().type_name())),
        }
    }
}

/// Serves one request from `cp`, clearing `arena` afterwards.
pub fn execute_request(
    cp: &CompiledProgram,
    req: &Request,
    upstream: &dyn UpstreamClient,
    arena: &mut RequestArena,
) -> ExecResult {
    Execution::new(cp, arena, upstream).request(req).run()
}

/// One JSON-lines record per executed request.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StatsRecord {
    pub request_id: u64,
    pub outcome: String,
    pub instructions: u64,
    pub peak_bytes: usize,
    pub latency_us: u128,
}

impl StatsRecord {
    pub fn new(request_id: u64, r: &ExecResult, started: Instant) -> Self {
        StatsRecord {
            request_id,
            outcome: match &r.outcome {
                ExecOutcome::Responded(_) => "responded".into(),
                ExecOutcome::Pending => "pending".into(),
                ExecOutcome::Aborted(a) => format!("aborted: {a}"),
            },
            instructions: r.stats.instructions,
            peak_bytes: r.stats.peak_bytes,
            latency_us: started.elapsed().as_micros(),
        }
    }
}
