//! Incremental trace construction.
//!
//! [`BuilderState`] is a zipper over the trace of the running handler: `c`
//! is the subtree in focus and `κ` the stack of frames that reconstruct the
//! whole tree around it. Instrumented code drives it through the operations
//! below, one per recorded statement or structural step.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::trace::{EventKind, Handler, HandlerTable, Trace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    /// The program took a path inconsistent with the trace recorded so far.
    #[error("trace divergence: {0}")]
    Divergence(String),
    /// The builder was driven in an order the compiler never produces.
    #[error("trace corruption: {0}")]
    Corruption(String),
}

/// One frame of the trace context.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Frame {
    /// Inside a block: `done` precedes the focus and `todo` follows it.
    Seq { done: Vec<Trace>, todo: VecDeque<Trace> },
    /// Inside the true branch of `if (cond)`; `els` is the other branch.
    IfTrue { cond: Trace, els: Trace },
    IfFalse { cond: Trace, then: Trace },
    While { cond: Trace },
    Label { label: String },
    /// Inside the initializer of `let name = ...`.
    Named { name: String },
}

impl Frame {
    /// Wraps `c` in this frame.
    pub fn fill(&self, c: Trace) -> Trace {
        match self {
            Frame::Seq { done, todo } => {
                let mut body = done.clone();
                body.push(c);
                body.extend(todo.iter().cloned());
                Trace::Block { body }
            }
            Frame::IfTrue { cond, els } => Trace::if_(cond.clone(), c, els.clone()),
            Frame::IfFalse { cond, then } => Trace::if_(cond.clone(), then.clone(), c),
            Frame::While { cond } => Trace::While {
                cond: Box::new(cond.clone()),
                body: Box::new(c),
            },
            Frame::Label { label } => Trace::label(label.clone(), c),
            Frame::Named { name } => Trace::let_(name.clone(), c),
        }
    }

    fn fill_owned(self, c: Trace) -> Trace {
        match self {
            Frame::Seq { mut done, todo } => {
                done.push(c);
                done.extend(todo);
                Trace::Block { body: done }
            }
            Frame::IfTrue { cond, els } => Trace::if_(cond, c, els),
            Frame::IfFalse { cond, then } => Trace::if_(cond, then, c),
            Frame::While { cond } => Trace::While {
                cond: Box::new(cond),
                body: Box::new(c),
            },
            Frame::Label { label } => Trace::label(label, c),
            Frame::Named { name } => Trace::let_(name, c),
        }
    }
}

/// Reconstructs the whole tree from a focus and a context (innermost frame
/// last).
pub fn plug(c: &Trace, context: &[Frame]) -> Trace {
    context.iter().rev().fold(c.clone(), |acc, frame| frame.fill(acc))
}

/// A statement-level leaf to record at the focus.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Leaf {
    Let { name: String, value: Trace },
    Set { target: Trace, value: Trace },
    Break { label: String, value: Trace },
    Respond { value: Trace },
    /// An empty block.
    Empty,
}

impl Leaf {
    pub fn into_trace(self) -> Trace {
        match self {
            Leaf::Let { name, value } => Trace::let_(name, value),
            Leaf::Set { target, value } => Trace::set(target, value),
            Leaf::Break { label, value } => Trace::brk(label, value),
            Leaf::Respond { value } => Trace::Respond { value: Box::new(value) },
            Leaf::Empty => Trace::Block { body: vec![] },
        }
    }
}

/// The tracing runtime state: focus, context, argument stack and handlers.
#[derive(Debug, Clone, PartialEq)]
pub struct BuilderState {
    pub current: Trace,
    /// Innermost frame last.
    pub context: Vec<Frame>,
    /// Top of stack last.
    pub args: Vec<Trace>,
    pub handlers: HandlerTable,
}

impl Default for BuilderState {
    fn default() -> Self {
        BuilderState::new()
    }
}

fn divergence<T>(msg: String) -> Result<T, TraceError> {
    Err(TraceError::Divergence(msg))
}

impl BuilderState {
    pub fn new() -> Self {
        BuilderState {
            current: Trace::Unknown,
            context: Vec::new(),
            args: Vec::new(),
            handlers: HandlerTable::new(),
        }
    }

    /// Resumes from a previously extracted table.
    pub fn from_table(handlers: HandlerTable) -> Self {
        BuilderState {
            current: Trace::Unknown,
            context: Vec::new(),
            args: Vec::new(),
            handlers,
        }
    }

    /// The whole tree around the focus.
    pub fn plugged(&self) -> Trace {
        plug(&self.current, &self.context)
    }

    /// The argument stack, top first.
    pub fn args_top_first(&self) -> Vec<Trace> {
        self.args.iter().rev().cloned().collect()
    }

    /// Records a statement at the focus.
    pub fn record(&mut self, leaf: Leaf) -> Result<(), TraceError> {
        let t = leaf.into_trace();
        if self.current.is_unknown() {
            self.current = t;
            Ok(())
        } else if self.current == t {
            Ok(())
        } else {
            divergence(format!("expected `{}`, recorded `{t}`", self.current))
        }
    }

    /// Enters a block of `n` statements, focusing on the first.
    pub fn enter_seq(&mut self, n: usize) -> Result<(), TraceError> {
        if n == 0 {
            return Err(TraceError::Corruption("enterSeq(0)".into()));
        }
        let mut todo: VecDeque<Trace> = match std::mem::take(&mut self.current) {
            Trace::Unknown => std::iter::repeat_n(Trace::Unknown, n).collect(),
            Trace::Block { body } if body.len() == n => body.into(),
            other => {
                let msg = format!("expected a block of {n} statements, found `{other}`");
                self.current = other;
                return divergence(msg);
            }
        };
        self.current = todo.pop_front().expect("n > 0");
        self.context.push(Frame::Seq { done: Vec::new(), todo });
        Ok(())
    }

    /// Moves the focus to the next statement of the enclosing block.
    pub fn seq_next(&mut self) -> Result<(), TraceError> {
        match self.context.last_mut() {
            Some(Frame::Seq { done, todo }) if !todo.is_empty() => {
                let next = todo.pop_front().expect("non-empty");
                done.push(std::mem::replace(&mut self.current, next));
                Ok(())
            }
            other => Err(TraceError::Corruption(format!("seqNext outside a block: {other:?}"))),
        }
    }

    fn check_cond(&self, kind: &str, found: &Trace, cond: &Trace) -> Result<(), TraceError> {
        if found == cond {
            Ok(())
        } else {
            divergence(format!("{kind}: condition `{cond}` does not match recorded `{found}`"))
        }
    }

    pub fn if_true(&mut self, cond: Trace) -> Result<(), TraceError> {
        match std::mem::take(&mut self.current) {
            Trace::Unknown => {
                self.context.push(Frame::IfTrue {
                    cond,
                    els: Trace::Unknown,
                });
            }
            Trace::If { cond: c, then, els } => {
                if let Err(e) = self.check_cond("ifTrue", &c, &cond) {
                    self.current = Trace::If { cond: c, then, els };
                    return Err(e);
                }
                self.current = *then;
                self.context.push(Frame::IfTrue { cond: *c, els: *els });
            }
            other => {
                let msg = format!("ifTrue: expected a conditional, found `{other}`");
                self.current = other;
                return divergence(msg);
            }
        }
        Ok(())
    }

    pub fn if_false(&mut self, cond: Trace) -> Result<(), TraceError> {
        match std::mem::take(&mut self.current) {
            Trace::Unknown => {
                self.context.push(Frame::IfFalse {
                    cond,
                    then: Trace::Unknown,
                });
            }
            Trace::If { cond: c, then, els } => {
                if let Err(e) = self.check_cond("ifFalse", &c, &cond) {
                    self.current = Trace::If { cond: c, then, els };
                    return Err(e);
                }
                self.current = *els;
                self.context.push(Frame::IfFalse { cond: *c, then: *then });
            }
            other => {
                let msg = format!("ifFalse: expected a conditional, found `{other}`");
                self.current = other;
                return divergence(msg);
            }
        }
        Ok(())
    }

    /// Enters a loop; the focus becomes the loop body.
    pub fn enter_while(&mut self, cond: Trace) -> Result<(), TraceError> {
        match std::mem::take(&mut self.current) {
            Trace::Unknown => self.context.push(Frame::While { cond }),
            Trace::While { cond: c, body } => {
                if let Err(e) = self.check_cond("while", &c, &cond) {
                    self.current = Trace::While { cond: c, body };
                    return Err(e);
                }
                self.current = *body;
                self.context.push(Frame::While { cond: *c });
            }
            other => {
                let msg = format!("while: expected a loop, found `{other}`");
                self.current = other;
                return divergence(msg);
            }
        }
        Ok(())
    }

    pub fn enter_label(&mut self, label: &str) -> Result<(), TraceError> {
        match std::mem::take(&mut self.current) {
            Trace::Unknown => {}
            Trace::Label { label: l, body } if l == label => self.current = *body,
            other => {
                let msg = format!("label: expected `{label}: ...`, found `{other}`");
                self.current = other;
                return divergence(msg);
            }
        }
        self.context.push(Frame::Label { label: label.to_string() });
        Ok(())
    }

    /// Focuses on the initializer of `let name = ...`.
    pub fn enter_named(&mut self, name: &str) -> Result<(), TraceError> {
        match std::mem::take(&mut self.current) {
            Trace::Unknown => {}
            Trace::Let { name: n, value } if n == name => self.current = *value,
            other => {
                let msg = format!("named: expected `let {name} = ...`, found `{other}`");
                self.current = other;
                return divergence(msg);
            }
        }
        self.context.push(Frame::Named { name: name.to_string() });
        Ok(())
    }

    /// Folds the focus into the innermost frame.
    pub fn pop(&mut self) -> Result<(), TraceError> {
        let frame = self
            .context
            .pop()
            .ok_or_else(|| TraceError::Corruption("pop with an empty context".into()))?;
        let c = std::mem::take(&mut self.current);
        self.current = frame.fill_owned(c);
        Ok(())
    }

    /// Pops frames up to and including `Label(label)`.
    pub fn pop_to(&mut self, label: &str) -> Result<(), TraceError> {
        if !self
            .context
            .iter()
            .any(|f| matches!(f, Frame::Label { label: l } if l == label))
        {
            return Err(TraceError::Corruption(format!("popTo: no enclosing label `{label}`")));
        }
        loop {
            let done = matches!(self.context.last(), Some(Frame::Label { label: l }) if l == label);
            self.pop()?;
            if done {
                return Ok(());
            }
        }
    }

    pub fn push_arg(&mut self, t: Trace) {
        self.args.push(t);
    }

    pub fn pop_arg(&mut self) -> Result<Trace, TraceError> {
        self.args
            .pop()
            .ok_or_else(|| TraceError::Corruption("popArg on an empty argument stack".into()))
    }

    /// Records an event at the focus and allocates its handler.
    pub fn new_handler(&mut self, event: EventKind, arg: Trace, env: Trace) -> Result<usize, TraceError> {
        match &self.current {
            Trace::Unknown => {
                let n = self.handlers.next_id();
                self.handlers.insert(
                    n,
                    Handler {
                        arg_id: format!("$arg{n}"),
                        env_id: format!("$env{n}"),
                        body: Trace::Unknown,
                    },
                );
                self.current = Trace::Event {
                    event,
                    arg: Box::new(arg),
                    env: Box::new(env),
                    handler: n,
                };
                Ok(n)
            }
            Trace::Event {
                event: e,
                arg: a,
                env: v,
                handler,
            } if *e == event && **a == arg && **v == env => {
                if self.handlers.get(*handler).is_none() {
                    return Err(TraceError::Corruption(format!("event refers to missing handler {handler}")));
                }
                Ok(*handler)
            }
            other => divergence(format!(
                "expected `{other}`, issued event({}, {arg}, {env})",
                event.name()
            )),
        }
    }

    fn require_idle(&self, op: &str) -> Result<(), TraceError> {
        if self.context.is_empty() && self.args.is_empty() {
            Ok(())
        } else {
            Err(TraceError::Corruption(format!(
                "{op} with {} frames and {} arguments outstanding",
                self.context.len(),
                self.args.len()
            )))
        }
    }

    /// Focuses on the main handler's body.
    pub fn load_main(&mut self) -> Result<(), TraceError> {
        self.require_idle("loadMain")?;
        self.current = self.handlers.get(0).expect("main handler").body.clone();
        Ok(())
    }

    /// Focuses on handler `n`, pushing its argument and then its env so that
    /// the callee pops the env first.
    pub fn load_handler(&mut self, n: usize) -> Result<(), TraceError> {
        self.load_handler_padded(n, 0)
    }

    /// Like [`Self::load_handler`] for callbacks with `1 + pad` parameters:
    /// the extra parameters are bound to `undefined`.
    pub fn load_handler_padded(&mut self, n: usize, pad: usize) -> Result<(), TraceError> {
        self.require_idle("loadHandler")?;
        let h = self
            .handlers
            .get(n)
            .ok_or_else(|| TraceError::Corruption(format!("loadHandler: no handler {n}")))?;
        let (arg, env, body) = (Trace::var(h.arg_id.clone()), Trace::var(h.env_id.clone()), h.body.clone());
        self.args.extend(std::iter::repeat_n(Trace::undefined(), pad));
        self.args.push(arg);
        self.args.push(env);
        self.current = body;
        Ok(())
    }

    /// Stores the focus back into handler `n`.
    pub fn save_handler(&mut self, n: usize) -> Result<(), TraceError> {
        if !self.context.is_empty() {
            return Err(TraceError::Corruption(format!(
                "saveHandler with {} frames outstanding",
                self.context.len()
            )));
        }
        let h = self
            .handlers
            .get_mut(n)
            .ok_or_else(|| TraceError::Corruption(format!("saveHandler: no handler {n}")))?;
        if !self.current.refines(&h.body) {
            return divergence(format!("handler {n} body would lose recorded paths"));
        }
        h.body = self.current.clone();
        Ok(())
    }
}
