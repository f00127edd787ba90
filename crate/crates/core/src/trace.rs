//! The trace language and handler tables.
//!
//! A trace tree records every path a function has been observed to take.
//! Paths that have not been observed are [`Trace::Unknown`].

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ast::{BinOp, Lit, UnOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Listen,
    Get,
    Post,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Listen => "listen",
            EventKind::Get => "get",
            EventKind::Post => "post",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvEntry {
    pub name: String,
    pub addr: Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub name: String,
    pub value: Trace,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Trace {
    #[serde(rename = "constant")]
    Const { value: Lit },
    #[serde(rename = "var")]
    Var { name: String },
    #[serde(rename = "binop")]
    Binary {
        op: BinOp,
        left: Box<Trace>,
        right: Box<Trace>,
    },
    #[serde(rename = "unop")]
    Unary { op: UnOp, operand: Box<Trace> },
    #[serde(rename = "member")]
    Member {
        object: Box<Trace>,
        property: Box<Trace>,
    },
    #[serde(rename = "object")]
    Object { fields: Vec<Field> },
    #[serde(rename = "array")]
    Array { items: Vec<Trace> },
    #[serde(rename = "block")]
    Block { body: Vec<Trace> },
    #[serde(rename = "if")]
    If {
        cond: Box<Trace>,
        then: Box<Trace>,
        #[serde(rename = "else")]
        els: Box<Trace>,
    },
    #[serde(rename = "while")]
    While { cond: Box<Trace>, body: Box<Trace> },
    #[serde(rename = "let")]
    Let { name: String, value: Box<Trace> },
    /// Assignment; the target is a variable, an env read or a member.
    #[serde(rename = "set")]
    Set { target: Box<Trace>, value: Box<Trace> },
    #[serde(rename = "label")]
    Label { label: String, body: Box<Trace> },
    #[serde(rename = "break")]
    Break { label: String, value: Box<Trace> },
    #[default]
    #[serde(rename = "unknown")]
    Unknown,
    /// Issues an asynchronous event whose callback is handler `handler`.
    #[serde(rename = "event")]
    Event {
        event: EventKind,
        arg: Box<Trace>,
        env: Box<Trace>,
        handler: usize,
    },
    #[serde(rename = "respond")]
    Respond { value: Box<Trace> },
    /// A closure environment: names bound to addresses.
    #[serde(rename = "env")]
    Env { entries: Vec<EnvEntry> },
    /// Reads the variable stored at `env.name`.
    #[serde(rename = "envRead")]
    EnvRead { env: Box<Trace>, name: String },
    /// The address stored at `env.name`.
    #[serde(rename = "envAddr")]
    EnvAddr { env: Box<Trace>, name: String },
    /// The address of a variable in scope.
    #[serde(rename = "varAddr")]
    VarAddr { name: String },
}

impl Trace {
    pub fn var(name: impl Into<String>) -> Trace {
        Trace::Var { name: name.into() }
    }

    pub fn int(i: i64) -> Trace {
        Trace::Const { value: Lit::Int(i) }
    }

    pub fn string(s: impl Into<String>) -> Trace {
        Trace::Const { value: Lit::Str(s.into()) }
    }

    pub fn undefined() -> Trace {
        Trace::Const {
            value: Lit::Undefined,
        }
    }

    pub fn binary(op: BinOp, left: Trace, right: Trace) -> Trace {
        Trace::Binary {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn let_(name: impl Into<String>, value: Trace) -> Trace {
        Trace::Let {
            name: name.into(),
            value: Box::new(value),
        }
    }

    pub fn set(target: Trace, value: Trace) -> Trace {
        Trace::Set {
            target: Box::new(target),
            value: Box::new(value),
        }
    }

    pub fn label(label: impl Into<String>, body: Trace) -> Trace {
        Trace::Label {
            label: label.into(),
            body: Box::new(body),
        }
    }

    pub fn brk(label: impl Into<String>, value: Trace) -> Trace {
        Trace::Break {
            label: label.into(),
            value: Box::new(value),
        }
    }

    pub fn if_(cond: Trace, then: Trace, els: Trace) -> Trace {
        Trace::If {
            cond: Box::new(cond),
            then: Box::new(then),
            els: Box::new(els),
        }
    }

    pub fn block(body: Vec<Trace>) -> Trace {
        Trace::Block { body }
    }

    pub fn env_read(env: Trace, name: impl Into<String>) -> Trace {
        Trace::EnvRead {
            env: Box::new(env),
            name: name.into(),
        }
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Trace::Unknown)
    }

    fn children(&self) -> Vec<&Trace> {
        match self {
            Trace::Const { .. } | Trace::Var { .. } | Trace::Unknown | Trace::VarAddr { .. } => vec![],
            Trace::Binary { left, right, .. } => vec![left, right],
            Trace::Unary { operand, .. } => vec![operand],
            Trace::Member { object, property } => vec![object, property],
            Trace::Object { fields } => fields.iter().map(|f| &f.value).collect(),
            Trace::Array { items } => items.iter().collect(),
            Trace::Block { body } => body.iter().collect(),
            Trace::If { cond, then, els } => vec![cond, then, els],
            Trace::While { cond, body } => vec![cond, body],
            Trace::Let { value, .. } | Trace::Break { value, .. } | Trace::Respond { value } => vec![value],
            Trace::Set { target, value } => vec![target, value],
            Trace::Label { body, .. } => vec![body],
            Trace::Event { arg, env, .. } => vec![arg, env],
            Trace::Env { entries } => entries.iter().map(|e| &e.addr).collect(),
            Trace::EnvRead { env, .. } | Trace::EnvAddr { env, .. } => vec![env],
        }
    }

    /// Number of `unknown` nodes in the tree.
    pub fn unknown_count(&self) -> usize {
        match self {
            Trace::Unknown => 1,
            other => other.children().into_iter().map(Trace::unknown_count).sum(),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Trace::size).sum::<usize>()
    }

    /// True if `self` is `old` with zero or more `unknown` subtrees replaced.
    pub fn refines(&self, old: &Trace) -> bool {
        if old.is_unknown() {
            return true;
        }
        if std::mem::discriminant(self) != std::mem::discriminant(old) {
            return false;
        }
        let same_shape = match (self, old) {
            (Trace::Const { value: a }, Trace::Const { value: b }) => a == b,
            (Trace::Var { name: a }, Trace::Var { name: b })
            | (Trace::VarAddr { name: a }, Trace::VarAddr { name: b })
            | (Trace::Let { name: a, .. }, Trace::Let { name: b, .. })
            | (Trace::Label { label: a, .. }, Trace::Label { label: b, .. })
            | (Trace::Break { label: a, .. }, Trace::Break { label: b, .. })
            | (Trace::EnvRead { name: a, .. }, Trace::EnvRead { name: b, .. })
            | (Trace::EnvAddr { name: a, .. }, Trace::EnvAddr { name: b, .. }) => a == b,
            (Trace::Binary { op: a, .. }, Trace::Binary { op: b, .. }) => a == b,
            (Trace::Unary { op: a, .. }, Trace::Unary { op: b, .. }) => a == b,
            (Trace::Object { fields: a }, Trace::Object { fields: b }) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.name == y.name)
            }
            (Trace::Env { entries: a }, Trace::Env { entries: b }) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.name == y.name)
            }
            (Trace::Array { items: a }, Trace::Array { items: b }) => a.len() == b.len(),
            (Trace::Block { body: a }, Trace::Block { body: b }) => a.len() == b.len(),
            (
                Trace::Event {
                    event: e1, handler: h1, ..
                },
                Trace::Event {
                    event: e2, handler: h2, ..
                },
            ) => e1 == e2 && h1 == h2,
            _ => true,
        };
        same_shape
            && self
                .children()
                .into_iter()
                .zip(old.children())
                .all(|(n, o)| n.refines(o))
    }

    /// Structural well-formedness: every `break` is inside a label of the
    /// same name, and statement positions hold statements.
    pub fn check_well_formed(&self) -> Result<(), String> {
        fn go(t: &Trace, labels: &mut Vec<String>) -> Result<(), String> {
            match t {
                Trace::Break { label, value } => {
                    if !labels.iter().any(|l| l == label) {
                        return Err(format!("break to unbound label `{label}`"));
                    }
                    go(value, labels)
                }
                Trace::Label { label, body } => {
                    labels.push(label.clone());
                    let r = go(body, labels);
                    labels.pop();
                    r
                }
                Trace::Set { target, value } => {
                    if !matches!(
                        **target,
                        Trace::Var { .. } | Trace::EnvRead { .. } | Trace::Member { .. } | Trace::Unknown
                    ) {
                        return Err(format!("invalid assignment target {target}"));
                    }
                    go(target, labels)?;
                    go(value, labels)
                }
                Trace::Let { name, value } => {
                    if name.is_empty() {
                        return Err("let with empty name".into());
                    }
                    go(value, labels)
                }
                other => other.children().into_iter().try_for_each(|c| go(c, labels)),
            }
        }
        go(self, &mut Vec::new())
    }
}

// Compact single-line rendering close to the notation used in diagrams.
impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trace::Const { value } => write!(f, "{value}"),
            Trace::Var { name } => f.write_str(name),
            Trace::Binary { op, left, right } => write!(f, "({left} {} {right})", op.symbol()),
            Trace::Unary { op, operand } => write!(f, "{}{operand}", op.symbol()),
            Trace::Member { object, property } => write!(f, "{object}[{property}]"),
            Trace::Object { fields } => {
                f.write_str("{")?;
                for (i, fl) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}: {}", fl.name, fl.value)?;
                }
                f.write_str("}")
            }
            Trace::Array { items } => {
                f.write_str("[")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str("]")
            }
            Trace::Block { body } => {
                f.write_str("{")?;
                for t in body {
                    write!(f, " {t}")?;
                    if !matches!(t, Trace::Block { .. } | Trace::If { .. } | Trace::While { .. } | Trace::Label { .. }) {
                        f.write_str(";")?;
                    }
                }
                f.write_str(" }")
            }
            Trace::If { cond, then, els } => write!(f, "if ({cond}) {then} else {els}"),
            Trace::While { cond, body } => write!(f, "while ({cond}) {body}"),
            Trace::Let { name, value } => write!(f, "let {name} = {value}"),
            Trace::Set { target, value } => write!(f, "{target} = {value}"),
            Trace::Label { label, body } => write!(f, "{label}: {body}"),
            Trace::Break { label, value } => write!(f, "break {label} {value}"),
            Trace::Unknown => f.write_str("UNKNOWN"),
            Trace::Event {
                event,
                arg,
                env,
                handler,
            } => write!(f, "event({}, {arg}, {env}, {handler})", event.name()),
            Trace::Respond { value } => write!(f, "respond({value})"),
            Trace::Env { entries } => {
                f.write_str("env(")?;
                for (i, e) in entries.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}: {}", e.name, e.addr)?;
                }
                f.write_str(")")
            }
            Trace::EnvRead { env, name } => write!(f, "{env}.{name}"),
            Trace::EnvAddr { env, name } => write!(f, "&{env}.{name}"),
            Trace::VarAddr { name } => write!(f, "&{name}"),
        }
    }
}

/// A numbered callback trace. Handler 0 is the function's main body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Handler {
    pub arg_id: String,
    pub env_id: String,
    pub body: Trace,
}

/// Handlers keyed by number.
#[derive(Debug, Clone, PartialEq)]
pub struct HandlerTable {
    handlers: BTreeMap<usize, Handler>,
}

impl Default for HandlerTable {
    fn default() -> Self {
        HandlerTable::new()
    }
}

impl HandlerTable {
    /// A table holding only the main handler, with an unknown body.
    pub fn new() -> Self {
        let mut handlers = BTreeMap::new();
        handlers.insert(
            0,
            Handler {
                arg_id: "$arg0".into(),
                env_id: "$env0".into(),
                body: Trace::Unknown,
            },
        );
        HandlerTable { handlers }
    }

    pub fn get(&self, n: usize) -> Option<&Handler> {
        self.handlers.get(&n)
    }

    pub fn get_mut(&mut self, n: usize) -> Option<&mut Handler> {
        self.handlers.get_mut(&n)
    }

    pub fn insert(&mut self, n: usize, h: Handler) {
        self.handlers.insert(n, h);
    }

    pub fn len(&self) -> usize {
        self.handlers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.handlers.is_empty()
    }

    pub fn next_id(&self) -> usize {
        self.handlers.keys().next_back().map_or(0, |k| k + 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Handler)> {
        self.handlers.iter().map(|(k, v)| (*k, v))
    }

    pub fn unknown_count(&self) -> usize {
        self.handlers.values().map(|h| h.body.unknown_count()).sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("handler tables always serialize")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, serde_json::Error> {
        HandlerTable::deserialize(v)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct HandlerEntry {
    id: usize,
    arg_id: String,
    env_id: String,
    body: Trace,
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    handlers: Vec<HandlerEntry>,
}

impl Serialize for HandlerTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        TableRepr {
            handlers: self
                .handlers
                .iter()
                .map(|(id, h)| HandlerEntry {
                    id: *id,
                    arg_id: h.arg_id.clone(),
                    env_id: h.env_id.clone(),
                    body: h.body.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HandlerTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = TableRepr::deserialize(d)?;
        let mut handlers = BTreeMap::new();
        for e in repr.handlers {
            if handlers
                .insert(
                    e.id,
                    Handler {
                        arg_id: e.arg_id,
                        env_id: e.env_id,
                        body: e.body,
                    },
                )
                .is_some()
            {
                return Err(serde::de::Error::custom(format!("duplicate handler {}", e.id)));
            }
        }
        if !handlers.contains_key(&0) {
            return Err(serde::de::Error::custom("missing main handler 0"));
        }
        Ok(HandlerTable { handlers })
    }
}
