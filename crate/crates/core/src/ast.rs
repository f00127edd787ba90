//! Guest-language syntax tree.
//!
//! One tree type covers both the surface language produced by the parser and
//! the core fragment produced by [`crate::desugar`]. The core fragment is the
//! subset accepted by [`check_core`]: every function literal and every
//! application sits directly on the right-hand side of a `let`, loops are
//! `while` loops, every `break` is labelled, every `if` has an `else` and
//! every `return` carries a value.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Names that are always in scope in a guest program.
pub const BUILTINS: &[&str] = &["get", "post", "respond", "listen"];

/// Label that function bodies are wrapped in; `return` breaks to it.
pub const RETURN_LABEL: &str = "$return";

pub fn is_builtin(name: &str) -> bool {
    BUILTINS.contains(&name)
}

/// A literal constant.
///
/// Numbers are split into an exact integer variant and a float variant.
/// Integers stay exact up to 2^53 in magnitude and are promoted to floats
/// past that.
#[derive(Debug, Clone, PartialEq)]
pub enum Lit {
    Undefined,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

impl Lit {
    pub fn str(s: impl Into<String>) -> Lit {
        Lit::Str(s.into())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lit::Undefined => f.write_str("undefined"),
            Lit::Bool(b) => write!(f, "{b}"),
            Lit::Int(i) => write!(f, "{i}"),
            Lit::Float(x) => {
                if x.is_finite() && x.fract() == 0.0 && x.abs() < 1e15 {
                    write!(f, "{x:.1}")
                } else {
                    write!(f, "{x:?}")
                }
            }
            Lit::Str(s) => write_quoted(f, s),
        }
    }
}

fn write_quoted(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('\'')?;
    for ch in s.chars() {
        match ch {
            '\'' => f.write_str("\\'")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            '\r' => f.write_str("\\r")?,
            c if (c as u32) < 0x20 => write!(f, "\\u{:04x}", c as u32)?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('\'')
}

// Undefined <-> null, Int <-> integral JSON number, Float <-> JSON number
// written with a fraction or exponent.
impl Serialize for Lit {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Lit::Undefined => s.serialize_unit(),
            Lit::Bool(b) => s.serialize_bool(*b),
            Lit::Int(i) => s.serialize_i64(*i),
            Lit::Float(x) => s.serialize_f64(*x),
            Lit::Str(v) => s.serialize_str(v),
        }
    }
}

impl<'de> Deserialize<'de> for Lit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::Null => Ok(Lit::Undefined),
            serde_json::Value::Bool(b) => Ok(Lit::Bool(b)),
            serde_json::Value::String(s) => Ok(Lit::Str(s)),
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Lit::Int(i))
                } else if let Some(x) = n.as_f64() {
                    Ok(Lit::Float(x))
                } else {
                    Err(D::Error::custom("numeric constant out of range"))
                }
            }
            other => Err(D::Error::custom(format!("not a constant: {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    #[serde(rename = "+")]
    Add,
    #[serde(rename = "-")]
    Sub,
    #[serde(rename = "*")]
    Mul,
    #[serde(rename = "/")]
    Div,
    #[serde(rename = "%")]
    Rem,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "===")]
    StrictEq,
    #[serde(rename = "!==")]
    StrictNe,
    #[serde(rename = "&&")]
    And,
    #[serde(rename = "||")]
    Or,
}

impl BinOp {
    pub const ALL: [BinOp; 13] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Rem,
        BinOp::Lt,
        BinOp::Gt,
        BinOp::Le,
        BinOp::Ge,
        BinOp::StrictEq,
        BinOp::StrictNe,
        BinOp::And,
        BinOp::Or,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::StrictEq => "===",
            BinOp::StrictNe => "!==",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnOp {
    #[serde(rename = "!")]
    Not,
    #[serde(rename = "-")]
    Neg,
}

impl UnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::Not => "!",
            UnOp::Neg => "-",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Expr {
    #[serde(rename = "constant")]
    Const { value: Lit },
    #[serde(rename = "var")]
    Var { name: String },
    #[serde(rename = "binop")]
    Binary {
        op: BinOp,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    #[serde(rename = "unop")]
    Unary { op: UnOp, operand: Box<Expr> },
    /// `object.name` and `object[expr]`; dotted access has a string
    /// constant property.
    #[serde(rename = "member")]
    Member {
        object: Box<Expr>,
        property: Box<Expr>,
    },
    #[serde(rename = "object")]
    Object { fields: Vec<(String, Expr)> },
    #[serde(rename = "array")]
    Array { items: Vec<Expr> },
    /// Application. In core programs it only occurs as a `let` initializer
    /// and its callee is a variable.
    #[serde(rename = "call")]
    Call { callee: Box<Expr>, args: Vec<Expr> },
    /// Function literal. In core programs it only occurs as a `let`
    /// initializer.
    #[serde(rename = "function")]
    Function(Function),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Function {
    /// Source name for named function expressions; used as the base of the
    /// fresh name when the literal is lifted out of an expression.
    pub name: Option<String>,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
}

impl Expr {
    pub fn int(i: i64) -> Expr {
        Expr::Const { value: Lit::Int(i) }
    }

    pub fn string(s: impl Into<String>) -> Expr {
        Expr::Const { value: Lit::Str(s.into()) }
    }

    pub fn undefined() -> Expr {
        Expr::Const {
            value: Lit::Undefined,
        }
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var { name: name.into() }
    }

    pub fn binary(op: BinOp, left: Expr, right: Expr) -> Expr {
        Expr::Binary {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn member(object: Expr, property: Expr) -> Expr {
        Expr::Member {
            object: Box::new(object),
            property: Box::new(property),
        }
    }

    pub fn call(callee: Expr, args: Vec<Expr>) -> Expr {
        Expr::Call {
            callee: Box::new(callee),
            args,
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Expr::Const { .. })
    }

    /// True when the expression contains no application and no function
    /// literal.
    pub fn is_pure(&self) -> bool {
        match self {
            Expr::Const { .. } | Expr::Var { .. } => true,
            Expr::Binary { left, right, .. } => left.is_pure() && right.is_pure(),
            Expr::Unary { operand, .. } => operand.is_pure(),
            Expr::Member { object, property } => object.is_pure() && property.is_pure(),
            Expr::Object { fields } => fields.iter().all(|(_, e)| e.is_pure()),
            Expr::Array { items } => items.iter().all(Expr::is_pure),
            Expr::Call { .. } | Expr::Function(_) => false,
        }
    }

    /// True for expressions that may appear on the left of `=`.
    pub fn is_lvalue(&self) -> bool {
        matches!(self, Expr::Var { .. } | Expr::Member { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Stmt {
    #[serde(rename = "let")]
    Let { name: String, init: Expr },
    #[serde(rename = "assign")]
    Assign { target: Expr, value: Expr },
    /// Expression statement (surface only).
    #[serde(rename = "expr")]
    Expr { expr: Expr },
    #[serde(rename = "block")]
    Block { body: Vec<Stmt> },
    #[serde(rename = "if")]
    If {
        cond: Expr,
        then: Box<Stmt>,
        #[serde(rename = "else")]
        els: Option<Box<Stmt>>,
    },
    #[serde(rename = "while")]
    While { cond: Expr, body: Box<Stmt> },
    /// `for (init; cond; update) body` (surface only).
    #[serde(rename = "for")]
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        update: Option<Box<Stmt>>,
        body: Box<Stmt>,
    },
    /// `switch` with `default` last, if present (surface only).
    #[serde(rename = "switch")]
    Switch {
        scrutinee: Expr,
        cases: Vec<SwitchCase>,
        default: Option<Vec<Stmt>>,
    },
    #[serde(rename = "label")]
    Labeled { label: String, body: Box<Stmt> },
    #[serde(rename = "break")]
    Break { label: Option<String> },
    /// Surface only.
    #[serde(rename = "continue")]
    Continue { label: Option<String> },
    #[serde(rename = "return")]
    Return { value: Option<Expr> },
    /// `function name(params) { body }` (surface only).
    #[serde(rename = "functionDecl")]
    FunctionDecl { name: String, func: Function },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchCase {
    pub test: Expr,
    pub body: Vec<Stmt>,
}

impl Stmt {
    pub fn let_(name: impl Into<String>, init: Expr) -> Stmt {
        Stmt::Let {
            name: name.into(),
            init,
        }
    }

    pub fn block(body: Vec<Stmt>) -> Stmt {
        Stmt::Block { body }
    }
}

/// A parsed guest program: the top-level block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Program {
    pub body: Vec<Stmt>,
}

impl Program {
    /// JSON dump of the tree, one object per node with its `kind` first.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("syntax trees always serialize")
    }

    /// Variables referenced but never bound.
    pub fn free_variables(&self) -> Vec<String> {
        let mut free = Vec::new();
        let mut scope = Vec::new();
        free_in_block(&self.body, &mut scope, &mut free);
        free
    }
}

fn free_in_block(body: &[Stmt], scope: &mut Vec<String>, free: &mut Vec<String>) {
    let mark = scope.len();
    // Function declarations are hoisted.
    for s in body {
        if let Stmt::FunctionDecl { name, .. } = s {
            scope.push(name.clone());
        }
    }
    for s in body {
        free_in_stmt(s, scope, free);
    }
    scope.truncate(mark);
}

fn free_in_stmt(s: &Stmt, scope: &mut Vec<String>, free: &mut Vec<String>) {
    match s {
        Stmt::Let { name, init } => {
            free_in_expr(init, scope, free);
            scope.push(name.clone());
        }
        Stmt::Assign { target, value } => {
            free_in_expr(target, scope, free);
            free_in_expr(value, scope, free);
        }
        Stmt::Expr { expr } => free_in_expr(expr, scope, free),
        Stmt::Block { body } => free_in_block(body, scope, free),
        Stmt::If { cond, then, els } => {
            free_in_expr(cond, scope, free);
            free_in_block(std::slice::from_ref(then), scope, free);
            if let Some(e) = els {
                free_in_block(std::slice::from_ref(e), scope, free);
            }
        }
        Stmt::While { cond, body } => {
            free_in_expr(cond, scope, free);
            free_in_block(std::slice::from_ref(body), scope, free);
        }
        Stmt::For {
            init,
            cond,
            update,
            body,
        } => {
            let mark = scope.len();
            if let Some(i) = init {
                free_in_stmt(i, scope, free);
            }
            if let Some(c) = cond {
                free_in_expr(c, scope, free);
            }
            free_in_block(std::slice::from_ref(body), scope, free);
            if let Some(u) = update {
                free_in_stmt(u, scope, free);
            }
            scope.truncate(mark);
        }
        Stmt::Switch {
            scrutinee,
            cases,
            default,
        } => {
            free_in_expr(scrutinee, scope, free);
            for c in cases {
                free_in_expr(&c.test, scope, free);
                free_in_block(&c.body, scope, free);
            }
            if let Some(d) = default {
                free_in_block(d, scope, free);
            }
        }
        Stmt::Labeled { body, .. } => free_in_stmt(body, scope, free),
        Stmt::Break { .. } | Stmt::Continue { .. } => {}
        Stmt::Return { value } => {
            if let Some(v) = value {
                free_in_expr(v, scope, free);
            }
        }
        Stmt::FunctionDecl { func, .. } => free_in_function(func, scope, free),
    }
}

fn free_in_function(func: &Function, scope: &mut Vec<String>, free: &mut Vec<String>) {
    let mark = scope.len();
    scope.extend(func.params.iter().cloned());
    free_in_block(&func.body, scope, free);
    scope.truncate(mark);
}

fn free_in_expr(e: &Expr, scope: &mut Vec<String>, free: &mut Vec<String>) {
    match e {
        Expr::Const { .. } => {}
        Expr::Var { name } => {
            if !scope.iter().any(|s| s == name) && !free.contains(name) {
                free.push(name.clone());
            }
        }
        Expr::Binary { left, right, .. } => {
            free_in_expr(left, scope, free);
            free_in_expr(right, scope, free);
        }
        Expr::Unary { operand, .. } => free_in_expr(operand, scope, free),
        Expr::Member { object, property } => {
            free_in_expr(object, scope, free);
            free_in_expr(property, scope, free);
        }
        Expr::Object { fields } => fields.iter().for_each(|(_, e)| free_in_expr(e, scope, free)),
        Expr::Array { items } => items.iter().for_each(|e| free_in_expr(e, scope, free)),
        Expr::Call { callee, args } => {
            free_in_expr(callee, scope, free);
            args.iter().for_each(|e| free_in_expr(e, scope, free));
        }
        Expr::Function(func) => free_in_function(func, scope, free),
    }
}

/// Checks that a program is in the core fragment.
pub fn check_core(p: &Program) -> Result<(), String> {
    p.body.iter().try_for_each(core_stmt)
}

fn core_stmt(s: &Stmt) -> Result<(), String> {
    match s {
        Stmt::Let { name, init } => match init {
            Expr::Call { callee, args } => {
                if !matches!(**callee, Expr::Var { .. }) {
                    return Err(format!("callee of `{name}` is not a variable"));
                }
                match args.iter().find(|a| !a.is_pure()) {
                    Some(_) => Err(format!("argument of `{name}` is not pure")),
                    None => Ok(()),
                }
            }
            Expr::Function(f) => f.body.iter().try_for_each(core_stmt),
            e if e.is_pure() => Ok(()),
            _ => Err(format!("initializer of `{name}` is not in A-normal form")),
        },
        Stmt::Assign { target, value } => {
            if target.is_pure() && value.is_pure() {
                Ok(())
            } else {
                Err("assignment is not in A-normal form".into())
            }
        }
        Stmt::Block { body } => body.iter().try_for_each(core_stmt),
        Stmt::If { cond, then, els } => {
            if !cond.is_pure() {
                return Err("impure condition".into());
            }
            core_stmt(then)?;
            match els {
                Some(e) => core_stmt(e),
                None => Err("`if` without `else`".into()),
            }
        }
        Stmt::While { cond, body } => {
            if !cond.is_pure() {
                return Err("impure loop condition".into());
            }
            core_stmt(body)
        }
        Stmt::Labeled { body, .. } => core_stmt(body),
        Stmt::Break { label: Some(_) } => Ok(()),
        Stmt::Return { value: Some(v) } if v.is_pure() => Ok(()),
        Stmt::Expr { .. } => Err("expression statement".into()),
        Stmt::For { .. } => Err("`for` loop".into()),
        Stmt::Switch { .. } => Err("`switch`".into()),
        Stmt::Continue { .. } => Err("`continue`".into()),
        Stmt::Break { label: None } => Err("unlabelled `break`".into()),
        Stmt::Return { .. } => Err("`return` without a pure value".into()),
        Stmt::FunctionDecl { name, .. } => Err(format!("function declaration `{name}`")),
    }
}

// ---------------------------------------------------------------------------
// Pretty printing. The output re-parses to the same tree.

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const { value } => match value {
                Lit::Int(i) if *i < 0 => write!(f, "({i})"),
                Lit::Float(x) if *x < 0.0 => write!(f, "({value})"),
                _ => write!(f, "{value}"),
            },
            Expr::Var { name } => f.write_str(name),
            Expr::Binary { op, left, right } => write!(f, "({left} {} {right})", op.symbol()),
            Expr::Unary { op, operand } => write!(f, "({}{operand})", op.symbol()),
            Expr::Member { object, property } => match &**property {
                Expr::Const {
                    value: Lit::Str(s),
                } if is_identifier(s) => write!(f, "{object}.{s}"),
                p => write!(f, "{object}[{p}]"),
            },
            Expr::Object { fields } => {
                f.write_str("{")?;
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    if is_identifier(k) {
                        write!(f, "{k}: {v}")?;
                    } else {
                        write_quoted(f, k)?;
                        write!(f, ": {v}")?;
                    }
                }
                f.write_str("}")
            }
            Expr::Array { items } => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            Expr::Call { callee, args } => {
                write!(f, "{callee}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Expr::Function(func) => {
                let mut out = String::new();
                write_function(&mut out, func, 0)?;
                f.write_str(&out)
            }
        }
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$') && !crate::parse::is_keyword(s)
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_function(out: &mut String, func: &Function, depth: usize) -> fmt::Result {
    out.push_str("function");
    if let Some(n) = &func.name {
        write!(out, " {n}")?;
    }
    write!(out, "({}) ", func.params.join(", "))?;
    write_block(out, &func.body, depth)
}

fn write_block(out: &mut String, body: &[Stmt], depth: usize) -> fmt::Result {
    out.push_str("{\n");
    for s in body {
        write_stmt(out, s, depth + 1)?;
    }
    indent(out, depth);
    out.push('}');
    Ok(())
}

fn write_stmt(out: &mut String, s: &Stmt, depth: usize) -> fmt::Result {
    indent(out, depth);
    write_stmt_inline(out, s, depth)?;
    out.push('\n');
    Ok(())
}

fn write_stmt_inline(out: &mut String, s: &Stmt, depth: usize) -> fmt::Result {
    match s {
        Stmt::Let { name, init } => {
            write!(out, "let {name} = ")?;
            write_expr(out, init, depth)?;
            out.push(';');
        }
        Stmt::Assign { target, value } => {
            write!(out, "{target} = ")?;
            write_expr(out, value, depth)?;
            out.push(';');
        }
        Stmt::Expr { expr } => {
            write_expr(out, expr, depth)?;
            out.push(';');
        }
        Stmt::Block { body } => write_block(out, body, depth)?,
        Stmt::If { cond, then, els } => {
            write!(out, "if ({cond}) ")?;
            write_stmt_inline(out, then, depth)?;
            if let Some(e) = els {
                out.push_str(" else ");
                write_stmt_inline(out, e, depth)?;
            }
        }
        Stmt::While { cond, body } => {
            write!(out, "while ({cond}) ")?;
            write_stmt_inline(out, body, depth)?;
        }
        Stmt::For {
            init,
            cond,
            update,
            body,
        } => {
            out.push_str("for (");
            if let Some(i) = init {
                write_stmt_inline(out, i, depth)?;
            } else {
                out.push(';');
            }
            out.push(' ');
            if let Some(c) = cond {
                write!(out, "{c}")?;
            }
            out.push_str("; ");
            if let Some(u) = update {
                let mut tmp = String::new();
                write_stmt_inline(&mut tmp, u, depth)?;
                out.push_str(tmp.trim_end_matches(';'));
            }
            out.push_str(") ");
            write_stmt_inline(out, body, depth)?;
        }
        Stmt::Switch {
            scrutinee,
            cases,
            default,
        } => {
            writeln!(out, "switch ({scrutinee}) {{")?;
            for c in cases {
                indent(out, depth + 1);
                writeln!(out, "case {}:", c.test)?;
                for s in &c.body {
                    write_stmt(out, s, depth + 2)?;
                }
            }
            if let Some(d) = default {
                indent(out, depth + 1);
                out.push_str("default:\n");
                for s in d {
                    write_stmt(out, s, depth + 2)?;
                }
            }
            indent(out, depth);
            out.push('}');
        }
        Stmt::Labeled { label, body } => {
            write!(out, "{label}: ")?;
            write_stmt_inline(out, body, depth)?;
        }
        Stmt::Break { label } => match label {
            Some(l) => write!(out, "break {l};")?,
            None => out.push_str("break;"),
        },
        Stmt::Continue { label } => match label {
            Some(l) => write!(out, "continue {l};")?,
            None => out.push_str("continue;"),
        },
        Stmt::Return { value } => match value {
            Some(v) => {
                out.push_str("return ");
                write_expr(out, v, depth)?;
                out.push(';');
            }
            None => out.push_str("return;"),
        },
        Stmt::FunctionDecl { name, func } => {
            write!(out, "function {name}({}) ", func.params.join(", "))?;
            write_block(out, &func.body, depth)?;
        }
    }
    Ok(())
}

// Like Display but keeps nested function bodies indented.
fn write_expr(out: &mut String, e: &Expr, depth: usize) -> fmt::Result {
    match e {
        Expr::Function(func) => write_function(out, func, depth),
        Expr::Call { callee, args } => {
            write_expr(out, callee, depth)?;
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, depth)?;
            }
            out.push(')');
            Ok(())
        }
        other => write!(out, "{other}"),
    }
}

/// Renders a program as guest source text.
pub fn pretty(p: &Program) -> String {
    let mut out = String::new();
    for s in &p.body {
        write_stmt(&mut out, s, 0).expect("writing to a String cannot fail");
    }
    out
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write_stmt_inline(&mut out, self, 0)?;
        f.write_str(&out)
    }
}
