//! The tracing compiler.
//!
//! [`instrument`] interleaves runtime calls ([`Rt`]) with a desugared
//! program. Each source statement becomes a group of [`IStmt`]s; dropping the
//! runtime calls from a group gives back the statement. The compile-time
//! environment ρ maps every variable in scope to the trace expression that
//! names it at run time: a plain variable, or a read through the enclosing
//! function's environment.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::ast::{is_builtin, Expr, Function, Program, Stmt, BUILTINS, RETURN_LABEL};
use crate::trace::{EnvEntry, Field, Trace};

/// Name the callee binds its environment to.
pub const ENV_ID: &str = "$env";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("break to unknown label `{0}`")]
    UnknownLabel(String),
    #[error("`return` outside of a function")]
    ReturnOutsideFunction,
    #[error("program is not desugared: {0}")]
    NotCore(String),
}

/// A call into the tracing runtime.
#[derive(Debug, Clone, PartialEq)]
pub enum Rt {
    /// `let(x, t)`.
    Let { name: String, value: Trace },
    /// `let(x, popArg())`.
    LetPopArg { name: String },
    Set { target: Trace, value: Trace },
    Break { label: String, value: Trace },
    /// Records an empty block.
    Empty,
    EnterSeq(usize),
    SeqNext,
    IfTrue(Trace),
    IfFalse(Trace),
    While(Trace),
    Label(String),
    Named(String),
    Pop,
    PopTo(String),
    PushArg(Trace),
    LoadMain,
    SaveHandler(usize),
}

impl fmt::Display for Rt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rt::Let { name, value } => write!(f, "let({name}, {value})"),
            Rt::LetPopArg { name } => write!(f, "let({name}, popArg())"),
            Rt::Set { target, value } => write!(f, "set({target}, {value})"),
            Rt::Break { label, value } => write!(f, "break({label}, {value})"),
            Rt::Empty => f.write_str("empty()"),
            Rt::EnterSeq(n) => write!(f, "enterSeq({n})"),
            Rt::SeqNext => f.write_str("seqNext()"),
            Rt::IfTrue(t) => write!(f, "ifTrue({t})"),
            Rt::IfFalse(t) => write!(f, "ifFalse({t})"),
            Rt::While(t) => write!(f, "while({t})"),
            Rt::Label(l) => write!(f, "label({l})"),
            Rt::Named(x) => write!(f, "named({x})"),
            Rt::Pop => f.write_str("pop()"),
            Rt::PopTo(l) => write!(f, "popTo({l})"),
            Rt::PushArg(t) => write!(f, "pushArg({t})"),
            Rt::LoadMain => f.write_str("loadMain()"),
            Rt::SaveHandler(n) => write!(f, "saveHandler({n})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IInit {
    Expr(Expr),
    Function(Arc<IFunction>),
    Call { callee: String, args: Vec<Expr> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IFunction {
    pub params: Vec<String>,
    /// The instrumented body. Its single [`IStmt::Block`] holds the original
    /// statements.
    pub body: Vec<IStmt>,
}

/// An instrumented statement. Groups (`Vec<IStmt>`) run in a fresh scope.
#[derive(Debug, Clone, PartialEq)]
pub enum IStmt {
    Rt(Rt),
    Let { name: String, init: IInit },
    Assign { target: Expr, value: Expr },
    Block(Vec<IStmt>),
    If { cond: Expr, then: Vec<IStmt>, els: Vec<IStmt> },
    While { cond: Expr, body: Vec<IStmt> },
    Labeled { label: String, body: Vec<IStmt> },
    Break(String),
    Return(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstrumentedProgram {
    pub body: Vec<IStmt>,
    /// Host-provided variables visible to the program besides the builtins.
    pub globals: Vec<String>,
    /// False for programs lowered without runtime calls.
    pub traced: bool,
}

#[derive(Debug, Clone, Default)]
pub struct InstrumentOptions {
    /// Extra host globals. They are read and written directly and never
    /// captured in closure environments.
    pub globals: Vec<String>,
}

#[derive(Debug, Clone)]
struct Binding {
    trace: Trace,
    global: bool,
}

/// ρ: guest identifier to trace expression.
#[derive(Debug, Clone)]
pub struct CompileEnv {
    map: IndexMap<String, Binding>,
}

impl CompileEnv {
    pub fn with_globals(globals: &[String]) -> Self {
        let mut map = IndexMap::new();
        for g in BUILTINS.iter().map(|s| s.to_string()).chain(globals.iter().cloned()) {
            map.insert(
                g.clone(),
                Binding {
                    trace: Trace::var(g),
                    global: true,
                },
            );
        }
        CompileEnv { map }
    }

    pub fn lookup(&self, name: &str) -> Result<&Trace, CompileError> {
        self.map
            .get(name)
            .map(|b| &b.trace)
            .ok_or_else(|| CompileError::Unbound(name.to_string()))
    }

    fn bind_local(&mut self, name: &str) {
        // Re-inserting keeps the original position; shift it so env entries
        // follow binding order.
        self.map.shift_remove(name);
        self.map.insert(
            name.to_string(),
            Binding {
                trace: Trace::var(name),
                global: false,
            },
        );
    }

    /// The trace of a closure's environment: every non-global variable in
    /// scope, by address.
    fn env_trace(&self) -> Trace {
        let entries = self
            .map
            .iter()
            .filter(|(_, b)| !b.global)
            .map(|(name, b)| EnvEntry {
                name: name.clone(),
                addr: match &b.trace {
                    Trace::EnvRead { env, name } => Trace::EnvAddr {
                        env: env.clone(),
                        name: name.clone(),
                    },
                    _ => Trace::VarAddr { name: name.clone() },
                },
            })
            .collect();
        Trace::Env { entries }
    }

    /// ρ for a function body: globals, then captured variables read through
    /// the env, then parameters.
    fn for_body(&self, params: &[String]) -> CompileEnv {
        let mut map = IndexMap::new();
        for (name, b) in &self.map {
            if b.global {
                map.insert(name.clone(), b.clone());
            }
        }
        for (name, b) in &self.map {
            if !b.global {
                map.insert(
                    name.clone(),
                    Binding {
                        trace: Trace::env_read(Trace::var(ENV_ID), name.clone()),
                        global: false,
                    },
                );
            }
        }
        let mut env = CompileEnv { map };
        for p in params {
            env.bind_local(p);
        }
        env
    }
}

/// E⟦e⟧ρ.
pub fn compile_expr(e: &Expr, rho: &CompileEnv) -> Result<Trace, CompileError> {
    Ok(match e {
        Expr::Const { value } => Trace::Const { value: value.clone() },
        Expr::Var { name } => rho.lookup(name)?.clone(),
        Expr::Binary { op, left, right } => Trace::binary(*op, compile_expr(left, rho)?, compile_expr(right, rho)?),
        Expr::Unary { op, operand } => Trace::Unary {
            op: *op,
            operand: Box::new(compile_expr(operand, rho)?),
        },
        Expr::Member { object, property } => Trace::Member {
            object: Box::new(compile_expr(object, rho)?),
            property: Box::new(compile_expr(property, rho)?),
        },
        Expr::Object { fields } => Trace::Object {
            fields: fields
                .iter()
                .map(|(k, v)| {
                    Ok(Field {
                        name: k.clone(),
                        value: compile_expr(v, rho)?,
                    })
                })
                .collect::<Result<_, CompileError>>()?,
        },
        Expr::Array { items } => Trace::Array {
            items: items.iter().map(|v| compile_expr(v, rho)).collect::<Result<_, _>>()?,
        },
        Expr::Call { .. } | Expr::Function(_) => {
            return Err(CompileError::NotCore("application or function inside an expression".into()))
        }
    })
}

struct Compiler {
    /// Emit runtime calls and resolve variables through ρ.
    tracing: bool,
    labels: Vec<String>,
    in_function: bool,
}

impl Compiler {
    fn expr(&self, e: &Expr, rho: &CompileEnv) -> Result<Trace, CompileError> {
        if self.tracing {
            compile_expr(e, rho)
        } else {
            Ok(Trace::Unknown)
        }
    }

    fn rt(&self, out: &mut Vec<IStmt>, rt: Rt) {
        if self.tracing {
            out.push(IStmt::Rt(rt));
        }
    }

    fn stmt(&mut self, s: &Stmt, rho: &mut CompileEnv) -> Result<Vec<IStmt>, CompileError> {
        let mut out = Vec::new();
        match s {
            Stmt::Let { name, init } => match init {
                Expr::Function(f) => {
                    let env = if self.tracing { rho.env_trace() } else { Trace::Unknown };
                    self.rt(&mut out, Rt::Let { name: name.clone(), value: env });
                    let func = self.function(f, rho)?;
                    out.push(IStmt::Let {
                        name: name.clone(),
                        init: IInit::Function(Arc::new(func)),
                    });
                    rho.bind_local(name);
                }
                Expr::Call { callee, args } => {
                    let Expr::Var { name: callee } = &**callee else {
                        return Err(CompileError::NotCore("callee is not a variable".into()));
                    };
                    for a in args.iter().rev() {
                        let t = self.expr(a, rho)?;
                        self.rt(&mut out, Rt::PushArg(t));
                    }
                    let f = if self.tracing { rho.lookup(callee)?.clone() } else { Trace::Unknown };
                    self.rt(&mut out, Rt::PushArg(f));
                    self.rt(&mut out, Rt::Named(name.clone()));
                    out.push(IStmt::Let {
                        name: name.clone(),
                        init: IInit::Call {
                            callee: callee.clone(),
                            args: args.clone(),
                        },
                    });
                    self.rt(&mut out, Rt::Pop);
                    rho.bind_local(name);
                }
                e => {
                    let t = self.expr(e, rho)?;
                    self.rt(&mut out, Rt::Let { name: name.clone(), value: t });
                    out.push(IStmt::Let {
                        name: name.clone(),
                        init: IInit::Expr(e.clone()),
                    });
                    rho.bind_local(name);
                }
            },
            Stmt::Assign { target, value } => {
                let t_target = self.expr(target, rho)?;
                let t_value = self.expr(value, rho)?;
                self.rt(
                    &mut out,
                    Rt::Set {
                        target: t_target,
                        value: t_value,
                    },
                );
                out.push(IStmt::Assign {
                    target: target.clone(),
                    value: value.clone(),
                });
            }
            Stmt::Block { body } => out.push(IStmt::Block(self.block(body, rho)?)),
            Stmt::If { cond, then, els } => {
                let Some(els) = els else {
                    return Err(CompileError::NotCore("`if` without `else`".into()));
                };
                let tc = self.expr(cond, rho)?;
                let mut then_g = Vec::new();
                self.rt(&mut then_g, Rt::IfTrue(tc.clone()));
                then_g.extend(self.stmt(then, &mut rho.clone())?);
                let mut els_g = Vec::new();
                self.rt(&mut els_g, Rt::IfFalse(tc));
                els_g.extend(self.stmt(els, &mut rho.clone())?);
                out.push(IStmt::If {
                    cond: cond.clone(),
                    then: then_g,
                    els: els_g,
                });
                self.rt(&mut out, Rt::Pop);
            }
            Stmt::While { cond, body } => {
                let tc = self.expr(cond, rho)?;
                self.rt(&mut out, Rt::While(tc));
                let body = self.stmt(body, &mut rho.clone())?;
                out.push(IStmt::While {
                    cond: cond.clone(),
                    body,
                });
                self.rt(&mut out, Rt::Pop);
            }
            Stmt::Labeled { label, body } => {
                self.rt(&mut out, Rt::Label(label.clone()));
                self.labels.push(label.clone());
                let mut g = self.stmt(body, &mut rho.clone())?;
                self.labels.pop();
                self.rt(&mut g, Rt::Pop);
                out.push(IStmt::Labeled {
                    label: label.clone(),
                    body: g,
                });
            }
            Stmt::Break { label: Some(l) } => {
                if !self.labels.contains(l) {
                    return Err(CompileError::UnknownLabel(l.clone()));
                }
                self.rt(
                    &mut out,
                    Rt::Break {
                        label: l.clone(),
                        value: Trace::undefined(),
                    },
                );
                self.rt(&mut out, Rt::PopTo(l.clone()));
                out.push(IStmt::Break(l.clone()));
            }
            Stmt::Return { value: Some(v) } => {
                if !self.in_function {
                    return Err(CompileError::ReturnOutsideFunction);
                }
                let t = self.expr(v, rho)?;
                self.rt(
                    &mut out,
                    Rt::Break {
                        label: RETURN_LABEL.into(),
                        value: t,
                    },
                );
                self.rt(&mut out, Rt::PopTo(RETURN_LABEL.into()));
                out.push(IStmt::Return(v.clone()));
            }
            other => return Err(CompileError::NotCore(format!("{other}"))),
        }
        Ok(out)
    }

    /// Block contents: `enterSeq(n); s1; seqNext(); ...; sn; pop()`.
    fn block(&mut self, body: &[Stmt], rho: &CompileEnv) -> Result<Vec<IStmt>, CompileError> {
        let mut rho = rho.clone();
        let mut out = Vec::new();
        if body.is_empty() {
            self.rt(&mut out, Rt::Empty);
            return Ok(out);
        }
        self.rt(&mut out, Rt::EnterSeq(body.len()));
        for (i, s) in body.iter().enumerate() {
            if i > 0 {
                self.rt(&mut out, Rt::SeqNext);
            }
            out.extend(self.stmt(s, &mut rho)?);
        }
        self.rt(&mut out, Rt::Pop);
        Ok(out)
    }

    fn function(&mut self, f: &Function, rho: &CompileEnv) -> Result<IFunction, CompileError> {
        let mut inner_rho = rho.for_body(&f.params);
        let saved_labels = std::mem::take(&mut self.labels);
        let saved_in_fn = std::mem::replace(&mut self.in_function, true);
        self.labels.push(RETURN_LABEL.into());
        let result = (|| {
            let n = 1 + f.params.len() + f.body.len();
            let mut block = Vec::new();
            self.rt(&mut block, Rt::EnterSeq(n));
            self.rt(&mut block, Rt::LetPopArg { name: ENV_ID.into() });
            for p in &f.params {
                self.rt(&mut block, Rt::SeqNext);
                self.rt(&mut block, Rt::LetPopArg { name: p.clone() });
            }
            for s in &f.body {
                self.rt(&mut block, Rt::SeqNext);
                block.extend(self.stmt(s, &mut inner_rho)?);
            }
            self.rt(&mut block, Rt::Pop);
            let mut body = Vec::new();
            self.rt(&mut body, Rt::Label(RETURN_LABEL.into()));
            body.push(IStmt::Block(block));
            self.rt(&mut body, Rt::Pop);
            Ok(IFunction {
                params: f.params.clone(),
                body,
            })
        })();
        self.labels = saved_labels;
        self.in_function = saved_in_fn;
        result
    }
}

fn check_globals(globals: &[String]) -> Result<(), CompileError> {
    match globals.iter().find(|g| is_builtin(g)) {
        Some(g) => Err(CompileError::NotCore(format!("global `{g}` shadows a builtin"))),
        None => Ok(()),
    }
}

/// Instruments a desugared program.
pub fn instrument(p: &Program, opts: &InstrumentOptions) -> Result<InstrumentedProgram, CompileError> {
    lower(p, opts, true)
}

/// Lowers a desugared program without runtime calls. Never fails on
/// unbound variables; those are reported when evaluated.
pub fn lower_plain(p: &Program, opts: &InstrumentOptions) -> Result<InstrumentedProgram, CompileError> {
    lower(p, opts, false)
}

fn lower(p: &Program, opts: &InstrumentOptions, tracing: bool) -> Result<InstrumentedProgram, CompileError> {
    check_globals(&opts.globals)?;
    let mut c = Compiler {
        tracing,
        labels: Vec::new(),
        in_function: false,
    };
    let mut rho = CompileEnv::with_globals(&opts.globals);
    let mut body = Vec::new();
    c.rt(&mut body, Rt::LoadMain);
    match p.body.as_slice() {
        [single] => {
            // A lone statement is traced without an enclosing block.
            body.push(IStmt::Block(c.stmt(single, &mut rho)?));
        }
        stmts => body.push(IStmt::Block(c.block(stmts, &rho)?)),
    }
    c.rt(&mut body, Rt::SaveHandler(0));
    Ok(InstrumentedProgram {
        body,
        globals: opts.globals.clone(),
        traced: tracing,
    })
}

/// Parses, desugars and instruments guest source.
pub fn compile_source(src: &str, opts: &InstrumentOptions) -> Result<InstrumentedProgram, crate::Error> {
    let p = crate::desugar::desugar(&crate::parse::parse(src)?);
    Ok(instrument(&p, opts)?)
}

// ---------------------------------------------------------------------------
// Erasure and debug dump.

/// Removes every runtime call, recovering the desugared program.
pub fn erase(p: &InstrumentedProgram) -> Program {
    let mut body = Vec::new();
    for s in &p.body {
        if let IStmt::Block(inner) = s {
            body.extend(erase_group(inner));
        }
    }
    Program { body }
}

fn erase_group(g: &[IStmt]) -> Vec<Stmt> {
    g.iter().filter_map(erase_stmt).collect()
}

fn erase_single(g: &[IStmt]) -> Stmt {
    let mut v = erase_group(g);
    if v.len() == 1 {
        v.pop().expect("one statement")
    } else {
        Stmt::Block { body: v }
    }
}

fn erase_stmt(s: &IStmt) -> Option<Stmt> {
    Some(match s {
        IStmt::Rt(_) => return None,
        IStmt::Let { name, init } => Stmt::Let {
            name: name.clone(),
            init: match init {
                IInit::Expr(e) => e.clone(),
                IInit::Call { callee, args } => Expr::call(Expr::var(callee.clone()), args.clone()),
                IInit::Function(f) => Expr::Function(Function {
                    name: None,
                    params: f.params.clone(),
                    body: f
                        .body
                        .iter()
                        .find_map(|s| match s {
                            IStmt::Block(b) => Some(erase_group(b)),
                            _ => None,
                        })
                        .unwrap_or_default(),
                }),
            },
        },
        IStmt::Assign { target, value } => Stmt::Assign {
            target: target.clone(),
            value: value.clone(),
        },
        IStmt::Block(b) => Stmt::Block { body: erase_group(b) },
        IStmt::If { cond, then, els } => Stmt::If {
            cond: cond.clone(),
            then: Box::new(erase_single(then)),
            els: Some(Box::new(erase_single(els))),
        },
        IStmt::While { cond, body } => Stmt::While {
            cond: cond.clone(),
            body: Box::new(erase_single(body)),
        },
        IStmt::Labeled { label, body } => Stmt::Labeled {
            label: label.clone(),
            body: Box::new(erase_single(body)),
        },
        IStmt::Break(l) => Stmt::Break { label: Some(l.clone()) },
        IStmt::Return(e) => Stmt::Return { value: Some(e.clone()) },
    })
}

/// Pretty-prints an instrumented program; inserted calls are prefixed `>`.
pub fn dump(p: &InstrumentedProgram) -> String {
    let mut out = String::new();
    for s in &p.body {
        dump_stmt(&mut out, s, 0);
    }
    out
}

fn pad(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn dump_group(out: &mut String, g: &[IStmt], depth: usize) {
    out.push_str("{\n");
    for s in g {
        dump_stmt(out, s, depth + 1);
    }
    out.push_str("  ".repeat(depth).as_str());
    out.push('}');
}

fn dump_stmt(out: &mut String, s: &IStmt, depth: usize) {
    if let IStmt::Rt(rt) = s {
        out.push('>');
        pad(out, depth);
        let _ = writeln!(out, "{rt};");
        return;
    }
    out.push(' ');
    pad(out, depth);
    match s {
        IStmt::Rt(_) => unreachable!(),
        IStmt::Let { name, init } => match init {
            IInit::Expr(e) => {
                let _ = write!(out, "let {name} = {e};");
            }
            IInit::Call { callee, args } => {
                let args: Vec<String> = args.iter().map(ToString::to_string).collect();
                let _ = write!(out, "let {name} = {callee}({});", args.join(", "));
            }
            IInit::Function(f) => {
                let _ = write!(out, "let {name} = function({}) ", f.params.join(", "));
                dump_group(out, &f.body, depth);
                out.push(';');
            }
        },
        IStmt::Assign { target, value } => {
            let _ = write!(out, "{target} = {value};");
        }
        IStmt::Block(b) => dump_group(out, b, depth),
        IStmt::If { cond, then, els } => {
            let _ = write!(out, "if ({cond}) ");
            dump_group(out, then, depth);
            out.push_str(" else ");
            dump_group(out, els, depth);
        }
        IStmt::While { cond, body } => {
            let _ = write!(out, "while ({cond}) ");
            dump_group(out, body, depth);
        }
        IStmt::Labeled { label, body } => {
            let _ = write!(out, "{label}: ");
            dump_group(out, body, depth);
        }
        IStmt::Break(l) => {
            let _ = write!(out, "break {l};");
        }
        IStmt::Return(e) => {
            let _ = write!(out, "return {e};");
        }
    }
    out.push('\n');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::BinOp;
    use crate::desugar::desugar;
    use crate::parse::parse;

    fn rts(g: &[IStmt]) -> Vec<Rt> {
        let mut v = Vec::new();
        for s in g {
            match s {
                IStmt::Rt(r) => v.push(r.clone()),
                IStmt::Block(b) => v.extend(rts(b)),
                IStmt::If { then, els, .. } => {
                    v.extend(rts(then));
                    v.extend(rts(els));
                }
                IStmt::While { body, .. } | IStmt::Labeled { body, .. } => v.extend(rts(body)),
                IStmt::Let {
                    init: IInit::Function(f),
                    ..
                } => v.extend(rts(&f.body)),
                _ => {}
            }
        }
        v
    }

    fn globals(names: &[&str]) -> InstrumentOptions {
        InstrumentOptions {
            globals: names.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn if_example_inserts_the_five_calls() {
        let p = desugar(&parse("if (x < 0) y = x * -1; else y = x;").unwrap());
        let ip = instrument(&p, &globals(&["x", "y"])).unwrap();
        let cond = Trace::binary(BinOp::Lt, Trace::var("x"), Trace::int(0));
        assert_eq!(
            rts(&ip.body),
            vec![
                Rt::LoadMain,
                Rt::IfTrue(cond.clone()),
                Rt::Set {
                    target: Trace::var("y"),
                    value: Trace::binary(BinOp::Mul, Trace::var("x"), Trace::int(-1))
                },
                Rt::IfFalse(cond),
                Rt::Set {
                    target: Trace::var("y"),
                    value: Trace::var("x")
                },
                Rt::Pop,
                Rt::SaveHandler(0),
            ]
        );
    }

    #[test]
    fn fun_example_matches_the_listing() {
        let p = desugar(&parse("let x = 10; let F = function(y) { return x + y; }; let foo = F(3);").unwrap());
        let ip = instrument(&p, &InstrumentOptions::default()).unwrap();
        let env = Trace::Env {
            entries: vec![EnvEntry {
                name: "x".into(),
                addr: Trace::VarAddr { name: "x".into() },
            }],
        };
        let ret = Trace::binary(BinOp::Add, Trace::env_read(Trace::var("$env"), "x"), Trace::var("y"));
        assert_eq!(
            rts(&ip.body),
            vec![
                Rt::LoadMain,
                Rt::EnterSeq(3),
                Rt::Let {
                    name: "x".into(),
                    value: Trace::int(10)
                },
                Rt::SeqNext,
                Rt::Let {
                    name: "F".into(),
                    value: env
                },
                Rt::Label("$return".into()),
                Rt::EnterSeq(3),
                Rt::LetPopArg { name: "$env".into() },
                Rt::SeqNext,
                Rt::LetPopArg { name: "y".into() },
                Rt::SeqNext,
                Rt::Break {
                    label: "$return".into(),
                    value: ret
                },
                Rt::PopTo("$return".into()),
                Rt::Pop,
                Rt::Pop,
                Rt::SeqNext,
                Rt::PushArg(Trace::int(3)),
                Rt::PushArg(Trace::var("F")),
                Rt::Named("foo".into()),
                Rt::Pop,
                Rt::Pop,
                Rt::SaveHandler(0),
            ]
        );
    }

    #[test]
    fn recursion_is_a_compile_error() {
        let p = desugar(&parse("let f = function(n) { let r = f(n); return r; };").unwrap());
        assert_eq!(instrument(&p, &InstrumentOptions::default()), Err(CompileError::Unbound("f".into())));
        assert!(lower_plain(&p, &InstrumentOptions::default()).is_ok());
    }

    #[test]
    fn erasure_recovers_the_program() {
        let src = "
            let c = require('containerless');
            function main(req) {
                let n = 0;
                for (let i = 0; i < 3; i++) { if (i === 1) continue; n += i; }
                c.get('x', function(r) { c.respond({ n: n, r: r }); });
            }
        ";
        let p = desugar(&parse(src).unwrap());
        let ip = instrument(&p, &InstrumentOptions::default()).unwrap();
        assert_eq!(erase(&ip), p);
        let d = dump(&ip);
        assert!(d.lines().any(|l| l.starts_with(">") && l.contains("enterSeq(")), "{d}");
    }

    #[test]
    fn empty_program_has_no_enter_seq() {
        let ip = instrument(&Program { body: vec![] }, &InstrumentOptions::default()).unwrap();
        assert_eq!(rts(&ip.body), vec![Rt::LoadMain, Rt::Empty, Rt::SaveHandler(0)]);
    }
}
