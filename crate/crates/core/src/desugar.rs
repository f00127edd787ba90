//! Lowering from the surface language to the core fragment.
//!
//! Fresh names are `base$n` with a counter shared across the whole program.
//! Guest identifiers cannot contain `$`, so fresh names never collide with
//! user names. A second pass over already-desugared output generates no new
//! names and returns it unchanged.

use crate::ast::{is_builtin, BinOp, Expr, Function, Lit, Program, Stmt};
use crate::parse::{api_alias, is_require};

/// Desugars a parsed program into the core fragment.
pub fn desugar(p: &Program) -> Program {
    let mut d = Desugar {
        counter: 0,
        alias: api_alias(p).map(str::to_string),
    };
    let top: Vec<Stmt> = p
        .body
        .iter()
        .filter(|s| !matches!(s, Stmt::Let { init, .. } if is_require(init)))
        .cloned()
        .collect();
    let mut body = d.block(&top, &mut Vec::new());
    let defines_main = body
        .iter()
        .any(|s| matches!(s, Stmt::Let { name, init: Expr::Function(_) } if name == "main"));
    if defines_main && !body.iter().any(calls_listen) {
        let name = d.fresh("_");
        body.push(Stmt::let_(name, Expr::call(Expr::var("listen"), vec![Expr::var("main")])));
    }
    Program { body }
}

fn calls_listen(s: &Stmt) -> bool {
    matches!(s, Stmt::Let { init: Expr::Call { callee, .. }, .. }
        if matches!(&**callee, Expr::Var { name } if name == "listen"))
}

struct Desugar {
    counter: usize,
    alias: Option<String>,
}

/// An enclosing statement that unlabelled `break`/`continue` can target.
struct Target {
    user_label: Option<String>,
    break_label: Option<String>,
    continue_label: Option<String>,
    is_loop: bool,
}

fn is_temp(name: &str) -> bool {
    name.contains('$')
}

impl Desugar {
    fn fresh(&mut self, base: &str) -> String {
        self.counter += 1;
        format!("{base}${}", self.counter)
    }

    fn block(&mut self, body: &[Stmt], targets: &mut Vec<Target>) -> Vec<Stmt> {
        let mut body = body.to_vec();
        hoist_functions(&mut body);
        let mut out = Vec::new();
        for s in &body {
            self.stmt(s, targets, &mut out);
        }
        out
    }

    /// Desugars a statement that must stay a single statement.
    fn single(&mut self, s: &Stmt, targets: &mut Vec<Target>) -> Stmt {
        let mut out = Vec::new();
        self.stmt(s, targets, &mut out);
        if out.len() == 1 {
            out.pop().expect("one statement")
        } else {
            Stmt::Block { body: out }
        }
    }

    fn function(&mut self, f: &Function) -> Function {
        Function {
            name: None,
            params: f.params.clone(),
            body: self.block(&f.body, &mut Vec::new()),
        }
    }

    fn stmt(&mut self, s: &Stmt, targets: &mut Vec<Target>, out: &mut Vec<Stmt>) {
        match s {
            Stmt::Let { name, init } => {
                let init = self.binding(init, out);
                out.push(Stmt::Let {
                    name: name.clone(),
                    init,
                });
            }
            Stmt::Assign { target, value } => {
                let target = self.pure(target, out);
                let value = self.pure(value, out);
                out.push(Stmt::Assign { target, value });
            }
            Stmt::Expr { expr } => {
                let init = self.binding(expr, out);
                let name = self.fresh("_");
                out.push(Stmt::Let { name, init });
            }
            Stmt::Block { body } => out.push(Stmt::Block {
                body: self.block(body, targets),
            }),
            Stmt::If { cond, then, els } => {
                let cond = self.pure(cond, out);
                let then = Box::new(self.single(then, targets));
                let els = Box::new(match els {
                    Some(e) => self.single(e, targets),
                    None => Stmt::Block { body: vec![] },
                });
                out.push(Stmt::If {
                    cond,
                    then,
                    els: Some(els),
                });
            }
            Stmt::While { cond, body } => self.looped(None, None, Some(cond), None, body, targets, out),
            Stmt::For {
                init,
                cond,
                update,
                body,
            } => self.looped(None, init.as_deref(), cond.as_ref(), update.as_deref(), body, targets, out),
            Stmt::Switch { .. } => self.switch(None, s, targets, out),
            Stmt::Labeled { label, body } => match &**body {
                Stmt::While { cond, body } => {
                    self.looped(Some(label), None, Some(cond), None, body, targets, out)
                }
                Stmt::For {
                    init,
                    cond,
                    update,
                    body,
                } => self.looped(
                    Some(label),
                    init.as_deref(),
                    cond.as_ref(),
                    update.as_deref(),
                    body,
                    targets,
                    out,
                ),
                Stmt::Switch { .. } => self.switch(Some(label), body, targets, out),
                other => {
                    let body = Box::new(self.single(other, targets));
                    out.push(Stmt::Labeled {
                        label: label.clone(),
                        body,
                    });
                }
            },
            Stmt::Break { label: Some(l) } => out.push(Stmt::Break { label: Some(l.clone()) }),
            Stmt::Break { label: None } => {
                let label = targets
                    .iter()
                    .rev()
                    .find_map(|t| t.break_label.clone())
                    .expect("validated: break has a target");
                out.push(Stmt::Break { label: Some(label) });
            }
            Stmt::Continue { label } => {
                let target = targets
                    .iter()
                    .rev()
                    .filter(|t| t.is_loop)
                    .find(|t| label.is_none() || t.user_label == *label)
                    .expect("validated: continue has a target");
                let label = target.continue_label.clone().expect("continue label allocated");
                out.push(Stmt::Break { label: Some(label) });
            }
            Stmt::Return { value } => {
                let value = match value {
                    Some(v) => self.pure(v, out),
                    None => Expr::undefined(),
                };
                out.push(Stmt::Return { value: Some(value) });
            }
            Stmt::FunctionDecl { name, func } => {
                let f = self.function(func);
                out.push(Stmt::Let {
                    name: name.clone(),
                    init: Expr::Function(f),
                });
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn looped(
        &mut self,
        user_label: Option<&String>,
        init: Option<&Stmt>,
        cond: Option<&Expr>,
        update: Option<&Stmt>,
        body: &Stmt,
        targets: &mut Vec<Target>,
        out: &mut Vec<Stmt>,
    ) {
        let mut prefix = Vec::new();
        if let Some(i) = init {
            self.stmt(i, targets, &mut prefix);
        }
        let cond = cond.cloned().unwrap_or(Expr::Const { value: Lit::Bool(true) });
        let impure_cond = !cond.is_pure();
        let needs_break = impure_cond || breaks_out(body);
        let break_label = match (user_label, needs_break) {
            (Some(l), _) => Some(l.clone()),
            (None, true) => Some(self.fresh("brk")),
            (None, false) => None,
        };
        let continue_label = continues_out(body, user_label.map(String::as_str)).then(|| self.fresh("cont"));
        targets.push(Target {
            user_label: user_label.cloned(),
            break_label: break_label.clone(),
            continue_label: continue_label.clone(),
            is_loop: true,
        });
        let mut inner = self.single(body, targets);
        targets.pop();
        if let Some(c) = &continue_label {
            inner = Stmt::Labeled {
                label: c.clone(),
                body: Box::new(inner),
            };
        }
        let mut body_stmts = vec![inner];
        if let Some(u) = update {
            self.stmt(u, targets, &mut body_stmts);
        }
        let mut loop_stmt = if impure_cond {
            let mut head = Vec::new();
            let cond = self.pure(&cond, &mut head);
            head.push(Stmt::If {
                cond,
                then: Box::new(Stmt::Block { body: body_stmts }),
                els: Some(Box::new(Stmt::Break {
                    label: break_label.clone(),
                })),
            });
            Stmt::While {
                cond: Expr::Const { value: Lit::Bool(true) },
                body: Box::new(Stmt::Block { body: head }),
            }
        } else {
            let body = if body_stmts.len() == 1 && init.is_none() && continue_label.is_none() {
                body_stmts.pop().expect("one statement")
            } else {
                Stmt::Block { body: body_stmts }
            };
            Stmt::While {
                cond,
                body: Box::new(body),
            }
        };
        if let Some(l) = break_label {
            loop_stmt = Stmt::Labeled {
                label: l,
                body: Box::new(loop_stmt),
            };
        }
        if init.is_some() {
            prefix.push(loop_stmt);
            out.push(Stmt::Block { body: prefix });
        } else {
            out.push(loop_stmt);
        }
    }

    fn switch(&mut self, user_label: Option<&String>, s: &Stmt, targets: &mut Vec<Target>, out: &mut Vec<Stmt>) {
        let Stmt::Switch {
            scrutinee,
            cases,
            default,
        } = s
        else {
            unreachable!("switch expected")
        };
        let needs_break = cases.iter().flat_map(|c| &c.body).chain(default.iter().flatten()).any(breaks_out);
        let break_label = match (user_label, needs_break) {
            (Some(l), _) => Some(l.clone()),
            (None, true) => Some(self.fresh("brk")),
            (None, false) => None,
        };
        targets.push(Target {
            user_label: user_label.cloned(),
            break_label: break_label.clone(),
            continue_label: None,
            is_loop: false,
        });
        let mut body = Vec::new();
        let scrut = self.pure(scrutinee, &mut body);
        let d = self.fresh("d");
        let m = self.fresh("m");
        body.push(Stmt::let_(d.clone(), scrut));
        body.push(Stmt::let_(m.clone(), Expr::Const { value: Lit::Bool(false) }));
        for case in cases {
            let test = self.pure(&case.test, &mut body);
            let cond = Expr::binary(
                BinOp::Or,
                Expr::var(m.clone()),
                Expr::binary(BinOp::StrictEq, Expr::var(d.clone()), test),
            );
            let mut then = vec![Stmt::Assign {
                target: Expr::var(m.clone()),
                value: Expr::Const { value: Lit::Bool(true) },
            }];
            then.extend(self.block(&case.body, targets));
            body.push(Stmt::If {
                cond,
                then: Box::new(Stmt::Block { body: then }),
                els: Some(Box::new(Stmt::Block { body: vec![] })),
            });
        }
        if let Some(dft) = default {
            body.push(Stmt::Block {
                body: self.block(dft, targets),
            });
        }
        targets.pop();
        let mut stmt = Stmt::Block { body };
        if let Some(l) = break_label {
            stmt = Stmt::Labeled {
                label: l,
                body: Box::new(stmt),
            };
        }
        out.push(stmt);
    }

    /// Right-hand side of a `let`: an application or function literal stays
    /// in place, anything else is made pure.
    fn binding(&mut self, e: &Expr, out: &mut Vec<Stmt>) -> Expr {
        match e {
            Expr::Call { callee, args } => self.call(callee, args, out),
            Expr::Function(f) => Expr::Function(self.function(f)),
            other => self.pure(other, out),
        }
    }

    fn call(&mut self, callee: &Expr, args: &[Expr], out: &mut Vec<Stmt>) -> Expr {
        let callee = match callee {
            Expr::Member { object, property } => match (&**object, &**property, &self.alias) {
                (Expr::Var { name }, Expr::Const { value: Lit::Str(m) }, Some(a)) if name == a => Expr::var(m.clone()),
                _ => unreachable!("validated: only platform API methods are called"),
            },
            other => other.clone(),
        };
        let builtin = matches!(&callee, Expr::Var { name } if is_builtin(name));
        let mut pure_args = Vec::with_capacity(args.len());
        for a in args {
            let a = self.pure(a, out);
            let needs_temp = !builtin && !a.is_const() && !matches!(&a, Expr::Var { name } if is_temp(name));
            if needs_temp {
                let t = self.fresh("a");
                out.push(Stmt::let_(t.clone(), a));
                pure_args.push(Expr::var(t));
            } else {
                pure_args.push(a);
            }
        }
        Expr::Call {
            callee: Box::new(callee),
            args: pure_args,
        }
    }

    /// Lifts applications and function literals out of `e`, in evaluation
    /// order, and returns the remaining pure expression.
    fn pure(&mut self, e: &Expr, out: &mut Vec<Stmt>) -> Expr {
        match e {
            Expr::Const { .. } | Expr::Var { .. } => e.clone(),
            Expr::Binary { op, left, right } => {
                let l = self.pure(left, out);
                let r = self.pure(right, out);
                Expr::binary(*op, l, r)
            }
            Expr::Unary { op, operand } => Expr::Unary {
                op: *op,
                operand: Box::new(self.pure(operand, out)),
            },
            Expr::Member { object, property } => {
                let o = self.pure(object, out);
                let p = self.pure(property, out);
                Expr::member(o, p)
            }
            Expr::Object { fields } => Expr::Object {
                fields: fields.iter().map(|(k, v)| (k.clone(), self.pure(v, out))).collect(),
            },
            Expr::Array { items } => Expr::Array {
                items: items.iter().map(|v| self.pure(v, out)).collect(),
            },
            Expr::Call { callee, args } => {
                let call = self.call(callee, args, out);
                let r = self.fresh("r");
                out.push(Stmt::let_(r.clone(), call));
                Expr::var(r)
            }
            Expr::Function(f) => {
                let base = f.name.clone().unwrap_or_else(|| "F".into());
                let func = self.function(f);
                let name = self.fresh(&base);
                out.push(Stmt::let_(name.clone(), Expr::Function(func)));
                Expr::var(name)
            }
        }
    }
}

/// Moves each function declaration just before the first earlier statement
/// of the block that mentions its name.
fn hoist_functions(body: &mut Vec<Stmt>) {
    let mut i = 0;
    while i < body.len() {
        if let Stmt::FunctionDecl { name, .. } = &body[i] {
            let name = name.clone();
            if let Some(first) = (0..i).find(|&j| mentions(&body[j], &name)) {
                let decl = body.remove(i);
                body.insert(first, decl);
            }
        }
        i += 1;
    }
}

fn mentions(s: &Stmt, name: &str) -> bool {
    let p = Program { body: vec![s.clone()] };
    p.free_variables().iter().any(|v| v == name)
}

/// True if `s` contains an unlabelled `break` that escapes it.
fn breaks_out(s: &Stmt) -> bool {
    match s {
        Stmt::Break { label: None } => true,
        Stmt::Block { body } => body.iter().any(breaks_out),
        Stmt::If { then, els, .. } => breaks_out(then) || els.as_deref().is_some_and(breaks_out),
        Stmt::Labeled { body, .. } => match &**body {
            Stmt::While { .. } | Stmt::For { .. } | Stmt::Switch { .. } => false,
            other => breaks_out(other),
        },
        _ => false,
    }
}

/// True if `s` contains an unlabelled `continue` that escapes it, or a
/// `continue` naming `label`.
fn continues_out(s: &Stmt, label: Option<&str>) -> bool {
    fn go(s: &Stmt, label: Option<&str>, unlabelled: bool) -> bool {
        match s {
            Stmt::Continue { label: None } => unlabelled,
            Stmt::Continue { label: Some(l) } => Some(l.as_str()) == label,
            Stmt::Block { body } => body.iter().any(|s| go(s, label, unlabelled)),
            Stmt::If { then, els, .. } => {
                go(then, label, unlabelled) || els.as_deref().is_some_and(|e| go(e, label, unlabelled))
            }
            Stmt::Labeled { body, .. } => go(body, label, unlabelled),
            Stmt::While { body, .. } | Stmt::For { body, .. } => go(body, label, false),
            Stmt::Switch { cases, default, .. } => cases
                .iter()
                .flat_map(|c| &c.body)
                .chain(default.iter().flatten())
                .any(|s| go(s, label, unlabelled)),
            _ => false,
        }
    }
    go(s, label, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{check_core, pretty};
    use crate::parse::parse;

    fn ds(src: &str) -> Program {
        let p = desugar(&parse(src).unwrap());
        check_core(&p).unwrap_or_else(|e| panic!("{e}\n{}", pretty(&p)));
        p
    }

    #[test]
    fn for_becomes_while_in_a_block() {
        let p = ds("for (let i = 0; i < 3; i = i + 1) { out = i; }");
        let expected = parse("{ let i = 0; while (i < 3) { { out = i; } i = (i + 1); } }").unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn anonymous_functions_are_named_and_lifted() {
        let p = ds("let c = require('containerless'); c.get('u', (resp) => { out = resp; });");
        assert_eq!(
            pretty(&p),
            "let F$1 = function(resp) {\n  out = resp;\n};\nlet _$2 = get('u', F$1);\n"
        );
    }

    #[test]
    fn fun_example_is_unchanged() {
        let src = "let x = 10; let F = function(y) { return x + y; }; let foo = F(3);";
        assert_eq!(ds(src), parse(src).unwrap());
    }

    #[test]
    fn nested_calls_are_lifted_in_order() {
        let p = ds("let f = function(a) { return a; }; let x = f(1) + f(2);");
        let names: Vec<_> = p
            .body
            .iter()
            .filter_map(|s| match s {
                Stmt::Let { name, .. } => Some(name.as_str()),
                _ => None,
            })
            .collect();
        assert_eq!(names, ["f", "r$1", "r$2", "x"]);
    }

    #[test]
    fn variable_arguments_get_temporaries() {
        let p = ds("let f = function(a, b) { return a - b; }; let a = 1; let b = 2; let r = f(b, a);");
        assert!(pretty(&p).contains("let a$1 = b;\nlet a$2 = a;\nlet r = f(a$1, a$2);"), "{}", pretty(&p));
    }

    #[test]
    fn break_and_continue_get_labels() {
        let p = ds("let i = 0; while (true) { i += 1; if (i < 3) continue; else break; }");
        let text = pretty(&p);
        assert!(text.contains("brk$1: while (true)"), "{text}");
        assert!(text.contains("cont$2: {"), "{text}");
        assert!(text.contains("break cont$2;") && text.contains("break brk$1;"), "{text}");
    }

    #[test]
    fn switch_becomes_if_chain() {
        let p = ds("let r = 0; switch (x) { case 1: r = 10; break; case 2: r = 20; default: r = r + 1; }");
        let text = pretty(&p);
        assert!(text.contains("brk$1: {"), "{text}");
        assert!(text.contains("if ((m$3 || (d$2 === 1)))"), "{text}");
    }

    #[test]
    fn main_gets_a_listener() {
        let p = ds("let c = require('containerless'); function main(req) { c.respond(req.body); }");
        assert!(pretty(&p).ends_with("let _$2 = listen(main);\n"), "{}", pretty(&p));
    }

    #[test]
    fn calls_in_loop_conditions_move_into_the_body() {
        let p = ds("let f = function() { return false; }; while (f()) { out = 1; }");
        assert!(pretty(&p).contains("else break brk$1;"), "{}", pretty(&p));
    }

    #[test]
    fn desugaring_is_idempotent() {
        let src = "
            let c = require('containerless');
            function helper(a) { return a * 2; }
            function main(req) {
                let total = 0;
                for (let i = 0; i < 4; i++) {
                    if (i === 2) continue;
                    total += helper(i);
                }
                c.get('x', function(resp) { c.respond({ total: total, resp: resp }); });
            }
        ";
        let once = ds(src);
        let twice = desugar(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn forward_references_hoist_the_declaration() {
        let p = ds("let y = f(); function f() { return 1; }");
        assert!(matches!(&p.body[0], Stmt::Let { name, .. } if name == "f"));
    }
}
