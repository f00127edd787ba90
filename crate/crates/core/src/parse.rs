//! Lexer and recursive-descent parser for the guest language.
//!
//! The accepted language is a strict subset of JavaScript: statements end in
//! semicolons, `==` and `!=` are rejected, and dynamic features such as
//! `eval`, getters, setters, proxies, classes and exceptions are reported as
//! [`ParseError::Unsupported`].

use thiserror::Error;

use crate::ast::{is_builtin, BinOp, Expr, Function, Lit, Program, Stmt, SwitchCase, UnOp};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("unsupported feature at {line}:{col}: {feature}")]
    Unsupported {
        line: u32,
        col: u32,
        feature: String,
    },
}

impl ParseError {
    pub fn is_unsupported(&self) -> bool {
        matches!(self, ParseError::Unsupported { .. })
    }
}

const KEYWORDS: &[&str] = &[
    "let", "const", "var", "function", "if", "else", "while", "for", "do", "switch", "case",
    "default", "break", "continue", "return", "true", "false", "undefined", "null", "new",
    "this", "class", "try", "catch", "finally", "throw", "typeof", "delete", "instanceof", "in",
    "of", "with", "yield", "async", "await", "import", "export", "void",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Identifiers whose use signals a feature outside the supported subset.
const UNSUPPORTED_NAMES: &[(&str, &str)] = &[
    ("eval", "eval"),
    ("Proxy", "proxies"),
    ("Reflect", "reflection"),
    ("Function", "the Function constructor"),
    ("arguments", "the arguments object"),
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(Lit),
    Str(String),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: u32,
    col: u32,
}

// Longest first so that maximal munch works by linear scan.
const PUNCTS: &[&str] = &[
    "===", "!==", "...", "=>", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=",
    "/=", "%=", "**", "??", "?.", "{", "}", "(", ")", "[", "]", ";", ",", ":", ".", "=", "<",
    ">", "+", "-", "*", "/", "%", "!", "?", "&", "|", "^", "~",
];

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let err = |line, col, msg: &str| ParseError::Syntax {
        line,
        col,
        msg: msg.to_string(),
    };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (sl, sc) = (line, col);
            i += 2;
            col += 2;
            loop {
                match chars.get(i) {
                    None => return Err(err(sl, sc, "unterminated comment")),
                    Some('*') if chars.get(i + 1) == Some(&'/') => {
                        i += 2;
                        col += 2;
                        break;
                    }
                    Some('\n') => {
                        i += 1;
                        line += 1;
                        col = 1;
                    }
                    Some(_) => {
                        i += 1;
                        col += 1;
                    }
                }
            }
            continue;
        }
        let (tl, tc) = (line, col);
        if c == '$' {
            return Err(err(tl, tc, "`$` is reserved for compiler-generated names"));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            if chars.get(i) == Some(&'$') {
                return Err(err(line, col + (i - start) as u32, "`$` is reserved for compiler-generated names"));
            }
            col += (i - start) as u32;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut float = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                float = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if matches!(chars.get(i), Some('e') | Some('E')) {
                let mut j = i + 1;
                if matches!(chars.get(j), Some('+') | Some('-')) {
                    j += 1;
                }
                if chars.get(j).is_some_and(|d| d.is_ascii_digit()) {
                    float = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            if chars.get(i).is_some_and(|d| d.is_ascii_alphabetic() || *d == '_') {
                return Err(err(tl, tc, "malformed number"));
            }
            let text: String = chars[start..i].iter().collect();
            col += (i - start) as u32;
            let lit = if float {
                Lit::Float(text.parse().map_err(|_| err(tl, tc, "malformed number"))?)
            } else {
                match text.parse::<i64>() {
                    Ok(n) if n.unsigned_abs() <= crate::ops::MAX_SAFE_INT as u64 => Lit::Int(n),
                    _ => Lit::Float(text.parse().map_err(|_| err(tl, tc, "malformed number"))?),
                }
            };
            out.push(Token {
                tok: Tok::Num(lit),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c == '\'' || c == '"' {
            let quote = c;
            i += 1;
            col += 1;
            let mut s = String::new();
            loop {
                let Some(&ch) = chars.get(i) else {
                    return Err(err(tl, tc, "unterminated string"));
                };
                i += 1;
                col += 1;
                if ch == quote {
                    break;
                }
                match ch {
                    '\n' => return Err(err(tl, tc, "unterminated string")),
                    '\\' => {
                        let Some(&e) = chars.get(i) else {
                            return Err(err(tl, tc, "unterminated string"));
                        };
                        i += 1;
                        col += 1;
                        match e {
                            'n' => s.push('\n'),
                            't' => s.push('\t'),
                            'r' => s.push('\r'),
                            '0' => s.push('\0'),
                            '\\' | '\'' | '"' | '/' => s.push(e),
                            'u' => {
                                let hex: String = chars.get(i..i + 4).map(|h| h.iter().collect()).unwrap_or_default();
                                let code = u32::from_str_radix(&hex, 16)
                                    .ok()
                                    .and_then(char::from_u32)
                                    .ok_or_else(|| err(line, col, "bad unicode escape"))?;
                                s.push(code);
                                i += 4;
                                col += 4;
                            }
                            _ => return Err(err(line, col, "unknown escape sequence")),
                        }
                    }
                    other => s.push(other),
                }
            }
            out.push(Token {
                tok: Tok::Str(s),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c == '`' {
            return Err(ParseError::Unsupported {
                line: tl,
                col: tc,
                feature: "template literals".into(),
            });
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                i += p.len();
                col += p.len() as u32;
                out.push(Token {
                    tok: Tok::Punct(p),
                    line: tl,
                    col: tc,
                });
            }
            None => return Err(err(tl, tc, &format!("unexpected character `{c}`"))),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(ParseError::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn unsupported<T>(&self, feature: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(ParseError::Unsupported {
            line: t.line,
            col: t.col,
            feature: feature.into(),
        })
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.error(format!("expected `{p}`, found {}", describe(self.peek())))
        }
    }

    /// An identifier usable as a variable or label name.
    fn binding_name(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if is_keyword(&s) => self.error(format!("`{s}` is a reserved word")),
            Tok::Ident(s) => {
                if let Some((_, feat)) = UNSUPPORTED_NAMES.iter().find(|(n, _)| *n == s) {
                    return self.unsupported(*feat);
                }
                if is_builtin(&s) {
                    return self.error(format!("`{s}` is a builtin and cannot be rebound"));
                }
                self.bump();
                Ok(s)
            }
            other => self.error(format!("expected identifier, found {}", describe(&other))),
        }
    }

    fn check_unsupported_keyword(&self) -> PResult<()> {
        let Tok::Ident(s) = self.peek() else {
            return Ok(());
        };
        let feature = match s.as_str() {
            "var" => "`var` declarations",
            "class" => "classes",
            "try" | "catch" | "finally" | "throw" => "exceptions",
            "new" => "`new` expressions",
            "this" => "`this`",
            "typeof" => "`typeof`",
            "delete" => "`delete`",
            "instanceof" => "`instanceof`",
            "with" => "`with`",
            "yield" => "generators",
            "async" | "await" => "async functions",
            "import" | "export" => "modules",
            "do" => "`do`-`while` loops",
            "void" => "`void`",
            _ => return Ok(()),
        };
        self.unsupported(feature)
    }

    fn program(&mut self) -> PResult<Program> {
        let mut body = Vec::new();
        while *self.peek() != Tok::Eof {
            body.push(self.stmt()?);
        }
        Ok(Program { body })
    }

    fn block_body(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_punct("{")?;
        let mut body = Vec::new();
        while !self.is_punct("}") {
            if *self.peek() == Tok::Eof {
                return self.error("unterminated block");
            }
            body.push(self.stmt()?);
        }
        self.bump();
        Ok(body)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        self.check_unsupported_keyword()?;
        if self.is_punct("{") {
            return Ok(Stmt::Block {
                body: self.block_body()?,
            });
        }
        if self.is_punct(";") {
            self.bump();
            return Ok(Stmt::Block { body: vec![] });
        }
        let Tok::Ident(word) = self.peek().clone() else {
            return self.simple_stmt_semi();
        };
        match word.as_str() {
            "let" | "const" => {
                let s = self.let_decl()?;
                self.expect_punct(";")?;
                Ok(s)
            }
            "function" => {
                self.bump();
                let name = self.binding_name()?;
                let func = self.function_rest(Some(name.clone()))?;
                Ok(Stmt::FunctionDecl { name, func })
            }
            "if" => {
                self.bump();
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                let then = Box::new(self.stmt()?);
                let els = if self.is_kw("else") {
                    self.bump();
                    Some(Box::new(self.stmt()?))
                } else {
                    None
                };
                Ok(Stmt::If { cond, then, els })
            }
            "while" => {
                self.bump();
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                let body = Box::new(self.stmt()?);
                Ok(Stmt::While { cond, body })
            }
            "for" => self.for_stmt(),
            "switch" => self.switch_stmt(),
            "break" | "continue" => {
                self.bump();
                let label = match self.peek() {
                    Tok::Ident(_) => Some(self.binding_name()?),
                    _ => None,
                };
                self.expect_punct(";")?;
                Ok(if word == "break" {
                    Stmt::Break { label }
                } else {
                    Stmt::Continue { label }
                })
            }
            "return" => {
                self.bump();
                let value = if self.is_punct(";") {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect_punct(";")?;
                Ok(Stmt::Return { value })
            }
            "else" | "case" | "default" => self.error(format!("unexpected `{word}`")),
            _ if !is_keyword(&word) && self.peek_at(1) == &Tok::Punct(":") => {
                let label = self.binding_name()?;
                self.bump();
                let body = Box::new(self.stmt()?);
                Ok(Stmt::Labeled { label, body })
            }
            _ => self.simple_stmt_semi(),
        }
    }

    fn let_decl(&mut self) -> PResult<Stmt> {
        self.bump();
        let name = self.binding_name()?;
        let init = if self.eat_punct("=") {
            self.expr()?
        } else {
            Expr::undefined()
        };
        if self.is_punct(",") {
            return self.unsupported("multiple declarators in one `let`");
        }
        Ok(Stmt::Let { name, init })
    }

    fn simple_stmt_semi(&mut self) -> PResult<Stmt> {
        let s = self.simple_stmt()?;
        self.expect_punct(";")?;
        Ok(s)
    }

    /// Assignment, compound assignment, increment or expression statement.
    fn simple_stmt(&mut self) -> PResult<Stmt> {
        for (p, op) in [("++", BinOp::Add), ("--", BinOp::Sub)] {
            if self.eat_punct(p) {
                let target = self.unary()?;
                return self.increment(target, op);
            }
        }
        let e = self.expr()?;
        let compound = [
            ("+=", BinOp::Add),
            ("-=", BinOp::Sub),
            ("*=", BinOp::Mul),
            ("/=", BinOp::Div),
            ("%=", BinOp::Rem),
        ];
        if self.is_punct("=") {
            self.check_lvalue(&e)?;
            self.bump();
            let value = self.expr()?;
            return Ok(Stmt::Assign { target: e, value });
        }
        for (p, op) in compound {
            if self.is_punct(p) {
                self.check_lvalue(&e)?;
                self.bump();
                let rhs = self.expr()?;
                return Ok(Stmt::Assign {
                    target: e.clone(),
                    value: Expr::binary(op, e, rhs),
                });
            }
        }
        for (p, op) in [("++", BinOp::Add), ("--", BinOp::Sub)] {
            if self.eat_punct(p) {
                return self.increment(e, op);
            }
        }
        Ok(Stmt::Expr { expr: e })
    }

    fn increment(&self, target: Expr, op: BinOp) -> PResult<Stmt> {
        self.check_lvalue(&target)?;
        Ok(Stmt::Assign {
            target: target.clone(),
            value: Expr::binary(op, target, Expr::int(1)),
        })
    }

    fn check_lvalue(&self, e: &Expr) -> PResult<()> {
        if e.is_lvalue() && e.is_pure() {
            Ok(())
        } else {
            self.error("invalid assignment target")
        }
    }

    fn for_stmt(&mut self) -> PResult<Stmt> {
        self.bump();
        self.expect_punct("(")?;
        let init = if self.is_punct(";") {
            None
        } else if self.is_kw("let") || self.is_kw("const") {
            Some(Box::new(self.let_decl()?))
        } else {
            self.check_unsupported_keyword()?;
            Some(Box::new(self.simple_stmt()?))
        };
        if self.is_kw("of") || self.is_kw("in") {
            return self.unsupported("`for`-`in` and `for`-`of` loops");
        }
        self.expect_punct(";")?;
        let cond = if self.is_punct(";") {
            None
        } else {
            Some(self.expr()?)
        };
        self.expect_punct(";")?;
        let update = if self.is_punct(")") {
            None
        } else {
            Some(Box::new(self.simple_stmt()?))
        };
        self.expect_punct(")")?;
        let body = Box::new(self.stmt()?);
        Ok(Stmt::For {
            init,
            cond,
            update,
            body,
        })
    }

    fn switch_stmt(&mut self) -> PResult<Stmt> {
        self.bump();
        self.expect_punct("(")?;
        let scrutinee = self.expr()?;
        self.expect_punct(")")?;
        self.expect_punct("{")?;
        let mut cases = Vec::new();
        let mut default = None;
        while !self.eat_punct("}") {
            if default.is_some() {
                return self.unsupported("`default` before the last `case`");
            }
            let test = if self.is_kw("case") {
                self.bump();
                let t = self.expr()?;
                Some(t)
            } else if self.is_kw("default") {
                self.bump();
                None
            } else {
                return self.error("expected `case` or `default`");
            };
            self.expect_punct(":")?;
            let mut body = Vec::new();
            while !self.is_kw("case") && !self.is_kw("default") && !self.is_punct("}") {
                if *self.peek() == Tok::Eof {
                    return self.error("unterminated switch");
                }
                body.push(self.stmt()?);
            }
            match test {
                Some(test) => cases.push(SwitchCase { test, body }),
                None => default = Some(body),
            }
        }
        Ok(Stmt::Switch {
            scrutinee,
            cases,
            default,
        })
    }

    fn params(&mut self) -> PResult<Vec<String>> {
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.eat_punct(")") {
            loop {
                if self.is_punct("...") {
                    return self.unsupported("rest parameters");
                }
                let p = self.binding_name()?;
                if self.is_punct("=") {
                    return self.unsupported("default parameters");
                }
                if params.contains(&p) {
                    return self.error(format!("duplicate parameter `{p}`"));
                }
                params.push(p);
                if self.eat_punct(")") {
                    break;
                }
                self.expect_punct(",")?;
            }
        }
        Ok(params)
    }

    fn function_rest(&mut self, name: Option<String>) -> PResult<Function> {
        let params = self.params()?;
        let body = self.block_body()?;
        Ok(Function { name, params, body })
    }

    fn arrow_rest(&mut self, params: Vec<String>) -> PResult<Expr> {
        self.expect_punct("=>")?;
        let body = if self.is_punct("{") {
            self.block_body()?
        } else {
            let e = self.expr()?;
            vec![Stmt::Return { value: Some(e) }]
        };
        Ok(Expr::Function(Function {
            name: None,
            params,
            body,
        }))
    }

    fn paren_is_arrow(&self) -> bool {
        let mut depth = 0usize;
        let mut i = self.pos;
        while i < self.toks.len() {
            match &self.toks[i].tok {
                Tok::Punct("(") => depth += 1,
                Tok::Punct(")") => {
                    depth -= 1;
                    if depth == 0 {
                        return matches!(self.toks.get(i + 1).map(|t| &t.tok), Some(Tok::Punct("=>")));
                    }
                }
                Tok::Eof => return false,
                _ => {}
            }
            i += 1;
        }
        false
    }

    fn expr(&mut self) -> PResult<Expr> {
        let e = self.binary(0)?;
        if self.is_punct("?") {
            return self.unsupported("conditional expressions");
        }
        if self.is_punct("??") || self.is_punct("**") {
            return self.unsupported(format!("the `{}` operator", describe(self.peek())));
        }
        Ok(e)
    }

    fn binary(&mut self, level: usize) -> PResult<Expr> {
        const LEVELS: &[&[(&str, BinOp)]] = &[
            &[("||", BinOp::Or)],
            &[("&&", BinOp::And)],
            &[("===", BinOp::StrictEq), ("!==", BinOp::StrictNe)],
            &[("<=", BinOp::Le), (">=", BinOp::Ge), ("<", BinOp::Lt), (">", BinOp::Gt)],
            &[("+", BinOp::Add), ("-", BinOp::Sub)],
            &[("*", BinOp::Mul), ("/", BinOp::Div), ("%", BinOp::Rem)],
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut left = self.binary(level + 1)?;
        loop {
            if self.is_punct("==") || self.is_punct("!=") {
                return self.unsupported("loose equality (`==`, `!=`)");
            }
            if ["&", "|", "^"].iter().any(|p| self.is_punct(p)) {
                return self.unsupported("bitwise operators");
            }
            if self.is_kw("instanceof") || self.is_kw("in") {
                return self.check_unsupported_keyword().and_then(|_| self.unsupported("`in`"));
            }
            let Some((_, op)) = LEVELS[level].iter().find(|(p, _)| self.is_punct(p)) else {
                return Ok(left);
            };
            self.bump();
            let right = self.binary(level + 1)?;
            left = Expr::binary(*op, left, right);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        self.check_unsupported_keyword()?;
        if self.eat_punct("!") {
            let operand = self.unary()?;
            return Ok(Expr::Unary {
                op: UnOp::Not,
                operand: Box::new(operand),
            });
        }
        if self.eat_punct("-") {
            if let Tok::Num(lit) = self.peek().clone() {
                // Fold negative literals unless a postfix operator binds tighter.
                if !matches!(self.peek_at(1), Tok::Punct(".") | Tok::Punct("[") | Tok::Punct("(")) {
                    self.bump();
                    return Ok(Expr::Const {
                        value: match lit {
                            Lit::Int(i) => Lit::Int(-i),
                            Lit::Float(x) => Lit::Float(-x),
                            other => other,
                        },
                    });
                }
            }
            let operand = self.unary()?;
            return Ok(Expr::Unary {
                op: UnOp::Neg,
                operand: Box::new(operand),
            });
        }
        if self.is_punct("+") || self.is_punct("~") {
            return self.unsupported("unary `+` and `~`");
        }
        if self.is_punct("++") || self.is_punct("--") {
            return self.error("increment is only allowed as a statement");
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.eat_punct(".") {
                match self.bump() {
                    Tok::Ident(name) => {
                        if ["get", "set"].contains(&name.as_str())
                            && matches!(&e, Expr::Var { name } if name == "Object")
                        {
                            return self.unsupported("getters and setters");
                        }
                        if name == "defineProperty" || name == "__defineGetter__" || name == "__defineSetter__" {
                            return self.unsupported("getters and setters");
                        }
                        e = Expr::member(e, Expr::string(name));
                    }
                    other => return self.error(format!("expected property name, found {}", describe(&other))),
                }
            } else if self.eat_punct("[") {
                let p = self.expr()?;
                self.expect_punct("]")?;
                e = Expr::member(e, p);
            } else if self.is_punct("(") {
                self.bump();
                let mut args = Vec::new();
                if !self.eat_punct(")") {
                    loop {
                        if self.is_punct("...") {
                            return self.unsupported("spread arguments");
                        }
                        args.push(self.expr()?);
                        if self.eat_punct(")") {
                            break;
                        }
                        self.expect_punct(",")?;
                    }
                }
                e = Expr::call(e, args);
            } else if self.is_punct("?.") {
                return self.unsupported("optional chaining");
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        self.check_unsupported_keyword()?;
        match self.peek().clone() {
            Tok::Num(lit) => {
                self.bump();
                Ok(Expr::Const { value: lit })
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::string(s))
            }
            Tok::Punct("(") => {
                if self.paren_is_arrow() {
                    let params = self.params()?;
                    return self.arrow_rest(params);
                }
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Punct("[") => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat_punct("]") {
                    loop {
                        if self.is_punct("...") {
                            return self.unsupported("spread elements");
                        }
                        items.push(self.expr()?);
                        if self.eat_punct("]") {
                            break;
                        }
                        self.expect_punct(",")?;
                        if self.eat_punct("]") {
                            break;
                        }
                    }
                }
                Ok(Expr::Array { items })
            }
            Tok::Punct("{") => self.object_literal(),
            Tok::Ident(word) => match word.as_str() {
                "true" | "false" => {
                    self.bump();
                    Ok(Expr::Const {
                        value: Lit::Bool(word == "true"),
                    })
                }
                "undefined" | "null" => {
                    self.bump();
                    Ok(Expr::undefined())
                }
                "function" => {
                    self.bump();
                    let name = match self.peek() {
                        Tok::Ident(_) => Some(self.binding_name()?),
                        _ => None,
                    };
                    Ok(Expr::Function(self.function_rest(name)?))
                }
                w if is_keyword(w) => self.error(format!("unexpected `{w}`")),
                _ => {
                    if let Some((_, feat)) = UNSUPPORTED_NAMES.iter().find(|(n, _)| *n == word) {
                        return self.unsupported(*feat);
                    }
                    self.bump();
                    if self.is_punct("=>") {
                        if is_builtin(&word) {
                            return self.error(format!("`{word}` is a builtin and cannot be rebound"));
                        }
                        return self.arrow_rest(vec![word]);
                    }
                    Ok(Expr::var(word))
                }
            },
            other => self.error(format!("unexpected {}", describe(&other))),
        }
    }

    fn object_literal(&mut self) -> PResult<Expr> {
        self.expect_punct("{")?;
        let mut fields: Vec<(String, Expr)> = Vec::new();
        while !self.eat_punct("}") {
            let key = match self.bump() {
                Tok::Ident(k) => {
                    if (k == "get" || k == "set") && matches!(self.peek(), Tok::Ident(_) | Tok::Str(_)) {
                        return self.unsupported("getters and setters");
                    }
                    k
                }
                Tok::Str(k) => k,
                Tok::Num(Lit::Int(n)) => n.to_string(),
                Tok::Punct("[") => return self.unsupported("computed property names"),
                Tok::Punct("...") => return self.unsupported("object spread"),
                other => return self.error(format!("expected property name, found {}", describe(&other))),
            };
            let value = if self.eat_punct(":") {
                self.expr()?
            } else if self.is_punct("(") {
                return self.unsupported("method shorthand");
            } else {
                if is_keyword(&key) {
                    return self.error(format!("`{key}` is a reserved word"));
                }
                Expr::var(key.clone())
            };
            if let Some(slot) = fields.iter_mut().find(|(k, _)| *k == key) {
                slot.1 = value;
            } else {
                fields.push((key, value));
            }
            if !self.is_punct("}") {
                self.expect_punct(",")?;
            }
        }
        Ok(Expr::Object { fields })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(l) => format!("number {l}"),
        Tok::Str(s) => format!("string {s:?}"),
        Tok::Punct(p) => format!("`{p}`"),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses guest source text and checks it for features outside the subset.
pub fn parse(src: &str) -> Result<Program, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let prog = p.program()?;
    validate(&prog)?;
    Ok(prog)
}

/// Parses a single expression.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.error("trailing input after expression");
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// Post-parse validation: API module import, method calls, jump targets.

/// The name bound by `let c = require('containerless');`, if any.
pub fn api_alias(p: &Program) -> Option<&str> {
    p.body.iter().find_map(|s| match s {
        Stmt::Let { name, init } if is_require(init) => Some(name.as_str()),
        _ => None,
    })
}

pub(crate) fn is_require(e: &Expr) -> bool {
    match e {
        Expr::Call { callee, args } => {
            matches!(&**callee, Expr::Var { name } if name == "require")
                && matches!(args.as_slice(), [Expr::Const { value: Lit::Str(m) }] if m == "containerless")
        }
        _ => false,
    }
}

fn unsupported(feature: impl Into<String>) -> ParseError {
    ParseError::Unsupported {
        line: 0,
        col: 0,
        feature: feature.into(),
    }
}

fn semantic(msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line: 0,
        col: 0,
        msg: msg.into(),
    }
}

#[derive(Clone)]
struct Jump {
    label: Option<String>,
    is_loop: bool,
    is_switch: bool,
}

struct Validator<'a> {
    alias: Option<&'a str>,
}

impl Validator<'_> {
    fn stmts(&self, body: &[Stmt], jumps: &mut Vec<Jump>, top: bool) -> Result<(), ParseError> {
        for s in body {
            if top {
                if let Stmt::Let { init, .. } = s {
                    if is_require(init) {
                        continue;
                    }
                }
            }
            self.stmt(s, jumps, None)?;
        }
        Ok(())
    }

    fn stmt(&self, s: &Stmt, jumps: &mut Vec<Jump>, label: Option<&str>) -> Result<(), ParseError> {
        match s {
            Stmt::Let { init, .. } => self.expr(init),
            Stmt::Assign { target, value } => {
                self.expr(target)?;
                self.expr(value)
            }
            Stmt::Expr { expr } => self.expr(expr),
            Stmt::Block { body } => self.stmts(body, jumps, false),
            Stmt::If { cond, then, els } => {
                self.expr(cond)?;
                self.stmt(then, jumps, None)?;
                match els {
                    Some(e) => self.stmt(e, jumps, None),
                    None => Ok(()),
                }
            }
            Stmt::While { cond, body } => {
                self.expr(cond)?;
                self.looped(body, jumps, label, true, false)
            }
            Stmt::For {
                init,
                cond,
                update,
                body,
            } => {
                if let Some(i) = init {
                    self.stmt(i, jumps, None)?;
                }
                if let Some(c) = cond {
                    self.expr(c)?;
                }
                if let Some(u) = update {
                    self.stmt(u, jumps, None)?;
                }
                self.looped(body, jumps, label, true, false)
            }
            Stmt::Switch {
                scrutinee,
                cases,
                default,
            } => {
                self.expr(scrutinee)?;
                jumps.push(Jump {
                    label: label.map(str::to_string),
                    is_loop: false,
                    is_switch: true,
                });
                for c in cases {
                    self.expr(&c.test)?;
                    self.stmts(&c.body, jumps, false)?;
                }
                if let Some(d) = default {
                    self.stmts(d, jumps, false)?;
                }
                jumps.pop();
                Ok(())
            }
            Stmt::Labeled { label: l, body } => {
                if jumps.iter().any(|j| j.label.as_deref() == Some(l)) {
                    return Err(semantic(format!("label `{l}` shadows an enclosing label")));
                }
                match &**body {
                    Stmt::While { .. } | Stmt::For { .. } | Stmt::Switch { .. } => self.stmt(body, jumps, Some(l)),
                    _ => {
                        jumps.push(Jump {
                            label: Some(l.clone()),
                            is_loop: false,
                            is_switch: false,
                        });
                        self.stmt(body, jumps, None)?;
                        jumps.pop();
                        Ok(())
                    }
                }
            }
            Stmt::Break { label: None } => {
                if jumps.iter().any(|j| j.is_loop || j.is_switch) {
                    Ok(())
                } else {
                    Err(semantic("`break` outside of a loop or switch"))
                }
            }
            Stmt::Break { label: Some(l) } => {
                if jumps.iter().any(|j| j.label.as_deref() == Some(l)) {
                    Ok(())
                } else {
                    Err(semantic(format!("undefined label `{l}`")))
                }
            }
            Stmt::Continue { label: None } => {
                if jumps.iter().any(|j| j.is_loop) {
                    Ok(())
                } else {
                    Err(semantic("`continue` outside of a loop"))
                }
            }
            Stmt::Continue { label: Some(l) } => {
                if jumps.iter().any(|j| j.is_loop && j.label.as_deref() == Some(l)) {
                    Ok(())
                } else {
                    Err(semantic(format!("`continue {l}` does not name an enclosing loop")))
                }
            }
            Stmt::Return { value } => match value {
                Some(v) => self.expr(v),
                None => Ok(()),
            },
            Stmt::FunctionDecl { func, .. } => self.function(func),
        }
    }

    fn looped(
        &self,
        body: &Stmt,
        jumps: &mut Vec<Jump>,
        label: Option<&str>,
        is_loop: bool,
        is_switch: bool,
    ) -> Result<(), ParseError> {
        jumps.push(Jump {
            label: label.map(str::to_string),
            is_loop,
            is_switch,
        });
        let r = self.stmt(body, jumps, None);
        jumps.pop();
        r
    }

    fn function(&self, f: &Function) -> Result<(), ParseError> {
        let mut jumps = Vec::new();
        self.stmts(&f.body, &mut jumps, false)
    }

    fn expr(&self, e: &Expr) -> Result<(), ParseError> {
        match e {
            Expr::Const { .. } => Ok(()),
            Expr::Var { name } => {
                if name == "require" {
                    Err(unsupported("`require` of modules other than the platform API"))
                } else if Some(name.as_str()) == self.alias {
                    Err(unsupported("using the platform API object as a value"))
                } else {
                    Ok(())
                }
            }
            Expr::Binary { left, right, .. } => {
                self.expr(left)?;
                self.expr(right)
            }
            Expr::Unary { operand, .. } => self.expr(operand),
            Expr::Member { object, property } => {
                self.expr(object)?;
                self.expr(property)
            }
            Expr::Object { fields } => fields.iter().try_for_each(|(_, v)| self.expr(v)),
            Expr::Array { items } => items.iter().try_for_each(|v| self.expr(v)),
            Expr::Call { callee, args } => {
                match &**callee {
                    Expr::Var { name } if name == "require" => {
                        return Err(unsupported("`require` outside a top-level `let`"));
                    }
                    Expr::Var { .. } => self.expr(callee)?,
                    Expr::Member { object, property } => {
                        let api_call = matches!(
                            (&**object, &**property, self.alias),
                            (Expr::Var { name }, Expr::Const { value: Lit::Str(m) }, Some(a))
                                if name == a && is_builtin(m)
                        );
                        if !api_call {
                            return Err(unsupported("method calls"));
                        }
                    }
                    _ => return Err(unsupported("calls of computed callees")),
                }
                args.iter().try_for_each(|a| self.expr(a))
            }
            Expr::Function(f) => self.function(f),
        }
    }
}

fn validate(p: &Program) -> Result<(), ParseError> {
    let v = Validator { alias: api_alias(p) };
    v.stmts(&p.body, &mut Vec::new(), true)
}
