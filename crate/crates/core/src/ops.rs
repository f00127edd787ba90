//! Primitive operator semantics shared by the interpreter and the executor.
//!
//! Coercion table (`T` = TypeError, `ref` = object, array, function or env):
//!
//! | operator            | operands                       | result                              |
//! |---------------------|--------------------------------|-------------------------------------|
//! | `+`                 | either side a string           | concatenation of both as strings    |
//! | `+`                 | either side a `ref`            | T                                   |
//! | `+ - * / %`         | undefined, bool, int, float    | numeric; undefined = NaN, bool = 0/1|
//! | `- * / %`           | string or `ref`                | T                                   |
//! | `< > <= >=`         | both numbers                   | numeric comparison                  |
//! | `< > <= >=`         | both strings                   | lexicographic comparison            |
//! | `< > <= >=`         | anything else                  | T                                   |
//! | `=== !==`           | any                            | same tag and value; numbers compare |
//! |                     |                                | across int/float; refs by identity  |
//! | `&& \|\|`           | any                            | one operand, chosen by truthiness   |
//! | `!`                 | any                            | negated truthiness                  |
//! | unary `-`           | string or `ref`                | T                                   |
//!
//! Integers stay exact while the result fits in ±2^53; past that, and for
//! inexact division, the result is a float.

use thiserror::Error;

use crate::ast::{BinOp, UnOp};

pub const MAX_SAFE_INT: i64 = (1 << 53) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefKind {
    Object,
    Array,
    Function,
    Env,
}

impl RefKind {
    pub fn name(self) -> &'static str {
        match self {
            RefKind::Object => "object",
            RefKind::Array => "array",
            RefKind::Function => "function",
            RefKind::Env => "env",
        }
    }
}

/// A borrowed view of a runtime value for operator evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Operand<'a> {
    Undefined,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(&'a str),
    /// Reference value with an identity token.
    Ref(RefKind, usize),
}

impl Operand<'_> {
    pub fn type_name(&self) -> &'static str {
        match self {
            Operand::Undefined => "undefined",
            Operand::Bool(_) => "boolean",
            Operand::Int(_) | Operand::Float(_) => "number",
            Operand::Str(_) => "string",
            Operand::Ref(k, _) => k.name(),
        }
    }
}

/// A primitive result.
#[derive(Debug, Clone, PartialEq)]
pub enum Prim {
    Undefined,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

/// Result of a binary operator: a fresh primitive or one of the operands.
#[derive(Debug, Clone, PartialEq)]
pub enum OpResult {
    Prim(Prim),
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("TypeError: {0}")]
pub struct TypeError(pub String);

fn type_error<T>(op: &str, a: &Operand, b: &Operand) -> Result<T, TypeError> {
    Err(TypeError(format!(
        "cannot apply `{op}` to {} and {}",
        a.type_name(),
        b.type_name()
    )))
}

pub fn truthy(v: &Operand) -> bool {
    match v {
        Operand::Undefined => false,
        Operand::Bool(b) => *b,
        Operand::Int(i) => *i != 0,
        Operand::Float(x) => *x != 0.0 && !x.is_nan(),
        Operand::Str(s) => !s.is_empty(),
        Operand::Ref(..) => true,
    }
}

enum Num {
    Int(i64),
    Float(f64),
}

fn to_number(v: &Operand) -> Option<Num> {
    match v {
        Operand::Undefined => Some(Num::Float(f64::NAN)),
        Operand::Bool(b) => Some(Num::Int(*b as i64)),
        Operand::Int(i) => Some(Num::Int(*i)),
        Operand::Float(x) => Some(Num::Float(*x)),
        Operand::Str(_) | Operand::Ref(..) => None,
    }
}

fn as_f64(n: &Num) -> f64 {
    match n {
        Num::Int(i) => *i as f64,
        Num::Float(x) => *x,
    }
}

fn exact(r: Option<i64>) -> Option<Prim> {
    r.filter(|v| v.abs() <= MAX_SAFE_INT).map(Prim::Int)
}

fn arith(op: BinOp, a: Num, b: Num) -> Prim {
    if let (Num::Int(x), Num::Int(y)) = (&a, &b) {
        let (x, y) = (*x, *y);
        let r = match op {
            BinOp::Add => exact(x.checked_add(y)),
            BinOp::Sub => exact(x.checked_sub(y)),
            BinOp::Mul => match x.checked_mul(y) {
                // -0 is not representable as an integer.
                Some(0) if x < 0 || y < 0 => None,
                r => exact(r),
            },
            BinOp::Div => {
                if y != 0 && x % y == 0 && !(x == 0 && y < 0) {
                    exact(x.checked_div(y))
                } else {
                    None
                }
            }
            BinOp::Rem => {
                if y != 0 && !(x < 0 && x % y == 0) {
                    exact(x.checked_rem(y))
                } else {
                    None
                }
            }
            _ => unreachable!("not an arithmetic operator"),
        };
        if let Some(p) = r {
            return p;
        }
    }
    let (x, y) = (as_f64(&a), as_f64(&b));
    Prim::Float(match op {
        BinOp::Add => x + y,
        BinOp::Sub => x - y,
        BinOp::Mul => x * y,
        BinOp::Div => x / y,
        BinOp::Rem => x % y,
        _ => unreachable!("not an arithmetic operator"),
    })
}

fn to_concat_string(v: &Operand) -> Option<String> {
    match v {
        Operand::Undefined => Some("undefined".into()),
        Operand::Bool(b) => Some(b.to_string()),
        Operand::Int(i) => Some(i.to_string()),
        Operand::Float(x) => Some(number_to_string(*x)),
        Operand::Str(s) => Some((*s).to_string()),
        Operand::Ref(..) => None,
    }
}

fn numeric_eq(a: &Operand, b: &Operand) -> Option<bool> {
    match (a, b) {
        (Operand::Int(x), Operand::Int(y)) => Some(x == y),
        (Operand::Int(x), Operand::Float(y)) | (Operand::Float(y), Operand::Int(x)) => Some(*x as f64 == *y),
        (Operand::Float(x), Operand::Float(y)) => Some(x == y),
        _ => None,
    }
}

pub fn strict_eq(a: &Operand, b: &Operand) -> bool {
    if let Some(r) = numeric_eq(a, b) {
        return r;
    }
    match (a, b) {
        (Operand::Undefined, Operand::Undefined) => true,
        (Operand::Bool(x), Operand::Bool(y)) => x == y,
        (Operand::Str(x), Operand::Str(y)) => x == y,
        (Operand::Ref(k1, x), Operand::Ref(k2, y)) => k1 == k2 && x == y,
        _ => false,
    }
}

pub fn binop(op: BinOp, a: Operand, b: Operand) -> Result<OpResult, TypeError> {
    let prim = |p| Ok(OpResult::Prim(p));
    match op {
        BinOp::And => Ok(if truthy(&a) { OpResult::Right } else { OpResult::Left }),
        BinOp::Or => Ok(if truthy(&a) { OpResult::Left } else { OpResult::Right }),
        BinOp::StrictEq => prim(Prim::Bool(strict_eq(&a, &b))),
        BinOp::StrictNe => prim(Prim::Bool(!strict_eq(&a, &b))),
        BinOp::Add if matches!(a, Operand::Str(_)) || matches!(b, Operand::Str(_)) => {
            match (to_concat_string(&a), to_concat_string(&b)) {
                (Some(x), Some(y)) => prim(Prim::Str(x + &y)),
                _ => type_error("+", &a, &b),
            }
        }
        BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => {
            match (to_number(&a), to_number(&b)) {
                (Some(x), Some(y)) => prim(arith(op, x, y)),
                _ => type_error(op.symbol(), &a, &b),
            }
        }
        BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge => {
            let ord = match (&a, &b) {
                (Operand::Str(x), Operand::Str(y)) => Some(x.cmp(y)),
                (Operand::Int(x), Operand::Int(y)) => Some(x.cmp(y)),
                (Operand::Int(_) | Operand::Float(_), Operand::Int(_) | Operand::Float(_)) => {
                    let x = as_f64(&to_number(&a).expect("numeric"));
                    let y = as_f64(&to_number(&b).expect("numeric"));
                    match x.partial_cmp(&y) {
                        Some(o) => Some(o),
                        // Any comparison with NaN is false.
                        None => return prim(Prim::Bool(false)),
                    }
                }
                _ => return type_error(op.symbol(), &a, &b),
            };
            let o = ord.expect("ordered");
            prim(Prim::Bool(match op {
                BinOp::Lt => o.is_lt(),
                BinOp::Gt => o.is_gt(),
                BinOp::Le => o.is_le(),
                _ => o.is_ge(),
            }))
        }
    }
}

pub fn unop(op: UnOp, a: Operand) -> Result<Prim, TypeError> {
    match op {
        UnOp::Not => Ok(Prim::Bool(!truthy(&a))),
        UnOp::Neg => match to_number(&a) {
            Some(Num::Int(0)) => Ok(Prim::Float(-0.0)),
            Some(Num::Int(i)) => Ok(Prim::Int(-i)),
            Some(Num::Float(x)) => Ok(Prim::Float(-x)),
            None => Err(TypeError(format!("cannot negate {}", a.type_name()))),
        },
    }
}

/// JavaScript-style number formatting.
pub fn number_to_string(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "Infinity".into() } else { "-Infinity".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let ax = x.abs();
    if x.fract() == 0.0 && ax < 1e21 {
        return format!("{x:.0}");
    }
    if (1e-6..1e21).contains(&ax) {
        return format!("{x}");
    }
    let s = format!("{x:e}");
    match s.split_once('e') {
        Some((m, e)) if !e.starts_with('-') => format!("{m}e+{e}"),
        _ => s,
    }
}

/// Integral floats that fit an `i64` are written as integers; NaN and
/// infinities become null.
pub fn number_to_json(x: f64) -> serde_json::Value {
    if !x.is_finite() {
        serde_json::Value::Null
    } else if x.fract() == 0.0 && (i64::MIN as f64..i64::MAX as f64).contains(&x) {
        serde_json::Value::from(x as i64)
    } else {
        serde_json::Number::from_f64(x).map_or(serde_json::Value::Null, serde_json::Value::Number)
    }
}

/// Index of `key` in an array of length `len`, if it is an in-range
/// integer index.
pub fn array_index(key: &Operand) -> Option<usize> {
    match key {
        Operand::Int(i) if *i >= 0 => Some(*i as usize),
        Operand::Float(x) if *x >= 0.0 && x.fract() == 0.0 && *x < 4294967295.0 => Some(*x as usize),
        Operand::Str(s) => s.parse::<usize>().ok().filter(|i| i.to_string() == *s),
        _ => None,
    }
}

/// Property name for object member access.
pub fn property_key(key: &Operand) -> Result<String, TypeError> {
    match key {
        Operand::Ref(k, _) => Err(TypeError(format!("cannot use {} as a property key", k.name()))),
        other => Ok(to_concat_string(other).expect("primitive")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use BinOp::*;
    use Operand as O;

    fn eval(op: BinOp, a: Operand, b: Operand) -> Result<Prim, TypeError> {
        binop(op, a, b).map(|r| match r {
            OpResult::Prim(p) => p,
            OpResult::Left => to_prim(a),
            OpResult::Right => to_prim(b),
        })
    }

    fn to_prim(o: Operand) -> Prim {
        match o {
            O::Undefined => Prim::Undefined,
            O::Bool(b) => Prim::Bool(b),
            O::Int(i) => Prim::Int(i),
            O::Float(x) => Prim::Float(x),
            O::Str(s) => Prim::Str(s.into()),
            O::Ref(..) => panic!("ref"),
        }
    }

    #[test]
    fn one_plus_true_is_two() {
        assert_eq!(eval(Add, O::Int(1), O::Bool(true)), Ok(Prim::Int(2)));
    }

    #[test]
    fn integers_promote_past_two_to_the_53() {
        assert_eq!(eval(Add, O::Int(MAX_SAFE_INT), O::Int(1)), Ok(Prim::Float(9007199254740992.0)));
        assert_eq!(eval(Div, O::Int(7), O::Int(2)), Ok(Prim::Float(3.5)));
        assert_eq!(eval(Div, O::Int(8), O::Int(2)), Ok(Prim::Int(4)));
        assert_eq!(eval(Rem, O::Int(7), O::Int(-3)), Ok(Prim::Int(1)));
        assert!(matches!(eval(Div, O::Int(1), O::Int(0)), Ok(Prim::Float(x)) if x == f64::INFINITY));
    }

    #[test]
    fn string_concatenation_formats_numbers() {
        assert_eq!(eval(Add, O::Str("n="), O::Float(2.0)), Ok(Prim::Str("n=2".into())));
        assert_eq!(eval(Add, O::Float(0.5), O::Str("")), Ok(Prim::Str("0.5".into())));
        assert_eq!(eval(Add, O::Undefined, O::Str("!")), Ok(Prim::Str("undefined!".into())));
    }

    #[test]
    fn number_formatting() {
        assert_eq!(number_to_string(1e21), "1e+21");
        assert_eq!(number_to_string(1.5e-7), "1.5e-7");
        assert_eq!(number_to_string(-0.0), "0");
        assert_eq!(number_to_string(123.25), "123.25");
    }

    fn sample(tag: &str) -> Operand<'static> {
        match tag {
            "undefined" => O::Undefined,
            "bool" => O::Bool(true),
            "int" => O::Int(3),
            "float" => O::Float(0.5),
            "string" => O::Str("s"),
            "object" => O::Ref(RefKind::Object, 1),
            _ => unreachable!(),
        }
    }

    /// The coercion table as data: one row per (operator, left tag, right
    /// tag) with the expected result.
    #[test]
    fn coercion_table() {
        const TAGS: [&str; 6] = ["undefined", "bool", "int", "float", "string", "object"];
        let nan = |r: &Result<Prim, TypeError>| matches!(r, Ok(Prim::Float(x)) if x.is_nan());
        for l in TAGS {
            for r in TAGS {
                let (a, b) = (sample(l), sample(r));
                let is_ref = l == "object" || r == "object";
                let is_str = l == "string" || r == "string";
                // `+`
                let add = eval(Add, a, b);
                if is_ref {
                    assert!(add.is_err(), "{l} + {r}");
                } else if is_str {
                    assert!(matches!(add, Ok(Prim::Str(_))), "{l} + {r}");
                } else if l == "undefined" || r == "undefined" {
                    assert!(nan(&add), "{l} + {r}");
                } else {
                    assert!(matches!(add, Ok(Prim::Int(_) | Prim::Float(_))), "{l} + {r}");
                }
                // `-`, `*`, `/`, `%`
                for op in [Sub, Mul, Div, Rem] {
                    let res = eval(op, a, b);
                    if is_ref || is_str {
                        assert!(res.is_err(), "{l} {op:?} {r}");
                    } else {
                        assert!(matches!(res, Ok(Prim::Int(_) | Prim::Float(_))), "{l} {op:?} {r}");
                    }
                }
                // relational
                let both_num = ["int", "float"].contains(&l) && ["int", "float"].contains(&r);
                let both_str = l == "string" && r == "string";
                for op in [Lt, Gt, Le, Ge] {
                    let res = eval(op, a, b);
                    if both_num || both_str {
                        assert!(matches!(res, Ok(Prim::Bool(_))), "{l} {op:?} {r}");
                    } else {
                        assert!(res.is_err(), "{l} {op:?} {r}");
                    }
                }
                // strict equality never fails and is tag-sensitive
                let eq = eval(StrictEq, a, b).unwrap();
                assert_eq!(eq, Prim::Bool(l == r), "{l} === {r}");
                // logical operators pick an operand
                assert!(binop(And, a, b).is_ok() && binop(Or, a, b).is_ok());
            }
        }
        assert_eq!(eval(StrictEq, O::Int(2), O::Float(2.0)), Ok(Prim::Bool(true)));
        assert_eq!(eval(StrictEq, O::Float(f64::NAN), O::Float(f64::NAN)), Ok(Prim::Bool(false)));
        assert_eq!(eval(Mul, O::Bool(true), O::Int(4)), Ok(Prim::Int(4)));
        assert_eq!(eval(And, O::Int(0), O::Str("x")), Ok(Prim::Int(0)));
        assert_eq!(eval(Or, O::Int(0), O::Str("x")), Ok(Prim::Str("x".into())));
        assert_eq!(unop(UnOp::Neg, O::Int(5)), Ok(Prim::Int(-5)));
        assert!(unop(UnOp::Neg, O::Str("5")).is_err());
        assert_eq!(unop(UnOp::Not, O::Str("")), Ok(Prim::Bool(true)));
    }
}
