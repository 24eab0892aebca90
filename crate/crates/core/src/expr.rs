//! The expression language shared by task relations, initial-state
//! constraints and contract formulas.
//!
//! Expressions are total over well-typed environments with one exception:
//! division, which is only admitted with a nonzero literal divisor by the
//! layers that construct expressions (the evaluator still guards against a
//! zero denominator and reports it as an error rather than panicking).
//! Real arithmetic is exact rational arithmetic; there is no floating
//! point anywhere in the evaluation path.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{BigInt, BigRational, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Sorts a variable can take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Unit,
    Bool,
    Int,
    Real,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Unit => write!(f, "unit"),
            Sort::Bool => write!(f, "bool"),
            Sort::Int => write!(f, "int"),
            Sort::Real => write!(f, "real"),
        }
    }
}

/// A runtime value. Reals are exact rationals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Unit,
    Bool(bool),
    Int(i64),
    Real(BigRational),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Unit => Sort::Unit,
            Value::Bool(_) => Sort::Bool,
            Value::Int(_) => Sort::Int,
            Value::Real(_) => Sort::Real,
        }
    }

    pub fn real_from_decimal(text: &str) -> Option<Value> {
        let (sign, body) = match text.strip_prefix('-') {
            Some(rest) => (-1i64, rest),
            None => (1i64, text),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((a, b)) => (a, b),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        let digits: String = format!("{}{}", int_part, frac_part);
        if !digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let numer: BigInt = digits.parse().ok()?;
        let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
        Some(Value::Real(BigRational::new(BigInt::from(sign) * numer, denom)))
    }

    pub fn rational(n: i64, d: i64) -> Value {
        Value::Real(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => write!(f, "()"),
            Value::Bool(b) => write!(f, "{}", b),
            Value::Int(n) => write!(f, "{}", n),
            Value::Real(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    And,
    Or,
    Implies,
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
}

/// An expression over named variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Const(Value),
    Var(String),
    Un(UnOp, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("sort mismatch applying {op} to {lhs} and {rhs}")]
    SortMismatch { op: String, lhs: Sort, rhs: Sort },
    #[error("operator {op} is not defined on sort {sort}")]
    BadOperand { op: String, sort: Sort },
    #[error("integer overflow in {0}")]
    Overflow(String),
    #[error("division by zero")]
    DivByZero,
    #[error("integer division is not supported")]
    IntDivision,
    #[error("condition of if-then-else is not boolean")]
    NonBoolCondition,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SortError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("operator {op} applied to {lhs} and {rhs}")]
    Mismatch { op: String, lhs: Sort, rhs: Sort },
    #[error("operator {op} is not defined on sort {sort}")]
    BadOperand { op: String, sort: Sort },
    #[error("branches of if-then-else have sorts {0} and {1}")]
    BranchMismatch(Sort, Sort),
    #[error("condition of if-then-else has sort {0}")]
    NonBoolCondition(Sort),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn bool(b: bool) -> Expr {
        Expr::Const(Value::Bool(b))
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(Value::Int(n))
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Bin(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Un(UnOp::Not, Box::new(e))
    }

    pub fn and(lhs: Expr, rhs: Expr) -> Expr {
        Expr::bin(BinOp::And, lhs, rhs)
    }

    pub fn implies(lhs: Expr, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Implies, lhs, rhs)
    }

    /// Conjunction of a list of expressions; `true` when empty.
    pub fn conj(mut es: Vec<Expr>) -> Expr {
        if es.is_empty() {
            return Expr::bool(true);
        }
        let mut acc = es.remove(0);
        for e in es {
            acc = Expr::and(acc, e);
        }
        acc
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Un(_, e) => e.collect_vars(out),
            Expr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Ite(c, t, e) => {
                c.collect_vars(out);
                t.collect_vars(out);
                e.collect_vars(out);
            }
        }
    }

    /// Rename free variables according to the map; unmapped names are kept.
    pub fn rename(&self, map: &BTreeMap<String, String>) -> Expr {
        match self {
            Expr::Const(v) => Expr::Const(v.clone()),
            Expr::Var(v) => match map.get(v) {
                Some(n) => Expr::Var(n.clone()),
                None => Expr::Var(v.clone()),
            },
            Expr::Un(op, e) => Expr::Un(*op, Box::new(e.rename(map))),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.rename(map)), Box::new(b.rename(map))),
            Expr::Ite(c, t, e) => Expr::Ite(
                Box::new(c.rename(map)),
                Box::new(t.rename(map)),
                Box::new(e.rename(map)),
            ),
        }
    }

    pub fn eval(&self, env: &BTreeMap<String, Value>) -> Result<Value, EvalError> {
        match self {
            Expr::Const(v) => Ok(v.clone()),
            Expr::Var(v) => env.get(v).cloned().ok_or_else(|| EvalError::Unbound(v.clone())),
            Expr::Un(op, e) => {
                let v = e.eval(env)?;
                match (op, v) {
                    (UnOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                    (UnOp::Neg, Value::Int(n)) => n
                        .checked_neg()
                        .map(Value::Int)
                        .ok_or_else(|| EvalError::Overflow("negation".into())),
                    (UnOp::Neg, Value::Real(r)) => Ok(Value::Real(-r)),
                    (op, v) => Err(EvalError::BadOperand {
                        op: format!("{:?}", op),
                        sort: v.sort(),
                    }),
                }
            }
            Expr::Bin(op, a, b) => {
                let va = a.eval(env)?;
                let vb = b.eval(env)?;
                eval_bin(*op, va, vb)
            }
            Expr::Ite(c, t, e) => match c.eval(env)? {
                Value::Bool(true) => t.eval(env),
                Value::Bool(false) => e.eval(env),
                _ => Err(EvalError::NonBoolCondition),
            },
        }
    }

    /// Infer the sort of the expression under the given variable sorts.
    pub fn sort(&self, env: &BTreeMap<String, Sort>) -> Result<Sort, SortError> {
        match self {
            Expr::Const(v) => Ok(v.sort()),
            Expr::Var(v) => env.get(v).copied().ok_or_else(|| SortError::Unbound(v.clone())),
            Expr::Un(op, e) => {
                let s = e.sort(env)?;
                match (op, s) {
                    (UnOp::Not, Sort::Bool) => Ok(Sort::Bool),
                    (UnOp::Neg, Sort::Int) => Ok(Sort::Int),
                    (UnOp::Neg, Sort::Real) => Ok(Sort::Real),
                    (op, s) => Err(SortError::BadOperand {
                        op: format!("{:?}", op),
                        sort: s,
                    }),
                }
            }
            Expr::Bin(op, a, b) => {
                let sa = a.sort(env)?;
                let sb = b.sort(env)?;
                sort_bin(*op, sa, sb)
            }
            Expr::Ite(c, t, e) => {
                let sc = c.sort(env)?;
                if sc != Sort::Bool {
                    return Err(SortError::NonBoolCondition(sc));
                }
                let st = t.sort(env)?;
                let se = e.sort(env)?;
                if st != se {
                    return Err(SortError::BranchMismatch(st, se));
                }
                Ok(st)
            }
        }
    }
}

fn sort_bin(op: BinOp, lhs: Sort, rhs: Sort) -> Result<Sort, SortError> {
    use BinOp::*;
    let mismatch = || SortError::Mismatch {
        op: format!("{:?}", op),
        lhs,
        rhs,
    };
    match op {
        And | Or | Implies => {
            if lhs == Sort::Bool && rhs == Sort::Bool {
                Ok(Sort::Bool)
            } else {
                Err(mismatch())
            }
        }
        Eq => {
            if lhs == rhs {
                Ok(Sort::Bool)
            } else {
                Err(mismatch())
            }
        }
        Le | Lt | Ge | Gt => match (lhs, rhs) {
            (Sort::Int, Sort::Int) | (Sort::Real, Sort::Real) => Ok(Sort::Bool),
            _ => Err(mismatch()),
        },
        Add | Sub | Mul => match (lhs, rhs) {
            (Sort::Int, Sort::Int) => Ok(Sort::Int),
            (Sort::Real, Sort::Real) => Ok(Sort::Real),
            _ => Err(mismatch()),
        },
        Div => match (lhs, rhs) {
            (Sort::Real, Sort::Real) => Ok(Sort::Real),
            (Sort::Int, Sort::Int) => Err(SortError::BadOperand {
                op: "Div".into(),
                sort: Sort::Int,
            }),
            _ => Err(mismatch()),
        },
    }
}

fn eval_bin(op: BinOp, lhs: Value, rhs: Value) -> Result<Value, EvalError> {
    use BinOp::*;
    let mismatch = |lhs: &Value, rhs: &Value| EvalError::SortMismatch {
        op: format!("{:?}", op),
        lhs: lhs.sort(),
        rhs: rhs.sort(),
    };
    match (op, &lhs, &rhs) {
        (And, Value::Bool(a), Value::Bool(b)) => Ok(Value::Bool(*a && *b)),
        (Or, Value::Bool(a), Value::Bool(b)) => Ok(Value::Bool(*a || *b)),
        (Implies, Value::Bool(a), Value::Bool(b)) => Ok(Value::Bool(!*a || *b)),
        (Eq, a, b) if a.sort() == b.sort() => Ok(Value::Bool(a == b)),
        (Le, Value::Int(a), Value::Int(b)) => Ok(Value::Bool(a <= b)),
        (Lt, Value::Int(a), Value::Int(b)) => Ok(Value::Bool(a < b)),
        (Ge, Value::Int(a), Value::Int(b)) => Ok(Value::Bool(a >= b)),
        (Gt, Value::Int(a), Value::Int(b)) => Ok(Value::Bool(a > b)),
        (Le, Value::Real(a), Value::Real(b)) => Ok(Value::Bool(a <= b)),
        (Lt, Value::Real(a), Value::Real(b)) => Ok(Value::Bool(a < b)),
        (Ge, Value::Real(a), Value::Real(b)) => Ok(Value::Bool(a >= b)),
        (Gt, Value::Real(a), Value::Real(b)) => Ok(Value::Bool(a > b)),
        (Add, Value::Int(a), Value::Int(b)) => a
            .checked_add(*b)
            .map(Value::Int)
            .ok_or_else(|| EvalError::Overflow("addition".into())),
        (Sub, Value::Int(a), Value::Int(b)) => a
            .checked_sub(*b)
            .map(Value::Int)
            .ok_or_else(|| EvalError::Overflow("subtraction".into())),
        (Mul, Value::Int(a), Value::Int(b)) => a
            .checked_mul(*b)
            .map(Value::Int)
            .ok_or_else(|| EvalError::Overflow("multiplication".into())),
        (Add, Value::Real(a), Value::Real(b)) => Ok(Value::Real(a + b)),
        (Sub, Value::Real(a), Value::Real(b)) => Ok(Value::Real(a - b)),
        (Mul, Value::Real(a), Value::Real(b)) => Ok(Value::Real(a * b)),
        (Div, Value::Real(a), Value::Real(b)) => {
            if b.is_zero() {
                Err(EvalError::DivByZero)
            } else {
                Ok(Value::Real(a / b))
            }
        }
        (Div, Value::Int(_), Value::Int(_)) => Err(EvalError::IntDivision),
        _ => Err(mismatch(&lhs, &rhs)),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{}", v),
            Expr::Var(v) => write!(f, "{}", v),
            Expr::Un(UnOp::Not, e) => write!(f, "(not {})", e),
            Expr::Un(UnOp::Neg, e) => write!(f, "(- {})", e),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::And => "and",
                    BinOp::Or => "or",
                    BinOp::Implies => "=>",
                    BinOp::Eq => "=",
                    BinOp::Le => "<=",
                    BinOp::Lt => "<",
                    BinOp::Ge => ">=",
                    BinOp::Gt => ">",
                };
                write!(f, "({} {} {})", a, sym, b)
            }
            Expr::Ite(c, t, e) => write!(f, "(if {} then {} else {})", c, t, e),
        }
    }
}

/// Helper: format a rational as an approximate decimal for human output.
pub fn approx_decimal(r: &BigRational) -> String {
    let f = r.to_f64().unwrap_or(f64::NAN);
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{:.6}", f)
    }
}

pub fn is_nonneg(r: &BigRational) -> bool {
    !r.is_negative()
}
