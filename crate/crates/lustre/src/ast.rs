//! Abstract syntax of the supported Lustre/CoCoSpec subset.
//!
//! Real literals keep both their exact rational value and their source
//! spelling, so pretty-printing reproduces the input text and a
//! parse/print round trip is a fixpoint.

use num::BigRational;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ty {
    Bool,
    Int,
    Real,
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Bool => write!(f, "bool"),
            Ty::Int => write!(f, "int"),
            Ty::Real => write!(f, "real"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: Ty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
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

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Bool(bool),
    Int(i64),
    /// An exact rational with its source spelling (e.g. `0.0582`).
    Real(BigRational, String),
    Var(String),
    Un(UnOp, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    Pre(Box<Expr>),
    Arrow(Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
}

impl Expr {
    pub fn free_vars(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Bool(_) | Expr::Int(_) | Expr::Real(..) => {}
                Expr::Var(v) => {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
                Expr::Un(_, a) | Expr::Pre(a) => walk(a, out),
                Expr::Bin(_, a, b) | Expr::Arrow(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Expr::Ite(c, t, f) => {
                    walk(c, out);
                    walk(t, out);
                    walk(f, out);
                }
                Expr::Call(_, args) => args.iter().for_each(|a| walk(a, out)),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Substitute variables by expressions (used to lift sub-contract
    /// formulas over call arguments).
    pub fn subst(&self, map: &std::collections::BTreeMap<String, Expr>) -> Expr {
        match self {
            Expr::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Bool(_) | Expr::Int(_) | Expr::Real(..) => self.clone(),
            Expr::Un(op, a) => Expr::Un(*op, Box::new(a.subst(map))),
            Expr::Pre(a) => Expr::Pre(Box::new(a.subst(map))),
            Expr::Bin(op, a, b) => {
                Expr::Bin(*op, Box::new(a.subst(map)), Box::new(b.subst(map)))
            }
            Expr::Arrow(a, b) => Expr::Arrow(Box::new(a.subst(map)), Box::new(b.subst(map))),
            Expr::Ite(c, t, f) => Expr::Ite(
                Box::new(c.subst(map)),
                Box::new(t.subst(map)),
                Box::new(f.subst(map)),
            ),
            Expr::Call(n, args) => {
                Expr::Call(n.clone(), args.iter().map(|a| a.subst(map)).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub lhs: Vec<String>,
    pub rhs: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ContractSpec {
    pub assumes: Vec<Expr>,
    pub guarantees: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeDecl {
    pub name: String,
    pub inputs: Vec<Param>,
    pub outputs: Vec<Param>,
    pub contract: Option<ContractSpec>,
    pub locals: Vec<Param>,
    pub equations: Vec<Equation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub nodes: Vec<NodeDecl>,
}

impl Program {
    pub fn node(&self, name: &str) -> Option<&NodeDecl> {
        self.nodes.iter().find(|n| n.name == name)
    }
}

// --- Pretty printing -----------------------------------------------------

fn prec(e: &Expr) -> u8 {
    match e {
        // `if c then t else f` extends as far right as possible, so it
        // must be parenthesized inside any operator.
        Expr::Ite(..) => 0,
        Expr::Arrow(..) => 1,
        Expr::Bin(BinOp::Implies, ..) => 2,
        Expr::Bin(BinOp::Or, ..) => 3,
        Expr::Bin(BinOp::And, ..) => 4,
        Expr::Bin(BinOp::Eq | BinOp::Le | BinOp::Lt | BinOp::Ge | BinOp::Gt, ..) => 5,
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 6,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 7,
        Expr::Un(..) | Expr::Pre(..) => 8,
        _ => 9,
    }
}

fn binop_text(op: BinOp) -> &'static str {
    match op {
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
    }
}

fn fmt_expr(e: &Expr, parent: u8, out: &mut String) {
    let p = prec(e);
    let wrap = p < parent;
    if wrap {
        out.push('(');
    }
    match e {
        Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Int(n) => out.push_str(&n.to_string()),
        Expr::Real(_, text) => out.push_str(text),
        Expr::Var(v) => out.push_str(v),
        Expr::Un(op, a) => {
            out.push_str(match op {
                UnOp::Neg => "-",
                UnOp::Not => "not ",
            });
            fmt_expr(a, p, out);
        }
        Expr::Pre(a) => {
            out.push_str("pre ");
            fmt_expr(a, p, out);
        }
        Expr::Bin(op, a, b) => {
            // Binary operators are left-associative except => which is
            // right-associative; print accordingly.
            let (lp, rp) = if *op == BinOp::Implies {
                (p + 1, p)
            } else {
                (p, p + 1)
            };
            fmt_expr(a, lp, out);
            out.push(' ');
            out.push_str(binop_text(*op));
            out.push(' ');
            fmt_expr(b, rp, out);
        }
        Expr::Arrow(a, b) => {
            fmt_expr(a, p + 1, out);
            out.push_str(" -> ");
            fmt_expr(b, p, out);
        }
        Expr::Ite(c, t, f) => {
            out.push_str("if ");
            fmt_expr(c, 0, out);
            out.push_str(" then ");
            fmt_expr(t, 0, out);
            out.push_str(" else ");
            fmt_expr(f, 0, out);
        }
        Expr::Call(n, args) => {
            out.push_str(n);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                fmt_expr(a, 0, out);
            }
            out.push(')');
        }
    }
    if wrap {
        out.push(')');
    }
}

pub fn expr_to_text(e: &Expr) -> String {
    let mut out = String::new();
    fmt_expr(e, 0, &mut out);
    out
}

fn params_text(params: &[Param]) -> String {
    params
        .iter()
        .map(|p| format!("{} : {}", p.name, p.ty))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Deterministic concrete syntax for a program; its output re-parses to
/// the same AST.
pub fn pretty_print(p: &Program) -> String {
    let mut out = String::new();
    for (i, node) in p.nodes.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!(
            "node {} ({})\nreturns ({});\n",
            node.name,
            params_text(&node.inputs),
            params_text(&node.outputs)
        ));
        if let Some(c) = &node.contract {
            out.push_str("(*@contract\n");
            for a in &c.assumes {
                out.push_str(&format!("  assume {};\n", expr_to_text(a)));
            }
            for g in &c.guarantees {
                out.push_str(&format!("  guarantee {};\n", expr_to_text(g)));
            }
            out.push_str("*)\n");
        }
        if !node.locals.is_empty() {
            out.push_str(&format!("var {};\n", params_text(&node.locals)));
        }
        out.push_str("let\n");
        for eq in &node.equations {
            out.push_str(&format!(
                "  {} = {};\n",
                eq.lhs.join(", "),
                expr_to_text(&eq.rhs)
            ));
        }
        out.push_str("tel\n");
    }
    out
}
