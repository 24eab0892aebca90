//! Static checks on a parsed program: name resolution, sorts, call
//! arities, single definition per variable, division by nonzero literal,
//! and the contract discipline (assumptions range over inputs, guarantees
//! over outputs).

use std::collections::BTreeMap;

use num::Zero;
use thiserror::Error;

use crate::ast::*;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("node `{0}` is declared twice")]
    DuplicateNode(String),
    #[error("node `{node}`: variable `{0}` is declared twice", .var)]
    DuplicateVar { node: String, var: String },
    #[error("node `{node}`: `{var}` is defined by more than one equation")]
    DuplicateDef { node: String, var: String },
    #[error("node `{node}`: `{var}` has no defining equation")]
    Undefined { node: String, var: String },
    #[error("node `{node}`: `{var}` is not declared")]
    Unknown { node: String, var: String },
    #[error("node `{node}`: input `{var}` cannot be assigned")]
    AssignsInput { node: String, var: String },
    #[error("node `{node}`: call of unknown node `{callee}`")]
    UnknownNode { node: String, callee: String },
    #[error("node `{node}`: call of `{callee}` has {got} argument(s), expected {want}")]
    BadArity {
        node: String,
        callee: String,
        got: usize,
        want: usize,
    },
    #[error("node `{node}`: call of `{callee}` returns {want} value(s), {got} received")]
    BadResults {
        node: String,
        callee: String,
        got: usize,
        want: usize,
    },
    #[error("node `{node}`: expected {want} but found {got} in `{text}`")]
    Mismatch {
        node: String,
        want: Ty,
        got: Ty,
        text: String,
    },
    #[error("node `{node}`: operands of `{text}` have different types")]
    OperandMismatch { node: String, text: String },
    #[error("node `{node}`: division is only allowed by a nonzero real literal in `{text}`")]
    BadDivision { node: String, text: String },
    #[error("node `{node}`: `{text}` is not allowed in a contract")]
    BadContractExpr { node: String, text: String },
    #[error("node `{node}`: assumption mentions `{var}`, which is not an input")]
    AssumeNotInput { node: String, var: String },
    #[error("node `{node}`: guarantee mentions `{var}`, which is not an output")]
    GuaranteeNotOutput { node: String, var: String },
    #[error("node `{node}`: `->` is only allowed as the whole right-hand side of an equation")]
    NestedArrow { node: String },
}

pub type Env = BTreeMap<String, Ty>;

/// The variable environment of one node (inputs, outputs, locals).
pub fn node_env(node: &NodeDecl) -> Result<Env, TypeError> {
    let mut env = Env::new();
    for p in node
        .inputs
        .iter()
        .chain(node.outputs.iter())
        .chain(node.locals.iter())
    {
        if env.insert(p.name.clone(), p.ty).is_some() {
            return Err(TypeError::DuplicateVar {
                node: node.name.clone(),
                var: p.name.clone(),
            });
        }
    }
    Ok(env)
}

/// The type of an expression. Calls are typed against `sigs`; arrows are
/// typed transparently (both sides must agree).
pub fn expr_ty(
    node: &str,
    env: &Env,
    sigs: &BTreeMap<String, (Vec<Ty>, Vec<Ty>)>,
    e: &Expr,
) -> Result<Ty, TypeError> {
    let mismatch = |want: Ty, got: Ty, of: &Expr| TypeError::Mismatch {
        node: node.to_string(),
        want,
        got,
        text: expr_to_text(of),
    };
    match e {
        Expr::Bool(_) => Ok(Ty::Bool),
        Expr::Int(_) => Ok(Ty::Int),
        Expr::Real(..) => Ok(Ty::Real),
        Expr::Var(v) => env.get(v).copied().ok_or_else(|| TypeError::Unknown {
            node: node.to_string(),
            var: v.clone(),
        }),
        Expr::Un(UnOp::Not, a) => {
            let t = expr_ty(node, env, sigs, a)?;
            if t != Ty::Bool {
                return Err(mismatch(Ty::Bool, t, a));
            }
            Ok(Ty::Bool)
        }
        Expr::Un(UnOp::Neg, a) => {
            let t = expr_ty(node, env, sigs, a)?;
            if t == Ty::Bool {
                return Err(mismatch(Ty::Int, t, a));
            }
            Ok(t)
        }
        Expr::Pre(a) => expr_ty(node, env, sigs, a),
        Expr::Arrow(a, b) => {
            let ta = expr_ty(node, env, sigs, a)?;
            let tb = expr_ty(node, env, sigs, b)?;
            if ta != tb {
                return Err(TypeError::OperandMismatch {
                    node: node.to_string(),
                    text: expr_to_text(e),
                });
            }
            Ok(ta)
        }
        Expr::Bin(op, a, b) => {
            let ta = expr_ty(node, env, sigs, a)?;
            let tb = expr_ty(node, env, sigs, b)?;
            if ta != tb {
                return Err(TypeError::OperandMismatch {
                    node: node.to_string(),
                    text: expr_to_text(e),
                });
            }
            match op {
                BinOp::And | BinOp::Or | BinOp::Implies => {
                    if ta != Ty::Bool {
                        return Err(mismatch(Ty::Bool, ta, a));
                    }
                    Ok(Ty::Bool)
                }
                BinOp::Eq => Ok(Ty::Bool),
                BinOp::Le | BinOp::Lt | BinOp::Ge | BinOp::Gt => {
                    if ta == Ty::Bool {
                        return Err(mismatch(Ty::Int, ta, a));
                    }
                    Ok(Ty::Bool)
                }
                BinOp::Add | BinOp::Sub | BinOp::Mul => {
                    if ta == Ty::Bool {
                        return Err(mismatch(Ty::Int, ta, a));
                    }
                    Ok(ta)
                }
                BinOp::Div => {
                    let ok_divisor = matches!(&**b, Expr::Real(r, _) if !r.is_zero())
                        || matches!(&**b, Expr::Un(UnOp::Neg, inner)
                            if matches!(&**inner, Expr::Real(r, _) if !r.is_zero()));
                    if ta != Ty::Real || !ok_divisor {
                        return Err(TypeError::BadDivision {
                            node: node.to_string(),
                            text: expr_to_text(e),
                        });
                    }
                    Ok(Ty::Real)
                }
            }
        }
        Expr::Ite(c, t, f) => {
            let tc = expr_ty(node, env, sigs, c)?;
            if tc != Ty::Bool {
                return Err(mismatch(Ty::Bool, tc, c));
            }
            let tt = expr_ty(node, env, sigs, t)?;
            let tf = expr_ty(node, env, sigs, f)?;
            if tt != tf {
                return Err(TypeError::OperandMismatch {
                    node: node.to_string(),
                    text: expr_to_text(e),
                });
            }
            Ok(tt)
        }
        Expr::Call(callee, args) => {
            let (ins, outs) = sigs.get(callee).ok_or_else(|| TypeError::UnknownNode {
                node: node.to_string(),
                callee: callee.clone(),
            })?;
            if args.len() != ins.len() {
                return Err(TypeError::BadArity {
                    node: node.to_string(),
                    callee: callee.clone(),
                    got: args.len(),
                    want: ins.len(),
                });
            }
            for (a, want) in args.iter().zip(ins) {
                let got = expr_ty(node, env, sigs, a)?;
                if got != *want {
                    return Err(mismatch(*want, got, a));
                }
            }
            // A call "has" the type vector of its results; equations with
            // multiple left-hand sides are checked in `typecheck`. A
            // single-result call behaves like its only output.
            if outs.len() == 1 {
                Ok(outs[0])
            } else {
                // Placeholder; multi-result calls never appear nested.
                Ok(Ty::Bool)
            }
        }
    }
}

fn check_no_arrow_below_top(node: &str, e: &Expr) -> Result<(), TypeError> {
    fn has_arrow(e: &Expr) -> bool {
        match e {
            Expr::Arrow(..) => true,
            Expr::Bool(_) | Expr::Int(_) | Expr::Real(..) | Expr::Var(_) => false,
            Expr::Un(_, a) | Expr::Pre(a) => has_arrow(a),
            Expr::Bin(_, a, b) => has_arrow(a) || has_arrow(b),
            Expr::Ite(c, t, f) => has_arrow(c) || has_arrow(t) || has_arrow(f),
            Expr::Call(_, args) => args.iter().any(has_arrow),
        }
    }
    let inner = match e {
        Expr::Arrow(a, b) => has_arrow(a) || has_arrow(b),
        other => has_arrow(other),
    };
    if inner {
        Err(TypeError::NestedArrow {
            node: node.to_string(),
        })
    } else {
        Ok(())
    }
}

fn check_contract_expr(node: &NodeDecl, e: &Expr, assume: bool) -> Result<(), TypeError> {
    fn stateless(e: &Expr) -> bool {
        match e {
            Expr::Pre(_) | Expr::Arrow(..) | Expr::Call(..) => false,
            Expr::Bool(_) | Expr::Int(_) | Expr::Real(..) | Expr::Var(_) => true,
            Expr::Un(_, a) => stateless(a),
            Expr::Bin(_, a, b) => stateless(a) && stateless(b),
            Expr::Ite(c, t, f) => stateless(c) && stateless(t) && stateless(f),
        }
    }
    if !stateless(e) {
        return Err(TypeError::BadContractExpr {
            node: node.name.clone(),
            text: expr_to_text(e),
        });
    }
    for v in e.free_vars() {
        if assume && !node.inputs.iter().any(|p| p.name == v) {
            return Err(TypeError::AssumeNotInput {
                node: node.name.clone(),
                var: v,
            });
        }
        if !assume && !node.outputs.iter().any(|p| p.name == v) {
            return Err(TypeError::GuaranteeNotOutput {
                node: node.name.clone(),
                var: v,
            });
        }
    }
    Ok(())
}

/// Signatures of all nodes (input types, output types).
pub fn signatures(p: &Program) -> BTreeMap<String, (Vec<Ty>, Vec<Ty>)> {
    p.nodes
        .iter()
        .map(|n| {
            (
                n.name.clone(),
                (
                    n.inputs.iter().map(|p| p.ty).collect(),
                    n.outputs.iter().map(|p| p.ty).collect(),
                ),
            )
        })
        .collect()
}

/// Check the whole program; the AST is usable as-is afterwards.
pub fn typecheck(p: &Program) -> Result<(), TypeError> {
    let sigs = signatures(p);
    if sigs.len() != p.nodes.len() {
        let mut seen = std::collections::BTreeSet::new();
        for n in &p.nodes {
            if !seen.insert(&n.name) {
                return Err(TypeError::DuplicateNode(n.name.clone()));
            }
        }
    }
    for node in &p.nodes {
        let env = node_env(node)?;
        let mut defined = std::collections::BTreeSet::new();
        for eq in &node.equations {
            for v in &eq.lhs {
                if !env.contains_key(v) {
                    return Err(TypeError::Unknown {
                        node: node.name.clone(),
                        var: v.clone(),
                    });
                }
                if node.inputs.iter().any(|p| &p.name == v) {
                    return Err(TypeError::AssignsInput {
                        node: node.name.clone(),
                        var: v.clone(),
                    });
                }
                if !defined.insert(v.clone()) {
                    return Err(TypeError::DuplicateDef {
                        node: node.name.clone(),
                        var: v.clone(),
                    });
                }
            }
            check_no_arrow_below_top(&node.name, &eq.rhs)?;
            if let Expr::Call(callee, _) = &eq.rhs {
                let (_, outs) = sigs.get(callee).ok_or_else(|| TypeError::UnknownNode {
                    node: node.name.clone(),
                    callee: callee.clone(),
                })?;
                if eq.lhs.len() != outs.len() {
                    return Err(TypeError::BadResults {
                        node: node.name.clone(),
                        callee: callee.clone(),
                        got: eq.lhs.len(),
                        want: outs.len(),
                    });
                }
                expr_ty(&node.name, &env, &sigs, &eq.rhs)?;
                for (v, want) in eq.lhs.iter().zip(outs) {
                    let got = env[v];
                    if got != *want {
                        return Err(TypeError::Mismatch {
                            node: node.name.clone(),
                            want: *want,
                            got,
                            text: v.clone(),
                        });
                    }
                }
            } else {
                if eq.lhs.len() != 1 {
                    return Err(TypeError::BadResults {
                        node: node.name.clone(),
                        callee: expr_to_text(&eq.rhs),
                        got: eq.lhs.len(),
                        want: 1,
                    });
                }
                let got = expr_ty(&node.name, &env, &sigs, &eq.rhs)?;
                let want = env[&eq.lhs[0]];
                if got != want {
                    return Err(TypeError::Mismatch {
                        node: node.name.clone(),
                        want,
                        got,
                        text: expr_to_text(&eq.rhs),
                    });
                }
            }
        }
        for p in node.outputs.iter().chain(node.locals.iter()) {
            if !defined.contains(&p.name) {
                return Err(TypeError::Undefined {
                    node: node.name.clone(),
                    var: p.name.clone(),
                });
            }
        }
        if let Some(c) = &node.contract {
            for a in &c.assumes {
                check_contract_expr(node, a, true)?;
                let t = expr_ty(&node.name, &env, &sigs, a)?;
                if t != Ty::Bool {
                    return Err(TypeError::Mismatch {
                        node: node.name.clone(),
                        want: Ty::Bool,
                        got: t,
                        text: expr_to_text(a),
                    });
                }
            }
            for g in &c.guarantees {
                check_contract_expr(node, g, false)?;
                let t = expr_ty(&node.name, &env, &sigs, g)?;
                if t != Ty::Bool {
                    return Err(TypeError::Mismatch {
                        node: node.name.clone(),
                        want: Ty::Bool,
                        got: t,
                        text: expr_to_text(g),
                    });
                }
            }
        }
    }
    Ok(())
}
