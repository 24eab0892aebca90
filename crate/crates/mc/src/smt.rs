//! Deterministic SMT-LIB 2 emission for transition-system queries.
//!
//! Frame variables are quoted symbols `|name@i|`; a primed name in a
//! transition conjunct refers to the next frame. Scripts are emitted in a
//! fixed order (declarations sorted by variable name, conjuncts in
//! encoding order) so that identical systems produce identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use hrmv_core::expr::{BinOp, Expr, Sort, UnOp, Value};
use hrmv_core::hypergraph::VarId;
use num::Signed;

use crate::ts::TransitionSystem;

/// `name@i`, the SMT symbol of a frame variable (without the quoting).
pub fn frame_name(name: &str, frame: usize) -> String {
    format!("{}@{}", name, frame)
}

fn sym(name: &str) -> String {
    format!("|{}|", name)
}

fn sort_smt(sort: Sort) -> &'static str {
    match sort {
        Sort::Bool | Sort::Unit => "Bool",
        Sort::Int => "Int",
        Sort::Real => "Real",
    }
}

fn value_smt(v: &Value) -> String {
    match v {
        Value::Unit => "true".to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Int(n) if *n < 0 => format!("(- {})", -n),
        Value::Int(n) => n.to_string(),
        Value::Real(r) => {
            let body = format!("(/ {} {})", r.numer().abs(), r.denom().abs());
            if r.is_negative() {
                format!("(- {})", body)
            } else {
                body
            }
        }
    }
}

fn binop_smt(op: BinOp) -> &'static str {
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

/// Print an expression, mapping each variable through `rename`.
fn expr_smt(e: &Expr, rename: &dyn Fn(&str) -> String, out: &mut String) {
    match e {
        Expr::Const(v) => out.push_str(&value_smt(v)),
        Expr::Var(name) => out.push_str(&sym(&rename(name))),
        Expr::Un(op, a) => {
            out.push('(');
            out.push_str(match op {
                UnOp::Not => "not",
                UnOp::Neg => "-",
            });
            out.push(' ');
            expr_smt(a, rename, out);
            out.push(')');
        }
        Expr::Bin(op, a, b) => {
            out.push('(');
            out.push_str(binop_smt(*op));
            out.push(' ');
            expr_smt(a, rename, out);
            out.push(' ');
            expr_smt(b, rename, out);
            out.push(')');
        }
        Expr::Ite(c, t, f) => {
            out.push_str("(ite ");
            expr_smt(c, rename, out);
            out.push(' ');
            expr_smt(t, rename, out);
            out.push(' ');
            expr_smt(f, rename, out);
            out.push(')');
        }
    }
}

/// An expression over one frame: every variable lands in frame `i`.
pub fn expr_at(e: &Expr, frame: usize) -> String {
    let mut out = String::new();
    expr_smt(e, &|n| frame_name(n, frame), &mut out);
    out
}

/// A transition conjunct between `frame` and `frame + 1`: primed names go
/// to the next frame.
pub fn trans_at(e: &Expr, frame: usize) -> String {
    let mut out = String::new();
    expr_smt(
        e,
        &|n| match n.strip_suffix('\'') {
            Some(base) => frame_name(base, frame + 1),
            None => frame_name(n, frame),
        },
        &mut out,
    );
    out
}

/// The weakest logic covering the system's sorts.
pub fn logic_of(ts: &TransitionSystem) -> &'static str {
    let has_real = ts.vars.iter().any(|v| v.sort == Sort::Real);
    let has_int = ts.vars.iter().any(|v| v.sort == Sort::Int);
    match (has_real, has_int) {
        (true, true) => "QF_LIRA",
        (true, false) => "QF_LRA",
        _ => "QF_LIA",
    }
}

/// Script header: logic and model production.
pub fn header(ts: &TransitionSystem) -> String {
    format!(
        "(set-option :produce-models true)\n(set-logic {})\n",
        logic_of(ts)
    )
}

/// Declarations of one frame's variables, sorted by name.
pub fn declare_frame(ts: &TransitionSystem, frame: usize) -> String {
    let mut out = String::new();
    for v in &ts.vars {
        let _ = writeln!(
            out,
            "(declare-const {} {})",
            sym(&frame_name(&v.name, frame)),
            sort_smt(v.sort)
        );
    }
    out
}

/// Assertions of the exact initial constraints at frame 0.
pub fn assert_init(ts: &TransitionSystem) -> String {
    let mut out = String::new();
    for (v, value) in &ts.init {
        let _ = writeln!(
            out,
            "(assert (= {} {}))",
            sym(&frame_name(&v.name, 0)),
            value_smt(value)
        );
    }
    out
}

/// Assertions of the within-frame (combinational) constraints at one
/// frame.
pub fn assert_flow(ts: &TransitionSystem, frame: usize) -> String {
    let mut out = String::new();
    for (_, e) in &ts.flow {
        let _ = writeln!(out, "(assert {})", expr_at(e, frame));
    }
    out
}

/// Assertions of the state updates between `frame` and `frame + 1`.
pub fn assert_step(ts: &TransitionSystem, frame: usize) -> String {
    let mut out = String::new();
    for (_, e) in &ts.step {
        let _ = writeln!(out, "(assert {})", trans_at(e, frame));
    }
    out
}

/// Assertions of the environment constraints at one frame.
pub fn assert_assumes(ts: &TransitionSystem, frame: usize) -> String {
    let mut out = String::new();
    for (_, e) in &ts.assumes {
        let _ = writeln!(out, "(assert {})", expr_at(e, frame));
    }
    out
}

/// The negated goal-property conjunction at one frame (for BMC).
pub fn assert_not_props(ts: &TransitionSystem, frame: usize) -> String {
    format!("(assert (not {}))\n", expr_at(&ts.props_conj(), frame))
}

/// The negated proof goal (properties and auxiliary invariants) at one
/// frame (for the induction step).
pub fn assert_not_goal(ts: &TransitionSystem, frame: usize) -> String {
    format!("(assert (not {}))\n", expr_at(&ts.proof_goal(), frame))
}

/// The full standalone BMC query at depth `k`: frames 0..=k with initial
/// constraints, asking for a goal-property violation at frame `k`.
pub fn emit_bmc(ts: &TransitionSystem, k: usize) -> String {
    let mut out = header(ts);
    for i in 0..=k {
        out.push_str(&declare_frame(ts, i));
    }
    out.push_str(&assert_init(ts));
    for i in 0..=k {
        out.push_str(&assert_flow(ts, i));
    }
    for i in 0..k {
        out.push_str(&assert_step(ts, i));
    }
    for i in 0..=k {
        out.push_str(&assert_assumes(ts, i));
    }
    out.push_str(&assert_not_props(ts, k));
    out.push_str("(check-sat)\n");
    out
}

/// The k-induction base query: frames 0..k from the initial states,
/// asking for a proof-goal violation at any of them.
pub fn emit_base(ts: &TransitionSystem, k: usize) -> String {
    let mut out = header(ts);
    for i in 0..k {
        out.push_str(&declare_frame(ts, i));
    }
    out.push_str(&assert_init(ts));
    for i in 0..k {
        out.push_str(&assert_flow(ts, i));
    }
    for i in 0..k.saturating_sub(1) {
        out.push_str(&assert_step(ts, i));
    }
    for i in 0..k {
        out.push_str(&assert_assumes(ts, i));
    }
    let goal = ts.proof_goal();
    let disjuncts: Vec<String> = (0..k).map(|i| format!("(not {})", expr_at(&goal, i))).collect();
    let body = if disjuncts.len() == 1 {
        disjuncts.into_iter().next().unwrap()
    } else {
        format!("(or {})", disjuncts.join(" "))
    };
    let _ = writeln!(out, "(assert {})", body);
    out.push_str("(check-sat)\n");
    out
}

/// The k-induction step query: frames 0..=k anywhere in the state space,
/// with the proof goal assumed on the first k frames and denied at frame
/// `k`.
pub fn emit_step(ts: &TransitionSystem, k: usize) -> String {
    let mut out = header(ts);
    for i in 0..=k {
        out.push_str(&declare_frame(ts, i));
    }
    for i in 0..=k {
        out.push_str(&assert_flow(ts, i));
    }
    for i in 0..k {
        out.push_str(&assert_step(ts, i));
    }
    for i in 0..=k {
        out.push_str(&assert_assumes(ts, i));
    }
    let goal = ts.proof_goal();
    for i in 0..k {
        let _ = writeln!(out, "(assert {})", expr_at(&goal, i));
    }
    out.push_str(&assert_not_goal(ts, k));
    out.push_str("(check-sat)\n");
    out
}

/// The `(get-value ...)` command for every variable of frames 0..=k.
pub fn get_values_cmd(ts: &TransitionSystem, k: usize) -> String {
    let mut names = Vec::new();
    for i in 0..=k {
        for v in &ts.vars {
            names.push(sym(&frame_name(&v.name, i)));
        }
    }
    format!("(get-value ({}))\n", names.join(" "))
}

/// Sort environment of frames 0..=k, for parsing models.
pub fn frame_sorts(ts: &TransitionSystem, k: usize) -> BTreeMap<String, Sort> {
    let mut out = BTreeMap::new();
    for i in 0..=k {
        for v in &ts.vars {
            out.insert(frame_name(&v.name, i), v.sort);
        }
    }
    out
}

/// The frame variable ids of frame `i`.
pub fn frame_vars(ts: &TransitionSystem, frame: usize) -> Vec<(VarId, String)> {
    ts.vars
        .iter()
        .map(|v| (v.clone(), frame_name(&v.name, frame)))
        .collect()
}
