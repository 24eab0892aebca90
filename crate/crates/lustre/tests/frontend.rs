//! End-to-end frontend tests over the bundled corpus: parsing,
//! round-trip printing, type checking, elaboration against the reference
//! counter module, and the source-level adapter decomposition.

use std::collections::BTreeMap;

use hrmv_core::expr::Value;
use hrmv_core::hierarchy::{decompose, flatten, validate_hierarchy};
use hrmv_core::hypergraph::VarId;
use hrmv_core::module::{
    compose_all, hide, init_states, step, traces, DomainBounds, Valuation,
};
use hrmv_core::samples;
use hrmv_lustre::ast::{pretty_print, Program};
use hrmv_lustre::decompose::decompose_program;
use hrmv_lustre::elaborate::{elaborate, instantiate};
use hrmv_lustre::parser::parse;
use hrmv_lustre::typecheck::typecheck;

fn corpus(name: &str) -> String {
    let path = format!("{}/../../corpus/{}", env!("CARGO_MANIFEST_DIR"), name);
    std::fs::read_to_string(path).expect("corpus file")
}

const CORPUS: &[&str] = &[
    "counter.lus",
    "nfilters_2.lus",
    "nfilters_3.lus",
    "nfilters_36.lus",
    "mctrl.lus",
    "two_counters.lus",
    "counter_delay.lus",
];

fn parsed(name: &str) -> Program {
    let p = parse(&corpus(name)).expect("parse");
    typecheck(&p).expect("typecheck");
    p
}

#[test]
fn parses_the_filter_program() {
    let p = parsed("nfilters_2.lus");
    assert_eq!(p.nodes.len(), 2);
    let filter = p.node("Filter").unwrap();
    let c = filter.contract.as_ref().unwrap();
    assert_eq!(c.assumes.len(), 2);
    assert_eq!(c.guarantees.len(), 2);
    assert_eq!(
        filter.locals.iter().map(|q| q.name.as_str()).collect::<Vec<_>>(),
        ["sum", "D1", "D2"]
    );
    assert_eq!(filter.equations.len(), 5);
    let top = p.node("Toplevel").unwrap();
    let c = top.contract.as_ref().unwrap();
    assert_eq!((c.assumes.len(), c.guarantees.len()), (1, 1));
    assert_eq!(top.equations.len(), 3);
    assert_eq!(top.equations[0].lhs, ["b1", "s1"]);
}

#[test]
fn pretty_print_roundtrip_is_a_fixpoint() {
    for name in CORPUS {
        let p1 = parse(&corpus(name)).expect(name);
        let text = pretty_print(&p1);
        let p2 = parse(&text).expect(name);
        assert_eq!(p1, p2, "{name}: reparse changed the AST");
        assert_eq!(text, pretty_print(&p2), "{name}: print is not stable");
    }
}

#[test]
fn corpus_typechecks() {
    for name in CORPUS {
        let p = parse(&corpus(name)).expect(name);
        typecheck(&p).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn rejects_contract_and_type_errors() {
    let reject = |src: &str| {
        let p = match parse(src) {
            Ok(p) => p,
            Err(_) => return, // rejected even earlier
        };
        assert!(typecheck(&p).is_err(), "accepted bad program:\n{src}");
    };
    // Guarantees may only mention outputs.
    reject("node N (a : int) returns (b : int);\n(*@contract guarantee a >= 0; *)\nlet b = a; tel\n");
    // Assumes may only mention inputs.
    reject("node N (a : int) returns (b : int);\n(*@contract assume b >= 0; *)\nlet b = a; tel\n");
    // Mixed int/real arithmetic.
    reject("node N (a : int) returns (b : real);\nlet b = a + 1.0; tel\n");
    // Division needs a nonzero real literal divisor.
    reject("node N (a : real; c : real) returns (b : real);\nlet b = a / c; tel\n");
    reject("node N (a : real) returns (b : real);\nlet b = a / 0.0; tel\n");
    // Undefined and undeclared variables.
    reject("node N (a : int) returns (b : int; c : int);\nlet b = a; tel\n");
    reject("node N (a : int) returns (b : int);\nlet b = q; tel\n");
    // Calls must be whole equations.
    assert!(parse("node N (a : int) returns (b : int);\nlet b = 1 + M(a); tel\n").is_err());
}

fn run_deterministic(m: &hrmv_core::module::Module, inputs: &[Valuation]) -> Vec<Valuation> {
    let bounds = DomainBounds::default();
    let starts = init_states(m, &bounds).expect("init");
    assert_eq!(starts.len(), 1, "deterministic init expected");
    let mut state = starts.into_iter().next().unwrap();
    let mut outs = Vec::new();
    for input in inputs {
        let next = step(m, &state, input, &bounds).expect("step");
        assert_eq!(next.len(), 1, "deterministic step expected");
        let (o, s) = next.into_iter().next().unwrap();
        outs.push(o);
        state = s;
    }
    outs
}

#[test]
fn counter_node_matches_the_reference_module() {
    let p = parsed("counter.lus");
    let tree = instantiate(&p, "Counter").unwrap();
    let elab = elaborate(&p, &tree).unwrap();
    let m = flatten(&elab.hierarchy).unwrap();
    let bounds = DomainBounds::default();
    let reference = samples::counter();
    assert_eq!(
        traces(&m, 3, &bounds).unwrap(),
        traces(&reference, 3, &bounds).unwrap()
    );
    assert_eq!(elab.top_contract.assumes.len(), 1);
    assert_eq!(elab.top_contract.guarantees.len(), 1);
}

#[test]
fn counter_simulation_reproduces_the_anchor_trace() {
    let p = parsed("counter.lus");
    let tree = instantiate(&p, "Counter").unwrap();
    let elab = elaborate(&p, &tree).unwrap();
    let m = flatten(&elab.hierarchy).unwrap();
    let i1 = VarId::new("i1", hrmv_core::expr::Sort::Bool);
    let i2 = VarId::new("i2", hrmv_core::expr::Sort::Int);
    let inputs: Vec<Valuation> = [(true, 1), (false, 0), (true, 2)]
        .iter()
        .map(|&(b, n)| {
            BTreeMap::from([(i1.clone(), Value::Bool(b)), (i2.clone(), Value::Int(n))])
        })
        .collect();
    let outs = run_deterministic(&m, &inputs);
    let o2: Vec<Value> = outs
        .iter()
        .map(|o| o.iter().find(|(v, _)| v.name == "o2").unwrap().1.clone())
        .collect();
    assert_eq!(o2, [Value::Int(1), Value::Int(1), Value::Int(3)]);
    let o1: Vec<Value> = outs
        .iter()
        .map(|o| o.iter().find(|(v, _)| v.name == "o1").unwrap().1.clone())
        .collect();
    assert_eq!(o1, [Value::Bool(true), Value::Bool(false), Value::Bool(true)]);
}

#[test]
fn elaborated_hierarchies_are_valid() {
    for (name, main, children) in [
        ("nfilters_2.lus", "Toplevel", vec!["Filter0", "Filter1"]),
        ("nfilters_3.lus", "Toplevel", vec!["Filter0", "Filter1", "Filter2"]),
        ("mctrl.lus", "MCtrl", vec!["Controller0", "Motor0"]),
        ("two_counters.lus", "TwoCounters", vec!["GCounter0", "GCounter1"]),
        ("counter_delay.lus", "CounterDelay", vec!["Counter0", "Delay0"]),
    ] {
        let p = parsed(name);
        let tree = instantiate(&p, main).unwrap();
        assert_eq!(
            tree.children.iter().map(|c| c.name.as_str()).collect::<Vec<_>>(),
            children,
            "{name}"
        );
        let elab = elaborate(&p, &tree).unwrap();
        let report = validate_hierarchy(&elab.hierarchy);
        assert!(report.is_valid(), "{name}: {report}");
        assert_eq!(elab.hierarchy.bindings.len(), children.len());
    }
}

#[test]
fn filter_simulation_matches_the_recurrence() {
    // Constant input 1/2 through one filter; exact rational recurrence:
    // sum_t = 0.0582/2 + 1.49 d1_t - 0.881 d2_t, d1' = sum, d2' = d1,
    // out2_t = (sum_t - d2_t) / 1.25.
    let p = parsed("nfilters_2.lus");
    let tree = instantiate(&p, "Filter").unwrap();
    let elab = elaborate(&p, &tree).unwrap();
    let m = flatten(&elab.hierarchy).unwrap();
    let in1 = VarId::new("in1", hrmv_core::expr::Sort::Bool);
    let in2 = VarId::new("in2", hrmv_core::expr::Sort::Real);
    let half = Value::rational(1, 2);
    let inputs: Vec<Valuation> = (0..5)
        .map(|_| {
            BTreeMap::from([(in1.clone(), Value::Bool(true)), (in2.clone(), half.clone())])
        })
        .collect();
    let outs = run_deterministic(&m, &inputs);

    let q = |n: i64, d: i64| num::BigRational::new(n.into(), d.into());
    let (mut d1, mut d2) = (q(0, 1), q(0, 1));
    for o in &outs {
        let sum = q(582, 10000) * q(1, 2) + q(149, 100) * &d1 - q(881, 1000) * &d2;
        let expect = (&sum - &d2) / q(125, 100);
        let got = o.iter().find(|(v, _)| v.name == "out2").unwrap().1.clone();
        assert_eq!(got, Value::Real(expect));
        d2 = d1;
        d1 = sum;
    }
}

#[test]
fn decomposition_recomposes_to_the_same_traces() {
    let p = parsed("nfilters_2.lus");
    let tree = instantiate(&p, "Toplevel").unwrap();
    let elab = elaborate(&p, &tree).unwrap();
    let flat = flatten(&elab.hierarchy).unwrap();
    let (children, adapter, hide_set) = decompose(&elab.hierarchy).unwrap();
    let mut parts = children;
    parts.push(adapter);
    let recomposed = hide(&compose_all(&parts).unwrap(), &hide_set).unwrap();
    let bounds = DomainBounds::default();
    for depth in 0..=3 {
        assert_eq!(
            traces(&flat, depth, &bounds).unwrap(),
            traces(&recomposed, depth, &bounds).unwrap(),
            "depth {depth}"
        );
    }
}

#[test]
fn decompose_program_emits_the_adapter() {
    let p = parsed("nfilters_2.lus");
    let d = decompose_program(&p, "Toplevel").unwrap();
    assert_eq!(d.node("Filter").unwrap(), p.node("Filter").unwrap());
    let top = d.node("Toplevel").unwrap();
    let names = |ps: &[hrmv_lustre::ast::Param]| {
        ps.iter().map(|q| q.name.clone()).collect::<Vec<_>>()
    };
    assert_eq!(
        names(&top.inputs),
        ["in", "Filter0_out1", "Filter0_out2", "Filter1_out1", "Filter1_out2"]
    );
    assert_eq!(
        names(&top.outputs),
        ["out", "Filter0_in1", "Filter0_in2", "Filter1_in1", "Filter1_in2"]
    );
    // No call equations remain.
    assert!(top
        .equations
        .iter()
        .all(|eq| !matches!(eq.rhs, hrmv_lustre::ast::Expr::Call(..))));
    // Adapter contract: assumes gain the sub-guarantees, guarantees
    // gain the sub-assumes, over the promoted parameters.
    let c = top.contract.as_ref().unwrap();
    assert_eq!(c.assumes.len(), 1 + 4);
    assert_eq!(c.guarantees.len(), 1 + 4);
    let texts: Vec<String> = c.assumes.iter().map(hrmv_lustre::ast::expr_to_text).collect();
    assert!(texts.contains(&"Filter0_out1".to_string()));
    assert!(texts.contains(&"-1.0 <= Filter0_out2 and Filter0_out2 <= 1.0".to_string()));

    // The output re-parses, re-typechecks, and is print-stable.
    let text = pretty_print(&d);
    let d2 = parse(&text).unwrap();
    typecheck(&d2).unwrap();
    assert_eq!(d, d2);

    // Decomposition is idempotent on flat programs.
    let flat = parsed("counter.lus");
    assert_eq!(decompose_program(&flat, "Counter").unwrap(), flat);
}
