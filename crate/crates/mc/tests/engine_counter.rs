//! End-to-end engine tests on the counter obligation and the circular
//! two-counter abstraction, plus byte-stable golden checks of the emitted
//! SMT-LIB scripts.

use std::path::PathBuf;
use std::time::Duration;

use hrmv_core::expr::{Sort, Value};
use hrmv_core::hierarchy::abstract_children;
use hrmv_core::hypergraph::VarId;
use hrmv_core::module::DomainBounds;
use hrmv_core::property::Contract;
use hrmv_core::samples;
use hrmv_mc::engine::{check, replay, CheckOptions, Verdict};
use hrmv_mc::smt;
use hrmv_mc::ts::encode;

fn solver_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../solver/z3w.js")
}

fn opts() -> CheckOptions {
    let mut o = CheckOptions::new(solver_path());
    o.budget = Duration::from_secs(120);
    o
}

#[test]
fn encode_counter_shape() {
    let ts = encode(&samples::counter(), &samples::counter_contract()).unwrap();
    let names: Vec<&str> = ts.vars.iter().map(|v| v.name.as_str()).collect();
    assert_eq!(names, vec!["i1", "i2", "l1", "o1", "o2", "s1"]);
    assert_eq!(ts.init, vec![(VarId::new("s1", Sort::Int), Value::Int(0))]);
    assert_eq!(ts.assumes.len(), 1);
    assert_eq!(ts.props.len(), 1);
    assert!(ts.strengthen.is_empty());
    // Three combinational conjuncts; one state update, no carry (s1' is
    // written by e3).
    assert_eq!(ts.flow.len(), 3);
    assert_eq!(ts.step.len(), 1);
}

#[test]
fn encode_top_is_trivial() {
    let ts = encode(&hrmv_core::module::top_module(), &Contract::default()).unwrap();
    assert!(ts.vars.is_empty());
    assert!(ts.props.is_empty());
    let script = smt::emit_bmc(&ts, 0);
    assert!(!script.contains("declare-const"));
    assert!(!script.contains("(assert false)"));
}

#[test]
fn smt_scripts_match_goldens() {
    let ts = encode(&samples::counter(), &samples::counter_contract()).unwrap();
    assert_eq!(
        smt::emit_bmc(&ts, 1),
        include_str!("golden/counter_bmc_k1.smt2")
    );
    assert_eq!(
        smt::emit_base(&ts, 2),
        include_str!("golden/counter_base_k2.smt2")
    );
    assert_eq!(
        smt::emit_step(&ts, 2),
        include_str!("golden/counter_step_k2.smt2")
    );
    // Determinism: a fresh encoding emits identical bytes.
    let ts2 = encode(&samples::counter(), &samples::counter_contract()).unwrap();
    assert_eq!(smt::emit_step(&ts, 2), smt::emit_step(&ts2, 2));
}

#[test]
fn bmc_unrolls_k_plus_one_frames() {
    let ts = encode(&samples::counter(), &samples::counter_contract()).unwrap();
    let script = smt::emit_bmc(&ts, 1);
    assert!(script.contains("|s1@0|"));
    assert!(script.contains("|s1@1|"));
    assert!(!script.contains("|s1@2|"));
}

#[test]
fn counter_obligation_is_valid() {
    let ts = encode(&samples::counter(), &samples::counter_contract()).unwrap();
    let report = check(&ts, &opts()).unwrap();
    match report.verdict {
        Verdict::Valid { k } => assert_eq!(k, 1),
        other => panic!("expected Valid, got {:?}", other),
    }
    assert_eq!(report.engine, "k-induction");
}

#[test]
fn counter_without_assumption_is_falsified_at_round_zero() {
    let contract = Contract::new(Vec::new(), samples::counter_contract().guarantees);
    let ts = encode(&samples::counter(), &contract).unwrap();
    let report = check(&ts, &opts()).unwrap();
    match report.verdict {
        Verdict::Falsified { trace, frames } => {
            assert_eq!(frames.len(), 1, "minimal counterexample has one round");
            assert!(replay(&ts, &frames));
            // The violation is a negative increment.
            let i2 = VarId::new("i2", Sort::Int);
            let o2 = VarId::new("o2", Sort::Int);
            let (inp, out) = &trace[0];
            match (inp.get(&i2), out.get(&o2)) {
                (Some(Value::Int(a)), Some(Value::Int(b))) => {
                    assert!(*a < 0 && *b < 0, "i2={} o2={}", a, b)
                }
                other => panic!("bad trace round {:?}", other),
            }
            // Boolean shaping pins the irrelevant booleans to false.
            let i1 = VarId::new("i1", Sort::Bool);
            assert_eq!(inp.get(&i1), Some(&Value::Bool(false)));
        }
        other => panic!("expected Falsified, got {:?}", other),
    }
    assert_eq!(report.engine, "bmc");
}

#[test]
fn replay_rejects_tampered_runs() {
    let contract = Contract::new(Vec::new(), samples::counter_contract().guarantees);
    let ts = encode(&samples::counter(), &contract).unwrap();
    let report = check(&ts, &opts()).unwrap();
    let Verdict::Falsified { frames, .. } = report.verdict else {
        panic!("expected Falsified");
    };
    let mut bad = frames.clone();
    bad[0].insert(VarId::new("o2", Sort::Int), Value::Int(7));
    assert!(!replay(&ts, &bad));
    let mut bad_init = frames;
    bad_init[0].insert(VarId::new("s1", Sort::Int), Value::Int(1));
    assert!(!replay(&ts, &bad_init));
}

#[test]
fn zero_budget_is_unknown() {
    let ts = encode(&samples::counter(), &samples::counter_contract()).unwrap();
    let mut o = opts();
    o.budget = Duration::from_secs(0);
    let report = check(&ts, &o).unwrap();
    assert!(matches!(report.verdict, Verdict::Unknown { .. }));
}

#[test]
fn trivial_contract_is_valid_at_k1() {
    let ts = encode(&hrmv_core::module::top_module(), &Contract::default()).unwrap();
    let report = check(&ts, &opts()).unwrap();
    assert!(matches!(report.verdict, Verdict::Valid { k: 1 }));
}

/// The circular two-counter abstraction: both children replaced by their
/// contracts. The system guarantee is refuted with a one-round spurious
/// counterexample in which both boolean gate signals are false.
#[test]
fn circular_abstraction_yields_the_spurious_counterexample() {
    let h = samples::two_counters();
    let abstracted = abstract_children(
        &h,
        &[
            (0, samples::gated_counter_contract(1)),
            (1, samples::gated_counter_contract(2)),
        ],
    )
    .unwrap();
    let ts = encode(&abstracted, &samples::two_counters_contract()).unwrap();
    // The history bits strengthen induction.
    assert_eq!(ts.strengthen.len(), 4);
    let report = check(&ts, &opts()).unwrap();
    match report.verdict {
        Verdict::Falsified { frames, .. } => {
            assert_eq!(frames.len(), 1);
            assert!(replay(&ts, &frames));
            let en1 = VarId::new("i1.1", Sort::Bool);
            let en2 = VarId::new("i2.1", Sort::Bool);
            assert_eq!(frames[0].get(&en1), Some(&Value::Bool(false)));
            assert_eq!(frames[0].get(&en2), Some(&Value::Bool(false)));
        }
        other => panic!("expected Falsified, got {:?}", other),
    }
}

/// Engine/oracle agreement on the counter obligations: the engine verdict
/// matches the bounded-refinement oracle at oracle depths.
#[test]
fn engine_agrees_with_the_bounded_oracle_on_the_counter() {
    let bounds = DomainBounds::default();
    let m = samples::counter();
    let with_assume = samples::counter_contract();
    let without_assume = Contract::new(Vec::new(), with_assume.guarantees.clone());
    for (contract, expect_valid) in [(with_assume, true), (without_assume, false)] {
        let ts = encode(&m, &contract).unwrap();
        let report = check(&ts, &opts()).unwrap();
        let assume = contract.assume_module("a").unwrap();
        let guarantee = contract.guarantee_module("g").unwrap();
        let subject = hrmv_core::module::parallel_compose(&m, &assume).unwrap();
        let oracle = hrmv_core::module::bounded_refines(&subject, &guarantee, 3, &bounds).unwrap();
        assert_eq!(oracle, expect_valid);
        match report.verdict {
            Verdict::Valid { .. } => assert!(expect_valid),
            Verdict::Falsified { .. } => assert!(!expect_valid),
            Verdict::Unknown { reason } => panic!("unexpected Unknown: {}", reason),
        }
    }
}
