//! Small hand-built reference systems used across the test suites: a
//! counter, a counter wired to a unit delay, and a two-counter
//! hierarchical system with a circular dependency between its children.
//!
//! These are constructed directly at the module level (no surface
//! syntax) so that frontend and engine tests have a fixed, independent
//! ground truth to compare against.

use std::collections::BTreeSet;

use crate::expr::{BinOp, Expr, Sort, Value};
use crate::hierarchy::{HierarchicalModule, SubmoduleBinding};
use crate::hypergraph::{RelationSpec, Task, VarId};
use crate::module::{module, InitConstraint, Module};
use crate::property::{Contract, Prop};

fn b(name: &str) -> VarId {
    VarId::new(name, Sort::Bool)
}

fn i(name: &str) -> VarId {
    VarId::new(name, Sort::Int)
}

/// The counter: `o1 = i1; o2 = i2 + s1; s1' = o2` with `s1` starting at 0.
/// The addition goes through the local `l1`, which both `o2` and `s1'`
/// copy, mirroring the three-task shape of its task graph.
pub fn counter() -> Module {
    let e1 = Task::assign("e1", vec![b("i1")], b("o1"), Expr::var("i1"));
    let e2 = Task::assign(
        "e2",
        vec![i("i2"), i("s1")],
        i("l1"),
        Expr::bin(BinOp::Add, Expr::var("i2"), Expr::var("s1")),
    );
    let e3 = Task {
        id: "e3".into(),
        reads: vec![i("l1")],
        writes: vec![i("o2"), i("s1'")],
        relation: RelationSpec::FunctionalAssign(vec![
            (i("o2"), Expr::var("l1")),
            (i("s1'"), Expr::var("l1")),
        ]),
    };
    module(
        "counter",
        vec![b("i1"), i("i2")],
        vec![b("o1"), i("o2")],
        vec![(i("s1"), InitConstraint::Exact(Value::Int(0)))],
        vec![e1, e2, e3],
    )
}

/// A unit delay feeding the counter's own output back into its input:
/// reads `o2`, emits `i2` one round later, starting at 0.
pub fn delay() -> Module {
    let d1 = Task::assign("d1", vec![i("sd")], i("i2"), Expr::var("sd"));
    let d2 = Task::assign("d2", vec![i("o2")], i("sd'"), Expr::var("o2"));
    module(
        "delay",
        vec![i("o2")],
        vec![i("i2")],
        vec![(i("sd"), InitConstraint::Exact(Value::Int(0)))],
        vec![d1, d2],
    )
}

/// The contract the counter carries in the running examples:
/// assume the increment input stays nonnegative, guarantee the sum does.
pub fn counter_contract() -> Contract {
    Contract::new(
        vec![Prop::always(
            "i2_nonneg",
            vec![i("i2")],
            Expr::bin(BinOp::Ge, Expr::var("i2"), Expr::int(0)),
        )],
        vec![Prop::always(
            "o2_nonneg",
            vec![i("o2")],
            Expr::bin(BinOp::Ge, Expr::var("o2"), Expr::int(0)),
        )],
    )
}

/// One gated counter child of the two-counter system, with the variable
/// naming `i{j}.1, i{j}.2 / o{j}.1, o{j}.2 / s{j}.1` for child `j`.
///
/// Behavior: `o.2 = i.2 + s`, `o.1 = (s >= 0)`, and the state latches the
/// new sum only when the boolean gate `i.1` is set.
fn gated_counter(j: usize) -> (Module, Vec<Task>) {
    let gi1 = b(&format!("i{}.1", j));
    let gi2 = i(&format!("i{}.2", j));
    let go1 = b(&format!("o{}.1", j));
    let go2 = i(&format!("o{}.2", j));
    let s = i(&format!("s{}.1", j));
    let t_sum = Task::assign(
        format!("c{}.sum", j),
        vec![gi2.clone(), s.clone()],
        go2.clone(),
        Expr::bin(BinOp::Add, Expr::var(&gi2.name), Expr::var(&s.name)),
    );
    let t_ok = Task::assign(
        format!("c{}.ok", j),
        vec![s.clone()],
        go1.clone(),
        Expr::bin(BinOp::Ge, Expr::var(&s.name), Expr::int(0)),
    );
    let t_latch = Task::assign(
        format!("c{}.latch", j),
        vec![gi1.clone(), go2.clone(), s.clone()],
        s.primed(),
        Expr::Ite(
            Box::new(Expr::var(&gi1.name)),
            Box::new(Expr::var(&go2.name)),
            Box::new(Expr::var(&s.name)),
        ),
    );
    let tasks = vec![t_sum, t_ok, t_latch];
    let m = module(
        &format!("counter{}", j),
        vec![gi1, gi2],
        vec![go1, go2],
        vec![(s, InitConstraint::Exact(Value::Int(0)))],
        tasks.clone(),
    );
    (m, tasks)
}

/// The two-counter hierarchical system. The top level carries a boolean
/// state `s1` (initially true) and wires the children circularly:
/// each child's gate depends on the *other* child's boolean output.
///
/// Adapter equations:
/// `i1.1 = o2.1 and s1; i2.1 = o1.1; i1.2 = i1; i2.2 = o1.2;
///  o1 = o2.2; s1' = s1 and o1.1 and o2.1`.
pub fn two_counters() -> HierarchicalModule {
    let (c1, t1) = gated_counter(1);
    let (c2, t2) = gated_counter(2);
    let s1 = b("s1");
    let adapter_tasks = vec![
        Task::assign(
            "a1",
            vec![b("o2.1"), s1.clone()],
            b("i1.1"),
            Expr::and(Expr::var("o2.1"), Expr::var("s1")),
        ),
        Task::assign("a2", vec![b("o1.1")], b("i2.1"), Expr::var("o1.1")),
        Task::assign("a3", vec![i("i1")], i("i1.2"), Expr::var("i1")),
        Task::assign("a4", vec![i("o1.2")], i("i2.2"), Expr::var("o1.2")),
        Task::assign("a5", vec![i("o2.2")], i("o1"), Expr::var("o2.2")),
        Task::assign(
            "a6",
            vec![s1.clone(), b("o1.1"), b("o2.1")],
            s1.primed(),
            Expr::and(
                Expr::var("s1"),
                Expr::and(Expr::var("o1.1"), Expr::var("o2.1")),
            ),
        ),
    ];
    let mut tasks = adapter_tasks;
    tasks.extend(t1.iter().cloned());
    tasks.extend(t2.iter().cloned());
    let parent = module(
        "two_counters",
        vec![i("i1")],
        vec![i("o1")],
        vec![
            (s1, InitConstraint::Exact(Value::Bool(true))),
            (i("s1.1"), InitConstraint::Exact(Value::Int(0))),
            (i("s2.1"), InitConstraint::Exact(Value::Int(0))),
        ],
        tasks,
    );
    let edge_ids = |ts: &[Task]| -> BTreeSet<String> { ts.iter().map(|t| t.id.clone()).collect() };
    HierarchicalModule {
        parent,
        bindings: vec![
            SubmoduleBinding {
                child: c1,
                edge_ids: edge_ids(&t1),
            },
            SubmoduleBinding {
                child: c2,
                edge_ids: edge_ids(&t2),
            },
        ],
    }
}

/// The "rich" child contract of the two-counter system: the gate must be
/// held and the increment kept nonnegative; in return the status bit is
/// set and the sum stays nonnegative.
pub fn gated_counter_contract(j: usize) -> Contract {
    let gi1 = b(&format!("i{}.1", j));
    let gi2 = i(&format!("i{}.2", j));
    let go1 = b(&format!("o{}.1", j));
    let go2 = i(&format!("o{}.2", j));
    Contract::new(
        vec![
            Prop::always(format!("c{}.gate", j), vec![gi1.clone()], Expr::var(&gi1.name)),
            Prop::always(
                format!("c{}.inc_nonneg", j),
                vec![gi2.clone()],
                Expr::bin(BinOp::Ge, Expr::var(&gi2.name), Expr::int(0)),
            ),
        ],
        vec![
            Prop::always(format!("c{}.ok", j), vec![go1.clone()], Expr::var(&go1.name)),
            Prop::always(
                format!("c{}.sum_nonneg", j),
                vec![go2.clone()],
                Expr::bin(BinOp::Ge, Expr::var(&go2.name), Expr::int(0)),
            ),
        ],
    )
}

/// The "int only" child contract variant: no boolean conjuncts.
pub fn gated_counter_int_contract(j: usize) -> Contract {
    let gi2 = i(&format!("i{}.2", j));
    let go2 = i(&format!("o{}.2", j));
    Contract::new(
        vec![Prop::always(
            format!("c{}.inc_nonneg", j),
            vec![gi2.clone()],
            Expr::bin(BinOp::Ge, Expr::var(&gi2.name), Expr::int(0)),
        )],
        vec![Prop::always(
            format!("c{}.sum_nonneg", j),
            vec![go2.clone()],
            Expr::bin(BinOp::Ge, Expr::var(&go2.name), Expr::int(0)),
        )],
    )
}

/// Top-level contract of the two-counter system.
pub fn two_counters_contract() -> Contract {
    Contract::new(
        vec![Prop::always(
            "top.in_nonneg",
            vec![i("i1")],
            Expr::bin(BinOp::Ge, Expr::var("i1"), Expr::int(0)),
        )],
        vec![Prop::always(
            "top.out_nonneg",
            vec![i("o1")],
            Expr::bin(BinOp::Ge, Expr::var("o1"), Expr::int(0)),
        )],
    )
}

/// The counter+delay system as a hierarchy: the top level feeds the
/// delayed sum back into the counter's increment input. Child variables
/// are prefixed to keep the interfaces apart from the top level's.
pub fn counter_delay() -> HierarchicalModule {
    let ci1 = b("c.i1");
    let ci2 = i("c.i2");
    let co1 = b("c.o1");
    let co2 = i("c.o2");
    let cs = i("c.s1");
    let counter_tasks = vec![
        Task::assign("c.e1", vec![ci1.clone()], co1.clone(), Expr::var("c.i1")),
        Task::assign(
            "c.e2",
            vec![ci2.clone(), cs.clone()],
            co2.clone(),
            Expr::bin(BinOp::Add, Expr::var("c.i2"), Expr::var("c.s1")),
        ),
        Task::assign("c.e3", vec![co2.clone()], cs.primed(), Expr::var("c.o2")),
    ];
    let child_counter = module(
        "child_counter",
        vec![ci1.clone(), ci2.clone()],
        vec![co1.clone(), co2.clone()],
        vec![(cs.clone(), InitConstraint::Exact(Value::Int(0)))],
        counter_tasks.clone(),
    );
    let dx = i("d.x");
    let dy = i("d.y");
    let ds = i("d.s");
    let delay_tasks = vec![
        Task::assign("d.e1", vec![ds.clone()], dy.clone(), Expr::var("d.s")),
        Task::assign("d.e2", vec![dx.clone()], ds.primed(), Expr::var("d.x")),
    ];
    let child_delay = module(
        "child_delay",
        vec![dx.clone()],
        vec![dy.clone()],
        vec![(ds.clone(), InitConstraint::Exact(Value::Int(0)))],
        delay_tasks.clone(),
    );
    let adapter_tasks = vec![
        Task::assign("w1", vec![b("i1")], ci1, Expr::var("i1")),
        Task::assign("w2", vec![dy.clone()], ci2, Expr::var("d.y")),
        Task::assign("w3", vec![co2.clone()], dx, Expr::var("c.o2")),
        Task::assign("w4", vec![co2.clone()], i("o2"), Expr::var("c.o2")),
    ];
    let mut tasks = adapter_tasks;
    tasks.extend(counter_tasks.iter().cloned());
    tasks.extend(delay_tasks.iter().cloned());
    let parent = module(
        "counter_delay",
        vec![b("i1")],
        vec![i("o2")],
        vec![
            (cs, InitConstraint::Exact(Value::Int(0))),
            (ds, InitConstraint::Exact(Value::Int(0))),
        ],
        tasks,
    );
    let edge_ids = |ts: &[Task]| -> BTreeSet<String> { ts.iter().map(|t| t.id.clone()).collect() };
    HierarchicalModule {
        parent,
        bindings: vec![
            SubmoduleBinding {
                child: child_counter,
                edge_ids: edge_ids(&counter_tasks),
            },
            SubmoduleBinding {
                child: child_delay,
                edge_ids: edge_ids(&delay_tasks),
            },
        ],
    }
}

/// Sub-contracts for the counter+delay hierarchy: the counter's increment
/// must stay nonnegative and then its sum does; the delay preserves
/// nonnegativity one round later.
pub fn counter_delay_sub_contracts() -> Vec<Contract> {
    vec![
        Contract::new(
            vec![Prop::always(
                "cd.c_in",
                vec![i("c.i2")],
                Expr::bin(BinOp::Ge, Expr::var("c.i2"), Expr::int(0)),
            )],
            vec![Prop::always(
                "cd.c_out",
                vec![i("c.o2")],
                Expr::bin(BinOp::Ge, Expr::var("c.o2"), Expr::int(0)),
            )],
        ),
        Contract::new(
            vec![Prop::always(
                "cd.d_in",
                vec![i("d.x")],
                Expr::bin(BinOp::Ge, Expr::var("d.x"), Expr::int(0)),
            )],
            vec![Prop::always(
                "cd.d_out",
                vec![i("d.y")],
                Expr::bin(BinOp::Ge, Expr::var("d.y"), Expr::int(0)),
            )],
        ),
    ]
}

/// Top-level contract of the counter+delay hierarchy: the delayed-sum
/// loop keeps the output nonnegative with no assumption at all.
pub fn counter_delay_contract() -> Contract {
    Contract::new(
        Vec::new(),
        vec![Prop::always(
            "cd.out_nonneg",
            vec![i("o2")],
            Expr::bin(BinOp::Ge, Expr::var("o2"), Expr::int(0)),
        )],
    )
}
