//! Random generation of valid task graphs, modules and obligations,
//! used by the property-based suites (both in this crate and downstream).
//!
//! Everything here is generated *valid by construction*: graphs come out
//! layered (hence acyclic) with a single writer per vertex, and
//! nondeterministic relations are drawn from shapes that are total in
//! their reads. Callers still re-validate in tests; the generators exist
//! to explore the space, not to prove it.

use rand::Rng;

use crate::expr::{BinOp, Expr, Sort, Value};
use crate::hypergraph::{RelationSpec, Task, TaskGraph, VarId};
use crate::module::{InitConstraint, Module};
use crate::property::{Contract, Prop};

/// A random boolean expression over the given variable names.
pub fn random_bool_expr(rng: &mut impl Rng, vars: &[String], depth: usize) -> Expr {
    if vars.is_empty() {
        return Expr::bool(rng.gen());
    }
    if depth == 0 || rng.gen_ratio(1, 3) {
        return match rng.gen_range(0..4) {
            0 => Expr::bool(rng.gen()),
            _ => Expr::var(vars[rng.gen_range(0..vars.len())].clone()),
        };
    }
    let a = random_bool_expr(rng, vars, depth - 1);
    let b = random_bool_expr(rng, vars, depth - 1);
    match rng.gen_range(0..4) {
        0 => Expr::and(a, b),
        1 => Expr::bin(BinOp::Or, a, b),
        2 => Expr::implies(a, b),
        _ => Expr::not(a),
    }
}

/// A relation over `reads -> write` that is total in the reads.
fn total_relation(rng: &mut impl Rng, reads: &[VarId], write: &VarId) -> RelationSpec {
    let read_names: Vec<String> = reads.iter().map(|v| v.name.clone()).collect();
    match rng.gen_range(0..4) {
        // Functional: the write is determined.
        0 | 1 => RelationSpec::FunctionalAssign(vec![(
            write.clone(),
            random_bool_expr(rng, &read_names, 2),
        )]),
        // w or e: satisfiable with w = true whatever e evaluates to.
        2 => RelationSpec::NondetChoose(Expr::bin(
            BinOp::Or,
            Expr::var(write.name.clone()),
            random_bool_expr(rng, &read_names, 2),
        )),
        // w => e: satisfiable with w = false.
        _ => RelationSpec::NondetChoose(Expr::implies(
            Expr::var(write.name.clone()),
            random_bool_expr(rng, &read_names, 2),
        )),
    }
}

/// A random valid boolean task graph with at most `max_vertices` vertices.
/// Vertices are placed on layers; every non-initial vertex gets exactly
/// one writer reading a nonempty subset of strictly earlier vertices.
pub fn random_bool_tg(rng: &mut impl Rng, max_vertices: usize, prefix: &str) -> TaskGraph {
    let n = rng.gen_range(2..=max_vertices.max(2));
    let n_initial = rng.gen_range(1..=((n + 1) / 2));
    let mut placed: Vec<VarId> = (0..n_initial)
        .map(|k| VarId::new(format!("{}v{}", prefix, k), Sort::Bool))
        .collect();
    let mut tasks: Vec<Task> = Vec::new();
    for k in n_initial..n {
        let v = VarId::new(format!("{}v{}", prefix, k), Sort::Bool);
        let n_reads = rng.gen_range(1..=placed.len().min(3));
        let mut pool = placed.clone();
        let mut reads = Vec::new();
        for _ in 0..n_reads {
            let idx = rng.gen_range(0..pool.len());
            reads.push(pool.remove(idx));
        }
        reads.sort();
        let relation = total_relation(rng, &reads, &v);
        tasks.push(Task {
            id: format!("{}e{}", prefix, k),
            reads,
            writes: vec![v.clone()],
            relation,
        });
        placed.push(v);
    }
    // Drop unread initial vertices (they would be isolated when no task
    // happens to read them); `from_tasks` keeps incident vertices only.
    TaskGraph::from_tasks(tasks)
}

/// A random small boolean module with the given variable-name prefix.
/// When `feed` is nonempty, those variables become (additional) inputs so
/// the module can be wired downstream of another one.
pub fn random_module(rng: &mut impl Rng, prefix: &str, feed: &[VarId]) -> Module {
    let n_inputs = rng.gen_range(0..=2);
    let mut inputs: Vec<VarId> = (0..n_inputs)
        .map(|k| VarId::new(format!("{}i{}", prefix, k), Sort::Bool))
        .collect();
    inputs.extend(feed.iter().cloned());
    let has_state = rng.gen_bool(0.5);
    let n_outputs = rng.gen_range(1..=2);
    let state = has_state.then(|| VarId::new(format!("{}s", prefix), Sort::Bool));

    let mut readable: Vec<VarId> = inputs.clone();
    if let Some(s) = &state {
        readable.push(s.clone());
    }
    let mut tasks = Vec::new();
    let mut outputs = Vec::new();
    for k in 0..n_outputs {
        let o = VarId::new(format!("{}o{}", prefix, k), Sort::Bool);
        let n_reads = rng.gen_range(0..=readable.len().min(2));
        let mut pool = readable.clone();
        let mut reads = Vec::new();
        for _ in 0..n_reads {
            let idx = rng.gen_range(0..pool.len());
            reads.push(pool.remove(idx));
        }
        reads.sort();
        let relation = total_relation(rng, &reads, &o);
        tasks.push(Task {
            id: format!("{}t{}", prefix, k),
            reads,
            writes: vec![o.clone()],
            relation,
        });
        readable.push(o.clone());
        outputs.push(o);
    }
    if let Some(s) = &state {
        let reads: Vec<VarId> = vec![s.clone()];
        let names: Vec<String> = reads.iter().map(|v| v.name.clone()).collect();
        tasks.push(Task::assign(
            format!("{}tu", prefix),
            reads,
            s.primed(),
            random_bool_expr(rng, &names, 2),
        ));
    }
    let states = state
        .map(|s| {
            vec![(
                s,
                InitConstraint::Exact(Value::Bool(rng.gen())),
            )]
        })
        .unwrap_or_default();
    // Inputs that no task happens to read are dropped from the interface
    // to keep the reaction graph free of isolated vertices.
    let graph = TaskGraph::from_tasks(tasks.clone());
    let inputs: Vec<VarId> = inputs
        .into_iter()
        .filter(|v| graph.vertices.contains(v))
        .collect();
    crate::module::module(&format!("{}m", prefix), inputs, outputs, states, tasks)
}

/// A pair of compatible modules: the second may read the first's outputs.
pub fn random_compatible_pair(rng: &mut impl Rng) -> (Module, Module) {
    let m1 = random_module(rng, "a.", &[]);
    let feed: Vec<VarId> = m1
        .outputs
        .iter()
        .filter(|_| rng.gen_bool(0.5))
        .cloned()
        .collect();
    let m2 = random_module(rng, "b.", &feed);
    (m1, m2)
}

/// A random obligation: a module plus `Always` contracts over its
/// interface. The contract is arbitrary, so the obligation may or may not
/// hold — which is the point for engine/oracle agreement testing.
pub fn random_obligation(rng: &mut impl Rng) -> (Module, Contract) {
    let m = random_module(rng, "s.", &[]);
    let in_names: Vec<String> = m.inputs.iter().map(|v| v.name.clone()).collect();
    let out_names: Vec<String> = m.outputs.iter().map(|v| v.name.clone()).collect();
    let assumes = if in_names.is_empty() || rng.gen_bool(0.3) {
        Vec::new()
    } else {
        vec![Prop::always(
            "a0",
            m.inputs.iter().cloned().collect(),
            random_bool_expr(rng, &in_names, 2),
        )]
    };
    let guarantees = vec![Prop::always(
        "g0",
        m.outputs.iter().cloned().collect(),
        random_bool_expr(rng, &out_names, 2),
    )];
    (m, Contract::new(assumes, guarantees))
}
