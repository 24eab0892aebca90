//! Randomized invariant checks over the generators in `testgen`: graph
//! validity, stratification, relation totality, abstraction roundtrips,
//! and the algebraic laws of composition and hiding.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use std::collections::BTreeSet;

use hrmv_core::hypergraph::{
    abstraction, longest_path_levels, subgraph, union, validate_tg, RelationSpec, TaskGraph, VarId,
};
use hrmv_core::module::{
    bounded_refines, hide, parallel_compose, step, traces, validate_module, DomainBounds,
    Valuation,
};
use hrmv_core::testgen::{random_bool_tg, random_compatible_pair, random_module};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generated graphs satisfy all four validity conditions, stratify, and
/// admit a task order compatible with the strata.
#[test]
fn random_graphs_are_valid_and_stratified() {
    let mut r = rng(11);
    for _ in 0..300 {
        let g = random_bool_tg(&mut r, 8, "g.");
        let report = validate_tg(&g);
        assert!(report.is_valid(), "{}\n{:?}", report, g);

        let levels = longest_path_levels(&g).unwrap();
        let mut level_of: std::collections::BTreeMap<&VarId, usize> =
            std::collections::BTreeMap::new();
        for (i, group) in levels.iter().enumerate() {
            for v in group {
                level_of.insert(v, i);
            }
        }
        assert_eq!(level_of.len(), g.vertices.len());
        // Every task's writes sit strictly above all of its reads.
        for t in g.edges.values() {
            let read_max = t.reads.iter().map(|v| level_of[v]).max().unwrap_or(0);
            for w in &t.writes {
                assert!(level_of[w] > read_max || t.reads.is_empty() && level_of[w] >= 1);
            }
        }
        // The topological order respects writer-before-reader.
        let order = g.topo_tasks().unwrap();
        assert_eq!(order.len(), g.edges.len());
        let mut written: BTreeSet<_> = g
            .vertices
            .iter()
            .filter(|v| g.writer_of(v).is_none())
            .cloned()
            .collect();
        for t in &order {
            for v in &t.reads {
                assert!(written.contains(v), "task {} reads unwritten {}", t.id, v.name);
            }
            written.extend(t.writes.iter().cloned());
        }
    }
}

/// Every generated relation is total: from any assignment of its reads
/// there is at least one write assignment in the relation.
#[test]
fn random_graphs_are_total() {
    let mut r = rng(12);
    let bounds = DomainBounds::default();
    let mut graphs = 0;
    while graphs < 1000 {
        let g = random_bool_tg(&mut r, 7, "g.");
        graphs += 1;
        // Run the whole graph as a stateless module: initial vertices are
        // inputs, the rest outputs.
        let inputs: Vec<_> = g.initial_vertices().into_iter().collect();
        let outputs: Vec<_> = g
            .vertices
            .iter()
            .filter(|v| g.writer_of(v).is_some())
            .cloned()
            .collect();
        let tasks: Vec<_> = g.edges.values().cloned().collect();
        let m = hrmv_core::module::module("t", inputs.clone(), outputs, Vec::new(), tasks);
        assert!(validate_module(&m).is_valid());
        // Exhaust all boolean input assignments.
        for bits in 0..(1u32 << inputs.len()) {
            let input: Valuation = inputs
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    (
                        v.clone(),
                        hrmv_core::expr::Value::Bool(bits >> k & 1 == 1),
                    )
                })
                .collect();
            let results = step(&m, &Valuation::new(), &input, &bounds).unwrap();
            assert!(!results.is_empty(), "relation not total on {:?}", input);
        }
    }
}

/// Abstracting a downward-closed subgraph and mapping it back through
/// `subgraph` preserves the original tasks; the abstracted graph stays
/// valid.
#[test]
fn abstraction_roundtrip() {
    let mut r = rng(13);
    for _ in 0..200 {
        let g = random_bool_tg(&mut r, 8, "g.");
        if g.edges.len() < 2 {
            continue;
        }
        // Take a prefix of a topological order as the subgraph — its
        // boundary vertices form the interface.
        let order = g.topo_tasks().unwrap();
        let take = order.len() / 2;
        if take == 0 {
            continue;
        }
        let ids: BTreeSet<String> = order[..take].iter().map(|t| t.id.clone()).collect();
        let sub = subgraph(&g, &ids).unwrap();
        let iface_in = sub.initial_vertices();
        let iface_out = sub.terminal_vertices();
        if iface_out.is_empty() {
            continue;
        }
        // The abstraction precondition requires the interface to coincide
        // with the subgraph boundary, which holds by construction here
        // except when some internal write is read outside the subgraph.
        let escapes = g.edges.iter().any(|(id, t)| {
            !ids.contains(id)
                && t.reads
                    .iter()
                    .any(|v| sub.writer_of(v).is_some() && !iface_out.contains(v))
        });
        if escapes {
            continue;
        }
        let iface_in_v: Vec<VarId> = iface_in.iter().cloned().collect();
        let iface_out_v: Vec<VarId> = iface_out.iter().cloned().collect();
        let abstracted = abstraction(
            &g,
            &sub,
            &iface_in_v,
            &iface_out_v,
            RelationSpec::NondetChoose(hrmv_core::expr::Expr::bool(true)),
        )
        .unwrap();
        assert!(validate_tg(&abstracted).is_valid());
        // The non-abstracted part is untouched.
        for (id, t) in &g.edges {
            if !ids.contains(id) {
                assert_eq!(abstracted.edges.get(id), Some(t));
            }
        }
        // Re-expanding: remove the fresh edge, union the subgraph back.
        let fresh: BTreeSet<String> = abstracted
            .edges
            .keys()
            .filter(|id| !g.edges.contains_key(*id))
            .cloned()
            .collect();
        assert_eq!(fresh.len(), 1);
        let rest_ids: BTreeSet<String> =
            g.edges.keys().filter(|id| !ids.contains(*id)).cloned().collect();
        if rest_ids.is_empty() {
            continue;
        }
        let rest = subgraph(&g, &rest_ids).unwrap();
        let (reunited, acyclic) = union(&rest, &sub).unwrap();
        assert!(acyclic);
        assert_eq!(reunited.edges, g.edges);
    }
}

/// Union is commutative on disjoint-writer graphs, and unioning a graph
/// with the empty graph is the identity on edges.
#[test]
fn union_laws() {
    let mut r = rng(14);
    for _ in 0..200 {
        let g1 = random_bool_tg(&mut r, 6, "p.");
        let g2 = random_bool_tg(&mut r, 6, "q.");
        let (u12, a12) = union(&g1, &g2).unwrap();
        let (u21, a21) = union(&g2, &g1).unwrap();
        assert_eq!(u12, u21);
        assert_eq!(a12, a21);
        assert!(a12, "disjoint graphs cannot create cycles");
        let (u1e, _) = union(&g1, &TaskGraph::from_tasks(Vec::new())).unwrap();
        assert_eq!(u1e, g1);
    }
}

/// Parallel composition of compatible random modules is commutative (up
/// to the name), associative in its trace sets, and monotone: the
/// composite refines each component.
#[test]
fn composition_laws() {
    let mut r = rng(15);
    let bounds = DomainBounds::default();
    let mut checked = 0;
    while checked < 60 {
        let (m1, m2) = random_compatible_pair(&mut r);
        let Ok(c12) = parallel_compose(&m1, &m2) else { continue };
        let c21 = parallel_compose(&m2, &m1).unwrap();
        assert_eq!(c12.inputs, c21.inputs);
        assert_eq!(c12.outputs, c21.outputs);
        assert_eq!(c12.react, c21.react);
        assert_eq!(
            traces(&c12, 3, &bounds).unwrap(),
            traces(&c21, 3, &bounds).unwrap()
        );
        // The composite refines each component.
        assert!(bounded_refines(&c12, &m1, 3, &bounds).unwrap());
        assert!(bounded_refines(&c12, &m2, 3, &bounds).unwrap());
        checked += 1;
    }
}

/// Hiding laws: hide(hide(m, A), B) == hide(m, A ∪ B), and hiding is a
/// refinement-abstraction (m refines hide(m, A)).
#[test]
fn hiding_laws() {
    let mut r = rng(16);
    let bounds = DomainBounds::default();
    for _ in 0..60 {
        let m = random_module(&mut r, "h.", &[]);
        if m.outputs.len() < 2 {
            continue;
        }
        let mut it = m.outputs.iter();
        let a: BTreeSet<_> = [it.next().unwrap().clone()].into_iter().collect();
        let b: BTreeSet<_> = [it.next().unwrap().clone()].into_iter().collect();
        let ab: BTreeSet<_> = a.union(&b).cloned().collect();
        let lhs = hide(&hide(&m, &a).unwrap(), &b).unwrap();
        let rhs = hide(&m, &ab).unwrap();
        assert_eq!(lhs.outputs, rhs.outputs);
        assert_eq!(lhs.react, rhs.react);
        assert!(bounded_refines(&m, &rhs, 3, &bounds).unwrap());
    }
}

/// Random modules validate and never get stuck within the bounded domain.
#[test]
fn random_modules_execute() {
    let mut r = rng(17);
    let bounds = DomainBounds::default();
    for _ in 0..200 {
        let m = random_module(&mut r, "m.", &[]);
        let report = validate_module(&m);
        assert!(report.is_valid(), "{}\n{:?}", report, m);
        let all = traces(&m, 2, &bounds).unwrap();
        assert!(!all.is_empty());
    }
}
