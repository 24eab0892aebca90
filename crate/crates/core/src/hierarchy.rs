//! Hierarchical modules, adapter extraction, decomposition, contract
//! abstraction of submodules, and generation of the compositional proof
//! obligations.
//!
//! A hierarchical module is a module whose reaction graph embeds each
//! child's reaction graph as a designated edge subset. The *adapter* is
//! what remains of the parent once the children are carved out, with the
//! children's interfaces flipped onto its own: it reads their outputs and
//! writes their inputs. Recomposing children and adapter and hiding the
//! internal interface yields the original module back; that fact is what
//! justifies discharging one obligation per child plus one for the
//! adapter instead of one monolithic check.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::expr::{Expr, Sort, Value};
use crate::hypergraph::{subgraph, RelationSpec, Task, TaskGraph, TgViolation, ValidationReport, VarId};
use crate::module::{InitConstraint, Module};
use crate::property::{Contract, PropertyError};

/// One child of a hierarchical module: the child module itself plus the
/// subset of the parent's edges that forms its reaction graph. Variables
/// are matched by (instance-prefixed) name, so the embedding map is the
/// identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmoduleBinding {
    pub child: Module,
    pub edge_ids: BTreeSet<String>,
}

/// A module together with its submodule bindings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchicalModule {
    pub parent: Module,
    pub bindings: Vec<SubmoduleBinding>,
}

/// A single proof obligation: show `subject ∥ assume ⊑ guarantee`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obligation {
    pub label: String,
    pub subject: Module,
    pub contract: Contract,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HierarchyError {
    #[error("hierarchy is invalid:\n{0}")]
    Invalid(String),
    #[error("no binding with index {0}")]
    NoSuchChild(usize),
    #[error(transparent)]
    Property(#[from] PropertyError),
}

/// Check the hierarchical-module conditions; each gets its own witness.
pub fn validate_hierarchy(h: &HierarchicalModule) -> ValidationReport {
    let mut violations = Vec::new();
    let mut add = |name: &str, detail: String| {
        violations.push(TgViolation::InOutMismatch {
            task: name.to_string(),
            detail,
        })
    };
    let p = &h.parent;
    for (j, b) in h.bindings.iter().enumerate() {
        let c = &b.child;
        // (i) the parent never handles a child's interface directly.
        for v in p.inputs.intersection(&c.inputs) {
            add("hier(i)", format!("child {} shares input {} with the parent", j, v));
        }
        for v in p.outputs.intersection(&c.outputs) {
            add("hier(i)", format!("child {} shares output {} with the parent", j, v));
        }
        // (ii) child states are parent states.
        for s in c.states.difference(&p.states) {
            add("hier(ii)", format!("state {} of child {} is not a parent state", s, j));
        }
        // (iii) the parent's initial condition projects onto the child's.
        for (s, c_init) in &c.init {
            match p.init.get(s) {
                Some(p_init) if p_init == c_init => {}
                Some(_) => add(
                    "hier(iii)",
                    format!("initial constraint on {} differs between parent and child {}", s, j),
                ),
                None => add(
                    "hier(iii)",
                    format!("parent has no initial constraint on child {}'s state {}", j, s),
                ),
            }
        }
        // (iv) the bound edges form exactly the child's reaction graph.
        match subgraph(&p.react, &b.edge_ids) {
            Ok(sub) => {
                if sub != c.react {
                    add(
                        "hier(iv)",
                        format!("bound edges of child {} do not reproduce its reaction graph", j),
                    );
                }
            }
            Err(e) => add("hier(iv)", format!("child {}: {}", j, e)),
        }
    }
    // Across children: pairwise disjoint outputs and states.
    for j in 0..h.bindings.len() {
        for k in (j + 1)..h.bindings.len() {
            let cj = &h.bindings[j].child;
            let ck = &h.bindings[k].child;
            for v in cj.outputs.intersection(&ck.outputs) {
                add("hier(pairwise)", format!("children {} and {} share output {}", j, k, v));
            }
            for v in cj.states.intersection(&ck.states) {
                add("hier(pairwise)", format!("children {} and {} share state {}", j, k, v));
            }
        }
    }
    ValidationReport { violations }
}

fn ensure_valid(h: &HierarchicalModule) -> Result<(), HierarchyError> {
    let report = validate_hierarchy(h);
    if report.is_valid() {
        Ok(())
    } else {
        Err(HierarchyError::Invalid(report.to_string()))
    }
}

/// The flattened view: the parent module itself (children's content is
/// already embedded in its reaction graph).
pub fn flatten(h: &HierarchicalModule) -> Result<Module, HierarchyError> {
    ensure_valid(h)?;
    Ok(h.parent.clone())
}

/// Derive the adapter: remove every child's edges and state vertices,
/// flip the children's interfaces onto the parent's.
pub fn derive_adapter(h: &HierarchicalModule) -> Result<Module, HierarchyError> {
    ensure_valid(h)?;
    let p = &h.parent;
    let mut removed_edges: BTreeSet<&String> = BTreeSet::new();
    let mut child_states: BTreeSet<VarId> = BTreeSet::new();
    let mut inputs = p.inputs.clone();
    let mut outputs = p.outputs.clone();
    for b in &h.bindings {
        removed_edges.extend(b.edge_ids.iter());
        child_states.extend(b.child.states.iter().cloned());
        inputs.extend(b.child.outputs.iter().cloned());
        outputs.extend(b.child.inputs.iter().cloned());
    }
    let react = TaskGraph::from_tasks(
        p.react
            .edges
            .values()
            .filter(|t| !removed_edges.contains(&t.id))
            .cloned(),
    );
    let states: BTreeSet<VarId> = p.states.difference(&child_states).cloned().collect();
    let init: BTreeMap<VarId, InitConstraint> = p
        .init
        .iter()
        .filter(|(s, _)| states.contains(*s))
        .map(|(s, c)| (s.clone(), c.clone()))
        .collect();
    Ok(Module {
        name: format!("{}+", p.name),
        inputs,
        outputs,
        states,
        init,
        react,
    })
}

/// Split the hierarchy into (children, adapter, interface-to-hide).
pub fn decompose(
    h: &HierarchicalModule,
) -> Result<(Vec<Module>, Module, BTreeSet<VarId>), HierarchyError> {
    let adapter = derive_adapter(h)?;
    let children: Vec<Module> = h.bindings.iter().map(|b| b.child.clone()).collect();
    let mut hide_set = BTreeSet::new();
    for c in &children {
        hide_set.extend(c.inputs.iter().cloned());
        hide_set.extend(c.outputs.iter().cloned());
    }
    Ok((children, adapter, hide_set))
}

/// Replace child `j`'s edges by a single opaque contract edge. The
/// result may have a cyclic reaction graph; it is returned unvalidated so
/// the caller can either reject it or lower it symbolically (where the
/// history bit breaks the cycle).
pub fn abstract_submodule(
    h: &HierarchicalModule,
    j: usize,
    c: &Contract,
) -> Result<Module, HierarchyError> {
    ensure_valid(h)?;
    if j >= h.bindings.len() {
        return Err(HierarchyError::NoSuchChild(j));
    }
    abstract_children(h, &[(j, c.clone())])
}

/// Abstract every listed child at once (used by the compositional
/// abstraction mode, which abstracts all children together).
pub fn abstract_children(
    h: &HierarchicalModule,
    contracts: &[(usize, Contract)],
) -> Result<Module, HierarchyError> {
    ensure_valid(h)?;
    let p = &h.parent;
    let mut removed_edges: BTreeSet<String> = BTreeSet::new();
    let mut removed_states: BTreeSet<VarId> = BTreeSet::new();
    let mut new_tasks: Vec<Task> = Vec::new();
    let mut new_states: Vec<(VarId, InitConstraint)> = Vec::new();
    for (j, contract) in contracts {
        let b = h
            .bindings
            .get(*j)
            .ok_or(HierarchyError::NoSuchChild(*j))?;
        let child = &b.child;
        removed_edges.extend(b.edge_ids.iter().cloned());
        removed_states.extend(child.states.iter().cloned());

        let assume = Expr::conj(
            contract
                .assumes
                .iter()
                .filter_map(|pr| match &pr.formula {
                    crate::property::PropertyFormula::Always(e) => Some(e.clone()),
                    _ => None,
                })
                .collect(),
        );
        let guarantee = Expr::conj(
            contract
                .guarantees
                .iter()
                .filter_map(|pr| match &pr.formula {
                    crate::property::PropertyFormula::Always(e) => Some(e.clone()),
                    _ => None,
                })
                .collect(),
        );
        let hvar = VarId::new(format!("{}.h", child.name), Sort::Bool);
        new_states.push((hvar.clone(), InitConstraint::Exact(Value::Bool(true))));

        let mut upd_reads = vec![hvar.clone()];
        upd_reads.extend(child.inputs.iter().cloned());
        new_tasks.push(Task::assign(
            format!("hist:{}", child.name),
            upd_reads,
            hvar.primed(),
            Expr::and(Expr::var(hvar.name.clone()), assume.clone()),
        ));

        let mut reads: Vec<VarId> = child.inputs.iter().cloned().collect();
        reads.push(hvar.clone());
        new_tasks.push(Task {
            id: format!("abs:{}", child.name),
            reads,
            writes: child.outputs.iter().cloned().collect(),
            relation: RelationSpec::Opaque {
                name: child.name.clone(),
                assume,
                guarantee,
                hist: Some(hvar),
            },
        });
    }
    let mut tasks: Vec<Task> = p
        .react
        .edges
        .values()
        .filter(|t| !removed_edges.contains(&t.id))
        .cloned()
        .collect();
    tasks.extend(new_tasks);
    let react = TaskGraph::from_tasks(tasks);
    let mut states: BTreeSet<VarId> = p.states.difference(&removed_states).cloned().collect();
    let mut init: BTreeMap<VarId, InitConstraint> = p
        .init
        .iter()
        .filter(|(s, _)| states.contains(*s))
        .map(|(s, c)| (s.clone(), c.clone()))
        .collect();
    for (v, c) in new_states {
        states.insert(v.clone());
        init.insert(v, c);
    }
    Ok(Module {
        name: format!("{}~", p.name),
        inputs: p.inputs.clone(),
        outputs: p.outputs.clone(),
        states,
        init,
        react,
    })
}

/// Instantiate the proof-obligation scheme: one obligation per child
/// (child against its own contract) plus the adapter obligation, whose
/// assumption side collects the top-level assumptions and every child's
/// guarantees, and whose guarantee side collects the top-level guarantees
/// and every child's assumptions.
pub fn gen_obligations(
    h: &HierarchicalModule,
    top: &Contract,
    subs: &[Contract],
) -> Result<Vec<Obligation>, HierarchyError> {
    ensure_valid(h)?;
    assert_eq!(
        subs.len(),
        h.bindings.len(),
        "one sub-contract per binding required"
    );
    let mut out = Vec::new();
    for (j, (b, c)) in h.bindings.iter().zip(subs.iter()).enumerate() {
        out.push(Obligation {
            label: format!("sub:{}", j),
            subject: b.child.clone(),
            contract: c.clone(),
        });
    }
    let adapter = derive_adapter(h)?;
    let mut assumes = top.assumes.clone();
    let mut guarantees = top.guarantees.clone();
    for c in subs {
        assumes.extend(c.guarantees.iter().cloned());
        guarantees.extend(c.assumes.iter().cloned());
    }
    out.push(Obligation {
        label: "adapter".into(),
        subject: adapter,
        contract: Contract::new(assumes, guarantees),
    });
    Ok(out)
}
