//! Symbolic transition systems: the unrolling-ready form of a module
//! under a contract. Variables live in frames; the transition relation is
//! a conjunction of labeled formulas over one frame and its successor.

use std::collections::{BTreeMap, BTreeSet};

use hrmv_core::expr::{Expr, Sort, Value};
use hrmv_core::hypergraph::{RelationSpec, Task, VarId};
use hrmv_core::module::{InitConstraint, Module};
use hrmv_core::property::{Contract, PropertyFormula};
use thiserror::Error;

/// A transition system over unbounded integer/real/boolean domains.
///
/// The reaction of a round splits into `flow` — constraints within one
/// frame (combinational task relations) — and `step` — constraints
/// between a frame and its successor (state updates), where a primed name
/// (`x'`) denotes the variable in the successor frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSystem {
    /// All frame variables, sorted by name: inputs, outputs, locals and
    /// states of the subject plus any history bits.
    pub vars: Vec<VarId>,
    /// Exactly-constrained initial values (frame 0 only).
    pub init: Vec<(VarId, Value)>,
    /// Labeled within-frame conjuncts, asserted at every unrolled frame.
    pub flow: Vec<(String, Expr)>,
    /// Labeled frame-to-successor conjuncts.
    pub step: Vec<(String, Expr)>,
    /// Environment constraints, asserted at every frame.
    pub assumes: Vec<(String, Expr)>,
    /// Named goal properties, checked at every frame.
    pub props: Vec<(String, Expr)>,
    /// Auxiliary invariants proven alongside the properties during
    /// induction but never reported as goals (history bits of abstracted
    /// components and the component assumptions that keep them true).
    pub strengthen: Vec<(String, Expr)>,
    /// The subject's input variables, for counterexample reporting.
    pub inputs: BTreeSet<VarId>,
    /// The subject's output variables, for counterexample reporting.
    pub outputs: BTreeSet<VarId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("property `{0}` mentions `{1}` which is not a variable of the subject")]
    UnknownPropVar(String, String),
    #[error("history bit name `{0}` collides with a subject variable")]
    HistCollision(String),
    #[error("task `{0}`: a relational (non-functional) constraint over a primed state is not supported")]
    RelationalStateUpdate(String),
}

/// The characteristic formula of a task's relation, over read names and
/// (possibly primed) write names.
pub fn relation_formula(task: &Task) -> Expr {
    match &task.relation {
        RelationSpec::FunctionalAssign(pairs) => Expr::conj(
            pairs
                .iter()
                .map(|(w, e)| {
                    Expr::bin(
                        hrmv_core::expr::BinOp::Eq,
                        Expr::var(w.name.clone()),
                        e.clone(),
                    )
                })
                .collect(),
        ),
        RelationSpec::NondetChoose(e) => e.clone(),
        RelationSpec::Opaque {
            assume,
            guarantee,
            hist,
            ..
        } => {
            let premise = match hist {
                Some(h) => Expr::and(Expr::var(h.name.clone()), assume.clone()),
                None => assume.clone(),
            };
            Expr::implies(premise, guarantee.clone())
        }
    }
}

/// Encode `subject` constrained by `contract` as a transition system:
/// the contract's assumptions become frame constraints and its guarantees
/// become the goal properties.
///
/// History-implication properties introduce a fresh boolean state bit per
/// property that latches the first violation of the premise.
pub fn encode(subject: &Module, contract: &Contract) -> Result<TransitionSystem, EncodeError> {
    let mut vars: BTreeSet<VarId> = subject
        .react
        .vertices
        .iter()
        .map(|v| v.unprimed().unwrap_or_else(|| v.clone()))
        .collect();
    vars.extend(subject.states.iter().cloned());

    let mut flow: Vec<(String, Expr)> = Vec::new();
    let mut step: Vec<(String, Expr)> = Vec::new();
    let mut strengthen: Vec<(String, Expr)> = Vec::new();
    for task in subject.react.edges.values() {
        match &task.relation {
            RelationSpec::FunctionalAssign(pairs) => {
                // Split a task's assignments: unprimed writes constrain
                // the current frame, primed writes the next one.
                for (w, e) in pairs {
                    let eq = Expr::bin(
                        hrmv_core::expr::BinOp::Eq,
                        Expr::var(w.name.clone()),
                        e.clone(),
                    );
                    let label = format!("edge:{}:{}", task.id, w.name);
                    if w.is_primed() {
                        step.push((label, eq));
                    } else {
                        flow.push((label, eq));
                    }
                }
            }
            relation => {
                let formula = relation_formula(task);
                if formula.free_vars().iter().any(|n| n.ends_with('\'')) {
                    return Err(EncodeError::RelationalStateUpdate(task.id.clone()));
                }
                flow.push((format!("edge:{}", task.id), formula));
                if let RelationSpec::Opaque {
                    name,
                    assume,
                    hist: Some(h),
                    ..
                } = relation
                {
                    strengthen.push((format!("hist:{}", name), Expr::var(h.name.clone())));
                    strengthen.push((format!("env:{}", name), assume.clone()));
                }
            }
        }
    }
    // States whose primed copy no task writes carry their value over.
    for s in &subject.states {
        if subject.react.writer_of(&s.primed()).is_none() {
            step.push((
                format!("carry:{}", s.name),
                Expr::bin(
                    hrmv_core::expr::BinOp::Eq,
                    Expr::var(s.primed().name),
                    Expr::var(s.name.clone()),
                ),
            ));
        }
    }

    let mut init: Vec<(VarId, Value)> = Vec::new();
    for (v, c) in &subject.init {
        if let InitConstraint::Exact(value) = c {
            init.push((v.clone(), value.clone()));
        }
    }

    let mut assumes = Vec::new();
    let mut props = Vec::new();
    // Lower a property to a frame formula, materializing a history bit
    // when the property has a premise over the strict past.
    let lower = |prop: &hrmv_core::property::Prop,
                     vars: &mut BTreeSet<VarId>,
                     step: &mut Vec<(String, Expr)>,
                     init: &mut Vec<(VarId, Value)>|
     -> Result<Expr, EncodeError> {
        match &prop.formula {
            PropertyFormula::Always(e) => Ok(e.clone()),
            PropertyFormula::HistImplication { hist, then } => {
                let h = VarId::new(format!("{}.h", prop.name), Sort::Bool);
                if vars.contains(&h) {
                    return Err(EncodeError::HistCollision(h.name));
                }
                vars.insert(h.clone());
                init.push((h.clone(), Value::Bool(true)));
                step.push((
                    format!("hist:{}", prop.name),
                    Expr::bin(
                        hrmv_core::expr::BinOp::Eq,
                        Expr::var(h.primed().name),
                        Expr::and(Expr::var(h.name.clone()), hist.clone()),
                    ),
                ));
                Ok(Expr::implies(
                    Expr::and(Expr::var(h.name), hist.clone()),
                    then.clone(),
                ))
            }
        }
    };
    for prop in &contract.assumes {
        let e = lower(prop, &mut vars, &mut step, &mut init)?;
        assumes.push((prop.name.clone(), e));
    }
    for prop in &contract.guarantees {
        let e = lower(prop, &mut vars, &mut step, &mut init)?;
        props.push((prop.name.clone(), e));
    }

    // Every free name in a contract formula must be a frame variable.
    let names: BTreeSet<&str> = vars.iter().map(|v| v.name.as_str()).collect();
    for (label, e) in assumes.iter().chain(props.iter()) {
        for n in e.free_vars() {
            if !names.contains(n.as_str()) {
                return Err(EncodeError::UnknownPropVar(label.clone(), n));
            }
        }
    }

    Ok(TransitionSystem {
        vars: vars.into_iter().collect(),
        init,
        flow,
        step,
        assumes,
        props,
        strengthen,
        inputs: subject.inputs.clone(),
        outputs: subject.outputs.clone(),
    })
}

impl TransitionSystem {
    /// The sort environment of one frame.
    pub fn sorts(&self) -> BTreeMap<String, Sort> {
        self.vars
            .iter()
            .map(|v| (v.name.clone(), v.sort))
            .collect()
    }

    /// The conjunction of all goal properties.
    pub fn props_conj(&self) -> Expr {
        Expr::conj(self.props.iter().map(|(_, e)| e.clone()).collect())
    }

    /// The conjunction of goal properties and auxiliary invariants — the
    /// formula k-induction actually proves.
    pub fn proof_goal(&self) -> Expr {
        let mut parts: Vec<Expr> = self.props.iter().map(|(_, e)| e.clone()).collect();
        parts.extend(self.strengthen.iter().map(|(_, e)| e.clone()));
        Expr::conj(parts)
    }
}
