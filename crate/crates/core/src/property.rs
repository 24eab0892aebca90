//! Safety-property formulas, property modules and assume-guarantee
//! contracts.
//!
//! A property module nondeterministically emits any signal satisfying its
//! formula; composing it with a subject module and checking refinement
//! against another property module is the shape every verification goal
//! in this toolchain takes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::expr::{Expr, Sort, SortError};
use crate::hypergraph::{Task, TaskGraph, VarId};
use crate::module::{InitConstraint, Module};

/// A safety property over a list of designated variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropertyFormula {
    /// `always p`: p holds at every round.
    Always(Expr),
    /// `Hist p => q`: q holds at every round where p has held at every
    /// round up to and including the current one.
    HistImplication { hist: Expr, then: Expr },
}

impl fmt::Display for PropertyFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyFormula::Always(p) => write!(f, "always {}", p),
            PropertyFormula::HistImplication { hist, then } => {
                write!(f, "hist {} => {}", hist, then)
            }
        }
    }
}

/// A named property plus the variables (with sorts) it ranges over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prop {
    pub name: String,
    pub formula: PropertyFormula,
    pub vars: Vec<VarId>,
}

impl Prop {
    pub fn always(name: impl Into<String>, vars: Vec<VarId>, p: Expr) -> Prop {
        Prop {
            name: name.into(),
            formula: PropertyFormula::Always(p),
            vars,
        }
    }
}

/// An assume-guarantee contract, kept at the formula level. The module
/// views (`assume_module` / `guarantee_module`) are derived on demand.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Contract {
    pub assumes: Vec<Prop>,
    pub guarantees: Vec<Prop>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PropertyError {
    #[error("property `{name}` is ill-typed: {source}")]
    IllTyped { name: String, source: SortError },
    #[error("property `{name}` is not boolean (sort {sort})")]
    NotBool { name: String, sort: Sort },
    #[error("property `{name}` mentions undeclared variable `{var}`")]
    UndeclaredVar { name: String, var: String },
}

fn check_prop(p: &Prop) -> Result<(), PropertyError> {
    let sorts: BTreeMap<String, Sort> = p.vars.iter().map(|v| (v.name.clone(), v.sort)).collect();
    let exprs: Vec<&Expr> = match &p.formula {
        PropertyFormula::Always(e) => vec![e],
        PropertyFormula::HistImplication { hist, then } => vec![hist, then],
    };
    for e in exprs {
        for fv in e.free_vars() {
            if !sorts.contains_key(&fv) {
                return Err(PropertyError::UndeclaredVar {
                    name: p.name.clone(),
                    var: fv,
                });
            }
        }
        let sort = e.sort(&sorts).map_err(|source| PropertyError::IllTyped {
            name: p.name.clone(),
            source,
        })?;
        if sort != Sort::Bool {
            return Err(PropertyError::NotBool {
                name: p.name.clone(),
                sort,
            });
        }
    }
    Ok(())
}

/// Build the module that nondeterministically outputs signals satisfying
/// the formula. For `Always` the module is stateless; the `Hist` form
/// carries one boolean state bit tracking whether the premise has held at
/// every earlier round.
pub fn property_module(name: &str, props: &[Prop]) -> Result<Module, PropertyError> {
    for p in props {
        check_prop(p)?;
    }
    let mut tasks: Vec<Task> = Vec::new();
    let mut states: BTreeSet<VarId> = BTreeSet::new();
    let mut init: BTreeMap<VarId, InitConstraint> = BTreeMap::new();
    let mut inputs: BTreeSet<VarId> = BTreeSet::new();
    let mut outputs: BTreeSet<VarId> = BTreeSet::new();

    // All `Always` properties go into one choice task so that properties
    // over overlapping variable sets never create write conflicts.
    let mut always_vars: BTreeSet<VarId> = BTreeSet::new();
    let mut always_preds: Vec<Expr> = Vec::new();
    for p in props {
        match &p.formula {
            PropertyFormula::Always(e) => {
                always_vars.extend(p.vars.iter().cloned());
                always_preds.push(e.clone());
            }
            PropertyFormula::HistImplication { hist, then } => {
                let hist_vars: BTreeSet<String> = hist.free_vars();
                let premise_vars: Vec<VarId> = p
                    .vars
                    .iter()
                    .filter(|v| hist_vars.contains(&v.name))
                    .cloned()
                    .collect();
                let concl_vars: Vec<VarId> = p
                    .vars
                    .iter()
                    .filter(|v| !hist_vars.contains(&v.name))
                    .cloned()
                    .collect();
                let h = VarId::new(format!("{}.h", p.name), Sort::Bool);
                states.insert(h.clone());
                init.insert(h.clone(), InitConstraint::Exact(crate::expr::Value::Bool(true)));
                inputs.extend(premise_vars.iter().cloned());
                outputs.extend(concl_vars.iter().cloned());
                let mut update_reads = vec![h.clone()];
                update_reads.extend(premise_vars.iter().cloned());
                tasks.push(Task::assign(
                    format!("{}.upd", p.name),
                    update_reads,
                    h.primed(),
                    Expr::and(Expr::var(h.name.clone()), hist.clone()),
                ));
                let mut choose_reads = vec![h.clone()];
                choose_reads.extend(premise_vars.iter().cloned());
                tasks.push(Task::choose(
                    format!("{}.out", p.name),
                    choose_reads,
                    concl_vars,
                    Expr::implies(
                        Expr::and(Expr::var(h.name.clone()), hist.clone()),
                        then.clone(),
                    ),
                ));
            }
        }
    }
    if !always_vars.is_empty() {
        outputs.extend(always_vars.iter().cloned());
        tasks.push(Task::choose(
            "choose",
            Vec::new(),
            always_vars.into_iter().collect(),
            Expr::conj(always_preds),
        ));
    }
    let react = TaskGraph::from_tasks(tasks);
    Ok(Module {
        name: name.into(),
        inputs,
        outputs,
        states,
        init,
        react,
    })
}

impl Contract {
    pub fn new(assumes: Vec<Prop>, guarantees: Vec<Prop>) -> Contract {
        Contract { assumes, guarantees }
    }

    /// The module emitting any input signal allowed by the assumptions.
    pub fn assume_module(&self, name: &str) -> Result<Module, PropertyError> {
        property_module(name, &self.assumes)
    }

    /// The module emitting any output signal allowed by the guarantees.
    pub fn guarantee_module(&self, name: &str) -> Result<Module, PropertyError> {
        property_module(name, &self.guarantees)
    }

    /// Rename every variable occurring in the contract.
    pub fn rename(&self, map: &BTreeMap<String, String>) -> Contract {
        let rename_prop = |p: &Prop| Prop {
            name: p.name.clone(),
            formula: match &p.formula {
                PropertyFormula::Always(e) => PropertyFormula::Always(e.rename(map)),
                PropertyFormula::HistImplication { hist, then } => PropertyFormula::HistImplication {
                    hist: hist.rename(map),
                    then: then.rename(map),
                },
            },
            vars: p
                .vars
                .iter()
                .map(|v| match map.get(&v.name) {
                    Some(n) => VarId::new(n.clone(), v.sort),
                    None => v.clone(),
                })
                .collect(),
        };
        Contract {
            assumes: self.assumes.iter().map(rename_prop).collect(),
            guarantees: self.guarantees.iter().map(rename_prop).collect(),
        }
    }

    /// Plain `Always` formulas of the assume side, if all assumptions are
    /// of that shape.
    pub fn assume_always_formulas(&self) -> Option<Vec<(String, Expr)>> {
        always_formulas(&self.assumes)
    }

    pub fn guarantee_always_formulas(&self) -> Option<Vec<(String, Expr)>> {
        always_formulas(&self.guarantees)
    }
}

fn always_formulas(props: &[Prop]) -> Option<Vec<(String, Expr)>> {
    props
        .iter()
        .map(|p| match &p.formula {
            PropertyFormula::Always(e) => Some((p.name.clone(), e.clone())),
            PropertyFormula::HistImplication { .. } => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{BinOp, Value};
    use crate::module::{self, DomainBounds};

    #[test]
    fn always_nonneg_emits_only_nonneg() {
        let o2 = VarId::new("o2", Sort::Int);
        let m = property_module(
            "nonneg",
            &[Prop::always(
                "o2_nonneg",
                vec![o2.clone()],
                Expr::bin(BinOp::Ge, Expr::var("o2"), Expr::int(0)),
            )],
        )
        .unwrap();
        let bounds = DomainBounds::default();
        let results = module::step(&m, &Default::default(), &Default::default(), &bounds).unwrap();
        assert_eq!(results.len(), 5); // 0..=4
        for (o, _) in results {
            match o.get(&o2).unwrap() {
                Value::Int(n) => assert!(*n >= 0),
                _ => panic!("wrong sort"),
            }
        }
    }

    #[test]
    fn empty_always_is_top() {
        let m = property_module("t", &[]).unwrap();
        assert!(m.inputs.is_empty() && m.outputs.is_empty() && m.states.is_empty());
    }

    #[test]
    fn hist_implication_releases_after_violation() {
        // hist (i >= 0) => (o >= 0); feed i = -1, then i = 5: from the
        // first round on, o is unconstrained.
        let i = VarId::new("i", Sort::Int);
        let o = VarId::new("o", Sort::Int);
        let m = property_module(
            "h",
            &[Prop {
                name: "p".into(),
                formula: PropertyFormula::HistImplication {
                    hist: Expr::bin(BinOp::Ge, Expr::var("i"), Expr::int(0)),
                    then: Expr::bin(BinOp::Ge, Expr::var("o"), Expr::int(0)),
                },
                vars: vec![i.clone(), o.clone()],
            }],
        )
        .unwrap();
        let bounds = DomainBounds::default();

        // Round 0 with i = -1: premise already broken, o free.
        let s0: crate::module::Valuation = m
            .states
            .iter()
            .map(|s| (s.clone(), Value::Bool(true)))
            .collect();
        let in0: crate::module::Valuation = [(i.clone(), Value::Int(-1))].into_iter().collect();
        let r0 = module::step(&m, &s0, &in0, &bounds).unwrap();
        assert_eq!(r0.len(), 9); // all of -4..=4
        // Every successor records the broken history.
        for (_, next) in &r0 {
            assert_eq!(next.values().next(), Some(&Value::Bool(false)));
        }
        // Round 1 with i = 5 (in spirit; clamped domain uses 4): premise
        // true now but history false, o still free.
        let s1: crate::module::Valuation = m
            .states
            .iter()
            .map(|s| (s.clone(), Value::Bool(false)))
            .collect();
        let in1: crate::module::Valuation = [(i.clone(), Value::Int(4))].into_iter().collect();
        let r1 = module::step(&m, &s1, &in1, &bounds).unwrap();
        assert_eq!(r1.len(), 9);
    }

    #[test]
    fn properties_must_be_boolean() {
        let x = VarId::new("x", Sort::Int);
        let err = property_module(
            "bad",
            &[Prop::always("p", vec![x], Expr::bin(BinOp::Add, Expr::var("x"), Expr::int(1)))],
        )
        .unwrap_err();
        assert!(matches!(err, PropertyError::NotBool { .. }));
    }

    #[test]
    fn overlapping_always_props_share_one_task() {
        let x = VarId::new("x", Sort::Int);
        let m = property_module(
            "band",
            &[
                Prop::always("lo", vec![x.clone()], Expr::bin(BinOp::Ge, Expr::var("x"), Expr::int(-1))),
                Prop::always("hi", vec![x.clone()], Expr::bin(BinOp::Le, Expr::var("x"), Expr::int(1))),
            ],
        )
        .unwrap();
        assert_eq!(m.react.edges.len(), 1);
        let bounds = DomainBounds::default();
        let results = module::step(&m, &Default::default(), &Default::default(), &bounds).unwrap();
        assert_eq!(results.len(), 3); // -1, 0, 1
    }
}
