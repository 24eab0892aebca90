//! Instantiation and elaboration: from a typed program to a hierarchical
//! module with contracts.
//!
//! Each call site becomes an instance of the callee; instance variables
//! are prefixed with the instance path (`Filter0.sum`), which cannot
//! clash with user identifiers because `.` is not a legal identifier
//! character. Call arguments and results are wired through copy tasks so
//! that parent and child interfaces never share a vertex.

use std::collections::BTreeMap;

use hrmv_core::expr as core;
use hrmv_core::hierarchy::{HierarchicalModule, SubmoduleBinding};
use hrmv_core::hypergraph::{Task, TaskGraph, VarId};
use hrmv_core::module::{InitConstraint, Module};
use hrmv_core::property::{Contract, Prop};
use thiserror::Error;

use crate::ast::*;
use crate::typecheck::{expr_ty, node_env, signatures, Env};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ElabError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("recursive call chain through `{0}`")]
    Recursion(String),
    #[error("node `{node}`: the left side of `->` must be a literal in `{text}`")]
    NonConstantInit { node: String, text: String },
    #[error("node `{node}`: unsupported `->` form `{text}` (expected `literal -> pre e`)")]
    BadArrow { node: String, text: String },
    #[error("node `{node}`: {0}", .message)]
    Type { node: String, message: String },
}

/// One call-site instance and its children, in call order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceTree {
    /// The node this instance resolves to.
    pub node: String,
    /// The instance name, e.g. `Filter1`.
    pub name: String,
    /// The variable prefix of this instance (empty for the main node).
    pub prefix: String,
    pub children: Vec<InstanceTree>,
}

/// The result of elaborating a main node.
#[derive(Debug, Clone)]
pub struct Elaboration {
    pub hierarchy: HierarchicalModule,
    pub top_contract: Contract,
    /// Immediate-child obligations: (instance name, node name, contract).
    pub sub_contracts: Vec<(String, String, Contract)>,
}

/// Build the instance tree rooted at `main`. Instance names number the
/// call sites of each node in traversal order (`Filter0`, `Filter1`).
pub fn instantiate(p: &Program, main: &str) -> Result<InstanceTree, ElabError> {
    let mut counters: BTreeMap<String, usize> = BTreeMap::new();
    let mut stack: Vec<String> = Vec::new();
    build_tree(p, main, "", &mut counters, &mut stack)
}

fn build_tree(
    p: &Program,
    node_name: &str,
    prefix: &str,
    counters: &mut BTreeMap<String, usize>,
    stack: &mut Vec<String>,
) -> Result<InstanceTree, ElabError> {
    if stack.iter().any(|n| n == node_name) {
        return Err(ElabError::Recursion(node_name.to_string()));
    }
    let node = p
        .node(node_name)
        .ok_or_else(|| ElabError::UnknownNode(node_name.to_string()))?;
    stack.push(node_name.to_string());
    let mut children = Vec::new();
    for eq in &node.equations {
        if let Expr::Call(callee, _) = &eq.rhs {
            let k = counters.entry(callee.clone()).or_insert(0);
            let inst = format!("{}{}", callee, *k);
            *k += 1;
            let child_prefix = format!("{}{}.", prefix, inst);
            children.push(build_tree(p, callee, &child_prefix, counters, stack)?);
        }
    }
    stack.pop();
    let name = if prefix.is_empty() {
        let k = counters.entry(node_name.to_string()).or_insert(0);
        let name = format!("{}{}", node_name, *k);
        *k += 1;
        name
    } else {
        prefix.trim_end_matches('.').rsplit('.').next().unwrap().to_string()
    };
    Ok(InstanceTree {
        node: node_name.to_string(),
        name,
        prefix: prefix.to_string(),
        children,
    })
}

fn sort_of(ty: Ty) -> core::Sort {
    match ty {
        Ty::Bool => core::Sort::Bool,
        Ty::Int => core::Sort::Int,
        Ty::Real => core::Sort::Real,
    }
}

fn literal_value(e: &Expr) -> Option<core::Value> {
    match e {
        Expr::Bool(b) => Some(core::Value::Bool(*b)),
        Expr::Int(n) => Some(core::Value::Int(*n)),
        Expr::Real(r, _) => Some(core::Value::Real(r.clone())),
        Expr::Un(UnOp::Neg, a) => match literal_value(a)? {
            core::Value::Int(n) => Some(core::Value::Int(-n)),
            core::Value::Real(r) => Some(core::Value::Real(-r)),
            _ => None,
        },
        _ => None,
    }
}

struct NodeCtx<'a> {
    decl: &'a NodeDecl,
    env: Env,
    sigs: BTreeMap<String, (Vec<Ty>, Vec<Ty>)>,
    prefix: String,
    tasks: Vec<Task>,
    states: Vec<(VarId, InitConstraint)>,
    pre_count: usize,
}

impl<'a> NodeCtx<'a> {
    fn var(&self, name: &str) -> VarId {
        let ty = self.env[name];
        VarId::new(format!("{}{}", self.prefix, name), sort_of(ty))
    }

    /// Translate an expression, replacing every `pre e` by a fresh
    /// unconstrained-init state updated to `e`.
    fn lower(&mut self, e: &Expr) -> Result<core::Expr, ElabError> {
        Ok(match e {
            Expr::Bool(b) => core::Expr::Const(core::Value::Bool(*b)),
            Expr::Int(n) => core::Expr::Const(core::Value::Int(*n)),
            Expr::Real(r, _) => core::Expr::Const(core::Value::Real(r.clone())),
            Expr::Var(v) => core::Expr::Var(format!("{}{}", self.prefix, v)),
            Expr::Un(op, a) => core::Expr::Un(
                match op {
                    UnOp::Neg => core::UnOp::Neg,
                    UnOp::Not => core::UnOp::Not,
                },
                Box::new(self.lower(a)?),
            ),
            Expr::Bin(op, a, b) => core::Expr::bin(
                match op {
                    BinOp::Add => core::BinOp::Add,
                    BinOp::Sub => core::BinOp::Sub,
                    BinOp::Mul => core::BinOp::Mul,
                    BinOp::Div => core::BinOp::Div,
                    BinOp::And => core::BinOp::And,
                    BinOp::Or => core::BinOp::Or,
                    BinOp::Implies => core::BinOp::Implies,
                    BinOp::Eq => core::BinOp::Eq,
                    BinOp::Le => core::BinOp::Le,
                    BinOp::Lt => core::BinOp::Lt,
                    BinOp::Ge => core::BinOp::Ge,
                    BinOp::Gt => core::BinOp::Gt,
                },
                self.lower(a)?,
                self.lower(b)?,
            ),
            Expr::Ite(c, t, f) => core::Expr::Ite(
                Box::new(self.lower(c)?),
                Box::new(self.lower(t)?),
                Box::new(self.lower(f)?),
            ),
            Expr::Pre(inner) => {
                let ty = expr_ty(&self.decl.name, &self.env, &self.sigs, inner)
                    .map_err(|e| ElabError::Type {
                        node: self.decl.name.clone(),
                        message: e.to_string(),
                    })?;
                let state = VarId::new(
                    format!("{}pre.{}", self.prefix, self.pre_count),
                    sort_of(ty),
                );
                self.pre_count += 1;
                let update = self.lower(inner)?;
                let reads: Vec<VarId> = self.read_set(&update);
                self.tasks.push(Task::assign(
                    format!("pre:{}", state.name),
                    reads,
                    state.primed(),
                    update,
                ));
                self.states.push((state.clone(), InitConstraint::Any));
                core::Expr::Var(state.name)
            }
            Expr::Arrow(..) => {
                return Err(ElabError::BadArrow {
                    node: self.decl.name.clone(),
                    text: expr_to_text(e),
                })
            }
            Expr::Call(..) => unreachable!("calls are whole equations"),
        })
    }

    /// The read variables of a lowered expression (all are prefixed).
    fn read_set(&self, e: &core::Expr) -> Vec<VarId> {
        let names = e.free_vars();
        let sorts: BTreeMap<String, core::Sort> = self
            .env
            .iter()
            .map(|(n, t)| (format!("{}{}", self.prefix, n), sort_of(*t)))
            .collect();
        names
            .into_iter()
            .map(|n| {
                let sort = sorts.get(&n).copied().unwrap_or_else(|| {
                    // Fresh `pre` states are not in the node env.
                    self.states
                        .iter()
                        .find(|(v, _)| v.name == n)
                        .map(|(v, _)| v.sort)
                        .expect("lowered expression reads a known variable")
                });
                VarId::new(n, sort)
            })
            .collect()
    }
}

/// Elaborate the instance tree into a hierarchical module with contracts.
pub fn elaborate(p: &Program, tree: &InstanceTree) -> Result<Elaboration, ElabError> {
    let (hierarchy, top_contract) = elab_instance(p, tree)?;
    let mut sub_contracts = Vec::new();
    for child in &tree.children {
        let decl = p
            .node(&child.node)
            .ok_or_else(|| ElabError::UnknownNode(child.node.clone()))?;
        let contract = node_contract(decl, &child.prefix, &child.name)?;
        sub_contracts.push((child.name.clone(), child.node.clone(), contract));
    }
    Ok(Elaboration {
        hierarchy,
        top_contract,
        sub_contracts,
    })
}

/// The contract of a node, lifted over an instance prefix.
pub fn node_contract(
    decl: &NodeDecl,
    prefix: &str,
    instance: &str,
) -> Result<Contract, ElabError> {
    let spec = decl.contract.clone().unwrap_or_default();
    let env = node_env(decl).map_err(|e| ElabError::Type {
        node: decl.name.clone(),
        message: e.to_string(),
    })?;
    let lower_prop = |e: &Expr, name: String| -> Prop {
        let lowered = lower_stateless(e, prefix);
        let vars = e
            .free_vars()
            .into_iter()
            .map(|v| VarId::new(format!("{}{}", prefix, v), sort_of(env[&v])))
            .collect();
        Prop::always(name, vars, lowered)
    };
    let assumes = spec
        .assumes
        .iter()
        .enumerate()
        .map(|(i, e)| lower_prop(e, format!("{}.assume{}", instance, i)))
        .collect();
    let guarantees = spec
        .guarantees
        .iter()
        .enumerate()
        .map(|(i, e)| lower_prop(e, format!("{}.guarantee{}", instance, i)))
        .collect();
    Ok(Contract::new(assumes, guarantees))
}

/// Translate a stateless (contract) expression over an instance prefix.
fn lower_stateless(e: &Expr, prefix: &str) -> core::Expr {
    match e {
        Expr::Bool(b) => core::Expr::Const(core::Value::Bool(*b)),
        Expr::Int(n) => core::Expr::Const(core::Value::Int(*n)),
        Expr::Real(r, _) => core::Expr::Const(core::Value::Real(r.clone())),
        Expr::Var(v) => core::Expr::Var(format!("{}{}", prefix, v)),
        Expr::Un(op, a) => core::Expr::Un(
            match op {
                UnOp::Neg => core::UnOp::Neg,
                UnOp::Not => core::UnOp::Not,
            },
            Box::new(lower_stateless(a, prefix)),
        ),
        Expr::Bin(op, a, b) => core::Expr::bin(
            match op {
                BinOp::Add => core::BinOp::Add,
                BinOp::Sub => core::BinOp::Sub,
                BinOp::Mul => core::BinOp::Mul,
                BinOp::Div => core::BinOp::Div,
                BinOp::And => core::BinOp::And,
                BinOp::Or => core::BinOp::Or,
                BinOp::Implies => core::BinOp::Implies,
                BinOp::Eq => core::BinOp::Eq,
                BinOp::Le => core::BinOp::Le,
                BinOp::Lt => core::BinOp::Lt,
                BinOp::Ge => core::BinOp::Ge,
                BinOp::Gt => core::BinOp::Gt,
            },
            lower_stateless(a, prefix),
            lower_stateless(b, prefix),
        ),
        Expr::Ite(c, t, f) => core::Expr::Ite(
            Box::new(lower_stateless(c, prefix)),
            Box::new(lower_stateless(t, prefix)),
            Box::new(lower_stateless(f, prefix)),
        ),
        Expr::Pre(_) | Expr::Arrow(..) | Expr::Call(..) => {
            unreachable!("contracts are stateless (typecheck)")
        }
    }
}

fn elab_instance(
    p: &Program,
    tree: &InstanceTree,
) -> Result<(HierarchicalModule, Contract), ElabError> {
    let decl = p
        .node(&tree.node)
        .ok_or_else(|| ElabError::UnknownNode(tree.node.clone()))?;
    let env = node_env(decl).map_err(|e| ElabError::Type {
        node: decl.name.clone(),
        message: e.to_string(),
    })?;
    let mut ctx = NodeCtx {
        decl,
        env,
        sigs: signatures(p),
        prefix: tree.prefix.clone(),
        tasks: Vec::new(),
        states: Vec::new(),
        pre_count: 0,
    };

    let mut bindings: Vec<SubmoduleBinding> = Vec::new();
    let mut child_iter = tree.children.iter();
    for eq in &decl.equations {
        match &eq.rhs {
            Expr::Call(callee, args) => {
                let child_tree = child_iter.next().expect("tree matches equations");
                debug_assert_eq!(&child_tree.node, callee);
                let child_decl = p
                    .node(callee)
                    .ok_or_else(|| ElabError::UnknownNode(callee.clone()))?;
                let (child_h, _) = elab_instance(p, child_tree)?;
                let child = hrmv_core::hierarchy::flatten(&child_h).map_err(|e| {
                    ElabError::Type {
                        node: decl.name.clone(),
                        message: e.to_string(),
                    }
                })?;
                // Wire arguments into the child inputs via copy tasks.
                for (arg, formal) in args.iter().zip(&child_decl.inputs) {
                    let target = VarId::new(
                        format!("{}{}", child_tree.prefix, formal.name),
                        sort_of(formal.ty),
                    );
                    let lowered = ctx.lower(arg)?;
                    let reads = ctx.read_set(&lowered);
                    ctx.tasks.push(Task::assign(
                        format!("in:{}", target.name),
                        reads,
                        target,
                        lowered,
                    ));
                }
                // Wire the child outputs into the result variables.
                for (result, formal) in eq.lhs.iter().zip(&child_decl.outputs) {
                    let source = VarId::new(
                        format!("{}{}", child_tree.prefix, formal.name),
                        sort_of(formal.ty),
                    );
                    let target = ctx.var(result);
                    ctx.tasks.push(Task::assign(
                        format!("out:{}", target.name),
                        vec![source.clone()],
                        target,
                        core::Expr::Var(source.name),
                    ));
                }
                // Absorb the child into the parent graph.
                let edge_ids = child.react.edges.keys().cloned().collect();
                ctx.tasks.extend(child.react.edges.values().cloned());
                ctx.states.extend(
                    child
                        .states
                        .iter()
                        .map(|s| (s.clone(), child.init[s].clone())),
                );
                bindings.push(SubmoduleBinding {
                    child,
                    edge_ids,
                });
            }
            Expr::Arrow(init, step) => {
                let x = &eq.lhs[0];
                let value = literal_value(init).ok_or_else(|| ElabError::NonConstantInit {
                    node: decl.name.clone(),
                    text: expr_to_text(&eq.rhs),
                })?;
                let Expr::Pre(inner) = &**step else {
                    return Err(ElabError::BadArrow {
                        node: decl.name.clone(),
                        text: expr_to_text(&eq.rhs),
                    });
                };
                let is_output = decl.outputs.iter().any(|o| &o.name == x);
                let xv = ctx.var(x);
                let (state, copy) = if is_output {
                    // Outputs must be written by the reaction, so the
                    // register lives in a shadow state copied out.
                    let s = VarId::new(format!("{}.s", xv.name), xv.sort);
                    (s, true)
                } else {
                    (xv.clone(), false)
                };
                let update = ctx.lower(inner)?;
                let reads = ctx.read_set(&update);
                ctx.tasks.push(Task::assign(
                    format!("upd:{}", state.name),
                    reads,
                    state.primed(),
                    update,
                ));
                if copy {
                    ctx.tasks.push(Task::assign(
                        format!("eq:{}", xv.name),
                        vec![state.clone()],
                        xv,
                        core::Expr::Var(state.name.clone()),
                    ));
                }
                ctx.states
                    .push((state, InitConstraint::Exact(value)));
            }
            rhs => {
                let x = ctx.var(&eq.lhs[0]);
                let lowered = ctx.lower(rhs)?;
                let reads = ctx.read_set(&lowered);
                ctx.tasks
                    .push(Task::assign(format!("eq:{}", x.name), reads, x, lowered));
            }
        }
    }

    let inputs: Vec<VarId> = decl.inputs.iter().map(|p| ctx.var(&p.name)).collect();
    let outputs: Vec<VarId> = decl.outputs.iter().map(|p| ctx.var(&p.name)).collect();
    let react = TaskGraph::from_tasks(ctx.tasks.clone());
    let parent = Module {
        name: tree.name.clone(),
        inputs: inputs.into_iter().filter(|v| react.vertices.contains(v)).collect(),
        outputs: outputs.into_iter().collect(),
        states: ctx.states.iter().map(|(v, _)| v.clone()).collect(),
        init: ctx.states.iter().cloned().collect(),
        react,
    };
    let contract = node_contract(decl, &tree.prefix, &tree.name)?;
    Ok((
        HierarchicalModule {
            parent,
            bindings,
        },
        contract,
    ))
}
