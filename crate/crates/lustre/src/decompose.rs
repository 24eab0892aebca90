//! Source-to-source decomposition: rewrite every node that calls other
//! nodes into its adapter node.
//!
//! Call results are promoted to inputs and call arguments to outputs
//! (the adapter interface), with `.` replaced by `_` in the promoted
//! names to stay within identifier rules. The adapter contract assumes
//! the callee guarantees over the new inputs and guarantees the callee
//! assumes over the new outputs; leaf nodes pass through unchanged.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ast::*;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("node `{node}`: call of unknown node `{callee}`")]
    UnknownCallee { node: String, callee: String },
    #[error("node `{node}`: promoted parameter `{name}` clashes with an existing variable")]
    NameClash { node: String, name: String },
}

/// Decompose all hierarchical nodes of the program. `main` only selects
/// the entry point recorded by callers; every node with calls is
/// rewritten so the output is self-contained.
pub fn decompose_program(p: &Program, _main: &str) -> Result<Program, DecomposeError> {
    let mut counters: BTreeMap<String, usize> = BTreeMap::new();
    let mut nodes = Vec::new();
    for node in &p.nodes {
        nodes.push(decompose_node(p, node, &mut counters)?);
    }
    Ok(Program { nodes })
}

fn decompose_node(
    p: &Program,
    node: &NodeDecl,
    counters: &mut BTreeMap<String, usize>,
) -> Result<NodeDecl, DecomposeError> {
    if !node
        .equations
        .iter()
        .any(|eq| matches!(eq.rhs, Expr::Call(..)))
    {
        return Ok(node.clone());
    }

    let mut taken: Vec<String> = node
        .inputs
        .iter()
        .chain(&node.outputs)
        .chain(&node.locals)
        .map(|q| q.name.clone())
        .collect();
    let mut inputs = node.inputs.clone();
    let mut outputs = node.outputs.clone();
    let locals = node.locals.clone();
    let mut equations = Vec::new();
    let mut spec = node.contract.clone().unwrap_or_default();

    for eq in &node.equations {
        let Expr::Call(callee, args) = &eq.rhs else {
            equations.push(eq.clone());
            continue;
        };
        let decl = p.node(callee).ok_or_else(|| DecomposeError::UnknownCallee {
            node: node.name.clone(),
            callee: callee.clone(),
        })?;
        let k = counters.entry(callee.clone()).or_insert(0);
        let inst = format!("{}{}", callee, *k);
        *k += 1;

        let promote = |formal: &Param,
                           taken: &mut Vec<String>|
         -> Result<Param, DecomposeError> {
            let name = format!("{}_{}", inst, formal.name);
            if taken.contains(&name) {
                return Err(DecomposeError::NameClash {
                    node: node.name.clone(),
                    name,
                });
            }
            taken.push(name.clone());
            Ok(Param {
                name,
                ty: formal.ty,
            })
        };

        // Arguments become outputs defined by the argument expressions;
        // results become inputs copied into the former result variables.
        let mut in_map = BTreeMap::new();
        for (formal, arg) in decl.inputs.iter().zip(args) {
            let param = promote(formal, &mut taken)?;
            equations.push(Equation {
                lhs: vec![param.name.clone()],
                rhs: arg.clone(),
            });
            in_map.insert(formal.name.clone(), Expr::Var(param.name.clone()));
            outputs.push(param);
        }
        let mut out_map = BTreeMap::new();
        for (formal, result) in decl.outputs.iter().zip(&eq.lhs) {
            let param = promote(formal, &mut taken)?;
            equations.push(Equation {
                lhs: vec![result.clone()],
                rhs: Expr::Var(param.name.clone()),
            });
            out_map.insert(formal.name.clone(), Expr::Var(param.name.clone()));
            inputs.push(param);
        }

        let sub = decl.contract.clone().unwrap_or_default();
        spec.assumes
            .extend(sub.guarantees.iter().map(|g| g.subst(&out_map)));
        spec.guarantees
            .extend(sub.assumes.iter().map(|a| a.subst(&in_map)));
    }

    Ok(NodeDecl {
        name: node.name.clone(),
        inputs,
        outputs,
        contract: Some(spec),
        locals,
        equations,
    })
}
