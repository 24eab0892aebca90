//! Hypergraph-based reactive modules: the core data structures and
//! algebra of the verification toolchain.
//!
//! The layers, bottom up:
//! - [`expr`]: the total expression language with exact rational reals;
//! - [`hypergraph`]: task graphs (directed hypergraphs of variables and
//!   tasks) with validity, stratification, subgraphs and abstraction;
//! - [`module`]: reactive modules, execution semantics over finite
//!   domains, parallel composition, hiding, and the bounded refinement
//!   oracle;
//! - [`property`]: safety properties, property modules and contracts;
//! - [`hierarchy`]: hierarchical modules, adapter extraction, contract
//!   abstraction, and proof-obligation generation.

pub mod expr;
pub mod hierarchy;
pub mod hypergraph;
pub mod module;
pub mod property;
pub mod samples;
pub mod testgen;
