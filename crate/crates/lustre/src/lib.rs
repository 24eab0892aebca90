//! Frontend for the supported Lustre/CoCoSpec subset: lexing, parsing,
//! type checking, elaboration to hierarchical modules, and the
//! source-level adapter decomposition.

pub mod ast;
pub mod decompose;
pub mod elaborate;
pub mod lexer;
pub mod parser;
pub mod typecheck;
