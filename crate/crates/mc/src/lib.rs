//! SMT-backed checking of assume-guarantee obligations: transition-system
//! encoding, deterministic SMT-LIB emission, an external-solver driver,
//! and a portfolio of bounded model checking and k-induction.

pub mod engine;
pub mod model;
pub mod smt;
pub mod solver;
pub mod ts;

pub use engine::{check, replay, CheckOptions, CheckReport, Verdict};
pub use ts::{encode, TransitionSystem};
