//! The checking engines: bounded model checking, k-induction, and the
//! two-engine portfolio that races them.
//!
//! Division of labor: BMC owns counterexamples — it negates only the goal
//! properties and every counterexample it reports has been replayed
//! against the transition relation. K-induction owns proofs — it proves
//! the goal properties together with the auxiliary invariants, and a
//! failing base check makes it return `Unknown`, never `Falsified`,
//! because the auxiliary part is not a reported property.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use hrmv_core::expr::Value;
use hrmv_core::module::{Trace, Valuation};

use crate::model::parse_values;
use crate::smt;
use crate::solver::{SatResult, Solver, SolverError};
use crate::ts::TransitionSystem;

/// The outcome of checking one obligation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// All goal properties hold; proven by induction at depth `k`.
    Valid { k: usize },
    /// A goal property is violated; `frames` is the full run (one
    /// valuation of every system variable per round) and `trace` its
    /// projection onto the subject's interface.
    Falsified { trace: Trace, frames: Vec<Valuation> },
    /// Neither engine concluded within its bounds and budget.
    Unknown { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub verdict: Verdict,
    /// Which engine produced the verdict ("bmc", "k-induction", "none").
    pub engine: String,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub solver: PathBuf,
    pub max_k: usize,
    pub bmc_bound: usize,
    pub budget: Duration,
}

impl CheckOptions {
    pub fn new(solver: impl Into<PathBuf>) -> CheckOptions {
        CheckOptions {
            solver: solver.into(),
            max_k: 10,
            bmc_bound: 20,
            budget: Duration::from_secs(600),
        }
    }
}

enum EngineOutcome {
    Conclusive(Verdict),
    Inconclusive(String),
}

fn strip_check_sat(script: &str) -> &str {
    script.strip_suffix("(check-sat)\n").unwrap_or(script)
}

/// Run bounded model checking up to `bound`. Returns `Conclusive` only
/// for a replay-validated counterexample.
fn bmc_engine(
    ts: &TransitionSystem,
    bound: usize,
    solver: &mut Solver,
    cancel: &AtomicBool,
) -> Result<EngineOutcome, SolverError> {
    solver.send(&smt::header(ts))?;
    solver.send(&smt::declare_frame(ts, 0))?;
    solver.send(&smt::assert_init(ts))?;
    solver.send(&smt::assert_flow(ts, 0))?;
    solver.send(&smt::assert_assumes(ts, 0))?;
    for k in 0..=bound {
        if cancel.load(Ordering::Relaxed) {
            return Ok(EngineOutcome::Inconclusive("cancelled".to_string()));
        }
        solver.push()?;
        solver.send(&smt::assert_not_props(ts, k))?;
        match solver.check_sat()? {
            SatResult::Sat => {
                shape_booleans(ts, k, solver)?;
                let response = solver.get_values(&smt::get_values_cmd(ts, k))?;
                let values = parse_values(&response, &smt::frame_sorts(ts, k))
                    .map_err(|e| SolverError::Unexpected(e.to_string()))?;
                let frames = frames_of(ts, k, &values);
                if !replay(ts, &frames) {
                    return Ok(EngineOutcome::Inconclusive(format!(
                        "counterexample at depth {} failed replay",
                        k
                    )));
                }
                let trace = project_trace(ts, &frames);
                return Ok(EngineOutcome::Conclusive(Verdict::Falsified {
                    trace,
                    frames,
                }));
            }
            SatResult::Unknown => {
                return Ok(EngineOutcome::Inconclusive(format!(
                    "solver answered unknown at depth {}",
                    k
                )))
            }
            SatResult::Unsat => {
                solver.pop()?;
                if k < bound {
                    solver.send(&smt::declare_frame(ts, k + 1))?;
                    solver.send(&smt::assert_step(ts, k))?;
                    solver.send(&smt::assert_flow(ts, k + 1))?;
                    solver.send(&smt::assert_assumes(ts, k + 1))?;
                }
            }
        }
    }
    Ok(EngineOutcome::Inconclusive(format!(
        "no counterexample within depth {}",
        bound
    )))
}

/// Deterministic model shaping: with the query still satisfiable, try to
/// pin every boolean variable of every frame to false, keeping each
/// constraint that stays satisfiable. Frames are shaped in order, so the
/// reported run prefers false booleans from round 0 on.
fn shape_booleans(
    ts: &TransitionSystem,
    k: usize,
    solver: &mut Solver,
) -> Result<(), SolverError> {
    for frame in 0..=k {
        for v in &ts.vars {
            if v.sort != hrmv_core::expr::Sort::Bool {
                continue;
            }
            solver.push()?;
            solver.send(&format!(
                "(assert (not |{}|))\n",
                smt::frame_name(&v.name, frame)
            ))?;
            match solver.check_sat()? {
                SatResult::Sat => {}
                _ => solver.pop()?,
            }
        }
    }
    // Leave the solver in a known-sat state for get-value.
    match solver.check_sat()? {
        SatResult::Sat => Ok(()),
        other => Err(SolverError::Unexpected(format!(
            "shaping left the query {:?}",
            other
        ))),
    }
}

/// Run k-induction for k = 1..=max_k, one fresh query pair per depth.
fn kinduction_engine(
    ts: &TransitionSystem,
    max_k: usize,
    solver: &mut Solver,
    cancel: &AtomicBool,
) -> Result<EngineOutcome, SolverError> {
    for k in 1..=max_k {
        if cancel.load(Ordering::Relaxed) {
            return Ok(EngineOutcome::Inconclusive("cancelled".to_string()));
        }
        solver.reset()?;
        solver.send(strip_check_sat(&smt::emit_base(ts, k)))?;
        match solver.check_sat()? {
            SatResult::Sat => {
                return Ok(EngineOutcome::Inconclusive(format!(
                    "induction base fails within {} rounds",
                    k
                )))
            }
            SatResult::Unknown => {
                return Ok(EngineOutcome::Inconclusive(format!(
                    "solver answered unknown on the base at k = {}",
                    k
                )))
            }
            SatResult::Unsat => {}
        }
        solver.reset()?;
        solver.send(strip_check_sat(&smt::emit_step(ts, k)))?;
        match solver.check_sat()? {
            SatResult::Unsat => return Ok(EngineOutcome::Conclusive(Verdict::Valid { k })),
            SatResult::Sat => {}
            SatResult::Unknown => {
                return Ok(EngineOutcome::Inconclusive(format!(
                    "solver answered unknown on the step at k = {}",
                    k
                )))
            }
        }
    }
    Ok(EngineOutcome::Inconclusive(format!(
        "not inductive within k = {}",
        max_k
    )))
}

/// Check the transition system with both engines racing; the first
/// conclusive verdict wins and cancels the other engine.
pub fn check(ts: &TransitionSystem, opts: &CheckOptions) -> Result<CheckReport, SolverError> {
    let start = Instant::now();
    let deadline = start + opts.budget;
    let cancel = Arc::new(AtomicBool::new(false));
    let (tx, rx) = std::sync::mpsc::channel();

    std::thread::scope(|scope| {
        {
            let tx = tx.clone();
            let cancel = Arc::clone(&cancel);
            let solver_path = opts.solver.clone();
            let bound = opts.bmc_bound;
            scope.spawn(move || {
                let outcome = with_solver(&solver_path, deadline, |s| {
                    bmc_engine(ts, bound, s, &cancel)
                });
                let _ = tx.send(("bmc", outcome));
            });
        }
        {
            let tx = tx.clone();
            let cancel = Arc::clone(&cancel);
            let solver_path = opts.solver.clone();
            let max_k = opts.max_k;
            scope.spawn(move || {
                let outcome = with_solver(&solver_path, deadline, |s| {
                    kinduction_engine(ts, max_k, s, &cancel)
                });
                let _ = tx.send(("k-induction", outcome));
            });
        }
        drop(tx);

        let mut reasons: Vec<String> = Vec::new();
        let mut winner: Option<(&str, Verdict)> = None;
        for (label, outcome) in rx {
            match outcome {
                Ok(EngineOutcome::Conclusive(v)) => {
                    cancel.store(true, Ordering::Relaxed);
                    winner = Some((label, v));
                    break;
                }
                Ok(EngineOutcome::Inconclusive(reason)) => {
                    reasons.push(format!("{}: {}", label, reason))
                }
                Err(SolverError::Timeout) => reasons.push(format!("{}: budget exhausted", label)),
                Err(e) => return Err(e),
            }
        }
        cancel.store(true, Ordering::Relaxed);
        let report = match winner {
            Some((engine, verdict)) => CheckReport {
                verdict,
                engine: engine.to_string(),
                elapsed: start.elapsed(),
            },
            None => CheckReport {
                verdict: Verdict::Unknown {
                    reason: reasons.join("; "),
                },
                engine: "none".to_string(),
                elapsed: start.elapsed(),
            },
        };
        Ok(report)
    })
}

fn with_solver(
    solver_path: &Path,
    deadline: Instant,
    run: impl FnOnce(&mut Solver) -> Result<EngineOutcome, SolverError>,
) -> Result<EngineOutcome, SolverError> {
    let mut solver = Solver::spawn(solver_path)?;
    solver.set_deadline(Some(deadline));
    run(&mut solver)
}

/// Group a flat model into per-frame valuations.
fn frames_of(
    ts: &TransitionSystem,
    k: usize,
    values: &BTreeMap<String, Value>,
) -> Vec<Valuation> {
    (0..=k)
        .map(|i| {
            smt::frame_vars(ts, i)
                .into_iter()
                .filter_map(|(v, fname)| values.get(&fname).map(|val| (v, val.clone())))
                .collect()
        })
        .collect()
}

/// Validate a run against the transition system by direct evaluation:
/// initial constraints at round 0, every transition conjunct between
/// consecutive rounds, every assumption at every round, and a violated
/// goal property at the last round.
pub fn replay(ts: &TransitionSystem, frames: &[Valuation]) -> bool {
    let Some(first) = frames.first() else {
        return false;
    };
    for (v, value) in &ts.init {
        if first.get(v) != Some(value) {
            return false;
        }
    }
    let env_of = |frame: &Valuation| -> BTreeMap<String, Value> {
        frame
            .iter()
            .map(|(v, value)| (v.name.clone(), value.clone()))
            .collect()
    };
    for (i, frame) in frames.iter().enumerate() {
        let env = env_of(frame);
        for (_, e) in ts.flow.iter().chain(ts.assumes.iter()) {
            if e.eval(&env) != Ok(Value::Bool(true)) {
                return false;
            }
        }
        if i + 1 < frames.len() {
            let mut step_env = env.clone();
            for (v, value) in &frames[i + 1] {
                step_env.insert(format!("{}'", v.name), value.clone());
            }
            for (_, e) in &ts.step {
                if e.eval(&step_env) != Ok(Value::Bool(true)) {
                    return false;
                }
            }
        }
    }
    let last_env = env_of(frames.last().unwrap());
    ts.props_conj().eval(&last_env) == Ok(Value::Bool(false))
}

/// Project full frames onto the subject's interface.
fn project_trace(ts: &TransitionSystem, frames: &[Valuation]) -> Trace {
    frames
        .iter()
        .map(|frame| {
            let inputs = frame
                .iter()
                .filter(|(v, _)| ts.inputs.contains(v))
                .map(|(v, val)| (v.clone(), val.clone()))
                .collect();
            let outputs = frame
                .iter()
                .filter(|(v, _)| ts.outputs.contains(v))
                .map(|(v, val)| (v.clone(), val.clone()))
                .collect();
            (inputs, outputs)
        })
        .collect()
}
