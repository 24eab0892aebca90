//! Reactive modules and their finite-domain execution semantics: stepping,
//! bounded trace enumeration, parallel composition, hiding, and the
//! bounded implementation-relation oracle.
//!
//! The oracle in this module is deliberately brute-force: it enumerates
//! valuations over small finite domains and is the ground truth the
//! symbolic engine is tested against. Reals never participate in
//! nondeterministic choice here; they only flow through functional
//! assignments (exactly) or are drawn from a fixed finite sample list when
//! they appear as module inputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::BigRational;
use thiserror::Error;

use crate::expr::{EvalError, Expr, Sort, Value};
use crate::hypergraph::{
    self, union, validate_tg, HgError, RelationSpec, Task, TaskGraph, TgViolation,
    ValidationReport, VarId,
};

/// A valuation: variable -> value.
pub type Valuation = BTreeMap<VarId, Value>;

/// One constraint on the initial value of a state variable. Initial
/// conditions are kept in product form (one constraint per variable) so
/// that projecting them onto a state subset is syntactic filtering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitConstraint {
    Exact(Value),
    Any,
}

/// A reactive module (I, O, S, Init, React).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Module {
    pub name: String,
    pub inputs: BTreeSet<VarId>,
    pub outputs: BTreeSet<VarId>,
    pub states: BTreeSet<VarId>,
    pub init: BTreeMap<VarId, InitConstraint>,
    pub react: TaskGraph,
}

/// A bounded trace: per round, the input valuation and output valuation.
pub type Trace = Vec<(Valuation, Valuation)>;

/// Finite domains for the brute-force oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainBounds {
    pub int_min: i64,
    pub int_max: i64,
    /// Sample points used when a real variable must be enumerated (module
    /// inputs or unconstrained initial states). Reals are never
    /// enumerated inside nondeterministic task relations.
    pub real_samples: Vec<BigRational>,
    /// Cap on enumerated execution branches before giving up.
    pub max_paths: usize,
}

impl Default for DomainBounds {
    fn default() -> Self {
        let half = BigRational::new(1.into(), 2.into());
        DomainBounds {
            int_min: -4,
            int_max: 4,
            real_samples: vec![
                -BigRational::from_integer(1.into()),
                -half.clone(),
                BigRational::from_integer(0.into()),
                half,
                BigRational::from_integer(1.into()),
            ],
            max_paths: 500_000,
        }
    }
}

impl DomainBounds {
    fn enumerate(&self, sort: Sort) -> Result<Vec<Value>, StepError> {
        match sort {
            Sort::Unit => Ok(vec![Value::Unit]),
            Sort::Bool => Ok(vec![Value::Bool(false), Value::Bool(true)]),
            Sort::Int => Ok((self.int_min..=self.int_max).map(Value::Int).collect()),
            Sort::Real => Ok(self.real_samples.iter().cloned().map(Value::Real).collect()),
        }
    }

    fn in_range(&self, v: &Value) -> bool {
        match v {
            Value::Int(n) => *n >= self.int_min && *n <= self.int_max,
            _ => true,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error("evaluation failed in task {task}: {source}")]
    Eval { task: String, source: EvalError },
    #[error("task {task} chooses a real-sorted variable nondeterministically")]
    UnboundedNondet { task: String },
    #[error("state/input valuation is missing variable {0}")]
    MissingVariable(String),
    #[error("enumeration exceeded the configured cap of {0} branches")]
    Explosion(usize),
    #[error("module reaction graph is cyclic: {0}")]
    CyclicReact(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComposeError {
    #[error("modules share output variables: {}", .0.join(", "))]
    IncompatibleOutputs(Vec<String>),
    #[error("modules share state variables: {}", .0.join(", "))]
    IncompatibleStates(Vec<String>),
    #[error("composed reaction graph is cyclic through [{}]", .0.join(", "))]
    CyclicComposition(Vec<String>),
    #[error("graph union failed: {0}")]
    Union(#[from] HgError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModuleError {
    #[error("{0} is not an output of the module")]
    NotAnOutput(String),
    #[error("static implementation conditions fail:\n{0}")]
    StaticCheck(String),
    #[error(transparent)]
    Step(#[from] StepError),
}

/// Violations of the module well-formedness conditions, reported in the
/// same style as the task-graph conditions.
pub fn validate_module(m: &Module) -> ValidationReport {
    let mut report = validate_tg(&m.react);
    let mut add = |detail: String| {
        report.violations.push(TgViolation::InOutMismatch {
            task: format!("module {}", m.name),
            detail,
        })
    };
    for v in m.inputs.intersection(&m.outputs) {
        add(format!("variable {} is both input and output", v));
    }
    for v in m.inputs.intersection(&m.states) {
        add(format!("variable {} is both input and state", v));
    }
    for v in m.outputs.intersection(&m.states) {
        add(format!("variable {} is both output and state", v));
    }
    let written: BTreeSet<&VarId> = m
        .react
        .edges
        .values()
        .flat_map(|t| t.writes.iter())
        .collect();
    let read: BTreeSet<&VarId> = m.react.edges.values().flat_map(|t| t.reads.iter()).collect();
    for s in &m.states {
        if written.contains(s) {
            add(format!("state {} is written within a round", s));
        }
        let sp = s.primed();
        if m.react.vertices.contains(&sp) {
            if !written.contains(&sp) {
                add(format!("primed state {} is never written", sp));
            }
            if read.contains(&sp) {
                add(format!("primed state {} is read within a round", sp));
            }
        }
        if !m.init.contains_key(s) {
            add(format!("state {} has no initial constraint", s));
        }
    }
    for s in m.init.keys() {
        if !m.states.contains(s) {
            add(format!("initial constraint on non-state {}", s));
        }
    }
    for i in &m.inputs {
        if written.contains(i) {
            add(format!("input {} is written by the module", i));
        }
    }
    for o in &m.outputs {
        if m.react.vertices.contains(o) && !written.contains(o) {
            add(format!("output {} is a vertex but never written", o));
        }
    }
    report
}

/// The empty module: no variables, a single stuttering behavior.
pub fn top_module() -> Module {
    Module {
        name: "top".into(),
        inputs: BTreeSet::new(),
        outputs: BTreeSet::new(),
        states: BTreeSet::new(),
        init: BTreeMap::new(),
        react: TaskGraph::default(),
    }
}

/// One run of the reaction relation: all (output valuation, next-state
/// valuation) pairs reachable from the given state and input under the
/// bounds. Branches whose integer values leave the bounded range are
/// discarded (the oracle compares only in-range behavior).
pub fn step(
    m: &Module,
    state: &Valuation,
    input: &Valuation,
    bounds: &DomainBounds,
) -> Result<BTreeSet<(Valuation, Valuation)>, StepError> {
    for s in &m.states {
        if !state.contains_key(s) {
            return Err(StepError::MissingVariable(s.name.clone()));
        }
    }
    for i in &m.inputs {
        if !input.contains_key(i) {
            return Err(StepError::MissingVariable(i.name.clone()));
        }
    }
    let tasks = m
        .react
        .topo_tasks()
        .map_err(|e| StepError::CyclicReact(e.to_string()))?;
    let mut env: BTreeMap<String, Value> = BTreeMap::new();
    for (k, v) in state.iter().chain(input.iter()) {
        env.insert(k.name.clone(), v.clone());
    }
    let mut results = BTreeSet::new();
    let mut budget = bounds.max_paths;
    step_rec(m, &tasks, 0, &mut env, bounds, &mut results, &mut budget)?;
    Ok(results)
}

fn step_rec(
    m: &Module,
    tasks: &[&Task],
    idx: usize,
    env: &mut BTreeMap<String, Value>,
    bounds: &DomainBounds,
    results: &mut BTreeSet<(Valuation, Valuation)>,
    budget: &mut usize,
) -> Result<(), StepError> {
    if *budget == 0 {
        return Err(StepError::Explosion(bounds.max_paths));
    }
    if idx == tasks.len() {
        *budget -= 1;
        let mut out = Valuation::new();
        for o in &m.outputs {
            if let Some(v) = env.get(&o.name) {
                out.insert(o.clone(), v.clone());
            }
        }
        let mut next = Valuation::new();
        for s in &m.states {
            let sp = s.primed();
            match env.get(&sp.name) {
                Some(v) => {
                    next.insert(s.clone(), v.clone());
                }
                None => {
                    // No task writes s': the state is simply absent from
                    // the reaction graph and keeps its current value.
                    if let Some(v) = env.get(&s.name) {
                        next.insert(s.clone(), v.clone());
                    }
                }
            }
        }
        results.insert((out, next));
        return Ok(());
    }
    let task = tasks[idx];
    match &task.relation {
        RelationSpec::FunctionalAssign(assigns) => {
            let mut written = Vec::new();
            let mut in_range = true;
            for (w, e) in assigns {
                let v = e.eval(env).map_err(|source| StepError::Eval {
                    task: task.id.clone(),
                    source,
                })?;
                if !bounds.in_range(&v) {
                    in_range = false;
                }
                env.insert(w.name.clone(), v);
                written.push(w.name.clone());
            }
            if in_range {
                step_rec(m, tasks, idx + 1, env, bounds, results, budget)?;
            }
            for w in written {
                env.remove(&w);
            }
        }
        RelationSpec::NondetChoose(pred) => {
            enumerate_writes(m, tasks, idx, env, bounds, results, budget, task, pred)?;
        }
        RelationSpec::Opaque {
            assume,
            guarantee,
            hist,
            ..
        } => {
            // Writes are unconstrained unless the assumption has held
            // historically (and holds now), in which case the guarantee
            // filters them.
            let mut cond = assume.clone();
            if let Some(h) = hist {
                cond = Expr::and(Expr::var(h.name.clone()), cond);
            }
            let pred = Expr::implies(cond, guarantee.clone());
            enumerate_writes(m, tasks, idx, env, bounds, results, budget, task, &pred)?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn enumerate_writes(
    m: &Module,
    tasks: &[&Task],
    idx: usize,
    env: &mut BTreeMap<String, Value>,
    bounds: &DomainBounds,
    results: &mut BTreeSet<(Valuation, Valuation)>,
    budget: &mut usize,
    task: &Task,
    pred: &Expr,
) -> Result<(), StepError> {
    for w in &task.writes {
        if w.sort == Sort::Real {
            return Err(StepError::UnboundedNondet {
                task: task.id.clone(),
            });
        }
    }
    let domains: Vec<Vec<Value>> = task
        .writes
        .iter()
        .map(|w| bounds.enumerate(w.sort))
        .collect::<Result<_, _>>()?;
    let mut combo = vec![0usize; domains.len()];
    loop {
        for (k, w) in task.writes.iter().enumerate() {
            env.insert(w.name.clone(), domains[k][combo[k]].clone());
        }
        let ok = pred
            .eval(env)
            .map_err(|source| StepError::Eval {
                task: task.id.clone(),
                source,
            })?
            .as_bool()
            .unwrap_or(false);
        if ok {
            step_rec(m, tasks, idx + 1, env, bounds, results, budget)?;
        }
        // Advance the odometer.
        let mut pos = 0;
        loop {
            if pos == domains.len() {
                for w in &task.writes {
                    env.remove(&w.name);
                }
                return Ok(());
            }
            combo[pos] += 1;
            if combo[pos] < domains[pos].len() {
                break;
            }
            combo[pos] = 0;
            pos += 1;
        }
        if domains.is_empty() {
            for w in &task.writes {
                env.remove(&w.name);
            }
            return Ok(());
        }
    }
}

/// All initial state valuations admitted by the bounds.
pub fn init_states(m: &Module, bounds: &DomainBounds) -> Result<Vec<Valuation>, StepError> {
    let mut out = vec![Valuation::new()];
    for s in &m.states {
        let choices = match m.init.get(s) {
            Some(InitConstraint::Exact(v)) => vec![v.clone()],
            Some(InitConstraint::Any) | None => bounds.enumerate(s.sort)?,
        };
        let mut next = Vec::new();
        for base in &out {
            for c in &choices {
                let mut b = base.clone();
                b.insert(s.clone(), c.clone());
                next.push(b);
            }
        }
        out = next;
    }
    Ok(out)
}

/// All traces of length `depth` starting from some initial state.
pub fn traces(m: &Module, depth: usize, bounds: &DomainBounds) -> Result<BTreeSet<Trace>, StepError> {
    let mut out = BTreeSet::new();
    if depth == 0 {
        out.insert(Vec::new());
        return Ok(out);
    }
    let input_domains: Vec<(VarId, Vec<Value>)> = m
        .inputs
        .iter()
        .map(|i| bounds.enumerate(i.sort).map(|d| (i.clone(), d)))
        .collect::<Result<_, _>>()?;
    let mut budget = bounds.max_paths;
    for init in init_states(m, bounds)? {
        let mut prefix = Vec::new();
        traces_rec(
            m,
            &init,
            depth,
            &input_domains,
            bounds,
            &mut prefix,
            &mut out,
            &mut budget,
        )?;
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn traces_rec(
    m: &Module,
    state: &Valuation,
    remaining: usize,
    input_domains: &[(VarId, Vec<Value>)],
    bounds: &DomainBounds,
    prefix: &mut Trace,
    out: &mut BTreeSet<Trace>,
    budget: &mut usize,
) -> Result<(), StepError> {
    if remaining == 0 {
        out.insert(prefix.clone());
        return Ok(());
    }
    if *budget == 0 {
        return Err(StepError::Explosion(bounds.max_paths));
    }
    *budget -= 1;
    let mut combo = vec![0usize; input_domains.len()];
    loop {
        let mut input = Valuation::new();
        for (k, (var, dom)) in input_domains.iter().enumerate() {
            input.insert(var.clone(), dom[combo[k]].clone());
        }
        for (o, next) in step(m, state, &input, bounds)? {
            prefix.push((input.clone(), o));
            traces_rec(m, &next, remaining - 1, input_domains, bounds, prefix, out, budget)?;
            prefix.pop();
        }
        let mut pos = 0;
        loop {
            if pos == input_domains.len() {
                return Ok(());
            }
            combo[pos] += 1;
            if combo[pos] < input_domains[pos].1.len() {
                break;
            }
            combo[pos] = 0;
            pos += 1;
        }
        if input_domains.is_empty() {
            return Ok(());
        }
    }
}

/// Does the module admit the given trace? Decided by state-set
/// simulation: we track every state the module could be in after each
/// round consistent with the observed inputs and outputs.
pub fn admits_trace(
    m: &Module,
    rounds: &[(Valuation, Valuation)],
    bounds: &DomainBounds,
) -> Result<bool, StepError> {
    let mut current: BTreeSet<Valuation> = init_states(m, bounds)?.into_iter().collect();
    for (input, output) in rounds {
        let mut next: BTreeSet<Valuation> = BTreeSet::new();
        let input: Valuation = input
            .iter()
            .filter(|(k, _)| m.inputs.contains(k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let expected: Valuation = output
            .iter()
            .filter(|(k, _)| m.outputs.contains(k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        for s in &current {
            for (o, n) in step(m, s, &input, bounds)? {
                if o == expected {
                    next.insert(n);
                }
            }
        }
        if next.is_empty() {
            return Ok(false);
        }
        current = next;
    }
    Ok(true)
}

/// Parallel composition of two compatible modules.
pub fn parallel_compose(m1: &Module, m2: &Module) -> Result<Module, ComposeError> {
    let shared_out: Vec<String> = m1
        .outputs
        .intersection(&m2.outputs)
        .map(|v| v.name.clone())
        .collect();
    if !shared_out.is_empty() {
        return Err(ComposeError::IncompatibleOutputs(shared_out));
    }
    let shared_state: Vec<String> = m1
        .states
        .intersection(&m2.states)
        .map(|v| v.name.clone())
        .collect();
    if !shared_state.is_empty() {
        return Err(ComposeError::IncompatibleStates(shared_state));
    }
    let (react, acyclic) = union(&m1.react, &m2.react)?;
    if !acyclic {
        let cycle = match hypergraph::longest_path_levels(&react) {
            Err(HgError::Cyclic(ids)) => ids,
            _ => Vec::new(),
        };
        return Err(ComposeError::CyclicComposition(cycle));
    }
    let outputs: BTreeSet<VarId> = m1.outputs.union(&m2.outputs).cloned().collect();
    let inputs: BTreeSet<VarId> = m1
        .inputs
        .union(&m2.inputs)
        .filter(|v| !outputs.contains(*v))
        .cloned()
        .collect();
    let states: BTreeSet<VarId> = m1.states.union(&m2.states).cloned().collect();
    let mut init = m1.init.clone();
    init.extend(m2.init.clone());
    Ok(Module {
        name: format!("({}||{})", m1.name, m2.name),
        inputs,
        outputs,
        states,
        init,
        react,
    })
}

/// Compose a list of modules left to right.
pub fn compose_all(ms: &[Module]) -> Result<Module, ComposeError> {
    let mut acc = top_module();
    for m in ms {
        acc = parallel_compose(&acc, m)?;
    }
    Ok(acc)
}

/// Hiding: remove variables from the output interface. The hidden
/// vertices stay in the reaction graph as locals; behavior is unchanged.
pub fn hide(m: &Module, hidden: &BTreeSet<VarId>) -> Result<Module, ModuleError> {
    for h in hidden {
        if !m.outputs.contains(h) {
            return Err(ModuleError::NotAnOutput(h.name.clone()));
        }
    }
    let mut out = m.clone();
    out.outputs = m.outputs.difference(hidden).cloned().collect();
    out.name = format!("{}\\{{..}}", m.name);
    Ok(out)
}

/// The static implementation conditions: (i) output containment,
/// (ii) input containment, (iii) await-dependency preservation — every
/// combinational dependency present in the abstract module must also be
/// present in the concrete one.
pub fn check_static_impl(m1: &Module, m2: &Module) -> ValidationReport {
    let mut violations = Vec::new();
    for o in &m2.outputs {
        if !m1.outputs.contains(o) {
            violations.push(TgViolation::InOutMismatch {
                task: "static(i)".into(),
                detail: format!("output {} of the abstract module is not an output of the concrete one", o),
            });
        }
    }
    let io1: BTreeSet<&VarId> = m1.inputs.union(&m1.outputs).collect();
    for i in &m2.inputs {
        if !io1.contains(i) {
            violations.push(TgViolation::InOutMismatch {
                task: "static(ii)".into(),
                detail: format!("input {} of the abstract module is not visible on the concrete one", i),
            });
        }
    }
    let vars2: BTreeSet<VarId> = m2.inputs.union(&m2.outputs).cloned().collect();
    for y in &m2.outputs {
        for x in &vars2 {
            if x == y {
                continue;
            }
            let dep2 = hypergraph::await_dep(&m2.react, x, y).unwrap_or(false);
            if dep2 {
                let dep1 = hypergraph::await_dep(&m1.react, x, y).unwrap_or(false);
                if !dep1 {
                    violations.push(TgViolation::InOutMismatch {
                        task: "static(iii)".into(),
                        detail: format!(
                            "await dependency {} -> {} of the abstract module is absent from the concrete one",
                            x, y
                        ),
                    });
                }
            }
        }
    }
    ValidationReport { violations }
}

/// Bounded refinement oracle: every depth-bounded trace of `m1` projects
/// onto a trace of `m2`. Sound only up to the bound and the domain caps.
pub fn bounded_refines(
    m1: &Module,
    m2: &Module,
    depth: usize,
    bounds: &DomainBounds,
) -> Result<bool, ModuleError> {
    let static_report = check_static_impl(m1, m2);
    if !static_report.is_valid() {
        return Err(ModuleError::StaticCheck(static_report.to_string()));
    }
    for t in traces(m1, depth, bounds)? {
        let projected: Trace = t
            .iter()
            .map(|(i, o)| {
                let mut all = i.clone();
                all.extend(o.clone());
                let pi: Valuation = all
                    .iter()
                    .filter(|(k, _)| m2.inputs.contains(*k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                let po: Valuation = all
                    .iter()
                    .filter(|(k, _)| m2.outputs.contains(*k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                (pi, po)
            })
            .collect();
        if !admits_trace(m2, &projected, bounds)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Render a trace in the line-oriented text format: one round per line,
/// `var=value` pairs sorted by name.
pub fn trace_to_text(t: &Trace) -> String {
    let mut out = String::new();
    for (i, o) in t {
        let mut pairs: Vec<(String, String)> = i
            .iter()
            .chain(o.iter())
            .map(|(k, v)| (k.name.clone(), v.to_string()))
            .collect();
        pairs.sort();
        let line: Vec<String> = pairs.into_iter().map(|(k, v)| format!("{}={}", k, v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |s: &BTreeSet<VarId>| {
            s.iter().map(|v| v.name.clone()).collect::<Vec<_>>().join(", ")
        };
        writeln!(f, "module {}", self.name)?;
        writeln!(f, "  inputs:  {}", names(&self.inputs))?;
        writeln!(f, "  outputs: {}", names(&self.outputs))?;
        writeln!(f, "  states:  {}", names(&self.states))?;
        writeln!(f, "  tasks:   {}", self.react.edges.len())
    }
}

/// Convenience constructor used by tests and the elaborator.
pub fn module(
    name: &str,
    inputs: Vec<VarId>,
    outputs: Vec<VarId>,
    states: Vec<(VarId, InitConstraint)>,
    tasks: Vec<Task>,
) -> Module {
    let react = TaskGraph::from_tasks(tasks);
    let init: BTreeMap<VarId, InitConstraint> =
        states.iter().map(|(v, c)| (v.clone(), c.clone())).collect();
    let states: BTreeSet<VarId> = states.into_iter().map(|(v, _)| v).collect();
    Module {
        name: name.into(),
        inputs: inputs.into_iter().collect(),
        outputs: outputs.into_iter().collect(),
        states,
        init,
        react,
    }
}
