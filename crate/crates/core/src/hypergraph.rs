//! Directed hypergraphs of variables (vertices) and tasks (hyperedges),
//! with the task-graph well-formedness conditions, longest-path
//! stratification, await-dependency queries, subgraph extraction,
//! abstraction and union.
//!
//! A *task graph* is a directed hypergraph that is (i) acyclic, (ii) has
//! no isolated vertex, (iii) gives every vertex at most one writer, and
//! (iv) keeps each task's declared read/write sets consistent with its
//! relation. `abstraction` and `union` may produce hypergraphs that are
//! not task graphs (in particular, cyclic ones); callers re-validate
//! where it matters.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::expr::{Expr, Sort};

/// A variable: a globally unique qualified name plus its sort.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId {
    pub name: String,
    pub sort: Sort,
}

impl VarId {
    pub fn new(name: impl Into<String>, sort: Sort) -> VarId {
        VarId {
            name: name.into(),
            sort,
        }
    }

    /// The primed (next-round) version of a state variable.
    pub fn primed(&self) -> VarId {
        VarId {
            name: format!("{}'", self.name),
            sort: self.sort,
        }
    }

    pub fn is_primed(&self) -> bool {
        self.name.ends_with('\'')
    }

    /// Inverse of [`VarId::primed`]; returns `None` on unprimed names.
    pub fn unprimed(&self) -> Option<VarId> {
        self.name.strip_suffix('\'').map(|n| VarId {
            name: n.to_string(),
            sort: self.sort,
        })
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.sort)
    }
}

/// How a task relates its read valuations to its write valuations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RelationSpec {
    /// One defining expression per write variable, over the reads.
    FunctionalAssign(Vec<(VarId, Expr)>),
    /// A predicate over reads and writes, total in the reads.
    NondetChoose(Expr),
    /// A named interface relation used by abstraction. When lowered, the
    /// write side is unconstrained unless the assumption has held at every
    /// round so far (tracked by the `hist` state bit, when present).
    Opaque {
        name: String,
        assume: Expr,
        guarantee: Expr,
        hist: Option<VarId>,
    },
}

/// A hyperedge: a total relation between a read set and a write set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub id: String,
    pub reads: Vec<VarId>,
    pub writes: Vec<VarId>,
    pub relation: RelationSpec,
}

impl Task {
    pub fn assign(id: impl Into<String>, reads: Vec<VarId>, write: VarId, expr: Expr) -> Task {
        Task {
            id: id.into(),
            reads,
            writes: vec![write.clone()],
            relation: RelationSpec::FunctionalAssign(vec![(write, expr)]),
        }
    }

    pub fn choose(id: impl Into<String>, reads: Vec<VarId>, writes: Vec<VarId>, pred: Expr) -> Task {
        Task {
            id: id.into(),
            reads,
            writes,
            relation: RelationSpec::NondetChoose(pred),
        }
    }
}

/// A directed hypergraph of variables and tasks. Field access is public;
/// the structure is treated as immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TaskGraph {
    pub vertices: BTreeSet<VarId>,
    pub edges: BTreeMap<String, Task>,
}

impl TaskGraph {
    pub fn new(vertices: impl IntoIterator<Item = VarId>, tasks: impl IntoIterator<Item = Task>) -> TaskGraph {
        TaskGraph {
            vertices: vertices.into_iter().collect(),
            edges: tasks.into_iter().map(|t| (t.id.clone(), t)).collect(),
        }
    }

    /// Build a graph whose vertex set is exactly the vertices incident to
    /// the given tasks.
    pub fn from_tasks(tasks: impl IntoIterator<Item = Task>) -> TaskGraph {
        let edges: BTreeMap<String, Task> = tasks.into_iter().map(|t| (t.id.clone(), t)).collect();
        let mut vertices = BTreeSet::new();
        for t in edges.values() {
            vertices.extend(t.reads.iter().cloned());
            vertices.extend(t.writes.iter().cloned());
        }
        TaskGraph { vertices, edges }
    }

    /// The task writing the given vertex, if any.
    pub fn writer_of(&self, v: &VarId) -> Option<&Task> {
        self.edges.values().find(|t| t.writes.contains(v))
    }

    /// Vertices with no incoming edge.
    pub fn initial_vertices(&self) -> BTreeSet<VarId> {
        let written: BTreeSet<&VarId> = self.edges.values().flat_map(|t| t.writes.iter()).collect();
        self.vertices
            .iter()
            .filter(|v| !written.contains(v))
            .cloned()
            .collect()
    }

    /// Vertices with no outgoing edge.
    pub fn terminal_vertices(&self) -> BTreeSet<VarId> {
        let read: BTreeSet<&VarId> = self.edges.values().flat_map(|t| t.reads.iter()).collect();
        self.vertices
            .iter()
            .filter(|v| !read.contains(v))
            .cloned()
            .collect()
    }

    pub fn sorts(&self) -> BTreeMap<String, Sort> {
        self.vertices
            .iter()
            .map(|v| (v.name.clone(), v.sort))
            .collect()
    }

    /// Tasks in a topological order (by longest-path level of their
    /// writes, ties broken by id). Errors on cyclic graphs.
    pub fn topo_tasks(&self) -> Result<Vec<&Task>, HgError> {
        let levels = longest_path_levels(self)?;
        let mut level_of: BTreeMap<&VarId, usize> = BTreeMap::new();
        for (i, group) in levels.iter().enumerate() {
            for v in group {
                level_of.insert(v, i);
            }
        }
        let mut tasks: Vec<&Task> = self.edges.values().collect();
        tasks.sort_by_key(|t| {
            let lvl = t
                .writes
                .iter()
                .map(|w| level_of.get(w).copied().unwrap_or(0))
                .min()
                .unwrap_or(0);
            (lvl, t.id.clone())
        });
        Ok(tasks)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HgError {
    #[error("graph contains a cycle through tasks [{}]", .0.join(", "))]
    Cyclic(Vec<String>),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("edge set is not a subset of the graph: missing `{0}`")]
    NotASubset(String),
    #[error("interface mismatch: {0}")]
    InterfaceMismatch(String),
    #[error("vertex `{0}` is written by edges of both operands")]
    WriteConflict(String),
    #[error("edge id `{0}` occurs in both operands with different content")]
    DuplicateEdgeId(String),
}

/// One violated task-graph condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TgViolation {
    /// (i) the graph has a cycle (witness: task ids on the cycle).
    Cycle(Vec<String>),
    /// (ii) a vertex occurs in no task.
    IsolatedVertex(VarId),
    /// (iii) a vertex is written by more than one task.
    MultipleWriters(VarId, Vec<String>),
    /// (iv) a task's declared reads/writes disagree with the graph or
    /// with its relation.
    InOutMismatch { task: String, detail: String },
}

impl fmt::Display for TgViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TgViolation::Cycle(ids) => write!(f, "(i) cycle through [{}]", ids.join(", ")),
            TgViolation::IsolatedVertex(v) => write!(f, "(ii) isolated vertex {}", v),
            TgViolation::MultipleWriters(v, ids) => {
                write!(f, "(iii) vertex {} written by [{}]", v, ids.join(", "))
            }
            TgViolation::InOutMismatch { task, detail } => {
                write!(f, "(iv) task {}: {}", task, detail)
            }
        }
    }
}

/// Result of a validity check: empty means valid.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<TgViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_cycle(&self) -> bool {
        self.violations.iter().any(|v| matches!(v, TgViolation::Cycle(_)))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "{}", v)?;
            }
            Ok(())
        }
    }
}

/// Check the four task-graph conditions; the report lists every violation.
pub fn validate_tg(g: &TaskGraph) -> ValidationReport {
    let mut violations = Vec::new();

    // (iii) single writer.
    let mut writers: BTreeMap<&VarId, Vec<String>> = BTreeMap::new();
    for t in g.edges.values() {
        for w in &t.writes {
            writers.entry(w).or_default().push(t.id.clone());
        }
    }
    for (v, ids) in &writers {
        if ids.len() > 1 {
            violations.push(TgViolation::MultipleWriters((*v).clone(), ids.clone()));
        }
    }

    // (ii) no isolated vertex.
    let mut incident: BTreeSet<&VarId> = BTreeSet::new();
    for t in g.edges.values() {
        incident.extend(t.reads.iter());
        incident.extend(t.writes.iter());
    }
    for v in &g.vertices {
        if !incident.contains(v) {
            violations.push(TgViolation::IsolatedVertex(v.clone()));
        }
    }

    // (iv) read/write discipline per task.
    for t in g.edges.values() {
        let mut problems = Vec::new();
        for v in t.reads.iter().chain(t.writes.iter()) {
            if !g.vertices.contains(v) {
                problems.push(format!("variable {} is not a graph vertex", v));
            }
        }
        let reads: BTreeSet<&VarId> = t.reads.iter().collect();
        let writes: BTreeSet<&VarId> = t.writes.iter().collect();
        if reads.len() != t.reads.len() {
            problems.push("duplicate read variable".to_string());
        }
        if writes.len() != t.writes.len() {
            problems.push("duplicate write variable".to_string());
        }
        for v in reads.intersection(&writes) {
            problems.push(format!("variable {} both read and written", v));
        }
        let read_names: BTreeSet<String> = t.reads.iter().map(|v| v.name.clone()).collect();
        let write_names: BTreeSet<String> = t.writes.iter().map(|v| v.name.clone()).collect();
        match &t.relation {
            RelationSpec::FunctionalAssign(assigns) => {
                let assigned: BTreeSet<String> = assigns.iter().map(|(v, _)| v.name.clone()).collect();
                if assigned != write_names {
                    problems.push("assigned variables differ from the write set".to_string());
                }
                for (_, e) in assigns {
                    for fv in e.free_vars() {
                        if !read_names.contains(&fv) {
                            problems.push(format!("expression mentions non-read variable {}", fv));
                        }
                    }
                }
            }
            RelationSpec::NondetChoose(pred) => {
                for fv in pred.free_vars() {
                    if !read_names.contains(&fv) && !write_names.contains(&fv) {
                        problems.push(format!("predicate mentions foreign variable {}", fv));
                    }
                }
            }
            RelationSpec::Opaque {
                assume,
                guarantee,
                hist,
                ..
            } => {
                for fv in assume.free_vars() {
                    if !read_names.contains(&fv) {
                        problems.push(format!("assumption mentions non-read variable {}", fv));
                    }
                }
                for fv in guarantee.free_vars() {
                    if !write_names.contains(&fv) {
                        problems.push(format!("guarantee mentions non-write variable {}", fv));
                    }
                }
                if let Some(h) = hist {
                    if !reads.contains(h) {
                        problems.push(format!("history bit {} is not read", h));
                    }
                }
            }
        }
        for detail in problems {
            violations.push(TgViolation::InOutMismatch {
                task: t.id.clone(),
                detail,
            });
        }
    }

    // (i) acyclicity, via Kahn's algorithm on the task dependency graph.
    if let Some(cycle) = find_cycle(g) {
        violations.push(TgViolation::Cycle(cycle));
    }

    ValidationReport { violations }
}

/// Task ids forming a cycle, or `None` when acyclic.
fn find_cycle(g: &TaskGraph) -> Option<Vec<String>> {
    // t1 -> t2 when t1 writes a variable that t2 reads.
    let ids: Vec<&String> = g.edges.keys().collect();
    let mut writer_of: BTreeMap<&VarId, &String> = BTreeMap::new();
    for (id, t) in &g.edges {
        for w in &t.writes {
            // With multiple writers only one is kept; condition (iii)
            // reports that case separately.
            writer_of.insert(w, id);
        }
    }
    let mut preds: BTreeMap<&String, BTreeSet<&String>> = BTreeMap::new();
    let mut succs: BTreeMap<&String, BTreeSet<&String>> = BTreeMap::new();
    for (id, t) in &g.edges {
        for r in &t.reads {
            if let Some(w) = writer_of.get(r) {
                preds.entry(id).or_default().insert(w);
                succs.entry(w).or_default().insert(id);
            }
        }
    }
    let mut indeg: BTreeMap<&String, usize> = ids.iter().map(|id| (*id, 0)).collect();
    for (id, ps) in &preds {
        indeg.insert(id, ps.len());
    }
    let mut queue: VecDeque<&String> = indeg
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(id, _)| *id)
        .collect();
    let mut removed = 0usize;
    while let Some(id) = queue.pop_front() {
        removed += 1;
        if let Some(ss) = succs.get(id) {
            for s in ss {
                let d = indeg.get_mut(s).unwrap();
                *d -= 1;
                if *d == 0 {
                    queue.push_back(s);
                }
            }
        }
    }
    if removed == ids.len() {
        None
    } else {
        let cycle: Vec<String> = indeg
            .iter()
            .filter(|(_, d)| **d > 0)
            .map(|(id, _)| (*id).clone())
            .collect();
        Some(cycle)
    }
}

/// Partition the vertices by longest-path distance from the initial
/// vertices. Level 0 holds exactly the initial (unwritten) vertices;
/// every task's writes lie strictly above all of its reads.
pub fn longest_path_levels(g: &TaskGraph) -> Result<Vec<BTreeSet<VarId>>, HgError> {
    if let Some(cycle) = find_cycle(g) {
        return Err(HgError::Cyclic(cycle));
    }
    let tasks = order_tasks_kahn(g);
    let mut level: BTreeMap<&VarId, usize> = BTreeMap::new();
    for v in &g.vertices {
        level.insert(v, 0);
    }
    for t in &tasks {
        let base = t
            .reads
            .iter()
            .map(|r| level.get(r).copied().unwrap_or(0))
            .max()
            .unwrap_or(0);
        for w in &t.writes {
            let e = level.entry(w).or_insert(0);
            *e = (*e).max(base + 1);
        }
    }
    let max_level = level.values().copied().max().unwrap_or(0);
    let mut out = vec![BTreeSet::new(); max_level + 1];
    for (v, l) in level {
        out[l].insert(v.clone());
    }
    out.retain(|s| !s.is_empty());
    Ok(out)
}

/// Tasks in dependency order (valid only for acyclic graphs).
fn order_tasks_kahn(g: &TaskGraph) -> Vec<&Task> {
    let mut writer_of: BTreeMap<&VarId, &String> = BTreeMap::new();
    for (id, t) in &g.edges {
        for w in &t.writes {
            writer_of.insert(w, id);
        }
    }
    let mut remaining: BTreeMap<&String, &Task> = g.edges.iter().map(|(id, t)| (id, t)).collect();
    let mut done_vars: BTreeSet<&VarId> = g
        .vertices
        .iter()
        .filter(|v| !writer_of.contains_key(v))
        .collect();
    let mut out = Vec::new();
    while !remaining.is_empty() {
        let ready: Vec<&String> = remaining
            .iter()
            .filter(|(_, t)| t.reads.iter().all(|r| done_vars.contains(r)))
            .map(|(id, _)| *id)
            .collect();
        if ready.is_empty() {
            break; // cyclic remainder; callers check separately
        }
        for id in ready {
            let t = remaining.remove(id).unwrap();
            done_vars.extend(t.writes.iter());
            out.push(t);
        }
    }
    out
}

/// Is there a directed path from `x` to `y`?
pub fn await_dep(g: &TaskGraph, x: &VarId, y: &VarId) -> Result<bool, HgError> {
    if !g.vertices.contains(x) {
        return Err(HgError::UnknownVertex(x.name.clone()));
    }
    if !g.vertices.contains(y) {
        return Err(HgError::UnknownVertex(y.name.clone()));
    }
    if x == y {
        return Ok(false);
    }
    let mut seen: BTreeSet<&VarId> = BTreeSet::new();
    let mut queue: VecDeque<&VarId> = VecDeque::new();
    queue.push_back(x);
    while let Some(v) = queue.pop_front() {
        for t in g.edges.values() {
            if t.reads.contains(v) {
                for w in &t.writes {
                    if w == y {
                        return Ok(true);
                    }
                    if seen.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
        }
    }
    Ok(false)
}

/// The subgraph induced by a set of edges; its vertices are exactly the
/// incident ones.
pub fn subgraph(g: &TaskGraph, edge_ids: &BTreeSet<String>) -> Result<TaskGraph, HgError> {
    for id in edge_ids {
        if !g.edges.contains_key(id) {
            return Err(HgError::NotASubset(id.clone()));
        }
    }
    Ok(TaskGraph::from_tasks(
        edge_ids.iter().map(|id| g.edges[id].clone()),
    ))
}

/// Replace a subgraph by a single fresh edge over the given interface.
/// The result may be cyclic and is returned unvalidated.
pub fn abstraction(
    g: &TaskGraph,
    sub: &TaskGraph,
    iface_reads: &[VarId],
    iface_writes: &[VarId],
    spec: RelationSpec,
) -> Result<TaskGraph, HgError> {
    for (id, t) in &sub.edges {
        match g.edges.get(id) {
            Some(gt) if gt == t => {}
            _ => return Err(HgError::NotASubset(id.clone())),
        }
    }
    let initial = sub.initial_vertices();
    let reads_set: BTreeSet<VarId> = iface_reads.iter().cloned().collect();
    if initial != reads_set {
        return Err(HgError::InterfaceMismatch(format!(
            "declared reads {:?} differ from the subgraph's initial vertices {:?}",
            iface_reads, initial
        )));
    }
    let terminal = sub.terminal_vertices();
    let writes_set: BTreeSet<VarId> = iface_writes.iter().cloned().collect();
    if terminal != writes_set {
        return Err(HgError::InterfaceMismatch(format!(
            "declared writes {:?} differ from the subgraph's terminal vertices {:?}",
            iface_writes, terminal
        )));
    }
    let mut fresh = 0usize;
    let fresh_id = loop {
        let candidate = format!("a{}", fresh);
        if !g.edges.contains_key(&candidate) {
            break candidate;
        }
        fresh += 1;
    };
    let tasks = g
        .edges
        .values()
        .filter(|t| !sub.edges.contains_key(&t.id))
        .cloned()
        .chain(std::iter::once(Task {
            id: fresh_id,
            reads: iface_reads.to_vec(),
            writes: iface_writes.to_vec(),
            relation: spec,
        }));
    Ok(TaskGraph::from_tasks(tasks))
}

/// Union two graphs; shared variables merge by name. The flag reports
/// whether the union is acyclic (the composition compatibility check).
pub fn union(g1: &TaskGraph, g2: &TaskGraph) -> Result<(TaskGraph, bool), HgError> {
    for (id, t) in &g2.edges {
        if let Some(t1) = g1.edges.get(id) {
            if t1 != t {
                return Err(HgError::DuplicateEdgeId(id.clone()));
            }
        }
    }
    let written1: BTreeSet<&VarId> = g1.edges.values().flat_map(|t| t.writes.iter()).collect();
    for t in g2.edges.values() {
        if g1.edges.contains_key(&t.id) {
            continue;
        }
        for w in &t.writes {
            if written1.contains(w) {
                return Err(HgError::WriteConflict(w.name.clone()));
            }
        }
    }
    let mut vertices = g1.vertices.clone();
    vertices.extend(g2.vertices.iter().cloned());
    let mut edges = g1.edges.clone();
    for (id, t) in &g2.edges {
        edges.entry(id.clone()).or_insert_with(|| t.clone());
    }
    let out = TaskGraph { vertices, edges };
    let acyclic = find_cycle(&out).is_none();
    Ok((out, acyclic))
}

/// Deterministic DOT rendering: vertices as points, hyperedges as boxed
/// junction nodes.
pub fn to_dot(g: &TaskGraph) -> String {
    let mut out = String::from("digraph tg {\n  rankdir=LR;\n");
    for v in &g.vertices {
        out.push_str(&format!(
            "  \"{}\" [shape=circle, label=\"{}\"];\n",
            v.name, v.name
        ));
    }
    for (id, t) in &g.edges {
        out.push_str(&format!("  \"e:{}\" [shape=box, label=\"{}\"];\n", id, id));
        for r in &t.reads {
            out.push_str(&format!("  \"{}\" -> \"e:{}\";\n", r.name, id));
        }
        for w in &t.writes {
            out.push_str(&format!("  \"e:{}\" -> \"{}\";\n", id, w.name));
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{BinOp, Value};

    fn b(name: &str) -> VarId {
        VarId::new(name, Sort::Bool)
    }

    fn i(name: &str) -> VarId {
        VarId::new(name, Sort::Int)
    }

    /// The counter task graph: e1 copies i1 to o1, e2 adds i2 and s1 into
    /// the local l1, e3 copies l1 to both o2 and s1'.
    pub fn counter_tg() -> TaskGraph {
        let e1 = Task::assign("e1", vec![b("i1")], b("o1"), Expr::var("i1"));
        let e2 = Task::assign(
            "e2",
            vec![i("i2"), i("s1")],
            i("l1"),
            Expr::bin(BinOp::Add, Expr::var("i2"), Expr::var("s1")),
        );
        let e3 = Task {
            id: "e3".into(),
            reads: vec![i("l1")],
            writes: vec![i("o2"), i("s1'")],
            relation: RelationSpec::FunctionalAssign(vec![
                (i("o2"), Expr::var("l1")),
                (i("s1'"), Expr::var("l1")),
            ]),
        };
        TaskGraph::from_tasks([e1, e2, e3])
    }

    #[test]
    fn counter_graph_is_valid() {
        let report = validate_tg(&counter_tg());
        assert!(report.is_valid(), "{}", report);
    }

    #[test]
    fn counter_levels() {
        let levels = longest_path_levels(&counter_tg()).unwrap();
        let names: Vec<Vec<&str>> = levels
            .iter()
            .map(|s| s.iter().map(|v| v.name.as_str()).collect())
            .collect();
        assert_eq!(
            names,
            vec![vec!["i1", "i2", "s1"], vec!["l1", "o1"], vec!["o2", "s1'"]]
        );
    }

    #[test]
    fn counter_await_deps() {
        let g = counter_tg();
        assert!(await_dep(&g, &i("i2"), &i("o2")).unwrap());
        assert!(!await_dep(&g, &i("o2"), &i("i2")).unwrap());
        assert!(!await_dep(&g, &i("i2"), &i("i2")).unwrap());
        assert!(matches!(
            await_dep(&g, &i("nope"), &i("o2")),
            Err(HgError::UnknownVertex(_))
        ));
    }

    #[test]
    fn double_write_violates_iii() {
        let t1 = Task::assign("t1", vec![b("a")], b("v"), Expr::var("a"));
        let t2 = Task::assign("t2", vec![b("a")], b("v"), Expr::not(Expr::var("a")));
        let g = TaskGraph::from_tasks([t1, t2]);
        let report = validate_tg(&g);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, TgViolation::MultipleWriters(var, _) if var.name == "v")));
    }

    #[test]
    fn cycle_violates_i() {
        let t1 = Task::assign("t1", vec![b("a")], b("c"), Expr::var("a"));
        let t2 = Task::assign("t2", vec![b("c")], b("a"), Expr::var("c"));
        let g = TaskGraph::from_tasks([t1, t2]);
        let report = validate_tg(&g);
        assert!(report.has_cycle());
        assert!(longest_path_levels(&g).is_err());
    }

    #[test]
    fn isolated_vertex_violates_ii() {
        let mut g = counter_tg();
        g.vertices.insert(b("loner"));
        let report = validate_tg(&g);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, TgViolation::IsolatedVertex(var) if var.name == "loner")));
    }

    #[test]
    fn empty_graph_is_valid() {
        assert!(validate_tg(&TaskGraph::default()).is_valid());
    }

    #[test]
    fn constant_task_output_sits_above_level_zero() {
        let t1 = Task::assign("t1", vec![], i("c"), Expr::int(7));
        let t2 = Task::assign("t2", vec![i("c")], i("d"), Expr::var("c"));
        let g = TaskGraph::from_tasks([t1, t2]);
        let levels = longest_path_levels(&g).unwrap();
        assert_eq!(levels.len(), 2);
        assert!(levels[0].contains(&i("c")));
        assert!(levels[1].contains(&i("d")));
        // c is written (by the constant task), hence not initial.
        assert!(g.initial_vertices().is_empty());
    }

    #[test]
    fn single_edge_levels() {
        let t = Task::assign("t", vec![b("a")], b("x"), Expr::var("a"));
        let g = TaskGraph::from_tasks([t]);
        let levels = longest_path_levels(&g).unwrap();
        assert_eq!(levels.len(), 2);
        assert!(levels[0].contains(&b("a")));
        assert!(levels[1].contains(&b("x")));
    }

    #[test]
    fn subgraph_of_all_edges_is_identity() {
        let g = counter_tg();
        let ids: BTreeSet<String> = g.edges.keys().cloned().collect();
        assert_eq!(subgraph(&g, &ids).unwrap(), g);
        assert_eq!(subgraph(&g, &BTreeSet::new()).unwrap(), TaskGraph::default());
        assert!(matches!(
            subgraph(&g, &["zzz".to_string()].into_iter().collect()),
            Err(HgError::NotASubset(_))
        ));
    }

    #[test]
    fn abstraction_roundtrip() {
        let g = counter_tg();
        let ids: BTreeSet<String> = ["e2", "e3"].iter().map(|s| s.to_string()).collect();
        let sub = subgraph(&g, &ids).unwrap();
        let reads = vec![i("i2"), i("s1")];
        let writes = vec![i("o2"), i("s1'")];
        let abstracted = abstraction(
            &g,
            &sub,
            &reads,
            &writes,
            RelationSpec::Opaque {
                name: "c".into(),
                assume: Expr::bool(true),
                guarantee: Expr::bool(true),
                hist: None,
            },
        )
        .unwrap();
        assert_eq!(abstracted.edges.len(), 2); // e1 + fresh edge
        let fresh = abstracted.edges.values().find(|t| t.id != "e1").unwrap();
        assert_eq!(fresh.reads, reads);
        assert_eq!(fresh.writes, writes);
        // Put the subgraph back: same edge multiset as the original.
        let restored = TaskGraph::from_tasks(
            abstracted
                .edges
                .values()
                .filter(|t| t.id == "e1")
                .cloned()
                .chain(sub.edges.values().cloned()),
        );
        assert_eq!(restored, g);
    }

    #[test]
    fn abstracting_everything_leaves_one_edge() {
        let g = counter_tg();
        let ids: BTreeSet<String> = g.edges.keys().cloned().collect();
        let sub = subgraph(&g, &ids).unwrap();
        let reads: Vec<VarId> = sub.initial_vertices().into_iter().collect();
        let writes: Vec<VarId> = sub.terminal_vertices().into_iter().collect();
        let abstracted =
            abstraction(&g, &sub, &reads, &writes, RelationSpec::NondetChoose(Expr::bool(true)))
                .unwrap();
        assert_eq!(abstracted.edges.len(), 1);
    }

    #[test]
    fn union_detects_write_conflicts_and_cycles() {
        let g1 = TaskGraph::from_tasks([Task::assign("u1", vec![b("a")], b("x"), Expr::var("a"))]);
        let g2 = TaskGraph::from_tasks([Task::assign("u2", vec![b("b")], b("x"), Expr::var("b"))]);
        assert!(matches!(union(&g1, &g2), Err(HgError::WriteConflict(_))));

        let g3 = TaskGraph::from_tasks([Task::assign("u3", vec![b("x")], b("a"), Expr::var("x"))]);
        let (_, acyclic) = union(&g1, &g3).unwrap();
        assert!(!acyclic);

        let (u, acyclic) = union(&g1, &TaskGraph::default()).unwrap();
        assert!(acyclic);
        assert_eq!(u, g1);
    }

    #[test]
    fn union_is_commutative_and_associative() {
        let g1 = TaskGraph::from_tasks([Task::assign("c1", vec![b("a")], b("x"), Expr::var("a"))]);
        let g2 = TaskGraph::from_tasks([Task::assign("c2", vec![b("x")], b("y"), Expr::var("x"))]);
        let g3 = TaskGraph::from_tasks([Task::assign("c3", vec![b("y")], b("z"), Expr::var("y"))]);
        let (ab, _) = union(&g1, &g2).unwrap();
        let (ba, _) = union(&g2, &g1).unwrap();
        assert_eq!(ab, ba);
        let (ab_c, _) = union(&ab, &g3).unwrap();
        let (bc, _) = union(&g2, &g3).unwrap();
        let (a_bc, _) = union(&g1, &bc).unwrap();
        assert_eq!(ab_c, a_bc);
    }

    #[test]
    fn dot_output_counts() {
        let dot = to_dot(&counter_tg());
        assert_eq!(dot.matches("shape=circle").count(), 7);
        assert_eq!(dot.matches("shape=box").count(), 3);
        assert_eq!(to_dot(&TaskGraph::default()), "digraph tg {\n  rankdir=LR;\n}\n");
    }

    #[test]
    fn functional_totality_on_small_bool_graphs() {
        // Lemma-style check: for a valid bool task graph, every valuation
        // of the initial vertices extends to a full valuation.
        let g = TaskGraph::from_tasks([
            Task::assign("f1", vec![b("p")], b("q"), Expr::not(Expr::var("p"))),
            Task::choose(
                "f2",
                vec![b("q")],
                vec![b("r")],
                Expr::bin(BinOp::Eq, Expr::var("r"), Expr::var("r")),
            ),
        ]);
        for p in [false, true] {
            let mut env: BTreeMap<String, Value> = BTreeMap::new();
            env.insert("p".into(), Value::Bool(p));
            // q is forced; r admits both values: the relation is total.
            let tasks = g.topo_tasks().unwrap();
            assert_eq!(tasks[0].id, "f1");
        }
    }
}
