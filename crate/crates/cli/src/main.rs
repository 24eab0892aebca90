//! `hrmv`: the command-line surface of the toolchain.
//!
//! Verification modes: `check` (monolithic), `modular` (every annotated
//! node in isolation), `abstract` (submodules replaced by their
//! contracts), and `compose` (adapter decomposition with one proof
//! obligation per submodule plus the adapter). Utility commands:
//! `decompose` (source-to-source), `simulate`, and `graph`.
//!
//! Exit codes: 0 all obligations valid, 1 some obligation falsified,
//! 2 inconclusive, 3 usage or input error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use hrmv_core::expr::{Sort, Value};
use hrmv_core::hierarchy::{abstract_children, flatten, gen_obligations, Obligation};
use hrmv_core::hypergraph::{to_dot, VarId};
use hrmv_core::module::{init_states, step, trace_to_text, DomainBounds, Valuation};
use hrmv_core::property::Contract;
use hrmv_lustre::ast::{pretty_print, Program};
use hrmv_lustre::decompose::decompose_program;
use hrmv_lustre::elaborate::{elaborate, instantiate, Elaboration};
use hrmv_lustre::parser::parse;
use hrmv_lustre::typecheck::typecheck;
use hrmv_mc::engine::{check, CheckOptions, CheckReport, Verdict};
use hrmv_mc::smt;
use hrmv_mc::ts::encode;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "hrmv", about = "Contract-based verification of synchronous dataflow programs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Monolithic check of the main node against its own contract.
    Check(VerifyArgs),
    /// Check every node that carries a contract in isolation.
    Modular(VerifyArgs),
    /// Check the main node with submodules replaced by their contracts.
    Abstract(VerifyArgs),
    /// Adapter decomposition: one obligation per submodule plus the adapter.
    Compose(VerifyArgs),
    /// Rewrite hierarchical nodes into adapter nodes and emit the program.
    Decompose {
        file: PathBuf,
        #[arg(long)]
        main: Option<String>,
        /// Output path for the decomposed program (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output path for the JSON manifest.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Run the main node on an input script and print the trace.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        main: Option<String>,
        /// Input file: one round per line, `name=value` pairs.
        inputs: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Print the task graph of a node in DOT format.
    Graph {
        file: PathBuf,
        #[arg(long)]
        main: Option<String>,
    },
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    /// Main node (default: the last node in the file).
    #[arg(long)]
    main: Option<String>,
    /// SMT solver executable (SMT-LIB 2 on stdin/stdout).
    #[arg(long, env = "HRMV_SOLVER")]
    solver: Option<PathBuf>,
    /// Maximum induction depth.
    #[arg(long, default_value_t = 10)]
    max_k: usize,
    /// Bounded-model-checking unrolling bound.
    #[arg(long, default_value_t = 20)]
    bmc_bound: usize,
    /// Time budget per obligation, in seconds.
    #[arg(long, default_value_t = 600)]
    budget_secs: u64,
    /// Write the machine-readable report to this path.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Dump emitted SMT scripts into this directory.
    #[arg(long)]
    dump_smt: Option<PathBuf>,
    /// Check every obligation even when several share a node.
    #[arg(long)]
    no_dedup: bool,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("cannot read `{0}`: {1}")]
    Read(PathBuf, std::io::Error),
    #[error("cannot write `{0}`: {1}")]
    Write(PathBuf, std::io::Error),
    #[error("{0}")]
    Input(String),
    #[error("no solver configured; pass --solver or set HRMV_SOLVER")]
    NoSolver,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Check(a) => verify("check", &a),
        Cmd::Modular(a) => verify("modular", &a),
        Cmd::Abstract(a) => verify("abstract", &a),
        Cmd::Compose(a) => verify("compose", &a),
        Cmd::Decompose {
            file,
            main,
            out,
            manifest,
        } => cmd_decompose(&file, main.as_deref(), out.as_deref(), manifest.as_deref()),
        Cmd::Simulate {
            file,
            main,
            inputs,
            depth,
        } => cmd_simulate(&file, main.as_deref(), &inputs, depth),
        Cmd::Graph { file, main } => cmd_graph(&file, main.as_deref()),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn load(file: &Path) -> Result<Program, CliError> {
    let text =
        std::fs::read_to_string(file).map_err(|e| CliError::Read(file.to_path_buf(), e))?;
    let p = parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", file.display())))?;
    typecheck(&p).map_err(|e| CliError::Input(format!("{}: {e}", file.display())))?;
    Ok(p)
}

fn main_node<'a>(p: &'a Program, requested: Option<&str>) -> Result<&'a str, CliError> {
    match requested {
        Some(name) => p
            .node(name)
            .map(|n| n.name.as_str())
            .ok_or_else(|| CliError::Input(format!("no node named `{name}`"))),
        None => p
            .nodes
            .last()
            .map(|n| n.name.as_str())
            .ok_or_else(|| CliError::Input("the program has no nodes".into())),
    }
}

fn elaborated(p: &Program, main: &str) -> Result<Elaboration, CliError> {
    let tree = instantiate(p, main).map_err(|e| CliError::Input(e.to_string()))?;
    elaborate(p, &tree).map_err(|e| CliError::Input(e.to_string()))
}

/// One obligation with its report context.
struct Job {
    label: String,
    node: String,
    obligation: Obligation,
    /// `Some(label)` when deduplicated away onto a representative.
    reused_from: Option<String>,
}

fn verify(mode: &str, args: &VerifyArgs) -> Result<u8, CliError> {
    let p = load(&args.file)?;
    let main = main_node(&p, args.main.as_deref())?;
    let solver = args.solver.clone().ok_or(CliError::NoSolver)?;
    let mut opts = CheckOptions::new(solver);
    opts.max_k = args.max_k;
    opts.bmc_bound = args.bmc_bound;
    opts.budget = Duration::from_secs(args.budget_secs);

    let mut jobs: Vec<Job> = Vec::new();
    let mut spurious_note = false;
    match mode {
        "check" => {
            let elab = elaborated(&p, main)?;
            let subject = flatten(&elab.hierarchy).map_err(|e| CliError::Input(e.to_string()))?;
            jobs.push(Job {
                label: format!("goal:{main}"),
                node: main.to_string(),
                obligation: Obligation {
                    label: format!("goal:{main}"),
                    subject,
                    contract: elab.top_contract,
                },
                reused_from: None,
            });
        }
        "modular" => {
            for node in &p.nodes {
                if node.contract.is_none() {
                    eprintln!("note: node `{}` has no contract; skipped", node.name);
                    continue;
                }
                let elab = elaborated(&p, &node.name)?;
                let subject =
                    flatten(&elab.hierarchy).map_err(|e| CliError::Input(e.to_string()))?;
                jobs.push(Job {
                    label: format!("node:{}", node.name),
                    node: node.name.clone(),
                    obligation: Obligation {
                        label: format!("node:{}", node.name),
                        subject,
                        contract: elab.top_contract,
                    },
                    reused_from: None,
                });
            }
        }
        "abstract" => {
            let elab = elaborated(&p, main)?;
            let picks: Vec<(usize, Contract)> = elab
                .sub_contracts
                .iter()
                .enumerate()
                .map(|(j, (_, _, c))| (j, c.clone()))
                .collect();
            spurious_note = !picks.is_empty();
            let subject = abstract_children(&elab.hierarchy, &picks)
                .map_err(|e| CliError::Input(e.to_string()))?;
            jobs.push(Job {
                label: format!("abstract:{main}"),
                node: main.to_string(),
                obligation: Obligation {
                    label: format!("abstract:{main}"),
                    subject,
                    contract: elab.top_contract,
                },
                reused_from: None,
            });
        }
        "compose" => {
            let elab = elaborated(&p, main)?;
            let subs: Vec<Contract> = elab
                .sub_contracts
                .iter()
                .map(|(_, _, c)| c.clone())
                .collect();
            let obligations = gen_obligations(&elab.hierarchy, &elab.top_contract, &subs)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let mut seen: BTreeMap<String, String> = BTreeMap::new();
            for ob in obligations {
                let (node, instance) = match ob.label.strip_prefix("sub:") {
                    Some(j) => {
                        let j: usize = j.parse().expect("sub index");
                        (elab.sub_contracts[j].1.clone(), elab.sub_contracts[j].0.clone())
                    }
                    None => (main.to_string(), main.to_string()),
                };
                let reused_from = if args.no_dedup || ob.label == "adapter" {
                    None
                } else {
                    match seen.get(&node) {
                        Some(first) => Some(first.clone()),
                        None => {
                            seen.insert(node.clone(), format!("sub:{instance}"));
                            None
                        }
                    }
                };
                let label = if ob.label == "adapter" {
                    "adapter".to_string()
                } else {
                    format!("sub:{instance}")
                };
                jobs.push(Job {
                    label,
                    node,
                    obligation: ob,
                    reused_from,
                });
            }
        }
        _ => unreachable!(),
    }

    run_jobs(mode, args, &opts, jobs, spurious_note)
}

fn run_jobs(
    mode: &str,
    args: &VerifyArgs,
    opts: &CheckOptions,
    jobs: Vec<Job>,
    spurious_note: bool,
) -> Result<u8, CliError> {
    let mut results: Vec<(usize, CheckReport)> = Vec::new();
    let mut by_label: BTreeMap<String, CheckReport> = BTreeMap::new();
    for (i, job) in jobs.iter().enumerate() {
        if let Some(from) = &job.reused_from {
            let report = by_label
                .get(from)
                .expect("representative checked first")
                .clone();
            results.push((i, report));
            continue;
        }
        let ts = encode(&job.obligation.subject, &job.obligation.contract)
            .map_err(|e| CliError::Input(format!("{}: {e}", job.label)))?;
        if let Some(dir) = &args.dump_smt {
            dump_scripts(dir, &job.label, &ts)?;
        }
        let report = check(&ts, opts)
            .map_err(|e| CliError::Input(format!("{}: solver failure: {e}", job.label)))?;
        by_label.insert(job.label.clone(), report.clone());
        results.push((i, report));
    }

    let mut worst = 0u8;
    let mut printed = Vec::new();
    for (i, report) in &results {
        let job = &jobs[*i];
        let (word, detail, code) = match &report.verdict {
            Verdict::Valid { k } => ("valid".to_string(), format!("k={k}, {}", report.engine), 0),
            Verdict::Falsified { trace, .. } => {
                let mut d = format!("{} rounds, {}", trace.len(), report.engine);
                if spurious_note {
                    d.push_str(", possibly spurious (abstraction)");
                }
                d.push_str(&format!("\n{}", trace_to_text(trace)));
                ("falsified".to_string(), d, 1)
            }
            Verdict::Unknown { reason } => ("unknown".to_string(), reason.clone(), 2),
        };
        worst = worst.max(code);
        let reused = match &job.reused_from {
            Some(from) => format!(" (reusing {from})"),
            None => String::new(),
        };
        println!(
            "obligation {} [{}]: {}{} ({}, {:.2}s)",
            job.label,
            job.node,
            word,
            reused,
            detail.lines().next().unwrap_or(""),
            report.elapsed.as_secs_f64()
        );
        for line in detail.lines().skip(1) {
            println!("  {line}");
        }
        printed.push((job, report, word));
    }

    let guarantee_count: usize = jobs
        .iter()
        .filter(|j| j.reused_from.is_none())
        .map(|j| j.obligation.contract.guarantees.len())
        .sum();
    let solver_checked = jobs.iter().filter(|j| j.reused_from.is_none()).count();
    let reused = jobs.len() - solver_checked;
    let overall = match worst {
        0 => "valid",
        1 => "falsified",
        _ => "unknown",
    };
    println!("overall: {overall}");
    println!("guarantees: {guarantee_count}");
    if mode == "compose" {
        println!("dedup: {solver_checked} checked, {reused} reused");
    }

    if let Some(path) = &args.json {
        let obligations: Vec<serde_json::Value> = printed
            .iter()
            .map(|(job, report, word)| {
                serde_json::json!({
                    "label": job.label,
                    "node": job.node,
                    "verdict": word,
                    "engine": report.engine,
                    "elapsed_ms": report.elapsed.as_millis() as u64,
                    "guarantees": job.obligation.contract.guarantees.len(),
                    "reused_from": job.reused_from,
                    "k": match &report.verdict {
                        Verdict::Valid { k } => Some(*k),
                        _ => None,
                    },
                    "trace": match &report.verdict {
                        Verdict::Falsified { trace, .. } => Some(trace_to_text(trace)),
                        _ => None,
                    },
                    "frames": match &report.verdict {
                        Verdict::Falsified { frames, .. } => Some(
                            frames
                                .iter()
                                .map(|f| {
                                    f.iter()
                                        .map(|(v, val)| (v.name.clone(), val.to_string()))
                                        .collect::<BTreeMap<_, _>>()
                                })
                                .collect::<Vec<_>>(),
                        ),
                        _ => None,
                    },
                })
            })
            .collect();
        let doc = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "mode": mode,
            "file": args.file.display().to_string(),
            "overall": overall,
            "guarantee_count": guarantee_count,
            "dedup": { "checked": solver_checked, "reused": reused },
            "obligations": obligations,
        });
        std::fs::write(path, serde_json::to_string_pretty(&doc).unwrap())
            .map_err(|e| CliError::Write(path.clone(), e))?;
    }
    Ok(worst)
}

fn dump_scripts(dir: &Path, label: &str, ts: &hrmv_mc::ts::TransitionSystem) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Write(dir.to_path_buf(), e))?;
    let stem: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    for (kind, text) in [
        ("bmc_k1", smt::emit_bmc(ts, 1)),
        ("base_k1", smt::emit_base(ts, 1)),
        ("step_k1", smt::emit_step(ts, 1)),
    ] {
        let path = dir.join(format!("{stem}_{kind}.smt2"));
        std::fs::write(&path, text).map_err(|e| CliError::Write(path, e))?;
    }
    Ok(())
}

fn cmd_decompose(
    file: &Path,
    main: Option<&str>,
    out: Option<&Path>,
    manifest: Option<&Path>,
) -> Result<u8, CliError> {
    let p = load(file)?;
    let main = main_node(&p, main)?;
    let d = decompose_program(&p, main).map_err(|e| CliError::Input(e.to_string()))?;
    let text = pretty_print(&d);
    match out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| CliError::Write(path.to_path_buf(), e))?
        }
        None => print!("{text}"),
    }
    if let Some(path) = manifest {
        let nodes: Vec<serde_json::Value> = d
            .nodes
            .iter()
            .map(|n| {
                serde_json::json!({
                    "name": n.name,
                    "inputs": n.inputs.iter().map(|q| q.name.clone()).collect::<Vec<_>>(),
                    "outputs": n.outputs.iter().map(|q| q.name.clone()).collect::<Vec<_>>(),
                    "assumes": n.contract.as_ref().map_or(0, |c| c.assumes.len()),
                    "guarantees": n.contract.as_ref().map_or(0, |c| c.guarantees.len()),
                })
            })
            .collect();
        let doc = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "source": file.display().to_string(),
            "main": main,
            "nodes": nodes,
        });
        std::fs::write(path, serde_json::to_string_pretty(&doc).unwrap())
            .map_err(|e| CliError::Write(path.to_path_buf(), e))?;
    }
    Ok(0)
}

fn parse_value(text: &str, sort: Sort) -> Result<Value, CliError> {
    let bad = || CliError::Input(format!("bad {sort} value `{text}`"));
    match sort {
        Sort::Bool => match text {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err(bad()),
        },
        Sort::Int => text.parse().map(Value::Int).map_err(|_| bad()),
        Sort::Real => Value::real_from_decimal(text).ok_or_else(bad),
        Sort::Unit => Ok(Value::Unit),
    }
}

fn cmd_simulate(
    file: &Path,
    main: Option<&str>,
    inputs: &Path,
    depth: Option<usize>,
) -> Result<u8, CliError> {
    let p = load(file)?;
    let main = main_node(&p, main)?;
    let elab = elaborated(&p, main)?;
    let m = flatten(&elab.hierarchy).map_err(|e| CliError::Input(e.to_string()))?;
    let script =
        std::fs::read_to_string(inputs).map_err(|e| CliError::Read(inputs.to_path_buf(), e))?;
    let by_name: BTreeMap<&str, &VarId> =
        m.inputs.iter().map(|v| (v.name.as_str(), v)).collect();
    let mut rounds: Vec<Valuation> = Vec::new();
    for (lineno, line) in script.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut round = Valuation::new();
        for item in line.split_whitespace() {
            let (name, value) = item.split_once('=').ok_or_else(|| {
                CliError::Input(format!("{}:{}: expected name=value", inputs.display(), lineno + 1))
            })?;
            let var = by_name.get(name).ok_or_else(|| {
                CliError::Input(format!("`{name}` is not an input of `{main}`"))
            })?;
            round.insert((*var).clone(), parse_value(value, var.sort)?);
        }
        for v in &m.inputs {
            if !round.contains_key(v) {
                return Err(CliError::Input(format!(
                    "{}:{}: missing input `{}`",
                    inputs.display(),
                    lineno + 1,
                    v.name
                )));
            }
        }
        rounds.push(round);
    }
    if let Some(d) = depth {
        if d > rounds.len() {
            return Err(CliError::Input(format!(
                "depth {d} exceeds the {} provided rounds",
                rounds.len()
            )));
        }
        rounds.truncate(d);
    }

    let bounds = DomainBounds::default();
    let starts = init_states(&m, &bounds).map_err(|e| CliError::Input(e.to_string()))?;
    let mut state = starts
        .into_iter()
        .next()
        .ok_or_else(|| CliError::Input("no initial state".into()))?;
    let mut trace = Vec::new();
    for round in &rounds {
        let successors =
            step(&m, &state, round, &bounds).map_err(|e| CliError::Input(e.to_string()))?;
        let (outs, next) = successors
            .into_iter()
            .next()
            .ok_or_else(|| CliError::Input("the reaction has no successor".into()))?;
        trace.push((round.clone(), outs));
        state = next;
    }
    print!("{}", trace_to_text(&trace));
    Ok(0)
}

fn cmd_graph(file: &Path, main: Option<&str>) -> Result<u8, CliError> {
    let p = load(file)?;
    let main = main_node(&p, main)?;
    let elab = elaborated(&p, main)?;
    let h = &elab.hierarchy;
    if h.bindings.is_empty() {
        print!("{}", to_dot(&h.parent.react));
        return Ok(0);
    }
    // Hierarchical: one dashed cluster per submodule instance.
    let mut out = String::from("digraph tg {\n  rankdir=LR;\n");
    let quote = |s: &str| format!("\"{}\"", s.replace('"', "\\\""));
    let cluster_of = |name: &str| {
        h.bindings
            .iter()
            .position(|b| name.starts_with(&format!("{}.", b.child.name)))
    };
    for (j, b) in h.bindings.iter().enumerate() {
        out.push_str(&format!(
            "  subgraph cluster_{j} {{\n    label={};\n    style=dashed;\n",
            quote(&b.child.name)
        ));
        for v in &b.child.react.vertices {
            out.push_str(&format!("    {} [shape=ellipse];\n", quote(&v.name)));
        }
        for id in &b.edge_ids {
            out.push_str(&format!("    {} [shape=box];\n", quote(id)));
        }
        out.push_str("  }\n");
    }
    for v in &h.parent.react.vertices {
        if cluster_of(&v.name).is_none() {
            out.push_str(&format!("  {} [shape=ellipse];\n", quote(&v.name)));
        }
    }
    for (id, task) in &h.parent.react.edges {
        let in_cluster = h.bindings.iter().any(|b| b.edge_ids.contains(id));
        if !in_cluster {
            out.push_str(&format!("  {} [shape=box];\n", quote(id)));
        }
        for r in &task.reads {
            out.push_str(&format!("  {} -> {};\n", quote(&r.name), quote(id)));
        }
        for w in &task.writes {
            out.push_str(&format!("  {} -> {};\n", quote(id), quote(&w.name)));
        }
    }
    out.push_str("}\n");
    print!("{out}");
    Ok(0)
}
