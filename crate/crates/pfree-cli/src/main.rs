//! Command-line surface for the prison-free graph toolkit.
//!
//! Exit codes: 0 for yes/success, 1 for no/infeasible (or a failing
//! verification suite), 2 for usage, parse and structural errors. No
//! subcommand writes an output file on a failure path.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pfree::annotated::{AnnotatedFile, AnnotatedGraph};
use pfree::gadgets::{
    build_cloning, build_disjoint_propagational, build_propagational, compose, gadget_file,
    reduce_vc_to_gap, GapInstance, VCInstance,
};
use pfree::graph::{Edge, Graph};
use pfree::kernel::{kernelize, KernelOutcome};
use pfree::solve::{branch_completion, branch_deletion, EditMode, Solution};
use pfree::structure::{cmd, enumerate_k4s, enumerate_prisons, find_prison, PrisonWitness};
use pfree::verify::{run_suite, seed_from_env};

#[derive(Parser)]
#[command(name = "pfree", version, about = "Prison-free graph toolkit: recognition, kernelization, exact solvers and hardness gadgets")]
struct Cli {
    /// Emit machine-readable JSON payloads instead of human text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether a graph is prison-free.
    Check { path: PathBuf },
    /// List every 5-vertex subset inducing a prison.
    Enumerate { path: PathBuf },
    /// List the maximal complete multipartite components with at least
    /// `p` classes.
    Decompose {
        path: PathBuf,
        #[arg(long, default_value_t = 4)]
        p: usize,
    },
    /// Reduce a deletion instance to an equivalent kernel.
    Kernelize {
        path: PathBuf,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the JSON event log of the reduction.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Solve an instance exactly within a budget.
    Solve {
        path: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        k: usize,
    },
    /// Build a gadget instance file.
    Gadget {
        #[arg(long = "type", value_enum)]
        kind: GadgetKind,
        /// Chain length for cloning components.
        #[arg(long, default_value_t = 4)]
        len: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reduce a cubic vertex cover instance to a gap completion
    /// instance.
    ReduceVc {
        path: PathBuf,
        /// Cover budget of the input instance.
        #[arg(long)]
        t: u64,
        /// Chain length (even, at least 6).
        #[arg(long)]
        l: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compose gap instances into a single or-instance.
    Compose {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long)]
        suite: String,
        /// Corpus seed; defaults to PFREE_SEED or the built-in constant.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Del,
    Comp,
}

#[derive(Clone, Copy, ValueEnum)]
enum GadgetKind {
    Prop,
    Clone,
    Dpc,
}

fn load_file(path: &Path) -> pfree::Result<AnnotatedFile> {
    let text = fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        AnnotatedFile::from_json_str(&text)
    } else {
        Ok(AnnotatedFile::plain(AnnotatedGraph::new(
            Graph::parse_edge_list(&text)?,
        )))
    }
}

fn write_file(path: &Path, file: &AnnotatedFile) -> pfree::Result<()> {
    fs::write(path, file.to_json_string())?;
    Ok(())
}

fn print_payload<T: Serialize>(json: bool, payload: &T, human: String) {
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(payload).expect("payload serialization")
        );
    } else {
        println!("{human}");
    }
}

#[derive(Serialize)]
struct CheckPayload {
    prison_free: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<PrisonWitness>,
}

#[derive(Serialize)]
struct EnumeratePayload {
    count: usize,
    prisons: Vec<PrisonWitness>,
}

#[derive(Serialize)]
struct SolvePayload {
    feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edits: Option<Vec<(usize, usize)>>,
}

fn describe_solution(sol: &Solution) -> String {
    let edits: Vec<String> = sol.edits.iter().map(|e| e.to_string()).collect();
    format!("solution of size {}: {}", sol.size(), edits.join(" "))
}

fn run(cli: Cli) -> pfree::Result<u8> {
    match cli.command {
        Command::Check { path } => {
            let file = load_file(&path)?;
            match find_prison(&file.annotated.graph) {
                None => {
                    print_payload(
                        cli.json,
                        &CheckPayload {
                            prison_free: true,
                            witness: None,
                        },
                        "prison-free".into(),
                    );
                    Ok(0)
                }
                Some(w) => {
                    print_payload(
                        cli.json,
                        &CheckPayload {
                            prison_free: false,
                            witness: Some(w.clone()),
                        },
                        format!(
                            "prison on vertices {:?} with non-edges {}, {}",
                            w.vertices, w.non_edges[0], w.non_edges[1]
                        ),
                    );
                    Ok(1)
                }
            }
        }
        Command::Enumerate { path } => {
            let file = load_file(&path)?;
            let prisons = enumerate_prisons(&file.annotated.graph);
            let human = if prisons.is_empty() {
                "no prisons".to_string()
            } else {
                prisons
                    .iter()
                    .map(|w| {
                        format!(
                            "{:?} non-edges {}, {}",
                            w.vertices, w.non_edges[0], w.non_edges[1]
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            print_payload(
                cli.json,
                &EnumeratePayload {
                    count: prisons.len(),
                    prisons,
                },
                human,
            );
            Ok(0)
        }
        Command::Decompose { path, p } => {
            let file = load_file(&path)?;
            let components = cmd(&file.annotated.graph, p)?;
            let human = if components.is_empty() {
                format!("no complete multipartite components with >= {p} classes")
            } else {
                components
                    .iter()
                    .map(|c| format!("{:?}", c.classes))
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            #[derive(Serialize)]
            struct DecomposePayload<'a> {
                components: &'a [pfree::structure::MultipartiteComponent],
            }
            print_payload(
                cli.json,
                &DecomposePayload {
                    components: &components,
                },
                human,
            );
            Ok(0)
        }
        Command::Kernelize {
            path,
            k,
            out,
            trace,
        } => {
            let file = load_file(&path)?;
            match kernelize(&file.annotated.graph, k)? {
                KernelOutcome::NoInstance { reason, .. } => {
                    println!("no-instance: {reason}");
                    Ok(1)
                }
                KernelOutcome::Kernel(res) => {
                    let mut annotated = AnnotatedGraph::new(res.graph.clone());
                    annotated.k = Some(res.budget);
                    write_file(&out, &AnnotatedFile::plain(annotated))?;
                    if let Some(trace_path) = &trace {
                        let mut text = serde_json::to_string_pretty(&res.trace)
                            .expect("trace serialization");
                        text.push('\n');
                        fs::write(trace_path, text)?;
                    }
                    #[derive(Serialize)]
                    struct KernelPayload {
                        vertices: usize,
                        edges: usize,
                        k_after: u64,
                    }
                    print_payload(
                        cli.json,
                        &KernelPayload {
                            vertices: res.graph.vertex_count(),
                            edges: res.graph.edge_count(),
                            k_after: res.budget,
                        },
                        format!(
                            "kernel with {} vertices, {} edges, budget {} written to {}",
                            res.graph.vertex_count(),
                            res.graph.edge_count(),
                            res.budget,
                            out.display()
                        ),
                    );
                    Ok(0)
                }
            }
        }
        Command::Solve { path, mode, k } => {
            let file = load_file(&path)?;
            let solution = match mode {
                Mode::Del => branch_deletion(&file.annotated.graph, k),
                Mode::Comp => branch_completion(&file.annotated, k),
            };
            match solution {
                Some(sol) => {
                    debug_assert!(matches!(
                        (mode, sol.mode),
                        (Mode::Del, EditMode::Deletion) | (Mode::Comp, EditMode::Completion)
                    ));
                    print_payload(
                        cli.json,
                        &SolvePayload {
                            feasible: true,
                            size: Some(sol.size()),
                            edits: Some(sol.edits.iter().map(|e| (e.0, e.1)).collect()),
                        },
                        describe_solution(&sol),
                    );
                    Ok(0)
                }
                None => {
                    print_payload(
                        cli.json,
                        &SolvePayload {
                            feasible: false,
                            size: None,
                            edits: None,
                        },
                        format!("infeasible within budget {k}"),
                    );
                    Ok(1)
                }
            }
        }
        Command::Gadget { kind, len, out } => {
            let mut host = AnnotatedGraph::new(Graph::new(0));
            let (kind_name, len_field) = match kind {
                GadgetKind::Prop => {
                    let handle = build_propagational(&mut host);
                    for (label, pair) in &handle.named {
                        host.name(label.clone(), *pair)?;
                    }
                    ("prop", None)
                }
                GadgetKind::Clone => {
                    let chain = build_cloning(&mut host, len)?;
                    for j in 1..=chain.len() {
                        host.name(format!("e{j}"), chain.chain_pair(j))?;
                    }
                    ("clone", Some(len))
                }
                GadgetKind::Dpc => {
                    let handle = build_disjoint_propagational(&mut host);
                    for (label, pair) in &handle.named {
                        host.name(label.clone(), *pair)?;
                    }
                    ("dpc", None)
                }
            };
            host.validate()?;
            if find_prison(&host.graph).is_some() {
                return Err(pfree::Error::StructuralAssumption(
                    "built gadget is not prison-free".into(),
                ));
            }
            write_file(&out, &gadget_file(&host, kind_name, len_field))?;
            println!(
                "{} gadget with {} vertices, {} forbidden pairs written to {}",
                kind_name,
                host.graph.vertex_count(),
                host.forbidden.len(),
                out.display()
            );
            Ok(0)
        }
        Command::ReduceVc { path, t, l, out } => {
            let file = load_file(&path)?;
            let vc = VCInstance::new(file.annotated.graph, t)?;
            let gi = reduce_vc_to_gap(&vc, l)?;
            gi.graph.validate()?;
            // Structural self-checks before writing: exactly one K4 and
            // none once the activation edge is removed.
            let k4s = enumerate_k4s(&gi.graph.graph);
            let act = Edge::new(gi.meta.activation.0, gi.meta.activation.1);
            let mut without = gi.graph.graph.clone();
            without.remove_edge(act);
            if k4s.len() != 1 || !enumerate_k4s(&without).is_empty() {
                return Err(pfree::Error::StructuralAssumption(
                    "gap instance failed its K4 self-checks".into(),
                ));
            }
            write_file(&out, &gi.to_file())?;
            println!(
                "gap instance with {} vertices, k = {}, g = {} written to {}",
                gi.graph.graph.vertex_count(),
                gi.k,
                gi.g,
                out.display()
            );
            Ok(0)
        }
        Command::Compose { paths, out } => {
            let mut instances = Vec::with_capacity(paths.len());
            for p in &paths {
                instances.push(GapInstance::from_file(&load_file(p)?)?);
            }
            let comp = compose(&instances)?;
            comp.graph.validate()?;
            write_file(&out, &comp.to_file())?;
            println!(
                "composition of {} instances (tree height {}) with {} vertices, k = {} written to {}",
                comp.meta.instances,
                comp.meta.height,
                comp.graph.graph.vertex_count(),
                comp.k,
                out.display()
            );
            Ok(0)
        }
        Command::Verify { suite, seed } => {
            let seed = seed.unwrap_or_else(seed_from_env);
            let reports = run_suite(&suite, seed).ok_or_else(|| {
                pfree::Error::InvalidParam(format!(
                    "unknown suite `{suite}`; expected structure, kernel, gadgets, reductions or all"
                ))
            })?;
            let mut all_pass = true;
            for r in &reports {
                println!(
                    "check `{}`: {} ({})",
                    r.name,
                    if r.pass { "PASS" } else { "FAIL" },
                    r.details
                );
                all_pass &= r.pass;
            }
            println!(
                "{}: {} of {} checks passed",
                suite,
                reports.iter().filter(|r| r.pass).count(),
                reports.len()
            );
            Ok(if all_pass { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
