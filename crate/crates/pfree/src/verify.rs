//! Seeded verification suites: corpus generators and the checks behind
//! the acceptance gate and the CLI `verify` subcommand.
//!
//! Every corpus is generated from an explicit seed (default
//! [`DEFAULT_SEED`], overridable via the `PFREE_SEED` environment
//! variable), so repeated runs are reproducible.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::annotated::AnnotatedGraph;
use crate::gadgets::{
    build_cloning, build_disjoint_propagational, build_forbidden_realization,
    build_propagational, compose, constructive_completion_from_cover, minimum_composable_ell,
    reduce_vc_to_gap, VCInstance,
};
use crate::graph::{Edge, EdgeSet, Graph, Vertex};
use crate::kernel::{apply_rr1, apply_rr2, apply_rr3, kernelize, KernelOutcome};
use crate::solve::{
    branch_completion, branch_deletion, brute_force_completion, brute_force_deletion,
    propagate_forced, verify_solution,
};
use crate::structure::{
    check_cmd4_properties, check_structure_theorem, enumerate_k4s, enumerate_prisons, has_prison,
};

/// Default corpus seed; override with the `PFREE_SEED` environment
/// variable.
pub const DEFAULT_SEED: u64 = 0x5eed_0001;

/// Reads `PFREE_SEED` or falls back to [`DEFAULT_SEED`].
pub fn seed_from_env() -> u64 {
    std::env::var("PFREE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

/// Outcome of one acceptance check.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub name: &'static str,
    pub pass: bool,
    pub details: String,
}

impl CheckReport {
    fn pass(name: &'static str, details: String) -> Self {
        CheckReport {
            name,
            pass: true,
            details,
        }
    }

    fn fail(name: &'static str, details: String) -> Self {
        CheckReport {
            name,
            pass: false,
            details,
        }
    }
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                g.insert_edge(Edge(u, v));
            }
        }
    }
    g
}

/// Random graph with a prison planted on five random vertices.
pub fn planted_prison_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    assert!(n >= 5);
    let mut g = random_graph(rng, n, p);
    let mut ids: Vec<Vertex> = (0..n).collect();
    ids.shuffle(rng);
    let vs = &ids[..5];
    for (i, &u) in vs.iter().enumerate() {
        for &v in &vs[i + 1..] {
            g.insert_edge(Edge::new(u, v));
        }
    }
    g.remove_edge(Edge::new(vs[0], vs[1]));
    g.remove_edge(Edge::new(vs[0], vs[2]));
    g
}

const DENSITIES: [f64; 3] = [0.3, 0.5, 0.7];

/// Mixed corpus of deletion instances: Erdős–Rényi graphs at the three
/// standard densities plus planted-prison variants, budgets cycling
/// through `0..=k_max`.
pub fn deletion_corpus(seed: u64, count: usize, n_max: usize, k_max: u64) -> Vec<(Graph, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let n = 5 + (i % (n_max - 4));
        let p = DENSITIES[i % 3];
        let g = if i % 3 == 2 {
            planted_prison_graph(&mut rng, n, p)
        } else {
            random_graph(&mut rng, n, p)
        };
        out.push((g, (i as u64) % (k_max + 1)));
    }
    out
}

/// Completion instances with a sprinkling of forbidden pairs.
pub fn completion_corpus(seed: u64, count: usize, n_max: usize) -> Vec<(AnnotatedGraph, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0_1f);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let n = 5 + (i % (n_max - 4));
        let p = DENSITIES[i % 3];
        let g = if i % 4 == 3 {
            planted_prison_graph(&mut rng, n, p)
        } else {
            random_graph(&mut rng, n, p)
        };
        let mut host = AnnotatedGraph::new(g);
        for e in host.graph.non_edges() {
            if rng.gen_bool(0.15) {
                host.forbid(e).expect("non-edge");
            }
        }
        out.push((host, i % 4));
    }
    out
}

/// Rejection-samples prison-free graphs.
pub fn prison_free_corpus(seed: u64, count: usize, n_max: usize) -> Vec<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf2ee);
    let mut out = Vec::with_capacity(count);
    let mut density = 0;
    while out.len() < count {
        let n = 5 + (out.len() + density) % (n_max - 4);
        let p = [0.2, 0.3, 0.4, 0.5][density % 4];
        density += 1;
        let g = random_graph(&mut rng, n, p);
        if !has_prison(&g) {
            out.push(g);
        }
    }
    out
}

/// All labeled graphs on `n` vertices, by edge-subset mask.
fn graph_from_mask(n: usize, mask: u64) -> Graph {
    let mut g = Graph::new(n);
    let mut bit = 0;
    for u in 0..n {
        for v in u + 1..n {
            if mask >> bit & 1 == 1 {
                g.insert_edge(Edge(u, v));
            }
            bit += 1;
        }
    }
    g
}

/// Criterion 1: the neighborhood condition on maximal >= 4-class
/// components is equivalent to prison-freeness, exhaustively on all
/// 2^15 labeled 6-vertex graphs and on 10,000 seeded graphs on 8-9
/// vertices.
pub fn criterion1_structure_equivalence(seed: u64) -> CheckReport {
    let name = "structure-theorem equivalence";
    let mut checked = 0usize;
    for mask in 0u64..1 << 15 {
        let g = graph_from_mask(6, mask);
        let (holds, _) = check_structure_theorem(&g);
        if holds != enumerate_prisons(&g).is_empty() {
            return CheckReport::fail(name, format!("mismatch on 6-vertex mask {mask}"));
        }
        checked += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..10_000 {
        let n = 8 + i % 2;
        let p = DENSITIES[i % 3];
        let g = random_graph(&mut rng, n, p);
        let (holds, _) = check_structure_theorem(&g);
        if holds != enumerate_prisons(&g).is_empty() {
            return CheckReport::fail(name, format!("mismatch on random graph #{i} (n = {n})"));
        }
        checked += 1;
    }
    CheckReport::pass(name, format!("{checked} graphs, 0 mismatches"))
}

/// Criterion 2: on sampled prison-free graphs, all decomposition
/// properties of the maximal >= 4-class components hold and every `K4`
/// lies in exactly one component.
pub fn criterion2_cmd4_decomposition(seed: u64) -> CheckReport {
    let name = "cmd4 decomposition";
    let corpus = prison_free_corpus(seed, 1_000, 10);
    for (i, g) in corpus.iter().enumerate() {
        let report = check_cmd4_properties(g);
        if !report.all_ok() {
            return CheckReport::fail(
                name,
                format!("graph #{i}: {}", report.violation.unwrap_or_default()),
            );
        }
        let components = crate::structure::cmd(g, 4).expect("p = 4 is valid");
        for k4 in enumerate_k4s(g) {
            let hosts = components
                .iter()
                .filter(|c| k4.iter().all(|&v| c.contains(v)))
                .count();
            if hosts != 1 {
                return CheckReport::fail(
                    name,
                    format!("graph #{i}: K4 {k4:?} lies in {hosts} components"),
                );
            }
        }
    }
    CheckReport::pass(name, format!("{} prison-free graphs", corpus.len()))
}

/// Criteria 3 and 4 in one sweep: kernelization preserves brute-force
/// feasibility on 1,000 seeded instances (plus 200 single-rule
/// isolation checks), and every kernel respects the explicit size
/// ledger.
pub fn kernel_checks(seed: u64) -> (CheckReport, CheckReport) {
    let equiv_name = "kernel equivalence";
    let ledger_name = "kernel size ledger";
    let corpus = deletion_corpus(seed, 1_000, 10, 3);
    let mut kernels = 0usize;
    for (i, (g, k)) in corpus.iter().enumerate() {
        let before = match brute_force_deletion(g, *k as usize) {
            Ok(sol) => sol.is_some(),
            Err(e) => {
                return (
                    CheckReport::fail(equiv_name, format!("instance #{i}: oracle guard: {e}")),
                    CheckReport::fail(ledger_name, "aborted".into()),
                )
            }
        };
        let outcome = match kernelize(g, *k) {
            Ok(o) => o,
            Err(e) => {
                return (
                    CheckReport::fail(equiv_name, format!("instance #{i}: kernelize: {e}")),
                    CheckReport::fail(ledger_name, "aborted".into()),
                )
            }
        };
        let after = match &outcome {
            KernelOutcome::NoInstance { .. } => false,
            KernelOutcome::Kernel(res) => {
                // Criterion 4: explicit size and family bounds.
                let s = res.modulator.len() as u128;
                if (res.graph.vertex_count() as u128) > res.size_bound()
                    || (res.family_size as u128) > s * s * s + s * s
                {
                    return (
                        CheckReport::fail(equiv_name, "aborted".into()),
                        CheckReport::fail(
                            ledger_name,
                            format!(
                                "instance #{i}: |V'| = {} vs bound {}, |F| = {}",
                                res.graph.vertex_count(),
                                res.size_bound(),
                                res.family_size
                            ),
                        ),
                    );
                }
                kernels += 1;
                brute_force_deletion(&res.graph, res.budget as usize)
                    .map(|sol| sol.is_some())
                    .unwrap_or(false)
            }
        };
        if before != after {
            return (
                CheckReport::fail(
                    equiv_name,
                    format!("instance #{i}: answer flipped {before} -> {after}"),
                ),
                CheckReport::fail(ledger_name, "aborted".into()),
            );
        }
    }

    // Single-rule isolation on a fresh sub-corpus.
    let isolation = deletion_corpus(seed ^ 0x150, 200, 10, 3);
    let mut fired = 0usize;
    for (i, (g, k)) in isolation.iter().enumerate() {
        let modulator = match crate::kernel::compute_modulator(g, *k) {
            Ok(crate::kernel::ModulatorOutcome::Modulator(m)) => m,
            Ok(crate::kernel::ModulatorOutcome::NoInstance { .. }) => continue,
            Err(e) => {
                return (
                    CheckReport::fail(equiv_name, format!("isolation #{i}: {e}")),
                    CheckReport::fail(ledger_name, "aborted".into()),
                )
            }
        };
        let s = &modulator.vertices;
        let (reduced, k_after) = match apply_rr1(g, s) {
            Ok(Some((h, _))) => (h, *k),
            _ => match apply_rr2(g, *k as i64, s) {
                Some((h, k2, _)) if k2 >= 0 => (h, k2 as u64),
                Some(_) => continue, // budget went negative: no-instance path
                None => match apply_rr3(g, s) {
                    Ok(Some((h, _))) => (h, *k),
                    _ => continue,
                },
            },
        };
        fired += 1;
        let before = brute_force_deletion(g, *k as usize).map(|s| s.is_some());
        let after = brute_force_deletion(&reduced, k_after as usize).map(|s| s.is_some());
        match (before, after) {
            (Ok(b), Ok(a)) if b == a => {}
            other => {
                return (
                    CheckReport::fail(
                        equiv_name,
                        format!("isolation #{i}: rule changed the answer: {other:?}"),
                    ),
                    CheckReport::fail(ledger_name, "aborted".into()),
                )
            }
        }
    }

    (
        CheckReport::pass(
            equiv_name,
            format!(
                "{} instances, {} isolated rule applications",
                corpus.len(),
                fired
            ),
        ),
        CheckReport::pass(ledger_name, format!("{kernels} kernels within bounds")),
    )
}

/// Criterion 5: branching solvers agree with the enumeration oracles on
/// feasibility and minimum size.
pub fn criterion5_solver_agreement(seed: u64) -> CheckReport {
    let name = "solver agreement";
    let deletions = deletion_corpus(seed ^ 0xde1, 500, 10, 3);
    for (i, (g, k)) in deletions.iter().enumerate() {
        let brute = match brute_force_deletion(g, *k as usize) {
            Ok(b) => b,
            Err(e) => return CheckReport::fail(name, format!("deletion #{i}: {e}")),
        };
        let branch = branch_deletion(g, *k as usize);
        let agree = match (&brute, &branch) {
            (None, None) => true,
            (Some(a), Some(b)) => a.size() == b.size(),
            _ => false,
        };
        if !agree {
            return CheckReport::fail(name, format!("deletion #{i}: solvers disagree"));
        }
    }
    let completions = completion_corpus(seed ^ 0xc09, 200, 8);
    for (i, (host, cap)) in completions.iter().enumerate() {
        let brute = match brute_force_completion(host, *cap) {
            Ok(b) => b,
            Err(e) => return CheckReport::fail(name, format!("completion #{i}: {e}")),
        };
        let branch = branch_completion(host, *cap);
        let agree = match (&brute, &branch) {
            (None, None) => true,
            (Some(a), Some(b)) => {
                a.size() == b.size() && b.edits.iter().all(|e| !host.is_forbidden(e))
            }
            _ => false,
        };
        if !agree {
            return CheckReport::fail(name, format!("completion #{i}: solvers disagree"));
        }
    }
    CheckReport::pass(
        name,
        format!("{} deletion + {} completion instances", deletions.len(), completions.len()),
    )
}

/// Criterion 6: the gadget lemmas, checked exhaustively.
pub fn criterion6_gadget_lemmas() -> CheckReport {
    let name = "gadget lemmas";

    // (a) Propagational property over all 2^3 completions.
    let mut host = AnnotatedGraph::new(Graph::new(0));
    let prop = build_propagational(&mut host);
    let (e1, e2, e3) = (prop.pair("e1"), prop.pair("e2"), prop.pair("e3"));
    if has_prison(&host.graph) {
        return CheckReport::fail(name, "propagational component is not prison-free".into());
    }
    for mask in 0u8..8 {
        let mut g = host.graph.clone();
        let picked: Vec<Edge> = [e1, e2, e3]
            .into_iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, e)| e)
            .collect();
        for e in &picked {
            g.insert_edge(*e);
        }
        if !has_prison(&g) && picked.contains(&e1) && !picked.contains(&e2) && !picked.contains(&e3)
        {
            return CheckReport::fail(name, format!("propagation fails for mask {mask}"));
        }
    }

    // (b) Cloning forcing for lengths 4, 6, 8.
    for ell in [4usize, 6, 8] {
        let mut host = AnnotatedGraph::new(Graph::new(0));
        let chain = build_cloning(&mut host, ell).expect("valid length");
        let state = match propagate_forced(&host, &EdgeSet::from_iter([chain.chain_pair(1)])) {
            Ok(s) => s,
            Err(e) => return CheckReport::fail(name, format!("cloning {ell}: {e}")),
        };
        if state.conflict {
            return CheckReport::fail(name, format!("cloning {ell}: unexpected conflict"));
        }
        for j in 1..=ell {
            if !state.added.contains(&chain.chain_pair(j)) {
                return CheckReport::fail(name, format!("cloning {ell}: pair {j} not forced"));
            }
        }
    }

    // (c) Forbidden-pair realization, oracle-equivalent at k = 1 on a
    // 7-vertex host (a prison plus two spare vertices).
    let base = {
        let mut g = crate::graph::prison_graph();
        g.add_vertices(2);
        g
    };
    let mut symbolic = AnnotatedGraph::new(base.clone());
    symbolic.forbid(Edge(0, 1)).expect("non-edge");
    let mut realized = AnnotatedGraph::new(base);
    build_forbidden_realization(&mut realized, 0, 1, 1).expect("valid pair");
    let sym_min = brute_force_completion(&symbolic, 3).ok().flatten();
    let real_min = brute_force_completion(&realized, 3).ok().flatten();
    match (&sym_min, &real_min) {
        (Some(a), Some(b)) if a.edits == b.edits && !a.edits.contains(&Edge(0, 1)) => {}
        other => {
            return CheckReport::fail(name, format!("realization minima disagree: {other:?}"))
        }
    }
    let mut forced = realized.clone();
    forced.graph.insert_edge(Edge(0, 1));
    if brute_force_completion(&forced, 1).ok().flatten().is_some() {
        return CheckReport::fail(name, "realized pair can be bought within budget".into());
    }

    // (d) Disjoint propagational component: pairwise vertex-disjoint
    // interface pairs; both outputs forbidden conflicts.
    let mut host = AnnotatedGraph::new(Graph::new(0));
    let dpc = build_disjoint_propagational(&mut host);
    let (e1, e2, e3) = (dpc.pair("e1"), dpc.pair("e2"), dpc.pair("e3"));
    if e1.shares_vertex(&e2) || e1.shares_vertex(&e3) || e2.shares_vertex(&e3) {
        return CheckReport::fail(name, "interface pairs share a vertex".into());
    }
    let mut blocked = host.clone();
    blocked.forbid(e2).expect("non-edge");
    blocked.forbid(e3).expect("non-edge");
    match propagate_forced(&blocked, &EdgeSet::from_iter([e1])) {
        Ok(state) if state.conflict => {}
        other => return CheckReport::fail(name, format!("no conflict: {other:?}")),
    }

    CheckReport::pass(name, "propagational, cloning, realization, disjoint".into())
}

/// Criterion 7: the gap reduction on the complete cubic graph with
/// chain length 6: unique `K4`, `K4`-freeness without the activation
/// edge, and a certified constructive completion from a size-3 cover.
pub fn criterion7_gap_reduction() -> CheckReport {
    let name = "gap reduction";
    let vc = match VCInstance::new(Graph::complete(4), 3) {
        Ok(vc) => vc,
        Err(e) => return CheckReport::fail(name, e.to_string()),
    };
    let gi = match reduce_vc_to_gap(&vc, 6) {
        Ok(gi) => gi,
        Err(e) => return CheckReport::fail(name, e.to_string()),
    };
    let k4s = enumerate_k4s(&gi.graph.graph);
    let act = Edge::new(gi.meta.activation.0, gi.meta.activation.1);
    if k4s.len() != 1 || !(k4s[0].contains(&act.0) && k4s[0].contains(&act.1)) {
        return CheckReport::fail(name, format!("{} K4s instead of one", k4s.len()));
    }
    let mut without = gi.graph.graph.clone();
    without.remove_edge(act);
    if !enumerate_k4s(&without).is_empty() {
        return CheckReport::fail(name, "K4 remains without the activation edge".into());
    }
    let sol = match constructive_completion_from_cover(&gi, &[0, 1, 2]) {
        Ok(sol) => sol,
        Err(e) => return CheckReport::fail(name, e.to_string()),
    };
    match verify_solution(&gi.graph, &sol) {
        Ok(true) => {}
        other => return CheckReport::fail(name, format!("completion not verified: {other:?}")),
    }
    // |A| within [13*18^2/4 - 9*18, 13*18^2/4 + 36*3*6*7 + 144*49].
    let lower = 13 * 18 * 18 / 4 - 9 * 18;
    let upper = 13 * 18 * 18 / 4 + 36 * 3 * 6 * 7 + 144 * 49;
    let size = sol.size() as u64;
    if size < lower || size > upper {
        return CheckReport::fail(
            name,
            format!("completion size {size} outside [{lower}, {upper}]"),
        );
    }
    CheckReport::pass(
        name,
        format!("unique K4, K4-free without activation, |A| = {size} in [{lower}, {upper}]"),
    )
}

/// Criterion 8: composition wiring for two and three instances, and
/// forced propagation from the root to each leaf's activation pair when
/// the other branches are pruned.
pub fn criterion8_composition() -> CheckReport {
    let name = "composition wiring";
    let vc = match VCInstance::new(Graph::complete(4), 3) {
        Ok(vc) => vc,
        Err(e) => return CheckReport::fail(name, e.to_string()),
    };
    for t in [2usize, 3] {
        let ell = minimum_composable_ell(3, 6, t);
        let gi = match reduce_vc_to_gap(&vc, ell) {
            Ok(gi) => gi,
            Err(e) => return CheckReport::fail(name, e.to_string()),
        };
        let comp = match compose(&vec![gi; t]) {
            Ok(c) => c,
            Err(e) => return CheckReport::fail(name, e.to_string()),
        };
        let h = comp.meta.height;
        let expected_unused = (1usize << h) - t;
        if comp.meta.node_dpcs.len() != (1 << h) - 1
            || comp.meta.unused_outputs.len() != expected_unused
        {
            return CheckReport::fail(name, format!("tree shape wrong for t = {t}"));
        }
        for (u, v) in &comp.meta.unused_outputs {
            if !comp.graph.is_forbidden(&Edge::new(*u, *v)) {
                return CheckReport::fail(name, format!("unused output {u}-{v} not forbidden"));
            }
        }
        let root = Edge::new(comp.meta.root_edge.0, comp.meta.root_edge.1);
        if !comp.graph.graph.contains(&root) {
            return CheckReport::fail(name, "root input edge missing".into());
        }
        for leaf in 0..t {
            let mut pruned = comp.graph.clone();
            let mut node = (1 << h) + leaf;
            while node > 1 {
                let parent = node / 2;
                if pruned
                    .forbid(comp.prune_pair(parent, node % 2 == 0))
                    .is_err()
                {
                    return CheckReport::fail(name, "prune pair is an edge".into());
                }
                node = parent;
            }
            let state = match propagate_forced(&pruned, &EdgeSet::new()) {
                Ok(s) => s,
                Err(e) => return CheckReport::fail(name, format!("t = {t}, leaf {leaf}: {e}")),
            };
            let act = comp.meta.leaf_activations[leaf];
            if state.conflict || !state.added.contains(&Edge::new(act.0, act.1)) {
                return CheckReport::fail(
                    name,
                    format!("t = {t}: activation of leaf {leaf} not forced"),
                );
            }
        }
    }
    CheckReport::pass(name, "t = 2 and t = 3 trees wired and propagated".into())
}

/// Runs a named suite: `structure`, `kernel`, `gadgets`, `reductions`,
/// or `all`.
pub fn run_suite(suite: &str, seed: u64) -> Option<Vec<CheckReport>> {
    let mut reports = Vec::new();
    match suite {
        "structure" => {
            reports.push(criterion1_structure_equivalence(seed));
            reports.push(criterion2_cmd4_decomposition(seed));
        }
        "kernel" => {
            let (a, b) = kernel_checks(seed);
            reports.push(a);
            reports.push(b);
            reports.push(criterion5_solver_agreement(seed));
        }
        "gadgets" => {
            reports.push(criterion6_gadget_lemmas());
        }
        "reductions" => {
            reports.push(criterion7_gap_reduction());
            reports.push(criterion8_composition());
        }
        "all" => {
            for name in ["structure", "kernel", "gadgets", "reductions"] {
                reports.extend(run_suite(name, seed).expect("known suite"));
            }
        }
        _ => return None,
    }
    Some(reports)
}
