//! Exact solvers and propagation oracles: enumeration brute force for
//! deletion and completion, bounded-depth branching for both, and the
//! forced-edge closure used to verify gadget behavior.
//!
//! The brute-force solvers are deliberately dumb and serve as the
//! correctness oracles everything else is checked against; they fail
//! loudly via explicit candidate-count guards instead of timing out.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::annotated::AnnotatedGraph;
use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeSet, Graph};
use crate::structure::{find_prison, has_prison};

/// Whether a solution deletes existing edges or adds non-edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EditMode {
    Deletion,
    Completion,
}

/// An edit set making the instance graph prison-free.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub edits: EdgeSet,
    pub mode: EditMode,
}

impl Solution {
    pub fn size(&self) -> usize {
        self.edits.len()
    }
}

/// Refuses deletion brute force past this many candidate subsets.
pub const DELETION_CANDIDATE_GUARD: u64 = 10_000_000;
/// Refuses completion brute force past this many candidate subsets.
pub const COMPLETION_CANDIDATE_GUARD: u64 = 1 << 24;

/// Number of subsets of size at most `k` of an `m`-element set,
/// saturating at `u64::MAX`.
fn candidate_count(m: usize, k: usize) -> u64 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for i in 0..=k.min(m) {
        if i > 0 {
            binom = binom.saturating_mul((m - i + 1) as u128) / i as u128;
        }
        total = total.saturating_add(binom);
        if total > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    total as u64
}

/// Minimum-cardinality prison-free deletion set of size at most `k`,
/// lexicographically smallest among the minima, by exhaustive
/// enumeration in size-ascending order.
pub fn brute_force_deletion(g: &Graph, k: usize) -> Result<Option<Solution>> {
    let edges = g.edges();
    let candidates = candidate_count(edges.len(), k);
    if candidates > DELETION_CANDIDATE_GUARD {
        return Err(Error::GuardExceeded {
            guard: "deletion-candidates",
            limit: DELETION_CANDIDATE_GUARD,
            actual: candidates,
        });
    }
    for size in 0..=k.min(edges.len()) {
        for combo in edges.iter().combinations(size) {
            let mut h = g.clone();
            for e in &combo {
                h.remove_edge(**e);
            }
            if !has_prison(&h) {
                return Ok(Some(Solution {
                    edits: combo.into_iter().copied().collect(),
                    mode: EditMode::Deletion,
                }));
            }
        }
    }
    Ok(None)
}

fn branch_deletion_at_depth(g: &Graph, depth: usize) -> Option<Vec<Edge>> {
    let witness = match find_prison(g) {
        None => return Some(Vec::new()),
        Some(w) => w,
    };
    if depth == 0 {
        return None;
    }
    for e in witness.edges(g) {
        let mut h = g.clone();
        h.remove_edge(e);
        if let Some(mut rest) = branch_deletion_at_depth(&h, depth - 1) {
            rest.push(e);
            return Some(rest);
        }
    }
    None
}

/// Bounded branching on the 8 edges of the canonical prison witness,
/// with iterative deepening so the reported solution size is the true
/// minimum. `None` is authoritative: no solution of size <= `k` exists.
pub fn branch_deletion(g: &Graph, k: usize) -> Option<Solution> {
    for depth in 0..=k {
        if let Some(edits) = branch_deletion_at_depth(g, depth) {
            return Some(Solution {
                edits: edits.into_iter().collect(),
                mode: EditMode::Deletion,
            });
        }
    }
    None
}

fn branch_completion_at_depth(
    g: &Graph,
    host: &AnnotatedGraph,
    depth: usize,
) -> Option<Vec<Edge>> {
    let witness = match find_prison(g) {
        None => return Some(Vec::new()),
        Some(w) => w,
    };
    if depth == 0 {
        return None;
    }
    // A prison has exactly two non-edges, so the branching factor is at
    // most 2; forbidden pairs are skipped, and a prison with both
    // non-edges forbidden prunes the branch.
    for e in witness.non_edges {
        if host.is_forbidden(&e) {
            continue;
        }
        let mut h = g.clone();
        h.insert_edge(e);
        if let Some(mut rest) = branch_completion_at_depth(&h, host, depth - 1) {
            rest.push(e);
            return Some(rest);
        }
    }
    None
}

/// Minimum prison-free completion of size at most `k` avoiding the
/// forbidden pairs, by branching on the two non-edges of the canonical
/// prison witness with iterative deepening on the solution size.
pub fn branch_completion(host: &AnnotatedGraph, k: usize) -> Option<Solution> {
    for depth in 0..=k {
        if let Some(edits) = branch_completion_at_depth(&host.graph, host, depth) {
            return Some(Solution {
                edits: edits.into_iter().collect(),
                mode: EditMode::Completion,
            });
        }
    }
    None
}

/// Minimum prison-free completion avoiding forbidden pairs, of size at
/// most `cap`, by exhaustive enumeration; the oracle for every gadget
/// lemma check.
pub fn brute_force_completion(host: &AnnotatedGraph, cap: usize) -> Result<Option<Solution>> {
    let allowed = host.allowed_non_edges();
    let candidates = candidate_count(allowed.len(), cap);
    if candidates > COMPLETION_CANDIDATE_GUARD {
        return Err(Error::GuardExceeded {
            guard: "completion-candidates",
            limit: COMPLETION_CANDIDATE_GUARD,
            actual: candidates,
        });
    }
    for size in 0..=cap.min(allowed.len()) {
        for combo in allowed.iter().combinations(size) {
            let mut h = host.graph.clone();
            for e in &combo {
                h.insert_edge(**e);
            }
            if !has_prison(&h) {
                return Ok(Some(Solution {
                    edits: combo.into_iter().copied().collect(),
                    mode: EditMode::Completion,
                }));
            }
        }
    }
    Ok(None)
}

/// Outcome of the forced-edge closure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropagationState {
    /// Committed additions, a subset of every prison-free completion
    /// that contains the seed.
    pub added: EdgeSet,
    /// Set when some prison arose whose both non-edges are forbidden.
    pub conflict: bool,
}

/// Probes give up after this many unit-closure rounds. Activating one
/// cloning chain of a gap instance forces a quadratic cascade of
/// additions, so deep probing is intractable; a capped probe only
/// loses forcing power, never soundness.
pub const PROBE_ROUND_LIMIT: usize = 4;

enum ClosureEnd {
    Conflict,
    Fixpoint,
    Capped,
}

/// Unit closure: add the other non-edge of every prison with one
/// forbidden non-edge, until a fixpoint, a conflict (a prison with both
/// non-edges forbidden), or the optional round cap.
fn unit_closure(
    host: &AnnotatedGraph,
    g: &mut Graph,
    added: &mut EdgeSet,
    round_limit: Option<usize>,
) -> ClosureEnd {
    let mut rounds = 0;
    loop {
        if let Some(limit) = round_limit {
            if rounds >= limit {
                return ClosureEnd::Capped;
            }
        }
        rounds += 1;
        let mut forced: Vec<Edge> = Vec::new();
        for prison in crate::structure::enumerate_prisons(g) {
            let [e, f] = prison.non_edges;
            match (host.is_forbidden(&e), host.is_forbidden(&f)) {
                (true, true) => return ClosureEnd::Conflict,
                (true, false) => forced.push(f),
                (false, true) => forced.push(e),
                (false, false) => {}
            }
        }
        let mut changed = false;
        for e in forced {
            if added.insert(e) {
                g.insert_edge(e);
                changed = true;
            }
        }
        if !changed {
            return ClosureEnd::Fixpoint;
        }
    }
}

/// Closure of `seed` under the rule: if the current graph contains a
/// prison with one non-edge forbidden, the other non-edge must be
/// added. When that stalls, each undetermined non-edge is probed with a
/// capped unit closure; a probe that runs into a conflict forces the
/// prison's other non-edge.
///
/// Sound but incomplete: every addition belongs to every prison-free
/// completion that contains the seed, but the closure may stop before
/// deciding pairs a full search would settle (in particular, probes
/// stop after [`PROBE_ROUND_LIMIT`] rounds).
pub fn propagate_forced(host: &AnnotatedGraph, seed: &EdgeSet) -> Result<PropagationState> {
    for e in seed.iter() {
        if host.graph.contains(e) {
            return Err(Error::AlreadyAnEdge { u: e.0, v: e.1 });
        }
        if host.is_forbidden(e) {
            return Err(Error::ForbiddenPair { u: e.0, v: e.1 });
        }
    }
    let mut g = host.graph.clone();
    let mut added = seed.clone();
    for e in seed.iter() {
        g.insert_edge(*e);
    }
    loop {
        match unit_closure(host, &mut g, &mut added, None) {
            ClosureEnd::Conflict => {
                return Ok(PropagationState {
                    added,
                    conflict: true,
                })
            }
            ClosureEnd::Fixpoint => {}
            ClosureEnd::Capped => unreachable!("main closure is uncapped"),
        }
        let mut progressed = false;
        'probe: for prison in crate::structure::enumerate_prisons(&g) {
            let [x, y] = prison.non_edges;
            if host.is_forbidden(&x) || host.is_forbidden(&y) {
                continue; // handled by the unit rule
            }
            for (probe, other) in [(x, y), (y, x)] {
                let mut pg = g.clone();
                pg.insert_edge(probe);
                let mut pa = added.clone();
                pa.insert(probe);
                if matches!(
                    unit_closure(host, &mut pg, &mut pa, Some(PROBE_ROUND_LIMIT)),
                    ClosureEnd::Conflict
                ) {
                    added.insert(other);
                    g.insert_edge(other);
                    progressed = true;
                    break 'probe;
                }
            }
        }
        if !progressed {
            return Ok(PropagationState {
                added,
                conflict: false,
            });
        }
    }
}

/// Checks a solution against its instance: edits must be valid for the
/// mode, the edited graph must be prison-free, and completions must not
/// touch forbidden pairs.
pub fn verify_solution(host: &AnnotatedGraph, sol: &Solution) -> Result<bool> {
    match sol.mode {
        EditMode::Deletion => {
            let edited = host.graph.apply_edits(&sol.edits, &EdgeSet::new())?;
            Ok(!has_prison(&edited))
        }
        EditMode::Completion => {
            let edited = host.graph.apply_edits(&EdgeSet::new(), &sol.edits)?;
            if sol.edits.iter().any(|e| host.is_forbidden(e)) {
                return Ok(false);
            }
            Ok(!has_prison(&edited))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::prison_graph;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
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

    #[test]
    fn brute_force_deletion_on_prison() {
        let p = prison_graph();
        let sol = brute_force_deletion(&p, 1).unwrap().unwrap();
        assert_eq!(sol.size(), 1);
        let edited = p.apply_edits(&sol.edits, &EdgeSet::new()).unwrap();
        assert!(!has_prison(&edited));

        assert!(brute_force_deletion(&p, 0).unwrap().is_none());
    }

    #[test]
    fn branch_deletion_cases() {
        let sol = branch_deletion(&Graph::complete(6), 0).unwrap();
        assert_eq!(sol.size(), 0);
        assert!(branch_deletion(&prison_graph(), 1).is_some());
        assert!(branch_deletion(&prison_graph(), 0).is_none());
    }

    #[test]
    fn deletion_solvers_agree_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..60 {
            let n = rng.gen_range(5..9);
            let p = rng.gen_range(0.3..0.8);
            let g = random_graph(&mut rng, n, p);
            let k = rng.gen_range(0..3);
            let brute = brute_force_deletion(&g, k).unwrap();
            let branch = branch_deletion(&g, k);
            match (&brute, &branch) {
                (None, None) => {}
                (Some(a), Some(b)) => assert_eq!(a.size(), b.size()),
                other => panic!("solvers disagree: {other:?}"),
            }
        }
    }

    #[test]
    fn completion_on_prison() {
        let host = AnnotatedGraph::new(prison_graph());
        let sol = branch_completion(&host, 1).unwrap();
        assert_eq!(sol.size(), 1);
        let e = *sol.edits.iter().next().unwrap();
        assert!(e == Edge(0, 1) || e == Edge(0, 2));

        let mut blocked = AnnotatedGraph::new(prison_graph());
        blocked.forbid(Edge(0, 1)).unwrap();
        blocked.forbid(Edge(0, 2)).unwrap();
        assert!(branch_completion(&blocked, 5).is_none());
        assert!(brute_force_completion(&blocked, 5).unwrap().is_none());
    }

    #[test]
    fn brute_force_completion_cases() {
        // Complete multipartite graphs are already prison-free.
        let mut g = Graph::new(6);
        let parts = [vec![0, 1], vec![2, 3], vec![4], vec![5]];
        for (i, a) in parts.iter().enumerate() {
            for b in &parts[i + 1..] {
                for &u in a {
                    for &v in b {
                        g.insert_edge(Edge::new(u, v));
                    }
                }
            }
        }
        let sol = brute_force_completion(&AnnotatedGraph::new(g), 2)
            .unwrap()
            .unwrap();
        assert_eq!(sol.size(), 0);

        let sol = brute_force_completion(&AnnotatedGraph::new(prison_graph()), 2)
            .unwrap()
            .unwrap();
        assert_eq!(sol.size(), 1);
    }

    #[test]
    fn completion_solvers_agree_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        for _ in 0..40 {
            let n = rng.gen_range(5..8);
            let p = rng.gen_range(0.4..0.8);
            let g = random_graph(&mut rng, n, p);
            let mut host = AnnotatedGraph::new(g);
            for e in host.graph.non_edges() {
                if rng.gen_bool(0.2) {
                    host.forbid(e).unwrap();
                }
            }
            let cap = rng.gen_range(0..4);
            let brute = brute_force_completion(&host, cap).unwrap();
            let branch = branch_completion(&host, cap);
            match (&brute, &branch) {
                (None, None) => {}
                (Some(a), Some(b)) => {
                    assert_eq!(a.size(), b.size());
                    assert!(b.edits.iter().all(|e| !host.is_forbidden(e)));
                }
                other => panic!("solvers disagree: {other:?}"),
            }
        }
    }

    #[test]
    fn propagation_forces_the_other_non_edge() {
        let mut host = AnnotatedGraph::new(prison_graph());
        host.forbid(Edge(0, 1)).unwrap();
        let state = propagate_forced(&host, &EdgeSet::new()).unwrap();
        assert!(!state.conflict);
        assert!(state.added.contains(&Edge(0, 2)));
        assert_eq!(state.added.len(), 1);
    }

    #[test]
    fn propagation_detects_conflict() {
        let mut host = AnnotatedGraph::new(prison_graph());
        host.forbid(Edge(0, 1)).unwrap();
        host.forbid(Edge(0, 2)).unwrap();
        let state = propagate_forced(&host, &EdgeSet::new()).unwrap();
        assert!(state.conflict);
    }

    #[test]
    fn propagation_rejects_bad_seeds() {
        let mut host = AnnotatedGraph::new(prison_graph());
        host.forbid(Edge(0, 1)).unwrap();
        assert!(propagate_forced(&host, &EdgeSet::from_iter([Edge(3, 4)])).is_err());
        assert!(propagate_forced(&host, &EdgeSet::from_iter([Edge(0, 1)])).is_err());
    }

    #[test]
    fn propagation_is_sound_against_the_oracle() {
        // Every minimum completion extending the seed must contain the
        // closure.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let n = rng.gen_range(5..8);
            let g = random_graph(&mut rng, n, 0.6);
            let mut host = AnnotatedGraph::new(g);
            let non = host.graph.non_edges();
            for e in &non {
                if rng.gen_bool(0.25) {
                    host.forbid(*e).unwrap();
                }
            }
            let state = match propagate_forced(&host, &EdgeSet::new()) {
                Ok(s) => s,
                Err(_) => continue,
            };
            if state.conflict {
                // No completion exists at all.
                assert!(brute_force_completion(&host, non.len()).unwrap().is_none());
                continue;
            }
            if let Some(sol) = brute_force_completion(&host, non.len()).unwrap() {
                for e in state.added.iter() {
                    assert!(sol.edits.contains(e), "closure edge {e} missing from minimum");
                }
            }
        }
    }

    #[test]
    fn verify_solution_cases() {
        let host = AnnotatedGraph::new(Graph::complete(6));
        let empty = Solution {
            edits: EdgeSet::new(),
            mode: EditMode::Deletion,
        };
        assert!(verify_solution(&host, &empty).unwrap());

        // Wrong-mode edits: deleting a non-edge is an error.
        let host = AnnotatedGraph::new(prison_graph());
        let bad = Solution {
            edits: EdgeSet::from_iter([Edge(0, 1)]),
            mode: EditMode::Deletion,
        };
        assert!(verify_solution(&host, &bad).is_err());

        // Completion touching a forbidden pair verifies false.
        let mut blocked = AnnotatedGraph::new(prison_graph());
        blocked.forbid(Edge(0, 1)).unwrap();
        let touches = Solution {
            edits: EdgeSet::from_iter([Edge(0, 1)]),
            mode: EditMode::Completion,
        };
        assert!(!verify_solution(&blocked, &touches).unwrap());
    }

    #[test]
    fn guards_fail_loudly() {
        let g = Graph::complete(40);
        match brute_force_deletion(&g, 12) {
            Err(Error::GuardExceeded { guard, .. }) => {
                assert_eq!(guard, "deletion-candidates")
            }
            other => panic!("expected guard error, got {other:?}"),
        }
    }
}
