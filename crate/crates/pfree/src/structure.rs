//! Recognition of prisons and their strict supergraphs, enumeration of
//! maximal complete multipartite components, and checks for the
//! characterization of prison-free graphs.
//!
//! A *prison* is the 5-vertex graph `K5` minus two adjacent edges: 8
//! edges and exactly two non-edges sharing a vertex. Its 4-vertex induced
//! subgraphs are `K4`, the diamond and the paw, so every prison contains
//! exactly one `K4`, and a prison is equivalently a `K4` plus an apex
//! adjacent to exactly two of its vertices. That equivalence drives the
//! enumeration below.

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Vertex};

/// Classification of a 5-vertex induced subgraph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FiveKind {
    /// Exactly 8 induced edges whose two non-edges share a vertex.
    Prison,
    /// `K5` or `K5` minus one edge: a proper supergraph of a prison.
    StrictSupergraph,
    Other,
}

/// Result of classifying a 5-vertex subset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiveClass {
    /// The five ids, sorted; classification is invariant under input order.
    pub vertices: [Vertex; 5],
    pub kind: FiveKind,
    /// Induced non-edge pairs, canonically ordered; empty for `Other`.
    pub non_edges: Vec<Edge>,
}

/// A 5-vertex set inducing a prison, with its two non-edges.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrisonWitness {
    pub vertices: [Vertex; 5],
    pub non_edges: [Edge; 2],
}

impl PrisonWitness {
    /// The 8 induced edges of the prison, canonical order.
    pub fn edges(&self, g: &Graph) -> Vec<Edge> {
        let mut out = Vec::with_capacity(8);
        for (i, &u) in self.vertices.iter().enumerate() {
            for &v in &self.vertices[i + 1..] {
                if g.has_edge(u, v) {
                    out.push(Edge::new(u, v));
                }
            }
        }
        out
    }
}

/// Classifies the induced subgraph on five distinct vertices.
pub fn classify_five(g: &Graph, vs: &[Vertex; 5]) -> Result<FiveClass> {
    let mut sorted = *vs;
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicateVertex(w[0]));
        }
    }
    if sorted[4] >= g.vertex_count() {
        return Err(Error::VertexOutOfRange {
            vertex: sorted[4],
            n: g.vertex_count(),
        });
    }
    let mut non_edges = Vec::new();
    for (i, &u) in sorted.iter().enumerate() {
        for &v in &sorted[i + 1..] {
            if !g.has_edge(u, v) {
                non_edges.push(Edge(u, v));
                if non_edges.len() > 2 {
                    return Ok(FiveClass {
                        vertices: sorted,
                        kind: FiveKind::Other,
                        non_edges: Vec::new(),
                    });
                }
            }
        }
    }
    let kind = match non_edges.len() {
        0 | 1 => FiveKind::StrictSupergraph,
        2 if non_edges[0].shares_vertex(&non_edges[1]) => FiveKind::Prison,
        _ => FiveKind::Other,
    };
    if kind == FiveKind::Other {
        non_edges.clear();
    }
    Ok(FiveClass {
        vertices: sorted,
        kind,
        non_edges,
    })
}

/// All `K4`s of `g` within `mask`, each exactly once as a sorted 4-tuple.
///
/// A `K4 {u,v,w,x}` with `u < v < w < x` is reported from its
/// lexicographically smallest edge `u-v`.
fn k4s_masked(g: &Graph, mask: &FixedBitSet) -> Vec<[Vertex; 4]> {
    let mut out = Vec::new();
    let n = g.vertex_count();
    let mut cn = FixedBitSet::with_capacity(n);
    for u in mask.ones() {
        for v in g.neighbors(u) {
            if v <= u || !mask.contains(v) {
                continue;
            }
            cn.clear();
            cn.union_with(g.neighbor_row(u));
            cn.intersect_with(g.neighbor_row(v));
            cn.intersect_with(mask);
            let cand: Vec<Vertex> = cn.ones().filter(|&w| w > v).collect();
            for (i, &w) in cand.iter().enumerate() {
                for &x in &cand[i + 1..] {
                    if g.has_edge(w, x) {
                        out.push([u, v, w, x]);
                    }
                }
            }
        }
    }
    out
}

fn full_mask(n: usize) -> FixedBitSet {
    let mut m = FixedBitSet::with_capacity(n);
    m.insert_range(..);
    m
}

/// All `K4`s of `g`, each exactly once.
pub fn enumerate_k4s(g: &Graph) -> Vec<[Vertex; 4]> {
    k4s_masked(g, &full_mask(g.vertex_count()))
}

fn prison_from_k4(g: &Graph, k4: [Vertex; 4], apex: Vertex) -> PrisonWitness {
    let mut vertices = [k4[0], k4[1], k4[2], k4[3], apex];
    vertices.sort_unstable();
    let mut non: Vec<Edge> = k4
        .iter()
        .filter(|&&u| !g.has_edge(u, apex))
        .map(|&u| Edge::new(u, apex))
        .collect();
    non.sort();
    PrisonWitness {
        vertices,
        non_edges: [non[0], non[1]],
    }
}

/// All prisons of `g`, in lexicographic order of their vertex sets.
///
/// Every prison contains exactly one `K4`, so scanning each `K4` for
/// apexes with exactly two neighbors in it reports each prison once.
/// Apex candidates are restricted to the neighbors of the `K4`.
pub fn enumerate_prisons(g: &Graph) -> Vec<PrisonWitness> {
    let mut out = Vec::new();
    let mut cand = FixedBitSet::with_capacity(g.vertex_count());
    for k4 in enumerate_k4s(g) {
        cand.clear();
        for &u in &k4 {
            cand.union_with(g.neighbor_row(u));
        }
        for apex in cand.ones() {
            if k4.contains(&apex) {
                continue;
            }
            let deg = k4.iter().filter(|&&u| g.has_edge(u, apex)).count();
            if deg == 2 {
                out.push(prison_from_k4(g, k4, apex));
            }
        }
    }
    out.sort();
    out
}

/// Whether `g` contains any prison; early-exits on the first witness.
pub fn has_prison(g: &Graph) -> bool {
    let n = g.vertex_count();
    let mut cn = FixedBitSet::with_capacity(n);
    let mut apex_cand = FixedBitSet::with_capacity(n);
    for u in 0..n {
        for v in g.neighbors(u) {
            if v <= u {
                continue;
            }
            cn.clear();
            cn.union_with(g.neighbor_row(u));
            cn.intersect_with(g.neighbor_row(v));
            let cand: Vec<Vertex> = cn.ones().filter(|&w| w > v).collect();
            for (i, &w) in cand.iter().enumerate() {
                for &x in &cand[i + 1..] {
                    if !g.has_edge(w, x) {
                        continue;
                    }
                    let k4 = [u, v, w, x];
                    apex_cand.clear();
                    for &y in &k4 {
                        apex_cand.union_with(g.neighbor_row(y));
                    }
                    for apex in apex_cand.ones() {
                        if k4.contains(&apex) {
                            continue;
                        }
                        if k4.iter().filter(|&&y| g.has_edge(y, apex)).count() == 2 {
                            return true;
                        }
                    }
                }
            }
        }
    }
    false
}

pub fn is_prison_free(g: &Graph) -> bool {
    !has_prison(g)
}

/// The lexicographically smallest 5-subset inducing a prison, or `None`
/// exactly when `g` is prison-free.
pub fn find_prison(g: &Graph) -> Option<PrisonWitness> {
    enumerate_prisons(g).into_iter().next()
}

/// Whether some 5-subset containing both endpoints of `e` induces `K5`
/// or `K5` minus one edge. A prison itself does not count.
pub fn edge_in_strict_supergraph(g: &Graph, e: Edge) -> Result<bool> {
    if !g.contains(&e) {
        return Err(Error::NotAnEdge { u: e.0, v: e.1 });
    }
    let (u, v) = (e.0, e.1);
    let n = g.vertex_count();
    // Candidates must be adjacent to at least one endpoint; a 5-subset
    // with >= 9 edges has no vertex missing more than one pair.
    let cand: Vec<Vertex> = (0..n)
        .filter(|&w| w != u && w != v && (g.has_edge(w, u) || g.has_edge(w, v)))
        .collect();
    for (i, &w) in cand.iter().enumerate() {
        for (j, &x) in cand.iter().enumerate().skip(i + 1) {
            for &y in &cand[j + 1..] {
                let set = [u, v, w, x, y];
                let mut edges = 0;
                for (a, &p) in set.iter().enumerate() {
                    for &q in &set[a + 1..] {
                        if g.has_edge(p, q) {
                            edges += 1;
                        }
                    }
                }
                if edges >= 9 {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}

/// A vertex set inducing a complete multipartite subgraph, with its
/// partition into classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultipartiteComponent {
    /// Sorted member vertices.
    pub vertices: Vec<Vertex>,
    /// Classes sorted by smallest member; members sorted.
    pub classes: Vec<Vec<Vertex>>,
}

impl MultipartiteComponent {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    /// Index of the class containing `v`, if any.
    pub fn class_of(&self, v: Vertex) -> Option<usize> {
        self.classes.iter().position(|c| c.binary_search(&v).is_ok())
    }

    /// Number of distinct classes with a member adjacent to `v` in `g`.
    pub fn classes_seen_by(&self, g: &Graph, v: Vertex) -> usize {
        self.classes
            .iter()
            .filter(|c| c.iter().any(|&u| g.has_edge(u, v)))
            .count()
    }

    /// Edges of the host graph lying inside the component.
    pub fn induced_edges(&self, g: &Graph) -> Vec<Edge> {
        let mut out = Vec::new();
        for (i, &u) in self.vertices.iter().enumerate() {
            for &v in &self.vertices[i + 1..] {
                if g.has_edge(u, v) {
                    out.push(Edge(u, v));
                }
            }
        }
        out
    }

    /// Checks the component invariants against its host graph: classes
    /// partition the vertex set, no edge inside a class, all edges
    /// across classes.
    pub fn verify(&self, g: &Graph) -> Result<()> {
        let mut seen = BTreeSet::new();
        for class in &self.classes {
            if class.is_empty() {
                return Err(Error::StructuralAssumption("empty class".into()));
            }
            for &v in class {
                if !seen.insert(v) {
                    return Err(Error::DuplicateVertex(v));
                }
            }
        }
        if seen != self.vertices.iter().copied().collect() {
            return Err(Error::StructuralAssumption(
                "classes do not cover the component".into(),
            ));
        }
        for (i, ci) in self.classes.iter().enumerate() {
            for (a, &u) in ci.iter().enumerate() {
                for &v in &ci[a + 1..] {
                    if g.has_edge(u, v) {
                        return Err(Error::StructuralAssumption(format!(
                            "edge {u}-{v} inside a class"
                        )));
                    }
                }
            }
            for cj in &self.classes[i + 1..] {
                for &u in ci {
                    for &v in cj {
                        if !g.has_edge(u, v) {
                            return Err(Error::StructuralAssumption(format!(
                                "missing cross edge {u}-{v}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Grows a complete multipartite vertex set greedily inside `mask`,
/// always adding the smallest admissible vertex, until maximal.
///
/// A vertex is admissible if it is adjacent to all of the current set
/// (new singleton class) or to all of it except exactly one full class
/// (joins that class).
fn grow_component(g: &Graph, seed: &[Vertex], mask: &FixedBitSet) -> MultipartiteComponent {
    let mut classes: Vec<Vec<Vertex>> = seed.iter().map(|&v| vec![v]).collect();
    let mut members: BTreeSet<Vertex> = seed.iter().copied().collect();
    'grow: loop {
        for v in mask.ones() {
            if members.contains(&v) {
                continue;
            }
            let non_neighbors: Vec<Vertex> = members
                .iter()
                .copied()
                .filter(|&u| !g.has_edge(u, v))
                .collect();
            if non_neighbors.is_empty() {
                classes.push(vec![v]);
                members.insert(v);
                continue 'grow;
            }
            let target = classes
                .iter()
                .position(|c| c.binary_search(&non_neighbors[0]).is_ok())
                .expect("member has a class");
            if classes[target].len() == non_neighbors.len()
                && non_neighbors.iter().all(|u| classes[target].contains(u))
            {
                let pos = classes[target]
                    .binary_search(&v)
                    .expect_err("vertex not yet a member");
                classes[target].insert(pos, v);
                members.insert(v);
                continue 'grow;
            }
        }
        break;
    }
    classes.sort_by_key(|c| c[0]);
    MultipartiteComponent {
        vertices: members.into_iter().collect(),
        classes,
    }
}

/// All cliques of size `p` inside `mask`, as sorted tuples.
fn cliques_masked(g: &Graph, p: usize, mask: &FixedBitSet) -> Vec<Vec<Vertex>> {
    if p == 4 {
        return k4s_masked(g, mask).into_iter().map(|q| q.to_vec()).collect();
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(p);
    fn rec(
        g: &Graph,
        p: usize,
        mask: &FixedBitSet,
        start: Vertex,
        current: &mut Vec<Vertex>,
        out: &mut Vec<Vec<Vertex>>,
    ) {
        if current.len() == p {
            out.push(current.clone());
            return;
        }
        for v in start..g.vertex_count() {
            if !mask.contains(v) {
                continue;
            }
            if current.iter().all(|&u| g.has_edge(u, v)) {
                current.push(v);
                rec(g, p, mask, v + 1, current, out);
                current.pop();
            }
        }
    }
    rec(g, p, mask, 0, &mut current, &mut out);
    out
}

/// Maximal complete multipartite components with at least `p` classes,
/// one per seed `K_p`, deduplicated and canonically ordered.
///
/// Every `K_p` of the graph lies in at least one returned component. On
/// prison-free graphs with `p = 4` each `K4` extends to a unique maximal
/// component, so the result is the complete decomposition; for general
/// inputs the result is the family reachable by smallest-id-first greedy
/// extension from each seed clique.
pub fn cmd(g: &Graph, p: usize) -> Result<Vec<MultipartiteComponent>> {
    cmd_masked(g, p, &full_mask(g.vertex_count()))
}

/// [`cmd`] restricted to the induced subgraph on `mask`, without
/// relabeling vertices.
pub fn cmd_masked(g: &Graph, p: usize, mask: &FixedBitSet) -> Result<Vec<MultipartiteComponent>> {
    if p < 2 {
        return Err(Error::InvalidParam(format!(
            "minimum part count must be at least 2, got {p}"
        )));
    }
    let mut by_vertices: BTreeMap<Vec<Vertex>, MultipartiteComponent> = BTreeMap::new();
    for seed in cliques_masked(g, p, mask) {
        let comp = grow_component(g, &seed, mask);
        by_vertices.entry(comp.vertices.clone()).or_insert(comp);
    }
    Ok(by_vertices.into_values().collect())
}

/// Edge count of a complete multipartite graph with the given part
/// sizes: half of `|K|^2 - sum of squared sizes`.
pub fn multipartite_edge_count(sizes: &[u64]) -> u64 {
    let total: u64 = sizes.iter().sum();
    let squares: u64 = sizes.iter().map(|a| a * a).sum();
    (total * total - squares) / 2
}

/// Witness that some vertex outside a maximal component sees two of its
/// classes, which is exactly the obstruction to prison-freeness.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructureViolation {
    pub component: MultipartiteComponent,
    pub vertex: Vertex,
    pub class_a: usize,
    pub class_b: usize,
}

/// Checks that for every maximal complete multipartite component with at
/// least 4 classes, every outside vertex sees at most one class. Holds
/// if and only if the graph is prison-free.
pub fn check_structure_theorem(g: &Graph) -> (bool, Option<StructureViolation>) {
    match cmd(g, 4) {
        Ok(components) => {
            for comp in components {
                for v in 0..g.vertex_count() {
                    if comp.contains(v) {
                        continue;
                    }
                    let seen: Vec<usize> = comp
                        .classes
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| c.iter().any(|&u| g.has_edge(u, v)))
                        .map(|(i, _)| i)
                        .take(2)
                        .collect();
                    if seen.len() >= 2 {
                        return (
                            false,
                            Some(StructureViolation {
                                component: comp,
                                vertex: v,
                                class_a: seen[0],
                                class_b: seen[1],
                            }),
                        );
                    }
                }
            }
            (true, None)
        }
        Err(_) => unreachable!("cmd with p = 4 cannot fail"),
    }
}

/// Outcome of verifying the decomposition properties of the maximal
/// >= 4-class components of a prison-free graph.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Cmd4Report {
    /// Set when the input was not prison-free; all items are then vacuous.
    pub vacuous: bool,
    pub components: usize,
    pub item1_ok: bool,
    pub item2_ok: bool,
    pub item3_ok: bool,
    pub violation: Option<String>,
}

impl Cmd4Report {
    pub fn all_ok(&self) -> bool {
        !self.vacuous && self.item1_ok && self.item2_ok && self.item3_ok
    }
}

/// Verifies, over all pairs of maximal >= 4-class components:
/// 1. overlapping components meet in a single class of each, with no
///    edges between the leftovers and an edgeless intersection;
/// 2. disjoint components see at most one class of each other per vertex;
/// 3. every edge lying in some `K4` lies in exactly one component.
pub fn check_cmd4_properties(g: &Graph) -> Cmd4Report {
    if has_prison(g) {
        return Cmd4Report {
            vacuous: true,
            components: 0,
            item1_ok: false,
            item2_ok: false,
            item3_ok: false,
            violation: Some("input graph is not prison-free".into()),
        };
    }
    let components = cmd(g, 4).expect("p = 4 is valid");
    let mut report = Cmd4Report {
        vacuous: false,
        components: components.len(),
        item1_ok: true,
        item2_ok: true,
        item3_ok: true,
        violation: None,
    };
    let fail = |report: &mut Cmd4Report, item: usize, msg: String| {
        match item {
            1 => report.item1_ok = false,
            2 => report.item2_ok = false,
            _ => report.item3_ok = false,
        }
        if report.violation.is_none() {
            report.violation = Some(msg);
        }
    };

    for (i, f) in components.iter().enumerate() {
        for fp in &components[i + 1..] {
            let inter: Vec<Vertex> = f
                .vertices
                .iter()
                .copied()
                .filter(|&v| fp.contains(v))
                .collect();
            if inter.is_empty() {
                // Item 2, both directions.
                for (a, b) in [(f, fp), (fp, f)] {
                    for &v in &b.vertices {
                        if a.classes_seen_by(g, v) > 1 {
                            fail(
                                &mut report,
                                2,
                                format!("vertex {v} of a disjoint component sees two classes"),
                            );
                        }
                    }
                }
            } else {
                let classes_f: BTreeSet<usize> =
                    inter.iter().map(|&v| f.class_of(v).unwrap()).collect();
                let classes_fp: BTreeSet<usize> =
                    inter.iter().map(|&v| fp.class_of(v).unwrap()).collect();
                if classes_f.len() != 1 || classes_fp.len() != 1 {
                    fail(
                        &mut report,
                        1,
                        "intersection meets two classes of a component".into(),
                    );
                    continue;
                }
                let c = *classes_f.iter().next().unwrap();
                let cp = *classes_fp.iter().next().unwrap();
                for (a, &u) in inter.iter().enumerate() {
                    for &v in &inter[a + 1..] {
                        if g.has_edge(u, v) {
                            fail(&mut report, 1, format!("edge {u}-{v} inside intersection"));
                        }
                    }
                }
                for &u in &f.vertices {
                    if f.class_of(u) == Some(c) && fp.contains(u) {
                        continue;
                    }
                    if fp.class_of(u) == Some(cp) {
                        continue;
                    }
                    for &v in &fp.vertices {
                        if fp.class_of(v) == Some(cp) || f.class_of(v) == Some(c) {
                            continue;
                        }
                        if f.contains(v) {
                            continue;
                        }
                        if !f.contains(u) || fp.contains(u) {
                            continue;
                        }
                        if g.has_edge(u, v) {
                            fail(
                                &mut report,
                                1,
                                format!("edge {u}-{v} between component leftovers"),
                            );
                        }
                    }
                }
            }
        }
    }

    // Item 3: every edge in a K4 lies in exactly one component.
    let mut edges_in_k4: BTreeSet<Edge> = BTreeSet::new();
    for k4 in enumerate_k4s(g) {
        for (i, &u) in k4.iter().enumerate() {
            for &v in &k4[i + 1..] {
                edges_in_k4.insert(Edge::new(u, v));
            }
        }
    }
    for e in edges_in_k4 {
        let hosts = components
            .iter()
            .filter(|f| f.contains(e.0) && f.contains(e.1))
            .count();
        if hosts != 1 {
            fail(
                &mut report,
                3,
                format!("edge {e} in a K4 lies in {hosts} components"),
            );
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::prison_graph;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Independent prison check on five vertices: count induced edges by
    /// a direct double loop and test the shared-vertex condition without
    /// going through `classify_five`.
    fn naive_is_prison(g: &Graph, vs: &[Vertex]) -> bool {
        let mut non = Vec::new();
        for i in 0..5 {
            for j in i + 1..5 {
                if !g.has_edge(vs[i], vs[j]) {
                    non.push((vs[i], vs[j]));
                }
            }
        }
        non.len() == 2 && {
            let (a, b) = non[0];
            let (c, d) = non[1];
            a == c || a == d || b == c || b == d
        }
    }

    /// Brute-force prison enumeration over all 5-subsets.
    fn naive_prisons(g: &Graph) -> Vec<Vec<Vertex>> {
        let n = g.vertex_count();
        let mut out = Vec::new();
        if n < 5 {
            return out;
        }
        let mut idx = [0, 1, 2, 3, 4];
        loop {
            let vs: Vec<Vertex> = idx.to_vec();
            if naive_is_prison(g, &vs) {
                out.push(vs);
            }
            // next combination
            let mut i = 4isize;
            while i >= 0 && idx[i as usize] == n - 5 + i as usize {
                i -= 1;
            }
            if i < 0 {
                break;
            }
            idx[i as usize] += 1;
            for j in i as usize + 1..5 {
                idx[j] = idx[j - 1] + 1;
            }
        }
        out
    }

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
    fn classify_five_cases() {
        let k5 = Graph::complete(5);
        let c = classify_five(&k5, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(c.kind, FiveKind::StrictSupergraph);
        assert!(c.non_edges.is_empty());

        let p = classify_five(&prison_graph(), &[4, 3, 2, 1, 0]).unwrap();
        assert_eq!(p.kind, FiveKind::Prison);
        assert_eq!(p.non_edges, vec![Edge(0, 1), Edge(0, 2)]);

        let c5 = Graph::from_edge_list(5, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        assert_eq!(
            classify_five(&c5, &[0, 1, 2, 3, 4]).unwrap().kind,
            FiveKind::Other
        );

        assert!(classify_five(&k5, &[0, 0, 1, 2, 3]).is_err());
        assert!(classify_five(&k5, &[0, 1, 2, 3, 9]).is_err());
    }

    #[test]
    fn classify_five_permutation_invariant() {
        let g = prison_graph();
        let base = classify_five(&g, &[0, 1, 2, 3, 4]).unwrap();
        let perms = [[4, 2, 0, 1, 3], [1, 0, 3, 4, 2], [2, 3, 4, 0, 1]];
        for p in perms {
            assert_eq!(classify_five(&g, &p).unwrap(), base);
        }
    }

    #[test]
    fn find_prison_cases() {
        assert!(find_prison(&Graph::complete(6)).is_none());

        let mut g = Graph::new(8);
        let prison = prison_graph();
        for e in prison.edges() {
            g.insert_edge(e);
        }
        let w = find_prison(&g).unwrap();
        assert_eq!(w.vertices, [0, 1, 2, 3, 4]);
        assert_eq!(w.non_edges, [Edge(0, 1), Edge(0, 2)]);
    }

    #[test]
    fn enumeration_matches_naive_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..120 {
            let n = rng.gen_range(5..10);
            let p = rng.gen_range(0.3..0.8);
            let g = random_graph(&mut rng, n, p);
            let fast: Vec<Vec<Vertex>> = enumerate_prisons(&g)
                .into_iter()
                .map(|w| w.vertices.to_vec())
                .collect();
            assert_eq!(fast, naive_prisons(&g));
            assert_eq!(has_prison(&g), !fast.is_empty());
        }
    }

    #[test]
    fn enumerate_prisons_apex_example() {
        // K5 minus two adjacent edges plus an apex adjacent to all five:
        // count checked against the independent subset scan.
        let mut g = prison_graph();
        let v = g.add_vertices(1)[0];
        for u in 0..5 {
            g.insert_edge(Edge::new(u, v));
        }
        let fast = enumerate_prisons(&g);
        let naive = naive_prisons(&g);
        assert_eq!(fast.len(), naive.len());
        assert_eq!(
            fast.iter().map(|w| w.vertices.to_vec()).collect::<Vec<_>>(),
            naive
        );
    }

    #[test]
    fn strict_supergraph_cases() {
        let k5 = Graph::complete(5);
        assert!(edge_in_strict_supergraph(&k5, Edge(0, 1)).unwrap());

        let lone = Graph::from_edge_list(4, vec![(0, 1)]).unwrap();
        assert!(!edge_in_strict_supergraph(&lone, Edge(0, 1)).unwrap());
        assert!(edge_in_strict_supergraph(&lone, Edge(2, 3)).is_err());

        // A prison is not a strict supergraph of itself.
        let p = prison_graph();
        for e in p.edges() {
            assert!(!edge_in_strict_supergraph(&p, e).unwrap());
        }
    }

    #[test]
    fn cmd_on_small_graphs() {
        let comps = cmd(&Graph::complete(5), 4).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].vertices, vec![0, 1, 2, 3, 4]);
        assert_eq!(comps[0].class_count(), 5);
        comps[0].verify(&Graph::complete(5)).unwrap();

        // Complete 4-partite graph with parts (2,2,1,1).
        let parts: Vec<Vec<Vertex>> = vec![vec![0, 1], vec![2, 3], vec![4], vec![5]];
        let mut g = Graph::new(6);
        for (i, a) in parts.iter().enumerate() {
            for b in &parts[i + 1..] {
                for &u in a {
                    for &v in b {
                        g.insert_edge(Edge::new(u, v));
                    }
                }
            }
        }
        let comps = cmd(&g, 4).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].vertices, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(comps[0].classes, parts);
        comps[0].verify(&g).unwrap();

        assert!(cmd(&g, 1).is_err());
    }

    #[test]
    fn cmd_covers_every_k4_once_on_prison_free_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        while checked < 40 {
            let g = random_graph(&mut rng, 9, 0.45);
            if has_prison(&g) {
                continue;
            }
            checked += 1;
            let comps = cmd(&g, 4).unwrap();
            for c in &comps {
                c.verify(&g).unwrap();
                assert!(c.class_count() >= 4);
            }
            for k4 in enumerate_k4s(&g) {
                let hosts = comps
                    .iter()
                    .filter(|c| k4.iter().all(|&v| c.contains(v)))
                    .count();
                assert_eq!(hosts, 1, "K4 {k4:?} in {hosts} components");
            }
        }
    }

    #[test]
    fn multipartite_edge_count_cases() {
        assert_eq!(multipartite_edge_count(&[1, 1, 1, 1]), 6);
        assert_eq!(multipartite_edge_count(&[2, 2]), 4);
        assert_eq!(multipartite_edge_count(&[]), 0);
        // Brute-force pair count across parts for (3,2,1).
        let sizes = [3u64, 2, 1];
        let mut pairs = 0;
        for i in 0..3 {
            for j in i + 1..3 {
                pairs += sizes[i] * sizes[j];
            }
        }
        assert_eq!(multipartite_edge_count(&sizes), pairs);
        assert_eq!(pairs, 11);
    }

    #[test]
    fn structure_theorem_on_fixtures() {
        let (ok, violation) = check_structure_theorem(&prison_graph());
        assert!(!ok);
        let v = violation.unwrap();
        assert_eq!(v.vertex, 0);
        assert_eq!(v.component.vertices, vec![1, 2, 3, 4]);

        let (ok, _) = check_structure_theorem(&Graph::complete(7));
        assert!(ok);
    }

    #[test]
    fn structure_theorem_equals_prison_freeness_small() {
        // All graphs on 5 vertices.
        for mask in 0u32..1 << 10 {
            let mut g = Graph::new(5);
            let mut bit = 0;
            for u in 0..5 {
                for v in u + 1..5 {
                    if mask >> bit & 1 == 1 {
                        g.insert_edge(Edge(u, v));
                    }
                    bit += 1;
                }
            }
            let (ok, _) = check_structure_theorem(&g);
            assert_eq!(ok, enumerate_prisons(&g).is_empty());
        }
    }

    #[test]
    fn structure_theorem_equivalence_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for i in 0..300 {
            let n = 7 + i % 3;
            let p = rng.gen_range(0.3..0.8);
            let g = random_graph(&mut rng, n, p);
            let (ok, _) = check_structure_theorem(&g);
            assert_eq!(ok, enumerate_prisons(&g).is_empty());
        }
    }

    #[test]
    fn cmd4_properties_on_fixtures() {
        // Two K4s sharing one vertex.
        let mut g = Graph::complete(4);
        let fresh = g.add_vertices(3);
        for (i, &u) in fresh.iter().enumerate() {
            g.insert_edge(Edge::new(3, u));
            for &v in &fresh[i + 1..] {
                g.insert_edge(Edge::new(u, v));
            }
        }
        let report = check_cmd4_properties(&g);
        assert!(report.all_ok(), "{report:?}");

        // Disjoint K4s with no cross edges.
        let mut g = Graph::complete(4);
        let fresh = g.add_vertices(4);
        for (i, &u) in fresh.iter().enumerate() {
            for &v in &fresh[i + 1..] {
                g.insert_edge(Edge::new(u, v));
            }
        }
        assert!(check_cmd4_properties(&g).all_ok());

        assert!(check_cmd4_properties(&prison_graph()).vacuous);
    }
}
