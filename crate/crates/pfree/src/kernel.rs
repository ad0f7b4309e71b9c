//! Polynomial kernelization for prison-free edge deletion: sunflower
//! modulator, the three reduction rules, the component family over the
//! modulator complement, class typing, vertex marking and kernel
//! emission.
//!
//! Every "arbitrary" choice (sunflower representative, marked vertices,
//! marked classes, rule targets) is resolved smallest-id first, so
//! identical inputs produce identical traces and kernels.

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeSet, Graph, Vertex};
use crate::structure::{
    cmd_masked, edge_in_strict_supergraph, enumerate_prisons, MultipartiteComponent,
};

/// A family of equal-cardinality edge sets (cardinality 8 for prisons).
#[derive(Clone, Debug)]
pub struct SetFamily {
    pub sets: Vec<EdgeSet>,
    member_size: usize,
}

impl SetFamily {
    pub fn new(sets: Vec<EdgeSet>) -> Result<Self> {
        let member_size = sets.first().map_or(0, |s| s.len());
        if let Some(bad) = sets.iter().find(|s| s.len() != member_size) {
            return Err(Error::InvalidParam(format!(
                "set family members must have equal cardinality, found {} and {}",
                member_size,
                bad.len()
            )));
        }
        Ok(SetFamily { sets, member_size })
    }

    /// The edge sets of all prisons of `g`, canonically ordered.
    pub fn prisons(g: &Graph) -> Self {
        let mut sets: Vec<EdgeSet> = enumerate_prisons(g)
            .iter()
            .map(|w| w.edges(g).into_iter().collect())
            .collect();
        sets.sort();
        SetFamily {
            sets,
            member_size: 8,
        }
    }

    pub fn member_size(&self) -> usize {
        self.member_size
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// A subfamily whose members pairwise intersect in exactly `core`.
#[derive(Clone, Debug)]
pub struct Sunflower {
    pub members: Vec<EdgeSet>,
    pub core: EdgeSet,
}

fn find_sunflower_rec(sets: &[(usize, EdgeSet)], a: usize) -> Option<(Vec<usize>, EdgeSet)> {
    if sets.len() < a {
        return None;
    }
    // Greedy maximal pairwise-disjoint subfamily, smallest member first.
    let mut order: Vec<&(usize, EdgeSet)> = sets.iter().collect();
    order.sort_by(|x, y| x.1.cmp(&y.1));
    let mut chosen: Vec<usize> = Vec::new();
    let mut union = EdgeSet::new();
    for (idx, set) in &order {
        if set.is_disjoint(&union) {
            chosen.push(*idx);
            for e in set.iter() {
                union.insert(*e);
            }
        }
    }
    if chosen.len() >= a {
        chosen.sort_unstable();
        return Some((chosen, EdgeSet::new()));
    }
    // The union hits every member; recurse on the most frequent element.
    let mut counts: BTreeMap<Edge, usize> = BTreeMap::new();
    for (_, set) in sets {
        for e in set.iter() {
            *counts.entry(*e).or_insert(0) += 1;
        }
    }
    let (&pivot, _) = counts.iter().max_by_key(|(e, c)| (**c, std::cmp::Reverse(**e)))?;
    let sub: Vec<(usize, EdgeSet)> = sets
        .iter()
        .filter(|(_, s)| s.contains(&pivot))
        .map(|(idx, s)| {
            let mut rest = s.clone();
            rest.0.remove(&pivot);
            (*idx, rest)
        })
        .collect();
    // Member cardinality shrinks with each level, so this terminates.
    let (members, mut core) = find_sunflower_rec(&sub, a)?;
    core.insert(pivot);
    Some((members, core))
}

/// Searches for a sunflower of cardinality at least `a`.
///
/// Procedure: greedily take a maximal pairwise-disjoint subfamily in
/// smallest-first order; with at least `a` members that is a sunflower
/// with empty core, otherwise recurse on the subfamily through the most
/// frequent element. For members of cardinality `b`, any family of size
/// at least `b! * (a-1)^b` is guaranteed to yield a sunflower; smaller
/// families may or may not.
pub fn find_sunflower(family: &SetFamily, a: usize) -> Result<Option<Sunflower>> {
    if a < 1 {
        return Err(Error::InvalidParam("sunflower size must be at least 1".into()));
    }
    let indexed: Vec<(usize, EdgeSet)> = family.sets.iter().cloned().enumerate().collect();
    Ok(find_sunflower_rec(&indexed, a).map(|(members, core)| Sunflower {
        members: members.into_iter().map(|i| family.sets[i].clone()).collect(),
        core,
    }))
}

/// Modulator produced by the iterative sunflower procedure: hitting all
/// prisons that remain in `family` (all of which live inside `S`) hits
/// every prison of the graph, for solutions within the budget.
#[derive(Clone, Debug)]
pub struct Modulator {
    /// Sorted union of the vertices of the retained prisons.
    pub vertices: Vec<Vertex>,
    /// Edge sets of the retained prisons.
    pub family: Vec<EdgeSet>,
    /// Sunflower representatives dropped along the way.
    pub dropped: Vec<EdgeSet>,
}

/// Result of the modulator computation.
#[derive(Clone, Debug)]
pub enum ModulatorOutcome {
    /// The graph contains `k + 2` edge-disjoint prisons.
    NoInstance { disjoint_prisons: Vec<EdgeSet> },
    Modulator(Modulator),
}

/// Iteratively shrinks the prison family: while it has at least
/// `8! * (k+1)^8` members, find a sunflower of size `k + 2`; an empty
/// core proves a no-instance, otherwise the smallest representative is
/// dropped. The modulator is the vertex union of the retained prisons.
pub fn compute_modulator(g: &Graph, k: u64) -> Result<ModulatorOutcome> {
    let mut sets = SetFamily::prisons(g).sets;
    let threshold = BigUint::from(40320u64) * BigUint::from(k + 1).pow(8);
    let target = usize::try_from(k + 2).unwrap_or(usize::MAX);
    let mut dropped = Vec::new();
    while BigUint::from(sets.len()) >= threshold {
        let family = SetFamily::new(sets.clone())?;
        let sunflower = find_sunflower(&family, target)?.ok_or_else(|| {
            Error::StructuralAssumption(
                "family above the sunflower threshold yielded no sunflower".into(),
            )
        })?;
        if sunflower.core.is_empty() {
            return Ok(ModulatorOutcome::NoInstance {
                disjoint_prisons: sunflower.members,
            });
        }
        let representative = sunflower.members.iter().min().unwrap().clone();
        let pos = sets.iter().position(|s| *s == representative).unwrap();
        sets.remove(pos);
        dropped.push(representative);
    }
    let mut vertices: BTreeSet<Vertex> = BTreeSet::new();
    for set in &sets {
        for v in set.vertices() {
            vertices.insert(v);
        }
    }
    Ok(ModulatorOutcome::Modulator(Modulator {
        vertices: vertices.into_iter().collect(),
        family: sets,
        dropped,
    }))
}

fn vertex_mask(n: usize, vs: &[Vertex]) -> FixedBitSet {
    let mut m = FixedBitSet::with_capacity(n);
    for &v in vs {
        m.insert(v);
    }
    m
}

fn complement_mask(n: usize, vs: &[Vertex]) -> FixedBitSet {
    let mut m = FixedBitSet::with_capacity(n);
    m.insert_range(..);
    for &v in vs {
        m.remove(v);
    }
    m
}

/// Deletes the smallest edge outside the modulator subgraph that lies in
/// no strict supergraph of a prison.
pub fn apply_rr1(g: &Graph, s: &[Vertex]) -> Result<Option<(Graph, Edge)>> {
    let in_s = vertex_mask(g.vertex_count(), s);
    for e in g.edges() {
        if in_s.contains(e.0) && in_s.contains(e.1) {
            continue;
        }
        if !edge_in_strict_supergraph(g, e)? {
            let mut h = g.clone();
            h.remove_edge(e);
            return Ok(Some((h, e)));
        }
    }
    Ok(None)
}

/// Finds the smallest prison with exactly one edge inside the modulator
/// subgraph; that edge is in every solution within budget, so it is
/// deleted and the budget drops by one.
pub fn apply_rr2(g: &Graph, k: i64, s: &[Vertex]) -> Option<(Graph, i64, Edge)> {
    let in_s = vertex_mask(g.vertex_count(), s);
    for witness in enumerate_prisons(g) {
        let inside: Vec<Edge> = witness
            .edges(g)
            .into_iter()
            .filter(|e| in_s.contains(e.0) && in_s.contains(e.1))
            .collect();
        if inside.len() == 1 {
            let mut h = g.clone();
            h.remove_edge(inside[0]);
            return Some((h, k - 1, inside[0]));
        }
    }
    None
}

/// Partition of a vertex set into co-components; `None` when some
/// co-component contains an edge, i.e. the induced subgraph is not
/// complete multipartite.
fn multipartite_classes(g: &Graph, vertices: &[Vertex]) -> Option<Vec<Vec<Vertex>>> {
    let mut class_of: BTreeMap<Vertex, usize> = BTreeMap::new();
    let mut classes: Vec<Vec<Vertex>> = Vec::new();
    for &v in vertices {
        if class_of.contains_key(&v) {
            continue;
        }
        // BFS over non-adjacency within the set.
        let id = classes.len();
        let mut queue = vec![v];
        class_of.insert(v, id);
        let mut members = vec![v];
        while let Some(u) = queue.pop() {
            for &w in vertices {
                if !class_of.contains_key(&w) && !g.has_edge(u, w) {
                    class_of.insert(w, id);
                    members.push(w);
                    queue.push(w);
                }
            }
        }
        members.sort_unstable();
        classes.push(members);
    }
    for class in &classes {
        for (i, &u) in class.iter().enumerate() {
            for &v in &class[i + 1..] {
                if g.has_edge(u, v) {
                    return None;
                }
            }
        }
    }
    classes.sort_by_key(|c| c[0]);
    Some(classes)
}

/// Grows each maximal complete multipartite subgraph of the modulator
/// complement by the modulator vertices seeing at least two of its
/// classes; when the grown set is complete multipartite, maximal, and
/// every outside vertex sees at most one of its classes, its edges can
/// never interact with any other prison and are all removed.
pub fn apply_rr3(g: &Graph, s: &[Vertex]) -> Result<Option<(Graph, EdgeSet)>> {
    let n = g.vertex_count();
    let outside_s = complement_mask(n, s);
    for seed in cmd_masked(g, 3, &outside_s)? {
        let mut grown: Vec<Vertex> = seed.vertices.clone();
        for &v in s {
            if seed.classes_seen_by(g, v) >= 2 {
                grown.push(v);
            }
        }
        grown.sort_unstable();
        let classes = match multipartite_classes(g, &grown) {
            Some(c) => c,
            None => continue,
        };
        let comp = MultipartiteComponent {
            vertices: grown.clone(),
            classes,
        };
        let separated = (0..n)
            .filter(|v| !comp.contains(*v))
            .all(|v| comp.classes_seen_by(g, v) <= 1);
        if !separated {
            continue;
        }
        // Separation implies maximality for >= 3 classes; checked anyway.
        let maximal = (0..n).filter(|v| !comp.contains(*v)).all(|v| {
            let non_neighbors: Vec<Vertex> = comp
                .vertices
                .iter()
                .copied()
                .filter(|&u| !g.has_edge(u, v))
                .collect();
            if non_neighbors.is_empty() {
                return false;
            }
            comp.class_of(non_neighbors[0])
                .map(|c| comp.classes[c] != non_neighbors)
                .unwrap_or(true)
        });
        if !maximal {
            continue;
        }
        let removed: EdgeSet = comp.induced_edges(g).into_iter().collect();
        let mut h = g.clone();
        for e in removed.iter() {
            h.remove_edge(*e);
        }
        return Ok(Some((h, removed)));
    }
    Ok(None)
}

/// Computes the blocks of triangle-free edges outside the modulator:
/// `B` is the set of edges of the complement graph lying in no triangle
/// of the complement, and each block gathers the members of `B` inside
/// the common neighborhood of one modulator edge.
///
/// Returns the distinct nonempty blocks keyed by their smallest
/// generating modulator edge. Fails with a structural-assumption error
/// if the blocks do not partition `B` or some block does not span a
/// complete bipartite subgraph; both hold once the reduction rules are
/// exhausted.
pub fn compute_b_partition(g: &Graph, s: &[Vertex]) -> Result<BTreeMap<Edge, EdgeSet>> {
    let n = g.vertex_count();
    let in_s = vertex_mask(n, s);
    let mut b = EdgeSet::new();
    for e in g.edges() {
        if in_s.contains(e.0) || in_s.contains(e.1) {
            continue;
        }
        let triangle = g
            .common_neighborhood(e.0, e.1)?
            .into_iter()
            .any(|w| !in_s.contains(w));
        if !triangle {
            b.insert(e);
        }
    }

    let mut blocks: BTreeMap<Edge, EdgeSet> = BTreeMap::new();
    for e in g.edges() {
        if !(in_s.contains(e.0) && in_s.contains(e.1)) {
            continue;
        }
        let cn: BTreeSet<Vertex> = g.common_neighborhood(e.0, e.1)?.into_iter().collect();
        let block: EdgeSet = b
            .iter()
            .filter(|f| cn.contains(&f.0) && cn.contains(&f.1))
            .copied()
            .collect();
        if block.is_empty() {
            continue;
        }
        if let Some(existing) = blocks.values().find(|other| !other.is_disjoint(&block)) {
            if *existing != block {
                return Err(Error::StructuralAssumption(format!(
                    "blocks of modulator edges overlap without being equal near {e}"
                )));
            }
            continue;
        }
        blocks.insert(e, block);
    }

    let mut covered = EdgeSet::new();
    for block in blocks.values() {
        for f in block.iter() {
            covered.insert(*f);
        }
    }
    if covered != b {
        return Err(Error::StructuralAssumption(
            "triangle-free edges outside the modulator are not covered by blocks".into(),
        ));
    }
    for (e, block) in &blocks {
        let span = block.vertices();
        for (i, &u) in span.iter().enumerate() {
            for &v in &span[i + 1..] {
                if g.has_edge(u, v) && !block.contains(&Edge(u, v)) {
                    return Err(Error::StructuralAssumption(format!(
                        "edge {u}-{v} inside block span of {e} is not a block member"
                    )));
                }
            }
        }
        let classes = multipartite_classes(g, &span).ok_or_else(|| {
            Error::StructuralAssumption(format!("block of {e} is not complete multipartite"))
        })?;
        if classes.len() != 2 {
            return Err(Error::StructuralAssumption(format!(
                "block of {e} has {} classes instead of 2",
                classes.len()
            )));
        }
    }
    Ok(blocks)
}

/// How a component of the family was obtained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentKind {
    /// Maximal complete multipartite subgraph of the modulator
    /// complement with at least 3 classes.
    Cmd3,
    /// Block of triangle-free edges in the common neighborhood of the
    /// given modulator edge.
    BipartiteBlock(Edge),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyComponent {
    pub component: MultipartiteComponent,
    pub kind: ComponentKind,
}

/// The edge-disjoint family covering all edges outside the modulator.
#[derive(Clone, Debug, Default)]
pub struct ComponentFamily {
    pub components: Vec<FamilyComponent>,
}

impl ComponentFamily {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Whether `v` belongs to some component.
    pub fn covers_vertex(&self, v: Vertex) -> bool {
        self.components.iter().any(|c| c.component.contains(v))
    }
}

/// Assembles the family: the maximal >= 3-class components of the
/// modulator complement plus the bipartite blocks. Asserts that the
/// family partitions the edges outside the modulator and respects the
/// `|S|^3 + |S|^2` cardinality bound.
pub fn compute_f_family(g: &Graph, s: &[Vertex]) -> Result<ComponentFamily> {
    let n = g.vertex_count();
    let outside_s = complement_mask(n, s);
    let mut components: Vec<FamilyComponent> = cmd_masked(g, 3, &outside_s)?
        .into_iter()
        .map(|component| FamilyComponent {
            component,
            kind: ComponentKind::Cmd3,
        })
        .collect();
    for (e, block) in compute_b_partition(g, s)? {
        let span = block.vertices();
        let classes = multipartite_classes(g, &span).expect("checked by compute_b_partition");
        components.push(FamilyComponent {
            component: MultipartiteComponent {
                vertices: span,
                classes,
            },
            kind: ComponentKind::BipartiteBlock(e),
        });
    }
    components.sort_by(|a, b| a.component.vertices.cmp(&b.component.vertices));

    // Edge-disjointness and coverage of all edges outside the modulator.
    let in_s = vertex_mask(n, s);
    let outside_edges: BTreeSet<Edge> = g
        .edges()
        .into_iter()
        .filter(|e| !in_s.contains(e.0) && !in_s.contains(e.1))
        .collect();
    let mut seen: BTreeSet<Edge> = BTreeSet::new();
    for fc in &components {
        for e in fc.component.induced_edges(g) {
            if !seen.insert(e) {
                return Err(Error::StructuralAssumption(format!(
                    "edge {e} covered by two family components"
                )));
            }
        }
    }
    if seen != outside_edges {
        return Err(Error::StructuralAssumption(
            "family components do not cover the edges outside the modulator".into(),
        ));
    }

    let s_len = s.len() as u128;
    if components.len() as u128 > s_len * s_len * s_len + s_len * s_len {
        return Err(Error::StructuralAssumption(format!(
            "family has {} components, above the |S|^3 + |S|^2 bound",
            components.len()
        )));
    }
    Ok(ComponentFamily { components })
}

/// Per-component classification of classes.
///
/// A class `C` is Type 1 when some modulator vertex's neighborhood in
/// the component is a nonempty subset of `C` or exactly the complement
/// of `C`; the remaining classes are Type 2 and all have identical
/// neighborhoods in the modulator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassTyping {
    pub type1: Vec<usize>,
    pub type2: Vec<usize>,
}

/// Types the classes of one family component, asserting that every
/// modulator vertex with neighbors in the component interacts in one of
/// the three legal shapes (inside one class, all but one class, all).
pub fn classify_classes(
    component: &MultipartiteComponent,
    g: &Graph,
    s: &[Vertex],
) -> Result<ClassTyping> {
    let member_set: BTreeSet<Vertex> = component.vertices.iter().copied().collect();
    let mut type1: BTreeSet<usize> = BTreeSet::new();
    for &sv in s {
        let hit: BTreeSet<Vertex> = component
            .vertices
            .iter()
            .copied()
            .filter(|&u| g.has_edge(u, sv))
            .collect();
        if hit.is_empty() {
            continue;
        }
        if hit == member_set {
            continue; // sees everything: no class distinguished
        }
        let classes_hit: BTreeSet<usize> = hit
            .iter()
            .map(|&u| component.class_of(u).expect("member has a class"))
            .collect();
        if classes_hit.len() == 1 {
            type1.insert(*classes_hit.iter().next().unwrap());
            continue;
        }
        // All but one class, each hit class fully covered.
        let missed: BTreeSet<usize> = (0..component.classes.len())
            .filter(|c| !classes_hit.contains(c))
            .collect();
        let full_cover = classes_hit
            .iter()
            .all(|&c| component.classes[c].iter().all(|u| hit.contains(u)));
        if missed.len() == 1 && full_cover {
            type1.insert(*missed.iter().next().unwrap());
            continue;
        }
        return Err(Error::StructuralAssumption(format!(
            "modulator vertex {sv} interacts with a component in an illegal shape"
        )));
    }
    if type1.len() > s.len() {
        return Err(Error::StructuralAssumption(format!(
            "{} Type-1 classes exceed the modulator size {}",
            type1.len(),
            s.len()
        )));
    }
    let type2 = (0..component.classes.len())
        .filter(|c| !type1.contains(c))
        .collect();
    Ok(ClassTyping {
        type1: type1.into_iter().collect(),
        type2,
    })
}

/// Vertices retained by the marking procedure.
#[derive(Clone, Debug)]
pub struct MarkedSets {
    /// Marked vertices per family component, same order as the family.
    pub per_component: Vec<BTreeSet<Vertex>>,
    /// Marked vertices outside the modulator and all components.
    pub outside: BTreeSet<Vertex>,
}

fn probe_subsets(s: &[Vertex]) -> Vec<Vec<Vertex>> {
    // Neighborhood patterns are probed on 4-subsets of the modulator;
    // smaller modulators degrade to |S|-subsets.
    let size = s.len().min(4);
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn rec(s: &[Vertex], size: usize, start: usize, cur: &mut Vec<Vertex>, out: &mut Vec<Vec<Vertex>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..s.len() {
            cur.push(s[i]);
            rec(s, size, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(s, size, 0, &mut current, &mut out);
    out
}

fn mark_by_pattern(
    g: &Graph,
    candidates: &[Vertex],
    probes: &[Vec<Vertex>],
    quota: usize,
    into: &mut BTreeSet<Vertex>,
) {
    for probe in probes {
        let mut buckets: BTreeMap<u32, usize> = BTreeMap::new();
        for &v in candidates {
            let mut pattern: u32 = 0;
            for (i, &sv) in probe.iter().enumerate() {
                if g.has_edge(v, sv) {
                    pattern |= 1 << i;
                }
            }
            let taken = buckets.entry(pattern).or_insert(0);
            if *taken < quota {
                *taken += 1;
                into.insert(v);
            }
        }
    }
}

/// Marks, for every component, up to `2k + 5` smallest-id vertices of
/// each Type-1 class per neighborhood pattern on each probe subset of
/// the modulator, plus `2k + 5` smallest Type-2 classes with `2k + 5`
/// vertices each; and the same pattern marking over the vertices lying
/// outside the modulator and every component.
pub fn mark(
    g: &Graph,
    s: &[Vertex],
    family: &ComponentFamily,
    typings: &[ClassTyping],
    k: u64,
) -> Result<MarkedSets> {
    let quota = usize::try_from(2 * k + 5).unwrap_or(usize::MAX);
    let probes = probe_subsets(s);
    let mut per_component = Vec::with_capacity(family.components.len());
    for (fc, typing) in family.components.iter().zip(typings) {
        let mut marks: BTreeSet<Vertex> = BTreeSet::new();
        for &c in &typing.type1 {
            mark_by_pattern(g, &fc.component.classes[c], &probes, quota, &mut marks);
        }
        for &c in typing.type2.iter().take(quota) {
            for &v in fc.component.classes[c].iter().take(quota) {
                marks.insert(v);
            }
        }
        let s_len = s.len() as u128;
        let quota128 = quota as u128;
        let bound = s_len.pow(5) * quota128 + quota128 * quota128;
        if (marks.len() as u128) > bound {
            return Err(Error::StructuralAssumption(format!(
                "component marking exceeded its bound: {} > {bound}",
                marks.len()
            )));
        }
        per_component.push(marks);
    }

    let in_s = vertex_mask(g.vertex_count(), s);
    let unattached: Vec<Vertex> = (0..g.vertex_count())
        .filter(|&v| !in_s.contains(v) && !family.covers_vertex(v))
        .collect();
    let mut outside = BTreeSet::new();
    mark_by_pattern(g, &unattached, &probes, quota, &mut outside);
    Ok(MarkedSets {
        per_component,
        outside,
    })
}

/// One step of the kernelization pipeline, recorded in order.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum TraceEvent {
    Modulator {
        vertices: Vec<Vertex>,
        prisons_kept: usize,
        dropped: Vec<Vec<Edge>>,
    },
    DeleteUnprotected {
        edge: Edge,
        k_after: i64,
    },
    DeleteForced {
        edge: Edge,
        k_after: i64,
    },
    RemoveSeparatedComponent {
        edges: Vec<Edge>,
        k_after: i64,
    },
    Family {
        components: Vec<FamilyComponent>,
    },
    Typing {
        per_component: Vec<ClassTyping>,
    },
    Marks {
        per_component: Vec<Vec<Vertex>>,
        outside: Vec<Vertex>,
    },
    Kernel {
        kept: Vec<Vertex>,
        vertex_map: Vec<(Vertex, Vertex)>,
        k_after: u64,
    },
}

/// Reduced instance plus the full derivation trace.
#[derive(Clone, Debug)]
pub struct KernelResult {
    pub graph: Graph,
    pub budget: u64,
    /// Modulator vertices in the original graph's ids.
    pub modulator: Vec<Vertex>,
    /// Family size after rule exhaustion.
    pub family_size: usize,
    /// Budget in effect during marking (equals `budget`).
    pub marking_budget: u64,
    pub trace: Vec<TraceEvent>,
}

impl KernelResult {
    /// The explicit instantiation of the kernel size bound:
    /// `|S| + |S|^4 (2k+5) + |F| (|S|^5 (2k+5) + (2k+5)^2)`.
    pub fn size_bound(&self) -> u128 {
        kernel_size_bound(self.modulator.len(), self.family_size, self.marking_budget)
    }
}

pub fn kernel_size_bound(modulator: usize, family: usize, k: u64) -> u128 {
    let s = modulator as u128;
    let q = 2 * k as u128 + 5;
    s + s.pow(4) * q + family as u128 * (s.pow(5) * q + q * q)
}

/// Outcome of the kernelization.
#[derive(Clone, Debug)]
pub enum KernelOutcome {
    /// The instance is infeasible: either `k + 2` edge-disjoint prisons
    /// exist, or forced deletions exceeded the budget.
    NoInstance {
        reason: String,
        trace: Vec<TraceEvent>,
    },
    Kernel(KernelResult),
}

/// Full pipeline: modulator, exhaustive reduction rules with restart
/// after every application, component family, class typing, marking,
/// and emission of the induced subgraph on the marked vertices.
pub fn kernelize(g: &Graph, k: u64) -> Result<KernelOutcome> {
    let mut trace = Vec::new();
    let modulator = match compute_modulator(g, k)? {
        ModulatorOutcome::NoInstance { disjoint_prisons } => {
            return Ok(KernelOutcome::NoInstance {
                reason: format!(
                    "{} edge-disjoint prisons exceed the budget {k}",
                    disjoint_prisons.len()
                ),
                trace,
            });
        }
        ModulatorOutcome::Modulator(m) => m,
    };
    trace.push(TraceEvent::Modulator {
        vertices: modulator.vertices.clone(),
        prisons_kept: modulator.family.len(),
        dropped: modulator
            .dropped
            .iter()
            .map(|s| s.iter().copied().collect())
            .collect(),
    });
    let s = modulator.vertices.clone();

    let mut current = g.clone();
    let mut budget: i64 = i64::try_from(k).map_err(|_| {
        Error::InvalidParam(format!("budget {k} too large"))
    })?;
    loop {
        if let Some((next, edge)) = apply_rr1(&current, &s)? {
            trace.push(TraceEvent::DeleteUnprotected {
                edge,
                k_after: budget,
            });
            current = next;
            continue;
        }
        if let Some((next, next_budget, edge)) = apply_rr2(&current, budget, &s) {
            budget = next_budget;
            trace.push(TraceEvent::DeleteForced {
                edge,
                k_after: budget,
            });
            current = next;
            continue;
        }
        if let Some((next, removed)) = apply_rr3(&current, &s)? {
            trace.push(TraceEvent::RemoveSeparatedComponent {
                edges: removed.iter().copied().collect(),
                k_after: budget,
            });
            current = next;
            continue;
        }
        break;
    }

    if budget < 0 {
        return Ok(KernelOutcome::NoInstance {
            reason: "forced deletions exceed the budget".into(),
            trace,
        });
    }
    let budget = budget as u64;

    if s.is_empty() {
        // With no prisons the rules eliminate every edge, and no marking
        // is needed: the kernel is the empty graph.
        if current.edge_count() != 0 {
            return Err(Error::StructuralAssumption(
                "edges remain after rule exhaustion with an empty modulator".into(),
            ));
        }
        trace.push(TraceEvent::Kernel {
            kept: Vec::new(),
            vertex_map: Vec::new(),
            k_after: budget,
        });
        return Ok(KernelOutcome::Kernel(KernelResult {
            graph: Graph::new(0),
            budget,
            modulator: s,
            family_size: 0,
            marking_budget: budget,
            trace,
        }));
    }

    let family = compute_f_family(&current, &s)?;
    trace.push(TraceEvent::Family {
        components: family.components.clone(),
    });
    let typings: Vec<ClassTyping> = family
        .components
        .iter()
        .map(|fc| classify_classes(&fc.component, &current, &s))
        .collect::<Result<_>>()?;
    trace.push(TraceEvent::Typing {
        per_component: typings.clone(),
    });
    let marked = mark(&current, &s, &family, &typings, budget)?;
    trace.push(TraceEvent::Marks {
        per_component: marked
            .per_component
            .iter()
            .map(|m| m.iter().copied().collect())
            .collect(),
        outside: marked.outside.iter().copied().collect(),
    });

    let mut keep: BTreeSet<Vertex> = s.iter().copied().collect();
    keep.extend(marked.outside.iter().copied());
    for m in &marked.per_component {
        keep.extend(m.iter().copied());
    }
    let keep: Vec<Vertex> = keep.into_iter().collect();
    let (kernel_graph, vertex_map) = current.induced_subgraph(&keep)?;

    let result = KernelResult {
        graph: kernel_graph,
        budget,
        modulator: s,
        family_size: family.len(),
        marking_budget: budget,
        trace: Vec::new(),
    };
    if (result.graph.vertex_count() as u128) > result.size_bound() {
        return Err(Error::StructuralAssumption(format!(
            "kernel has {} vertices, above the size ledger bound {}",
            result.graph.vertex_count(),
            result.size_bound()
        )));
    }
    trace.push(TraceEvent::Kernel {
        kept: keep,
        vertex_map: vertex_map.clone(),
        k_after: budget,
    });
    Ok(KernelOutcome::Kernel(KernelResult { trace, ..result }))
}
