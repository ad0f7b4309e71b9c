//! Gadget builders and reductions: the 5-vertex propagational component,
//! cloning chains, the 11-vertex disjoint propagational component with
//! vertex-disjoint interface pairs, forbidden-pair realization towers,
//! the reduction from vertex cover on cubic graphs to gap completion
//! instances, and the tree composition of many gap instances into one.
//!
//! All builders append to a host [`AnnotatedGraph`] and return a handle
//! with the placed vertex ids and interface pair labels; forbidden pairs
//! are registered on the host directly.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::annotated::{AnnotatedFile, AnnotatedGraph};
use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeSet, Graph, Vertex};
use crate::solve::{EditMode, Solution};

/// Ids and interface labels of one placed gadget.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GadgetHandle {
    pub vertices: Vec<Vertex>,
    /// Interface pairs by label (`e1`, `e2`, ... for propagational and
    /// disjoint propagational components; `e1`..`el` chain pairs for
    /// cloning components).
    pub named: BTreeMap<String, Edge>,
    /// Forbidden pairs this gadget registered on the host.
    pub forbidden: Vec<Edge>,
}

impl GadgetHandle {
    pub fn pair(&self, label: &str) -> Edge {
        self.named[label]
    }
}

/// Edges of the 5-vertex propagational component on local ids `0..5`:
/// 7 edges whose three non-edges are `e1 = 3-4`, `e2 = 0-1`, `e3 = 1-2`.
/// Adding `e1` creates a prison whose non-edges are exactly `e2`, `e3`,
/// so any prison-free completion containing `e1` contains `e2` or `e3`.
const PROPAGATIONAL_EDGES: [(usize, usize); 7] =
    [(0, 2), (2, 4), (1, 4), (1, 3), (0, 3), (0, 4), (2, 3)];

/// Appends a propagational component on five fresh vertices.
pub fn build_propagational(host: &mut AnnotatedGraph) -> GadgetHandle {
    let ids = host.graph.add_vertices(5);
    for (u, v) in PROPAGATIONAL_EDGES {
        host.graph.insert_edge(Edge::new(ids[u], ids[v]));
    }
    let mut named = BTreeMap::new();
    named.insert("e1".into(), Edge::new(ids[3], ids[4]));
    named.insert("e2".into(), Edge::new(ids[0], ids[1]));
    named.insert("e3".into(), Edge::new(ids[1], ids[2]));
    GadgetHandle {
        vertices: ids,
        named,
        forbidden: Vec::new(),
    }
}

/// Vertex ids of one cloning component, indexed by chain position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CloningHandle {
    pub a: Vec<Vertex>,
    pub b: Vec<Vertex>,
    pub c: Vec<Vertex>,
}

impl CloningHandle {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    /// Chain pair `e_j = a_{j-1} c_{j-1}` for `j` in `1..=len`.
    pub fn chain_pair(&self, j: usize) -> Edge {
        Edge::new(self.a[j - 1], self.c[j - 1])
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        let mut vs = self.a.clone();
        vs.extend(&self.b);
        vs.extend(&self.c);
        vs.sort_unstable();
        vs
    }
}

/// Appends a cloning component of length `ell >= 4`: vertices
/// `a_i, b_i, c_i` where every window `(a_{i+1}, c_{i+1}, b_i, c_i, a_i)`
/// induces a propagational component with `e1 = a_i c_i`,
/// `e2 = a_{i+1} c_{i+1}`, `e3 = c_{i+1} b_i`, and every `e3` forbidden.
/// Adding any `a_i c_i` therefore forces all of them.
pub fn build_cloning(host: &mut AnnotatedGraph, ell: usize) -> Result<CloningHandle> {
    if ell < 4 {
        return Err(Error::InvalidParam(format!(
            "cloning component length must be at least 4, got {ell}"
        )));
    }
    let a = host.graph.add_vertices(ell);
    let b = host.graph.add_vertices(ell);
    let c = host.graph.add_vertices(ell);
    for i in 0..ell {
        let j = (i + 1) % ell;
        // The propagational window (a_j, c_j, b_i, c_i, a_i) maps onto
        // local ids (0, 1, 2, 3, 4) of PROPAGATIONAL_EDGES.
        let w = [a[j], c[j], b[i], c[i], a[i]];
        for (u, v) in PROPAGATIONAL_EDGES {
            host.graph.insert_edge(Edge::new(w[u], w[v]));
        }
        host.forbid(Edge::new(c[j], b[i]))?;
    }
    Ok(CloningHandle { a, b, c })
}

/// Local structure of the disjoint propagational component on ids
/// `1..=11` (paper-figure numbering): `{1..5}`, `{4..8}` and
/// `{3,5,9,10,11}` each induce propagational components; `7-8` and
/// `9-11` are forbidden; input `e1 = 1-2`, outputs `e2 = 10-11`,
/// `e3 = 6-8` are pairwise vertex-disjoint.
const DPC_EDGES: [(usize, usize); 21] = [
    (1, 3),
    (1, 4),
    (1, 5),
    (2, 3),
    (2, 4),
    (2, 5),
    (3, 4),
    (3, 9),
    (3, 10),
    (3, 11),
    (4, 6),
    (4, 7),
    (4, 8),
    (5, 6),
    (5, 7),
    (5, 8),
    (5, 9),
    (5, 10),
    (5, 11),
    (6, 7),
    (9, 10),
];
const DPC_FORBIDDEN: [(usize, usize); 2] = [(7, 8), (9, 11)];

/// Where a disjoint propagational component's interface pair lives:
/// freshly created vertices or two existing host vertices to merge with.
#[derive(Clone, Copy, Debug)]
pub enum PairSite {
    Fresh,
    Existing(Vertex, Vertex),
}

/// Places a disjoint propagational component, merging the input pair
/// `(v1, v2)` and output pairs `(v10, v11)`, `(v6, v8)` with existing
/// vertices where requested. Returns the handle with all eleven ids
/// under labels `v1`..`v11` plus the interface pairs.
pub fn place_dpc(
    host: &mut AnnotatedGraph,
    input: PairSite,
    out_a: PairSite,
    out_b: PairSite,
) -> Result<GadgetHandle> {
    let mut ids: [Option<Vertex>; 12] = [None; 12];
    let bind = |host: &mut AnnotatedGraph, site: PairSite, slots: (usize, usize), ids: &mut [Option<Vertex>; 12]| {
        match site {
            PairSite::Fresh => {
                let fresh = host.graph.add_vertices(2);
                ids[slots.0] = Some(fresh[0]);
                ids[slots.1] = Some(fresh[1]);
            }
            PairSite::Existing(p, q) => {
                ids[slots.0] = Some(p);
                ids[slots.1] = Some(q);
            }
        }
    };
    bind(host, input, (1, 2), &mut ids);
    bind(host, out_a, (10, 11), &mut ids);
    bind(host, out_b, (6, 8), &mut ids);
    for slot in [3, 4, 5, 7, 9] {
        ids[slot] = Some(host.graph.add_vertices(1)[0]);
    }
    let id = |slot: usize| ids[slot].unwrap();
    for (u, v) in DPC_EDGES {
        host.graph.insert_edge(Edge::new(id(u), id(v)));
    }
    let mut forbidden = Vec::new();
    for (u, v) in DPC_FORBIDDEN {
        let e = Edge::new(id(u), id(v));
        host.forbid(e)?;
        forbidden.push(e);
    }
    let mut named = BTreeMap::new();
    named.insert("e1".into(), Edge::new(id(1), id(2)));
    named.insert("e2".into(), Edge::new(id(10), id(11)));
    named.insert("e3".into(), Edge::new(id(6), id(8)));
    Ok(GadgetHandle {
        vertices: (1..=11).map(id).collect(),
        named,
        forbidden,
    })
}

/// Appends the 11-vertex disjoint propagational component on fresh
/// vertices: same propagation property as the propagational component,
/// but with pairwise vertex-disjoint input and output pairs.
pub fn build_disjoint_propagational(host: &mut AnnotatedGraph) -> GadgetHandle {
    place_dpc(host, PairSite::Fresh, PairSite::Fresh, PairSite::Fresh)
        .expect("fresh placement cannot fail")
}

/// Realizes a single forbidden pair `u-v` structurally for budget `k`:
/// adds `3(k+1)` fresh vertices so that each block `{u, x1, x2, x3}`
/// induces a `K4` with `x3` adjacent to `v`. Any completion containing
/// `u-v` then needs more than `k` further additions. The pair is removed
/// from the host's symbolic forbidden set.
pub fn build_forbidden_realization(
    host: &mut AnnotatedGraph,
    u: Vertex,
    v: Vertex,
    k: u64,
) -> Result<GadgetHandle> {
    if host.graph.has_edge(u, v) {
        return Err(Error::AlreadyAnEdge { u, v });
    }
    Edge::checked(u, v, host.graph.vertex_count())?;
    let blocks = usize::try_from(k + 1).map_err(|_| Error::InvalidParam("budget too large".into()))?;
    let mut vertices = Vec::with_capacity(3 * blocks);
    for _ in 0..blocks {
        let x = host.graph.add_vertices(3);
        for i in 0..3 {
            host.graph.insert_edge(Edge::new(u, x[i]));
            for j in i + 1..3 {
                host.graph.insert_edge(Edge::new(x[i], x[j]));
            }
        }
        host.graph.insert_edge(Edge::new(x[2], v));
        vertices.extend(x);
    }
    host.forbidden.remove(&Edge::new(u, v));
    let mut named = BTreeMap::new();
    named.insert("realized".into(), Edge::new(u, v));
    Ok(GadgetHandle {
        vertices,
        named,
        forbidden: Vec::new(),
    })
}

/// Replaces every symbolic forbidden pair with a realization gadget
/// sized for budget `k`, yielding a plain graph whose budget-`k`
/// solutions avoid all formerly forbidden pairs.
pub fn realize_forbidden(host: &AnnotatedGraph, k: u64) -> Result<Graph> {
    let mut work = host.clone();
    let pairs: Vec<Edge> = work.forbidden.iter().copied().collect();
    for e in pairs {
        build_forbidden_realization(&mut work, e.0, e.1, k)?;
    }
    debug_assert!(work.forbidden.is_empty());
    Ok(work.graph)
}

/// A vertex cover instance on a cubic graph.
#[derive(Clone, Debug)]
pub struct VCInstance {
    pub graph: Graph,
    pub budget: u64,
}

impl VCInstance {
    pub fn new(graph: Graph, budget: u64) -> Result<Self> {
        for v in 0..graph.vertex_count() {
            let d = graph.degree(v);
            if d != 3 {
                return Err(Error::NotCubic { vertex: v, degree: d });
            }
        }
        Ok(VCInstance { graph, budget })
    }
}

/// Role map of one gap instance, serialized into the file's `meta`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapMeta {
    pub ell: usize,
    /// Cover budget of the source vertex cover instance.
    pub t: u64,
    pub vc_vertices: usize,
    pub vc_edges: Vec<(usize, usize)>,
    /// Seed chain whose final pair is the activation edge.
    pub x0: CloningHandle,
    /// One cloning component per vertex of the cover instance.
    pub vertex_chains: Vec<CloningHandle>,
    /// Per vertex chain, the three designated interface pairs.
    pub designated: Vec<[(Vertex, Vertex); 3]>,
    /// Per cover-instance edge, the eleven vertices of its disjoint
    /// propagational component (paper-figure order `v1..v11`).
    pub dpcs: Vec<Vec<Vertex>>,
    /// The four forbidden groups over the vertex chains.
    pub groups: [Vec<Vertex>; 4],
    pub activation: (Vertex, Vertex),
}

/// A gap completion instance: annotated graph with budget `k` and gap
/// `g`, plus the construction role map.
#[derive(Clone, Debug)]
pub struct GapInstance {
    pub graph: AnnotatedGraph,
    pub k: u64,
    pub g: u64,
    pub ell: usize,
    pub meta: GapMeta,
}

/// Identity of a standalone gadget file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetMeta {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub len: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
enum MetaPayload {
    Gap(GapMeta),
    Composition(CompositionMeta),
    Gadget(GadgetMeta),
}

/// Wraps a built gadget host into a writable file with its meta tag.
pub fn gadget_file(host: &AnnotatedGraph, kind: &str, len: Option<usize>) -> AnnotatedFile {
    AnnotatedFile {
        annotated: host.clone(),
        meta: Some(
            serde_json::to_value(MetaPayload::Gadget(GadgetMeta {
                kind: kind.to_string(),
                len,
            }))
            .expect("meta serialization cannot fail"),
        ),
    }
}

impl GapInstance {
    pub fn to_file(&self) -> AnnotatedFile {
        AnnotatedFile {
            annotated: self.graph.clone(),
            meta: Some(
                serde_json::to_value(MetaPayload::Gap(self.meta.clone()))
                    .expect("meta serialization cannot fail"),
            ),
        }
    }

    pub fn from_file(file: &AnnotatedFile) -> Result<Self> {
        let meta = file
            .meta
            .clone()
            .ok_or_else(|| Error::InvalidParam("file carries no meta object".into()))?;
        match serde_json::from_value(meta)? {
            MetaPayload::Gap(meta) => {
                let k = file.annotated.k.ok_or_else(|| {
                    Error::InvalidParam("gap instance file carries no k".into())
                })?;
                let g = file.annotated.g.unwrap_or(0);
                Ok(GapInstance {
                    graph: file.annotated.clone(),
                    k,
                    g,
                    ell: meta.ell,
                    meta,
                })
            }
            MetaPayload::Composition(_) | MetaPayload::Gadget(_) => Err(Error::InvalidParam(
                "file does not hold a gap instance".into(),
            )),
        }
    }
}

/// Exact value of `13 x^2 / 4`, which is integral for even `x`.
fn thirteen_quarters_sq(x: u64) -> u64 {
    let sq = x * x;
    debug_assert_eq!(13 * sq % 4, 0, "x must be even");
    13 * sq / 4
}

/// Tree height for `t` composed instances: `2^(h-1) < t <= 2^h`.
fn tree_height(t: usize) -> usize {
    if t <= 1 {
        0
    } else {
        (t - 1).ilog2() as usize + 1
    }
}

/// Composition budget for instances with cover budget `k0`, edge count
/// `m0` and chain length `ell`, composed into a tree of height `h`:
/// `k = 13 (k0 ell)^2 / 4 + g` with
/// `g = (n_b + n_c) n_a + (n_b + n_c)^2`.
fn composition_budget(k0: u64, m0: usize, ell: u64, h: usize) -> (u64, u64) {
    let n_a = 3 * k0 * ell;
    let nb_nc = 12 * (m0 as u64 + 1) + 6 * h as u64;
    let g = nb_nc * n_a + nb_nc * nb_nc;
    (thirteen_quarters_sq(k0 * ell) + g, g)
}

/// Whether the composition inequality
/// `13 ((k0+1) ell)^2 / 4 - 9 k0 ell > k` holds.
fn composition_gap_ok(k0: u64, m0: usize, ell: u64, h: usize) -> bool {
    let (k, _) = composition_budget(k0, m0, ell, h);
    thirteen_quarters_sq((k0 + 1) * ell).saturating_sub(9 * k0 * ell) > k
}

/// Smallest even chain length `>= 6` for which `t` gap instances with
/// cover budget `k0` and `m0` source edges can be composed, i.e. the
/// gap absorbs the composition slack.
pub fn minimum_composable_ell(k0: u64, m0: usize, t: usize) -> usize {
    let h = tree_height(t);
    let mut ell = 6u64;
    while !composition_gap_ok(k0, m0, ell, h) {
        ell += 2;
    }
    ell as usize
}

/// Reduces a cubic vertex cover instance to a gap completion instance
/// with chain length `ell` (even, at least 6).
///
/// Construction: a seed chain of length `m + 1` whose last pair is
/// present as the activation edge; one cloning chain of length `ell`
/// per vertex with three designated pairs at cyclic chain distance at
/// least 2; one disjoint propagational component per edge wiring a seed
/// pair to the two endpoint chains; and all pairs inside the four
/// parity groups of the vertex chains forbidden. Records
/// `k = 13(t ell)^2/4 + 36 t ell (m+1) + 144 (m+1)^2` and the gap `g`
/// implied by the lower bound for `t + 1` active chains.
pub fn reduce_vc_to_gap(vc: &VCInstance, ell: usize) -> Result<GapInstance> {
    if ell < 6 || ell % 2 != 0 {
        return Err(Error::InvalidParam(format!(
            "chain length must be even and at least 6, got {ell}"
        )));
    }
    let h = &vc.graph;
    let n = h.vertex_count();
    let edges = h.edges();
    let m = edges.len();

    let mut host = AnnotatedGraph::new(Graph::new(0));

    // Step 1: seed chain of length m + 1; its last pair becomes an edge.
    let x0 = build_cloning(&mut host, m + 1)?;
    let activation = x0.chain_pair(m + 1);
    host.graph.insert_edge(activation);
    host.activation = Some(activation);

    // Step 2: one chain per vertex with three designated pairs at cyclic
    // distance >= 2: chain indices 1, floor(ell/3)+1, floor(2ell/3)+1.
    let mut vertex_chains = Vec::with_capacity(n);
    let mut designated: Vec<[(Vertex, Vertex); 3]> = Vec::with_capacity(n);
    let slot_indices = [1, ell / 3 + 1, 2 * ell / 3 + 1];
    for _ in 0..n {
        let chain = build_cloning(&mut host, ell)?;
        let pairs = slot_indices.map(|j| {
            let e = chain.chain_pair(j);
            (e.0, e.1)
        });
        vertex_chains.push(chain);
        designated.push(pairs);
    }

    // Step 3: one disjoint propagational component per edge; each vertex
    // uses a distinct designated pair per incident edge.
    let mut slot_used = vec![0usize; n];
    let mut dpcs = Vec::with_capacity(m);
    for (i, e) in edges.iter().enumerate() {
        let (va, vb) = (e.0, e.1);
        let input = x0.chain_pair(i + 1);
        let pa = designated[va][slot_used[va]];
        let pb = designated[vb][slot_used[vb]];
        slot_used[va] += 1;
        slot_used[vb] += 1;
        let handle = place_dpc(
            &mut host,
            PairSite::Existing(input.0, input.1),
            PairSite::Existing(pa.0, pa.1),
            PairSite::Existing(pb.0, pb.1),
        )?;
        dpcs.push(handle.vertices);
    }

    // Step 4: forbid all pairs within the four parity groups of the
    // vertex chains.
    let mut groups: [Vec<Vertex>; 4] = Default::default();
    for chain in &vertex_chains {
        for i in 0..ell {
            let (even, odd) = (i % 2 == 0, i % 2 == 1);
            if even {
                groups[0].push(chain.a[i]);
                groups[2].push(chain.c[i]);
                groups[3].push(chain.b[i]);
            }
            if odd {
                groups[1].push(chain.a[i]);
                groups[2].push(chain.b[i]);
                groups[3].push(chain.c[i]);
            }
        }
    }
    for group in &mut groups {
        group.sort_unstable();
    }
    for group in &groups {
        for (i, &u) in group.iter().enumerate() {
            for &v in &group[i + 1..] {
                let e = Edge::new(u, v);
                if !host.graph.contains(&e) {
                    host.forbid(e)?;
                }
            }
        }
    }

    let t = vc.budget;
    let ell64 = ell as u64;
    let m1 = m as u64 + 1;
    let k = thirteen_quarters_sq(t * ell64) + 36 * t * ell64 * m1 + 144 * m1 * m1;
    let lower_next = thirteen_quarters_sq((t + 1) * ell64).saturating_sub(9 * (t + 1) * ell64);
    let g = lower_next.saturating_sub(k);
    host.k = Some(k);
    host.g = Some(g);

    let meta = GapMeta {
        ell,
        t,
        vc_vertices: n,
        vc_edges: edges.iter().map(|e| (e.0, e.1)).collect(),
        x0,
        vertex_chains,
        designated,
        dpcs,
        groups,
        activation: (activation.0, activation.1),
    };
    Ok(GapInstance {
        graph: host,
        k,
        g,
        ell,
        meta,
    })
}

/// Greedy partition of the seed chain's vertices into independent parts,
/// merging each forbidden chain pair `(b_i, c_{i+1})` into one group
/// first. Works for chains of any length, including odd ones where the
/// four parity groups wrap around inconsistently.
fn seed_chain_parts(g: &Graph, chain: &CloningHandle) -> Vec<Vec<Vertex>> {
    let len = chain.len();
    let mut units: Vec<Vec<Vertex>> = Vec::new();
    for i in 0..len {
        units.push(vec![chain.a[i]]);
    }
    for i in 0..len {
        units.push(vec![chain.b[i], chain.c[(i + 1) % len]]);
    }
    let mut parts: Vec<Vec<Vertex>> = Vec::new();
    for unit in units {
        let conflict = |part: &Vec<Vertex>| {
            part.iter()
                .any(|&u| unit.iter().any(|&v| g.has_edge(u, v)))
        };
        match parts.iter_mut().find(|p| !conflict(p)) {
            Some(part) => part.extend(&unit),
            None => parts.push(unit),
        }
    }
    parts
}

/// Builds the explicit completion certifying the upper bound: given a
/// vertex cover of the source instance, completes the union of the seed
/// chain, the cover chains, and the placed component vertices into one
/// complete multipartite part structure.
///
/// Asserts that the result is prison-free, uses no forbidden pair, and
/// that its size lies within the certified bounds for `t = |cover|`.
pub fn constructive_completion_from_cover(
    gi: &GapInstance,
    cover: &[Vertex],
) -> Result<Solution> {
    let meta = &gi.meta;
    let g = &gi.graph.graph;
    let cover_set: BTreeSet<Vertex> = cover.iter().copied().collect();
    for &(u, v) in &meta.vc_edges {
        if !cover_set.contains(&u) && !cover_set.contains(&v) {
            return Err(Error::NotVertexCover { u, v });
        }
    }

    // Part ids per vertex of the completed component.
    let mut part_of: BTreeMap<Vertex, usize> = BTreeMap::new();
    let mut next_part = 0usize;

    // The four parity groups, restricted to cover chains.
    for group in &meta.groups {
        let members: Vec<Vertex> = group
            .iter()
            .copied()
            .filter(|v| {
                meta.vertex_chains
                    .iter()
                    .enumerate()
                    .any(|(i, c)| cover_set.contains(&i) && c.vertices().binary_search(v).is_ok())
            })
            .collect();
        if members.is_empty() {
            continue;
        }
        for v in members {
            part_of.insert(v, next_part);
        }
        next_part += 1;
    }

    // Seed chain: greedy independent parts with forbidden pairs glued.
    for part in seed_chain_parts(g, &meta.x0) {
        for v in part {
            part_of.insert(v, next_part);
        }
        next_part += 1;
    }

    // Disjoint propagational components, case by case.
    for (idx, &(va, vb)) in meta.vc_edges.iter().enumerate() {
        let ids = &meta.dpcs[idx]; // v1..v11 in figure order
        let v = |slot: usize| ids[slot - 1];
        let a_covered = cover_set.contains(&va);
        let b_covered = cover_set.contains(&vb);
        match (a_covered, b_covered) {
            (true, true) => {
                // Place 9 with 11, 7 with 8, and 3, 4, 5 in new parts.
                part_of.insert(v(9), part_of[&v(11)]);
                part_of.insert(v(7), part_of[&v(8)]);
                for slot in [3, 4, 5] {
                    part_of.insert(v(slot), next_part);
                    next_part += 1;
                }
            }
            (true, false) => {
                // Output e2 side is covered: place 9 with 11, 3 alone,
                // 4 and 5 together; leave 6, 7, 8 outside.
                part_of.insert(v(9), part_of[&v(11)]);
                part_of.insert(v(3), next_part);
                next_part += 1;
                part_of.insert(v(4), next_part);
                part_of.insert(v(5), next_part);
                next_part += 1;
            }
            (false, true) => {
                // Mirror image: place 7 with 8, 4 alone, 3 and 5
                // together; leave 9, 10, 11 outside.
                part_of.insert(v(7), part_of[&v(8)]);
                part_of.insert(v(4), next_part);
                next_part += 1;
                part_of.insert(v(3), next_part);
                part_of.insert(v(5), next_part);
                next_part += 1;
            }
            (false, false) => unreachable!("cover check above"),
        }
    }

    // Complete the component: add every missing cross-part pair.
    let members: Vec<Vertex> = part_of.keys().copied().collect();
    let mut additions = EdgeSet::new();
    for (i, &u) in members.iter().enumerate() {
        for &v in &members[i + 1..] {
            if part_of[&u] != part_of[&v] && !g.has_edge(u, v) {
                additions.insert(Edge::new(u, v));
            }
        }
    }

    // Certify: part independence, no forbidden pair used, prison-free.
    for (i, &u) in members.iter().enumerate() {
        for &v in &members[i + 1..] {
            if part_of[&u] == part_of[&v] && g.has_edge(u, v) {
                return Err(Error::StructuralAssumption(format!(
                    "part contains the edge {u}-{v}"
                )));
            }
        }
    }
    if let Some(e) = additions.iter().find(|e| gi.graph.is_forbidden(e)) {
        return Err(Error::StructuralAssumption(format!(
            "completion would add the forbidden pair {e}"
        )));
    }
    let completed = g.apply_edits(&EdgeSet::new(), &additions)?;
    if crate::structure::has_prison(&completed) {
        return Err(Error::StructuralAssumption(
            "constructed completion is not prison-free".into(),
        ));
    }

    let t = cover.len() as u64;
    let ell = gi.ell as u64;
    let m1 = meta.vc_edges.len() as u64 + 1;
    let upper = thirteen_quarters_sq(t * ell) + 36 * t * ell * m1 + 144 * m1 * m1;
    let lower = thirteen_quarters_sq(t * ell).saturating_sub(9 * t * ell);
    let size = additions.len() as u64;
    if size > upper || size < lower {
        return Err(Error::StructuralAssumption(format!(
            "completion size {size} outside certified bounds [{lower}, {upper}]"
        )));
    }
    Ok(Solution {
        edits: additions,
        mode: EditMode::Completion,
    })
}

/// Shape of the composition tree, serialized into the file's `meta`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositionMeta {
    pub height: usize,
    pub instances: usize,
    /// Shared parameters of the composed instances.
    pub k0: u64,
    pub ell: usize,
    pub m0: usize,
    /// Heap-indexed internal nodes (root = 1): the eleven vertices of
    /// each node's disjoint propagational component.
    pub node_dpcs: BTreeMap<usize, Vec<Vertex>>,
    /// The root input pair, present as an edge.
    pub root_edge: (Vertex, Vertex),
    /// Per instance: offset of its vertices in the composed graph and
    /// its (deleted) activation pair.
    pub leaf_activations: Vec<(Vertex, Vertex)>,
    pub instance_offsets: Vec<usize>,
    /// Output pairs of unused leaf slots, registered forbidden.
    pub unused_outputs: Vec<(Vertex, Vertex)>,
}

/// The composed or-instance over a binary tree of disjoint
/// propagational components.
#[derive(Clone, Debug)]
pub struct CompositionInstance {
    pub graph: AnnotatedGraph,
    pub k: u64,
    pub g: u64,
    pub meta: CompositionMeta,
}

impl CompositionInstance {
    pub fn to_file(&self) -> AnnotatedFile {
        AnnotatedFile {
            annotated: self.graph.clone(),
            meta: Some(
                serde_json::to_value(MetaPayload::Composition(self.meta.clone()))
                    .expect("meta serialization cannot fail"),
            ),
        }
    }

    pub fn from_file(file: &AnnotatedFile) -> Result<Self> {
        let meta = file
            .meta
            .clone()
            .ok_or_else(|| Error::InvalidParam("file carries no meta object".into()))?;
        match serde_json::from_value(meta)? {
            MetaPayload::Composition(meta) => Ok(CompositionInstance {
                graph: file.annotated.clone(),
                k: file.annotated.k.unwrap_or(0),
                g: file.annotated.g.unwrap_or(0),
                meta,
            }),
            MetaPayload::Gap(_) | MetaPayload::Gadget(_) => Err(Error::InvalidParam(
                "file does not hold a composition instance".into(),
            )),
        }
    }

    /// The internal pair of node `node` whose forbidding prunes the
    /// branch toward the other child: forbidding `4-5` forces the
    /// propagation toward the `e2` (left) output, forbidding `3-5`
    /// toward `e3` (right).
    pub fn prune_pair(&self, node: usize, toward_left: bool) -> Edge {
        let ids = &self.meta.node_dpcs[&node];
        if toward_left {
            Edge::new(ids[3], ids[4]) // forbid 4-5, forcing 3-5 then e2
        } else {
            Edge::new(ids[2], ids[4]) // forbid 3-5, forcing 4-5 then e3
        }
    }
}

/// Composes `t >= 1` gap instances sharing the same parameters into a
/// single completion instance: a balanced binary tree of disjoint
/// propagational components whose root input pair is an edge, output
/// pairs identified with children inputs, leaf outputs identified with
/// the instances' activation pairs (which are deleted), and unused
/// outputs forbidden.
pub fn compose(instances: &[GapInstance]) -> Result<CompositionInstance> {
    if instances.is_empty() {
        return Err(Error::InvalidParam("no instances to compose".into()));
    }
    let first = &instances[0];
    let (n0, m0, k0, ell) = (
        first.graph.graph.vertex_count(),
        first.meta.vc_edges.len(),
        first.meta.t,
        first.ell,
    );
    for gi in instances {
        let same = gi.graph.graph.vertex_count() == n0
            && gi.meta.vc_edges.len() == m0
            && gi.meta.t == k0
            && gi.ell == ell;
        if !same {
            return Err(Error::HeterogeneousInstances(format!(
                "expected (n, m, k, ell) = ({n0}, {m0}, {k0}, {ell})"
            )));
        }
    }
    let t = instances.len();
    let h = tree_height(t);
    let ell64 = ell as u64;
    // The gap must absorb the composition slack:
    // 13((k0+1) ell)^2 / 4 - 9 k0 ell > k.
    if !composition_gap_ok(k0, m0, ell64, h) {
        return Err(Error::InvalidParam(format!(
            "chain length {ell} too small for the composition inequality; \
             smallest adequate even length is {}",
            minimum_composable_ell(k0, m0, t)
        )));
    }
    let (k, g_param) = composition_budget(k0, m0, ell64, h);

    // Embed the instances, deleting each activation edge.
    let mut host = AnnotatedGraph::new(Graph::new(0));
    let mut instance_offsets = Vec::with_capacity(t);
    let mut leaf_pairs = Vec::with_capacity(t);
    for gi in instances {
        let offset = host.graph.vertex_count();
        instance_offsets.push(offset);
        host.graph.add_vertices(gi.graph.graph.vertex_count());
        for e in gi.graph.graph.edges() {
            host.graph.insert_edge(Edge::new(e.0 + offset, e.1 + offset));
        }
        let act = Edge::new(gi.meta.activation.0 + offset, gi.meta.activation.1 + offset);
        host.graph.remove_edge(act);
        for e in &gi.graph.forbidden {
            host.forbid(Edge::new(e.0 + offset, e.1 + offset))?;
        }
        leaf_pairs.push(act);
    }

    // Build the tree of disjoint propagational components top-down.
    let mut node_dpcs: BTreeMap<usize, Vec<Vertex>> = BTreeMap::new();
    let mut unused_outputs = Vec::new();
    let root_edge;
    if h == 0 {
        // Single instance: the root input edge is its activation pair.
        let act = leaf_pairs[0];
        host.graph.insert_edge(act);
        root_edge = act;
    } else {
        // Input pairs by heap index; the root's is fresh.
        let fresh = host.graph.add_vertices(2);
        let mut inputs: BTreeMap<usize, Edge> = BTreeMap::new();
        inputs.insert(1, Edge::new(fresh[0], fresh[1]));
        for node in 1..1 << h {
            let input = inputs[&node];
            let child_site = |child: usize| -> PairSite {
                if child < 1 << h {
                    PairSite::Fresh // internal: pair created here, wired below
                } else {
                    let leaf = child - (1 << h);
                    if leaf < t {
                        PairSite::Existing(leaf_pairs[leaf].0, leaf_pairs[leaf].1)
                    } else {
                        PairSite::Fresh // unused slot, forbidden below
                    }
                }
            };
            let left_site = child_site(2 * node);
            let right_site = child_site(2 * node + 1);
            let handle = place_dpc(
                &mut host,
                PairSite::Existing(input.0, input.1),
                left_site,
                right_site,
            )?;
            let out_left = handle.pair("e2");
            let out_right = handle.pair("e3");
            for (child, out) in [(2 * node, out_left), (2 * node + 1, out_right)] {
                if child < 1 << h {
                    inputs.insert(child, out);
                } else {
                    let leaf = child - (1 << h);
                    if leaf >= t {
                        host.forbid(out)?;
                        unused_outputs.push((out.0, out.1));
                    }
                }
            }
            node_dpcs.insert(node, handle.vertices);
        }
        root_edge = inputs[&1];
        host.graph.insert_edge(root_edge);
    }

    host.k = Some(k);
    host.g = Some(g_param);
    host.activation = Some(root_edge);
    let meta = CompositionMeta {
        height: h,
        instances: t,
        k0,
        ell,
        m0,
        node_dpcs,
        root_edge: (root_edge.0, root_edge.1),
        leaf_activations: leaf_pairs.iter().map(|e| (e.0, e.1)).collect(),
        instance_offsets,
        unused_outputs,
    };
    Ok(CompositionInstance {
        graph: host,
        k,
        g: g_param,
        meta,
    })
}
