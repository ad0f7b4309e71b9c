//! Simple undirected graphs over dense 0-based vertex ids with bitset
//! adjacency rows, plus the canonical edge-set type shared by every other
//! module.

use std::collections::BTreeSet;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vertex id; always dense in `0..n`.
pub type Vertex = usize;

/// An unordered vertex pair stored with the smaller id first.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge(pub Vertex, pub Vertex);

impl Edge {
    /// Canonicalizes the pair; panics on self-loops, which no caller
    /// should be able to produce from validated input.
    pub fn new(u: Vertex, v: Vertex) -> Self {
        assert!(u != v, "self-loop {u}");
        if u < v {
            Edge(u, v)
        } else {
            Edge(v, u)
        }
    }

    pub fn checked(u: Vertex, v: Vertex, n: usize) -> Result<Self> {
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        for w in [u, v] {
            if w >= n {
                return Err(Error::VertexOutOfRange { vertex: w, n });
            }
        }
        Ok(Self::new(u, v))
    }

    pub fn touches(&self, v: Vertex) -> bool {
        self.0 == v || self.1 == v
    }

    pub fn shares_vertex(&self, other: &Edge) -> bool {
        self.touches(other.0) || self.touches(other.1)
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

/// A set of unordered vertex pairs in canonical (lexicographic) order.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeSet(pub BTreeSet<Edge>);

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_iter<I: IntoIterator<Item = Edge>>(iter: I) -> Self {
        EdgeSet(iter.into_iter().collect())
    }

    pub fn insert(&mut self, e: Edge) -> bool {
        self.0.insert(e)
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.0.contains(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Edge> {
        self.0.iter()
    }

    pub fn is_disjoint(&self, other: &EdgeSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    /// Intersection as a new set.
    pub fn intersection(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet(self.0.intersection(&other.0).copied().collect())
    }

    /// All vertices touched by some member pair, sorted.
    pub fn vertices(&self) -> Vec<Vertex> {
        let mut vs: BTreeSet<Vertex> = BTreeSet::new();
        for e in &self.0 {
            vs.insert(e.0);
            vs.insert(e.1);
        }
        vs.into_iter().collect()
    }
}

impl fmt::Debug for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

impl FromIterator<Edge> for EdgeSet {
    fn from_iter<T: IntoIterator<Item = Edge>>(iter: T) -> Self {
        EdgeSet(iter.into_iter().collect())
    }
}

/// Simple undirected graph with symmetric, irreflexive bitset adjacency.
///
/// Graphs are value types: every operation that changes the edge set
/// returns a new graph (or is an explicit `&mut self` builder step during
/// construction), so callers can hold immutable snapshots safely.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<FixedBitSet>,
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn new(n: usize) -> Self {
        Graph {
            n,
            adj: vec![FixedBitSet::with_capacity(n); n],
        }
    }

    /// Builds a graph from an explicit edge list; duplicates collapse.
    pub fn from_edge_list<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut g = Graph::new(n);
        for (u, v) in pairs {
            let e = Edge::checked(u, v, n)?;
            g.insert_edge(e);
        }
        Ok(g)
    }

    /// Complete graph on `n` vertices.
    pub fn complete(n: usize) -> Self {
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.insert_edge(Edge(u, v));
            }
        }
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|row| row.count_ones(..)).sum::<usize>() / 2
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n && v < self.n && u != v && self.adj[u].contains(v)
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.has_edge(e.0, e.1)
    }

    pub fn degree(&self, u: Vertex) -> usize {
        self.adj[u].count_ones(..)
    }

    /// Mutating builder step; callers hand out only finished values.
    pub fn insert_edge(&mut self, e: Edge) {
        self.adj[e.0].insert(e.1);
        self.adj[e.1].insert(e.0);
    }

    pub fn remove_edge(&mut self, e: Edge) {
        self.adj[e.0].remove(e.1);
        self.adj[e.1].remove(e.0);
    }

    /// Appends `count` isolated vertices, returning their new ids.
    pub fn add_vertices(&mut self, count: usize) -> Vec<Vertex> {
        let fresh: Vec<Vertex> = (self.n..self.n + count).collect();
        self.n += count;
        for row in &mut self.adj {
            row.grow(self.n);
        }
        self.adj
            .extend(std::iter::repeat(FixedBitSet::with_capacity(self.n)).take(count));
        fresh
    }

    pub fn neighbors(&self, u: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.adj[u].ones()
    }

    pub fn neighbor_row(&self, u: Vertex) -> &FixedBitSet {
        &self.adj[u]
    }

    /// Edges in canonical order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for v in self.adj[u].ones() {
                if v > u {
                    out.push(Edge(u, v));
                }
            }
        }
        out
    }

    pub fn edge_set(&self) -> EdgeSet {
        EdgeSet(self.edges().into_iter().collect())
    }

    /// Non-edges (valid pairs that are not edges) in canonical order.
    pub fn non_edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.adj[u].contains(v) {
                    out.push(Edge(u, v));
                }
            }
        }
        out
    }

    fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v >= self.n {
            return Err(Error::VertexOutOfRange {
                vertex: v,
                n: self.n,
            });
        }
        Ok(())
    }

    /// Graph whose edge set is exactly the non-edges of `self`.
    pub fn complement(&self) -> Graph {
        let mut g = Graph::new(self.n);
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.adj[u].contains(v) {
                    g.insert_edge(Edge(u, v));
                }
            }
        }
        g
    }

    /// Common neighborhood `N(u) ∩ N(v)` of a pair, excluding `u` and `v`
    /// themselves. The pair need not be an edge.
    pub fn common_neighborhood(&self, u: Vertex, v: Vertex) -> Result<Vec<Vertex>> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        Ok(self.adj[u].intersection(&self.adj[v]).collect())
    }

    /// Relabeled induced subgraph on `vs` plus the old → new id map
    /// (pairs `(old, new)` sorted by old id).
    pub fn induced_subgraph(&self, vs: &[Vertex]) -> Result<(Graph, Vec<(Vertex, Vertex)>)> {
        let mut sorted: Vec<Vertex> = vs.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateVertex(w[0]));
            }
        }
        if let Some(&max) = sorted.last() {
            self.check_vertex(max)?;
        }
        let mut g = Graph::new(sorted.len());
        for (i, &u) in sorted.iter().enumerate() {
            for (j, &v) in sorted.iter().enumerate().skip(i + 1) {
                if self.adj[u].contains(v) {
                    g.insert_edge(Edge(i, j));
                }
            }
        }
        let map = sorted.iter().copied().zip(0..).collect();
        Ok((g, map))
    }

    /// Returns a copy with `delete` removed and `add` inserted.
    ///
    /// Rejects deleting a non-edge, adding an existing edge, and
    /// overlapping edit sets, so edits always invert cleanly.
    pub fn apply_edits(&self, delete: &EdgeSet, add: &EdgeSet) -> Result<Graph> {
        if !delete.is_disjoint(add) {
            let e = delete.intersection(add).0.into_iter().next().unwrap();
            return Err(Error::InvalidParam(format!(
                "edit sets overlap on pair {e}"
            )));
        }
        for e in delete.iter() {
            self.check_vertex(e.1)?;
            if !self.contains(e) {
                return Err(Error::NotAnEdge { u: e.0, v: e.1 });
            }
        }
        for e in add.iter() {
            self.check_vertex(e.1)?;
            if self.contains(e) {
                return Err(Error::AlreadyAnEdge { u: e.0, v: e.1 });
            }
        }
        let mut g = self.clone();
        for e in delete.iter() {
            g.remove_edge(*e);
        }
        for e in add.iter() {
            g.insert_edge(*e);
        }
        Ok(g)
    }

    /// Parses the edge-list text format: optional `#` comment lines, a
    /// header line `n m`, then `m` lines `u v`.
    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        let mut data_lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (line_no, header) = data_lines
            .next()
            .ok_or_else(|| Error::Parse {
                line: 0,
                msg: "missing header line \"n m\"".into(),
            })?;
        let mut parts = header.split_whitespace();
        let parse_num = |tok: Option<&str>, line: usize, what: &str| -> Result<usize> {
            tok.ok_or_else(|| Error::Parse {
                line,
                msg: format!("missing {what}"),
            })?
            .parse()
            .map_err(|_| Error::Parse {
                line,
                msg: format!("invalid {what}"),
            })
        };
        let n = parse_num(parts.next(), line_no, "vertex count")?;
        let m = parse_num(parts.next(), line_no, "edge count")?;
        if parts.next().is_some() {
            return Err(Error::Parse {
                line: line_no,
                msg: "trailing tokens after \"n m\" header".into(),
            });
        }

        let mut g = Graph::new(n);
        let mut seen = 0usize;
        for (line, l) in data_lines {
            let mut parts = l.split_whitespace();
            let u = parse_num(parts.next(), line, "endpoint")?;
            let v = parse_num(parts.next(), line, "endpoint")?;
            if parts.next().is_some() {
                return Err(Error::Parse {
                    line,
                    msg: "trailing tokens after edge".into(),
                });
            }
            let e = Edge::checked(u, v, n).map_err(|err| Error::Parse {
                line,
                msg: err.to_string(),
            })?;
            g.insert_edge(e);
            seen += 1;
        }
        if seen != m {
            return Err(Error::Parse {
                line: 0,
                msg: format!("header announced {m} edges but {seen} were listed"),
            });
        }
        Ok(g)
    }

    /// Writes the edge-list text format with edges in canonical order.
    pub fn write_edge_list(&self) -> String {
        let edges = self.edges();
        let mut out = format!("{} {}\n", self.n, edges.len());
        for e in edges {
            out.push_str(&format!("{} {}\n", e.0, e.1));
        }
        out
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edges())
    }
}

/// The 5-vertex prison on ids `0..5`: `K5` minus the two adjacent
/// non-edges `0-1` and `0-2`. Handy fixture for tests and docs.
pub fn prison_graph() -> Graph {
    let mut g = Graph::complete(5);
    g.remove_edge(Edge(0, 1));
    g.remove_edge(Edge(0, 2));
    g
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn from_edge_list_empty_and_complete() {
        let g = Graph::from_edge_list(0, Vec::new()).unwrap();
        assert_eq!(g.vertex_count(), 0);
        assert_eq!(g.edge_count(), 0);

        let pairs: Vec<_> = (0..5)
            .flat_map(|u| (u + 1..5).map(move |v| (u, v)))
            .collect();
        let g = Graph::from_edge_list(5, pairs).unwrap();
        assert_eq!(g, Graph::complete(5));
        assert_eq!(g.edge_count(), 10);
    }

    #[test]
    fn from_edge_list_prison() {
        // K5 minus {0,1},{0,2}.
        let pairs = vec![
            (0, 3),
            (0, 4),
            (1, 2),
            (1, 3),
            (1, 4),
            (2, 3),
            (2, 4),
            (3, 4),
        ];
        let g = Graph::from_edge_list(5, pairs).unwrap();
        assert_eq!(g, prison_graph());
        assert_eq!(g.edge_count(), 8);
    }

    #[test]
    fn from_edge_list_rejects_bad_input() {
        assert!(matches!(
            Graph::from_edge_list(3, vec![(0, 3)]),
            Err(Error::VertexOutOfRange { vertex: 3, n: 3 })
        ));
        assert!(matches!(
            Graph::from_edge_list(3, vec![(1, 1)]),
            Err(Error::SelfLoop(1))
        ));
    }

    #[test]
    fn complement_cases() {
        assert_eq!(Graph::complete(5).complement(), Graph::new(5));
        // complement(prison) = P3 + 2K1: edges 0-1 and 0-2 share vertex 0,
        // vertices 3 and 4 are isolated.
        let c = prison_graph().complement();
        assert_eq!(c.edges(), vec![Edge(0, 1), Edge(0, 2)]);
        assert_eq!(c.degree(3), 0);
        assert_eq!(c.degree(4), 0);
    }

    #[test]
    fn complement_involution_and_edge_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(0..12);
            let g = random_graph(&mut rng, n, 0.5);
            assert_eq!(g.complement().complement(), g);
            assert_eq!(
                g.edge_count() + g.complement().edge_count(),
                n * n.saturating_sub(1) / 2
            );
        }
    }

    #[test]
    fn common_neighborhood_cases() {
        let k5 = Graph::complete(5);
        assert_eq!(k5.common_neighborhood(0, 1).unwrap(), vec![2, 3, 4]);
        let empty = Graph::new(4);
        assert!(empty.common_neighborhood(1, 3).unwrap().is_empty());
        // Prison with non-edges 0-1, 0-2: N(3) ∩ N(4) = {0,1,2}.
        assert_eq!(
            prison_graph().common_neighborhood(3, 4).unwrap(),
            vec![0, 1, 2]
        );
        assert!(k5.common_neighborhood(0, 7).is_err());
    }

    #[test]
    fn induced_subgraph_cases() {
        let k5 = Graph::complete(5);
        let (k3, map) = k5.induced_subgraph(&[0, 1, 2]).unwrap();
        assert_eq!(k3, Graph::complete(3));
        assert_eq!(map, vec![(0, 0), (1, 1), (2, 2)]);

        let (empty, map) = k5.induced_subgraph(&[]).unwrap();
        assert_eq!(empty.vertex_count(), 0);
        assert!(map.is_empty());

        // Dropping a degree-3 vertex of the prison leaves the diamond
        // (K4 minus one edge). Vertices 1 and 2 have degree 3.
        let (d, _) = prison_graph().induced_subgraph(&[0, 2, 3, 4]).unwrap();
        assert_eq!(d.edge_count(), 5);
        let non = d.non_edges();
        assert_eq!(non.len(), 1);

        assert!(prison_graph().induced_subgraph(&[0, 0, 1]).is_err());
    }

    #[test]
    fn apply_edits_cases() {
        let k5 = Graph::complete(5);
        let del = EdgeSet::from_iter([Edge(0, 1), Edge(0, 2)]);
        let got = k5.apply_edits(&del, &EdgeSet::new()).unwrap();
        assert_eq!(got, prison_graph());

        let add = EdgeSet::from_iter([Edge(0, 1), Edge(0, 2)]);
        let back = got.apply_edits(&EdgeSet::new(), &add).unwrap();
        assert_eq!(back, k5);

        assert_eq!(
            k5.apply_edits(&EdgeSet::new(), &EdgeSet::new()).unwrap(),
            k5
        );

        assert!(k5.apply_edits(&EdgeSet::new(), &add).is_err());
        assert!(prison_graph()
            .apply_edits(&EdgeSet::from_iter([Edge(0, 1)]), &EdgeSet::new())
            .is_err());
    }

    #[test]
    fn apply_edits_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let g = random_graph(&mut rng, 9, 0.5);
            let edges = g.edges();
            let non = g.non_edges();
            let del = EdgeSet::from_iter(edges.into_iter().filter(|_| rng.gen_bool(0.3)));
            let add = EdgeSet::from_iter(non.into_iter().filter(|_| rng.gen_bool(0.3)));
            let h = g.apply_edits(&del, &add).unwrap();
            assert_eq!(h.apply_edits(&add, &del).unwrap(), g);
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let n = rng.gen_range(0..12);
            let g = random_graph(&mut rng, n, 0.4);
            let text = g.write_edge_list();
            let back = Graph::parse_edge_list(&text).unwrap();
            assert_eq!(back, g);
            // Writer output is already canonical.
            assert_eq!(back.write_edge_list(), text);
        }
    }

    #[test]
    fn edge_list_parse_diagnostics() {
        assert!(matches!(
            Graph::parse_edge_list(""),
            Err(Error::Parse { .. })
        ));
        let err = Graph::parse_edge_list("# c\n3 1\n0 5\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(Graph::parse_edge_list("2 2\n0 1\n").is_err());
    }
}
