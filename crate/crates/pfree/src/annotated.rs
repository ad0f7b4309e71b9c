//! Graphs annotated with named non-edges, forbidden non-edges, an optional
//! activation pair and optional budget/gap values, plus their canonical
//! JSON file format.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Vertex};

/// A graph carrying gadget semantics: labeled non-edges, non-edges no
/// completion may add, an optional activation pair, and optional `k`/`g`
/// instance parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotatedGraph {
    pub graph: Graph,
    pub named: BTreeMap<String, Edge>,
    pub forbidden: BTreeSet<Edge>,
    pub activation: Option<Edge>,
    pub k: Option<u64>,
    pub g: Option<u64>,
}

impl AnnotatedGraph {
    pub fn new(graph: Graph) -> Self {
        AnnotatedGraph {
            graph,
            named: BTreeMap::new(),
            forbidden: BTreeSet::new(),
            activation: None,
            k: None,
            g: None,
        }
    }

    pub fn empty() -> Self {
        Self::new(Graph::new(0))
    }

    /// Marks a non-edge as forbidden.
    pub fn forbid(&mut self, e: Edge) -> Result<()> {
        if self.graph.contains(&e) {
            return Err(Error::AlreadyAnEdge { u: e.0, v: e.1 });
        }
        Edge::checked(e.0, e.1, self.graph.vertex_count())?;
        self.forbidden.insert(e);
        Ok(())
    }

    pub fn is_forbidden(&self, e: &Edge) -> bool {
        self.forbidden.contains(e)
    }

    /// Registers a labeled pair; labels must be unique.
    pub fn name(&mut self, label: impl Into<String>, e: Edge) -> Result<()> {
        let label = label.into();
        Edge::checked(e.0, e.1, self.graph.vertex_count())?;
        if self.named.contains_key(&label) {
            return Err(Error::InvalidParam(format!("duplicate label `{label}`")));
        }
        self.named.insert(label, e);
        Ok(())
    }

    /// Non-edges that a completion is allowed to add.
    pub fn allowed_non_edges(&self) -> Vec<Edge> {
        self.graph
            .non_edges()
            .into_iter()
            .filter(|e| !self.forbidden.contains(e))
            .collect()
    }

    /// Checks the structural invariants: all recorded pairs are valid
    /// vertex pairs and forbidden pairs are non-edges.
    pub fn validate(&self) -> Result<()> {
        let n = self.graph.vertex_count();
        let all_pairs = self
            .named
            .values()
            .chain(self.forbidden.iter())
            .chain(self.activation.iter());
        for e in all_pairs {
            Edge::checked(e.0, e.1, n)?;
        }
        for e in &self.forbidden {
            if self.graph.contains(e) {
                return Err(Error::StructuralAssumption(format!(
                    "forbidden pair {e} is an edge"
                )));
            }
        }
        Ok(())
    }
}

/// Flat serialization schema for [`AnnotatedGraph`] files. The optional
/// `meta` object carries builder-specific role maps (gadget labels, gap
/// construction roles, composition tree shape) and round-trips verbatim.
#[derive(Serialize, Deserialize)]
struct AnnotatedJson {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    forbidden: Vec<(Vertex, Vertex)>,
    named: BTreeMap<String, (Vertex, Vertex)>,
    activation: Option<(Vertex, Vertex)>,
    k: Option<u64>,
    g: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<serde_json::Value>,
}

/// An annotated graph together with its optional `meta` payload, as read
/// from or written to a JSON file.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnotatedFile {
    pub annotated: AnnotatedGraph,
    pub meta: Option<serde_json::Value>,
}

impl AnnotatedFile {
    pub fn plain(annotated: AnnotatedGraph) -> Self {
        AnnotatedFile {
            annotated,
            meta: None,
        }
    }

    /// Canonical JSON text: arrays sorted, map keys sorted, trailing
    /// newline. Writing the parse of a written file reproduces it byte
    /// for byte.
    pub fn to_json_string(&self) -> String {
        let a = &self.annotated;
        let doc = AnnotatedJson {
            n: a.graph.vertex_count(),
            edges: a.graph.edges().iter().map(|e| (e.0, e.1)).collect(),
            forbidden: a.forbidden.iter().map(|e| (e.0, e.1)).collect(),
            named: a.named.iter().map(|(l, e)| (l.clone(), (e.0, e.1))).collect(),
            activation: a.activation.map(|e| (e.0, e.1)),
            k: a.k,
            g: a.g,
            meta: self.meta.clone(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: AnnotatedJson = serde_json::from_str(text)?;
        let graph = Graph::from_edge_list(doc.n, doc.edges)?;
        let mut annotated = AnnotatedGraph::new(graph);
        for (u, v) in doc.forbidden {
            annotated.forbid(Edge::checked(u, v, doc.n)?)?;
        }
        for (label, (u, v)) in doc.named {
            annotated.name(label, Edge::checked(u, v, doc.n)?)?;
        }
        annotated.activation = match doc.activation {
            Some((u, v)) => Some(Edge::checked(u, v, doc.n)?),
            None => None,
        };
        annotated.k = doc.k;
        annotated.g = doc.g;
        annotated.validate()?;
        Ok(AnnotatedFile {
            annotated,
            meta: doc.meta,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::prison_graph;

    #[test]
    fn json_round_trip_is_identity() {
        let mut a = AnnotatedGraph::new(prison_graph());
        a.forbid(Edge(0, 1)).unwrap();
        a.name("e1", Edge(0, 2)).unwrap();
        a.activation = Some(Edge(0, 1));
        a.k = Some(3);
        let file = AnnotatedFile::plain(a);
        let text = file.to_json_string();
        let back = AnnotatedFile::from_json_str(&text).unwrap();
        assert_eq!(back, file);
        // Bit-exact: re-serializing the parse reproduces the text.
        assert_eq!(back.to_json_string(), text);
    }

    #[test]
    fn forbidden_must_be_non_edge() {
        let mut a = AnnotatedGraph::new(prison_graph());
        assert!(a.forbid(Edge(3, 4)).is_err());
        assert!(a.forbid(Edge(0, 1)).is_ok());
    }

    #[test]
    fn labels_are_unique() {
        let mut a = AnnotatedGraph::new(prison_graph());
        a.name("x", Edge(0, 1)).unwrap();
        assert!(a.name("x", Edge(0, 2)).is_err());
    }

    #[test]
    fn parse_rejects_forbidden_edge() {
        let text = r#"{"n":3,"edges":[[0,1]],"forbidden":[[0,1]],"named":{},"activation":null,"k":null,"g":null}"#;
        assert!(AnnotatedFile::from_json_str(text).is_err());
    }
}
