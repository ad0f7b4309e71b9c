pub mod annotated;
pub mod error;
pub mod gadgets;
pub mod graph;
pub mod kernel;
pub mod solve;
pub mod structure;
pub mod verify;

pub use annotated::{AnnotatedFile, AnnotatedGraph};
pub use error::{Error, Result};
pub use graph::{Edge, EdgeSet, Graph, Vertex};
