//! Tree transforms feeding the kernel engine: lexical-centered trees from
//! dependency parses, path-enclosed trees from constituency parses,
//! dependency paths and multiword-expression merging.

mod constituency;
mod labeled;
mod lct;
mod mwe;
mod paths;

pub use constituency::{const_to_labeled, extract_pet, parse_bracketed, ConstTree};
pub use labeled::{LabeledTree, NodeKind};
pub use lct::to_lct;
pub use mwe::{collapse_mwe, MweConfig, MweScope};
pub use paths::{dependents, shortest_path};
