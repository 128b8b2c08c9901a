//! Tree kernels over Universal Dependencies parses.
//!
//! The crate turns CoNLL-U sentences into kernel-ready trees, evaluates the
//! subset-tree, partial-tree and smoothed partial-tree kernels, combines them
//! for sentence-pair and relation classification, and trains one-vs-rest
//! kernel SVMs over precomputed Gram matrices.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`.

pub mod combine;
pub mod error;
pub mod features;
pub mod kernels;
pub mod learn;
pub mod lexsim;
pub mod scalar;
pub mod treebank;
pub mod treeform;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Gram = learn::GramMatrix<f64>;
pub type PairModel = learn::SvmModel<f64, combine::PairTrees>;
pub type RelationModel = learn::SvmModel<f64, combine::RelationTrees<f64>>;
pub type Lexicon = lexsim::Lexicon<f64>;
pub type EmbeddingStore = lexsim::EmbeddingStore<f64>;
