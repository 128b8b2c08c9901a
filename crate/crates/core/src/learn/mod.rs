//! Kernel SVM training and prediction over precomputed Gram matrices.

mod gram;
mod model;
mod svm;

pub use gram::{compute_gram, fingerprint, kernel_rows, GramMatrix, InstanceKernel};
pub use model::{ClassModel, ModelParts, Prediction, Strategy, SvmModel, TrainingMeta, MODEL_VERSION};
pub use svm::{costs, train_binary, train_ovr, train_ovr_with_classes, BinarySolution, OvrSolution, SvmParams};
