//! Kernel inducing point distillation for imbalanced tabular classification.
//!
//! A small synthetic coreset is optimized so that a kernel ridge regression
//! model fitted on it scores the real training data well under a chosen
//! objective (squared error, cross-entropy, re-balanced cross-entropy, focal
//! loss, or the shifted-sigmoid asymmetric focal loss). Coresets are then
//! evaluated by training downstream classifiers on them and comparing with
//! full-data and random-subset baselines.
//!
//! Module map:
//!
//! - [`data`]: CSV ingestion, standardization, splits, subsets, synthetic data.
//! - [`kernel`]: Gram matrices, ridge solves, and reverse-mode gradients.
//! - [`objectives`]: the distillation losses and the decision-boundary shift.
//! - [`distill`]: the coreset optimization loop and coreset export.
//! - [`eval`]: classifiers, metrics, and experiment sweeps.
//! - [`pca`]: fixed-basis 2-D projections for distribution comparisons.

pub mod data;
pub mod distill;
pub mod error;
pub mod eval;
pub mod kernel;
pub mod objectives;
pub mod pca;
pub mod rng;

pub use data::{Dataset, SplitSpec, Standardization};
pub use distill::{DistillConfig, DistillTrace, SyntheticSet};
pub use error::{Error, ErrorCategory, Result};
pub use eval::{ClassifierSpec, EvalReport, SweepResult};
pub use kernel::{KernelSpec, KrrModel};
pub use objectives::Objective;
pub use pca::PcaModel;
