//! Constructive saturated-set machinery on one-sided subshifts of finite type.
//!
//! The crate builds explicit symbol streams whose empirical measures
//! accumulate on a prescribed polygonal set of invariant measures, and
//! certifies the entropy of the resulting point families by exact
//! separated-set counting.
//!
//! * [`shift`]: systems, words, the cylinder metric, mixing analysis,
//!   periodic decomposition, gluing and shadowing.
//! * [`measure`]: Markov measures, mixtures, empirical measures, the weak*
//!   metric and pushforwards.
//! * [`separation`]: word counting, typical-word sets and entropy
//!   estimates.
//! * [`construct`]: the banded construction of generic points and its audits.
//! * [`irregular`]: observables, Birkhoff traces and limit-set classification.
//! * [`archive`]: file formats, run manifests and persisted runs.

pub mod archive;
pub mod construct;
pub mod error;
pub mod irregular;
pub mod linalg;
pub mod measure;
pub mod separation;
pub mod shift;

pub use error::{Error, Result};
pub use measure::{BlockView, ConvexCombination, CylinderTable, MarkovMeasure, Measure};
pub use shift::{PeriodicDecomposition, PowerSystem, ShiftSystem, Word};
