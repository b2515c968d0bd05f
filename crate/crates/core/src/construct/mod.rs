//! The banded construction of a point whose empirical measures accumulate
//! exactly on a target path, with its audits.
//!
//! Pipeline: [`build_chain`] picks the dense sequence of working measures,
//! [`solve_schedule`] fixes every integer of the construction,
//! [`generate_point`] writes the stream, and the `verify_*` functions
//! audit it. [`Construction`] bundles the pipeline, including the power
//! route for families of period greater than one.

mod audit;
mod chain;
mod family;
mod route;
mod schedule;
mod stream;

pub use audit::{
    audit_tracking, sample_separated_pairs, separated_family_certificate, tracking_targets, verify_tracking, verify_transitivity,
    verify_windows, Certificate, CheckpointTarget, FirstHits, PairCheck, TrackingReport, TrackingRow, TransitivityReport,
    TransitivityRow, WindowReport, AUDIT_DEPTH,
};
pub use chain::{build_chain, zigzag, GammaMode, MeasureChain};
pub use family::{FamilyFile, NestedFamily, TargetPath, DENSITY_CAP};
pub use route::{mixing_route, Construction, ConstructionConfig, Route};
pub use schedule::{
    choose_zeta1, eps_sequence, smallest_extension, solve_schedule, BandPlan, InequalityCheck, Item, ItemKind, Plan, Schedule,
    ScheduleConfig, ZETA_GRID,
};
pub use stream::{band_rng, band_windows, fnv1a, generate_point, inject_fault, CheckpointEntry, SymbolStream};
