//! Diagnostics on computed fields: isothermic deviation, reflection tests,
//! corner fits, convergence studies and the chain report.

mod chain;
mod convergence;
mod corner;
mod deviation;
mod reflection;
mod transform_check;

pub use chain::{
    chain_report, ChainOptions, ChainReport, DirectionDiagnostics, Relation, RelationStatus, RelationVerdict,
    ResolutionDiagnostics, VALUE_BAND_C,
};
pub use convergence::{convergence_study, fitted_order, interior_error, RateTable, StudyKind, StudyParams};
pub use corner::{corner_check, CornerOptions, CornerReport, GraphFit, LocalJet, CORNER_BAND_C};
pub use deviation::{
    elliptic_deviation, isothermic_deviation, persistence, weighted_mean_std, DeviationReport, Persistence,
    RowDeviation, MIN_SAMPLES, PERSISTENCE_FRACTION,
};
pub use reflection::{
    hopf_check, reflected_difference, reflected_difference_of, HopfReport, HopfVerdict, ReflectedField, HOPF_BAND_C,
};
pub use transform_check::{transform_check, TransformCheck};
