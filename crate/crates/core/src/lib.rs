//! Exact finite-sample variance analysis for inverse propensity weighted
//! treatment-effect estimators over discrete strata, with a seeded Monte
//! Carlo engine that verifies every closed form by simulation.
//!
//! The crate is organized around four modules:
//!
//! - [`strata`]: the population/data model, validation, and collapsing of
//!   strata that share a propensity.
//! - [`moments`]: closed-form negative binomial moments and the exact means
//!   and variances of the stratum contrasts, including the decomposition of
//!   the true-versus-estimated weighting variance difference and the
//!   split-versus-pooled gap.
//! - [`estimators`]: point estimators on realized datasets (unit-level and
//!   stratified routes, plus the pooling identity check).
//! - [`simulate`]: the deterministic, chunk-seeded replication engine and
//!   parameter sweeps.

#![forbid(unsafe_code)]

pub mod error;
pub mod estimators;
pub mod moments;
mod numeric;
pub mod simulate;
pub mod stats;
pub mod strata;

pub use error::{Error, Result};
pub use estimators::{
    EstimateResult, StratumContrast, UnitRecord, aggregate_units, collapse_identity_check,
    ipw_unitwise, stratified_estimate,
};
pub use moments::{
    GapPolynomials, NegMomentQuery, StratumDifference, StratumVariances, VarianceDifference,
    aggregate_variance, collapsed_pair_gap, gap_polynomials, neg_moment_bruteforce, neg_moment_c1,
    neg_moment_c2, stratum_variances, variance_difference,
};
pub use simulate::{
    EstimatorSummary, MonteCarloReport, OutcomeModel, SimConfig, SweepCell, SweepParameter,
    SweepRow, draw_assignment, draw_outcomes, run_monte_carlo, sweep,
};
pub use stats::RunningMoments;
pub use strata::{
    CollapseGroup, Dataset, GroupingMap, PopulationSpec, StratumSample, StratumSpec,
    ValidationResult, Violation, ViolationKind, WeightingScheme, collapse_by_propensity,
    collapse_dataset, validate,
};
