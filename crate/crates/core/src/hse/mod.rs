//! Health state estimation.
//!
//! Places a user in the (ASCVD risk, VO₂Max) plane: the 10-year ASCVD risk
//! from the profile, weighted by a relative-risk multiplier for resting
//! heart rate measured during deep sleep, plus a VO₂Max indicator from the
//! latest step or walk test. Every coefficient comes from a
//! [`KnowledgeBank`].

mod bank;
mod estimate;
mod fixtures;
mod profile;

use thiserror::Error;

pub use bank::{
    AscvdModel, AscvdTable, AscvdTerm, ConfidenceModel, Curve, CurveTable, DimensionBounds,
    GrowthRate, KnowledgeBank, Move, RhrBand, RoiSpec, TransitionRule, SCHEMA_VERSION,
};
pub use estimate::{
    ascvd_risk, estimate_health_state, modified_risk, resting_hr_deep_sleep, vo2max_step_test,
    vo2max_walk_test, Confidence, FitnessTest, HealthState, StepTestResult, TestKind,
    MIN_DEEP_SLEEP_MINUTES, MIN_NIGHTS,
};
pub use fixtures::{Fixture, FixtureFailure};
pub use profile::{Sex, UserProfile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HseError {
    #[error("insufficient data: {stream}: {detail}")]
    InsufficientData { stream: &'static str, detail: String },
    #[error("out of model range: {0}")]
    OutOfModelRange(String),
    #[error("invalid test: {0}")]
    InvalidTest(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("knowledge bank: {0}")]
    Bank(String),
}
