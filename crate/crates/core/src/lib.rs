//! Personal health navigation for cardiovascular fitness.
//!
//! The crate is organized as the layers of a closed sense → estimate → plan →
//! guide loop:
//!
//! - [`ingest`]: minute-level wearable streams to exercise/sleep events and
//!   weekly feature aggregates.
//! - [`hse`]: health state estimation (ASCVD risk weighted by deep-sleep
//!   resting HR, VO₂Max indicators) backed by a versioned [`hse::KnowledgeBank`].
//! - [`statespace`]: general and personal health state spaces, discretized
//!   into a labeled lattice graph.
//! - [`trainload`]: TRIMP, CTL/ATL/TSB bookkeeping and the readiness zones.
//! - [`guidance`]: route planning over the state graph and the daily
//!   exercise controller.
//! - [`responder`]: exercise-response labeling and the logistic-regression
//!   classification pipeline.
//! - [`sim`]: a virtual user for exercising the loop end to end.

pub mod guidance;
pub mod hse;
pub mod ingest;
pub mod responder;
pub mod sim;
pub mod statespace;
pub mod time;
pub mod trainload;

pub use guidance::{Controller, DailyGuidance, Route, WeeklyPlan};
pub use hse::{HealthState, KnowledgeBank, Sex, UserProfile};
pub use ingest::{ExerciseSession, MinuteSample, SleepSession, WeeklyFeatures};
pub use statespace::StateGraph;
pub use trainload::{TrainingLoadState, TsbZone, ZoneMinutes};
