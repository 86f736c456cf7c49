//! Ingestion of minute-level wearable streams.
//!
//! Raw CSV lines become [`MinuteSample`]s, which are quality-scored and then
//! fused into higher-level events ([`ExerciseSession`], [`SleepSession`]) and
//! weekly aggregates ([`WeeklyFeatures`]).

mod eligibility;
mod parse;
mod quality;
mod segment;
mod weekly;

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trainload::ZoneMinutes;

pub use eligibility::{eligibility, Eligibility, IneligibleReason, UserHistory};
pub use parse::{parse_stream, serialize_samples, ParsedStream, Reject};
pub use quality::{quality, QualityReport, Span};
pub use segment::{segment_exercise, segment_sleep, SessionRules};
pub use weekly::{weekly_features, Week};

/// Heart-rate values outside this range are treated as sensor artefacts.
pub const HR_PLAUSIBLE_MIN: u16 = 25;
pub const HR_PLAUSIBLE_MAX: u16 = 220;
pub const STEPS_PER_MIN_MAX: u16 = 300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("empty span")]
    EmptySpan,
    #[error("span shorter than one day ({minutes} minutes)")]
    SpanTooShort { minutes: i64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityMode {
    Still,
    Walking,
    Running,
    Cycling,
    Other,
    Unknown,
}

impl ActivityMode {
    /// Modes that can be part of an exercise session.
    pub fn is_active(self) -> bool {
        matches!(
            self,
            ActivityMode::Walking | ActivityMode::Running | ActivityMode::Cycling | ActivityMode::Other
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ActivityMode::Still => "still",
            ActivityMode::Walking => "walking",
            ActivityMode::Running => "running",
            ActivityMode::Cycling => "cycling",
            ActivityMode::Other => "other",
            ActivityMode::Unknown => "unknown",
        }
    }
}

impl FromStr for ActivityMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "still" => ActivityMode::Still,
            "walking" => ActivityMode::Walking,
            "running" => ActivityMode::Running,
            "cycling" => ActivityMode::Cycling,
            "other" => ActivityMode::Other,
            "unknown" => ActivityMode::Unknown,
            _ => return Err(format!("unknown activity mode {s:?}")),
        })
    }
}

impl fmt::Display for ActivityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SleepStage {
    None,
    Awake,
    Light,
    Deep,
    Rem,
}

impl SleepStage {
    pub fn as_str(self) -> &'static str {
        match self {
            SleepStage::None => "none",
            SleepStage::Awake => "awake",
            SleepStage::Light => "light",
            SleepStage::Deep => "deep",
            SleepStage::Rem => "rem",
        }
    }
}

impl FromStr for SleepStage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "none" => SleepStage::None,
            "awake" => SleepStage::Awake,
            "light" => SleepStage::Light,
            "deep" => SleepStage::Deep,
            "rem" => SleepStage::Rem,
            _ => return Err(format!("unknown sleep stage {s:?}")),
        })
    }
}

impl fmt::Display for SleepStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Raw values that failed the plausibility bounds. Kept so that serializing
/// a parsed stream reproduces its input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OutOfRange {
    pub hr: Option<i64>,
    pub steps: Option<i64>,
}

/// One minute of fused sensor readings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinuteSample {
    pub ts: DateTime<Utc>,
    pub hr_bpm: Option<u16>,
    pub steps: u16,
    pub activity_mode: ActivityMode,
    pub sleep_stage: SleepStage,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_of_range: Option<OutOfRange>,
}

impl MinuteSample {
    pub fn new(
        ts: DateTime<Utc>,
        hr_bpm: Option<u16>,
        steps: u16,
        activity_mode: ActivityMode,
        sleep_stage: SleepStage,
    ) -> Self {
        Self {
            ts: crate::time::truncate_to_minute(ts),
            hr_bpm,
            steps,
            activity_mode,
            sleep_stage,
            out_of_range: None,
        }
    }

    /// Whether every raw reading of this minute passed the plausibility bounds.
    pub fn is_plausible(&self) -> bool {
        self.out_of_range.is_none()
    }
}

/// A fused exercise event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExerciseSession {
    pub start: DateTime<Utc>,
    /// Exclusive end (start of the minute after the last one).
    pub end: DateTime<Utc>,
    pub duration_min: u32,
    pub mean_hr: f64,
    pub zone_minutes: ZoneMinutes,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageMinutes {
    pub light: u32,
    pub deep: u32,
    pub rem: u32,
    pub awake: u32,
}

impl StageMinutes {
    pub fn total(&self) -> u32 {
        self.light + self.deep + self.rem + self.awake
    }

    pub fn asleep(&self) -> u32 {
        self.light + self.deep + self.rem
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SleepSession {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub stage_minutes: StageMinutes,
    pub wakeups: u32,
    pub sleep_score: f64,
}

impl SleepSession {
    pub fn duration_min(&self) -> u32 {
        self.stage_minutes.total()
    }
}

/// Per-week aggregates used as classifier features.
///
/// Averages cover exactly one local ISO week. Exercise averages are `None`
/// for a week without sessions and sleep fields are `None` for a week
/// without sleep sessions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklyFeatures {
    pub week_start: NaiveDate,
    pub exercise_count: u32,
    pub avg_exercise_min: Option<f64>,
    pub avg_exercise_hr: Option<f64>,
    /// Mean active minutes per day over the 7 days.
    pub avg_active_min: f64,
    pub avg_sleep_score: Option<f64>,
    pub avg_sleep_min: Option<StageAverages>,
    pub avg_wakeups: Option<f64>,
    pub weekly_resting_hr: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageAverages {
    pub light: f64,
    pub deep: f64,
    pub rem: f64,
    pub awake: f64,
}
