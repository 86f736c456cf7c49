//! Exercise-response classification.
//!
//! Users are grouped by exercise frequency, amount and intensity, labeled by
//! the weekly velocity of their resting heart rate, and a softmax logistic
//! regression predicts the label from profile (and optionally first-week)
//! features under repeated stratified k-fold cross validation.

mod dataset;
mod metrics;
mod model;
mod split;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::WeeklyFeatures;

pub use dataset::{
    gaussian_classes, read_jsonl, synthetic_cohort, write_jsonl, Dataset, FeatureMode, Imputer, UserRecord, BASIC_FEATURES,
    WEEK1_FEATURES,
};
pub use metrics::{
    cross_validate, evaluate, grid_search, ClassMetrics, ConfusionMatrix, CvReport, FoldReport, GridResult,
    Pipeline, Report,
};
pub use model::{gradient_check, train_logreg, HyperParams, LogReg, Standardizer};
pub use split::{split, stratified_kfold, Split};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResponderError {
    #[error("need at least {needed} weeks of features, got {got}")]
    InsufficientWeeks { needed: usize, got: usize },
    #[error("insufficient exercise: {0:.2} sessions per week")]
    InsufficientExercise(f64),
    #[error("ineligible: {0:.2} sessions per week is above 7")]
    Ineligible(f64),
    #[error("vrhr needs at least 2 finite weekly values")]
    TooFewWeeks,
    #[error("empty dataset")]
    Empty,
    #[error("k = {k} folds for {n} samples")]
    TooManyFolds { k: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite loss at epoch {epoch} (lr {learning_rate}, l2 {l2})")]
    NonFiniteLoss { epoch: usize, learning_rate: f64, l2: f64 },
    #[error("dataset line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub const MIN_WEEKS: usize = 4;
pub const AMOUNT_HIGH_MIN: f64 = 30.0;
pub const INTENSITY_HIGH_FRACTION: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frequency {
    Low,
    Mid,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Low,
    High,
}

fn level_name(l: Level) -> &'static str {
    match l {
        Level::Low => "Low",
        Level::High => "High",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExerciseGroup {
    pub frequency: Frequency,
    pub amount: Level,
    pub intensity: Level,
}

impl ExerciseGroup {
    pub fn all() -> Vec<ExerciseGroup> {
        let mut out = Vec::with_capacity(12);
        for frequency in [Frequency::Low, Frequency::Mid, Frequency::High] {
            for amount in [Level::Low, Level::High] {
                for intensity in [Level::Low, Level::High] {
                    out.push(ExerciseGroup { frequency, amount, intensity });
                }
            }
        }
        out
    }

    /// Groups from mean sessions per week, mean minutes per session and
    /// mean session HR.
    pub fn from_means(per_week: f64, minutes: f64, mean_hr: f64, max_hr: u16) -> Result<Self, ResponderError> {
        if per_week < 1.0 {
            return Err(ResponderError::InsufficientExercise(per_week));
        }
        if per_week > 7.0 {
            return Err(ResponderError::Ineligible(per_week));
        }
        let frequency = if per_week < 2.0 {
            Frequency::Low
        } else if per_week < 5.0 {
            Frequency::Mid
        } else {
            Frequency::High
        };
        let amount = if minutes >= AMOUNT_HIGH_MIN { Level::High } else { Level::Low };
        let intensity = if mean_hr >= INTENSITY_HIGH_FRACTION * max_hr as f64 { Level::High } else { Level::Low };
        Ok(Self { frequency, amount, intensity })
    }
}

impl fmt::Display for ExerciseGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let freq = match self.frequency {
            Frequency::Low => "Low",
            Frequency::Mid => "Mid",
            Frequency::High => "High",
        };
        write!(f, "{freq}-{}-{}", level_name(self.amount), level_name(self.intensity))
    }
}

/// Exercise group over an observation window of at least four weeks.
/// Minutes and HR are session-weighted means.
pub fn categorize(weeks: &[WeeklyFeatures], max_hr: u16) -> Result<ExerciseGroup, ResponderError> {
    if weeks.len() < MIN_WEEKS {
        return Err(ResponderError::InsufficientWeeks { needed: MIN_WEEKS, got: weeks.len() });
    }
    let sessions: u32 = weeks.iter().map(|w| w.exercise_count).sum();
    let per_week = sessions as f64 / weeks.len() as f64;
    let weighted = |f: fn(&WeeklyFeatures) -> Option<f64>| {
        let (mut num, mut den) = (0.0, 0.0);
        for w in weeks {
            if let Some(v) = f(w) {
                num += v * w.exercise_count as f64;
                den += w.exercise_count as f64;
            }
        }
        if den > 0.0 { num / den } else { 0.0 }
    };
    let minutes = weighted(|w| w.avg_exercise_min);
    let hr = weighted(|w| w.avg_exercise_hr);
    ExerciseGroup::from_means(per_week, minutes, hr, max_hr)
}

/// Velocity of resting HR: least-squares slope of the weekly values against
/// the week index.
pub fn vrhr(weekly_rhr: &[f64]) -> Result<f64, ResponderError> {
    let n = weekly_rhr.len();
    if n < 2 || weekly_rhr.iter().any(|y| !y.is_finite()) {
        return Err(ResponderError::TooFewWeeks);
    }
    let x_mean = (n as f64 + 1.0) / 2.0;
    let y_mean = weekly_rhr.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in weekly_rhr.iter().enumerate() {
        let dx = (i + 1) as f64 - x_mean;
        sxy += dx * (y - y_mean);
        sxx += dx * dx;
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponderLabel {
    Positive,
    Neutral,
    Negative,
}

impl ResponderLabel {
    pub const ALL: [ResponderLabel; 3] = [ResponderLabel::Positive, ResponderLabel::Neutral, ResponderLabel::Negative];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ResponderLabel::Positive => "positive",
            ResponderLabel::Neutral => "neutral",
            ResponderLabel::Negative => "negative",
        }
    }
}

impl fmt::Display for ResponderLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResponderLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown label {s:?}"))
    }
}

/// Falling resting HR is a positive response; ±0.5 bpm/week is neutral.
pub fn label(v: f64) -> ResponderLabel {
    if v < -0.5 {
        ResponderLabel::Positive
    } else if v <= 0.5 {
        ResponderLabel::Neutral
    } else {
        ResponderLabel::Negative
    }
}
