use std::collections::{BTreeMap, BTreeSet};

use chrono::Duration;
use serde::{Deserialize, Serialize};

use super::{quality, ExerciseSession, MinuteSample, Span};
use crate::time::{local_date, local_midnight_utc, week_start};

/// Everything eligibility looks at for one user.
#[derive(Debug, Clone, Copy)]
pub struct UserHistory<'a> {
    /// Sorted samples.
    pub samples: &'a [MinuteSample],
    pub sessions: &'a [ExerciseSession],
    pub tz_offset_min: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IneligibleReason {
    /// Fewer than 84 consecutive days with data up to the last sample.
    ContinuousUse,
    Continuity,
    Accuracy,
    /// No run of 4 consecutive weeks with at least one exercise session each.
    ExerciseWeeks,
}

impl IneligibleReason {
    pub fn as_str(self) -> &'static str {
        match self {
            IneligibleReason::ContinuousUse => "continuous_use",
            IneligibleReason::Continuity => "continuity",
            IneligibleReason::Accuracy => "accuracy",
            IneligibleReason::ExerciseWeeks => "exercise_weeks",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eligibility {
    pub eligible: bool,
    pub reasons: Vec<IneligibleReason>,
}

pub const CONTINUOUS_USE_DAYS: i64 = 84;
pub const MIN_CONTINUITY: f64 = 0.70;
pub const MIN_ACCURACY: f64 = 0.70;
pub const CONSECUTIVE_EXERCISE_WEEKS: usize = 4;

/// Dataset inclusion check: three months of continuous use, continuity and
/// accuracy above 70 %, and a session in each of 4 consecutive weeks.
///
/// Quality is scored over the 84-day window ending on the last local day
/// with data.
pub fn eligibility(history: UserHistory<'_>) -> Eligibility {
    let tz = history.tz_offset_min;
    let mut reasons = Vec::new();

    let days: BTreeSet<_> = history
        .samples
        .iter()
        .map(|s| local_date(s.ts, tz))
        .collect();
    let Some(&last_day) = days.iter().next_back() else {
        return Eligibility {
            eligible: false,
            reasons: vec![
                IneligibleReason::ContinuousUse,
                IneligibleReason::Continuity,
                IneligibleReason::Accuracy,
                IneligibleReason::ExerciseWeeks,
            ],
        };
    };
    let first_day = last_day - Duration::days(CONTINUOUS_USE_DAYS - 1);
    let continuous = (0..CONTINUOUS_USE_DAYS).all(|i| days.contains(&(first_day + Duration::days(i))));
    if !continuous {
        reasons.push(IneligibleReason::ContinuousUse);
    }

    let span = Span::days(local_midnight_utc(first_day, tz), CONTINUOUS_USE_DAYS);
    let q = quality(history.samples, span).expect("84-day span is valid");
    if q.continuity <= MIN_CONTINUITY {
        reasons.push(IneligibleReason::Continuity);
    }
    if q.accuracy <= MIN_ACCURACY {
        reasons.push(IneligibleReason::Accuracy);
    }

    let mut per_week: BTreeMap<_, usize> = BTreeMap::new();
    for s in history.sessions {
        *per_week.entry(week_start(local_date(s.start, tz))).or_default() += 1;
    }
    if !has_consecutive_weeks(per_week.keys().copied(), CONSECUTIVE_EXERCISE_WEEKS) {
        reasons.push(IneligibleReason::ExerciseWeeks);
    }

    Eligibility {
        eligible: reasons.is_empty(),
        reasons,
    }
}

fn has_consecutive_weeks(weeks: impl Iterator<Item = chrono::NaiveDate>, need: usize) -> bool {
    let mut run = 0;
    let mut prev: Option<chrono::NaiveDate> = None;
    for w in weeks {
        run = match prev {
            Some(p) if w - p == Duration::days(7) => run + 1,
            _ => 1,
        };
        if run >= need {
            return true;
        }
        prev = Some(w);
    }
    false
}
