use chrono::{DateTime, Duration, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use super::{ExerciseSession, MinuteSample, SleepSession, StageAverages, WeeklyFeatures};
use crate::hse::resting_hr_deep_sleep;
use crate::time::{local_date, local_midnight_utc, week_start};

/// A local ISO week.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Week {
    /// Monday of the week.
    pub start: NaiveDate,
    pub tz_offset_min: i32,
}

impl Week {
    pub fn containing(date: NaiveDate, tz_offset_min: i32) -> Self {
        Self {
            start: week_start(date),
            tz_offset_min,
        }
    }

    pub fn contains(&self, ts: DateTime<Utc>) -> bool {
        let d = local_date(ts, self.tz_offset_min);
        self.start <= d && d < self.start + Duration::days(7)
    }

    pub fn utc_start(&self) -> DateTime<Utc> {
        local_midnight_utc(self.start, self.tz_offset_min)
    }

    pub fn next(&self) -> Self {
        Self {
            start: self.start + Duration::days(7),
            ..*self
        }
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Aggregates one week of events.
///
/// Sessions are assigned to the week of their local start date, sleep
/// sessions to the week of their local end (wake-up) date.
pub fn weekly_features(
    sessions: &[ExerciseSession],
    sleeps: &[SleepSession],
    samples: &[MinuteSample],
    week: Week,
) -> WeeklyFeatures {
    let ex: Vec<&ExerciseSession> = sessions.iter().filter(|s| week.contains(s.start)).collect();
    let sl: Vec<&SleepSession> = sleeps
        .iter()
        .filter(|s| week.contains(s.end - Duration::minutes(1)))
        .collect();
    let week_samples: Vec<MinuteSample> = samples
        .iter()
        .filter(|s| week.contains(s.ts))
        .cloned()
        .collect();

    let active = week_samples
        .iter()
        .filter(|s| s.activity_mode.is_active())
        .count();

    let avg_sleep_min = (!sl.is_empty()).then(|| {
        let n = sl.len() as f64;
        let sum = |f: fn(&SleepSession) -> u32| sl.iter().map(|s| f(s) as f64).sum::<f64>() / n;
        StageAverages {
            light: sum(|s| s.stage_minutes.light),
            deep: sum(|s| s.stage_minutes.deep),
            rem: sum(|s| s.stage_minutes.rem),
            awake: sum(|s| s.stage_minutes.awake),
        }
    });

    WeeklyFeatures {
        week_start: week.start,
        exercise_count: ex.len() as u32,
        avg_exercise_min: mean(ex.iter().map(|s| s.duration_min as f64)),
        avg_exercise_hr: mean(ex.iter().map(|s| s.mean_hr)),
        avg_active_min: active as f64 / 7.0,
        avg_sleep_score: mean(sl.iter().map(|s| s.sleep_score)),
        avg_sleep_min,
        avg_wakeups: mean(sl.iter().map(|s| s.wakeups as f64)),
        weekly_resting_hr: resting_hr_deep_sleep(&week_samples).ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{ActivityMode, SleepStage, StageMinutes};
    use crate::trainload::ZoneMinutes;

    fn monday() -> NaiveDate {
        NaiveDate::from_ymd_opt(2021, 3, 1).unwrap()
    }

    fn session(day: i64, minutes: u32, hr: f64) -> ExerciseSession {
        let start = local_midnight_utc(monday(), 0) + Duration::days(day) + Duration::hours(18);
        ExerciseSession {
            start,
            end: start + Duration::minutes(minutes as i64),
            duration_min: minutes,
            mean_hr: hr,
            zone_minutes: ZoneMinutes::new(minutes as f64, 0.0, 0.0),
        }
    }

    fn night(day: i64, score: f64) -> SleepSession {
        let start = local_midnight_utc(monday(), 0) + Duration::days(day) - Duration::hours(1);
        SleepSession {
            start,
            end: start + Duration::minutes(420),
            stage_minutes: StageMinutes { light: 250, deep: 80, rem: 70, awake: 20 },
            wakeups: 2,
            sleep_score: score,
        }
    }

    #[test]
    fn mean_of_three_sessions() {
        let week = Week::containing(monday(), 0);
        let f = weekly_features(&[session(0, 30, 120.0), session(2, 40, 130.0), session(4, 50, 140.0)], &[], &[], week);
        assert_eq!(f.exercise_count, 3);
        assert_eq!(f.avg_exercise_min, Some(40.0));
        assert_eq!(f.avg_exercise_hr, Some(130.0));
    }

    #[test]
    fn no_exercise_means_absent_averages() {
        let f = weekly_features(&[], &[], &[], Week::containing(monday(), 0));
        assert_eq!(f.exercise_count, 0);
        assert_eq!(f.avg_exercise_min, None);
        assert_eq!(f.avg_exercise_hr, None);
        assert_eq!(f.avg_sleep_score, None);
        assert_eq!(f.avg_sleep_min, None);
    }

    #[test]
    fn sleep_scores_average() {
        let f = weekly_features(&[], &[night(1, 80.0), night(2, 90.0)], &[], Week::containing(monday(), 0));
        assert_eq!(f.avg_sleep_score, Some(85.0));
        assert_eq!(f.avg_wakeups, Some(2.0));
        assert_eq!(f.avg_sleep_min.unwrap().deep, 80.0);
    }

    #[test]
    fn single_session_week_matches_session() {
        let s = session(3, 37, 141.5);
        let f = weekly_features(std::slice::from_ref(&s), &[], &[], Week::containing(monday(), 0));
        assert_eq!(f.avg_exercise_min, Some(s.duration_min as f64));
        assert_eq!(f.avg_exercise_hr, Some(s.mean_hr));
    }

    #[test]
    fn sessions_outside_week_ignored() {
        let f = weekly_features(&[session(-1, 30, 120.0), session(7, 30, 120.0)], &[], &[], Week::containing(monday(), 0));
        assert_eq!(f.exercise_count, 0);
    }

    #[test]
    fn resting_hr_comes_from_deep_sleep() {
        let start = local_midnight_utc(monday(), 0) + Duration::hours(2);
        let samples: Vec<_> = (0..30)
            .map(|i| MinuteSample::new(start + Duration::minutes(i), Some(if i % 2 == 0 { 54 } else { 56 }), 0, ActivityMode::Still, SleepStage::Deep))
            .collect();
        let f = weekly_features(&[], &[], &samples, Week::containing(monday(), 0));
        assert_eq!(f.weekly_resting_hr, Some(55.0));
        assert_eq!(f.avg_active_min, 0.0);
    }
}
