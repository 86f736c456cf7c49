//! Event fusion: runs of minute samples become exercise and sleep sessions.

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use super::{ExerciseSession, MinuteSample, SleepSession, SleepStage, StageMinutes};
use crate::trainload::{HrZone, ZoneMinutes};

/// Boundaries used when fusing minutes into sessions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionRules {
    /// Runs separated by at most this many minutes are merged.
    pub max_gap_min: i64,
    /// Exercise sessions shorter than this are dropped.
    pub min_exercise_min: u32,
    /// Sleep sessions shorter than this are dropped.
    pub min_sleep_min: u32,
}

impl Default for SessionRules {
    fn default() -> Self {
        Self {
            max_gap_min: 2,
            min_exercise_min: 5,
            min_sleep_min: 60,
        }
    }
}

/// Groups sorted timestamps of selected minutes into runs, merging runs
/// whose gap is at most `max_gap` minutes. Returns `(first, last)` indices.
fn runs<F>(samples: &[MinuteSample], max_gap: i64, keep: F) -> Vec<(usize, usize)>
where
    F: Fn(&MinuteSample) -> bool,
{
    let mut out: Vec<(usize, usize)> = Vec::new();
    let mut last_ts: Option<DateTime<Utc>> = None;
    for (i, s) in samples.iter().enumerate() {
        if !keep(s) {
            continue;
        }
        match (out.last_mut(), last_ts) {
            (Some(run), Some(prev)) if (s.ts - prev).num_minutes() - 1 <= max_gap => run.1 = i,
            _ => out.push((i, i)),
        }
        last_ts = Some(s.ts);
    }
    out
}

/// Finds exercise sessions in sorted samples.
///
/// A session is a maximal run of active minutes with heart rate present,
/// where gaps of up to `rules.max_gap_min` minutes are absorbed. Gap minutes
/// count toward the duration and are bucketed by their HR when present,
/// else into the low zone.
pub fn segment_exercise(
    samples: &[MinuteSample],
    max_hr: u16,
    rules: &SessionRules,
) -> Vec<ExerciseSession> {
    let is_exercise = |s: &MinuteSample| s.activity_mode.is_active() && s.hr_bpm.is_some();
    runs(samples, rules.max_gap_min, is_exercise)
        .into_iter()
        .filter_map(|(first, last)| {
            let start = samples[first].ts;
            let end = samples[last].ts + Duration::minutes(1);
            let duration_min = (end - start).num_minutes() as u32;
            if duration_min < rules.min_exercise_min {
                return None;
            }
            let mut zones = ZoneMinutes::default();
            let mut hr_sum = 0.0;
            let mut hr_n = 0u32;
            for s in &samples[first..=last] {
                if let Some(hr) = s.hr_bpm {
                    hr_sum += hr as f64;
                    hr_n += 1;
                    zones.add(HrZone::classify(hr, max_hr), 1.0);
                } else {
                    zones.add(HrZone::Low, 1.0);
                }
            }
            // Minutes missing entirely from the stream inside a merged gap.
            let missing = duration_min as f64 - zones.total();
            zones.add(HrZone::Low, missing);
            Some(ExerciseSession {
                start,
                end,
                duration_min,
                mean_hr: hr_sum / hr_n as f64,
                zone_minutes: zones,
            })
        })
        .collect()
}

/// Finds sleep sessions in sorted samples.
///
/// Minutes with any sleep stage other than `none` form sessions; merged gap
/// minutes count as awake. A wake-up is an awake run strictly inside the
/// session.
pub fn segment_sleep(samples: &[MinuteSample], rules: &SessionRules) -> Vec<SleepSession> {
    runs(samples, rules.max_gap_min, |s| s.sleep_stage != SleepStage::None)
        .into_iter()
        .filter_map(|(first, last)| {
            let start = samples[first].ts;
            let end = samples[last].ts + Duration::minutes(1);
            let duration = (end - start).num_minutes() as u32;
            if duration < rules.min_sleep_min {
                return None;
            }
            // Stage per minute offset, gap minutes awake.
            let mut stages = vec![SleepStage::Awake; duration as usize];
            for s in &samples[first..=last] {
                if s.sleep_stage != SleepStage::None {
                    stages[(s.ts - start).num_minutes() as usize] = s.sleep_stage;
                }
            }
            let mut minutes = StageMinutes::default();
            for st in &stages {
                match st {
                    SleepStage::Light => minutes.light += 1,
                    SleepStage::Deep => minutes.deep += 1,
                    SleepStage::Rem => minutes.rem += 1,
                    _ => minutes.awake += 1,
                }
            }
            let first_sleep = stages.iter().position(|s| *s != SleepStage::Awake);
            let last_sleep = stages.iter().rposition(|s| *s != SleepStage::Awake);
            let wakeups = match (first_sleep, last_sleep) {
                (Some(a), Some(b)) => stages[a..=b]
                    .windows(2)
                    .filter(|w| w[0] != SleepStage::Awake && w[1] == SleepStage::Awake)
                    .count() as u32,
                _ => 0,
            };
            Some(SleepSession {
                start,
                end,
                sleep_score: sleep_score(&minutes, wakeups),
                stage_minutes: minutes,
                wakeups,
            })
        })
        .collect()
}

/// 0–100 score: half from total sleep against 8 h, a quarter each from deep
/// and REM share against 20 %, minus 3 points per wake-up.
pub fn sleep_score(minutes: &StageMinutes, wakeups: u32) -> f64 {
    let asleep = minutes.asleep() as f64;
    if asleep == 0.0 {
        return 0.0;
    }
    let duration = (asleep / 480.0).min(1.0);
    let deep = (minutes.deep as f64 / asleep / 0.2).min(1.0);
    let rem = (minutes.rem as f64 / asleep / 0.2).min(1.0);
    (100.0 * (0.5 * duration + 0.25 * deep + 0.25 * rem) - 3.0 * wakeups as f64).clamp(0.0, 100.0)
}
