//! Training-load bookkeeping.
//!
//! TRIMP is zone-weighted minutes with the Lucia coefficients 1/2/3. CTL and
//! ATL are plain trailing means of daily TRIMP over 42 and 7 days, and
//! TSB = CTL − ATL classifies readiness into five zones.

use std::fmt;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

/// Lucia intensity coefficients for the low, medium and high zones.
pub const LUCIA: [f64; 3] = [1.0, 2.0, 3.0];

/// Zone boundaries as integer percentages of MaxHR: low starts at 55,
/// medium at 70, high at 80 and runs to 100 inclusive.
pub const ZONE_PCT: [u32; 4] = [55, 70, 80, 100];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HrZone {
    Low,
    Medium,
    High,
}

impl HrZone {
    pub const ALL: [HrZone; 3] = [HrZone::Low, HrZone::Medium, HrZone::High];

    /// Buckets a heart rate against MaxHR. Anything below 70 % (including
    /// below 55 %) is low; at or above 80 % is high.
    pub fn classify(hr: u16, max_hr: u16) -> HrZone {
        let scaled = hr as u32 * 100;
        let max = max_hr as u32;
        if scaled < ZONE_PCT[1] * max {
            HrZone::Low
        } else if scaled < ZONE_PCT[2] * max {
            HrZone::Medium
        } else {
            HrZone::High
        }
    }

    pub fn coefficient(self) -> f64 {
        LUCIA[self as usize]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HrZone::Low => "low",
            HrZone::Medium => "medium",
            HrZone::High => "high",
        }
    }
}

impl fmt::Display for HrZone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Minutes spent in each intensity zone.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ZoneMinutes {
    pub low: f64,
    pub medium: f64,
    pub high: f64,
}

impl ZoneMinutes {
    pub fn new(low: f64, medium: f64, high: f64) -> Self {
        Self { low, medium, high }
    }

    pub fn only(zone: HrZone, minutes: f64) -> Self {
        let mut z = Self::default();
        z.add(zone, minutes);
        z
    }

    pub fn add(&mut self, zone: HrZone, minutes: f64) {
        match zone {
            HrZone::Low => self.low += minutes,
            HrZone::Medium => self.medium += minutes,
            HrZone::High => self.high += minutes,
        }
    }

    pub fn get(&self, zone: HrZone) -> f64 {
        match zone {
            HrZone::Low => self.low,
            HrZone::Medium => self.medium,
            HrZone::High => self.high,
        }
    }

    pub fn total(&self) -> f64 {
        self.low + self.medium + self.high
    }
}

impl std::ops::Add for ZoneMinutes {
    type Output = ZoneMinutes;

    fn add(self, o: ZoneMinutes) -> ZoneMinutes {
        ZoneMinutes::new(self.low + o.low, self.medium + o.medium, self.high + o.high)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Workout {
    pub date: NaiveDate,
    pub zone_minutes: ZoneMinutes,
}

/// Training impulse of a set of zone minutes.
pub fn trimp(z: &ZoneMinutes) -> f64 {
    z.low * LUCIA[0] + z.medium * LUCIA[1] + z.high * LUCIA[2]
}

/// Contiguous daily values starting at `start`; missing days are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    pub start: NaiveDate,
    pub values: Vec<f64>,
}

impl DailySeries {
    pub fn new(start: NaiveDate, values: Vec<f64>) -> Self {
        Self { start, values }
    }

    pub fn empty(start: NaiveDate) -> Self {
        Self::new(start, Vec::new())
    }

    /// Builds a series covering `[start, end)` from dated workouts.
    /// Workouts outside the range are ignored.
    pub fn from_workouts(start: NaiveDate, end: NaiveDate, workouts: &[Workout]) -> Self {
        let len = (end - start).num_days().max(0) as usize;
        let mut values = vec![0.0; len];
        for w in workouts {
            if let Some(i) = index(start, w.date).filter(|&i| i < len) {
                values[i] += trimp(&w.zone_minutes);
            }
        }
        Self { start, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn date(&self, i: usize) -> NaiveDate {
        self.start + Duration::days(i as i64)
    }

    /// Exclusive end date.
    pub fn end(&self) -> NaiveDate {
        self.date(self.values.len())
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        index(self.start, date)
    }

    /// The part of the series strictly before `date`.
    pub fn until(&self, date: NaiveDate) -> DailySeries {
        let n = self.index_of(date).unwrap_or(0).min(self.values.len());
        DailySeries::new(self.start, self.values[..n].to_vec())
    }

    /// Pads with zeros so that the series ends just before `date`.
    pub fn extended_to(&self, date: NaiveDate) -> DailySeries {
        let mut out = self.clone();
        if let Some(n) = self.index_of(date) {
            if n > out.values.len() {
                out.values.resize(n, 0.0);
            }
        }
        out
    }

    pub fn sum_between(&self, from: NaiveDate, to: NaiveDate) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let d = self.date(*i);
                from <= d && d < to
            })
            .fold(0.0, |acc, (_, v)| acc + v)
    }
}

fn index(start: NaiveDate, date: NaiveDate) -> Option<usize> {
    let d = (date - start).num_days();
    (d >= 0).then_some(d as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingLoadState {
    pub date: NaiveDate,
    pub trimp_day: f64,
    pub ctl: f64,
    pub atl: f64,
    pub tsb: f64,
}

/// Trailing-window lengths for the chronic and acute means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadWindows {
    pub ctl_days: usize,
    pub atl_days: usize,
}

impl Default for LoadWindows {
    fn default() -> Self {
        Self {
            ctl_days: 42,
            atl_days: 7,
        }
    }
}

/// Mean of `values[..=day]` over the trailing `window` days, using only the
/// available days near the start of the series.
pub fn trailing_mean(values: &[f64], day: usize, window: usize) -> f64 {
    let from = (day + 1).saturating_sub(window);
    let slice = &values[from..=day];
    slice.iter().sum::<f64>() / slice.len() as f64
}

/// CTL/ATL/TSB for every day of the series.
///
/// Each mean is summed directly over its window, so constant input reaches
/// its fixed point exactly.
pub fn update_loads(history: &DailySeries, windows: LoadWindows) -> Vec<TrainingLoadState> {
    (0..history.len())
        .map(|d| {
            let ctl = trailing_mean(&history.values, d, windows.ctl_days);
            let atl = trailing_mean(&history.values, d, windows.atl_days);
            TrainingLoadState {
                date: history.date(d),
                trimp_day: history.values[d],
                ctl,
                atl,
                tsb: ctl - atl,
            }
        })
        .collect()
}

/// CSV export, `date,trimp,ctl,atl,tsb` with a header row.
pub fn loads_csv(states: &[TrainingLoadState]) -> String {
    let mut out = String::from("date,trimp,ctl,atl,tsb\n");
    for s in states {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            s.date, s.trimp_day, s.ctl, s.atl, s.tsb
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TsbZone {
    Transition,
    Fresh,
    Neutral,
    Optimal,
    Overload,
}

impl TsbZone {
    pub fn as_str(self) -> &'static str {
        match self {
            TsbZone::Transition => "transition",
            TsbZone::Fresh => "fresh",
            TsbZone::Neutral => "neutral",
            TsbZone::Optimal => "optimal",
            TsbZone::Overload => "overload",
        }
    }
}

impl fmt::Display for TsbZone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lower bounds of the TSB zones; each zone is `[min, next zone's min)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsbZones {
    pub transition_min: f64,
    pub fresh_min: f64,
    pub neutral_min: f64,
    pub optimal_min: f64,
}

impl Default for TsbZones {
    fn default() -> Self {
        Self {
            transition_min: 10.0,
            fresh_min: 5.0,
            neutral_min: -5.0,
            optimal_min: -30.0,
        }
    }
}

impl TsbZones {
    pub fn classify(&self, tsb: f64) -> TsbZone {
        if tsb >= self.transition_min {
            TsbZone::Transition
        } else if tsb >= self.fresh_min {
            TsbZone::Fresh
        } else if tsb >= self.neutral_min {
            TsbZone::Neutral
        } else if tsb >= self.optimal_min {
            TsbZone::Optimal
        } else {
            TsbZone::Overload
        }
    }
}

pub fn tsb_zone(tsb: f64) -> TsbZone {
    TsbZones::default().classify(tsb)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampCheck {
    pub ok: bool,
    /// Not enough history to evaluate; `ok` is then true.
    pub cold_start: bool,
    /// `ctl[t-1] - ctl[t-8]` when available.
    pub increase: Option<f64>,
}

/// Days of history the earlier CTL of a ramp comparison must average over.
/// Before that, warm-up means over one or two days swing too much to compare.
pub const RAMP_BASE_DAYS: usize = 7;

/// Weekly CTL ramp rule for day `t`: `ctl[t-1] - ctl[t-8] < limit`. Cold
/// start until `ctl[t-8]` covers [`RAMP_BASE_DAYS`] days.
pub fn ramp_ok(ctl: &[f64], t: usize, limit: f64) -> RampCheck {
    if t < 7 + RAMP_BASE_DAYS || t > ctl.len() {
        return RampCheck {
            ok: true,
            cold_start: true,
            increase: None,
        };
    }
    let inc = ctl[t - 1] - ctl[t - 8];
    RampCheck {
        ok: inc < limit,
        cold_start: false,
        increase: Some(inc),
    }
}

/// Number of distinct excursions below `floor` touching the trailing
/// `window_days` of the series. An excursion already underway when the
/// window opens counts once.
pub fn tsb_below_count(states: &[TrainingLoadState], window_days: usize, floor: f64) -> usize {
    let from = states.len().saturating_sub(window_days);
    (from..states.len())
        .filter(|&i| states[i].tsb < floor && (i == from || states[i - 1].tsb >= floor))
        .count()
}

/// [`tsb_below_count`] with the −20 floor.
pub fn tsb_minus20_count(states: &[TrainingLoadState], window_days: usize) -> usize {
    tsb_below_count(states, window_days, -20.0)
}
