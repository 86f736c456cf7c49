use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{AscvdTerm, HseError, KnowledgeBank, UserProfile};
use crate::ingest::{MinuteSample, SleepStage, HR_PLAUSIBLE_MAX, HR_PLAUSIBLE_MIN};
use crate::time::local_date;

/// Deep-sleep minutes with HR needed for a resting-HR estimate, and for a
/// night to count toward the estimation gate.
pub const MIN_DEEP_SLEEP_MINUTES: usize = 10;
/// Nights with deep sleep required in the trailing 7 days.
pub const MIN_NIGHTS: usize = 3;

/// Step-test recovery traces are one reading per second for a minute.
pub const STEP_TRACE_SECONDS: usize = 60;

/// Mean HR over deep-sleep minutes, rounded to 0.1 bpm.
pub fn resting_hr_deep_sleep(samples: &[MinuteSample]) -> Result<f64, HseError> {
    let deep: Vec<f64> = samples
        .iter()
        .filter(|s| s.sleep_stage == SleepStage::Deep)
        .filter_map(|s| s.hr_bpm.map(f64::from))
        .collect();
    if deep.len() < MIN_DEEP_SLEEP_MINUTES {
        return Err(HseError::InsufficientData {
            stream: "deep_sleep",
            detail: format!(
                "{} deep-sleep minutes with HR, need {MIN_DEEP_SLEEP_MINUTES}",
                deep.len()
            ),
        });
    }
    let mean = deep.iter().sum::<f64>() / deep.len() as f64;
    Ok((mean * 10.0).round() / 10.0)
}

/// 10-year ASCVD risk in percent from the bank's coefficient table.
pub fn ascvd_risk(profile: &UserProfile, bank: &KnowledgeBank) -> Result<f64, HseError> {
    let table = &bank.ascvd;
    if !(table.age_min..=table.age_max).contains(&profile.age) {
        return Err(HseError::OutOfModelRange(format!(
            "age {} outside {}..={}",
            profile.age, table.age_min, table.age_max
        )));
    }
    let model = table
        .model(profile.sex)
        .ok_or_else(|| HseError::Bank(format!("no ascvd model for {}", profile.sex)))?;

    let ln_age = (profile.age as f64).ln();
    let ln_sbp = profile.systolic_bp.ln();
    let smoker = profile.smoker as u8 as f64;
    let (treated, untreated) = if profile.treated_bp {
        (ln_sbp, 0.0)
    } else {
        (0.0, ln_sbp)
    };
    let value = |term: AscvdTerm| match term {
        AscvdTerm::LnAge => ln_age,
        AscvdTerm::LnAgeSq => ln_age * ln_age,
        AscvdTerm::LnTotalChol => profile.total_chol.ln(),
        AscvdTerm::LnAgeXLnTotalChol => ln_age * profile.total_chol.ln(),
        AscvdTerm::LnHdl => profile.hdl.ln(),
        AscvdTerm::LnAgeXLnHdl => ln_age * profile.hdl.ln(),
        AscvdTerm::LnTreatedSbp => treated,
        AscvdTerm::LnAgeXLnTreatedSbp => ln_age * treated,
        AscvdTerm::LnUntreatedSbp => untreated,
        AscvdTerm::LnAgeXLnUntreatedSbp => ln_age * untreated,
        AscvdTerm::Smoker => smoker,
        AscvdTerm::LnAgeXSmoker => ln_age * smoker,
        AscvdTerm::Diabetic => profile.diabetic as u8 as f64,
    };
    let sum: f64 = model.terms.iter().map(|c| c.coef * value(c.term)).sum();
    let risk = 1.0 - model.baseline_survival.powf((sum - model.mean_sum).exp());
    Ok((risk * 100.0).clamp(0.0, 100.0))
}

/// ASCVD risk weighted by the resting-HR relative-risk multiplier,
/// clamped to [0, 100].
pub fn modified_risk(ascvd_pct: f64, resting_hr: f64, bank: &KnowledgeBank) -> f64 {
    (ascvd_pct * bank.rhr_multiplier(resting_hr)).clamp(0.0, 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepTestResult {
    pub indicator: f64,
    pub recovery_hr: f64,
}

/// VO₂Max indicator from a 3-minute step test's 60-second recovery trace.
/// Lower mean recovery HR maps to a higher indicator.
pub fn vo2max_step_test(
    recovery_hr_trace: &[f64],
    profile: &UserProfile,
    bank: &KnowledgeBank,
) -> Result<StepTestResult, HseError> {
    if recovery_hr_trace.len() != STEP_TRACE_SECONDS {
        return Err(HseError::InvalidTest(format!(
            "recovery trace has {} readings, need {STEP_TRACE_SECONDS}",
            recovery_hr_trace.len()
        )));
    }
    let plausible = HR_PLAUSIBLE_MIN as f64..=HR_PLAUSIBLE_MAX as f64;
    if let Some(bad) = recovery_hr_trace.iter().find(|h| !plausible.contains(*h)) {
        return Err(HseError::InvalidTest(format!("implausible recovery HR {bad}")));
    }
    let recovery_hr = recovery_hr_trace.iter().sum::<f64>() / STEP_TRACE_SECONDS as f64;
    let curve = bank
        .step_test_curve(profile.sex, profile.age)
        .ok_or_else(|| HseError::OutOfModelRange(format!("no step-test table for age {}", profile.age)))?;
    Ok(StepTestResult {
        indicator: curve.eval(recovery_hr),
        recovery_hr,
    })
}

/// VO₂Max indicator from a 6-minute walk distance in metres.
pub fn vo2max_walk_test(distance_m: f64, profile: &UserProfile, bank: &KnowledgeBank) -> Result<f64, HseError> {
    if !(distance_m.is_finite() && distance_m >= 0.0) {
        return Err(HseError::InvalidTest(format!("walk distance {distance_m}")));
    }
    bank.walk_test_curve(profile.sex, profile.age)
        .map(|c| c.eval(distance_m))
        .ok_or_else(|| HseError::OutOfModelRange(format!("no walk-test table for age {}", profile.age)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Step,
    Walk,
}

/// A recorded fitness test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitnessTest {
    Step { date: NaiveDate, recovery_hr_trace: Vec<f64> },
    Walk { date: NaiveDate, distance_m: f64 },
}

impl FitnessTest {
    pub fn date(&self) -> NaiveDate {
        match self {
            FitnessTest::Step { date, .. } | FitnessTest::Walk { date, .. } => *date,
        }
    }

    pub fn kind(&self) -> TestKind {
        match self {
            FitnessTest::Step { .. } => TestKind::Step,
            FitnessTest::Walk { .. } => TestKind::Walk,
        }
    }

    pub fn indicator(&self, profile: &UserProfile, bank: &KnowledgeBank) -> Result<f64, HseError> {
        match self {
            FitnessTest::Step { recovery_hr_trace, .. } => {
                vo2max_step_test(recovery_hr_trace, profile, bank).map(|r| r.indicator)
            }
            FitnessTest::Walk { distance_m, .. } => vo2max_walk_test(*distance_m, profile, bank),
        }
    }
}

/// Half-widths of the estimate per dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confidence {
    pub ascvd_risk: f64,
    pub vo2max: Option<f64>,
    pub resting_hr: f64,
}

/// A located and bounded estimate of cardiovascular health.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthState {
    pub date: NaiveDate,
    /// Unmodified 10-year ASCVD risk.
    pub ascvd_base_pct: f64,
    /// Risk after the resting-HR multiplier.
    pub ascvd_risk_pct: f64,
    pub vo2max_indicator: Option<f64>,
    pub vo2max_source: Option<TestKind>,
    pub resting_hr: f64,
    pub confidence: Confidence,
}

impl HealthState {
    /// Coordinates by dimension name, for locating on a state graph.
    pub fn coordinates(&self) -> BTreeMap<String, f64> {
        let mut c = BTreeMap::from([("ascvd_risk".to_string(), self.ascvd_risk_pct)]);
        if let Some(v) = self.vo2max_indicator {
            c.insert("vo2max".into(), v);
        }
        c
    }
}

/// Estimates the health state as of the local date `as_of`.
///
/// Uses the 7 local days ending on `as_of`; at least [`MIN_NIGHTS`] nights
/// in that window must carry [`MIN_DEEP_SLEEP_MINUTES`] deep-sleep minutes
/// with HR. The VO₂Max indicator comes from the most recent test on or
/// before `as_of` and is absent when there is none.
pub fn estimate_health_state(
    profile: &UserProfile,
    bank: &KnowledgeBank,
    samples: &[MinuteSample],
    tests: &[FitnessTest],
    as_of: NaiveDate,
) -> Result<HealthState, HseError> {
    let tz = profile.timezone_offset_min;
    let from = as_of - Duration::days(6);
    let window: Vec<MinuteSample> = samples
        .iter()
        .filter(|s| {
            let d = local_date(s.ts, tz);
            from <= d && d <= as_of
        })
        .cloned()
        .collect();

    // A night is keyed by its wake-up date: shift by 12 h so that evening
    // minutes join the following morning.
    let mut per_night: BTreeMap<NaiveDate, usize> = BTreeMap::new();
    for s in &window {
        if s.sleep_stage == SleepStage::Deep && s.hr_bpm.is_some() {
            *per_night
                .entry(local_date(s.ts + Duration::hours(12), tz))
                .or_default() += 1;
        }
    }
    let nights: Vec<NaiveDate> = per_night
        .iter()
        .filter(|(_, n)| **n >= MIN_DEEP_SLEEP_MINUTES)
        .map(|(d, _)| *d)
        .collect();
    if nights.len() < MIN_NIGHTS {
        return Err(HseError::InsufficientData {
            stream: "deep_sleep",
            detail: format!(
                "{} nights with deep sleep in the 7 days to {as_of}, need {MIN_NIGHTS}",
                nights.len()
            ),
        });
    }
    let resting_hr = resting_hr_deep_sleep(&window)?;
    let rhr_age = (as_of - *nights.last().unwrap()).num_days();

    let base = ascvd_risk(profile, bank)?;
    let risk = modified_risk(base, resting_hr, bank);

    let latest_test = tests
        .iter()
        .filter(|t| t.date() <= as_of)
        .max_by_key(|t| t.date());
    let (vo2, vo2_source, vo2_conf) = match latest_test {
        Some(t) => {
            let v = t.indicator(profile, bank)?;
            let age = (as_of - t.date()).num_days();
            (Some(v), Some(t.kind()), Some(bank.confidence.vo2max.half_width(age)))
        }
        None => (None, None, None),
    };

    Ok(HealthState {
        date: as_of,
        ascvd_base_pct: base,
        ascvd_risk_pct: risk,
        vo2max_indicator: vo2,
        vo2max_source: vo2_source,
        resting_hr,
        confidence: Confidence {
            ascvd_risk: bank.confidence.ascvd_risk.half_width(rhr_age),
            vo2max: vo2_conf,
            resting_hr: bank.confidence.resting_hr.half_width(rhr_age),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hse::Sex;
    use crate::ingest::ActivityMode;
    use crate::time::local_midnight_utc;
    use chrono::{DateTime, Utc};
    use proptest::prelude::*;

    fn bank() -> KnowledgeBank {
        KnowledgeBank::builtin()
    }

    fn deep(ts: DateTime<Utc>, hr: u16) -> MinuteSample {
        MinuteSample::new(ts, Some(hr), 0, ActivityMode::Still, SleepStage::Deep)
    }

    /// Nights ending on each of `days` local dates with 90 deep minutes.
    fn nights(first: NaiveDate, days: i64, hr: u16) -> Vec<MinuteSample> {
        let mut out = Vec::new();
        for d in 0..days {
            let start = local_midnight_utc(first + Duration::days(d), 0) + Duration::hours(1);
            out.extend((0..90).map(|m| deep(start + Duration::minutes(m), hr)));
        }
        out
    }

    fn day(n: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2021, 3, n).unwrap()
    }

    #[test]
    fn resting_hr_examples() {
        let t: DateTime<Utc> = "2021-03-01T02:00:00Z".parse().unwrap();
        let constant: Vec<_> = (0..20).map(|i| deep(t + Duration::minutes(i), 55)).collect();
        assert_eq!(resting_hr_deep_sleep(&constant).unwrap(), 55.0);
        let alternating: Vec<_> = (0..20).map(|i| deep(t + Duration::minutes(i), if i % 2 == 0 { 54 } else { 56 })).collect();
        assert_eq!(resting_hr_deep_sleep(&alternating).unwrap(), 55.0);
        let short: Vec<_> = (0..5).map(|i| deep(t + Duration::minutes(i), 55)).collect();
        assert!(matches!(resting_hr_deep_sleep(&short), Err(HseError::InsufficientData { .. })));
    }

    #[test]
    fn resting_hr_ignores_other_stages() {
        let t: DateTime<Utc> = "2021-03-01T02:00:00Z".parse().unwrap();
        let mut s: Vec<_> = (0..10).map(|i| deep(t + Duration::minutes(i), 50)).collect();
        s.push(MinuteSample::new(t + Duration::minutes(30), Some(90), 0, ActivityMode::Still, SleepStage::Light));
        assert_eq!(resting_hr_deep_sleep(&s).unwrap(), 50.0);
    }

    #[test]
    fn ascvd_out_of_range_age() {
        let p = UserProfile { age: 30, ..UserProfile::example() };
        assert!(matches!(ascvd_risk(&p, &bank()), Err(HseError::OutOfModelRange(_))));
    }

    #[test]
    fn ascvd_is_deterministic() {
        let p = UserProfile::example();
        assert_eq!(ascvd_risk(&p, &bank()).unwrap(), ascvd_risk(&p.clone(), &bank()).unwrap());
    }

    #[test]
    fn modified_risk_examples() {
        let b = bank();
        assert_eq!(modified_risk(8.0, 55.0, &b), 8.0);
        assert_eq!(modified_risk(8.0, 75.0, &b), 10.0);
        assert_eq!(modified_risk(80.0, 100.0, &b), 100.0);
    }

    #[test]
    fn step_test_examples() {
        let b = bank();
        let young = UserProfile { age: 25, ..UserProfile::example() };
        let r = vo2max_step_test(&[110.0; 60], &young, &b).unwrap();
        assert_eq!(r.recovery_hr, 110.0);
        let low = vo2max_step_test(&[100.0; 60], &young, &b).unwrap().indicator;
        let high = vo2max_step_test(&[130.0; 60], &young, &b).unwrap().indicator;
        assert!(low >= high);
        assert!(vo2max_step_test(&[110.0; 30], &young, &b).is_err());
        let mut spike = vec![110.0; 60];
        spike[10] = 300.0;
        assert!(vo2max_step_test(&spike, &young, &b).is_err());
    }

    #[test]
    fn full_week_populates_state() {
        let b = bank();
        let p = UserProfile::example();
        let samples = nights(day(1), 7, 58);
        let tests = [FitnessTest::Step { date: day(3), recovery_hr_trace: vec![120.0; 60] }];
        let s = estimate_health_state(&p, &b, &samples, &tests, day(7)).unwrap();
        assert_eq!(s.resting_hr, 58.0);
        let base = ascvd_risk(&p, &b).unwrap();
        assert_eq!(s.ascvd_base_pct, base);
        assert_eq!(s.ascvd_risk_pct, modified_risk(base, 58.0, &b));
        assert_eq!(s.vo2max_source, Some(TestKind::Step));
        assert!((s.vo2max_indicator.unwrap() - (111.33 - 0.42 * 120.0)).abs() < 1e-9);
        // test is 4 days old
        assert_eq!(s.confidence.vo2max, Some(b.confidence.vo2max.half_width(4)));
        assert_eq!(s.confidence.resting_hr, b.confidence.resting_hr.base);
    }

    #[test]
    fn no_tests_leaves_vo2_absent() {
        let s = estimate_health_state(&UserProfile::example(), &bank(), &nights(day(1), 7, 58), &[], day(7)).unwrap();
        assert_eq!(s.vo2max_indicator, None);
        assert_eq!(s.confidence.vo2max, None);
        assert!(!s.coordinates().contains_key("vo2max"));
    }

    #[test]
    fn two_nights_fail_the_gate() {
        let e = estimate_health_state(&UserProfile::example(), &bank(), &nights(day(5), 2, 58), &[], day(7)).unwrap_err();
        assert!(matches!(e, HseError::InsufficientData { stream: "deep_sleep", .. }));
    }

    #[test]
    fn latest_test_wins_and_future_tests_ignored() {
        let b = bank();
        let tests = [
            FitnessTest::Walk { date: day(2), distance_m: 600.0 },
            FitnessTest::Step { date: day(5), recovery_hr_trace: vec![100.0; 60] },
            FitnessTest::Walk { date: day(9), distance_m: 100.0 },
        ];
        let s = estimate_health_state(&UserProfile::example(), &b, &nights(day(1), 7, 58), &tests, day(7)).unwrap();
        assert_eq!(s.vo2max_source, Some(TestKind::Step));
    }

    #[test]
    fn walk_test_is_increasing() {
        let b = bank();
        let p = UserProfile { sex: Sex::Female, ..UserProfile::example() };
        assert!(vo2max_walk_test(600.0, &p, &b).unwrap() > vo2max_walk_test(400.0, &p, &b).unwrap());
        assert!(vo2max_walk_test(-1.0, &p, &b).is_err());
    }

    proptest! {
        #[test]
        fn risk_non_decreasing_in_systolic_bp(
            sbp in 90.0f64..200.0, delta in 0.0f64..40.0,
            age in 40u8..=79, female in any::<bool>(), smoker in any::<bool>(), treated in any::<bool>(),
        ) {
            let b = bank();
            let p = UserProfile {
                age, smoker, treated_bp: treated, systolic_bp: sbp,
                sex: if female { Sex::Female } else { Sex::Male },
                ..UserProfile::example()
            };
            let hi = UserProfile { systolic_bp: sbp + delta, ..p.clone() };
            prop_assert!(ascvd_risk(&hi, &b).unwrap() >= ascvd_risk(&p, &b).unwrap());
        }

        #[test]
        fn modified_risk_linear_below_clamp(pct in 0.0f64..50.0, k in 0.0f64..1.0, rhr in 25.0f64..220.0) {
            let b = bank();
            let m = b.rhr_multiplier(rhr);
            let a = modified_risk(pct, rhr, &b);
            prop_assert!((a - pct * m).abs() < 1e-12);
            prop_assert!((modified_risk(pct * k, rhr, &b) - k * a).abs() < 1e-9);
        }

        #[test]
        fn resting_hr_within_min_max(hrs in prop::collection::vec(40u16..90, 10..200)) {
            let t: DateTime<Utc> = "2021-03-01T02:00:00Z".parse().unwrap();
            let s: Vec<_> = hrs.iter().enumerate().map(|(i, h)| deep(t + Duration::minutes(i as i64), *h)).collect();
            let r = resting_hr_deep_sleep(&s).unwrap();
            let lo = *hrs.iter().min().unwrap() as f64;
            let hi = *hrs.iter().max().unwrap() as f64;
            prop_assert!(lo <= r && r <= hi);
        }

        #[test]
        fn step_indicator_monotone(a in 40.0f64..220.0, b in 40.0f64..220.0, age in 18u8..=100, female in any::<bool>()) {
            let bank = bank();
            let p = UserProfile { age, sex: if female { Sex::Female } else { Sex::Male }, ..UserProfile::example() };
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let ilo = vo2max_step_test(&[lo; 60], &p, &bank).unwrap().indicator;
            let ihi = vo2max_step_test(&[hi; 60], &p, &bank).unwrap().indicator;
            prop_assert!(ilo >= ihi);
        }
    }
}
