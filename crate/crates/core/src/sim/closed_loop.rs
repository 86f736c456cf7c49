use std::fmt::Write as _;

use chrono::{Duration, NaiveDate};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Physiology, SimError};
use crate::guidance::{hr_band, plan_routes, Controller, DailyGuidance, Goal, Route, Rules, WeeklyPlan};
use crate::hse::{estimate_health_state, FitnessTest, HseError, KnowledgeBank, UserProfile};
use crate::ingest::{parse_stream, segment_exercise, serialize_samples, ActivityMode, MinuteSample, SessionRules, SleepStage};
use crate::statespace::{locate, personal_graph};
use crate::time::{is_monday, local_midnight_utc};
use crate::trainload::{trimp, update_loads, DailySeries, HrZone, TsbZone, ZoneMinutes};

/// What the user does when not following guidance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Adherence {
    /// Probability of performing the prescribed option.
    pub p_follow: f64,
    /// Which of the three options the user picks.
    pub option: HrZone,
    /// Gaussian noise on the prescribed minutes; results below 0 become 0.
    pub minutes_sd: f64,
    /// When not following: probability of resting instead of a light workout.
    pub rest_share: f64,
    /// Inclusive range for light-workout minutes.
    pub light_minutes: (u32, u32),
}

impl Default for Adherence {
    fn default() -> Self {
        Self {
            p_follow: 0.8,
            option: HrZone::Medium,
            minutes_sd: 3.0,
            rest_share: 0.6,
            light_minutes: (10, 30),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualUser {
    pub profile: UserProfile,
    #[serde(default)]
    pub physiology: Physiology,
    #[serde(default)]
    pub adherence: Adherence,
}

impl VirtualUser {
    pub fn new(profile: UserProfile) -> Self {
        Self { profile, physiology: Physiology::default(), adherence: Adherence::default() }
    }

    pub fn with_p_follow(mut self, p: f64) -> Self {
        self.adherence.p_follow = p;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.physiology.validate()?;
        let a = &self.adherence;
        if !(0.0..=1.0).contains(&a.p_follow) || !(0.0..=1.0).contains(&a.rest_share) {
            return Err(SimError::InvalidUser("probabilities must lie in [0, 1]".into()));
        }
        if !(a.minutes_sd >= 0.0) || a.light_minutes.0 > a.light_minutes.1 {
            return Err(SimError::InvalidUser("bad minute noise or light range".into()));
        }
        self.profile.validate().map_err(|e| SimError::InvalidUser(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutedWorkout {
    pub followed: bool,
    /// `None` for rest.
    pub zone: Option<HrZone>,
    pub minutes: u32,
}

impl ExecutedWorkout {
    pub fn trimp(&self) -> f64 {
        self.zone.map_or(0.0, |z| trimp(&ZoneMinutes::only(z, self.minutes as f64)))
    }
}

/// Draws what the user does with today's guidance.
pub fn adherence(guidance: &DailyGuidance, a: &Adherence, rng: &mut ChaCha8Rng) -> ExecutedWorkout {
    if rng.random_bool(a.p_follow) {
        let Some(t) = guidance.option(a.option).filter(|t| t.minutes > 0) else {
            return ExecutedWorkout { followed: true, zone: None, minutes: 0 };
        };
        let noise = if a.minutes_sd > 0.0 {
            Normal::new(0.0, a.minutes_sd).expect("sd checked").sample(rng)
        } else {
            0.0
        };
        let minutes = (t.minutes as f64 + noise).round().max(0.0) as u32;
        return ExecutedWorkout { followed: true, zone: (minutes > 0).then_some(t.intensity), minutes };
    }
    if rng.random_bool(a.rest_share) {
        ExecutedWorkout { followed: false, zone: None, minutes: 0 }
    } else {
        let minutes = rng.random_range(a.light_minutes.0..=a.light_minutes.1);
        ExecutedWorkout { followed: false, zone: (minutes > 0).then_some(HrZone::Low), minutes }
    }
}

pub const SLEEP_START_HOUR: i64 = 23;
pub const SLEEP_MINUTES: i64 = 450;
pub const WORKOUT_HOUR: i64 = 18;

/// The night ending on the morning of `date`: 23:00 to 06:30 local, 20 %
/// deep sleep at `resting_hr`, light and REM slightly above it.
pub fn render_night(date: NaiveDate, resting_hr: f64, tz_offset_min: i32) -> Vec<MinuteSample> {
    let start = local_midnight_utc(date, tz_offset_min) - Duration::hours(24 - SLEEP_START_HOUR);
    let rhr = resting_hr.round() as u16;
    (0..SLEEP_MINUTES)
        .map(|i| {
            let (stage, hr) = match i % 90 {
                0..45 => (SleepStage::Light, rhr + 4),
                45..63 => (SleepStage::Deep, rhr),
                _ => (SleepStage::Rem, rhr + 6),
            };
            MinuteSample::new(start + Duration::minutes(i), Some(hr), 0, ActivityMode::Still, stage)
        })
        .collect()
}

/// `minutes` of running at 18:00 local with HR in the middle of the zone's band.
pub fn render_workout(date: NaiveDate, zone: HrZone, minutes: u32, max_hr: u16, tz_offset_min: i32) -> Vec<MinuteSample> {
    let start = local_midnight_utc(date, tz_offset_min) + Duration::hours(WORKOUT_HOUR);
    let (lo, hi) = hr_band(zone, max_hr);
    let hr = (lo + hi) / 2;
    (0..minutes as i64)
        .map(|i| MinuteSample::new(start + Duration::minutes(i), Some(hr), 150, ActivityMode::Running, SleepStage::None))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub days: usize,
    pub seed: u64,
    pub start: NaiveDate,
    /// ROI label the initial route heads for.
    pub goal: String,
    pub rules: Rules,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            days: 84,
            seed: 0,
            start: NaiveDate::from_ymd_opt(2021, 3, 1).unwrap(),
            goal: "ideal".into(),
            rules: Rules::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDay {
    pub day: usize,
    pub date: NaiveDate,
    pub plan_trimp_w: f64,
    pub prescribed_trimp: f64,
    /// Minutes of the option the user would pick.
    pub prescribed_minutes: u32,
    pub followed: bool,
    pub executed_zone: Option<HrZone>,
    pub executed_minutes: u32,
    /// TRIMP measured from the rendered samples.
    pub trimp: f64,
    pub ctl: f64,
    pub atl: f64,
    pub tsb: f64,
    pub tsb_zone: TsbZone,
    /// True physiology for the day.
    pub resting_hr: f64,
    pub vo2: f64,
    /// Estimated state, once enough nights are recorded.
    pub est_resting_hr: Option<f64>,
    pub node: Option<usize>,
    pub roi: Option<String>,
}

pub const TRACE_COLUMNS: [&str; 19] = [
    "day",
    "date",
    "plan_trimp_w",
    "prescribed_trimp",
    "prescribed_minutes",
    "followed",
    "executed_zone",
    "executed_minutes",
    "trimp",
    "ctl",
    "atl",
    "tsb",
    "tsb_zone",
    "resting_hr",
    "vo2",
    "est_resting_hr",
    "node",
    "roi",
    "in_goal",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub goal: String,
    pub days: Vec<TraceDay>,
    pub plans: Vec<WeeklyPlan>,
    pub guidance: Vec<DailyGuidance>,
    /// Cheapest route from the first located node.
    pub route: Option<Route>,
}

impl SimTrace {
    pub fn to_csv(&self) -> String {
        let mut s = TRACE_COLUMNS.join(",");
        s.push('\n');
        let opt = |v: Option<String>| v.unwrap_or_default();
        for d in &self.days {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                d.day,
                d.date,
                d.plan_trimp_w,
                d.prescribed_trimp,
                d.prescribed_minutes,
                d.followed,
                d.executed_zone.map_or("rest", HrZone::as_str),
                d.executed_minutes,
                d.trimp,
                d.ctl,
                d.atl,
                d.tsb,
                d.tsb_zone,
                d.resting_hr,
                d.vo2,
                opt(d.est_resting_hr.map(|v| v.to_string())),
                opt(d.node.map(|v| v.to_string())),
                opt(d.roi.clone()),
                d.roi.as_deref() == Some(self.goal.as_str()),
            );
        }
        s
    }

    pub fn trimp_series(&self) -> Vec<f64> {
        self.days.iter().map(|d| d.trimp).collect()
    }
}

const SAMPLE_DAYS_KEPT: i64 = 8;

/// Runs the user and the engine against each other for `config.days` days.
///
/// Each day: physiology from the executed load so far, a rendered night
/// (and a step test on Mondays), health-state estimate and location, the
/// controller's guidance, the user's response, and the measured TRIMP of
/// the rendered workout fed back as history.
pub fn run_closed_loop(user: &VirtualUser, bank: &KnowledgeBank, config: &SimConfig) -> Result<SimTrace, SimError> {
    user.validate()?;
    if config.days < 14 {
        return Err(SimError::InvalidConfig(format!("days {} < 14", config.days)));
    }
    config.rules.validate().map_err(|source| SimError::Guidance { day: 0, source })?;
    let profile = &user.profile;
    let tz = profile.timezone_offset_min;
    let max_hr = profile.max_hr();
    let graph = personal_graph(profile, bank)?;
    let goal = Goal::roi(&graph, &config.goal).map_err(|source| SimError::Guidance { day: 0, source })?;
    let step_curve = bank
        .step_test_curve(profile.sex, profile.age)
        .ok_or_else(|| SimError::InvalidUser(format!("no step-test curve for age {}", profile.age)))?;
    let controller = Controller::new(config.rules.clone(), max_hr);
    let session_rules = SessionRules::default();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let phys = &user.physiology;
    let system = phys.system();
    let mut x = DVector::zeros(2);
    let mut history = DailySeries::empty(config.start);
    let mut samples: Vec<MinuteSample> = Vec::new();
    let mut tests: Vec<FitnessTest> = Vec::new();
    let mut trace = SimTrace { goal: config.goal.clone(), days: Vec::new(), plans: Vec::new(), guidance: Vec::new(), route: None };
    let mut plan: Option<WeeklyPlan> = None;

    for day in 0..config.days {
        let date = config.start + Duration::days(day as i64);
        let body = phys.observe(&x);

        let mut today = render_night(date, body.resting_hr, tz);
        if day == 0 || is_monday(date) {
            let hr = step_curve.invert(body.vo2);
            tests.push(FitnessTest::Step { date, recovery_hr_trace: vec![hr; 60] });
        }

        let (est_rhr, node) = match estimate_health_state(profile, bank, &round_trip(&samples, &today), &tests, date) {
            Ok(state) => {
                let loc = locate(&state.coordinates(), &graph)?;
                (Some(state.resting_hr), Some(loc.node))
            }
            Err(HseError::InsufficientData { .. }) => (None, None),
            Err(source) => return Err(SimError::Hse { day, source }),
        };
        if trace.route.is_none() {
            if let Some(n) = node {
                trace.route = plan_routes(&graph, n, &goal, 1)
                    .map_err(|source| SimError::Guidance { day, source })?
                    .into_iter()
                    .next();
            }
        }

        if plan.as_ref().is_none_or(|p| !p.contains(date)) {
            let p = controller
                .plan_week(&history, crate::time::week_start(date))
                .map_err(|source| SimError::Guidance { day, source })?;
            trace.plans.push(p.clone());
            plan = Some(p);
        }
        let plan_ref = plan.as_ref().expect("plan set above");
        let guidance = controller.control_step(&history, plan_ref, date);
        let done = adherence(&guidance, &user.adherence, &mut rng);
        if let Some(z) = done.zone {
            today.extend(render_workout(date, z, done.minutes, max_hr, tz));
        }

        let today = round_trip(&[], &today);
        let measured: f64 = segment_exercise(&today, max_hr, &session_rules)
            .iter()
            .fold(0.0, |acc, s| acc + trimp(&s.zone_minutes));
        history.values.push(measured);
        let load = *update_loads(&history, config.rules.windows()).last().expect("non-empty history");
        x = system.step(&x, &DVector::from_element(1, done.trimp()))?.0;

        samples.extend(today);
        let keep_from = local_midnight_utc(date - Duration::days(SAMPLE_DAYS_KEPT), tz);
        samples.retain(|s| s.ts >= keep_from);

        trace.days.push(TraceDay {
            day,
            date,
            plan_trimp_w: plan_ref.trimp_w,
            prescribed_trimp: guidance.trimp_d,
            prescribed_minutes: guidance.option(user.adherence.option).map_or(0, |t| t.minutes),
            followed: done.followed,
            executed_zone: done.zone,
            executed_minutes: done.minutes,
            trimp: measured,
            ctl: load.ctl,
            atl: load.atl,
            tsb: load.tsb,
            tsb_zone: config.rules.tsb_zones.classify(load.tsb),
            resting_hr: body.resting_hr,
            vo2: body.vo2,
            est_resting_hr: est_rhr,
            node,
            roi: node.and_then(|n| graph.roi_label(n)).map(str::to_string),
        });
        trace.guidance.push(guidance);
    }
    Ok(trace)
}

/// Serializes `extra` to CSV lines and parses them back, appended to `kept`.
fn round_trip(kept: &[MinuteSample], extra: &[MinuteSample]) -> Vec<MinuteSample> {
    let parsed = parse_stream(serialize_samples(extra));
    debug_assert!(parsed.rejects.is_empty(), "{}", parsed.rejects_report());
    kept.iter().cloned().chain(parsed.samples).collect()
}
