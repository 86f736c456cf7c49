use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{label, ResponderError, ResponderLabel};
use crate::hse::Sex;
use crate::ingest::{StageAverages, WeeklyFeatures};

pub const BASIC_FEATURES: [&str; 4] = ["age", "sex", "weight_kg", "height_cm"];

pub const WEEK1_FEATURES: [&str; 14] = [
    "age",
    "sex",
    "weight_kg",
    "height_cm",
    "exercise_count",
    "avg_exercise_min",
    "avg_exercise_hr",
    "avg_active_min",
    "avg_sleep_score",
    "avg_light_sleep_min",
    "avg_deep_sleep_min",
    "avg_rem_sleep_min",
    "avg_awake_min",
    "avg_wakeups",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    Basic,
    Week1,
}

impl std::str::FromStr for FeatureMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "basic" => Ok(FeatureMode::Basic),
            "week1" => Ok(FeatureMode::Week1),
            _ => Err(format!("unknown feature mode {s:?} (basic|week1)")),
        }
    }
}

impl FeatureMode {
    pub fn names(self) -> &'static [&'static str] {
        match self {
            FeatureMode::Basic => &BASIC_FEATURES,
            FeatureMode::Week1 => &WEEK1_FEATURES,
        }
    }
}

/// One user of the classification dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    pub age: f64,
    pub sex: Sex,
    pub weight_kg: f64,
    pub height_cm: f64,
    #[serde(default)]
    pub week1: Option<WeeklyFeatures>,
    pub label: ResponderLabel,
}

impl UserRecord {
    /// Feature vector in the fixed order of `mode.names()`; missing values
    /// are NaN.
    pub fn features(&self, mode: FeatureMode) -> Vec<f64> {
        let sex = match self.sex {
            Sex::Female => 0.0,
            Sex::Male => 1.0,
        };
        let mut v = vec![self.age, sex, self.weight_kg, self.height_cm];
        if mode == FeatureMode::Week1 {
            let nan = f64::NAN;
            match &self.week1 {
                None => v.extend([nan; 10]),
                Some(w) => {
                    let st = w.avg_sleep_min;
                    v.extend([
                        w.exercise_count as f64,
                        w.avg_exercise_min.unwrap_or(nan),
                        w.avg_exercise_hr.unwrap_or(nan),
                        w.avg_active_min,
                        w.avg_sleep_score.unwrap_or(nan),
                        st.map_or(nan, |s| s.light),
                        st.map_or(nan, |s| s.deep),
                        st.map_or(nan, |s| s.rem),
                        st.map_or(nan, |s| s.awake),
                        w.avg_wakeups.unwrap_or(nan),
                    ]);
                }
            }
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<UserRecord>,
}

impl Dataset {
    pub fn x(&self, mode: FeatureMode) -> Vec<Vec<f64>> {
        self.records.iter().map(|r| r.features(mode)).collect()
    }

    pub fn labels(&self) -> Vec<ResponderLabel> {
        self.records.iter().map(|r| r.label).collect()
    }

    pub fn y(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.label.index()).collect()
    }
}

/// Replaces NaN with the column mean of the fitting rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Imputer {
    pub means: Vec<f64>,
}

impl Imputer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let means = (0..d)
            .map(|j| {
                let vals: Vec<f64> = x.iter().map(|r| r[j]).filter(|v| !v.is_nan()).collect();
                if vals.is_empty() { 0.0 } else { vals.iter().sum::<f64>() / vals.len() as f64 }
            })
            .collect();
        Self { means }
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter()
            .map(|r| r.iter().zip(&self.means).map(|(v, m)| if v.is_nan() { *m } else { *v }).collect())
            .collect()
    }
}

/// One JSON record per non-blank line.
pub fn read_jsonl(text: &str) -> Result<Vec<UserRecord>, ResponderError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| ResponderError::Parse { line: i + 1, reason: e.to_string() }))
        .collect()
}

pub fn write_jsonl(records: &[UserRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
        .collect()
}

/// Synthetic cohort whose response depends mostly on first-week exercise
/// and sleep, weakly on age. About 10 % of users lack sleep data.
pub fn synthetic_cohort(n: usize, seed: u64) -> Vec<UserRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0f64, 1.0).unwrap();
    let week = NaiveDate::from_ymd_opt(2021, 3, 1).unwrap();
    (0..n)
        .map(|i| {
            let sex = if rng.random_bool(0.5) { Sex::Male } else { Sex::Female };
            let age = rng.random_range(20.0..70.0f64).round();
            let height_cm = if sex == Sex::Male { 176.0 } else { 163.0 } + 7.0 * noise.sample(&mut rng);
            let weight_kg = (height_cm - 100.0) * (0.9 + 0.1 * noise.sample(&mut rng));
            let count = rng.random_range(0..=7u32);
            let minutes = (35.0 + 12.0 * noise.sample(&mut rng)).max(5.0);
            let hr = 125.0 + 12.0 * noise.sample(&mut rng);
            let sleep_score = (70.0 + 10.0 * noise.sample(&mut rng)).clamp(0.0, 100.0);
            let deep = (80.0 + 20.0 * noise.sample(&mut rng)).max(0.0);
            let has_sleep = rng.random_bool(0.9);

            let dose = (count as f64 - 3.5) / 2.0 + (minutes - 35.0) / 12.0;
            let rest = (sleep_score - 70.0) / 10.0 + (deep - 80.0) / 20.0;
            let v = -0.6 * dose - 0.3 * rest + 0.01 * (age - 45.0) + 0.35 * noise.sample(&mut rng);

            UserRecord {
                user_id: format!("u{i:05}"),
                age,
                sex,
                weight_kg,
                height_cm,
                week1: Some(WeeklyFeatures {
                    week_start: week,
                    exercise_count: count,
                    avg_exercise_min: (count > 0).then_some(minutes),
                    avg_exercise_hr: (count > 0).then_some(hr),
                    avg_active_min: count as f64 * minutes / 7.0 + 20.0,
                    avg_sleep_score: has_sleep.then_some(sleep_score),
                    avg_sleep_min: has_sleep.then_some(StageAverages {
                        light: 240.0,
                        deep,
                        rem: 90.0,
                        awake: 20.0,
                    }),
                    avg_wakeups: has_sleep.then_some(2.0),
                    weekly_resting_hr: None,
                }),
                label: label(v),
            }
        })
        .collect()
}

/// `n` points in `d` dimensions, three classes with unit-variance Gaussian
/// noise around means `separation` apart along distinct axes.
pub fn gaussian_classes(n: usize, d: usize, separation: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0f64, 1.0).unwrap();
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 3;
        let row = (0..d)
            .map(|j| noise.sample(&mut rng) + if j % 3 == c { separation } else { 0.0 })
            .collect();
        x.push(row);
        y.push(c);
    }
    (x, y)
}
