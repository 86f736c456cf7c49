//! Versioned knowledge-bank file: risk coefficients, test tables, state-space
//! dimensions, ROIs, transition knowledge and guidance rules.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Fixture, HseError, Sex};
use crate::guidance::Rules;
use crate::statespace::DimensionSpec;
use crate::trainload::{LUCIA, ZONE_PCT};

pub const SCHEMA_VERSION: u32 = 1;

const DEFAULT_BANK: &str = include_str!("../../data/knowledge_bank.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AscvdTerm {
    LnAge,
    LnAgeSq,
    LnTotalChol,
    LnAgeXLnTotalChol,
    LnHdl,
    LnAgeXLnHdl,
    LnTreatedSbp,
    LnAgeXLnTreatedSbp,
    LnUntreatedSbp,
    LnAgeXLnUntreatedSbp,
    Smoker,
    LnAgeXSmoker,
    Diabetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub term: AscvdTerm,
    pub coef: f64,
}

/// One proportional-hazards model: `risk = 1 − S₀^exp(Σ coef·x − mean_sum)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AscvdModel {
    pub baseline_survival: f64,
    pub mean_sum: f64,
    pub terms: Vec<Coefficient>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AscvdTable {
    pub age_min: u8,
    pub age_max: u8,
    pub models: BTreeMap<String, AscvdModel>,
}

impl AscvdTable {
    pub fn model(&self, sex: Sex) -> Option<&AscvdModel> {
        self.models.get(&sex.to_string())
    }
}

/// Resting-HR band `[min_bpm, max_bpm)` with its risk multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhrBand {
    pub min_bpm: f64,
    pub max_bpm: f64,
    pub multiplier: f64,
}

/// Piecewise-linear curve through sorted `(x, y)` points, flat beyond the
/// ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Curve {
    pub points: Vec<[f64; 2]>,
}

impl Curve {
    pub fn eval(&self, x: f64) -> f64 {
        let p = &self.points;
        if x <= p[0][0] {
            return p[0][1];
        }
        if x >= p[p.len() - 1][0] {
            return p[p.len() - 1][1];
        }
        let i = p.partition_point(|q| q[0] <= x);
        let ([x0, y0], [x1, y1]) = (p[i - 1], p[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Smallest `x` with `eval(x) == y` for a strictly monotone curve,
    /// clamped to the curve's domain.
    pub fn invert(&self, y: f64) -> f64 {
        let p = &self.points;
        let increasing = p[p.len() - 1][1] > p[0][1];
        for w in p.windows(2) {
            let ([x0, y0], [x1, y1]) = (w[0], w[1]);
            let (lo, hi) = if increasing { (y0, y1) } else { (y1, y0) };
            if (lo..=hi).contains(&y) {
                return x0 + (x1 - x0) * (y - y0) / (y1 - y0);
            }
        }
        let first_is_closer = if increasing { y < p[0][1] } else { y > p[0][1] };
        if first_is_closer {
            p[0][0]
        } else {
            p[p.len() - 1][0]
        }
    }

    fn is_monotone(&self, increasing: bool) -> bool {
        self.points.len() >= 2
            && self.points.windows(2).all(|w| {
                w[1][0] > w[0][0] && if increasing { w[1][1] >= w[0][1] } else { w[1][1] <= w[0][1] }
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub sex: Sex,
    pub age_min: u8,
    pub age_max: u8,
    pub points: Curve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionBounds {
    pub dimension: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sex: Option<Sex>,
    pub age_min: u8,
    pub age_max: u8,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiSpec {
    pub label: String,
    pub color_hint: String,
    /// Closed interval per dimension name; unlisted dimensions are
    /// unconstrained.
    pub bounds: BTreeMap<String, [f64; 2]>,
}

/// Direction of a lattice move along one dimension, relative to the
/// dimension's orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Move {
    Improve,
    Hold,
    Worsen,
}

/// First matching rule labels an edge. A rule matches when every dimension
/// it names moves as stated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRule {
    pub pattern: BTreeMap<String, Move>,
    pub input_label: String,
    pub cost_weeks: f64,
}

impl TransitionRule {
    pub fn matches(&self, moves: &BTreeMap<String, Move>) -> bool {
        self.pattern
            .iter()
            .all(|(dim, m)| moves.get(dim).copied().unwrap_or(Move::Hold) == *m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRate {
    pub base: f64,
    pub per_day: f64,
}

impl GrowthRate {
    pub fn half_width(&self, age_days: i64) -> f64 {
        self.base + self.per_day * age_days.max(0) as f64
    }
}

/// Confidence half-widths grow linearly with the age of the supporting
/// observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceModel {
    pub ascvd_risk: GrowthRate,
    pub vo2max: GrowthRate,
    pub resting_hr: GrowthRate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeBank {
    pub schema_version: u32,
    pub name: String,
    pub version: String,
    pub ascvd: AscvdTable,
    pub rhr_relative_risk: Vec<RhrBand>,
    pub step_test: Vec<CurveTable>,
    pub walk_test: Vec<CurveTable>,
    pub dimensions: Vec<DimensionSpec>,
    #[serde(default)]
    pub personalization: Vec<DimensionBounds>,
    #[serde(default)]
    pub rois: Vec<RoiSpec>,
    pub transitions: Vec<TransitionRule>,
    pub rules: Rules,
    pub confidence: ConfidenceModel,
    #[serde(default)]
    pub fixtures: Vec<Fixture>,
}

impl KnowledgeBank {
    /// The bank shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_json(DEFAULT_BANK).expect("shipped knowledge bank is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, HseError> {
        let bank: KnowledgeBank =
            serde_json::from_str(text).map_err(|e| HseError::Bank(e.to_string()))?;
        bank.validate()?;
        Ok(bank)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HseError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| HseError::Bank(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bank serializes")
    }

    pub fn validate(&self) -> Result<(), HseError> {
        let err = |m: String| Err(HseError::Bank(m));
        if self.schema_version != SCHEMA_VERSION {
            return err(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        for sex in [Sex::Female, Sex::Male] {
            match self.ascvd.model(sex) {
                Some(m) if m.baseline_survival > 0.0 && m.baseline_survival < 1.0 => {}
                _ => return err(format!("missing or invalid ascvd model for {sex}")),
            }
        }

        // Resting-HR bands must tile [25, 220] without gaps.
        let bands = &self.rhr_relative_risk;
        if bands.is_empty() || bands[0].min_bpm > 25.0 || bands[bands.len() - 1].max_bpm <= 220.0 {
            return err("rhr_relative_risk must cover 25..=220 bpm".into());
        }
        for w in bands.windows(2) {
            if w[0].max_bpm != w[1].min_bpm {
                return err(format!("rhr bands not contiguous at {}", w[0].max_bpm));
            }
        }
        if bands.iter().any(|b| !(b.multiplier > 0.0) || b.max_bpm <= b.min_bpm) {
            return err("rhr multipliers must be positive over non-empty bands".into());
        }

        for (name, tables, increasing) in [
            ("step_test", &self.step_test, false),
            ("walk_test", &self.walk_test, true),
        ] {
            if let Some(t) = tables.iter().find(|t| !t.points.is_monotone(increasing)) {
                return err(format!("{name} curve for {} {}..={} is not monotone", t.sex, t.age_min, t.age_max));
            }
            for sex in [Sex::Female, Sex::Male] {
                for age in 18..=100u8 {
                    if !tables.iter().any(|t| t.sex == sex && (t.age_min..=t.age_max).contains(&age)) {
                        return err(format!("{name} has no table for {sex} aged {age}"));
                    }
                }
            }
        }

        if self.dimensions.is_empty() {
            return err("at least one dimension is required".into());
        }
        for d in &self.dimensions {
            d.validate().map_err(|e| HseError::Bank(e.to_string()))?;
        }
        if self.transitions.iter().any(|t| !(t.cost_weeks > 0.0)) {
            return err("transition costs must be positive".into());
        }
        if self.rules.lucia != LUCIA || self.rules.zone_fractions_pct != ZONE_PCT {
            return err("only the standard Lucia coefficients and 55/70/80/100 zones are supported".into());
        }
        Ok(())
    }

    pub fn rhr_multiplier(&self, resting_hr: f64) -> f64 {
        let bands = &self.rhr_relative_risk;
        bands
            .iter()
            .find(|b| b.min_bpm <= resting_hr && resting_hr < b.max_bpm)
            .or_else(|| {
                if resting_hr < bands[0].min_bpm {
                    bands.first()
                } else {
                    bands.last()
                }
            })
            .map(|b| b.multiplier)
            .expect("validated non-empty")
    }

    fn curve<'a>(tables: &'a [CurveTable], sex: Sex, age: u8) -> Option<&'a Curve> {
        tables
            .iter()
            .find(|t| t.sex == sex && (t.age_min..=t.age_max).contains(&age))
            .map(|t| &t.points)
    }

    pub fn step_test_curve(&self, sex: Sex, age: u8) -> Option<&Curve> {
        Self::curve(&self.step_test, sex, age)
    }

    pub fn walk_test_curve(&self, sex: Sex, age: u8) -> Option<&Curve> {
        Self::curve(&self.walk_test, sex, age)
    }

    /// Personal bounds for a dimension, if the bank has a matching row.
    pub fn personal_bounds(&self, dimension: &str, sex: Sex, age: u8) -> Option<(f64, f64)> {
        self.personalization
            .iter()
            .find(|b| {
                b.dimension == dimension
                    && b.sex.is_none_or(|s| s == sex)
                    && (b.age_min..=b.age_max).contains(&age)
            })
            .map(|b| (b.min, b.max))
    }

    pub fn transition(&self, moves: &BTreeMap<String, Move>) -> Option<&TransitionRule> {
        self.transitions.iter().find(|t| t.matches(moves))
    }
}

impl Default for KnowledgeBank {
    fn default() -> Self {
        Self::builtin()
    }
}
