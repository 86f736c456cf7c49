//! Input → output vectors embedded in the knowledge-bank file. Every bank
//! must reproduce its own fixtures.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ascvd_risk, vo2max_step_test, vo2max_walk_test, KnowledgeBank, Move, Sex, UserProfile};
use crate::statespace::{build_ghss, personalize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Fixture {
    Ascvd {
        profile: UserProfile,
        expected_pct: f64,
        tolerance: f64,
    },
    RhrMultiplier {
        resting_hr: f64,
        expected: f64,
        tolerance: f64,
    },
    StepTest {
        sex: Sex,
        age: u8,
        recovery_hr: f64,
        expected: f64,
        tolerance: f64,
    },
    WalkTest {
        sex: Sex,
        age: u8,
        distance_m: f64,
        expected: f64,
        tolerance: f64,
    },
    Personalize {
        sex: Sex,
        age: u8,
        dimension: String,
        expected_min: f64,
        expected_max: f64,
    },
    Transition {
        moves: BTreeMap<String, Move>,
        expected_label: String,
        expected_cost_weeks: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureFailure {
    pub index: usize,
    pub message: String,
}

fn close(got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("got {got}, expected {want} ± {tol}"))
    }
}

impl Fixture {
    pub fn check(&self, bank: &KnowledgeBank) -> Result<(), String> {
        let profile = |sex: Sex, age: u8| UserProfile { sex, age, ..UserProfile::example() };
        match self {
            Fixture::Ascvd { profile, expected_pct, tolerance } => {
                let got = ascvd_risk(profile, bank).map_err(|e| e.to_string())?;
                close(got, *expected_pct, *tolerance)
            }
            Fixture::RhrMultiplier { resting_hr, expected, tolerance } => {
                close(bank.rhr_multiplier(*resting_hr), *expected, *tolerance)
            }
            Fixture::StepTest { sex, age, recovery_hr, expected, tolerance } => {
                let r = vo2max_step_test(&[*recovery_hr; 60], &profile(*sex, *age), bank)
                    .map_err(|e| e.to_string())?;
                close(r.indicator, *expected, *tolerance)
            }
            Fixture::WalkTest { sex, age, distance_m, expected, tolerance } => {
                let got = vo2max_walk_test(*distance_m, &profile(*sex, *age), bank)
                    .map_err(|e| e.to_string())?;
                close(got, *expected, *tolerance)
            }
            Fixture::Personalize { sex, age, dimension, expected_min, expected_max } => {
                let ghss = build_ghss(bank.dimensions.clone()).map_err(|e| e.to_string())?;
                let phss = personalize(&ghss, &profile(*sex, *age), bank);
                let d = phss
                    .dimension(dimension)
                    .ok_or_else(|| format!("no dimension {dimension}"))?;
                if (d.min, d.max) == (*expected_min, *expected_max) {
                    Ok(())
                } else {
                    Err(format!(
                        "got [{}, {}], expected [{expected_min}, {expected_max}]",
                        d.min, d.max
                    ))
                }
            }
            Fixture::Transition { moves, expected_label, expected_cost_weeks } => {
                let rule = bank.transition(moves).ok_or("no matching transition rule")?;
                if &rule.input_label == expected_label && rule.cost_weeks == *expected_cost_weeks {
                    Ok(())
                } else {
                    Err(format!(
                        "got {} / {} weeks, expected {expected_label} / {expected_cost_weeks}",
                        rule.input_label, rule.cost_weeks
                    ))
                }
            }
        }
    }
}

impl KnowledgeBank {
    /// Runs every embedded fixture, returning the failures.
    pub fn check_fixtures(&self) -> Vec<FixtureFailure> {
        self.fixtures
            .iter()
            .enumerate()
            .filter_map(|(index, f)| f.check(self).err().map(|message| FixtureFailure { index, message }))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_fixtures_pass() {
        let bank = KnowledgeBank::builtin();
        assert!(bank.fixtures.len() >= 8);
        assert_eq!(bank.check_fixtures(), vec![]);
    }

    #[test]
    fn tampered_coefficient_fails_its_fixture() {
        let mut bank = KnowledgeBank::builtin();
        bank.ascvd.models.get_mut("male").unwrap().terms[0].coef += 0.01;
        assert!(!bank.check_fixtures().is_empty());
    }
}
