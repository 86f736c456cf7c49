use std::fmt;

use serde::{Deserialize, Serialize};

use super::HseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sex {
    Female,
    Male,
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sex::Female => "female",
            Sex::Male => "male",
        })
    }
}

/// Demographics and the episodic medical data the risk model needs.
/// Lipids are in mg/dL, blood pressure in mmHg.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub age: u8,
    pub sex: Sex,
    pub height_cm: f64,
    pub weight_kg: f64,
    pub smoker: bool,
    pub diabetic: bool,
    pub treated_bp: bool,
    pub total_chol: f64,
    pub hdl: f64,
    pub systolic_bp: f64,
    #[serde(default)]
    pub timezone_offset_min: i32,
    /// Overrides the 220 − age estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_hr: Option<u16>,
}

impl UserProfile {
    pub fn max_hr(&self) -> u16 {
        self.max_hr.unwrap_or(220 - self.age as u16)
    }

    pub fn validate(&self) -> Result<(), HseError> {
        let bad = |m: String| Err(HseError::InvalidProfile(m));
        if !(18..=100).contains(&self.age) {
            return bad(format!("age {} outside 18..=100", self.age));
        }
        if !(self.height_cm > 0.0 && self.weight_kg > 0.0) {
            return bad("height and weight must be positive".into());
        }
        if !(self.total_chol > 0.0 && self.hdl > 0.0 && self.systolic_bp > 0.0) {
            return bad("cholesterol, HDL and blood pressure must be positive".into());
        }
        if let Some(m) = self.max_hr {
            if !(100..=220).contains(&m) {
                return bad(format!("max_hr {m} implausible"));
            }
        }
        Ok(())
    }

    /// A 45-year-old non-smoking male with unremarkable labs.
    pub fn example() -> Self {
        Self {
            age: 45,
            sex: Sex::Male,
            height_cm: 178.0,
            weight_kg: 82.0,
            smoker: false,
            diabetic: false,
            treated_bp: false,
            total_chol: 190.0,
            hdl: 50.0,
            systolic_bp: 125.0,
            timezone_offset_min: 0,
            max_hr: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_hr_defaults_to_220_minus_age() {
        let p = UserProfile::example();
        assert_eq!(p.max_hr(), 175);
        let o = UserProfile { max_hr: Some(181), ..p };
        assert_eq!(o.max_hr(), 181);
    }

    #[test]
    fn validation() {
        assert!(UserProfile::example().validate().is_ok());
        assert!(UserProfile { age: 17, ..UserProfile::example() }.validate().is_err());
        assert!(UserProfile { weight_kg: 0.0, ..UserProfile::example() }.validate().is_err());
    }
}
