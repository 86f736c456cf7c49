//! Route planning and daily exercise guidance.
//!
//! [`plan_routes`] ranks paths from the user's current node to a goal ROI.
//! The [`Controller`] turns measured training load into a weekly TRIMP goal,
//! keeps the projected week inside the ramp and TSB-floor limits, splits it
//! into daily goals and renders each day as three intensity options.

mod controller;
mod routing;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trainload::{LoadWindows, TsbZones};

pub use controller::{
    apply_constraints, daily_goal, hr_band, project_week, to_triplets, weekly_goal, Constrained, Controller,
    DailyGuidance, Triplet, WeeklyPlan,
};
pub use routing::{plan_routes, AdjacencyGraph, Goal, Network, Route};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GuidanceError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid goal: {0}")]
    InvalidGoal(String),
    #[error("unknown node {0}")]
    UnknownNode(usize),
    #[error("no route from node {from} to goal {goal}")]
    NoRoute { from: usize, goal: String },
}

fn default_tsb_margin() -> f64 {
    1.5
}

fn default_daily_slack() -> f64 {
    0.5
}

fn default_ctl_to_weekly() -> f64 {
    7.0
}

/// Training-load rules and controller settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rules {
    pub lucia: [f64; 3],
    pub zone_fractions_pct: [u32; 4],
    pub tsb_zones: TsbZones,
    pub ctl_days: usize,
    pub atl_days: usize,
    /// `R` in the weekly goal.
    pub ramp_rate: f64,
    /// `C1` in the weekly goal.
    pub c1: f64,
    pub trimp_min: f64,
    /// Max weekly CTL increase.
    pub ramp_limit: f64,
    pub tsb_floor: f64,
    pub tsb_floor_window_days: usize,
    pub scale_down: f64,
    /// Headroom kept below `ramp_limit` when projecting a week.
    #[serde(default)]
    pub ramp_margin: f64,
    /// Headroom kept above `tsb_floor` when projecting a week.
    #[serde(default = "default_tsb_margin")]
    pub tsb_margin: f64,
    /// Headroom for the day-by-day caps; covers minute rounding.
    #[serde(default = "default_daily_slack")]
    pub daily_slack: f64,
    /// Factor turning CTL (a daily mean) into the weekly units of the goal.
    #[serde(default = "default_ctl_to_weekly")]
    pub ctl_to_weekly: f64,
}

impl Default for Rules {
    fn default() -> Self {
        Self {
            lucia: crate::trainload::LUCIA,
            zone_fractions_pct: crate::trainload::ZONE_PCT,
            tsb_zones: TsbZones::default(),
            ctl_days: 42,
            atl_days: 7,
            ramp_rate: 0.1,
            c1: 10.0,
            trimp_min: 150.0,
            ramp_limit: 5.0,
            tsb_floor: -20.0,
            tsb_floor_window_days: 10,
            scale_down: 0.9,
            ramp_margin: 0.0,
            tsb_margin: default_tsb_margin(),
            daily_slack: default_daily_slack(),
            ctl_to_weekly: default_ctl_to_weekly(),
        }
    }
}

impl Rules {
    pub fn windows(&self) -> LoadWindows {
        LoadWindows {
            ctl_days: self.ctl_days,
            atl_days: self.atl_days,
        }
    }

    pub fn validate(&self) -> Result<(), GuidanceError> {
        let bad = |m: &str| Err(GuidanceError::InvalidParameter(m.into()));
        if !(0.0..=1.0).contains(&self.ramp_rate) {
            return bad("ramp_rate must be in [0, 1]");
        }
        if !(5.0..=30.0).contains(&self.c1) {
            return bad("c1 must be in [5, 30]");
        }
        if self.atl_days == 0 || self.ctl_days < self.atl_days {
            return bad("need 0 < atl_days <= ctl_days");
        }
        if !(self.trimp_min >= 0.0) || !(self.ramp_limit > 0.0) {
            return bad("trimp_min must be >= 0 and ramp_limit > 0");
        }
        if !(self.scale_down > 0.0 && self.scale_down <= 1.0) {
            return bad("scale_down must be in (0, 1]");
        }
        if [self.ramp_margin, self.tsb_margin, self.daily_slack].iter().any(|m| !(*m >= 0.0)) {
            return bad("margins must be >= 0");
        }
        Ok(())
    }
}
