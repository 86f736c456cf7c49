//! Virtual user for closing the loop without people.
//!
//! A discrete linear system carries a Banister fitness–fatigue state driven
//! by daily TRIMP; its outputs are resting HR and a VO₂Max indicator. An
//! adherence model decides what the user actually does with each day's
//! guidance, and [`run_closed_loop`] renders everything as minute samples
//! that go back through ingestion, estimation and the controller.

mod closed_loop;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::guidance::GuidanceError;
use crate::hse::HseError;
use crate::statespace::StateSpaceError;

pub use closed_loop::{
    adherence, render_night, render_workout, run_closed_loop, Adherence, ExecutedWorkout, SimConfig, SimTrace,
    TraceDay, VirtualUser, TRACE_COLUMNS,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid virtual user: {0}")]
    InvalidUser(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("day {day}: {source}")]
    Hse { day: usize, source: HseError },
    #[error("day {day}: {source}")]
    Guidance { day: usize, source: GuidanceError },
    #[error(transparent)]
    StateSpace(#[from] StateSpaceError),
}

/// `x[k+1] = A x[k] + B u[k]`, `y[k] = C x[k] + D u[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl LinearSystem {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self, SimError> {
        let n = a.nrows();
        let (m, p) = (b.ncols(), c.nrows());
        let bad = |what: &str| Err(SimError::Dimension(what.into()));
        if a.ncols() != n {
            return bad("A must be square");
        }
        if b.nrows() != n {
            return bad("B must have as many rows as A");
        }
        if c.ncols() != n {
            return bad("C must have as many columns as A");
        }
        if d.nrows() != p || d.ncols() != m {
            return bad("D must be p×m");
        }
        Ok(Self { a, b, c, d })
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// One step: `(x_next, y)`.
    pub fn step(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>), SimError> {
        if x.len() != self.states() || u.len() != self.inputs() {
            return Err(SimError::Dimension(format!(
                "x has {} entries (want {}), u has {} (want {})",
                x.len(),
                self.states(),
                u.len(),
                self.inputs()
            )));
        }
        Ok((&self.a * x + &self.b * u, &self.c * x + &self.d * u))
    }
}

/// Fitness–fatigue response of the virtual user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Physiology {
    pub k1: f64,
    pub k2: f64,
    /// Fitness decay, days.
    pub tau1: f64,
    /// Fatigue decay, days.
    pub tau2: f64,
    pub baseline_rhr: f64,
    pub baseline_vo2: f64,
    pub alpha_hr: f64,
    pub beta_hr: f64,
    pub alpha_vo2: f64,
    pub beta_vo2: f64,
}

pub const RHR_BOUNDS: (f64, f64) = (35.0, 110.0);
pub const VO2_BOUNDS: (f64, f64) = (10.0, 80.0);

impl Default for Physiology {
    fn default() -> Self {
        Self {
            k1: 1.0,
            k2: 2.0,
            tau1: 42.0,
            tau2: 7.0,
            baseline_rhr: 68.0,
            baseline_vo2: 33.0,
            alpha_hr: 0.005,
            beta_hr: 0.005,
            alpha_vo2: 0.008,
            beta_vo2: 0.008,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysioOutput {
    pub fitness: f64,
    pub fatigue: f64,
    pub resting_hr: f64,
    pub vo2: f64,
}

impl Physiology {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.tau1 > self.tau2 && self.tau2 > 0.0) {
            return Err(SimError::InvalidUser("need tau1 > tau2 > 0".into()));
        }
        if !(self.k1 >= 0.0 && self.k2 >= 0.0) {
            return Err(SimError::InvalidUser("gains must be >= 0".into()));
        }
        Ok(())
    }

    fn outputs(&self, fitness: f64, fatigue: f64) -> PhysioOutput {
        let rhr = self.baseline_rhr - self.k1 * fitness * self.alpha_hr + self.k2 * fatigue * self.beta_hr;
        let vo2 = self.baseline_vo2 + self.k1 * fitness * self.alpha_vo2 - self.k2 * fatigue * self.beta_vo2;
        PhysioOutput {
            fitness,
            fatigue,
            resting_hr: rhr.clamp(RHR_BOUNDS.0, RHR_BOUNDS.1),
            vo2: vo2.clamp(VO2_BOUNDS.0, VO2_BOUNDS.1),
        }
    }

    /// Outputs on day `t` from the daily TRIMP of days before `t`.
    pub fn at(&self, trimp: &[f64], t: usize) -> PhysioOutput {
        let (mut g, mut h) = (0.0, 0.0);
        for (s, w) in trimp.iter().enumerate().take(t) {
            let lag = (t - s) as f64;
            g += w * (-lag / self.tau1).exp();
            h += w * (-lag / self.tau2).exp();
        }
        self.outputs(g, h)
    }

    /// The same response as a linear system with state `(fitness,
    /// fatigue)`, input daily TRIMP, and output the unclamped offsets of
    /// `(resting_hr, vo2)` from baseline.
    pub fn system(&self) -> LinearSystem {
        let (d1, d2) = ((-1.0 / self.tau1).exp(), (-1.0 / self.tau2).exp());
        LinearSystem::new(
            DMatrix::from_row_slice(2, 2, &[d1, 0.0, 0.0, d2]),
            DMatrix::from_row_slice(2, 1, &[d1, d2]),
            DMatrix::from_row_slice(
                2,
                2,
                &[
                    -self.k1 * self.alpha_hr,
                    self.k2 * self.beta_hr,
                    self.k1 * self.alpha_vo2,
                    -self.k2 * self.beta_vo2,
                ],
            ),
            DMatrix::zeros(2, 1),
        )
        .expect("2-state system is consistent")
    }

    /// Outputs for a linear-system state.
    pub fn observe(&self, state: &DVector<f64>) -> PhysioOutput {
        self.outputs(state[0], state[1])
    }
}
