//! Health state spaces.
//!
//! The general space (GHSS) is a box over the state dimensions. It is
//! narrowed per user into a personal space (PHSS), then cut into a uniform
//! lattice whose nodes are buckets and whose edges connect Chebyshev
//! neighbours. Edges carry the input that moves a user along them and a
//! cost in weeks; nodes carry at most one region-of-interest label.

mod graph;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hse::{KnowledgeBank, RoiSpec, UserProfile};

pub use graph::{
    discretize_and_label, locate, Edge, GraphExport, Location, Node, NodeExport, NodeId, StateGraph,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateSpaceError {
    #[error("dimension {name}: {reason}")]
    InvalidDimension { name: String, reason: String },
    #[error("state space needs at least one dimension")]
    NoDimensions,
    #[error("ROI {label}: {reason}")]
    InvalidRoi { label: String, reason: String },
    #[error("ROIs {a} and {b} overlap on {nodes} node(s)")]
    OverlappingRois { a: String, b: String, nodes: usize },
    #[error("no transition rule for move {0}")]
    MissingTransition(String),
    #[error("state has no coordinate for dimension {0}")]
    MissingCoordinate(String),
    #[error("unknown ROI {0}")]
    UnknownRoi(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    HigherIsBetter,
    LowerIsBetter,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::HigherIsBetter => "higher_is_better",
            Orientation::LowerIsBetter => "lower_is_better",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionSpec {
    pub name: String,
    pub unit: String,
    pub global_min: f64,
    pub global_max: f64,
    pub bucket_count: usize,
    pub orientation: Orientation,
}

impl DimensionSpec {
    pub fn validate(&self) -> Result<(), StateSpaceError> {
        let bad = |reason: &str| {
            Err(StateSpaceError::InvalidDimension {
                name: self.name.clone(),
                reason: reason.into(),
            })
        };
        if !(self.global_min.is_finite() && self.global_max.is_finite()) {
            return bad("bounds must be finite");
        }
        if self.global_min >= self.global_max {
            return bad("global_min must be below global_max");
        }
        if self.bucket_count < 2 {
            return bad("bucket_count must be at least 2");
        }
        Ok(())
    }
}

/// The general health state space: the maximal box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ghss {
    pub dimensions: Vec<DimensionSpec>,
}

pub fn build_ghss(dimensions: Vec<DimensionSpec>) -> Result<Ghss, StateSpaceError> {
    if dimensions.is_empty() {
        return Err(StateSpaceError::NoDimensions);
    }
    for d in &dimensions {
        d.validate()?;
    }
    Ok(Ghss { dimensions })
}

/// One personalized dimension: bounds inside the global ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonalDimension {
    pub spec: DimensionSpec,
    pub min: f64,
    pub max: f64,
    /// Which profile facts set the bounds.
    pub provenance: String,
}

impl PersonalDimension {
    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn bucket_count(&self) -> usize {
        self.spec.bucket_count
    }

    /// Bucket boundaries, `bucket_count + 1` values from `min` to `max`.
    pub fn boundaries(&self) -> Vec<f64> {
        let n = self.bucket_count();
        (0..=n)
            .map(|k| {
                if k == n {
                    self.max
                } else {
                    self.min + (self.max - self.min) * k as f64 / n as f64
                }
            })
            .collect()
    }

    /// Bucket containing `x`, which must lie in `[min, max]`. A value on an
    /// inner boundary belongs to the higher bucket; `max` belongs to the
    /// last bucket.
    pub fn bucket_of(&self, x: f64) -> usize {
        let b = self.boundaries();
        let inner = &b[1..b.len() - 1];
        inner.partition_point(|e| *e <= x)
    }

    pub fn center(&self, bucket: usize) -> f64 {
        let b = self.boundaries();
        (b[bucket] + b[bucket + 1]) / 2.0
    }
}

/// The personal health state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phss {
    pub dimensions: Vec<PersonalDimension>,
}

impl Phss {
    pub fn dimension(&self, name: &str) -> Option<&PersonalDimension> {
        self.dimensions.iter().find(|d| d.name() == name)
    }

    /// PHSS identical to the GHSS.
    pub fn unpersonalized(ghss: &Ghss) -> Self {
        Self {
            dimensions: ghss
                .dimensions
                .iter()
                .map(|spec| PersonalDimension {
                    min: spec.global_min,
                    max: spec.global_max,
                    spec: spec.clone(),
                    provenance: "global".into(),
                })
                .collect(),
        }
    }
}

/// Narrows each dimension to the bank's age/sex bounds, intersected with the
/// global bounds. Dimensions without a matching row, or whose intersection
/// would be empty, keep the global bounds.
pub fn personalize(ghss: &Ghss, profile: &UserProfile, bank: &KnowledgeBank) -> Phss {
    let mut phss = Phss::unpersonalized(ghss);
    for d in &mut phss.dimensions {
        if let Some((lo, hi)) = bank.personal_bounds(d.name(), profile.sex, profile.age) {
            let (lo, hi) = (lo.max(d.spec.global_min), hi.min(d.spec.global_max));
            if lo < hi {
                d.min = lo;
                d.max = hi;
                d.provenance = format!("sex={}, age={}", profile.sex, profile.age);
            }
        }
    }
    phss
}

/// A labeled goal region, with one closed interval per PHSS dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Roi {
    pub label: String,
    pub color_hint: String,
    pub bounds: Vec<(f64, f64)>,
}

impl Roi {
    /// Resolves a bank ROI against a PHSS, clipping it to the personal
    /// bounds. Returns `Ok(None)` when nothing of the ROI is left.
    pub fn from_spec(spec: &RoiSpec, phss: &Phss) -> Result<Option<Roi>, StateSpaceError> {
        for name in spec.bounds.keys() {
            if phss.dimension(name).is_none() {
                return Err(StateSpaceError::InvalidRoi {
                    label: spec.label.clone(),
                    reason: format!("unknown dimension {name}"),
                });
            }
        }
        let mut bounds = Vec::new();
        for d in &phss.dimensions {
            let [lo, hi] = spec.bounds.get(d.name()).copied().unwrap_or([d.min, d.max]);
            if lo > hi {
                return Err(StateSpaceError::InvalidRoi {
                    label: spec.label.clone(),
                    reason: format!("inverted interval on {}", d.name()),
                });
            }
            let (lo, hi) = (lo.max(d.min), hi.min(d.max));
            if lo > hi {
                return Ok(None);
            }
            bounds.push((lo, hi));
        }
        Ok(Some(Roi {
            label: spec.label.clone(),
            color_hint: spec.color_hint.clone(),
            bounds,
        }))
    }

    /// Resolves every bank ROI, dropping those outside the PHSS.
    pub fn all_from_bank(bank: &KnowledgeBank, phss: &Phss) -> Result<Vec<Roi>, StateSpaceError> {
        let mut out = Vec::new();
        for spec in &bank.rois {
            if let Some(r) = Roi::from_spec(spec, phss)? {
                out.push(r);
            }
        }
        Ok(out)
    }
}

/// GHSS → PHSS → labeled graph using the bank's dimensions and ROIs.
pub fn personal_graph(profile: &UserProfile, bank: &KnowledgeBank) -> Result<StateGraph, StateSpaceError> {
    let ghss = build_ghss(bank.dimensions.clone())?;
    let phss = personalize(&ghss, profile, bank);
    let rois = Roi::all_from_bank(bank, &phss)?;
    discretize_and_label(&phss, &rois, bank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hse::Sex;
    use proptest::prelude::*;

    fn dim(name: &str, min: f64, max: f64, n: usize) -> DimensionSpec {
        DimensionSpec {
            name: name.into(),
            unit: "u".into(),
            global_min: min,
            global_max: max,
            bucket_count: n,
            orientation: Orientation::HigherIsBetter,
        }
    }

    #[test]
    fn two_dimensional_ghss() {
        let g = build_ghss(KnowledgeBank::builtin().dimensions).unwrap();
        assert_eq!(g.dimensions.len(), 2);
        assert_eq!((g.dimensions[0].global_min, g.dimensions[0].global_max), (0.0, 100.0));
        assert_eq!((g.dimensions[1].global_min, g.dimensions[1].global_max), (10.0, 80.0));
    }

    #[test]
    fn one_dimensional_ghss() {
        assert_eq!(build_ghss(vec![dim("x", 0.0, 1.0, 4)]).unwrap().dimensions.len(), 1);
    }

    #[test]
    fn invalid_ghss() {
        assert!(build_ghss(vec![dim("x", 0.0, 1.0, 1)]).is_err());
        assert!(build_ghss(vec![dim("x", 1.0, 0.0, 4)]).is_err());
        assert_eq!(build_ghss(vec![]), Err(StateSpaceError::NoDimensions));
    }

    #[test]
    fn young_male_vo2_ceiling() {
        let bank = KnowledgeBank::builtin();
        let g = build_ghss(bank.dimensions.clone()).unwrap();
        let p = UserProfile { age: 25, sex: Sex::Male, ..UserProfile::example() };
        let phss = personalize(&g, &p, &bank);
        let vo2 = phss.dimension("vo2max").unwrap();
        assert_eq!((vo2.min, vo2.max), (10.0, 60.0));
        assert_eq!(vo2.provenance, "sex=male, age=25");
    }

    #[test]
    fn empty_personalization_is_identity() {
        let mut bank = KnowledgeBank::builtin();
        bank.personalization.clear();
        let g = build_ghss(bank.dimensions.clone()).unwrap();
        assert_eq!(personalize(&g, &UserProfile::example(), &bank), Phss::unpersonalized(&g));
    }

    #[test]
    fn same_demographics_same_phss() {
        let bank = KnowledgeBank::builtin();
        let g = build_ghss(bank.dimensions.clone()).unwrap();
        let a = UserProfile::example();
        let b = UserProfile { weight_kg: 60.0, total_chol: 240.0, ..a.clone() };
        assert_eq!(personalize(&g, &a, &bank), personalize(&g, &b, &bank));
    }

    #[test]
    fn boundary_goes_to_higher_bucket() {
        let d = PersonalDimension { spec: dim("x", 0.0, 10.0, 10), min: 0.0, max: 10.0, provenance: String::new() };
        assert_eq!(d.bucket_of(3.0), 3);
        assert_eq!(d.bucket_of(2.999), 2);
        assert_eq!(d.bucket_of(0.0), 0);
        assert_eq!(d.bucket_of(10.0), 9);
        assert_eq!(d.center(3), 3.5);
    }

    #[test]
    fn roi_is_clipped() {
        let bank = KnowledgeBank::builtin();
        let g = build_ghss(bank.dimensions.clone()).unwrap();
        let phss = personalize(&g, &UserProfile::example(), &bank);
        let ideal = Roi::from_spec(&bank.rois[0], &phss).unwrap().unwrap();
        assert_eq!(ideal.bounds[1], (40.0, 53.0));
    }

    proptest! {
        #[test]
        fn personalization_is_contractive(age in 18u8..=100, female in any::<bool>()) {
            let bank = KnowledgeBank::builtin();
            let g = build_ghss(bank.dimensions.clone()).unwrap();
            let p = UserProfile { age, sex: if female { Sex::Female } else { Sex::Male }, ..UserProfile::example() };
            for d in personalize(&g, &p, &bank).dimensions {
                prop_assert!(d.spec.global_min <= d.min && d.max <= d.spec.global_max && d.min < d.max);
            }
        }
    }
}
