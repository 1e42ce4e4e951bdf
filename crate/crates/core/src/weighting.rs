//! Course-difficulty weights: a decreasing exponential of a course's mean mark,
//! `weight(m) = beta * exp(-alpha * m)`, pinned by two anchor points.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::MAX_MARK;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("degenerate anchors: {0}")]
    DegenerateAnchors(String),
    #[error("mean mark {0} outside [0, {MAX_MARK}]")]
    MarkOutOfRange(f64),
    #[error("cannot parse anchor `{0}`, expected MARK:WEIGHT")]
    BadAnchor(String),
}

/// A (mean mark, weight) boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorPoint {
    pub mean_mark: f64,
    pub weight: f64,
}

impl AnchorPoint {
    pub fn new(mean_mark: f64, weight: f64) -> Result<Self, WeightError> {
        if !mean_mark.is_finite() || !weight.is_finite() || weight <= 0.0 {
            return Err(WeightError::DegenerateAnchors(format!(
                "anchor ({mean_mark}, {weight}) needs a finite mark and positive weight"
            )));
        }
        Ok(AnchorPoint { mean_mark, weight })
    }

    /// An "extremely easy" course: mean between A and A+, weight 0.5.
    pub const EASY: AnchorPoint = AnchorPoint {
        mean_mark: 4.15,
        weight: 0.5,
    };

    /// An "extremely hard" course: mean between D and D+, weight 2.
    pub const HARD: AnchorPoint = AnchorPoint {
        mean_mark: 1.15,
        weight: 2.0,
    };
}

impl FromStr for AnchorPoint {
    type Err = WeightError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || WeightError::BadAnchor(s.to_string());
        let (m, w) = s.split_once(':').ok_or_else(bad)?;
        let m: f64 = m.trim().parse().map_err(|_| bad())?;
        let w: f64 = w.trim().parse().map_err(|_| bad())?;
        AnchorPoint::new(m, w)
    }
}

impl fmt::Display for AnchorPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.mean_mark, self.weight)
    }
}

/// Fitted decay rate and scale together with the anchors they came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    /// Decay per grade point; positive.
    pub alpha: f64,
    pub beta: f64,
    pub easy_anchor: AnchorPoint,
    pub hard_anchor: AnchorPoint,
}

impl Default for WeightParams {
    fn default() -> Self {
        fit_weight_params(AnchorPoint::HARD, AnchorPoint::EASY).expect("default anchors are valid")
    }
}

/// Solves the two-anchor system for `alpha` and `beta`.
pub fn fit_weight_params(hard: AnchorPoint, easy: AnchorPoint) -> Result<WeightParams, WeightError> {
    if !(hard.mean_mark < easy.mean_mark) {
        return Err(WeightError::DegenerateAnchors(format!(
            "hard mean {} must be below easy mean {}",
            hard.mean_mark, easy.mean_mark
        )));
    }
    if !(hard.weight > easy.weight) {
        return Err(WeightError::DegenerateAnchors(format!(
            "hard weight {} must exceed easy weight {}",
            hard.weight, easy.weight
        )));
    }
    let alpha = (hard.weight / easy.weight).ln() / (easy.mean_mark - hard.mean_mark);
    let beta = hard.weight * (alpha * hard.mean_mark).exp();
    Ok(WeightParams {
        alpha,
        beta,
        easy_anchor: easy,
        hard_anchor: hard,
    })
}

impl WeightParams {
    /// Weight without range checking, for callers that already validated `mean_mark`.
    pub(crate) fn eval(&self, mean_mark: f64) -> f64 {
        self.beta * (-self.alpha * mean_mark).exp()
    }
}

/// Difficulty weight of a course with the given mean mark.
pub fn course_weight(params: &WeightParams, mean_mark: f64) -> Result<f64, WeightError> {
    if !mean_mark.is_finite() || !(0.0..=MAX_MARK).contains(&mean_mark) {
        return Err(WeightError::MarkOutOfRange(mean_mark));
    }
    Ok(params.eval(mean_mark))
}
