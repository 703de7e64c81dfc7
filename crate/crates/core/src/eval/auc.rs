//! Area under the sorted-delta curve.
//!
//! Sorted deltas are joined by straight lines and integrated on a uniform
//! grid of spacing `0.0001` with both the composite trapezoidal and the
//! composite Simpson rule; the reported area is the mean of the two.

use serde::{Deserialize, Serialize};

/// Grid spacing along the x axis.
pub const AUC_SPACING: f64 = 1e-4;
const STEPS_PER_UNIT: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum AucError {
    #[error("cannot integrate an empty delta list")]
    EmptyInput,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AucAxis {
    /// Resource index scaled onto `[0, 1]`, so the area is comparable across
    /// dataset sizes (a constant curve integrates to its value).
    #[default]
    Normalized,
    /// Raw resource index `0..n-1`.
    RawIndex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AucEstimate {
    pub trapezoid: f64,
    pub simpson: f64,
    /// Mean of the two rules.
    pub value: f64,
}

/// Area under the sorted-delta curve on the normalized axis.
pub fn auc(deltas: &[i64]) -> Result<f64, AucError> {
    auc_with(deltas, AucAxis::Normalized).map(|a| a.value)
}

pub fn auc_with(deltas: &[i64], axis: AucAxis) -> Result<AucEstimate, AucError> {
    if deltas.is_empty() {
        return Err(AucError::EmptyInput);
    }
    let mut sorted: Vec<f64> = deltas.iter().map(|&d| d as f64).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("deltas are finite"));
    let segments = (sorted.len() - 1) as u64;

    let (intervals, width) = match axis {
        AucAxis::Normalized => (STEPS_PER_UNIT, 1.0),
        AucAxis::RawIndex => (segments * STEPS_PER_UNIT, segments as f64),
    };
    if intervals == 0 {
        // A single delta on the raw axis spans zero width.
        return Ok(AucEstimate {
            trapezoid: 0.0,
            simpson: 0.0,
            value: 0.0,
        });
    }
    let h = width / intervals as f64;

    // Node position for grid point k, in exact integer arithmetic so that
    // curve breakpoints land exactly on grid points when they can.
    let value_at = |k: u64| -> f64 {
        if segments == 0 {
            return sorted[0];
        }
        let num = k * segments;
        let i = (num / intervals) as usize;
        let rem = num % intervals;
        if rem == 0 || i + 1 >= sorted.len() {
            sorted[i.min(sorted.len() - 1)]
        } else {
            let frac = rem as f64 / intervals as f64;
            sorted[i] + (sorted[i + 1] - sorted[i]) * frac
        }
    };

    let mut trap_inner = 0.0;
    let mut odd = 0.0;
    let mut even = 0.0;
    for k in 1..intervals {
        let f = value_at(k);
        trap_inner += f;
        if k % 2 == 1 {
            odd += f;
        } else {
            even += f;
        }
    }
    let ends = value_at(0) + value_at(intervals);
    let trapezoid = h * (ends / 2.0 + trap_inner);
    // `intervals` is always even here.
    let simpson = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
    Ok(AucEstimate {
        trapezoid,
        simpson,
        value: (trapezoid + simpson) / 2.0,
    })
}
