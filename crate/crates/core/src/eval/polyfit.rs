//! Least-squares quadratic fit through the normal equations.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum FitError {
    #[error("a quadratic fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("design matrix is rank-deficient")]
    DegenerateInput,
}

/// `y ≈ a·x² + b·x + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Euclidean norm of the residual vector.
    pub residual_norm: f64,
}

impl QuadraticFit {
    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }
}

/// Fits a degree-2 polynomial to `points`.
///
/// x is centered and scaled before forming the normal equations, then the
/// coefficients are mapped back, which keeps the 3×3 system well conditioned
/// for inputs like day counts.
pub fn polyfit2(points: &[(f64, f64)]) -> Result<QuadraticFit, FitError> {
    if points.len() < 3 {
        return Err(FitError::TooFewPoints(points.len()));
    }
    let n = points.len() as f64;
    let mean = points.iter().map(|p| p.0).sum::<f64>() / n;
    let scale = points
        .iter()
        .map(|p| (p.0 - mean).abs())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(FitError::DegenerateInput);
    }

    // Normal equations in the scaled variable u = (x - mean) / scale.
    let mut s = [0.0f64; 5];
    let mut t = [0.0f64; 3];
    for &(x, y) in points {
        let u = (x - mean) / scale;
        let mut p = 1.0;
        for (k, sk) in s.iter_mut().enumerate() {
            *sk += p;
            if k < 3 {
                t[k] += p * y;
            }
            p *= u;
        }
    }
    // Unknowns ordered (c', b', a').
    let mut m = [
        [s[0], s[1], s[2], t[0]],
        [s[1], s[2], s[3], t[1]],
        [s[2], s[3], s[4], t[2]],
    ];
    let [c_u, b_u, a_u] = solve3(&mut m).ok_or(FitError::DegenerateInput)?;

    let a = a_u / (scale * scale);
    let b = b_u / scale - 2.0 * a_u * mean / (scale * scale);
    let c = a_u * mean * mean / (scale * scale) - b_u * mean / scale + c_u;

    let residual_norm = points
        .iter()
        .map(|&(x, y)| {
            let u = (x - mean) / scale;
            let r = y - ((a_u * u + b_u) * u + c_u);
            r * r
        })
        .sum::<f64>()
        .sqrt();
    Ok(QuadraticFit {
        a,
        b,
        c,
        residual_norm,
    })
}

/// Gaussian elimination with partial pivoting on an augmented 3×4 matrix.
fn solve3(m: &mut [[f64; 4]; 3]) -> Option<[f64; 3]> {
    let magnitude = m.iter().flat_map(|r| r[..3].iter()).fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tolerance = magnitude * 1e-12;
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() <= tolerance {
            return None;
        }
        m.swap(col, pivot);
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= factor * m[col][k];
            }
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (m[row][3] - tail) / m[row][row];
    }
    Some(x)
}
