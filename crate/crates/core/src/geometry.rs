//! Ball volumes and Euclidean distances.
//!
//! The Gamma function is only ever needed at integer and half-integer
//! arguments here, so it is evaluated by the exact recursion
//! `Γ(x + 1) = x Γ(x)` starting from `Γ(1/2) = √π` or `Γ(1) = 1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 64;

/// `Γ(k / 2)` for a positive integer `k`.
pub fn gamma_half(k: u32) -> f64 {
    assert!(k >= 1, "gamma_half needs k >= 1");
    let (mut x, mut value) = if k.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (0.5, PI.sqrt())
    };
    let target = k as f64 / 2.0;
    while x < target {
        value *= x;
        x += 1.0;
    }
    value
}

/// `ln Γ(k / 2)`, by summing logs of the same recursion.
pub fn ln_gamma_half(k: u32) -> f64 {
    assert!(k >= 1, "ln_gamma_half needs k >= 1");
    let (mut x, mut value) = if k.is_multiple_of(2) {
        (1.0, 0.0)
    } else {
        (0.5, 0.5 * PI.ln())
    };
    let target = k as f64 / 2.0;
    while x < target {
        value += f64::ln(x);
        x += 1.0;
    }
    value
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::Domain(format!("dimension must be in 1..={MAX_DIM}, got {d}")));
    }
    Ok(())
}

/// Volume of the unit ball in `R^d`, `2 π^{d/2} / (d Γ(d/2))`.
pub fn unit_ball_volume(d: usize) -> Result<f64> {
    check_dim(d)?;
    let df = d as f64;
    Ok(2.0 * PI.powf(df / 2.0) / (df * gamma_half(d as u32)))
}

/// Volume of the closed ball of radius `eps` in `R^d`.
pub fn ball_volume(d: usize, eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("radius must be positive and finite, got {eps}")));
    }
    Ok(eps.powi(d as i32) * unit_ball_volume(d)?)
}

/// Precomputed `b_ε(d)` together with `b_1(d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallGeometry {
    pub d: usize,
    pub eps: f64,
    pub volume: f64,
    pub unit_volume: f64,
}

impl BallGeometry {
    pub fn new(d: usize, eps: f64) -> Result<Self> {
        let volume = ball_volume(d, eps)?;
        Ok(Self {
            d,
            eps,
            volume,
            unit_volume: unit_ball_volume(d)?,
        })
    }
}

/// Squared Euclidean distance without dimension checks.
#[inline]
pub(crate) fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Euclidean distance `||x - y||`.
pub fn euclidean_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(squared_distance(x, y).sqrt())
}
