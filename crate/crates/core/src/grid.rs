//! Evaluation grids and the data-parallel evaluation primitive.
//!
//! All certification in this crate is grid-based: a function is evaluated at
//! every point of a fixed grid and verdicts are derived from the resulting
//! vector. Grid evaluation is embarrassingly parallel; with the `parallel`
//! feature the points are mapped through rayon, and the output is identical
//! to the sequential path because collection preserves point order.

use serde::Serialize;

use crate::error::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Grid point placement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    /// Serialized as `lin`, matching the CLI spelling.
    #[serde(rename = "lin")]
    Linear,
}

/// A finite evaluation grid on (0, inf).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

/// Default number of grid points.
pub const DEFAULT_POINTS: usize = 2000;

impl Grid {
    pub fn new(t_min: f64, t_max: f64, points: usize, spacing: Spacing) -> Result<Self, Error> {
        if !(t_min > 0.0) || !t_min.is_finite() {
            return Err(Error::InvalidParameter {
                name: "t_min",
                value: t_min,
                requirement: "a positive finite real",
            });
        }
        if !(t_max > t_min) || !t_max.is_finite() {
            return Err(Error::InvalidParameter {
                name: "t_max",
                value: t_max,
                requirement: "finite and greater than t_min",
            });
        }
        if points < 2 {
            return Err(Error::InvalidParameter {
                name: "points",
                value: points as f64,
                requirement: "at least 2",
            });
        }
        Ok(Self {
            t_min,
            t_max,
            points,
            spacing,
        })
    }

    /// Default log grid for a unit-scale baseline: [1e-3, 50], 2000 points.
    pub fn default_unit() -> Self {
        Self {
            t_min: 1e-3,
            t_max: 50.0,
            points: DEFAULT_POINTS,
            spacing: Spacing::Log,
        }
    }

    /// Default grid for models with the given scale parameters:
    /// t_min = 1e-3 / lambda_max, t_max = 50 / lambda_min, log spacing.
    pub fn default_for_lambdas(lambdas: &[f64]) -> Result<Self, Error> {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for &l in lambdas {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "lambda",
                    value: l,
                    requirement: "a positive finite real",
                });
            }
            lo = lo.min(l);
            hi = hi.max(l);
        }
        if lambdas.is_empty() {
            return Ok(Self::default_unit());
        }
        Self::new(1e-3 / hi, 50.0 / lo, DEFAULT_POINTS, Spacing::Log)
    }

    /// The grid of arguments lambda * t seen by a baseline when the model
    /// grid covers `self` and scales range over `lambdas`.
    pub fn induced_baseline_grid(&self, lambdas: &[f64]) -> Result<Self, Error> {
        let lo = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = lambdas.iter().copied().fold(0.0_f64, f64::max);
        if lambdas.is_empty() {
            return Ok(*self);
        }
        Self::new(self.t_min * lo, self.t_max * hi, self.points, self.spacing)
    }

    /// Materializes the grid points in increasing order. Endpoints are exact.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let mut ts = Vec::with_capacity(n);
        match self.spacing {
            Spacing::Log => {
                let (ln_lo, ln_hi) = (self.t_min.ln(), self.t_max.ln());
                let step = (ln_hi - ln_lo) / (n - 1) as f64;
                for i in 0..n {
                    ts.push((ln_lo + step * i as f64).exp());
                }
            }
            Spacing::Linear => {
                let step = (self.t_max - self.t_min) / (n - 1) as f64;
                for i in 0..n {
                    ts.push(self.t_min + step * i as f64);
                }
            }
        }
        ts[0] = self.t_min;
        ts[n - 1] = self.t_max;
        ts
    }
}

/// Evaluates `g` at every point, sequentially.
pub fn eval_grid_sequential<F>(g: &F, ts: &[f64]) -> Vec<Result<f64, Error>>
where
    F: Fn(f64) -> Result<f64, Error> + Sync,
{
    ts.iter().map(|&t| g(t)).collect()
}

/// Evaluates `g` at every point. Runs on the rayon pool when the `parallel`
/// feature is enabled; the result vector is identical to the sequential one
/// either way (points are pure functions, order is preserved).
#[cfg(feature = "parallel")]
pub fn eval_grid<F>(g: &F, ts: &[f64]) -> Vec<Result<f64, Error>>
where
    F: Fn(f64) -> Result<f64, Error> + Sync,
{
    ts.par_iter().map(|&t| g(t)).collect()
}

/// Sequential fallback used when the `parallel` feature is disabled.
#[cfg(not(feature = "parallel"))]
pub fn eval_grid<F>(g: &F, ts: &[f64]) -> Vec<Result<f64, Error>>
where
    F: Fn(f64) -> Result<f64, Error> + Sync,
{
    eval_grid_sequential(g, ts)
}
