//! Majorization and weak supermajorization of positive vectors, plus a
//! randomized Schur-convexity probe.
//!
//! Both preorders compare prefix sums of the increasing arrangements:
//! x is majorized by y when every prefix sum of x's increasing arrangement
//! dominates y's and the totals agree; weak supermajorization drops the
//! total-sum constraint. The "smaller" vector under either relation is the
//! more spread out one.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::error::Error;

/// Slack for the total-sum equality in majorization.
fn total_tolerance(total: f64) -> f64 {
    1e-12 * total.abs().max(1.0)
}

/// Slack for prefix-sum comparisons: sums of up to n doubles of the given
/// magnitude.
fn prefix_tolerance(n: usize, max_coord: f64) -> f64 {
    1e-12 * n as f64 * max_coord.max(1.0)
}

/// Outcome of comparing two equal-length positive vectors under both
/// preorders, with the prefix sums retained for reporting.
#[derive(Clone, Debug, Serialize)]
pub struct MajorizationRelation {
    /// x <=m y: x is majorized by y.
    pub majorized: bool,
    /// x <=w y: x is weakly supermajorized by y.
    pub weakly_supermajorized: bool,
    /// Prefix sums of the increasing arrangement of x.
    pub prefix_sums_x: Vec<f64>,
    /// Prefix sums of the increasing arrangement of y.
    pub prefix_sums_y: Vec<f64>,
    pub total_x: f64,
    pub total_y: f64,
}

impl MajorizationRelation {
    /// Compares `x` against `y`; fields describe whether x is below y.
    pub fn compare(x: &[f64], y: &[f64]) -> Result<Self, Error> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::InvalidParameter {
                name: "x",
                value: 0.0,
                requirement: "at least one entry",
            });
        }
        let prefix_sums_x = increasing_prefix_sums(x);
        let prefix_sums_y = increasing_prefix_sums(y);
        let n = x.len();
        let max_coord = x
            .iter()
            .chain(y.iter())
            .fold(0.0_f64, |acc, &v| acc.max(v.abs()));
        let slack = prefix_tolerance(n, max_coord);

        let weakly = prefix_sums_x
            .iter()
            .zip(&prefix_sums_y)
            .all(|(sx, sy)| *sx >= *sy - slack);

        let total_x = prefix_sums_x[n - 1];
        let total_y = prefix_sums_y[n - 1];
        let strict_prefixes = prefix_sums_x[..n - 1]
            .iter()
            .zip(&prefix_sums_y[..n - 1])
            .all(|(sx, sy)| *sx >= *sy - slack);
        let majorized =
            strict_prefixes && (total_x - total_y).abs() <= total_tolerance(total_x.max(total_y));

        Ok(Self {
            majorized,
            weakly_supermajorized: weakly,
            prefix_sums_x,
            prefix_sums_y,
            total_x,
            total_y,
        })
    }
}

fn increasing_prefix_sums(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("coordinates are finite"));
    let mut acc = 0.0;
    sorted
        .iter()
        .map(|&x| {
            acc += x;
            acc
        })
        .collect()
}

/// True when x <=m y (x is majorized by y).
pub fn is_majorized_by(x: &[f64], y: &[f64]) -> Result<bool, Error> {
    Ok(MajorizationRelation::compare(x, y)?.majorized)
}

/// True when x <=w y (x is weakly supermajorized by y).
pub fn is_weakly_supermajorized_by(x: &[f64], y: &[f64]) -> Result<bool, Error> {
    Ok(MajorizationRelation::compare(x, y)?.weakly_supermajorized)
}

/// Result of the Schur-convexity probe.
#[derive(Clone, Debug, Serialize)]
pub enum ProbeOutcome {
    /// No violation of phi(x) <= phi(y) across all generated pairs x <=m y.
    Consistent { trials: u32 },
    /// First violating pair, returned as a witness.
    Witness {
        trial: u32,
        x: Vec<f64>,
        y: Vec<f64>,
        phi_x: f64,
        phi_y: f64,
    },
}

impl ProbeOutcome {
    pub fn is_consistent(&self) -> bool {
        matches!(self, ProbeOutcome::Consistent { .. })
    }
}

/// Probes whether `phi` behaves Schur-convex in dimension `n`.
///
/// Each trial draws a random positive vector y and applies one Robin-Hood
/// transfer (move delta from a larger to a smaller coordinate, with delta
/// at most half the gap), producing x with x <=m y by construction. The
/// probe then requires phi(x) <= phi(y) + 1e-10. Deterministic for a fixed
/// seed.
pub fn schur_convexity_probe<F>(phi: F, n: usize, trials: u32, seed: u64) -> ProbeOutcome
where
    F: Fn(&[f64]) -> f64,
{
    assert!(n >= 2, "the probe needs at least two coordinates");
    assert!(trials >= 1);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
        let mut x = y.clone();
        // Pick a (smaller, larger) coordinate pair; skip near-ties.
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        let (lo, hi) = if x[i] <= x[j] { (i, j) } else { (j, i) };
        let gap = x[hi] - x[lo];
        if lo == hi || gap < 1e-9 {
            continue;
        }
        let delta = rng.random_range(0.0..0.5) * gap;
        x[lo] += delta;
        x[hi] -= delta;

        let phi_x = phi(&x);
        let phi_y = phi(&y);
        if phi_x > phi_y + 1e-10 {
            return ProbeOutcome::Witness {
                trial,
                x,
                y,
                phi_x,
                phi_y,
            };
        }
    }
    ProbeOutcome::Consistent { trials }
}
