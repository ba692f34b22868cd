//! Verdict types shared by the order and condition checkers.
//!
//! Every verdict is certified on a finite grid: `Holds` means "no violation
//! on this grid at this tolerance", never an analytic proof. Failures carry
//! the first violating pair in increasing t as a witness.

use serde::Serialize;

use crate::grid::Grid;

/// Monotonicity direction under test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// Headline outcome of any grid check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Holds,
    Fails,
    Inconclusive,
}

/// First violation found, in increasing t. Pointwise checks use t1 == t2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub t1: f64,
    pub t2: f64,
    pub v1: f64,
    pub v2: f64,
}

/// Default relative tolerance for grid comparisons; applied against the
/// local function scale max(|v1|, |v2|, 1).
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Grid-certified monotonicity verdict.
#[derive(Clone, Debug, Serialize)]
pub struct MonotoneVerdict {
    pub direction: Direction,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub grid: Grid,
    pub tolerance: f64,
}

impl MonotoneVerdict {
    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn fails(&self) -> bool {
        self.outcome == Outcome::Fails
    }
}

/// The stochastic orders the crate can certify.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StochasticOrder {
    /// Usual stochastic order: pointwise survival dominance.
    St,
    /// Reverse hazard rate order: pointwise reverse-hazard dominance.
    Rh,
    /// Likelihood ratio order: monotone density ratio.
    Lr,
}

impl StochasticOrder {
    pub fn as_str(&self) -> &'static str {
        match self {
            StochasticOrder::St => "st",
            StochasticOrder::Rh => "rh",
            StochasticOrder::Lr => "lr",
        }
    }
}

/// Extremal-gap diagnostics attached to order verdicts.
#[derive(Clone, Debug, Default, Serialize)]
pub struct OrderDiagnostics {
    /// Smallest signed margin observed (negative means the dominance
    /// direction was locally violated before tolerance).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_margin: Option<f64>,
    /// Location of the smallest margin.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmin_t: Option<f64>,
    /// Grid points excluded because both densities underflowed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncated_points: Option<usize>,
    /// Outcome of the cross-check route, where one exists (e.g. the CDF
    /// ratio monotonicity backing a pointwise reverse-hazard comparison).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crosscheck: Option<Outcome>,
}

/// Verdict for a single stochastic-order comparison of two systems.
#[derive(Clone, Debug, Serialize)]
pub struct OrderVerdict {
    pub order: StochasticOrder,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub grid: Grid,
    pub tolerance: f64,
    pub diagnostics: OrderDiagnostics,
}

impl OrderVerdict {
    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn fails(&self) -> bool {
        self.outcome == Outcome::Fails
    }
}

/// Composite likelihood-ratio verdict: the direct density-ratio check and
/// the composition through the reverse-hazard order.
///
/// `overall` holds only when the direct check holds or both composition
/// hypotheses hold; a failed composition hypothesis alone is inconclusive
/// because the composition is one-directional.
#[derive(Clone, Debug, Serialize)]
pub struct LrVerdict {
    pub overall: OrderVerdict,
    pub direct: MonotoneVerdict,
    pub composed: OrderVerdict,
}

/// Which of the three baseline preconditions hold on the grid, plus
/// parameter-region annotations for generalized gamma baselines.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub baseline: String,
    /// psi(t) = t r(t), checked decreasing.
    pub psi_decreasing: MonotoneVerdict,
    /// chi(t) = t^2 r'(t), checked increasing.
    pub chi_increasing: MonotoneVerdict,
    /// eta(t) = -t r'(t)/r(t), checked increasing (equivalently t r'/r
    /// decreasing).
    pub eta_increasing: MonotoneVerdict,
    /// Analytic-region notes, populated for generalized gamma baselines.
    pub annotations: Vec<String>,
}

impl ConditionReport {
    pub fn all_hold(&self) -> bool {
        self.psi_decreasing.holds() && self.chi_increasing.holds() && self.eta_increasing.holds()
    }
}
