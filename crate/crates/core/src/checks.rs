//! Grid-certified order and precondition checks.
//!
//! The contract everywhere: a check evaluates pure functions on a fixed
//! grid, compares with a tolerance relative to the local function scale,
//! and reports the first violation in increasing t as a witness. Evaluation
//! errors and non-finite values make a check inconclusive, never a silent
//! pass. Parallel evaluation cannot change a verdict: values are collected
//! in grid order before any scan.

use crate::baseline::{condition_functions, Baseline};
use crate::error::Error;
use crate::grid::{eval_grid, Grid};
use crate::scale_model::ScaleModel;
use crate::verdict::{
    ConditionReport, Direction, LrVerdict, MonotoneVerdict, OrderDiagnostics, OrderVerdict,
    Outcome, StochasticOrder, Witness,
};

/// Densities below this are treated as underflowed in likelihood-ratio
/// checks; such points are excluded and counted as grid truncation.
pub const DENSITY_UNDERFLOW_FLOOR: f64 = 1e-290;

fn local_scale(v1: f64, v2: f64) -> f64 {
    v1.abs().max(v2.abs()).max(1.0)
}

/// Finds the first evaluation problem (error or non-finite value), returning
/// an inconclusive reason.
fn first_evaluation_problem(ts: &[f64], values: &[Result<f64, Error>]) -> Option<String> {
    for (t, v) in ts.iter().zip(values) {
        match v {
            Err(e) => return Some(format!("evaluation failed at t = {t}: {e}")),
            Ok(x) if !x.is_finite() => {
                return Some(format!("non-finite value {x} at t = {t}"))
            }
            _ => {}
        }
    }
    None
}

fn unwrap_values(values: Vec<Result<f64, Error>>) -> Vec<f64> {
    values
        .into_iter()
        .map(|v| v.expect("checked by first_evaluation_problem"))
        .collect()
}

/// Scans consecutive values for a monotonicity violation larger than the
/// tolerance; ties within tolerance never count.
fn scan_monotone(
    ts: &[f64],
    vals: &[f64],
    direction: Direction,
    tol: f64,
) -> (Outcome, Option<Witness>) {
    for i in 1..vals.len() {
        let (v1, v2) = (vals[i - 1], vals[i]);
        let slack = tol * local_scale(v1, v2);
        let violated = match direction {
            Direction::Increasing => v2 < v1 - slack,
            Direction::Decreasing => v2 > v1 + slack,
        };
        if violated {
            return (
                Outcome::Fails,
                Some(Witness {
                    t1: ts[i - 1],
                    t2: ts[i],
                    v1,
                    v2,
                }),
            );
        }
    }
    (Outcome::Holds, None)
}

/// Certifies that `g` is monotone in the given direction on the grid.
pub fn check_monotone<F>(g: &F, grid: &Grid, direction: Direction, tol: f64) -> MonotoneVerdict
where
    F: Fn(f64) -> Result<f64, Error> + Sync,
{
    let ts = grid.values();
    let raw = eval_grid(g, &ts);
    if let Some(reason) = first_evaluation_problem(&ts, &raw) {
        return MonotoneVerdict {
            direction,
            outcome: Outcome::Inconclusive,
            witness: None,
            reason: Some(reason),
            grid: *grid,
            tolerance: tol,
        };
    }
    let vals = unwrap_values(raw);
    let (outcome, witness) = scan_monotone(&ts, &vals, direction, tol);
    MonotoneVerdict {
        direction,
        outcome,
        witness,
        reason: None,
        grid: *grid,
        tolerance: tol,
    }
}

/// Pointwise dominance scan: requires upper >= lower - tol * scale at every
/// grid point. Returns the first violation plus extremal-gap diagnostics.
fn scan_dominance(
    ts: &[f64],
    upper: &[f64],
    lower: &[f64],
    tol: f64,
) -> (Outcome, Option<Witness>, OrderDiagnostics) {
    let mut min_margin = f64::INFINITY;
    let mut argmin = ts[0];
    let mut first_violation = None;
    for i in 0..ts.len() {
        let margin = upper[i] - lower[i];
        if margin < min_margin {
            min_margin = margin;
            argmin = ts[i];
        }
        if first_violation.is_none() && margin < -tol * local_scale(upper[i], lower[i]) {
            first_violation = Some(Witness {
                t1: ts[i],
                t2: ts[i],
                v1: upper[i],
                v2: lower[i],
            });
        }
    }
    let outcome = if first_violation.is_some() {
        Outcome::Fails
    } else {
        Outcome::Holds
    };
    (
        outcome,
        first_violation,
        OrderDiagnostics {
            min_margin: Some(min_margin),
            argmin_t: Some(argmin),
            truncated_points: None,
            crosscheck: None,
        },
    )
}

fn inconclusive_order(
    order: StochasticOrder,
    reason: String,
    grid: &Grid,
    tol: f64,
) -> OrderVerdict {
    OrderVerdict {
        order,
        outcome: Outcome::Inconclusive,
        witness: None,
        reason: Some(reason),
        grid: *grid,
        tolerance: tol,
        diagnostics: OrderDiagnostics::default(),
    }
}

/// Usual stochastic order X <= Y for maxima: the system distribution
/// function of X dominates that of Y at every grid point.
pub fn check_st(x: &ScaleModel, y: &ScaleModel, grid: &Grid, tol: f64) -> OrderVerdict {
    let ts = grid.values();
    let fx = eval_grid(&|t| x.max_cdf(t), &ts);
    let fy = eval_grid(&|t| y.max_cdf(t), &ts);
    for raw in [&fx, &fy] {
        if let Some(reason) = first_evaluation_problem(&ts, raw) {
            return inconclusive_order(StochasticOrder::St, reason, grid, tol);
        }
    }
    let fx = unwrap_values(fx);
    let fy = unwrap_values(fy);
    let (outcome, witness, diagnostics) = scan_dominance(&ts, &fx, &fy, tol);
    OrderVerdict {
        order: StochasticOrder::St,
        outcome,
        witness,
        reason: None,
        grid: *grid,
        tolerance: tol,
        diagnostics,
    }
}

/// Reverse hazard rate order X <= Y: the system reverse hazard of Y
/// dominates that of X pointwise. Cross-checked by monotonicity of the
/// CDF ratio F_Y / F_X, the equivalent characterization.
pub fn check_rh(x: &ScaleModel, y: &ScaleModel, grid: &Grid, tol: f64) -> OrderVerdict {
    let ts = grid.values();
    let rx = eval_grid(&|t| x.max_reverse_hazard(t), &ts);
    let ry = eval_grid(&|t| y.max_reverse_hazard(t), &ts);
    for raw in [&rx, &ry] {
        if let Some(reason) = first_evaluation_problem(&ts, raw) {
            return inconclusive_order(StochasticOrder::Rh, reason, grid, tol);
        }
    }
    let rx = unwrap_values(rx);
    let ry = unwrap_values(ry);
    let (outcome, witness, mut diagnostics) = scan_dominance(&ts, &ry, &rx, tol);

    // Cross-check: F_Y / F_X increasing wherever the denominator is healthy.
    let fx = eval_grid(&|t| x.max_cdf(t), &ts);
    let fy = eval_grid(&|t| y.max_cdf(t), &ts);
    if first_evaluation_problem(&ts, &fx).is_none()
        && first_evaluation_problem(&ts, &fy).is_none()
    {
        let fx = unwrap_values(fx);
        let fy = unwrap_values(fy);
        let mut ratio_ts = Vec::new();
        let mut ratio_vals = Vec::new();
        for i in 0..ts.len() {
            if fx[i] >= DENSITY_UNDERFLOW_FLOOR && fy[i] >= DENSITY_UNDERFLOW_FLOOR {
                ratio_ts.push(ts[i]);
                ratio_vals.push(fy[i] / fx[i]);
            }
        }
        if ratio_vals.len() >= 2 {
            let (cross, _) = scan_monotone(&ratio_ts, &ratio_vals, Direction::Increasing, tol);
            diagnostics.crosscheck = Some(cross);
        }
    }

    OrderVerdict {
        order: StochasticOrder::Rh,
        outcome,
        witness,
        reason: None,
        grid: *grid,
        tolerance: tol,
        diagnostics,
    }
}

/// Monotone verdict for the reverse-hazard ratio r_Y / r_X, direction
/// increasing.
pub fn check_rh_ratio_increasing(
    x: &ScaleModel,
    y: &ScaleModel,
    grid: &Grid,
    tol: f64,
) -> MonotoneVerdict {
    let ratio = |t: f64| -> Result<f64, Error> {
        Ok(y.max_reverse_hazard(t)? / x.max_reverse_hazard(t)?)
    };
    check_monotone(&ratio, grid, Direction::Increasing, tol)
}

/// Monotone verdict for the baseline reverse-hazard ratio r_F / r_G,
/// direction increasing.
pub fn check_rf_over_rg_increasing(
    f: &dyn Baseline,
    g: &dyn Baseline,
    grid: &Grid,
    tol: f64,
) -> MonotoneVerdict {
    let ratio = |t: f64| -> Result<f64, Error> { Ok(f.reverse_hazard(t)? / g.reverse_hazard(t)?) };
    check_monotone(&ratio, grid, Direction::Increasing, tol)
}

/// Composes a likelihood-ratio conclusion from a reverse-hazard verdict and
/// a reverse-hazard-ratio monotonicity verdict produced on the same grid.
///
/// The composition is one-directional: when either hypothesis does not
/// hold, the result is inconclusive (with the failing hypothesis's witness
/// attached), never a refutation.
pub fn lr_from_rh(rh: &OrderVerdict, ratio: &MonotoneVerdict) -> Result<OrderVerdict, Error> {
    if rh.grid != ratio.grid {
        return Err(Error::GridMismatch);
    }
    let (outcome, witness, reason) = if rh.holds() && ratio.holds() {
        (
            Outcome::Holds,
            None,
            Some(
                "reverse-hazard dominance with increasing reverse-hazard ratio".to_string(),
            ),
        )
    } else if !rh.holds() {
        (
            Outcome::Inconclusive,
            rh.witness,
            Some(format!(
                "composition hypothesis missing: reverse-hazard order is {:?}",
                rh.outcome
            )),
        )
    } else {
        (
            Outcome::Inconclusive,
            ratio.witness,
            Some(format!(
                "composition hypothesis missing: reverse-hazard ratio monotonicity is {:?}",
                ratio.outcome
            )),
        )
    };
    Ok(OrderVerdict {
        order: StochasticOrder::Lr,
        outcome,
        witness,
        reason,
        grid: rh.grid,
        tolerance: rh.tolerance,
        diagnostics: OrderDiagnostics::default(),
    })
}

/// Likelihood ratio order X <= Y: direct monotone check of the density
/// ratio f_Y / f_X, together with the composition through the
/// reverse-hazard route. The overall verdict holds when either route
/// holds; a direct refutation with a holding composition is reported as
/// inconclusive (conflicting evidence at grid resolution).
pub fn check_lr(x: &ScaleModel, y: &ScaleModel, grid: &Grid, tol: f64) -> LrVerdict {
    let ts = grid.values();
    let px = eval_grid(&|t| x.max_pdf(t), &ts);
    let py = eval_grid(&|t| y.max_pdf(t), &ts);

    let mut truncated = 0usize;
    let direct = 'direct: {
        for raw in [&px, &py] {
            if let Some(reason) = first_evaluation_problem(&ts, raw) {
                break 'direct MonotoneVerdict {
                    direction: Direction::Increasing,
                    outcome: Outcome::Inconclusive,
                    witness: None,
                    reason: Some(reason),
                    grid: *grid,
                    tolerance: tol,
                };
            }
        }
        let px = unwrap_values(px);
        let py = unwrap_values(py);
        // Exclude the underflow region: ratios of collapsed densities are
        // meaningless. The count is reported as grid truncation.
        let mut kept_ts = Vec::with_capacity(ts.len());
        let mut ratio = Vec::with_capacity(ts.len());
        for i in 0..ts.len() {
            if px[i] >= DENSITY_UNDERFLOW_FLOOR && py[i] >= DENSITY_UNDERFLOW_FLOOR {
                kept_ts.push(ts[i]);
                ratio.push(py[i] / px[i]);
            }
        }
        truncated = ts.len() - kept_ts.len();
        if kept_ts.len() < 2 {
            break 'direct MonotoneVerdict {
                direction: Direction::Increasing,
                outcome: Outcome::Inconclusive,
                witness: None,
                reason: Some(format!(
                    "densities underflowed at {truncated} of {} grid points",
                    ts.len()
                )),
                grid: *grid,
                tolerance: tol,
            };
        }
        let (outcome, witness) = scan_monotone(&kept_ts, &ratio, Direction::Increasing, tol);
        let reason = (truncated > 0)
            .then(|| format!("grid truncated: {truncated} underflowed points excluded"));
        MonotoneVerdict {
            direction: Direction::Increasing,
            outcome,
            witness,
            reason,
            grid: *grid,
            tolerance: tol,
        }
    };

    let rh = check_rh(x, y, grid, tol);
    let ratio = check_rh_ratio_increasing(x, y, grid, tol);
    let composed = lr_from_rh(&rh, &ratio).expect("verdicts share one grid by construction");

    let (outcome, witness, reason) = if direct.holds() || composed.holds() {
        if direct.fails() {
            (
                Outcome::Inconclusive,
                direct.witness,
                Some(
                    "conflicting evidence: direct density-ratio check fails while the \
                     composed route holds"
                        .to_string(),
                ),
            )
        } else {
            (Outcome::Holds, None, None)
        }
    } else if direct.fails() {
        (Outcome::Fails, direct.witness, None)
    } else {
        (
            Outcome::Inconclusive,
            None,
            Some("neither the direct nor the composed route certified the order".to_string()),
        )
    };

    let diagnostics = OrderDiagnostics {
        truncated_points: (truncated > 0).then_some(truncated),
        ..OrderDiagnostics::default()
    };

    LrVerdict {
        overall: OrderVerdict {
            order: StochasticOrder::Lr,
            outcome,
            witness,
            reason,
            grid: *grid,
            tolerance: tol,
            diagnostics,
        },
        direct,
        composed,
    }
}

/// Checks the three analytic preconditions of the comparison rules on the
/// grid: psi = t r(t) decreasing, chi = t^2 r'(t) increasing, and
/// eta = -t r'(t)/r(t) increasing. For generalized gamma baselines the
/// report also carries the known parameter regions, so a grid verdict can
/// be read against the analytic expectation.
pub fn verify_conditions(baseline: &dyn Baseline, grid: &Grid, tol: f64) -> ConditionReport {
    let cf = condition_functions(baseline);
    let psi_decreasing = check_monotone(&|t| cf.psi(t), grid, Direction::Decreasing, tol);
    let chi_increasing = check_monotone(&|t| cf.chi(t), grid, Direction::Increasing, tol);
    let eta_increasing = check_monotone(&|t| cf.eta(t), grid, Direction::Increasing, tol);

    let mut annotations = Vec::new();
    if let Some(gg) = baseline.as_generalized_gamma() {
        let (beta, alpha) = (gg.beta(), gg.alpha());
        annotations.push(
            "psi = t*r(t): decreasing for every positive shape pair".to_string(),
        );
        if beta <= 1.0 {
            annotations.push(format!(
                "chi = t^2*r'(t): increasing guaranteed on beta <= 1 (beta = {beta})"
            ));
        } else {
            annotations.push(format!(
                "chi = t^2*r'(t): beta = {beta} > 1 is outside the guaranteed region; verdict is grid-only"
            ));
        }
        if alpha <= beta {
            annotations.push(format!(
                "eta = -t*r'(t)/r(t): increasing guaranteed on alpha <= beta (alpha = {alpha}, beta = {beta})"
            ));
        } else {
            annotations.push(format!(
                "eta = -t*r'(t)/r(t): alpha = {alpha} > beta = {beta} is outside the guaranteed region; verdict is grid-only"
            ));
        }
    }

    ConditionReport {
        baseline: baseline.fingerprint(),
        psi_decreasing,
        chi_increasing,
        eta_increasing,
        annotations,
    }
}
