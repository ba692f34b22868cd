//! Stochastic comparison of parallel-system lifetimes in scale families.
//!
//! A parallel system of n independent components with lifetimes
//! X_i ~ F(lambda_i t) lives as long as its longest-lived component. This
//! crate builds those largest-order-statistic distributions from a baseline
//! F (the generalized gamma family and anything else implementing
//! [`baseline::Baseline`]), compares the scale vectors under majorization
//! preorders, certifies usual-stochastic / reverse-hazard / likelihood-ratio
//! orderings between two systems on evaluation grids, maps verified
//! preconditions to order conclusions, and cross-validates everything by
//! seeded Monte Carlo.
//!
//! Verdicts are always "holds on this grid at this tolerance" — honest desk
//! certification, not proof. With the `parallel` feature (default) grid
//! sweeps and sampling run on the rayon pool; outputs are bit-identical to
//! the sequential fallback.

// Patterns like `!(t > 0.0)` are deliberate: they reject NaN along with the
// out-of-domain values, which `t <= 0.0` would wave through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod checks;
pub mod error;
pub mod grid;
pub mod majorization;
pub mod oracle;
pub mod scale_model;
pub mod special;
pub mod theorems;
pub mod verdict;

pub use baseline::{
    condition_functions, parse_baseline, Baseline, BaselineRef, ConditionFunctions,
    GeneralizedGamma,
};
pub use checks::{
    check_lr, check_monotone, check_rf_over_rg_increasing, check_rh, check_rh_ratio_increasing,
    check_st, lr_from_rh, verify_conditions,
};
pub use error::Error;
pub use grid::{Grid, Spacing};
pub use majorization::{
    is_majorized_by, is_weakly_supermajorized_by, schur_convexity_probe, MajorizationRelation,
    ProbeOutcome,
};
pub use oracle::{ks_distance, mc_check_st, quantile, sample_max, sample_max_sequential, SampleBatch};
pub use scale_model::{Component, OutlierModel, ScaleModel, TwoBaselineModel};
pub use theorems::{
    applicable_theorems, falsify, FalsifyConfig, FalsifyReport, RuleConclusion, RuleId,
    TheoremApplication, TheoremScan,
};
pub use verdict::{
    ConditionReport, Direction, LrVerdict, MonotoneVerdict, OrderDiagnostics, OrderVerdict,
    Outcome, StochasticOrder, Witness, DEFAULT_TOLERANCE,
};
