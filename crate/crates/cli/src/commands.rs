//! The five subcommands. Each builds its inputs (command line first, config
//! file as fallback), runs the library, prints one JSON document to stdout,
//! and returns the exit code.

use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;

use scalemax::{
    applicable_theorems, check_lr, check_rh, check_st, condition_functions, ks_distance,
    mc_check_st, parse_baseline, sample_max, verify_conditions as core_verify_conditions,
    BaselineRef, ConditionReport, FalsifyConfig, Grid, LrVerdict, MajorizationRelation,
    MonotoneVerdict, OrderVerdict, Outcome, OutlierModel, RuleId, ScaleModel, TheoremApplication,
    TwoBaselineModel,
};

use crate::config::ConfigFile;
use crate::{
    parse_f64_list, parse_outlier_spec, parse_pair, parse_usize_pair, resolve_output_path,
    CliError, CompareArgs, FalsifyArgs, MajorizeArgs, SimulateArgs, VerifyConditionsArgs,
};

fn emit<T: Serialize>(report: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::usage(format!("report serialization failed: {e}")))?;
    println!("{text}");
    Ok(())
}

fn require<T>(slot: Option<T>, flag: &str) -> Result<T, CliError> {
    slot.ok_or_else(|| CliError::usage(format!("missing required flag --{flag}")))
}

fn write_csv(path: &PathBuf, header: &str, lines: &[String]) -> Result<(), CliError> {
    let mut file = std::fs::File::create(path)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", path.display())))?;
    writeln!(file, "{header}").and_then(|_| {
        for line in lines {
            writeln!(file, "{line}")?;
        }
        Ok(())
    })
    .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CompareReport {
    command: &'static str,
    baseline: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline2: Option<String>,
    lambda: Vec<f64>,
    theta: Vec<f64>,
    model_x: String,
    model_y: String,
    orders_requested: Vec<String>,
    grid: Grid,
    tolerance: f64,
    majorization: MajorizationRelation,
    #[serde(skip_serializing_if = "Option::is_none")]
    conditions: Option<ConditionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    conditions_secondary: Option<ConditionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rf_over_rg: Option<MonotoneVerdict>,
    applicable_rules: Vec<TheoremApplication>,
    #[serde(skip_serializing_if = "Option::is_none")]
    st: Option<OrderVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rh: Option<OrderVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lr: Option<LrVerdict>,
    exit_code: u8,
}

pub fn compare(
    mut args: CompareArgs,
    config: &ConfigFile,
    grid_override: Option<Grid>,
    tol: f64,
) -> Result<u8, CliError> {
    config.fill(&mut args.baseline, "baseline", |s| {
        Ok::<_, String>(s.to_string())
    })?;
    config.fill(&mut args.baseline2, "baseline2", |s| {
        Ok::<_, String>(s.to_string())
    })?;
    config.fill(&mut args.lambda, "lambda", |s| Ok::<_, String>(s.to_string()))?;
    config.fill(&mut args.theta, "theta", |s| Ok::<_, String>(s.to_string()))?;
    config.fill(&mut args.outlier, "outlier", |s| {
        Ok::<_, String>(s.to_string())
    })?;
    config.fill(&mut args.lambda1_star, "lambda1-star", |s| s.parse::<f64>())?;
    config.fill(&mut args.order, "order", |s| Ok::<_, String>(s.to_string()))?;

    let baseline_spec = require(args.baseline, "baseline")?;
    let baseline = parse_baseline(&baseline_spec)?;

    let (model_x, model_y) = if let Some(outlier_spec) = &args.outlier {
        let spec = parse_outlier_spec(outlier_spec).map_err(CliError::usage)?;
        let lambda1_star = require(args.lambda1_star, "lambda1-star")?;
        match &args.baseline2 {
            Some(second) => {
                let baseline_g = parse_baseline(second)?;
                let x = TwoBaselineModel::new(
                    baseline.clone(),
                    baseline_g.clone(),
                    spec.lambda1,
                    spec.p,
                    spec.lambda,
                    spec.q,
                )?
                .expand();
                let y = TwoBaselineModel::new(
                    baseline.clone(),
                    baseline_g,
                    lambda1_star,
                    spec.p,
                    spec.lambda,
                    spec.q,
                )?
                .expand();
                (x, y)
            }
            None => {
                let x = OutlierModel::new(
                    baseline.clone(),
                    spec.lambda1,
                    spec.p,
                    spec.lambda,
                    spec.q,
                )?
                .expand();
                let y = OutlierModel::new(
                    baseline.clone(),
                    lambda1_star,
                    spec.p,
                    spec.lambda,
                    spec.q,
                )?
                .expand();
                (x, y)
            }
        }
    } else {
        if args.baseline2.is_some() {
            return Err(CliError::usage(
                "--baseline2 needs the --outlier form (the second baseline applies to the common-scale block)",
            ));
        }
        let lambda = parse_f64_list(&require(args.lambda, "lambda")?).map_err(CliError::usage)?;
        let theta = parse_f64_list(&require(args.theta, "theta")?).map_err(CliError::usage)?;
        if lambda.len() != theta.len() {
            return Err(CliError::usage(format!(
                "--lambda has {} entries but --theta has {}",
                lambda.len(),
                theta.len()
            )));
        }
        (
            ScaleModel::new(baseline.clone(), &lambda)?,
            ScaleModel::new(baseline, &theta)?,
        )
    };

    let orders_requested: Vec<String> = match args.order.as_deref().unwrap_or("all") {
        "all" => vec!["st".into(), "rh".into(), "lr".into()],
        other => {
            let mut orders = Vec::new();
            for piece in other.split(',') {
                match piece.trim() {
                    "st" | "rh" | "lr" => orders.push(piece.trim().to_string()),
                    bad => {
                        return Err(CliError::usage(format!(
                            "--order accepts st, rh, lr, or all; got `{bad}`"
                        )))
                    }
                }
            }
            orders
        }
    };

    let all_lambdas: Vec<f64> = model_x
        .lambdas()
        .into_iter()
        .chain(model_y.lambdas())
        .collect();
    let grid = match grid_override {
        Some(g) => g,
        None => Grid::default_for_lambdas(&all_lambdas)?,
    };

    // The rule engine runs first: a contradiction aborts with exit 3.
    let scan = applicable_theorems(&model_x, &model_y, &grid, tol)?;

    let st = orders_requested
        .iter()
        .any(|o| o == "st")
        .then(|| check_st(&model_x, &model_y, &grid, tol));
    let rh = orders_requested
        .iter()
        .any(|o| o == "rh")
        .then(|| check_rh(&model_x, &model_y, &grid, tol));
    let lr = orders_requested
        .iter()
        .any(|o| o == "lr")
        .then(|| check_lr(&model_x, &model_y, &grid, tol));

    if let Some(path) = args.dump_grid {
        let path = resolve_output_path(path);
        let ts = grid.values();
        let mut lines = Vec::with_capacity(ts.len());
        for &t in &ts {
            lines.push(format!(
                "{t},{},{},{},{},{},{}",
                model_x.max_cdf(t)?,
                model_y.max_cdf(t)?,
                model_x.max_reverse_hazard(t)?,
                model_y.max_reverse_hazard(t)?,
                model_x.max_pdf(t)?,
                model_y.max_pdf(t)?,
            ));
        }
        write_csv(&path, "t,cdf_x,cdf_y,rh_x,rh_y,pdf_x,pdf_y", &lines)?;
    }

    let mut outcomes: Vec<Outcome> = Vec::new();
    if let Some(v) = &st {
        outcomes.push(v.outcome);
    }
    if let Some(v) = &rh {
        outcomes.push(v.outcome);
    }
    if let Some(v) = &lr {
        outcomes.push(v.overall.outcome);
    }
    let exit_code = if outcomes.contains(&Outcome::Fails) {
        1
    } else if outcomes.iter().all(|o| *o == Outcome::Holds) {
        0
    } else {
        2
    };

    let report = CompareReport {
        command: "compare",
        baseline: baseline_spec,
        baseline2: args.baseline2,
        lambda: model_x.lambdas(),
        theta: model_y.lambdas(),
        model_x: model_x.describe(),
        model_y: model_y.describe(),
        orders_requested,
        grid,
        tolerance: tol,
        majorization: scan.majorization,
        conditions: scan.conditions,
        conditions_secondary: scan.conditions_secondary,
        rf_over_rg: scan.rf_over_rg,
        applicable_rules: scan.applications,
        st,
        rh,
        lr,
        exit_code,
    };
    emit(&report)?;
    Ok(exit_code)
}

// ---------------------------------------------------------------------------
// verify-conditions
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct VerifyConditionsReport {
    command: &'static str,
    baseline: String,
    grid: Grid,
    tolerance: f64,
    report: ConditionReport,
    all_hold: bool,
}

pub fn verify_conditions(
    mut args: VerifyConditionsArgs,
    config: &ConfigFile,
    grid_override: Option<Grid>,
    tol: f64,
) -> Result<u8, CliError> {
    config.fill(&mut args.baseline, "baseline", |s| {
        Ok::<_, String>(s.to_string())
    })?;
    let baseline_spec = require(args.baseline, "baseline")?;
    let baseline: BaselineRef = parse_baseline(&baseline_spec)?;
    let grid = grid_override.unwrap_or_else(Grid::default_unit);

    let report = core_verify_conditions(baseline.as_ref(), &grid, tol);

    if let Some(path) = args.dump_grid {
        let path = resolve_output_path(path);
        let cf = condition_functions(baseline.as_ref());
        let ts = grid.values();
        let mut lines = Vec::with_capacity(ts.len());
        for &t in &ts {
            lines.push(format!("{t},{},{},{}", cf.psi(t)?, cf.eta(t)?, cf.chi(t)?));
        }
        write_csv(&path, "t,psi,eta,chi", &lines)?;
    }

    let all_hold = report.all_hold();
    emit(&VerifyConditionsReport {
        command: "verify-conditions",
        baseline: baseline_spec,
        grid,
        tolerance: tol,
        report,
        all_hold,
    })?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// majorize
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct MajorizeReport {
    command: &'static str,
    x: Vec<f64>,
    y: Vec<f64>,
    majorized: bool,
    weakly_supermajorized: bool,
    relation: MajorizationRelation,
    notes: [&'static str; 2],
}

pub fn majorize(mut args: MajorizeArgs, config: &ConfigFile) -> Result<u8, CliError> {
    config.fill(&mut args.x, "x", |s| Ok::<_, String>(s.to_string()))?;
    config.fill(&mut args.y, "y", |s| Ok::<_, String>(s.to_string()))?;
    let x = parse_f64_list(&require(args.x, "x")?).map_err(CliError::usage)?;
    let y = parse_f64_list(&require(args.y, "y")?).map_err(CliError::usage)?;
    let relation = MajorizationRelation::compare(&x, &y)?;
    emit(&MajorizeReport {
        command: "majorize",
        x,
        y,
        majorized: relation.majorized,
        weakly_supermajorized: relation.weakly_supermajorized,
        relation,
        notes: [
            "majorized means x is majorized by y: every prefix sum of x's increasing \
             arrangement dominates y's and the totals agree (y is the more dispersed vector)",
            "weakly_supermajorized means x is weakly supermajorized by y: the prefix-sum \
             dominance holds without the equal-total constraint",
        ],
    })?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SimulateReport {
    command: &'static str,
    baseline: String,
    lambda: Vec<f64>,
    model: String,
    n: usize,
    seed: u64,
    /// Sup distance between the empirical CDF and the analytic system CDF.
    ks_distance: f64,
    /// Empirical usual-stochastic-order self-check against the analytic
    /// model (identical models; violation must sit inside the noise band).
    self_check_within_band: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<String>,
}

pub fn simulate(mut args: SimulateArgs, config: &ConfigFile) -> Result<u8, CliError> {
    config.fill(&mut args.baseline, "baseline", |s| {
        Ok::<_, String>(s.to_string())
    })?;
    config.fill(&mut args.lambda, "lambda", |s| Ok::<_, String>(s.to_string()))?;
    config.fill(&mut args.n, "n", |s| s.parse::<usize>())?;
    config.fill(&mut args.seed, "seed", |s| s.parse::<u64>())?;

    let baseline_spec = require(args.baseline, "baseline")?;
    let lambda = parse_f64_list(&require(args.lambda, "lambda")?).map_err(CliError::usage)?;
    let n = args.n.unwrap_or(10_000);
    if n == 0 {
        return Err(CliError::usage("--n must be at least 1"));
    }
    let seed = args.seed.unwrap_or(0);

    let baseline = parse_baseline(&baseline_spec)?;
    let model = ScaleModel::new(baseline, &lambda)?;
    let batch = sample_max(&model, n, seed);
    let ks = ks_distance(&batch.values, |t| model.max_cdf(t))?;
    let self_check = mc_check_st(&model, &model, n, seed)?;

    let csv = match args.csv {
        Some(path) => {
            let path = resolve_output_path(path);
            let lines: Vec<String> = batch.values.iter().map(|v| format!("{v}")).collect();
            write_csv(
                &path,
                &format!("# model={} seed={} n={}", batch.model, seed, n),
                &lines,
            )?;
            Some(path.display().to_string())
        }
        None => None,
    };

    emit(&SimulateReport {
        command: "simulate",
        baseline: baseline_spec,
        lambda: model.lambdas(),
        model: batch.model.clone(),
        n,
        seed,
        ks_distance: ks,
        self_check_within_band: !self_check.violation_beyond_band,
        csv,
    })?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// falsify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct FalsifyCliReport {
    command: &'static str,
    #[serde(flatten)]
    report: scalemax::FalsifyReport,
    exit_code: u8,
}

pub fn falsify(mut args: FalsifyArgs, config: &ConfigFile, tol: f64) -> Result<u8, CliError> {
    config.fill(&mut args.theorem, "theorem", |s| {
        Ok::<_, String>(s.to_string())
    })?;
    config.fill(&mut args.trials, "trials", |s| s.parse::<u32>())?;
    config.fill(&mut args.seed, "seed", |s| s.parse::<u64>())?;
    config.fill(&mut args.drop, "drop", |s| Ok::<_, String>(s.to_string()))?;
    config.fill(&mut args.grid_points, "grid-points", |s| s.parse::<usize>())?;
    config.fill(&mut args.beta_range, "beta-range", |s| {
        Ok::<_, String>(s.to_string())
    })?;
    config.fill(&mut args.alpha_range, "alpha-range", |s| {
        Ok::<_, String>(s.to_string())
    })?;
    config.fill(&mut args.lambda_range, "lambda-range", |s| {
        Ok::<_, String>(s.to_string())
    })?;
    config.fill(&mut args.n_range, "n-range", |s| Ok::<_, String>(s.to_string()))?;
    config.fill(&mut args.pq_max, "pq-max", |s| s.parse::<usize>())?;

    let theorem = require(args.theorem, "theorem")?;
    let rule = RuleId::parse(&theorem).ok_or_else(|| {
        CliError::usage(format!(
            "unknown rule `{theorem}`; known rules: {}",
            RuleId::all()
                .iter()
                .map(|r| r.id())
                .collect::<Vec<_>>()
                .join(", ")
        ))
    })?;
    let trials = args.trials.unwrap_or(100);
    if trials == 0 {
        return Err(CliError::usage("--trials must be at least 1"));
    }
    let seed = args.seed.unwrap_or(0);

    let mut cfg = FalsifyConfig::new(rule, trials, seed);
    cfg.tolerance = tol;
    if let Some(points) = args.grid_points {
        if points < 2 {
            return Err(CliError::usage("--grid-points must be at least 2"));
        }
        cfg.grid_points = points;
    }
    if let Some(s) = args.beta_range {
        cfg.beta_range = parse_pair(&s).map_err(CliError::usage)?;
    }
    if let Some(s) = args.alpha_range {
        cfg.alpha_range = parse_pair(&s).map_err(CliError::usage)?;
    }
    if let Some(s) = args.lambda_range {
        cfg.lambda_range = parse_pair(&s).map_err(CliError::usage)?;
    }
    if let Some(s) = args.n_range {
        cfg.n_range = parse_usize_pair(&s).map_err(CliError::usage)?;
    }
    if let Some(pq) = args.pq_max {
        cfg.pq_max = pq.max(1);
    }
    match args.drop.as_deref() {
        None => {}
        Some("min-scale") => cfg.drop_min_scale = true,
        Some(other) => {
            return Err(CliError::usage(format!(
                "unknown hypothesis `{other}`; supported: min-scale"
            )))
        }
    }

    let report = scalemax::falsify(&cfg);
    let exit_code = if report.counterexample.is_some() { 1 } else { 0 };
    emit(&FalsifyCliReport {
        command: "falsify",
        report,
        exit_code,
    })?;
    Ok(exit_code)
}
