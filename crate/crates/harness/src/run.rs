//! Experiment execution.

use std::time::{SystemTime, UNIX_EPOCH};

use simapprox::constructions::{
    summarize, theorem1, theorem2d, theorem3, PipelineOptions, PipelineResult, Problem,
};
use simapprox::functions::FunctionSpec;
use simapprox::polynomial::NodeSet;

use crate::config::{parse_domain, ExperimentConfig, Theorem};
use crate::error::Result;
use crate::report::{ApproxReport, Check, DegreeEntry, Status};

/// Runs one experiment. Errors never escape: they end up in the report with
/// `status = failed`.
pub fn run(cfg: &ExperimentConfig) -> ApproxReport {
    let mut report = ApproxReport::new(cfg);
    report.timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs());
    if let Err(err) = execute(cfg, &mut report) {
        report.status = Status::Failed;
        let mut chain = vec![err.to_string()];
        let mut source = std::error::Error::source(&err);
        while let Some(s) = source {
            chain.push(s.to_string());
            source = s.source();
        }
        report.errors = chain;
    }
    report
}

fn execute(cfg: &ExperimentConfig, report: &mut ApproxReport) -> Result<()> {
    cfg.validate()?;
    let e = parse_domain(&cfg.domain)?;
    let f = FunctionSpec::parse(&cfg.function)?.build(&e)?;
    let opts = PipelineOptions {
        boundary_samples: cfg.boundary_samples,
        fit_samples: cfg.fit_samples,
        profile_centers: cfg.profile_centers,
        ..PipelineOptions::default()
    };
    let top = *cfg.degrees.last().expect("validated non-empty");
    let max_degree = match cfg.theorem {
        Theorem::Three => ((1.0 + cfg.epsilon) * top as f64).floor() as usize + 1,
        _ => top,
    };
    let r = if cfg.theorem == Theorem::TwoD {
        cfg.r
    } else {
        0
    };
    let problem = Problem::new(
        e.clone(),
        f,
        cfg.k,
        r,
        cfg.compacts.clone(),
        max_degree,
        opts,
    )?;
    let mut results: Vec<PipelineResult> = Vec::new();
    for &n in &cfg.degrees {
        let count = if cfg.theorem == Theorem::Three { n } else { 0 };
        let pts = cfg.nodes.resolve(&e, count, cfg.seed, cfg.fekete_grid)?;
        let nodes = NodeSet::new(pts, r)?;
        let res = match cfg.theorem {
            Theorem::One => theorem1(&problem, &nodes, n, cfg.mode)?,
            Theorem::TwoD => theorem2d(&problem, &nodes, n)?,
            Theorem::Three => theorem3(&problem, &nodes, cfg.epsilon)?,
        };
        report
            .degrees
            .push(DegreeEntry::from_result(&res, nodes.len()));
        results.push(res);
    }
    let sweep = summarize(results);
    let fit = &mut report.fitted;
    fit.c1 = report
        .degrees
        .iter()
        .map(|d| d.max_ratio[0])
        .reduce(f64::max);
    fit.c2 = problem.profile.dini_constant;
    if cfg.degrees.len() >= 2 {
        fit.ratio_drift = Some(sweep.ratio_drift);
        fit.boundary_slope = sweep.boundary_fit.map(|l| l.slope);
        fit.interior_slope = sweep.interior_fit.map(|l| l.slope);
        if let Some(d) = sweep.decay {
            fit.c3 = Some(d.c3);
            fit.c4 = Some(d.c4);
            fit.alpha = Some(d.alpha);
            fit.decay_r2 = Some(d.r2);
        }
    }

    let degrees = &report.degrees;
    let worst_residual = degrees
        .iter()
        .map(|d| d.max_node_residual)
        .fold(0.0, f64::max);
    report
        .checks
        .push(Check::at_most("node_residual", worst_residual, 1e-9));
    let mm_violations = degrees.iter().filter(|d| !d.max_modulus_ok).count();
    report.checks.push(Check::at_most(
        "max_modulus_violations",
        mm_violations as f64,
        0.0,
    ));
    let excess = degrees
        .iter()
        .map(|d| {
            let budget = match cfg.theorem {
                Theorem::Three => ((1.0 + cfg.epsilon) * d.node_count as f64).floor() + 1.0,
                _ => d.n as f64,
            };
            d.degree as f64 - budget
        })
        .fold(f64::NEG_INFINITY, f64::max);
    report
        .checks
        .push(Check::at_most("degree_excess", excess, 0.0));
    if degrees.len() >= 2 {
        match cfg.theorem {
            Theorem::One | Theorem::TwoD => {
                report
                    .checks
                    .push(Check::at_most("ratio_drift", sweep.ratio_drift, 3.0));
            }
            Theorem::Three => {
                let c: Vec<f64> = degrees
                    .iter()
                    .filter_map(|d| d.theorem3.as_ref().map(|t| t.constant))
                    .collect();
                let drift = c
                    .windows(2)
                    .map(|w| (w[1] / w[0]).max(w[0] / w[1]))
                    .fold(1.0, f64::max);
                report
                    .checks
                    .push(Check::at_most("constant_drift", drift, 2.0));
            }
        }
    }
    if cfg.theorem == Theorem::Three {
        let mu = degrees
            .iter()
            .filter_map(|d| d.theorem3.as_ref().map(|t| t.mu))
            .max()
            .unwrap_or(0);
        report
            .checks
            .push(Check::at_most("near_group", mu as f64, 8.0 / cfg.epsilon));
    }
    if !report.all_finite() {
        report
            .errors
            .push("report contains non-finite values".into());
        report.checks.push(Check::at_most("non_finite", 1.0, 0.0));
    }
    Ok(())
}
