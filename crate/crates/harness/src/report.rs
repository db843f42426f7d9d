//! Experiment reports.

use serde::{Deserialize, Serialize};
use simapprox::constructions::{InteriorRow, NodeResidual, PipelineResult, RatioRow};

use crate::config::ExperimentConfig;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Theorem3Summary {
    pub m: usize,
    pub power: usize,
    pub l: usize,
    pub mu: usize,
    /// `‖f − t_N‖_L`.
    pub t_error: f64,
    /// `‖f − p‖_L / ‖f − t_N‖_L`.
    pub constant: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DegreeEntry {
    pub n: usize,
    pub node_count: usize,
    pub degree: usize,
    pub boundary_sup: f64,
    /// Per derivative order.
    pub max_ratio: Vec<f64>,
    pub max_node_residual: f64,
    pub max_modulus_ok: bool,
    pub damped: bool,
    pub node_residuals: Vec<NodeResidual>,
    pub interior: Vec<InteriorRow>,
    /// Per derivative order.
    pub boundary: Vec<Vec<RatioRow>>,
    pub theorem3: Option<Theorem3Summary>,
}

impl DegreeEntry {
    pub fn from_result(r: &PipelineResult, node_count: usize) -> Self {
        DegreeEntry {
            n: r.n,
            node_count,
            degree: r.p.degree(),
            boundary_sup: r.boundary_sup,
            max_ratio: r.max_ratio.clone(),
            max_node_residual: r.max_relative_residual,
            max_modulus_ok: r.max_modulus_ok,
            damped: r.damped,
            node_residuals: r.node_residuals.clone(),
            interior: r.interior.clone(),
            boundary: r.boundary.clone(),
            theorem3: r.theorem3.as_ref().map(|t| Theorem3Summary {
                m: t.m,
                power: t.power,
                l: t.l,
                mu: t.mu,
                t_error: t.t_error,
                constant: r.boundary_sup / t.t_error,
            }),
        }
    }
}

/// Fitted stand-ins for the existential constants.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Fitted {
    /// `max_n max_z |f − p_n|/ω(ρ_{1/n}(z))`.
    pub c1: Option<f64>,
    /// `max/min` of the per-degree maximal ratio.
    pub ratio_drift: Option<f64>,
    /// Slope of `log ‖f − p_n‖_L` against `n`.
    pub boundary_slope: Option<f64>,
    /// Slope of `log ‖f − p_n‖_K` against `n` (first compact).
    pub interior_slope: Option<f64>,
    pub c3: Option<f64>,
    pub c4: Option<f64>,
    pub alpha: Option<f64>,
    pub decay_r2: Option<f64>,
    /// Dini constant of the modulus profile.
    pub c2: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            passed: value <= threshold,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApproxReport {
    pub schema: u32,
    pub version: String,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub timestamp: Option<u64>,
    pub config: ExperimentConfig,
    pub status: Status,
    pub errors: Vec<String>,
    pub degrees: Vec<DegreeEntry>,
    pub fitted: Fitted,
    pub checks: Vec<Check>,
}

impl ApproxReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        ApproxReport {
            schema: SCHEMA,
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: None,
            config: config.clone(),
            status: Status::Ok,
            errors: Vec::new(),
            degrees: Vec::new(),
            fitted: Fitted::default(),
            checks: Vec::new(),
        }
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// 0 = all checks pass, 2 = a numerical check failed, 1 = execution error.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Failed => 1,
            Status::Ok if self.all_checks_pass() => 0,
            Status::Ok => 2,
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// Whether every float in the serialized report is finite.
    pub fn all_finite(&self) -> bool {
        fn walk(v: &serde_json::Value) -> bool {
            match v {
                serde_json::Value::Null => false,
                serde_json::Value::Array(a) => a.iter().all(walk),
                serde_json::Value::Object(o) => o
                    .iter()
                    .all(|(k, v)| walk(v) || (v.is_null() && OPTIONAL.contains(&k.as_str()))),
                _ => true,
            }
        }
        const OPTIONAL: &[&str] = &[
            "timestamp",
            "theorem3",
            "c1",
            "ratio_drift",
            "boundary_slope",
            "interior_slope",
            "c3",
            "c4",
            "alpha",
            "decay_r2",
            "c2",
        ];
        serde_json::to_value(self)
            .map(|v| walk(&v))
            .unwrap_or(false)
    }
}
