//! Acceptance criteria 1–12.

use std::fmt;
use std::time::Instant;

use simapprox::approx::{dyadic_grid, global_modulus_profile, near_best};
use simapprox::conformal::ExteriorMap;
use simapprox::constructions::{
    theorem1, theorem2d, theorem3, walsh_correct, Compact, Mode, PipelineOptions, PipelineResult,
    Problem,
};
use simapprox::fekete::{fekete_points, log_energy, spacing_diagnostic};
use simapprox::fit::semilog_fit;
use simapprox::functions::FunctionSpec;
use simapprox::geometry::Continuum;
use simapprox::kernels::{damping, kernel_diagnostic, KernelBuilder, KernelSpec};
use simapprox::polynomial::{Frame, NodeSet};
use simapprox::Complex64;

use crate::config::{parse_domain, ExperimentConfig, Theorem};
use crate::error::{HarnessError, Result};
use crate::nodes::NodeSource;
use crate::report::{ApproxReport, Status};
use crate::run::run;

pub const CRITERIA: [(u8, &str); 12] = [
    (1, "interpolation exactness"),
    (2, "ratio stability"),
    (3, "Walsh bound"),
    (4, "kernel decay"),
    (5, "interior damping"),
    (6, "interior superconvergence"),
    (7, "rho closed forms"),
    (8, "rho properties"),
    (9, "Fekete recovery"),
    (10, "Theorem 3 stability"),
    (11, "modulus property"),
    (12, "max-modulus sanity"),
];

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub summary: String,
    pub seconds: f64,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {}: {} [{:.1} s]",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.summary,
            self.seconds
        )
    }
}

struct RunRecord {
    label: String,
    boundary_sup: f64,
    interior_max: f64,
}

impl RunRecord {
    fn ok(&self) -> bool {
        self.interior_max <= self.boundary_sup + 1e-12
    }
}

/// Runs criteria and keeps every pipeline result for the max-modulus check.
#[derive(Default)]
pub struct Verifier {
    runs: Vec<RunRecord>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn fail(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl Verifier {
    pub fn new() -> Self {
        Verifier::default()
    }

    pub fn all(&mut self) -> Vec<Outcome> {
        CRITERIA.iter().map(|(id, _)| self.criterion(*id)).collect()
    }

    pub fn criterion(&mut self, id: u8) -> Outcome {
        let title = CRITERIA
            .iter()
            .find(|(i, _)| *i == id)
            .map(|(_, t)| *t)
            .unwrap_or("unknown");
        let start = Instant::now();
        let res = match id {
            1 => self.interpolation(),
            2 => self.ratio_stability(),
            3 => self.walsh(),
            4 => self.kernel_decay(),
            5 => self.damping(),
            6 => self.superconvergence(),
            7 => self.rho_closed_forms(),
            8 => self.rho_properties(),
            9 => self.fekete(),
            10 => self.theorem3_stability(),
            11 => self.modulus(),
            12 => self.max_modulus(),
            _ => Err(fail(format!("no criterion {id}"))),
        };
        let (passed, summary) = match res {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        Outcome {
            id,
            title,
            passed,
            summary,
            seconds: start.elapsed().as_secs_f64(),
        }
    }

    fn record(&mut self, label: &str, r: &PipelineResult) {
        self.runs.push(RunRecord {
            label: label.into(),
            boundary_sup: r.boundary_sup,
            interior_max: r.interior.iter().map(|i| i.error).fold(0.0, f64::max),
        });
    }

    fn record_report(&mut self, label: &str, rep: &ApproxReport) {
        for d in &rep.degrees {
            self.runs.push(RunRecord {
                label: format!("{label} n={}", d.n),
                boundary_sup: d.boundary_sup,
                interior_max: d.interior.iter().map(|i| i.error).fold(0.0, f64::max),
            });
        }
    }

    fn report(&mut self, label: &str, cfg: &ExperimentConfig) -> Result<ApproxReport> {
        let rep = run(cfg);
        if rep.status == Status::Failed {
            return Err(fail(format!("{label}: {}", rep.errors.join(": "))));
        }
        self.record_report(label, &rep);
        Ok(rep)
    }

    fn interpolation(&mut self) -> Result<(bool, String)> {
        let opts = PipelineOptions::default();
        let mut worst: f64 = 0.0;
        let mut count = 0;
        let cases: [(&str, &str, &str, Option<Compact>); 5] = [
            (
                "disk",
                "branch(0.5,1)",
                "roots:16",
                Some(Compact::new(c(0.0, 0.0), 0.5)),
            ),
            (
                "ellipse(0,0,2,1)",
                "branch(0.5,2)",
                "uniform:12",
                Some(Compact::new(c(0.0, 0.0), 0.5)),
            ),
            ("segment", "branch(0.5,1)", "uniform:8", None),
            (
                "square",
                "branch(0.5,0.5)",
                "fekete:16",
                Some(Compact::new(c(0.0, 0.0), 0.2)),
            ),
            (
                "lshape",
                "logfac(2)",
                "uniform:8",
                Some(Compact::new(c(0.5, 0.5), 0.25)),
            ),
        ];
        for (dom, func, src, compact) in cases {
            let e = parse_domain(dom)?;
            let f = FunctionSpec::parse(func)?.build(&e)?;
            let mut pts = NodeSource::parse(src)?.resolve(&e, 0, 1, 0)?;
            if let Some(k) = compact {
                pts.push(k.center + k.radius * 1.5);
            }
            let big_n = pts.len();
            let n = 2 * big_n + 8;
            let problem = Problem::new(e, f, 1, 0, compact.into_iter().collect(), n, opts)?;
            let r = theorem1(&problem, &NodeSet::new(pts, 0)?, n, Mode::Fast)?;
            self.record(&format!("theorem 1 on {dom}"), &r);
            worst = worst.max(r.max_relative_residual);
            count += 1;
        }
        let disk = Continuum::unit_disk();
        let half = vec![Compact::new(c(0.0, 0.0), 0.5)];
        for (r, pts) in [
            (1usize, vec![c(1.0, 0.0), c(-1.0, 0.0)]),
            (2, vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]),
        ] {
            let f = FunctionSpec::parse("branch(2.5,1)")?.build(&disk)?;
            let n = 2 * pts.len() * (r + 1) + 8;
            let problem = Problem::new(disk.clone(), f, 1, r, half.clone(), n, opts)?;
            let res = theorem2d(&problem, &NodeSet::new(pts, r)?, n)?;
            self.record(&format!("theorem 2d r={r}"), &res);
            worst = worst.max(res.max_relative_residual);
            count += 1;
        }
        for (dom, func, src, compact) in [
            (
                "disk",
                "branch(0.5,1)",
                "roots:16",
                Compact::new(c(0.0, 0.0), 0.5),
            ),
            (
                "square",
                "branch(0.5,0.5)",
                "fekete:16",
                Compact::new(c(0.0, 0.0), 0.2),
            ),
        ] {
            let e = parse_domain(dom)?;
            let f = FunctionSpec::parse(func)?.build(&e)?;
            let pts = NodeSource::parse(src)?.resolve(&e, 0, 1, 0)?;
            let problem = Problem::new(e, f, 1, 0, vec![compact], 21, opts)?;
            let res = theorem3(&problem, &NodeSet::new(pts, 0)?, 0.25)?;
            self.record(&format!("theorem 3 on {dom}"), &res);
            worst = worst.max(res.max_relative_residual);
            count += 1;
        }
        Ok((
            worst <= 1e-9,
            format!("max relative node residual {worst:.2e} over {count} runs (<= 1e-9)"),
        ))
    }

    fn ratio_stability(&mut self) -> Result<(bool, String)> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply("problem.function", "branch(0.5,1)")?;
        cfg.apply("nodes.source", "roots:4")?;
        cfg.apply("sweep.degrees", "16,32,64,128")?;
        cfg.apply("sweep.compacts", "disk:0,0,0.5")?;
        let rep = self.report("ratio sweep", &cfg)?;
        let ratios: Vec<String> = rep
            .degrees
            .iter()
            .map(|d| format!("{:.3}", d.max_ratio[0]))
            .collect();
        let drift = rep.fitted.ratio_drift.unwrap_or(f64::INFINITY);
        Ok((
            drift <= 3.0,
            format!(
                "max ratios [{}], drift {drift:.3} (<= 3)",
                ratios.join(", ")
            ),
        ))
    }

    fn walsh(&mut self) -> Result<(bool, String)> {
        let e = Continuum::unit_disk();
        let f = FunctionSpec::parse("pole(2)")?.build(&e)?;
        let nodes = NodeSet::new(NodeSource::Random(5).resolve(&e, 0, 7, 0)?, 0)?;
        let pstar = near_best(&f, &e, 20, 1024, 1e-3)?.polynomial;
        let p = walsh_correct(&pstar, &f, &nodes)?;
        let residual = nodes
            .nodes()
            .iter()
            .map(|z| (p.eval(*z) - f.eval(*z)).norm())
            .fold(0.0, f64::max);
        let err = e
            .boundary_samples(4096)?
            .iter()
            .map(|b| (f.eval(b.location) - p.eval(b.location)).norm())
            .fold(0.0, f64::max);
        // E_n(1/(z − a), unit disk) = 1/(a^n (a² − 1))
        let e20 = 1.0 / (2f64.powi(20) * 3.0);
        let ratio = err / e20;
        Ok((
            ratio <= 10.0 && residual <= 1e-10,
            format!("||f - p_20|| / E_20 = {ratio:.3} (<= 10), node residual {residual:.1e}"),
        ))
    }

    fn kernel_decay(&mut self) -> Result<(bool, String)> {
        let mut ok = true;
        let mut parts = Vec::new();
        for (name, e, params) in [
            ("disk", Continuum::unit_disk(), vec![0.0]),
            ("segment", Continuum::unit_segment(), vec![0.0, 0.125]),
        ] {
            let map = ExteriorMap::build(&e)?;
            let b = KernelBuilder::new(&map);
            for k in [2usize, 3] {
                let spec = KernelSpec::for_budget(256, k)?;
                for t in &params {
                    let bp = e.boundary_point(*t);
                    let d = kernel_diagnostic(&b, &spec, &bp, 2048)?;
                    let pass = d.slope <= -(k as f64 + 1.0) + 0.5 && d.bound_constant <= 50.0;
                    ok &= pass;
                    parts.push(format!(
                        "{name}@{:.2} k={k}: slope {:.2}, bound {:.2}",
                        bp.location.re, d.slope, d.bound_constant
                    ));
                }
            }
        }
        Ok((ok, parts.join("; ")))
    }

    fn damping(&mut self) -> Result<(bool, String)> {
        let e = Continuum::unit_disk();
        let bp = e.boundary_point(0.0);
        let frame = Frame::for_continuum(&e);
        let k = Compact::new(c(0.0, 0.0), 0.5).samples(256);
        let boundary = e.boundary_samples(1024)?;
        let mut sup_e: f64 = 0.0;
        let (mut ns, mut sup_k) = (Vec::new(), Vec::new());
        for big_n in [4usize, 8, 16, 32, 64] {
            let u = damping(&e, &bp, big_n, frame)?;
            let p = u.polynomial();
            sup_e = sup_e.max(
                boundary
                    .iter()
                    .map(|b| p.eval(b.location).norm())
                    .fold(0.0, f64::max),
            );
            ns.push(big_n as f64);
            sup_k.push(k.iter().map(|z| p.eval(*z).norm()).fold(0.0, f64::max));
        }
        let slope = semilog_fit(&ns, &sup_k)
            .map(|l| l.slope)
            .unwrap_or(f64::NAN);
        Ok((
            sup_e <= 1.0 + 1e-9 && slope <= -0.25,
            format!(
                "||u||_E = {sup_e:.12} (<= 1 + 1e-9), log||u||_K / N slope {slope:.4} (<= -0.25)"
            ),
        ))
    }

    fn superconvergence(&mut self) -> Result<(bool, String)> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply("problem.function", "pole(2)")?;
        cfg.apply("nodes.source", "roots:3")?;
        cfg.apply("sweep.degrees", "8,16,24,32,40,48,56,64")?;
        cfg.apply("sweep.compacts", "disk:0,0,0.5")?;
        let rep = self.report("superconvergence (fast)", &cfg)?;
        let (b, i) = (rep.fitted.boundary_slope, rep.fitted.interior_slope);
        let ratio = match (b, i) {
            (Some(b), Some(i)) => i / b,
            _ => f64::NAN,
        };
        cfg.apply("sweep.mode", "constructive")?;
        cfg.apply("sweep.degrees", "16,24,32")?;
        let rep = self.report("superconvergence (constructive)", &cfg)?;
        let (c4, alpha) = (
            rep.fitted.c4.unwrap_or(f64::NAN),
            rep.fitted.alpha.unwrap_or(f64::NAN),
        );
        let fast_ok = ratio >= 1.5;
        let constructive_ok = c4.is_finite() && alpha >= 0.5;
        Ok((
            fast_ok && constructive_ok,
            format!(
                "fast: boundary slope {:.4}, interior slope {:.4}, ratio {ratio:.3} (>= 1.5); constructive: c4 {c4:.4}, alpha {alpha:.2} (>= 0.5)",
                b.unwrap_or(f64::NAN),
                i.unwrap_or(f64::NAN)
            ),
        ))
    }

    fn rho_closed_forms(&mut self) -> Result<(bool, String)> {
        let disk = ExteriorMap::build(&Continuum::unit_disk())?;
        let seg = ExteriorMap::build(&Continuum::unit_segment())?;
        let (mut e_disk, mut e_seg): (f64, f64) = (0.0, 0.0);
        for d in [1e-1, 1e-2, 1e-3] {
            for b in Continuum::unit_disk().boundary_samples(64)? {
                e_disk = e_disk.max((disk.rho_delta(b.location, d)? - d).abs());
            }
            let want = d * d / (2.0 * (1.0 + d));
            e_seg = e_seg.max((seg.rho_delta(c(1.0, 0.0), d)? - want).abs());
        }
        Ok((
            e_disk <= 1e-10 && e_seg <= 1e-8,
            format!(
                "disk error {e_disk:.1e} (<= 1e-10), segment endpoint error {e_seg:.1e} (<= 1e-8)"
            ),
        ))
    }

    fn rho_properties(&mut self) -> Result<(bool, String)> {
        let deltas: Vec<f64> = (1..=10).map(|k| 2f64.powi(-k)).collect();
        let mut ok = true;
        let mut parts = Vec::new();
        for (name, e) in [
            ("disk", Continuum::unit_disk()),
            ("segment", Continuum::unit_segment()),
            ("square", Continuum::square(c(0.0, 0.0), 1.0)?),
        ] {
            let map = ExteriorMap::build(&e)?;
            let doubling = map.rho_doubling_constant(&deltas, 64)?;
            let (lo, hi) = map.rho_neighbor_range(&deltas, 64)?;
            ok &= doubling <= 8.0 && lo >= 0.1 && hi <= 10.0;
            parts.push(format!(
                "{name}: doubling {doubling:.3}, neighbour range [{lo:.3}, {hi:.3}]"
            ));
        }
        Ok((ok, parts.join("; ")))
    }

    fn fekete(&mut self) -> Result<(bool, String)> {
        let seg = Continuum::unit_segment();
        let grid = 96;
        let s = fekete_points(&seg, 3, grid, 1)?;
        // brute force over a uniform grid with 97 points
        let m = 97;
        let g: Vec<Complex64> = (0..m)
            .map(|i| c(-1.0 + 2.0 * i as f64 / (m - 1) as f64, 0.0))
            .collect();
        let mut best = (f64::NEG_INFINITY, [0usize; 3]);
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    let en = log_energy(&[g[i], g[j], g[k]]);
                    if en > best.0 {
                        best = (en, [i, j, k]);
                    }
                }
            }
        }
        let mut pts: Vec<f64> = s.points.iter().map(|z| z.re).collect();
        pts.sort_by(|a, b| a.total_cmp(b));
        let oracle: Vec<f64> = best.1.iter().map(|i| g[*i].re).collect();
        let tol = 2.0 / grid as f64;
        let seg_err = pts
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let seg_ok = seg_err <= tol && s.energy >= best.0 - 1e-12;

        let disk = Continuum::unit_disk();
        let dmap = ExteriorMap::build(&disk)?;
        let circ = spacing_diagnostic(&dmap, &fekete_points(&disk, 5, 160, 1)?)?;
        let spread = circ.gaps.iter().cloned().fold(0.0, f64::max)
            - circ.gaps.iter().cloned().fold(f64::INFINITY, f64::min);

        let sq = Continuum::square(c(0.0, 0.0), 1.0)?;
        let smap = ExteriorMap::build(&sq)?;
        let sq_diag = spacing_diagnostic(&smap, &fekete_points(&sq, 16, 512, 1)?)?;
        Ok((
            seg_ok && spread <= 1e-4 && sq_diag.max_min_ratio <= 3.0,
            format!(
                "segment N=3 {:?} vs oracle {:?} (tol {tol:.3}); circle N=5 gap spread {spread:.1e} (<= 1e-4); square N=16 gap ratio {:.3} (<= 3)",
                pts.iter().map(|x| (x * 1e6).round() / 1e6).collect::<Vec<_>>(),
                oracle,
                sq_diag.max_min_ratio
            ),
        ))
    }

    fn theorem3_stability(&mut self) -> Result<(bool, String)> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply("problem.function", "branch(0.5,1)")?;
        cfg.apply("problem.theorem", "3")?;
        cfg.apply("problem.epsilon", "0.25")?;
        cfg.apply("nodes.source", "fekete")?;
        cfg.apply("sweep.degrees", "16,32,64")?;
        cfg.apply("sweep.compacts", "disk:0,0,0.5")?;
        let rep = self.report("theorem 3 sweep", &cfg)?;
        assert_eq!(cfg.theorem, Theorem::Three);
        let consts: Vec<String> = rep
            .degrees
            .iter()
            .filter_map(|d| d.theorem3.as_ref().map(|t| format!("{:.3}", t.constant)))
            .collect();
        let get = |name: &str| {
            rep.checks
                .iter()
                .find(|c| c.name == name)
                .map(|c| (c.passed, c.value))
        };
        let (drift_ok, drift) = get("constant_drift").unwrap_or((false, f64::NAN));
        let (deg_ok, _) = get("degree_excess").unwrap_or((false, f64::NAN));
        let degs: Vec<String> = rep
            .degrees
            .iter()
            .map(|d| format!("{}/{}", d.degree, d.node_count + d.node_count / 4 + 1))
            .collect();
        Ok((
            drift_ok && deg_ok,
            format!(
                "C = [{}], drift {drift:.3} (<= 2), degree/budget [{}]",
                consts.join(", "),
                degs.join(", ")
            ),
        ))
    }

    fn modulus(&mut self) -> Result<(bool, String)> {
        let e = Continuum::unit_disk();
        let deltas = dyadic_grid(&e, 10);
        let mut ok = true;
        let mut parts = Vec::new();
        let mut dini = f64::NAN;
        for id in ["branch(0.5,1)", "pole(2)"] {
            let f = FunctionSpec::parse(id)?.build(&e)?;
            let k = 1;
            let p = global_modulus_profile(&f, &e, k, &deltas, 64)?;
            let mut worst: f64 = 0.0;
            for (i, d) in p.deltas.iter().enumerate() {
                for t in [2.0, 4.0, 8.0] {
                    if let Some(j) = p.deltas.iter().position(|x| (x / d - t).abs() < 1e-9) {
                        worst = worst.max(p.omegas[j] / (t.powi(k as i32) * p.omegas[i]));
                    }
                }
            }
            ok &= worst <= 16.0;
            parts.push(format!(
                "{id}: max omega(t d)/(t^k omega(d)) {worst:.3} (<= 16)"
            ));
            if id.starts_with("branch") {
                dini = p.dini_constant.unwrap_or(f64::NAN);
            }
        }
        ok &= (dini - 2.0).abs() <= 0.2;
        parts.push(format!("Dini constant {dini:.3} (2 +- 10%)"));
        Ok((ok, parts.join("; ")))
    }

    fn max_modulus(&mut self) -> Result<(bool, String)> {
        if self.runs.is_empty() {
            self.interpolation()?;
        }
        let bad: Vec<&str> = self
            .runs
            .iter()
            .filter(|r| !r.ok())
            .map(|r| r.label.as_str())
            .collect();
        let with_compacts = self.runs.iter().filter(|r| r.interior_max > 0.0).count();
        Ok((
            bad.is_empty(),
            format!(
                "{} pipeline runs ({} with compacts), violations: {}",
                self.runs.len(),
                with_compacts,
                if bad.is_empty() {
                    "none".to_string()
                } else {
                    bad.join(", ")
                }
            ),
        ))
    }
}
