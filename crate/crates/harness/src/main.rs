use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use simapprox::approx::near_best;
use simapprox::conformal::ExteriorMap;
use simapprox::fekete::{equilibrium_diagnostic, fekete_points, spacing_diagnostic};
use simapprox::functions::FunctionSpec;
use simapprox::kernels::{kernel_diagnostic, KernelBuilder, KernelSpec};
use simapprox_harness::config::{parse_domain, ExperimentConfig};
use simapprox_harness::output::{num, write_outputs, Csv};
use simapprox_harness::report::ApproxReport;
use simapprox_harness::run::run;
use simapprox_harness::verify::{Verifier, CRITERIA};
use simapprox_harness::{HarnessError, Result};

/// Simultaneous approximation and interpolation on planar continua.
#[derive(Parser)]
#[command(name = "simapprox", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exterior map summary (JSON on stdout) and level-curve CSV.
    Map {
        #[arg(long, default_value = "disk")]
        domain: String,
        /// Comma-separated level-curve distances.
        #[arg(long, default_value = "0.01,0.1,0.5")]
        deltas: String,
        #[arg(long, default_value_t = 256)]
        points: usize,
        /// Level-curve CSV path; stdout if absent.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Near-best polynomial of a given degree.
    Approx {
        #[arg(long, default_value = "disk")]
        domain: String,
        #[arg(long, default_value = "branch(0.5,1)")]
        function: String,
        #[arg(long, default_value_t = 16)]
        degree: usize,
        #[arg(long, default_value_t = 1024)]
        samples: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Approximate Fekete points and spacing diagnostics.
    Fekete {
        #[arg(long, default_value = "disk")]
        domain: String,
        #[arg(long, default_value_t = 16)]
        count: usize,
        /// Candidate grid size; 32·count if absent.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Directory for nodes.json and spacing.csv; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Degree sweep for one of the constructions.
    Sweep(Box<SweepArgs>),
    /// Acceptance criteria 1–12.
    Verify {
        /// Criterion ids; all if absent.
        #[arg(long = "criterion", short = 'c')]
        criteria: Vec<u8>,
        /// Directory for the kernel diagnostic CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summary of a saved report.
    Report { path: PathBuf },
}

#[derive(Args)]
struct SweepArgs {
    /// Configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `section.key=value` override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    theorem: Option<String>,
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    /// roots:N, uniform:N, random:N, fekete[:N], points:x,y;… or file:path.
    #[arg(long)]
    nodes: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Comma-separated ascending list.
    #[arg(long)]
    degrees: Option<String>,
    #[arg(long)]
    constructive: bool,
    /// `disk:cx,cy,r`, repeatable.
    #[arg(long = "compact")]
    compacts: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SweepArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::parse_text(&read(p)?)?,
            None => ExperimentConfig::default(),
        };
        let mut pairs: Vec<(&str, String)> = Vec::new();
        let mut opt = |key: &'static str, v: Option<String>| {
            if let Some(v) = v {
                pairs.push((key, v));
            }
        };
        opt("problem.theorem", self.theorem.clone());
        opt("problem.domain", self.domain.clone());
        opt("problem.function", self.function.clone());
        opt("problem.k", self.k.map(|v| v.to_string()));
        opt("problem.r", self.r.map(|v| v.to_string()));
        opt("problem.epsilon", self.epsilon.map(|v| v.to_string()));
        opt("nodes.source", self.nodes.clone());
        opt("sweep.degrees", self.degrees.clone());
        opt(
            "sweep.mode",
            self.constructive.then(|| "constructive".to_string()),
        );
        opt(
            "sweep.compacts",
            (!self.compacts.is_empty()).then(|| self.compacts.join(";")),
        );
        opt("output.seed", self.seed.map(|v| v.to_string()));
        opt(
            "output.dir",
            self.out.as_ref().map(|p| p.display().to_string()),
        );
        for (k, v) in pairs {
            cfg.apply(k, &v)?;
        }
        for s in &self.set {
            let (k, v) = s.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("--set expects key=value, got '{s}'"))
            })?;
            cfg.apply(k.trim(), v)?;
        }
        Ok(cfg)
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn out(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn read(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).map_err(|e| HarnessError::Io(format!("{}: {e}", p.display())))
}

fn write(p: &Path, text: &str) -> Result<()> {
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(p, text).map_err(|e| HarnessError::Io(format!("{}: {e}", p.display())))
}

fn pairs(z: &[simapprox::Complex64]) -> Vec<[f64; 2]> {
    z.iter().map(|c| [c.re, c.im]).collect()
}

fn map(domain: &str, deltas: &str, points: usize, csv: Option<&Path>) -> Result<i32> {
    let e = parse_domain(domain)?;
    let map = ExteriorMap::build(&e)?;
    let deltas: Vec<f64> = deltas
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| HarnessError::Config(format!("bad delta '{t}'")))
        })
        .collect::<Result<_>>()?;
    let mut table = Csv::new(&["delta", "theta", "re", "im"]);
    for d in deltas {
        let curve = map.level_curve(d, points)?;
        for (t, z) in curve.thetas.iter().zip(&curve.points) {
            table.row(&[num(d), num(*t), num(z.re), num(z.im)]);
        }
    }
    let summary = map.summary();
    eprintln!("capacity {}", num(summary.capacity));
    out(&(serde_json::to_string_pretty(&summary)? + "\n"));
    match csv {
        Some(p) => write(p, &table.into_string())?,
        None => out(&table.into_string()),
    }
    Ok(0)
}

fn approx(domain: &str, function: &str, degree: usize, samples: usize, tol: f64) -> Result<i32> {
    let e = parse_domain(domain)?;
    let f = FunctionSpec::parse(function)?.build(&e)?;
    let nb = near_best(&f, &e, degree, samples, tol)?;
    let value = json!({
        "coefficients": pairs(nb.polynomial.coefficients()),
        "error": nb.error,
        "lower_bound": nb.lower_bound,
        "iterations": nb.iterations,
        "converged": nb.converged,
    });
    out(&(serde_json::to_string_pretty(&value)? + "\n"));
    Ok(0)
}

fn fekete(
    domain: &str,
    count: usize,
    grid: Option<usize>,
    seed: u64,
    dir: Option<&Path>,
) -> Result<i32> {
    let e = parse_domain(domain)?;
    let set = fekete_points(&e, count, grid.unwrap_or(32 * count), seed)?;
    let map = ExteriorMap::build(&e)?;
    let spacing = spacing_diagnostic(&map, &set)?;
    let equilibrium = equilibrium_diagnostic(&map, &set)?;
    let nodes = json!({
        "set": set,
        "max_min_gap_ratio": spacing.max_min_ratio,
        "scaled_min_gap": spacing.scaled_min,
        "scaled_max_gap": spacing.scaled_max,
        "equilibrium": equilibrium,
    });
    let mut csv = Csv::new(&["index", "theta", "gap"]);
    for (i, t) in spacing.thetas.iter().enumerate() {
        let gap = spacing.gaps.get(i).copied().unwrap_or(f64::NAN);
        csv.row(&[i.to_string(), num(*t), num(gap)]);
    }
    let text = serde_json::to_string_pretty(&nodes)?;
    match dir {
        Some(dir) => {
            write(&dir.join("nodes.json"), &(text + "\n"))?;
            write(&dir.join("spacing.csv"), &csv.into_string())?;
        }
        None => {
            out(&(text + "\n"));
            out(&csv.into_string());
        }
    }
    Ok(0)
}

fn sweep(args: &SweepArgs) -> Result<i32> {
    let cfg = args.config()?;
    let report = run(&cfg);
    for p in write_outputs(&report, &cfg.output)? {
        eprintln!("wrote {}", p.display());
    }
    print_report(&report);
    Ok(report.exit_code())
}

fn kernel_csv(dir: &Path) -> Result<()> {
    let mut csv = Csv::new(&["domain", "k", "distance", "error", "bound"]);
    for name in ["disk", "segment"] {
        let e = parse_domain(name)?;
        let map = ExteriorMap::build(&e)?;
        let b = KernelBuilder::new(&map);
        for k in [2, 3] {
            let spec = KernelSpec::for_budget(256, k)?;
            let d = kernel_diagnostic(&b, &spec, &e.boundary_point(0.0), 2048)?;
            for (dist, err, bound) in d.rows {
                csv.row(&[
                    name.to_string(),
                    k.to_string(),
                    num(dist),
                    num(err),
                    num(bound),
                ]);
            }
        }
    }
    write(&dir.join("kernel.csv"), &csv.into_string())
}

fn verify(ids: &[u8], dir: Option<&Path>) -> Result<i32> {
    if let Some(bad) = ids
        .iter()
        .find(|i| !CRITERIA.iter().any(|(id, _)| id == *i))
    {
        return Err(HarnessError::Config(format!("no criterion {bad}")));
    }
    let mut v = Verifier::new();
    let outcomes = if ids.is_empty() {
        v.all()
    } else {
        ids.iter().map(|i| v.criterion(*i)).collect()
    };
    let mut pass = true;
    for o in &outcomes {
        out(&format!("{o}\n"));
        pass &= o.passed;
    }
    if let Some(dir) = dir {
        kernel_csv(dir)?;
    }
    Ok(if pass { 0 } else { 2 })
}

fn print_report(r: &ApproxReport) {
    let mut text = format!("status {:?}, {} degrees\n", r.status, r.degrees.len());
    for e in &r.errors {
        text += &format!("error: {e}\n");
    }
    for d in &r.degrees {
        text += &format!(
            "n {:>4}  degree {:>4}  sup {:.3e}  ratio {:.3}  residual {:.1e}\n",
            d.n,
            d.degree,
            d.boundary_sup,
            d.max_ratio.first().copied().unwrap_or(f64::NAN),
            d.max_node_residual
        );
    }
    for c in &r.checks {
        text += &format!(
            "{} {} = {:.4e} (limit {:e})\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    out(&text);
}

fn report(path: &Path) -> Result<i32> {
    let r = ApproxReport::from_json(&read(path)?)?;
    print_report(&r);
    Ok(r.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Map {
            domain,
            deltas,
            points,
            csv,
        } => map(domain, deltas, *points, csv.as_deref()),
        Command::Approx {
            domain,
            function,
            degree,
            samples,
            tol,
        } => approx(domain, function, *degree, *samples, *tol),
        Command::Fekete {
            domain,
            count,
            grid,
            seed,
            out,
        } => fekete(domain, *count, *grid, *seed, out.as_deref()),
        Command::Sweep(args) => sweep(args),
        Command::Verify { criteria, out } => verify(criteria, out.as_deref()),
        Command::Report { path } => report(path),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
