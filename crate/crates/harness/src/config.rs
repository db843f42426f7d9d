//! Experiment configuration.
//!
//! The file format is flat `key = value` text grouped by `[section]`
//! headers; `#` starts a comment. A key inside a section is addressed as
//! `section.key`, so
//!
//! ```text
//! [problem]
//! domain = disk
//! function = branch(0.5,1)
//! theorem = 1
//! k = 1
//!
//! [nodes]
//! source = roots:4
//!
//! [sweep]
//! degrees = 16,32,64,128
//! compacts = disk:0,0,0.5
//! ```
//!
//! sets `problem.domain`, `problem.function`, …. Command-line overrides use
//! the same dotted keys.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use simapprox::constructions::{Compact, Mode};
use simapprox::geometry::Continuum;
use simapprox::Complex64;

use crate::error::{HarnessError, Result};
use crate::nodes::NodeSource;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2d")]
    TwoD,
    #[serde(rename = "3")]
    Three,
}

impl Theorem {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Theorem::One),
            "2d" => Ok(Theorem::TwoD),
            "3" => Ok(Theorem::Three),
            other => Err(HarnessError::Config(format!(
                "unknown theorem '{other}' (expected 1, 2d or 3)"
            ))),
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theorem::One => "1",
            Theorem::TwoD => "2d",
            Theorem::Three => "3",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub domain: String,
    pub function: String,
    pub theorem: Theorem,
    pub k: usize,
    pub r: usize,
    pub epsilon: f64,
    pub nodes: NodeSource,
    /// Degrees `n` (Theorems 1, 2d) or node counts `N` (Theorem 3).
    pub degrees: Vec<usize>,
    pub mode: Mode,
    pub compacts: Vec<Compact>,
    pub boundary_samples: usize,
    pub fit_samples: usize,
    pub profile_centers: usize,
    pub fekete_grid: usize,
    pub output: PathBuf,
    pub seed: u64,
    pub svg: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            domain: "disk".into(),
            function: "branch(0.5,1)".into(),
            theorem: Theorem::One,
            k: 1,
            r: 0,
            epsilon: 0.25,
            nodes: NodeSource::Roots(4),
            degrees: vec![16, 32, 64],
            mode: Mode::Fast,
            compacts: Vec::new(),
            boundary_samples: 512,
            fit_samples: 512,
            profile_centers: 64,
            fekete_grid: 0,
            output: PathBuf::from("out"),
            seed: 1,
            svg: true,
        }
    }
}

const KEYS: &[&str] = &[
    "problem.domain",
    "problem.function",
    "problem.theorem",
    "problem.k",
    "problem.r",
    "problem.epsilon",
    "nodes.source",
    "sweep.degrees",
    "sweep.mode",
    "sweep.compacts",
    "samples.boundary",
    "samples.fit",
    "samples.profile_centers",
    "samples.fekete_grid",
    "output.dir",
    "output.seed",
    "output.svg",
];

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("{key}: cannot parse '{v}'")))
}

impl ExperimentConfig {
    pub fn keys() -> &'static [&'static str] {
        KEYS
    }

    /// Sets one dotted key. Domain and function ids are checked by
    /// [`ExperimentConfig::validate`].
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "problem.domain" => self.domain = v.into(),
            "problem.function" => self.function = v.into(),
            "problem.theorem" => self.theorem = Theorem::parse(v)?,
            "problem.k" => self.k = number(key, v)?,
            "problem.r" => self.r = number(key, v)?,
            "problem.epsilon" => self.epsilon = number(key, v)?,
            "nodes.source" => self.nodes = NodeSource::parse(v)?,
            "sweep.degrees" => {
                self.degrees = v
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| number(key, t))
                    .collect::<Result<_>>()?
            }
            "sweep.mode" => {
                self.mode = match v {
                    "fast" => Mode::Fast,
                    "constructive" => Mode::Constructive,
                    _ => {
                        return Err(HarnessError::Config(format!(
                            "{key}: expected fast or constructive, got '{v}'"
                        )))
                    }
                }
            }
            "sweep.compacts" => {
                self.compacts = v
                    .split(';')
                    .filter(|t| !t.trim().is_empty())
                    .map(parse_compact)
                    .collect::<Result<_>>()?
            }
            "samples.boundary" => self.boundary_samples = number(key, v)?,
            "samples.fit" => self.fit_samples = number(key, v)?,
            "samples.profile_centers" => self.profile_centers = number(key, v)?,
            "samples.fekete_grid" => self.fekete_grid = number(key, v)?,
            "output.dir" => self.output = PathBuf::from(v),
            "output.seed" => self.seed = number(key, v)?,
            "output.svg" => self.svg = number(key, v)?,
            _ => return Err(HarnessError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Parses and validates.
    pub fn from_text(text: &str) -> Result<Self> {
        let cfg = Self::parse_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses without validating, so that `run` can report a bad id.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {}: expected key = value", i + 1))
            })?;
            let key = if section.is_empty() {
                k.trim().to_string()
            } else {
                format!("{section}.{}", k.trim())
            };
            cfg.apply(&key, v)
                .map_err(|e| HarnessError::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        parse_domain(&self.domain)?;
        simapprox::functions::FunctionSpec::parse(&self.function)?;
        if self.degrees.is_empty() {
            return Err(HarnessError::Config("degree list is empty".into()));
        }
        if self.degrees.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::Config(format!(
                "degree list must be ascending: {:?}",
                self.degrees
            )));
        }
        if self.k == 0 {
            return Err(HarnessError::Config("k must be at least 1".into()));
        }
        if self.theorem == Theorem::Three && !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(HarnessError::Config(format!(
                "ε must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// The configuration in file form; `from_text(to_text())` is the identity.
    pub fn to_text(&self) -> String {
        let compacts: Vec<String> = self
            .compacts
            .iter()
            .map(|c| format!("disk:{},{},{}", c.center.re, c.center.im, c.radius))
            .collect();
        let degrees: Vec<String> = self.degrees.iter().map(|d| d.to_string()).collect();
        format!(
            "[problem]\ndomain = {}\nfunction = {}\ntheorem = {}\nk = {}\nr = {}\nepsilon = {}\n\n\
             [nodes]\nsource = {}\n\n\
             [sweep]\ndegrees = {}\nmode = {}\ncompacts = {}\n\n\
             [samples]\nboundary = {}\nfit = {}\nprofile_centers = {}\nfekete_grid = {}\n\n\
             [output]\ndir = {}\nseed = {}\nsvg = {}\n",
            self.domain,
            self.function,
            self.theorem,
            self.k,
            self.r,
            self.epsilon,
            self.nodes,
            degrees.join(","),
            match self.mode {
                Mode::Fast => "fast",
                Mode::Constructive => "constructive",
            },
            compacts.join(";"),
            self.boundary_samples,
            self.fit_samples,
            self.profile_centers,
            self.fekete_grid,
            self.output.display(),
            self.seed,
            self.svg,
        )
    }
}

fn numbers(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| HarnessError::Config(format!("bad number '{t}' in {what} '{s}'")))
        })
        .collect()
}

/// `disk:cx,cy,r`.
pub fn parse_compact(s: &str) -> Result<Compact> {
    let body = s.trim().strip_prefix("disk:").ok_or_else(|| {
        HarnessError::Config(format!("compact '{s}' must look like disk:cx,cy,r"))
    })?;
    Ok(Compact::parse(body)?)
}

/// Domain ids: `disk`, `disk(cx,cy,r)`, `ellipse(cx,cy,a,b)`, `segment`,
/// `segment(x0,y0,x1,y1)`, `square`, `square(cx,cy,side)`, `lshape`,
/// `polygon(x0,y0,x1,y1,…)`.
pub fn parse_domain(s: &str) -> Result<Continuum> {
    let s = s.trim();
    let (name, args) = match s.find('(') {
        Some(i) if s.ends_with(')') => (&s[..i], numbers(&s[i + 1..s.len() - 1], "domain")?),
        Some(_) => return Err(HarnessError::Config(format!("malformed domain id '{s}'"))),
        None => (s, Vec::new()),
    };
    let c = |x: f64, y: f64| Complex64::new(x, y);
    let bad = || HarnessError::Config(format!("wrong number of parameters in domain '{s}'"));
    let e = match (name, args.as_slice()) {
        ("disk", []) => Continuum::unit_disk(),
        ("disk", [x, y, r]) => Continuum::disk(c(*x, *y), *r)?,
        ("ellipse", [x, y, a, b]) => Continuum::ellipse(c(*x, *y), *a, *b)?,
        ("segment", []) => Continuum::unit_segment(),
        ("segment", [x0, y0, x1, y1]) => Continuum::segment(c(*x0, *y0), c(*x1, *y1))?,
        ("square", []) => Continuum::square(c(0.0, 0.0), 1.0)?,
        ("square", [x, y, side]) => Continuum::square(c(*x, *y), *side)?,
        ("lshape", []) => Continuum::l_shape(),
        ("polygon", v) if v.len() >= 6 && v.len() % 2 == 0 => {
            Continuum::polygon(v.chunks(2).map(|p| c(p[0], p[1])).collect())?
        }
        ("disk" | "ellipse" | "segment" | "square" | "lshape" | "polygon", _) => return Err(bad()),
        _ => return Err(HarnessError::Config(format!("unknown domain id '{name}'"))),
    };
    Ok(e)
}
