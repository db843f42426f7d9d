//! Interpolation node sources.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use simapprox::fekete::fekete_points;
use simapprox::geometry::Continuum;
use simapprox::Complex64;

use crate::error::{HarnessError, Result};

/// Where nodes come from. A count of `0` means "use the sweep value"
/// (Theorem 3 sweeps over node counts).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeSource {
    /// `e^{2πij/N}` mapped to `L` by the exterior map of the domain.
    Roots(usize),
    /// Equal steps of the boundary parameter; on a segment, equal steps
    /// from end to end.
    Uniform(usize),
    /// One uniformly random boundary parameter in each of `N` equal arcs.
    Random(usize),
    Fekete(usize),
    Points(Vec<[f64; 2]>),
    /// Text file with one `re im` pair per line.
    File(PathBuf),
}

impl NodeSource {
    /// `roots:N`, `uniform:N`, `random:N`, `fekete:N` (count optional),
    /// `points:x,y;x,y;…` or `file:path`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        let count = || -> Result<usize> {
            if arg.is_empty() {
                Ok(0)
            } else {
                arg.trim()
                    .parse()
                    .map_err(|_| HarnessError::Config(format!("bad node count in '{s}'")))
            }
        };
        match kind {
            "roots" => Ok(NodeSource::Roots(count()?)),
            "uniform" => Ok(NodeSource::Uniform(count()?)),
            "random" => Ok(NodeSource::Random(count()?)),
            "fekete" => Ok(NodeSource::Fekete(count()?)),
            "points" => {
                let pts = arg
                    .split(';')
                    .filter(|p| !p.trim().is_empty())
                    .map(|p| {
                        let v: Vec<f64> = p
                            .split(',')
                            .map(|t| t.trim().parse::<f64>())
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|_| HarnessError::Config(format!("bad point '{p}'")))?;
                        match v.as_slice() {
                            [x, y] => Ok([*x, *y]),
                            _ => Err(HarnessError::Config(format!(
                                "bad point '{p}', expected x,y"
                            ))),
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                if pts.is_empty() {
                    return Err(HarnessError::Config(
                        "points: needs at least one point".into(),
                    ));
                }
                Ok(NodeSource::Points(pts))
            }
            "file" if !arg.is_empty() => Ok(NodeSource::File(PathBuf::from(arg))),
            _ => Err(HarnessError::Config(format!("unknown node source '{s}'"))),
        }
    }

    /// The node list; `count` replaces a zero count.
    pub fn resolve(
        &self,
        e: &Continuum,
        count: usize,
        seed: u64,
        fekete_grid: usize,
    ) -> Result<Vec<Complex64>> {
        let pick = |n: usize| -> Result<usize> {
            let n = if n == 0 { count } else { n };
            if n == 0 {
                return Err(HarnessError::Config("node count is zero".into()));
            }
            Ok(n)
        };
        match self {
            NodeSource::Roots(n) => {
                let n = pick(*n)?;
                let map = simapprox::conformal::ExteriorMap::build(e)?;
                (0..n)
                    .map(|j| {
                        let w = Complex64::from_polar(1.0 + 1e-12, 2.0 * PI * j as f64 / n as f64);
                        Ok(e.nearest_point(map.psi(w)?))
                    })
                    .collect()
            }
            NodeSource::Uniform(n) => {
                let n = pick(*n)?;
                let t = |j: usize| {
                    if e.has_interior() {
                        j as f64 / n as f64
                    } else if n == 1 {
                        0.0
                    } else {
                        0.5 * j as f64 / (n - 1) as f64
                    }
                };
                Ok((0..n).map(|j| e.boundary_point(t(j)).location).collect())
            }
            NodeSource::Random(n) => {
                let n = pick(*n)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let span = if e.has_interior() { 1.0 } else { 0.5 };
                Ok((0..n)
                    .map(|j| {
                        let t = span * (j as f64 + rng.gen_range(0.0..1.0)) / n as f64;
                        e.boundary_point(t).location
                    })
                    .collect())
            }
            NodeSource::Fekete(n) => {
                let n = pick(*n)?;
                let grid = if fekete_grid == 0 {
                    32 * n
                } else {
                    fekete_grid
                };
                Ok(fekete_points(e, n, grid, seed)?.points)
            }
            NodeSource::Points(p) => Ok(p.iter().map(|[x, y]| Complex64::new(*x, *y)).collect()),
            NodeSource::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|err| HarnessError::Io(format!("{}: {err}", path.display())))?;
                text.lines()
                    .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
                    .map(|l| {
                        let v: Vec<f64> = l
                            .split(|c: char| c.is_whitespace() || c == ',')
                            .filter(|t| !t.is_empty())
                            .map(|t| t.parse::<f64>())
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|_| HarnessError::Config(format!("bad node line '{l}'")))?;
                        match v.as_slice() {
                            [x, y] => Ok(Complex64::new(*x, *y)),
                            _ => Err(HarnessError::Config(format!("bad node line '{l}'"))),
                        }
                    })
                    .collect()
            }
        }
    }
}

impl fmt::Display for NodeSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let count = |n: &usize| {
            if *n == 0 {
                String::new()
            } else {
                format!(":{n}")
            }
        };
        match self {
            NodeSource::Roots(n) => write!(f, "roots{}", count(n)),
            NodeSource::Uniform(n) => write!(f, "uniform{}", count(n)),
            NodeSource::Random(n) => write!(f, "random{}", count(n)),
            NodeSource::Fekete(n) => write!(f, "fekete{}", count(n)),
            NodeSource::Points(p) => {
                let parts: Vec<String> = p.iter().map(|[x, y]| format!("{x},{y}")).collect();
                write!(f, "points:{}", parts.join(";"))
            }
            NodeSource::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_display_round_trip() {
        for s in [
            "roots:4",
            "uniform:8",
            "random:5",
            "fekete",
            "fekete:16",
            "points:1,0;0,0.5",
            "file:nodes.txt",
        ] {
            assert_eq!(NodeSource::parse(s).unwrap().to_string(), s);
        }
        assert!(NodeSource::parse("blob:3").is_err());
        assert!(NodeSource::parse("points:1").is_err());
    }

    #[test]
    fn roots_on_disk_and_random_is_seeded() {
        let e = Continuum::unit_disk();
        let z = NodeSource::Roots(4).resolve(&e, 0, 1, 0).unwrap();
        assert!((z[1] - Complex64::new(0.0, 1.0)).norm() < 1e-9);
        let a = NodeSource::Random(5).resolve(&e, 0, 3, 0).unwrap();
        let b = NodeSource::Random(5).resolve(&e, 0, 3, 0).unwrap();
        assert_eq!(a, b);
        assert_eq!(NodeSource::Fekete(0).resolve(&e, 3, 1, 0).unwrap().len(), 3);
        let s = NodeSource::Uniform(5)
            .resolve(&Continuum::unit_segment(), 0, 1, 0)
            .unwrap();
        for (z, x) in s.iter().zip([1.0, 0.5, 0.0, -0.5, -1.0]) {
            assert!((z - Complex64::new(x, 0.0)).norm() < 1e-12);
        }
    }
}
