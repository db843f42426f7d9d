//! The exterior conformal map `Φ: Ω → {|w| > 1}` with `Φ(∞) = ∞`,
//! `Φ′(∞) > 0`, its inverse `Ψ`, level curves `L_δ` and the distance
//! `ρ_δ(z) = dist(z, L_δ)`.
//!
//! Disks, ellipses and segments use the Joukowski family
//! `Ψ(w) = c + a·w + b/w`. Polygons use the exterior Schwarz–Christoffel
//! formula
//!
//! ```text
//! Ψ(w) = z₀ + A ∫_{w₀}^{w} ∏_k (1 − w_k/ω)^{β_k} dω,
//! ```
//!
//! where `β_k π` is the turning angle at vertex `k` and the prevertices
//! `w_k = e^{iθ_k}` solve the parameter problem.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::c64;
use crate::error::{invalid, Error, Result};
use crate::fit::{line_fit, LineFit};
use crate::geometry::{BoundaryPoint, Continuum, Location, Shape};
use crate::polynomial::{CPolynomial, Frame};
use crate::quadrature::{gauss_jacobi, gauss_legendre};
use crate::serde_c64;

/// Points with `|w| < 1 − W_TOL` are rejected by [`ExteriorMap::psi`].
const W_TOL: f64 = 1e-12;
/// Samples of `L_δ` used to seed the `ρ_δ` search.
pub const RHO_SAMPLES: usize = 1024;

/// A sampled level curve `L_δ = Ψ({|w| = 1 + δ})`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelCurve {
    pub delta: f64,
    pub thetas: Vec<f64>,
    #[serde(with = "serde_c64::vec")]
    pub points: Vec<Complex64>,
}

#[derive(Clone, Debug)]
enum Repr {
    /// `Ψ(w) = center + a·w + b/w` with `a > 0`.
    Joukowski {
        center: Complex64,
        a: f64,
        b: Complex64,
    },
    Polygon(Box<ScMap>),
}

/// Exterior map of a built-in continuum.
#[derive(Debug)]
pub struct ExteriorMap {
    domain: Continuum,
    repr: Repr,
    level_cache: Mutex<HashMap<u64, Arc<LevelCurve>>>,
    laurent: OnceLock<Vec<Complex64>>,
}

/// Serializable description of a map.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MapSummary {
    pub kind: String,
    pub capacity: f64,
    /// `[center, a, b]` for the Joukowski family; empty for polygons.
    #[serde(with = "serde_c64::vec")]
    pub coefficients: Vec<Complex64>,
    /// Prevertices `e^{iθ_k}` for polygons.
    #[serde(with = "serde_c64::vec")]
    pub prevertices: Vec<Complex64>,
    /// Vertex reproduction error of the parameter solve, relative to `diam E`.
    pub residual: f64,
}

impl ExteriorMap {
    pub fn build(domain: &Continuum) -> Result<Self> {
        let repr = match domain.shape() {
            Shape::Disk { center, radius } => Repr::Joukowski {
                center: *center,
                a: *radius,
                b: c64(0.0, 0.0),
            },
            Shape::Ellipse { center, a, b } => Repr::Joukowski {
                center: *center,
                a: (a + b) / 2.0,
                b: c64((a - b) / 2.0, 0.0),
            },
            Shape::Segment { start, end } => {
                let h = (end - start) / 2.0;
                let half = h.norm();
                Repr::Joukowski {
                    center: (start + end) / 2.0,
                    a: half / 2.0,
                    b: h * h / (2.0 * half),
                }
            }
            Shape::Polygon { vertices } => {
                Repr::Polygon(Box::new(ScMap::solve(vertices, domain.diameter())?))
            }
        };
        Ok(ExteriorMap {
            domain: domain.clone(),
            repr,
            level_cache: Mutex::new(HashMap::new()),
            laurent: OnceLock::new(),
        })
    }

    pub fn domain(&self) -> &Continuum {
        &self.domain
    }

    /// Logarithmic capacity `1/Φ′(∞)`.
    pub fn capacity(&self) -> f64 {
        match &self.repr {
            Repr::Joukowski { a, .. } => *a,
            Repr::Polygon(sc) => sc.a,
        }
    }

    pub fn summary(&self) -> MapSummary {
        match &self.repr {
            Repr::Joukowski { center, a, b } => MapSummary {
                kind: self.domain.kind_name().into(),
                capacity: *a,
                coefficients: vec![*center, c64(*a, 0.0), *b],
                prevertices: Vec::new(),
                residual: 0.0,
            },
            Repr::Polygon(sc) => MapSummary {
                kind: self.domain.kind_name().into(),
                capacity: sc.a,
                coefficients: Vec::new(),
                prevertices: sc
                    .thetas
                    .iter()
                    .map(|t| Complex64::from_polar(1.0, *t))
                    .collect(),
                residual: sc.residual,
            },
        }
    }

    /// `Ψ(w)` for `|w| ≥ 1`.
    pub fn psi(&self, w: Complex64) -> Result<Complex64> {
        if !w.is_finite() || w.norm() < 1.0 - W_TOL {
            return Err(Error::Domain(format!(
                "psi needs |w| >= 1, got |w| = {}",
                w.norm()
            )));
        }
        Ok(match &self.repr {
            Repr::Joukowski { center, a, b } => center + w * *a + b / w,
            Repr::Polygon(sc) => sc.psi(w),
        })
    }

    /// `Ψ′(w)` for `|w| ≥ 1`.
    pub fn psi_prime(&self, w: Complex64) -> Result<Complex64> {
        if !w.is_finite() || w.norm() < 1.0 - W_TOL {
            return Err(Error::Domain(format!(
                "psi' needs |w| >= 1, got |w| = {}",
                w.norm()
            )));
        }
        Ok(match &self.repr {
            Repr::Joukowski { a, b, .. } => c64(*a, 0.0) - b / (w * w),
            Repr::Polygon(sc) => sc.integrand(w) * sc.a,
        })
    }

    /// `Φ(z)` for `z ∈ Ω̄`.
    ///
    /// For a segment, a point of the segment has two images; the one from the
    /// principal square root is returned. Use [`Self::phi_boundary`] to pick
    /// a side.
    pub fn phi(&self, z: Complex64) -> Result<Complex64> {
        let loc = self.domain.classify(z);
        if loc == Location::Interior {
            return Err(Error::Domain(format!(
                "phi is undefined at interior point {z}"
            )));
        }
        match &self.repr {
            Repr::Joukowski { center, a, b } => Ok(joukowski_inverse(*center, *a, *b, z)),
            Repr::Polygon(sc) => {
                if loc == Location::Boundary {
                    sc.phi_boundary(z)
                } else {
                    sc.phi_exterior(z, self.domain.diameter())
                }
            }
        }
    }

    /// `Φ` at a boundary sample, honouring the side for segments.
    pub fn phi_boundary(&self, bp: &BoundaryPoint) -> Result<Complex64> {
        if let (Repr::Joukowski { center, a, b }, Shape::Segment { .. }) =
            (&self.repr, self.domain.shape())
        {
            let w = joukowski_inverse(*center, *a, *b, bp.location);
            // Upper side (first half of the parameterization) ↔ arg in [0, π].
            let phase = (b / b.norm()).sqrt();
            let upper = (w / phase).im >= 0.0;
            let want_upper = bp.parameter <= 0.5;
            return Ok(if upper == want_upper {
                w
            } else {
                // The other preimage is b/(a w) rotated onto the circle.
                b / (w * *a)
            });
        }
        self.phi(bp.location)
    }

    /// `θ = arg Φ(ζ)` for a boundary sample, in `[0, 2π)`.
    pub fn boundary_angle(&self, bp: &BoundaryPoint) -> Result<f64> {
        Ok(self.phi_boundary(bp)?.arg().rem_euclid(TAU))
    }

    /// `L_δ` sampled at `m` uniform angles.
    pub fn level_curve(&self, delta: f64, m: usize) -> Result<LevelCurve> {
        if !(delta > 0.0 && delta <= 10.0) {
            return invalid(format!("level curve needs δ in (0, 10], got {delta}"));
        }
        if m < 64 {
            return invalid(format!("level curve needs at least 64 points, got {m}"));
        }
        let r = 1.0 + delta;
        let thetas: Vec<f64> = (0..m).map(|j| TAU * j as f64 / m as f64).collect();
        let points = thetas
            .par_iter()
            .map(|t| self.psi(Complex64::from_polar(r, *t)))
            .collect::<Result<Vec<_>>>()?;
        Ok(LevelCurve {
            delta,
            thetas,
            points,
        })
    }

    fn cached_level(&self, delta: f64) -> Result<Arc<LevelCurve>> {
        let key = delta.to_bits();
        if let Some(c) = self.level_cache.lock().expect("level cache").get(&key) {
            return Ok(c.clone());
        }
        let curve = Arc::new(self.level_curve(delta, RHO_SAMPLES)?);
        self.level_cache
            .lock()
            .expect("level cache")
            .insert(key, curve.clone());
        Ok(curve)
    }

    /// `ρ_δ(z) = dist(z, L_δ)`.
    ///
    /// Joukowski level curves are ellipses and use the exact point-to-ellipse
    /// distance; polygons search a dense level curve and refine by
    /// golden-section search in `θ`.
    pub fn rho_delta(&self, z: Complex64, delta: f64) -> Result<f64> {
        if !(delta > 0.0 && delta <= 10.0) {
            return invalid(format!("ρ_δ needs δ in (0, 10], got {delta}"));
        }
        match &self.repr {
            Repr::Joukowski { center, a, b } => {
                let r = 1.0 + delta;
                let bn = b.norm();
                let rot = if bn > 0.0 {
                    (b / bn).sqrt()
                } else {
                    c64(1.0, 0.0)
                };
                let local = (z - center) / rot;
                let ax = a * r + bn / r;
                let ay = a * r - bn / r;
                if (ax - ay).abs() <= 1e-15 * ax {
                    return Ok((local.norm() - ax).abs());
                }
                let ell = Continuum::ellipse(c64(0.0, 0.0), ax, ay)?;
                Ok(ell.distance_to_boundary(local))
            }
            Repr::Polygon(_) => self.rho_delta_sampled(z, delta),
        }
    }

    /// The generic `ρ_δ`: dense level curve plus golden-section refinement.
    pub fn rho_delta_sampled(&self, z: Complex64, delta: f64) -> Result<f64> {
        let curve = self.cached_level(delta)?;
        let m = curve.points.len();
        let dists: Vec<f64> = curve.points.iter().map(|p| (p - z).norm()).collect();
        // Refine around the three best local minima.
        let mut minima: Vec<usize> = (0..m)
            .filter(|&j| dists[j] <= dists[(j + m - 1) % m] && dists[j] <= dists[(j + 1) % m])
            .collect();
        minima.sort_by(|a, b| dists[*a].total_cmp(&dists[*b]));
        minima.truncate(3);
        let r = 1.0 + delta;
        let h = TAU / m as f64;
        let mut best = dists.iter().copied().fold(f64::INFINITY, f64::min);
        for j in minima {
            let f = |t: f64| {
                self.psi(Complex64::from_polar(r, t))
                    .map(|p| (p - z).norm())
                    .unwrap_or(f64::INFINITY)
            };
            let t0 = curve.thetas[j];
            let (_, v) = golden_min(f, t0 - h, t0 + h, 1e-12);
            best = best.min(v);
        }
        Ok(best)
    }

    /// Laurent coefficients `c_0, c_1, …` of `Ψ(w) = a·w + Σ_j c_j w^{−j}`.
    fn laurent(&self) -> &[Complex64] {
        self.laurent.get_or_init(|| match &self.repr {
            Repr::Joukowski { center, b, .. } => vec![*center, *b],
            Repr::Polygon(sc) => sc.laurent(2048, 512),
        })
    }

    /// Faber polynomials `F_0, …, F_q` of the domain.
    pub fn faber_polynomials(&self, q: usize, frame: Frame) -> Vec<CPolynomial> {
        let a = self.capacity();
        let c = self.laurent();
        let coef = |j: usize| c.get(j).copied().unwrap_or(c64(0.0, 0.0));
        let mut f: Vec<CPolynomial> = Vec::with_capacity(q + 1);
        f.push(CPolynomial::constant(frame, c64(1.0, 0.0)));
        for m in 1..=q {
            let mut next = f[m - 1].mul_linear(coef(0));
            for j in 1..m {
                let cj = coef(j);
                if cj != c64(0.0, 0.0) {
                    next = &next - &f[m - 1 - j].scale_by(cj);
                }
            }
            let tail = coef(m - 1) * (m as f64 - 1.0);
            if m >= 2 && tail != c64(0.0, 0.0) {
                next = &next - &CPolynomial::constant(frame, tail);
            }
            f.push(next.scale_by(c64(1.0 / a, 0.0)));
        }
        f
    }

    /// `max ρ_{2δ}(z)/ρ_δ(z)` over `m` boundary samples and the given `δ`.
    pub fn rho_doubling_constant(&self, deltas: &[f64], m: usize) -> Result<f64> {
        let pts = self.domain.boundary_samples(m)?;
        let vals = pts
            .par_iter()
            .map(|b| -> Result<f64> {
                let mut worst: f64 = 0.0;
                for &d in deltas {
                    worst = worst
                        .max(self.rho_delta(b.location, 2.0 * d)? / self.rho_delta(b.location, d)?);
                }
                Ok(worst)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(vals.into_iter().fold(0.0, f64::max))
    }

    /// Range of `ρ_δ(ζ)/ρ_δ(z)` over boundary pairs with `|z − ζ| ≤ ρ_δ(z)`;
    /// the `ζ` are boundary points in `D(z, ρ_δ(z))`.
    pub fn rho_neighbor_range(&self, deltas: &[f64], m: usize) -> Result<(f64, f64)> {
        let pts = self.domain.boundary_samples(m)?;
        let vals = pts
            .par_iter()
            .map(|b| -> Result<(f64, f64)> {
                let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
                for &d in deltas {
                    let r = self.rho_delta(b.location, d)?;
                    for zeta in self.domain.boundary_points_in_disk(b.location, r, 8) {
                        let q = self.rho_delta(zeta, d)? / r;
                        lo = lo.min(q);
                        hi = hi.max(q);
                    }
                }
                Ok((lo, hi))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(vals
            .into_iter()
            .fold((f64::INFINITY, 0.0), |(a, b), (c, d)| (a.min(c), b.max(d))))
    }

    /// Exponent `α` in `ρ_δ(z)/|z − ζ| ≤ C(δ/|Φ(z) − Φ(ζ)|)^α` for boundary
    /// `z` and `ζ ∈ Ω` with `|z − ζ| ≥ ρ_δ(z)`: slope of the upper envelope
    /// of the log-log cloud over 12 bins. `ζ` runs over `L_δ` and `L_{4δ}`.
    pub fn rho_holder_fit(&self, deltas: &[f64], m: usize) -> Result<LineFit> {
        let pts = self.domain.boundary_samples(m)?;
        let mut cloud: Vec<(f64, f64)> = Vec::new();
        for &d in deltas {
            let outer: Vec<(Complex64, Complex64)> = [d, 4.0 * d]
                .iter()
                .flat_map(|s| {
                    (0..m).map(move |j| {
                        Complex64::from_polar(1.0 + s, TAU * (j as f64 + 0.5) / m as f64)
                    })
                })
                .map(|w| self.psi(w).map(|z| (w, z)))
                .collect::<Result<_>>()?;
            let rows = pts
                .par_iter()
                .map(|b| -> Result<Vec<(f64, f64)>> {
                    let wz = self.phi_boundary(b)?;
                    let r = self.rho_delta(b.location, d)?;
                    Ok(outer
                        .iter()
                        .filter(|(_, z)| (z - b.location).norm() >= r)
                        .map(|(w, z)| {
                            (
                                (d / (w - wz).norm()).ln(),
                                (r / (z - b.location).norm()).ln(),
                            )
                        })
                        .collect())
                })
                .collect::<Result<Vec<_>>>()?;
            cloud.extend(rows.into_iter().flatten());
        }
        let (lo, hi) = cloud
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (x, _)| {
                (a.min(*x), b.max(*x))
            });
        let bins = 12;
        let mut env = vec![(0.0, f64::NEG_INFINITY); bins];
        for (x, y) in &cloud {
            let i = (((x - lo) / (hi - lo)) * bins as f64)
                .floor()
                .clamp(0.0, bins as f64 - 1.0) as usize;
            if *y > env[i].1 {
                env[i] = (*x, *y);
            }
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = env.into_iter().filter(|(_, y)| y.is_finite()).unzip();
        line_fit(&xs, &ys)
            .ok_or_else(|| Error::Internal("Hölder fit needs at least two bins".into()))
    }
}

/// The root of `a w² − (z − c) w + b = 0` of larger modulus.
fn joukowski_inverse(center: Complex64, a: f64, b: Complex64, z: Complex64) -> Complex64 {
    let zeta = z - center;
    if b == c64(0.0, 0.0) {
        return zeta / a;
    }
    let s = (zeta * zeta - b * (4.0 * a)).sqrt();
    let w1 = (zeta + s) / (2.0 * a);
    let w2 = (zeta - s) / (2.0 * a);
    if w1.norm() >= w2.norm() {
        w1
    } else {
        w2
    }
}

/// Golden-section minimisation on `[lo, hi]`; returns `(argmin, min)`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

const JACOBI_NODES: usize = 32;
const LEGENDRE_NODES: usize = 16;

/// Exterior Schwarz–Christoffel map of a positively oriented polygon.
#[derive(Clone, Debug)]
struct ScMap {
    vertices: Vec<Complex64>,
    betas: Vec<f64>,
    thetas: Vec<f64>,
    a: f64,
    residual: f64,
    /// Gauss–Jacobi rules with weight `(1+t)^{β_k}`.
    rules: Vec<(Vec<f64>, Vec<f64>)>,
    legendre: (Vec<f64>, Vec<f64>),
    /// Coarse table `(w, Ψ(w))` seeding Newton in `phi_exterior`.
    table: Vec<(Complex64, Complex64)>,
}

impl ScMap {
    fn solve(vertices: &[Complex64], diam: f64) -> Result<Self> {
        let n = vertices.len();
        let betas: Vec<f64> = (0..n)
            .map(|k| {
                let prev = vertices[(k + n - 1) % n];
                let next = vertices[(k + 1) % n];
                ((next - vertices[k]) / (vertices[k] - prev)).arg() / PI
            })
            .collect();
        let rules = betas
            .iter()
            .map(|b| gauss_jacobi(JACOBI_NODES, 0.0, *b))
            .collect::<Result<Vec<_>>>()?;
        let lens: Vec<f64> = (0..n)
            .map(|k| (vertices[(k + 1) % n] - vertices[k]).norm())
            .collect();
        let centroid = vertices.iter().sum::<Complex64>() / n as f64;
        let mut sc = ScMap {
            vertices: vertices.to_vec(),
            betas,
            thetas: vec![0.0; n],
            a: 1.0,
            residual: f64::INFINITY,
            rules,
            legendre: gauss_legendre(LEGENDRE_NODES),
            table: Vec::new(),
        };

        // Unknowns: θ₀ and log-gaps y_0..y_{n−2} (y_{n−1} = 0).
        let mut x = DVector::<f64>::zeros(n);
        x[0] = (vertices[0] - centroid).arg();
        for k in 0..n - 1 {
            x[k + 1] = (lens[k] / lens[n - 1]).ln();
        }
        let residual_fn = |sc: &mut ScMap, x: &DVector<f64>| -> DVector<f64> {
            sc.set_params(x);
            sc.parameter_residual(&lens)
        };
        let mut fx = residual_fn(&mut sc, &x);
        let mut converged = false;
        for _ in 0..100 {
            let norm = fx.norm();
            if norm < 1e-13 {
                converged = true;
                break;
            }
            let mut jac = DMatrix::<f64>::zeros(n, n);
            let h = 1e-7;
            for j in 0..n {
                let mut xp = x.clone();
                xp[j] += h;
                let fp = residual_fn(&mut sc, &xp);
                let mut xm = x.clone();
                xm[j] -= h;
                let fm = residual_fn(&mut sc, &xm);
                jac.set_column(j, &((fp - fm) / (2.0 * h)));
            }
            let step = jac.lu().solve(&(-&fx)).ok_or_else(|| {
                Error::ConstructionFailure(format!(
                    "Schwarz-Christoffel Jacobian singular at residual {norm:e}"
                ))
            })?;
            let mut t = 1.0;
            loop {
                let xn = &x + &step * t;
                let fxn = residual_fn(&mut sc, &xn);
                if fxn.norm() < norm || t < 1e-4 {
                    x = xn;
                    fx = fxn;
                    break;
                }
                t *= 0.5;
            }
        }
        sc.set_params(&x);
        let final_norm = sc.parameter_residual(&lens).norm();
        if !converged && final_norm > 1e-9 {
            return Err(Error::ConstructionFailure(format!(
                "Schwarz-Christoffel parameter solve stalled at residual {final_norm:e}"
            )));
        }

        // Scale factor and boundary-correspondence check.
        let sides: Vec<Complex64> = (0..n).map(|k| sc.side_integral(k)).collect();
        let a_complex = (vertices[1] - vertices[0]) / sides[0];
        sc.a = a_complex.re;
        let mut z = vertices[0];
        let mut worst: f64 = 0.0;
        for k in 0..n {
            z += sides[k] * sc.a;
            worst = worst.max((z - vertices[(k + 1) % n]).norm());
        }
        sc.residual = worst / diam;
        if sc.residual > 1e-6 || a_complex.im.abs() > 1e-8 * a_complex.norm() {
            return Err(Error::ConstructionFailure(format!(
                "boundary correspondence error {:e} (|Im A|/|A| = {:e})",
                sc.residual,
                a_complex.im.abs() / a_complex.norm()
            )));
        }

        let radii = [1.002, 1.01, 1.03, 1.07, 1.15, 1.3, 1.6, 2.0, 3.0, 5.0];
        let angles = 128;
        sc.table = radii
            .iter()
            .flat_map(|r| {
                (0..angles).map(move |j| Complex64::from_polar(*r, TAU * j as f64 / angles as f64))
            })
            .map(|w| (w, sc.psi(w)))
            .collect();
        Ok(sc)
    }

    fn set_params(&mut self, x: &DVector<f64>) {
        let n = self.vertices.len();
        let ys: Vec<f64> = (0..n)
            .map(|k| if k + 1 < n { x[k + 1] } else { 0.0 })
            .collect();
        let ymax = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = ys.iter().map(|y| (y - ymax).exp()).collect();
        let total: f64 = e.iter().sum();
        let mut t = x[0];
        for (th, ek) in self.thetas.iter_mut().zip(&e).take(n) {
            *th = t;
            t += TAU * ek / total;
        }
    }

    fn parameter_residual(&self, lens: &[f64]) -> DVector<f64> {
        let n = self.vertices.len();
        let mut out = DVector::<f64>::zeros(n);
        let res: Complex64 = self
            .thetas
            .iter()
            .zip(&self.betas)
            .map(|(t, b)| Complex64::from_polar(*b, *t))
            .sum();
        out[0] = res.re;
        out[1] = res.im;
        let i0 = self.side_integral(0);
        out[2] = ((self.vertices[1] - self.vertices[0]) / i0).arg();
        for k in 1..n.saturating_sub(2) {
            let ik = self.side_integral(k);
            out[k + 2] = (ik.norm() / i0.norm()).ln() - (lens[k] / lens[0]).ln();
        }
        out
    }

    fn integrand(&self, w: Complex64) -> Complex64 {
        self.thetas
            .iter()
            .zip(&self.betas)
            .map(|(t, b)| (c64(1.0, 0.0) - Complex64::from_polar(1.0, *t) / w).powf(*b))
            .product()
    }

    /// `∫` of the integrand along the unit circle from prevertex `k` to
    /// `e^{iθ}`, `θ` within `π` of `θ_k`.
    fn arc_from(&self, k: usize, theta: f64) -> Complex64 {
        let t0 = self.thetas[k];
        let len = theta - t0;
        if len == 0.0 {
            return c64(0.0, 0.0);
        }
        if len.abs() < 1e-9 {
            // ∫ ≈ G_k w_k ν^{1+β}/(1+β) with ν = (w − w_k)/w_k.
            let wk = Complex64::from_polar(1.0, t0);
            let p = 1.0 + self.betas[k];
            let nu = c64(0.0, 1.0) * Complex64::from_polar(2.0 * (len / 2.0).sin(), len / 2.0);
            return self.prevertex_factor(k) * wk * nu.powf(p) / p;
        }
        let beta = self.betas[k];
        let (xs, ws) = &self.rules[k];
        let half = len / 2.0;
        let mut s = c64(0.0, 0.0);
        for (x, wt) in xs.iter().zip(ws) {
            let th = t0 + half * (1.0 + x);
            let w = Complex64::from_polar(1.0, th);
            let f = self.integrand(w) * w * c64(0.0, half);
            s += f * (wt / (1.0 + x).powf(beta));
        }
        s
    }

    /// `∫` from `w_k` to `w_{k+1}` along the unit circle.
    fn side_integral(&self, k: usize) -> Complex64 {
        let n = self.vertices.len();
        let t0 = self.thetas[k];
        let mut t1 = self.thetas[(k + 1) % n];
        while t1 <= t0 {
            t1 += TAU;
        }
        while t1 > t0 + TAU {
            t1 -= TAU;
        }
        let mid = 0.5 * (t0 + t1);
        let k1 = (k + 1) % n;
        // Express the midpoint relative to θ_{k+1}'s own branch.
        let shift = self.thetas[k1] - t1;
        self.arc_from(k, mid) - self.arc_from(k1, mid + shift)
    }

    /// Nearest prevertex and signed angular offset to `θ`.
    fn nearest_prevertex(&self, theta: f64) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (k, t) in self.thetas.iter().enumerate() {
            let d = (theta - t + PI).rem_euclid(TAU) - PI;
            if d.abs() < best.1.abs() {
                best = (k, d);
            }
        }
        best
    }

    /// `Ψ(e^{iθ})`.
    fn psi_circle(&self, theta: f64) -> Complex64 {
        let (k, d) = self.nearest_prevertex(theta);
        self.vertices[k] + self.arc_from(k, self.thetas[k] + d) * self.a
    }

    fn psi(&self, w: Complex64) -> Complex64 {
        let r = w.norm().max(1.0);
        let phi = w.arg();
        let (k, d) = self.nearest_prevertex(phi);
        let base = self.vertices[k] + self.arc_from(k, self.thetas[k] + d) * self.a;
        if r - 1.0 <= 1e-15 {
            return base;
        }
        let dir = Complex64::from_polar(1.0, phi);
        let gap = (2.0 * (d / 2.0).sin()).abs();
        let (xs, ws) = &self.legendre;
        let mut total = c64(0.0, 0.0);
        let mut lo = 1.0;
        if gap < 1e-13 {
            // Radial path starts at a prevertex: singular first piece.
            let hi = r.min(1.5);
            let (jx, jw) = &self.rules[k];
            let beta = self.betas[k];
            let half = (hi - lo) / 2.0;
            for (x, wt) in jx.iter().zip(jw) {
                let s = lo + half * (1.0 + x);
                total += self.integrand(dir * s) * dir * half * (wt / (1.0 + x).powf(beta));
            }
            lo = hi;
        }
        let mut piece = gap.max(1e-13);
        while lo < r {
            let hi = (lo + piece).min(r);
            let half = (hi - lo) / 2.0;
            let mid = (hi + lo) / 2.0;
            for (x, wt) in xs.iter().zip(ws) {
                let s = mid + half * x;
                total += self.integrand(dir * s) * dir * (half * wt);
            }
            lo = hi;
            piece *= 2.0;
        }
        base + total * self.a
    }

    /// Boundary `Φ`: bisection in `θ` along the side that contains `z`.
    fn phi_boundary(&self, z: Complex64) -> Result<Complex64> {
        let n = self.vertices.len();
        for (k, v) in self.vertices.iter().enumerate() {
            if (v - z).norm() <= 1e-14 * (1.0 + v.norm()) {
                return Ok(Complex64::from_polar(1.0, self.thetas[k]));
            }
        }
        let mut best = (0, f64::INFINITY);
        for k in 0..n {
            let (p, q) = (self.vertices[k], self.vertices[(k + 1) % n]);
            let t = (((z - p) * (q - p).conj()).re / (q - p).norm_sqr()).clamp(0.0, 1.0);
            let d = (p + (q - p) * t - z).norm();
            if d < best.1 {
                best = (k, d);
            }
        }
        let k = best.0;
        let (p, q) = (self.vertices[k], self.vertices[(k + 1) % n]);
        let target = (z - p).norm() / (q - p).norm();
        let t0 = self.thetas[k];
        let mut t1 = self.thetas[(k + 1) % n];
        while t1 <= t0 {
            t1 += TAU;
        }
        let (mut lo, mut hi) = (t0, t1);
        for _ in 0..200 {
            if hi - lo < 1e-15 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let frac = (self.psi_circle(mid) - p).norm() / (q - p).norm();
            if frac < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Complex64::from_polar(1.0, 0.5 * (lo + hi)))
    }

    /// Exterior `Φ`: damped Newton on `Ψ(w) = z`.
    ///
    /// Near a vertex `z_k` the iteration runs in `τ = ν^{1+β_k}`,
    /// `ν = (w − w_k)/w_k`, in which `Ψ` is close to linear.
    fn phi_exterior(&self, z: Complex64, diam: f64) -> Result<Complex64> {
        let n = self.vertices.len();
        let min_side = (0..n)
            .map(|k| (self.vertices[(k + 1) % n] - self.vertices[k]).norm())
            .fold(f64::INFINITY, f64::min);
        let (k, dk) = self
            .vertices
            .iter()
            .enumerate()
            .map(|(k, v)| (k, (v - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("polygon has vertices");
        let tol = 1e-14 * diam;
        if dk < 0.25 * min_side {
            if let Some(w) = self.newton_corner(k, z, tol) {
                return Ok(w);
            }
        }
        let mut w = self
            .table
            .iter()
            .min_by(|a, b| (a.1 - z).norm().total_cmp(&(b.1 - z).norm()))
            .map(|e| e.0)
            .unwrap_or(c64(1.0, 0.0));
        let centroid = self.vertices.iter().sum::<Complex64>() / n as f64;
        if (z - centroid).norm() > 4.0 * diam {
            w = (z - centroid) / self.a;
        }
        let mut err = (self.psi(w) - z).norm();
        for _ in 0..200 {
            if err <= tol {
                break;
            }
            let dw = (self.psi(w) - z) / (self.integrand(w) * self.a);
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-6 {
                let mut wn = w - dw * t;
                if wn.norm() < 1.0 {
                    wn /= wn.norm();
                }
                let en = (self.psi(wn) - z).norm();
                if en < err || (err.is_nan() && en.is_finite()) {
                    w = wn;
                    err = en;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if err.is_nan() || err > 1e-9 * diam || !w.is_finite() {
            return Err(Error::Internal(format!(
                "phi did not converge at {z}: residual {err:e}"
            )));
        }
        Ok(w)
    }

    /// `∏_{j≠k} (1 − w_j/w_k)^{β_j}`.
    fn prevertex_factor(&self, k: usize) -> Complex64 {
        let wk = Complex64::from_polar(1.0, self.thetas[k]);
        self.thetas
            .iter()
            .zip(&self.betas)
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, (t, b))| (c64(1.0, 0.0) - Complex64::from_polar(1.0, *t) / wk).powf(*b))
            .product()
    }

    fn newton_corner(&self, k: usize, z: Complex64, tol: f64) -> Option<Complex64> {
        let wk = Complex64::from_polar(1.0, self.thetas[k]);
        let p = 1.0 + self.betas[k];
        let gk = self.prevertex_factor(k);
        let w_of = |tau: Complex64| wk + wk * tau.powf(1.0 / p);
        let mut tau = (z - self.vertices[k]) * p / (gk * wk * self.a);
        let mut w = w_of(tau);
        let mut err = (self.psi(w) - z).norm();
        for _ in 0..100 {
            if err <= tol {
                break;
            }
            let nu = (w - wk) / wk;
            if nu.norm() == 0.0 {
                return None;
            }
            // dw/dτ = w_k ν^{1−p} / p
            let dwdtau = wk * nu.powf(1.0 - p) / p;
            let dtau = (self.psi(w) - z) / (self.integrand(w) * self.a * dwdtau);
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-6 {
                let tn = tau - dtau * t;
                let wn = w_of(tn);
                if wn.norm() >= 1.0 - 1e-15 {
                    let en = (self.psi(wn) - z).norm();
                    if en < err {
                        tau = tn;
                        w = wn;
                        err = en;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        (err <= 1e3 * tol).then_some(w)
    }

    /// Laurent coefficients by a discrete Fourier transform of `Ψ` on the
    /// unit circle.
    fn laurent(&self, samples: usize, count: usize) -> Vec<Complex64> {
        let values: Vec<Complex64> = (0..samples)
            .into_par_iter()
            .map(|j| self.psi_circle(TAU * j as f64 / samples as f64))
            .collect();
        (0..count)
            .map(|j| {
                let mut s = c64(0.0, 0.0);
                for (m, v) in values.iter().enumerate() {
                    let th = TAU * (m * j % samples) as f64 / samples as f64;
                    s += v * Complex64::from_polar(1.0, th);
                }
                s / samples as f64
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Continuum {
        Continuum::square(c64(0.0, 0.0), 1.0).unwrap()
    }

    /// Capacity of a square of side s: Γ(1/4)² s / (4 π^{3/2}).
    const SQUARE_CAP: f64 = 0.590_170_299_508_048_9;

    #[test]
    fn disk_identity() {
        let m = ExteriorMap::build(&Continuum::unit_disk()).unwrap();
        assert_eq!(m.capacity(), 1.0);
        assert_eq!(m.phi(c64(2.0, 0.0)).unwrap(), c64(2.0, 0.0));
        assert_eq!(m.psi(c64(0.0, 3.0)).unwrap(), c64(0.0, 3.0));
        let z = m.psi(Complex64::from_polar(1.0, 0.7)).unwrap();
        assert!((z.norm() - 1.0).abs() < 1e-15);
        assert!(m.phi(c64(0.1, 0.0)).is_err());
        assert!(m.psi(c64(0.5, 0.0)).is_err());
    }

    #[test]
    fn segment_closed_forms() {
        let m = ExteriorMap::build(&Continuum::unit_segment()).unwrap();
        assert_eq!(m.capacity(), 0.5);
        assert!((m.phi(c64(2.0, 0.0)).unwrap() - (2.0 + 3f64.sqrt())).norm() < 1e-14);
        assert!((m.phi(c64(1.0, 0.0)).unwrap() - 1.0).norm() < 1e-14);
        assert!((m.psi(c64(2.0, 0.0)).unwrap() - 1.25).norm() < 1e-15);
        for delta in [0.5, 1.0, 3.0] {
            let r: f64 = 1.0 + delta;
            let curve = m.level_curve(delta, 64).unwrap();
            let (ax, ay) = ((r + 1.0 / r) / 2.0, (r - 1.0 / r) / 2.0);
            for p in &curve.points {
                assert!(((p.re / ax).powi(2) + (p.im / ay).powi(2) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rotated_segment_normalization() {
        let seg = Continuum::segment(c64(1.0, 1.0), c64(2.0, 3.0)).unwrap();
        let m = ExteriorMap::build(&seg).unwrap();
        let w = c64(1e6, 0.0);
        let ratio = m.psi(w).unwrap() / (w * m.capacity());
        assert!((ratio - 1.0).norm() < 1e-5);
        for bp in seg.boundary_samples(16).unwrap() {
            let w = m.phi_boundary(&bp).unwrap();
            assert!((w.norm() - 1.0).abs() < 1e-12);
            assert!((m.psi(w).unwrap() - bp.location).norm() < 1e-12);
        }
    }

    #[test]
    fn segment_sides_are_distinguished() {
        let seg = Continuum::unit_segment();
        let m = ExteriorMap::build(&seg).unwrap();
        let upper = seg.boundary_point(0.25);
        let lower = seg.boundary_point(0.75);
        assert!(m.phi_boundary(&upper).unwrap().im > 0.0);
        assert!(m.phi_boundary(&lower).unwrap().im < 0.0);
    }

    #[test]
    fn ellipse_round_trip() {
        for (a, b) in [(2.0, 1.0), (1.0, 3.0)] {
            let e = Continuum::ellipse(c64(0.5, -0.5), a, b).unwrap();
            let m = ExteriorMap::build(&e).unwrap();
            assert!((m.capacity() - (a + b) / 2.0).abs() < 1e-15);
            for j in 0..32 {
                let w = Complex64::from_polar(1.0 + 0.1 * j as f64, 0.37 * j as f64);
                let back = m.phi(m.psi(w).unwrap()).unwrap();
                assert!((back - w).norm() < 1e-12, "{w} -> {back}");
            }
            for bp in e.boundary_samples(32).unwrap() {
                assert!((m.phi(bp.location).unwrap().norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rho_closed_forms() {
        let disk = ExteriorMap::build(&Continuum::unit_disk()).unwrap();
        let seg = ExteriorMap::build(&Continuum::unit_segment()).unwrap();
        for delta in [0.1, 0.01, 0.001] {
            let z = Complex64::from_polar(1.0, 1.234);
            assert!((disk.rho_delta(z, delta).unwrap() - delta).abs() < 1e-12);
            let want = delta * delta / (2.0 * (1.0 + delta));
            assert!((seg.rho_delta(c64(1.0, 0.0), delta).unwrap() - want).abs() < 1e-12);
            let r = 1.0 + delta;
            let want0 = (r - 1.0 / r) / 2.0;
            assert!((seg.rho_delta(c64(0.0, 0.0), delta).unwrap() - want0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_rho_matches_closed_form() {
        let seg = ExteriorMap::build(&Continuum::unit_segment()).unwrap();
        for (z, delta) in [
            (c64(1.0, 0.0), 0.1),
            (c64(0.3, 0.0), 0.05),
            (c64(-0.9, 0.2), 0.3),
        ] {
            let exact = seg.rho_delta(z, delta).unwrap();
            let sampled = seg.rho_delta_sampled(z, delta).unwrap();
            assert!(
                (exact - sampled).abs() <= 1e-6 * exact,
                "{exact} vs {sampled}"
            );
        }
    }

    #[test]
    fn faber_polynomials_of_segment_are_chebyshev() {
        let m = ExteriorMap::build(&Continuum::unit_segment()).unwrap();
        let f = m.faber_polynomials(6, Frame::RAW);
        for x in [-0.9, -0.2, 0.4, 1.0] {
            for (k, fk) in f.iter().enumerate().skip(1) {
                let want = 2.0 * (k as f64 * f64::acos(x)).cos();
                assert!((fk.eval(c64(x, 0.0)) - want).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn square_symmetric_prevertices() {
        let m = ExteriorMap::build(&square()).unwrap();
        let s = m.summary();
        assert!(s.residual <= 1e-6);
        for (k, w) in s.prevertices.iter().enumerate() {
            let want = Complex64::from_polar(1.0, -0.75 * PI + 0.5 * PI * k as f64);
            assert!((w - want).norm() < 1e-8, "prevertex {k}: {w}");
        }
        assert!((m.capacity() - SQUARE_CAP).abs() < 1e-5, "{}", m.capacity());
    }

    /// Capacity oracle independent of the parameter solve: the Laurent
    /// coefficient of `w` equals the mean of `Ψ(e^{iθ}) e^{−iθ}`, computed
    /// here from the boundary correspondence by a plain Riemann sum.
    #[test]
    fn square_capacity_by_boundary_correspondence() {
        let m = ExteriorMap::build(&square()).unwrap();
        let k = 4096;
        let mean: Complex64 = (0..k)
            .map(|j| {
                let th = TAU * (j as f64 + 0.5) / k as f64;
                let w = Complex64::from_polar(1.0, th);
                m.psi(w).unwrap() / w
            })
            .sum::<Complex64>()
            / k as f64;
        assert!((mean.re - m.capacity()).abs() < 1e-5);
        assert!(mean.im.abs() < 1e-8);
    }

    #[test]
    fn square_boundary_and_round_trip() {
        let sq = square();
        let m = ExteriorMap::build(&sq).unwrap();
        for bp in sq.boundary_samples(40).unwrap() {
            let w = m.phi(bp.location).unwrap();
            assert!((w.norm() - 1.0).abs() < 1e-6);
            assert!((m.psi(w).unwrap() - bp.location).norm() < 1e-8);
        }
        let mut worst: f64 = 0.0;
        for j in 0..256 {
            let r = 1.001 + 2.999 * (j as f64 / 255.0).powi(2);
            let w = Complex64::from_polar(r, 0.61 * j as f64);
            let back = m.phi(m.psi(w).unwrap()).unwrap();
            worst = worst.max((back - w).norm());
        }
        assert!(worst <= 1e-8, "round trip {worst:e}");
    }

    #[test]
    fn square_level_curve_close_to_square() {
        let sq = square();
        let m = ExteriorMap::build(&sq).unwrap();
        let curve = m.level_curve(0.01, 256).unwrap();
        for p in &curve.points {
            assert!(sq.distance_to_boundary(*p) < 0.05);
            assert!(((m.phi(*p).unwrap()).norm() - 1.01).abs() < 1e-8);
        }
    }

    #[test]
    fn l_shape_map_builds() {
        let l = Continuum::l_shape();
        let m = ExteriorMap::build(&l).unwrap();
        assert!(m.summary().residual <= 1e-6);
        for bp in l.boundary_samples(24).unwrap() {
            let w = m.phi(bp.location).unwrap();
            let e = (m.psi(w).unwrap() - bp.location).norm();
            assert!(e < 1e-7, "{} err {e:e} w {w}", bp.location);
        }
        let z = c64(1.5, 1.5);
        let w = m.phi(z).unwrap();
        assert!(w.norm() > 1.0, "{w} {}", m.psi(w).unwrap());
        assert!((m.psi(w).unwrap() - z).norm() < 1e-9);
    }

    #[test]
    fn square_faber_reproduces_cauchy_kernel() {
        // 1/(ξ − z) = Σ F_k(z) w^{-k-1} / Ψ'(w) for ξ = Ψ(w) outside.
        let sq = square();
        let m = ExteriorMap::build(&sq).unwrap();
        let f = m.faber_polynomials(40, Frame::for_continuum(&sq));
        let w = c64(2.5, 0.5);
        let xi = m.psi(w).unwrap();
        let dpsi = m.psi_prime(w).unwrap();
        let z = c64(0.1, 0.2);
        let approx: Complex64 = f
            .iter()
            .enumerate()
            .map(|(k, fk)| fk.eval(z) * w.powi(-(k as i32) - 1))
            .sum::<Complex64>()
            / dpsi;
        assert!(
            (approx - 1.0 / (xi - z)).norm() < 1e-6,
            "{approx} vs {}",
            1.0 / (xi - z)
        );
    }
}
