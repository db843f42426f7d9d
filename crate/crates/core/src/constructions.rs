//! Approximation with interpolation: Walsh correction, the damped
//! kernel correction (Theorem 1), Hermite correction (Theorem 2d) and the
//! Fekete-node construction with degree `(1+ε)N` (Theorem 3).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{dyadic_grid, global_modulus_profile, near_best, ModulusProfile, DEFAULT_TOL};
use crate::c64;
use crate::conformal::ExteriorMap;
use crate::error::{invalid, Error, Result};
use crate::extension::{area_integral_tn, extend, primitive, AreaOptions, ExtensionOptions};
use crate::fit::{interior_decay_fit, semilog_fit, DecayFit, LineFit};
use crate::functions::FunctionHandle;
use crate::geometry::{Continuum, Location};
use crate::kernels::{boundary_point_of, KernelBuilder, KernelSpec};
use crate::polynomial::{node_basis, node_poly, CPolynomial, Frame, NodeSet};

/// A closed disk `K ⊂ E⁰`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Compact {
    #[serde(with = "crate::serde_c64")]
    pub center: Complex64,
    pub radius: f64,
}

impl Compact {
    pub fn new(center: Complex64, radius: f64) -> Self {
        Compact { center, radius }
    }

    /// Parses `cx,cy,r`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidArgument(format!("bad compact '{s}', expected cx,cy,r")))?;
        if parts.len() != 3 || parts[2] <= 0.0 {
            return invalid(format!("bad compact '{s}', expected cx,cy,r with r > 0"));
        }
        Ok(Compact::new(c64(parts[0], parts[1]), parts[2]))
    }

    /// Circle and interior points of `K`.
    pub fn samples(&self, m: usize) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = (0..m)
            .map(|j| {
                self.center + Complex64::from_polar(self.radius, 2.0 * PI * j as f64 / m as f64)
            })
            .collect();
        for i in 1..4 {
            let r = self.radius * i as f64 / 4.0;
            out.extend((0..m / 4).map(|j| {
                self.center + Complex64::from_polar(r, 2.0 * PI * j as f64 / (m / 4) as f64)
            }));
        }
        out.push(self.center);
        out
    }

    pub fn check_inside(&self, e: &Continuum) -> Result<()> {
        if self
            .samples(64)
            .iter()
            .any(|z| e.classify(*z) != Location::Interior)
        {
            return invalid(format!("compact {self:?} is not inside the interior of E"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Fast,
    Constructive,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub boundary_samples: usize,
    /// Lower bound on the sample count for near-best fits.
    pub fit_samples: usize,
    pub fit_tol: f64,
    /// Centers for the global modulus profile.
    pub profile_centers: usize,
    pub extension: ExtensionOptions,
    pub area_budget: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            boundary_samples: 512,
            fit_samples: 512,
            fit_tol: DEFAULT_TOL,
            profile_centers: 64,
            extension: ExtensionOptions::default(),
            area_budget: AreaOptions::default().budget,
        }
    }
}

/// Domain, function and the modulus profile used for the ratio tables.
#[derive(Debug)]
pub struct Problem {
    pub e: Continuum,
    pub map: ExteriorMap,
    pub f: FunctionHandle,
    pub k: usize,
    /// Derivative order whose modulus enters the bound (`0` except for
    /// Theorem 2d).
    pub r: usize,
    /// `ω_{f^{(r)},k,E}` on a dyadic grid reaching `min_z ρ_{1/n_max}(z)`.
    pub profile: ModulusProfile,
    pub compacts: Vec<Compact>,
    pub opts: PipelineOptions,
}

impl Problem {
    pub fn new(
        e: Continuum,
        f: FunctionHandle,
        k: usize,
        r: usize,
        compacts: Vec<Compact>,
        max_degree: usize,
        opts: PipelineOptions,
    ) -> Result<Self> {
        if k == 0 {
            return invalid("k must be at least 1");
        }
        for c in &compacts {
            c.check_inside(&e)?;
        }
        let map = ExteriorMap::build(&e)?;
        let rho_min = e
            .boundary_samples(256)?
            .iter()
            .map(|b| map.rho_delta(b.location, 1.0 / max_degree.max(1) as f64))
            .try_fold(f64::INFINITY, |a, r| r.map(|r| a.min(r)))?;
        let levels = ((e.diameter() / rho_min).log2().ceil() as usize + 1).clamp(4, 20);
        let fr = f.derived(r)?;
        let profile =
            global_modulus_profile(&fr, &e, k, &dyadic_grid(&e, levels), opts.profile_centers)?;
        Ok(Problem {
            e,
            map,
            f,
            k,
            r,
            profile,
            compacts,
            opts,
        })
    }

    pub fn frame(&self) -> Frame {
        Frame::for_continuum(&self.e)
    }

    fn near_best(&self, n: usize) -> Result<CPolynomial> {
        let m = self.opts.fit_samples.max(16 * (n + 1));
        Ok(near_best(&self.f, &self.e, n, m, self.opts.fit_tol)?.polynomial)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodeResidual {
    #[serde(with = "crate::serde_c64")]
    pub node: Complex64,
    pub order: usize,
    pub residual: f64,
    /// `residual / (1 + |f^{(l)}(z_j)|)`.
    pub relative: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioRow {
    #[serde(with = "crate::serde_c64")]
    pub z: Complex64,
    pub error: f64,
    pub rho: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InteriorRow {
    pub compact: Compact,
    pub error: f64,
}

/// Near/far split of the nodes for Theorem 3 at one boundary point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupRow {
    #[serde(with = "crate::serde_c64")]
    pub z: Complex64,
    pub near: usize,
    pub near_sum: f64,
    pub far_sum: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Theorem3Info {
    pub m: usize,
    pub power: usize,
    pub l: usize,
    /// `max_z #{j : |Φ(z_j) − Φ(z)| ≤ 1/m}`.
    pub mu: usize,
    pub groups: Vec<GroupRow>,
    pub t_error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineResult {
    pub theorem: String,
    pub n: usize,
    pub p: CPolynomial,
    pub t: CPolynomial,
    pub node_residuals: Vec<NodeResidual>,
    pub max_relative_residual: f64,
    /// One table per derivative order `l = 0..=r`.
    pub boundary: Vec<Vec<RatioRow>>,
    pub boundary_sup: f64,
    pub max_ratio: Vec<f64>,
    pub interior: Vec<InteriorRow>,
    pub max_modulus_ok: bool,
    /// Whether the interpolation correction used interior damping.
    pub damped: bool,
    pub theorem3: Option<Theorem3Info>,
}

/// `p_n = p* + Σ_j q(z)/(q′(z_j)(z − z_j))·(f(z_j) − p*(z_j))`.
pub fn walsh_correct(
    pstar: &CPolynomial,
    f: &FunctionHandle,
    nodes: &NodeSet,
) -> Result<CPolynomial> {
    let frame = pstar.frame();
    let (_, dq) = node_poly(frame, nodes)?;
    let mut p = pstar.clone();
    for (j, (zj, dqj)) in nodes.nodes().iter().zip(&dq).enumerate() {
        let res = f.eval(*zj) - pstar.eval(*zj);
        if res == c64(0.0, 0.0) {
            continue;
        }
        let basis = node_basis(frame, nodes, j);
        p = &p + &basis.scale_by(res / dqj);
    }
    Ok(p)
}

fn node_location(e: &Continuum, z: Complex64) -> Location {
    if e.distance_to_boundary(z) <= 1e-10 * e.diameter().max(1.0) {
        Location::Boundary
    } else {
        e.classify(z)
    }
}

/// `V_{n/2+1}(z_j, ·)`: `1 − (z_j − z)T_{[n/2]}(z_j, z)` at boundary nodes,
/// `1` at interior nodes. Without damping (non-convex `E`) the powered
/// kernel of budget `⌊n/2⌋` is used.
fn correction_factor(
    builder: &KernelBuilder<'_>,
    e: &Continuum,
    zj: Complex64,
    n: usize,
    k: usize,
) -> Result<(CPolynomial, bool)> {
    let frame = builder.frame();
    match node_location(e, zj) {
        Location::Interior => Ok((CPolynomial::constant(frame, c64(1.0, 0.0)), true)),
        Location::Exterior => invalid(format!("node {zj} is outside E")),
        Location::Boundary => {
            let bp = boundary_point_of(e, zj);
            match builder.combined_kernel(n / 2, k, &bp) {
                Ok(ck) => Ok((ck.v, true)),
                Err(Error::Unsupported(_)) => {
                    let spec = KernelSpec::for_budget(n / 2, k)?;
                    let theta = builder.map().boundary_angle(&bp)?;
                    Ok((builder.powered_v(&spec, zj, theta)?, false))
                }
                Err(err) => Err(err),
            }
        }
    }
}

fn check_degree(p: &CPolynomial, n: usize) -> Result<()> {
    if p.degree() > n {
        return Err(Error::Internal(format!(
            "degree {} exceeds the budget {n}",
            p.degree()
        )));
    }
    Ok(())
}

/// Theorem 1: `p_n = t_n + Σ_j q(z)/(q′(z_j)(z−z_j))·(f − t_n)(z_j)·V(z_j, z)`.
pub fn theorem1(
    problem: &Problem,
    nodes: &NodeSet,
    n: usize,
    mode: Mode,
) -> Result<PipelineResult> {
    let big_n = nodes.len();
    if n < big_n + problem.k {
        return invalid(format!(
            "n = {n} must be at least N + k = {}",
            big_n + problem.k
        ));
    }
    if n <= 2 * big_n {
        return invalid(format!("n = {n} must exceed 2N = {}", 2 * big_n));
    }
    let builder = KernelBuilder::new(&problem.map);
    let frame = builder.frame();
    let t = match mode {
        Mode::Fast => problem.near_best(n / 2)?.to_frame(frame),
        Mode::Constructive => {
            let anchor = problem.e.centroid();
            let big_f = primitive(&problem.f, &problem.e, anchor)?.handle();
            let ext = extend(&big_f, &problem.e, problem.k + 1, problem.opts.extension)?;
            area_integral_tn(
                &ext,
                &builder,
                n,
                AreaOptions {
                    m: problem.k,
                    budget: problem.opts.area_budget,
                },
            )?
        }
    };
    let (_, dq) = node_poly(frame, nodes)?;
    let terms = nodes
        .nodes()
        .par_iter()
        .zip(dq.par_iter())
        .enumerate()
        .map(|(j, (zj, dqj))| -> Result<(CPolynomial, bool)> {
            let res = problem.f.eval(*zj) - t.eval(*zj);
            let (v, damped) = correction_factor(&builder, &problem.e, *zj, n, problem.k)?;
            let basis = node_basis(frame, nodes, j).scale_by(res / dqj);
            Ok((&basis * &v, damped))
        })
        .collect::<Result<Vec<_>>>()?;
    let damped = terms.iter().all(|t| t.1);
    let u = terms
        .into_iter()
        .fold(CPolynomial::zero(frame), |acc, (term, _)| &acc + &term);
    let p = &t + &u;
    check_degree(&p, n)?;
    finish(problem, "1", n, p, t, nodes, 0, damped, None)
}

fn taylor(p: &CPolynomial, z: Complex64, r: usize) -> Vec<Complex64> {
    let mut d = p.eval_derivatives(z, r);
    let mut fact = 1.0;
    for (l, v) in d.iter_mut().enumerate() {
        if l > 0 {
            fact *= l as f64;
        }
        *v /= fact;
    }
    d
}

fn series_mul(a: &[Complex64], b: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut out = vec![c64(0.0, 0.0); len];
    for (i, x) in a.iter().enumerate().take(len) {
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn series_inv(a: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut out = vec![c64(0.0, 0.0); len];
    out[0] = 1.0 / a[0];
    for s in 1..len {
        let mut acc = c64(0.0, 0.0);
        for j in 1..=s.min(a.len() - 1) {
            acc += a[j] * out[s - j];
        }
        out[s] = -acc / a[0];
    }
    out
}

/// Hermite correction: `u_n(z) = Σ_j q^{r+1}(z)/(z−z_j)^{r+1} V(z_j, z)
/// Σ_s A_{j,s}(z − z_j)^s` with `V(ζ, z) = 1 − ((ζ−z)^{r+1}/r!)∂_z^r K(ζ, z)`,
/// so that `u_n^{(l)}(z_j) = f^{(l)}(z_j) − t_n^{(l)}(z_j)` for `l ≤ r`.
pub fn hermite_correct(
    t: &CPolynomial,
    f: &FunctionHandle,
    nodes: &NodeSet,
    builder: &KernelBuilder<'_>,
    n: usize,
    power: usize,
) -> Result<CPolynomial> {
    let r = nodes.r();
    let e = builder.map().domain();
    let frame = builder.frame();
    let t = t.to_frame(frame);
    let mut u = CPolynomial::zero(frame);
    let mut fact_r = 1.0;
    for i in 1..=r {
        fact_r *= i as f64;
    }
    for (j, zj) in nodes.nodes().iter().enumerate() {
        if node_location(e, *zj) != Location::Boundary {
            return invalid(format!("Hermite node {zj} is not on the boundary"));
        }
        let derivs = f.derivatives(*zj, r)?;
        let tt = taylor(&t, *zj, r);
        let mut fact = 1.0;
        let resid: Vec<Complex64> = (0..=r)
            .map(|l| {
                if l > 0 {
                    fact *= l as f64;
                }
                derivs[l] / fact - tt[l]
            })
            .collect();
        // q^{r+1}/(z − z_j)^{r+1}
        let hp = node_basis(frame, nodes, j).pow(r + 1);
        // Taylor coefficients of (z − z_j)^{r+1}/q^{r+1} = 1/h^{r+1}
        let g = series_inv(&taylor(&hp, *zj, r), r + 1);
        let a = series_mul(&resid, &g, r + 1);
        let mut poly = CPolynomial::constant(frame, a[r]);
        for s in (0..r).rev() {
            poly = &poly.mul_linear(*zj) + &CPolynomial::constant(frame, a[s]);
        }
        // K of degree ≤ ⌊n/2⌋ − 1 keeps deg V ≤ ⌊n/2⌋.
        let bp = boundary_point_of(e, *zj);
        let budget = n / 2 - 1;
        let kpoly = match builder.combined_kernel(budget, power, &bp) {
            Ok(ck) => ck.t,
            Err(Error::Unsupported(_)) => {
                let spec = KernelSpec::for_budget(budget, power)?;
                builder.powered_kernel(&spec, *zj, builder.map().boundary_angle(&bp)?)?
            }
            Err(err) => return Err(err),
        };
        // (ζ − z)^{r+1} = (−1)^{r+1}(z − ζ)^{r+1}
        let mut lin = CPolynomial::constant(frame, c64(1.0, 0.0));
        for _ in 0..=r {
            lin = lin.mul_linear(*zj);
        }
        let sign = if (r + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
        let v = &CPolynomial::constant(frame, c64(1.0, 0.0))
            - &(&lin * &kpoly.nth_derivative(r)).scale_by(c64(sign / fact_r, 0.0));
        u = &u + &(&(&hp * &v) * &poly);
    }
    Ok(u)
}

/// Theorem 2d: `p = t_n + hermite_correct`, with `t_n` near-best of degree
/// `⌊n/2⌋` and ratio tables `|f^{(l)} − p^{(l)}| / (ρ^{r−l} ω_{f^{(r)}}(ρ))`.
pub fn theorem2d(problem: &Problem, nodes: &NodeSet, n: usize) -> Result<PipelineResult> {
    let r = nodes.r();
    if r != problem.r {
        return invalid(format!(
            "node multiplicity r = {r} differs from the problem's r = {}",
            problem.r
        ));
    }
    let big_n = nodes.len();
    if n < big_n * r + problem.k || n <= 2 * big_n * (r + 1) {
        return invalid(format!(
            "n = {n} needs n ≥ Nr + k = {} and n > 2N(r+1) = {}",
            big_n * r + problem.k,
            2 * big_n * (r + 1)
        ));
    }
    let builder = KernelBuilder::new(&problem.map);
    let t = problem.near_best(n / 2)?.to_frame(builder.frame());
    let u = hermite_correct(&t, &problem.f, nodes, &builder, n, problem.k + r)?;
    let p = &t + &u;
    check_degree(&p, n)?;
    finish(problem, "2d", n, p, t, nodes, r, true, None)
}

/// Smallest `l ∈ 1..=8` with `ρ_{1/m}(z)/|ζ − z| ≤ 2(1/(m|Φ(ζ) − Φ(z)|))^{2/l}`
/// on all calibration pairs with `m|Φ(ζ) − Φ(z)| ≥ 1`; 8 if none.
pub fn calibrate_l(map: &ExteriorMap, m: usize, grid: usize) -> Result<usize> {
    let e = map.domain();
    let pts: Vec<(Complex64, Complex64, f64)> = e
        .boundary_samples(grid)?
        .iter()
        .map(|b| -> Result<_> {
            Ok((
                b.location,
                map.phi_boundary(b)?,
                map.rho_delta(b.location, 1.0 / m as f64)?,
            ))
        })
        .collect::<Result<_>>()?;
    let mf = m as f64;
    'outer: for l in 1..=8usize {
        for (z, wz, rho) in &pts {
            for (zeta, wzeta, _) in &pts {
                let dw = (wzeta - wz).norm();
                let dz = (zeta - z).norm();
                if mf * dw < 1.0 || dz <= 0.0 {
                    continue;
                }
                if rho / dz > 2.0 * (1.0 / (mf * dw)).powf(2.0 / l as f64) {
                    continue 'outer;
                }
            }
        }
        return Ok(l);
    }
    Ok(8)
}

/// Theorem 3: `p = t_N + u_{N+m}` with `m = ⌊εN⌋`,
/// `V_{m+1} = 1 − (ζ − z)Q_m` and `Q_m` the powered kernel of power
/// `min(k + l, ⌊(m+1)/2⌋)` (at least 1).
pub fn theorem3(problem: &Problem, nodes: &NodeSet, epsilon: f64) -> Result<PipelineResult> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return invalid(format!("ε must lie in (0, 1], got {epsilon}"));
    }
    if !problem.e.has_interior() {
        return invalid("Theorem 3 needs a Jordan domain");
    }
    let big_n = nodes.len();
    let m = (epsilon * big_n as f64).floor() as usize;
    let builder = KernelBuilder::new(&problem.map);
    let frame = builder.frame();
    let t = problem.near_best(big_n)?.to_frame(frame);
    let (_, dq) = node_poly(frame, nodes)?;
    let l = if m >= 1 {
        calibrate_l(&problem.map, m, 64)?
    } else {
        0
    };
    let power = (problem.k + l).min(m.div_ceil(2)).max(1);
    let e = &problem.e;
    let mut info = Theorem3Info {
        m,
        power,
        l,
        ..Default::default()
    };
    let mut terms = Vec::with_capacity(big_n);
    for (j, (zj, dqj)) in nodes.nodes().iter().zip(&dq).enumerate() {
        if node_location(e, *zj) != Location::Boundary {
            return invalid(format!("Theorem 3 node {zj} is not on the boundary"));
        }
        let res = problem.f.eval(*zj) - t.eval(*zj);
        let v = if m >= 2 {
            let spec = KernelSpec::for_budget(m, power)?;
            let bp = boundary_point_of(e, *zj);
            builder.powered_v(&spec, *zj, problem.map.boundary_angle(&bp)?)?
        } else {
            CPolynomial::constant(frame, c64(1.0, 0.0))
        };
        terms.push(&node_basis(frame, nodes, j).scale_by(res / dqj) * &v);
    }
    let u = terms
        .iter()
        .fold(CPolynomial::zero(frame), |acc, t| &acc + t);
    let p = &t + &u;
    check_degree(&p, big_n + m)?;

    let node_w: Vec<Complex64> = nodes
        .nodes()
        .iter()
        .map(|z| problem.map.phi_boundary(&boundary_point_of(e, *z)))
        .collect::<Result<_>>()?;
    let radius = if m >= 1 {
        1.0 / m as f64
    } else {
        f64::INFINITY
    };
    for b in e.boundary_samples(problem.opts.boundary_samples)? {
        let w = problem.map.phi_boundary(&b)?;
        let mut row = GroupRow {
            z: b.location,
            near: 0,
            near_sum: 0.0,
            far_sum: 0.0,
        };
        for (wj, term) in node_w.iter().zip(&terms) {
            let v = term.eval(b.location).norm();
            if (wj - w).norm() <= radius {
                row.near += 1;
                row.near_sum += v;
            } else {
                row.far_sum += v;
            }
        }
        info.mu = info.mu.max(row.near);
        info.groups.push(row);
    }
    info.t_error = e
        .boundary_samples(problem.opts.boundary_samples)?
        .iter()
        .map(|b| (problem.f.eval(b.location) - t.eval(b.location)).norm())
        .fold(0.0, f64::max);
    let n = big_n + m;
    finish(problem, "3", n, p, t, nodes, 0, false, Some(info))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    problem: &Problem,
    theorem: &str,
    n: usize,
    p: CPolynomial,
    t: CPolynomial,
    nodes: &NodeSet,
    r: usize,
    damped: bool,
    theorem3: Option<Theorem3Info>,
) -> Result<PipelineResult> {
    let f = &problem.f;
    let mut node_residuals = Vec::new();
    for zj in nodes.nodes() {
        let fd = f.derivatives(*zj, r)?;
        let pd = p.eval_derivatives(*zj, r);
        for l in 0..=r {
            let residual = (fd[l] - pd[l]).norm();
            node_residuals.push(NodeResidual {
                node: *zj,
                order: l,
                residual,
                relative: residual / (1.0 + fd[l].norm()),
            });
        }
    }
    let max_relative_residual = node_residuals
        .iter()
        .map(|x| x.relative)
        .fold(0.0, f64::max);
    let samples = problem.e.boundary_samples(problem.opts.boundary_samples)?;
    let delta = 1.0 / n as f64;
    let boundary: Vec<Vec<RatioRow>> = (0..=r)
        .map(|l| {
            samples
                .par_iter()
                .map(|b| -> Result<RatioRow> {
                    let z = b.location;
                    let error = (f.derivative(z, l)? - p.eval_derivatives(z, l)[l]).norm();
                    let rho = problem.map.rho_delta(z, delta)?;
                    let bound = rho.powi((r - l) as i32) * problem.profile.eval(rho);
                    Ok(RatioRow {
                        z,
                        error,
                        rho,
                        bound,
                        ratio: error / bound,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let boundary_sup = boundary[0].iter().map(|x| x.error).fold(0.0, f64::max);
    let max_ratio: Vec<f64> = boundary
        .iter()
        .map(|tab| tab.iter().map(|x| x.ratio).fold(0.0, f64::max))
        .collect();
    let interior: Vec<InteriorRow> = problem
        .compacts
        .iter()
        .map(|c| InteriorRow {
            compact: *c,
            error: c
                .samples(256)
                .iter()
                .map(|z| (f.eval(*z) - p.eval(*z)).norm())
                .fold(0.0, f64::max),
        })
        .collect();
    let max_modulus_ok = interior.iter().all(|row| row.error <= boundary_sup + 1e-12);
    Ok(PipelineResult {
        theorem: theorem.into(),
        n,
        p,
        t,
        node_residuals,
        max_relative_residual,
        boundary,
        boundary_sup,
        max_ratio,
        interior,
        max_modulus_ok,
        damped,
        theorem3,
    })
}

/// Smallest `C` with `ω(ρ(ζ))·(ρ(z)/(|z−ζ| + ρ(z)))^k ≤ C·ω(ρ(z))` over all
/// pairs of `m` boundary samples, `ρ = ρ_{1/n}`.
pub fn localization_constant(problem: &Problem, n: usize, m: usize) -> Result<f64> {
    let pts: Vec<(Complex64, f64)> = problem
        .e
        .boundary_samples(m)?
        .iter()
        .map(|b| {
            Ok((
                b.location,
                problem.map.rho_delta(b.location, 1.0 / n as f64)?,
            ))
        })
        .collect::<Result<_>>()?;
    let k = problem.k as i32;
    let worst = pts
        .par_iter()
        .map(|(z, rz)| {
            let wz = problem.profile.eval(*rz);
            pts.iter()
                .map(|(zeta, rzeta)| {
                    let t = rz / ((z - zeta).norm() + rz);
                    problem.profile.eval(*rzeta) * t.powi(k) / wz
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// A degree sweep with fitted rates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sweep {
    pub results: Vec<PipelineResult>,
    /// `log(boundary sup)` against `n`.
    pub boundary_fit: Option<LineFit>,
    /// `log(interior error)` against `n`, first compact.
    pub interior_fit: Option<LineFit>,
    /// `c₃ exp(−c₄ n^α)` fit of the first compact's error.
    pub decay: Option<DecayFit>,
    /// Spread `max/min` of `max_ratio[0]` over the sweep.
    pub ratio_drift: f64,
}

pub fn summarize(results: Vec<PipelineResult>) -> Sweep {
    let n: Vec<f64> = results.iter().map(|r| r.n as f64).collect();
    let b: Vec<f64> = results.iter().map(|r| r.boundary_sup).collect();
    let i: Vec<f64> = results
        .iter()
        .filter_map(|r| r.interior.first().map(|x| x.error))
        .collect();
    let has_interior = i.len() == results.len() && !i.is_empty();
    let ratios: Vec<f64> = results.iter().map(|r| r.max_ratio[0]).collect();
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Sweep {
        boundary_fit: semilog_fit(&n, &b),
        interior_fit: if has_interior {
            semilog_fit(&n, &i)
        } else {
            None
        },
        decay: if has_interior {
            interior_decay_fit(&n, &i)
        } else {
            None
        },
        ratio_drift: hi / lo,
        results,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{FunctionSpec, Smoothness};

    fn disk() -> Continuum {
        Continuum::unit_disk()
    }

    fn exp_fn() -> FunctionHandle {
        FunctionSpec::parse("entire")
            .unwrap()
            .build(&disk())
            .unwrap()
    }

    #[test]
    fn walsh_examples() {
        let f = FunctionHandle::new("z^2", 8, Smoothness::Analytic, |z, l| match l {
            0 => z * z,
            1 => 2.0 * z,
            2 => c64(2.0, 0.0),
            _ => c64(0.0, 0.0),
        });
        let nodes = NodeSet::new(vec![c64(1.0, 0.0)], 0).unwrap();
        let p = walsh_correct(&CPolynomial::zero(Frame::RAW), &f, &nodes).unwrap();
        assert!((&p - &CPolynomial::constant(Frame::RAW, c64(1.0, 0.0))).coeff_norm() < 1e-14);
        // Already interpolating: unchanged.
        let pstar = CPolynomial::new(
            Frame::RAW,
            vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)],
        );
        let nodes = NodeSet::new(vec![c64(1.0, 0.0), c64(0.0, 1.0)], 0).unwrap();
        assert!((&walsh_correct(&pstar, &f, &nodes).unwrap() - &pstar).coeff_norm() < 1e-14);
    }

    #[test]
    fn hermite_examples() {
        let e = disk();
        let map = ExteriorMap::build(&e).unwrap();
        let b = KernelBuilder::new(&map);
        let f = FunctionHandle::new("z^2", 8, Smoothness::Analytic, |z, l| match l {
            0 => z * z,
            1 => 2.0 * z,
            2 => c64(2.0, 0.0),
            _ => c64(0.0, 0.0),
        });
        let nodes = NodeSet::new(vec![c64(1.0, 0.0)], 1).unwrap();
        let t = CPolynomial::zero(b.frame());
        let u = hermite_correct(&t, &f, &nodes, &b, 16, 2).unwrap();
        let d = u.eval_derivatives(c64(1.0, 0.0), 1);
        assert!((d[0] - 1.0).norm() < 1e-9 && (d[1] - 2.0).norm() < 1e-9);

        let g = exp_fn();
        let nodes = NodeSet::new(vec![c64(1.0, 0.0), c64(-1.0, 0.0)], 2).unwrap();
        let u = hermite_correct(&t, &g, &nodes, &b, 32, 3).unwrap();
        assert!(u.degree() <= 32);
        for z in [c64(1.0, 0.0), c64(-1.0, 0.0)] {
            let d = u.eval_derivatives(z, 2);
            for dl in &d {
                assert!((dl - z.exp()).norm() < 1e-8);
            }
        }
        // Matching data gives no correction.
        let tp = CPolynomial::new(b.frame(), vec![c64(0.3, 0.1), c64(0.2, 0.0)]);
        let u = hermite_correct(
            &tp,
            &FunctionHandle::from_polynomial(tp.clone()),
            &nodes,
            &b,
            32,
            3,
        )
        .unwrap();
        assert!(u.coeff_norm() < 1e-12);
    }

    #[test]
    fn theorem1_entire_on_disk() {
        let problem = Problem::new(
            disk(),
            exp_fn(),
            1,
            0,
            vec![Compact::new(c64(0.0, 0.0), 0.5)],
            32,
            PipelineOptions::default(),
        )
        .unwrap();
        let nodes = NodeSet::new(vec![c64(1.0, 0.0), c64(0.0, 0.3), c64(-0.6, -0.8)], 0).unwrap();
        let r = theorem1(&problem, &nodes, 32, Mode::Fast).unwrap();
        assert!(r.p.degree() <= 32);
        assert!(r.node_residuals.iter().all(|x| x.residual <= 1e-10));
        assert!(r.boundary_sup <= 1e-6, "{}", r.boundary_sup);
        assert!(r.max_modulus_ok && r.damped);
    }

    #[test]
    fn theorem1_preconditions() {
        let problem = Problem::new(
            disk(),
            exp_fn(),
            1,
            0,
            vec![],
            16,
            PipelineOptions::default(),
        )
        .unwrap();
        let nodes = NodeSet::new(vec![c64(1.0, 0.0), c64(0.0, 1.0), c64(-1.0, 0.0)], 0).unwrap();
        assert!(theorem1(&problem, &nodes, 6, Mode::Fast).is_err());
        let outside = NodeSet::new(vec![c64(2.0, 0.0)], 0).unwrap();
        assert!(theorem1(&problem, &outside, 16, Mode::Fast).is_err());
    }

    #[test]
    fn theorem3_roots_of_unity() {
        let f = FunctionSpec::parse("branch(0.5,1)")
            .unwrap()
            .build(&disk())
            .unwrap();
        let problem =
            Problem::new(disk(), f, 1, 0, vec![], 10, PipelineOptions::default()).unwrap();
        let nodes = NodeSet::new(
            (0..8)
                .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 8.0))
                .collect(),
            0,
        )
        .unwrap();
        let r = theorem3(&problem, &nodes, 0.25).unwrap();
        assert_eq!(r.n, 10);
        assert!(r.p.degree() <= 10);
        assert!(r.max_relative_residual <= 1e-9);
    }

    #[test]
    fn calibrated_l_on_disk_is_two() {
        let map = ExteriorMap::build(&disk()).unwrap();
        for m in [4, 8, 16] {
            assert_eq!(calibrate_l(&map, m, 64).unwrap(), 2);
        }
    }

    #[test]
    fn compact_parsing() {
        let c = Compact::parse("0, 0.1, 0.5").unwrap();
        assert_eq!(c, Compact::new(c64(0.0, 0.1), 0.5));
        assert!(Compact::parse("1,2").is_err());
        assert!(Compact::new(c64(0.0, 0.0), 0.5)
            .check_inside(&disk())
            .is_ok());
        assert!(Compact::new(c64(0.8, 0.0), 0.5)
            .check_inside(&disk())
            .is_err());
    }
}
