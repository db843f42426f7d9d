//! Near-best uniform approximation `E_n(f, E)` and k-th moduli of continuity.
//!
//! `E_n` is approximated by a discrete minimax problem on boundary samples
//! (for `f ∈ A(E)`, `f − p` attains its maximum on `L`). The solver is
//! Lawson's iteratively reweighted least squares on a basis orthogonalised
//! by Arnoldi against the sample points.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::c64;
use crate::error::{invalid, Result};
use crate::functions::{FunctionHandle, Smoothness};
use crate::geometry::{Continuum, Location, Shape};
use crate::polynomial::{CPolynomial, Frame};

pub const LAWSON_MAX_ITER: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-3;
/// Polar grid resolution inside `E ∩ D(z, δ)`.
pub const WINDOW_GRID: usize = 32;

/// Result of a discrete minimax fit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NearBest {
    pub polynomial: CPolynomial,
    /// Discrete sup error on the samples.
    pub error: f64,
    /// Lawson lower bound on the discrete minimax error.
    pub lower_bound: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Arnoldi-orthogonalised monomial basis on a point set.
struct ArnoldiBasis {
    q: DMatrix<Complex64>,
    h: DMatrix<Complex64>,
}

impl ArnoldiBasis {
    fn new(local: &[Complex64], n: usize) -> Self {
        let m = local.len();
        let mut q = DMatrix::<Complex64>::zeros(m, n + 1);
        let mut h = DMatrix::<Complex64>::zeros(n + 1, n.max(1));
        q.column_mut(0).fill(c64(1.0, 0.0));
        let mf = m as f64;
        for k in 0..n {
            let mut v: DVector<Complex64> = DVector::from_iterator(
                m,
                local.iter().zip(q.column(k).iter()).map(|(z, qk)| z * qk),
            );
            for _ in 0..2 {
                for j in 0..=k {
                    let hj = q.column(j).dotc(&v) / mf;
                    h[(j, k)] += hj;
                    v -= q.column(j) * hj;
                }
            }
            let nrm = (v.norm_squared() / mf).sqrt();
            h[(k + 1, k)] = c64(nrm, 0.0);
            let nrm = if nrm > 0.0 { nrm } else { f64::MIN_POSITIVE };
            q.set_column(k + 1, &(v / c64(nrm, 0.0)));
        }
        ArnoldiBasis { q, h }
    }

    fn degree(&self) -> usize {
        self.q.ncols() - 1
    }

    /// `Σ c_k P_k` as a polynomial, using the Arnoldi recurrence.
    fn to_polynomial(&self, c: &DVector<Complex64>, frame: Frame) -> CPolynomial {
        let n = self.degree();
        let zhat = CPolynomial::new(frame, vec![c64(0.0, 0.0), c64(1.0, 0.0)]);
        let mut basis: Vec<CPolynomial> = vec![CPolynomial::constant(frame, c64(1.0, 0.0))];
        for k in 0..n {
            let mut v = &zhat * &basis[k];
            for (j, bj) in basis.iter().enumerate().take(k + 1) {
                v = &v - &bj.scale_by(self.h[(j, k)]);
            }
            let hk = self.h[(k + 1, k)];
            basis.push(if hk.norm() > 0.0 {
                v.scale_by(1.0 / hk)
            } else {
                v
            });
        }
        basis
            .iter()
            .zip(c.iter())
            .fold(CPolynomial::zero(frame), |acc, (b, ck)| {
                &acc + &b.scale_by(*ck)
            })
    }
}

fn weighted_ls(
    q: &DMatrix<Complex64>,
    f: &DVector<Complex64>,
    w: &[f64],
) -> Option<DVector<Complex64>> {
    let (m, n) = q.shape();
    let mut a = q.clone();
    let mut b = f.clone();
    for i in 0..m {
        let s = c64(w[i].sqrt(), 0.0);
        for j in 0..n {
            a[(i, j)] *= s;
        }
        b[i] *= s;
    }
    let qr = a.qr();
    let rhs = qr.q().adjoint() * b;
    qr.r().solve_upper_triangular(&rhs)
}

/// Discrete minimax approximation of `values` on `points` by polynomials of
/// degree `≤ n`, expressed in `frame`.
pub fn lawson(
    points: &[Complex64],
    values: &[Complex64],
    n: usize,
    frame: Frame,
    tol: f64,
) -> Result<NearBest> {
    if points.len() != values.len() || points.is_empty() {
        return invalid("lawson needs matching, nonempty point and value lists");
    }
    if points.len() < n + 1 {
        return invalid(format!(
            "lawson needs at least {} points, got {}",
            n + 1,
            points.len()
        ));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return invalid("function is not finite on the samples");
    }
    let m = points.len();
    let local: Vec<Complex64> = points.iter().map(|z| frame.to_local(*z)).collect();
    let basis = ArnoldiBasis::new(&local, n);
    let f = DVector::from_column_slice(values);
    let scale = values
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut w = vec![1.0 / m as f64; m];
    let mut best: Option<(f64, f64, DVector<Complex64>)> = None;
    let mut iterations = 0;
    let mut converged = false;
    for it in 0..LAWSON_MAX_ITER {
        iterations = it + 1;
        let Some(c) = weighted_ls(&basis.q, &f, &w) else {
            break;
        };
        let r = &f - &basis.q * &c;
        let abs: Vec<f64> = r.iter().map(|x| x.norm()).collect();
        let err = abs.iter().copied().fold(0.0, f64::max);
        let lower = w
            .iter()
            .zip(&abs)
            .map(|(wi, a)| wi * a * a)
            .sum::<f64>()
            .sqrt();
        let lower_best = best.as_ref().map_or(lower, |b| b.1.max(lower));
        if best.as_ref().is_none_or(|b| err < b.0) {
            best = Some((err, lower_best, c));
        } else if let Some(b) = best.as_mut() {
            b.1 = lower_best;
        }
        if err <= (1.0 + tol) * lower_best || err <= 1e-14 * scale {
            converged = true;
            break;
        }
        let total: f64 = w.iter().zip(&abs).map(|(wi, a)| wi * a).sum();
        if total <= 0.0 {
            break;
        }
        for (wi, a) in w.iter_mut().zip(&abs) {
            *wi *= a / total;
        }
    }
    let (error, lower_bound, c) = best.ok_or_else(|| {
        crate::Error::Internal("weighted least squares failed on the first iteration".into())
    })?;
    let polynomial = basis.to_polynomial(&c, frame);
    Ok(NearBest {
        polynomial,
        error,
        lower_bound,
        iterations,
        converged,
    })
}

/// Near-best approximation of `f` on `E` from `m ≥ 8(n+1)` boundary samples.
pub fn near_best(
    f: &FunctionHandle,
    e: &Continuum,
    n: usize,
    m: usize,
    tol: f64,
) -> Result<NearBest> {
    if m < 8 * (n + 1) {
        return invalid(format!(
            "near_best needs at least {} samples, got {m}",
            8 * (n + 1)
        ));
    }
    let pts: Vec<Complex64> = e.boundary_samples(m)?.iter().map(|b| b.location).collect();
    let vals: Vec<Complex64> = pts.iter().map(|z| f.eval(*z)).collect();
    lawson(&pts, &vals, n, Frame::for_continuum(e), tol)
}

/// Radius of the smallest disk containing all `values`; this is the discrete
/// best constant approximation error.
pub fn enclosing_radius(values: &[Complex64]) -> f64 {
    enclosing_circle(values).1
}

/// Smallest disk containing all `values` (Welzl's algorithm, iterative form).
/// Its center is the best constant approximation.
pub fn enclosing_circle(values: &[Complex64]) -> (Complex64, f64) {
    fn circle2(a: Complex64, b: Complex64) -> (Complex64, f64) {
        let c = (a + b) / 2.0;
        (c, (a - c).norm())
    }
    fn circle3(a: Complex64, b: Complex64, c: Complex64) -> (Complex64, f64) {
        let (bx, by) = ((b - a).re, (b - a).im);
        let (cx, cy) = ((c - a).re, (c - a).im);
        let d = 2.0 * (bx * cy - by * cx);
        if d.abs() < 1e-300 {
            // Collinear: the widest pair.
            let cands = [circle2(a, b), circle2(a, c), circle2(b, c)];
            return cands
                .into_iter()
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .expect("three candidates");
        }
        let b2 = bx * bx + by * by;
        let c2 = cx * cx + cy * cy;
        let ux = (cy * b2 - by * c2) / d;
        let uy = (bx * c2 - cx * b2) / d;
        let center = a + c64(ux, uy);
        (center, c64(ux, uy).norm())
    }
    let inside =
        |c: &(Complex64, f64), p: Complex64| (p - c.0).norm() <= c.1 * (1.0 + 1e-12) + 1e-300;
    let mut pts = values.to_vec();
    // random order gives expected linear time
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed));
    if pts.is_empty() {
        return (c64(0.0, 0.0), 0.0);
    }
    let mut c = (pts[0], 0.0);
    for i in 1..pts.len() {
        if inside(&c, pts[i]) {
            continue;
        }
        c = (pts[i], 0.0);
        for j in 0..i {
            if inside(&c, pts[j]) {
                continue;
            }
            c = circle2(pts[i], pts[j]);
            for k in 0..j {
                if !inside(&c, pts[k]) {
                    c = circle3(pts[i], pts[j], pts[k]);
                }
            }
        }
    }
    c
}

/// Sample points of `E ∩ D(z, δ)`: boundary of `E` inside the disk, the part
/// of the circle `|ζ − z| = δ` inside `E`, and a polar grid when `E⁰ ≠ ∅`.
pub fn window_samples(e: &Continuum, z: Complex64, delta: f64) -> Vec<Complex64> {
    let mut pts = e.boundary_points_in_disk(z, delta, 64);
    if e.contains(z) {
        pts.push(z);
    }
    if e.has_interior() {
        let arc = 4 * WINDOW_GRID;
        for j in 0..arc {
            let p = z + Complex64::from_polar(delta, std::f64::consts::TAU * j as f64 / arc as f64);
            if e.classify(p) == Location::Interior {
                pts.push(p);
            }
        }
        for i in 1..=WINDOW_GRID {
            let r = delta * i as f64 / WINDOW_GRID as f64;
            for j in 0..WINDOW_GRID {
                let p = z + Complex64::from_polar(
                    r,
                    std::f64::consts::TAU * (j as f64 + 0.5 * (i % 2) as f64) / WINDOW_GRID as f64,
                );
                if e.classify(p) == Location::Interior {
                    pts.push(p);
                }
            }
        }
    }
    pts
}

/// `ω_{f,k,z,E}(δ) = E_{k−1}(f, E ∩ D(z, δ))`, discretised.
pub fn local_modulus(
    f: &FunctionHandle,
    e: &Continuum,
    k: usize,
    z: Complex64,
    delta: f64,
) -> Result<f64> {
    if k == 0 {
        return invalid("modulus order k must be at least 1");
    }
    if !(delta > 0.0 && delta < e.diameter() * (1.0 + 1e-12)) {
        return invalid(format!("δ must lie in (0, diam E), got {delta}"));
    }
    let pts = window_samples(e, z, delta);
    if pts.is_empty() {
        return invalid(format!("E ∩ D({z}, {delta}) is empty"));
    }
    let vals: Vec<Complex64> = pts.iter().map(|p| f.eval(*p)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return invalid("function is not finite on the window samples");
    }
    if k == 1 {
        return Ok(enclosing_radius(&vals));
    }
    if pts.len() < 2 * k {
        return Ok(0.0);
    }
    let nb = lawson(&pts, &vals, k - 1, Frame::new(z, delta), DEFAULT_TOL)?;
    Ok(nb.error)
}

/// `(δ_i, ω_i)` table of the global k-th modulus.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ModulusProfile {
    pub k: usize,
    pub deltas: Vec<f64>,
    pub omegas: Vec<f64>,
    /// Exponent assumed for `ω(t) ≍ t^γ` below the grid.
    pub tail_exponent: f64,
    pub dini_constant: Option<f64>,
}

impl ModulusProfile {
    /// Profile from given values; `ω` is made nondecreasing.
    pub fn from_table(
        k: usize,
        deltas: Vec<f64>,
        omegas: Vec<f64>,
        tail_exponent: f64,
    ) -> Result<Self> {
        if deltas.len() != omegas.len() || deltas.is_empty() {
            return invalid("profile needs matching nonempty δ and ω lists");
        }
        if deltas.windows(2).any(|w| w[1] <= w[0]) || deltas[0] <= 0.0 {
            return invalid("δ grid must be positive and ascending");
        }
        let mut omegas = omegas;
        for i in 1..omegas.len() {
            omegas[i] = omegas[i].max(omegas[i - 1]);
        }
        let mut p = ModulusProfile {
            k,
            deltas,
            omegas,
            tail_exponent,
            dini_constant: None,
        };
        p.dini_constant = p.compute_dini();
        Ok(p)
    }

    /// `ω(δ)` by log-log interpolation; below the grid `ω ∝ δ^γ`, above it
    /// constant.
    pub fn eval(&self, delta: f64) -> f64 {
        let (d, w) = (&self.deltas, &self.omegas);
        if delta <= d[0] {
            return w[0] * (delta / d[0]).powf(self.tail_exponent);
        }
        if delta >= d[d.len() - 1] {
            return w[w.len() - 1];
        }
        let i = d.partition_point(|x| *x <= delta) - 1;
        let (d0, d1, w0, w1) = (d[i], d[i + 1], w[i], w[i + 1]);
        if w0 <= 0.0 || w1 <= 0.0 {
            return w0 + (w1 - w0) * (delta - d0) / (d1 - d0);
        }
        let t = (delta / d0).ln() / (d1 / d0).ln();
        (w0.ln() + t * (w1 / w0).ln()).exp()
    }

    /// `max_δ (∫₀^δ ω(t) dt/t) / ω(δ)` over the grid, with the integral on
    /// the grid by the trapezoid rule in `log t` and the tail `[0, δ_min]`
    /// taken as `ω(δ_min)/γ`.
    fn compute_dini(&self) -> Option<f64> {
        if self.tail_exponent <= 0.0 || self.omegas.iter().all(|w| *w <= 0.0) {
            return None;
        }
        let mut integral = self.omegas[0] / self.tail_exponent;
        let mut worst: f64 = if self.omegas[0] > 0.0 {
            integral / self.omegas[0]
        } else {
            0.0
        };
        for i in 1..self.deltas.len() {
            let h = (self.deltas[i] / self.deltas[i - 1]).ln();
            integral += 0.5 * h * (self.omegas[i] + self.omegas[i - 1]);
            if self.omegas[i] > 0.0 {
                worst = worst.max(integral / self.omegas[i]);
            }
        }
        Some(worst)
    }
}

/// Tail exponent `γ` for `ω(t) ≍ t^γ` near 0 implied by the smoothness tag.
pub fn tail_exponent(smoothness: &Smoothness, k: usize) -> Option<f64> {
    match smoothness {
        Smoothness::Analytic => Some(k as f64),
        Smoothness::Holder { beta } => Some(beta.min(k as f64)),
        Smoothness::Custom { .. } => None,
    }
}

/// Geometric δ grid `diam·2^{−j}`, ascending, `j = 1..=levels`.
pub fn dyadic_grid(e: &Continuum, levels: usize) -> Vec<f64> {
    (1..=levels)
        .rev()
        .map(|j| e.diameter() * 0.5f64.powi(j as i32))
        .collect()
}

/// Centers used for the global modulus: `mz` boundary samples plus an
/// interior grid of about `mz/4` points when `E⁰ ≠ ∅`.
pub fn modulus_centers(e: &Continuum, mz: usize) -> Result<Vec<Complex64>> {
    let mut c: Vec<Complex64> = e.boundary_samples(mz)?.iter().map(|b| b.location).collect();
    if e.has_interior() {
        let res = ((mz as f64 / 4.0).sqrt().ceil() as usize).max(2);
        c.extend(e.interior_grid(res));
    }
    if let Shape::Segment { .. } = e.shape() {
        c.dedup_by(|a, b| (*a - *b).norm() < 1e-14);
    }
    Ok(c)
}

/// `ω_{f,k,E}(δ) = sup_z ω_{f,k,z,E}(δ)` over the centers, for each δ of an
/// ascending grid.
pub fn global_modulus_profile(
    f: &FunctionHandle,
    e: &Continuum,
    k: usize,
    deltas: &[f64],
    mz: usize,
) -> Result<ModulusProfile> {
    if mz < 16 {
        return invalid(format!("need at least 16 modulus centers, got {mz}"));
    }
    let centers = modulus_centers(e, mz)?;
    let diam = e.diameter();
    let omegas = deltas
        .par_iter()
        .map(|&d| {
            let d = d.min(diam * (1.0 - 1e-12));
            centers
                .iter()
                .map(|z| local_modulus(f, e, k, *z, d))
                .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let gamma = match tail_exponent(f.smoothness(), k) {
        Some(g) => g,
        None => {
            // Slope of the two smallest grid points.
            let g = if omegas.len() >= 2 && omegas[0] > 0.0 && omegas[1] > 0.0 {
                (omegas[1] / omegas[0]).ln() / (deltas[1] / deltas[0]).ln()
            } else {
                1.0
            };
            g.clamp(0.05, k as f64)
        }
    };
    ModulusProfile::from_table(k, deltas.to_vec(), omegas, gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::FunctionSpec;

    fn disk() -> Continuum {
        Continuum::unit_disk()
    }

    fn z_cubed() -> FunctionHandle {
        FunctionHandle::new("z^3", 3, Smoothness::Analytic, |z, l| match l {
            0 => z * z * z,
            1 => 3.0 * z * z,
            2 => 6.0 * z,
            3 => c64(6.0, 0.0),
            _ => c64(0.0, 0.0),
        })
    }

    #[test]
    fn z_cubed_by_quadratics() {
        let nb = near_best(&z_cubed(), &disk(), 2, 64, DEFAULT_TOL).unwrap();
        assert!((nb.error - 1.0).abs() < 1e-4, "error {}", nb.error);
        assert!(nb.polynomial.coeff_norm() < 1e-3);
        // Coarse grid search over real coefficients never beats the Lawson fit.
        let pts: Vec<Complex64> = disk()
            .boundary_samples(64)
            .unwrap()
            .iter()
            .map(|b| b.location)
            .collect();
        let mut grid_best = f64::INFINITY;
        let steps: Vec<f64> = (-4..=4).map(|i| 0.05 * i as f64).collect();
        for a in &steps {
            for b in &steps {
                for c in &steps {
                    let e = pts
                        .iter()
                        .map(|z| (z * z * z - (a + b * z + c * z * z)).norm())
                        .fold(0.0, f64::max);
                    grid_best = grid_best.min(e);
                }
            }
        }
        assert!(nb.error <= grid_best * (1.0 + 1e-4));
        assert!(grid_best >= 1.0 - 1e-12);
    }

    #[test]
    fn polynomials_are_reproduced() {
        let p = CPolynomial::new(
            Frame::RAW,
            vec![c64(1.0, -1.0), c64(0.5, 0.0), c64(0.0, 2.0), c64(-0.3, 0.1)],
        );
        let f = FunctionHandle::from_polynomial(p);
        for e in [
            disk(),
            Continuum::square(c64(0.5, 0.5), 1.0).unwrap(),
            Continuum::unit_segment(),
        ] {
            let nb = near_best(&f, &e, 5, 96, DEFAULT_TOL).unwrap();
            assert!(nb.error <= 1e-10, "{}: {}", e.kind_name(), nb.error);
        }
    }

    #[test]
    fn pole_rate_matches_closed_form() {
        // E_n(1/(z−a), D) = 1/(|a|^n (|a|² − 1)).
        let f = FunctionSpec::Pole { a: c64(2.0, 0.0) }
            .build(&disk())
            .unwrap();
        let mut errs = Vec::new();
        for n in [4usize, 8, 16] {
            let nb = near_best(&f, &disk(), n, 8 * (n + 1) * 2, DEFAULT_TOL).unwrap();
            let exact = 1.0 / (2f64.powi(n as i32) * 3.0);
            assert!(
                (nb.error - exact).abs() <= 2e-3 * exact,
                "n={n}: {} vs {exact}",
                nb.error
            );
            errs.push(nb.error);
        }
        let fit = crate::fit::semilog_fit(&[4.0, 8.0, 16.0], &errs).unwrap();
        assert!((-fit.slope - 2f64.ln()).abs() <= 0.15 * 2f64.ln());
    }

    #[test]
    fn error_monotone_in_degree() {
        let f = FunctionSpec::parse("branch(0.5,1)")
            .unwrap()
            .build(&disk())
            .unwrap();
        let mut prev = f64::INFINITY;
        for n in 0..8 {
            let nb = near_best(&f, &disk(), n, 8 * 9 * 2, DEFAULT_TOL).unwrap();
            assert!(nb.error <= prev * (1.0 + 1e-3) + 1e-9, "n={n}");
            prev = nb.error;
        }
    }

    #[test]
    fn local_modulus_examples() {
        let id = FunctionHandle::new("z", 1, Smoothness::Analytic, |z, l| {
            if l == 0 {
                z
            } else {
                c64(1.0, 0.0)
            }
        });
        let w = local_modulus(&id, &disk(), 1, c64(0.0, 0.0), 0.5).unwrap();
        assert!((w - 0.5).abs() < 1e-12);
        let w2 = local_modulus(&id, &disk(), 2, c64(0.3, 0.1), 0.5).unwrap();
        assert!(w2 < 1e-12);
        // Brute force over constants on a grid of the window values.
        let f = FunctionSpec::parse("branch(0.5,1)")
            .unwrap()
            .build(&disk())
            .unwrap();
        let z0 = c64(1.0, 0.0);
        let w = local_modulus(&f, &disk(), 1, z0, 0.1).unwrap();
        let vals: Vec<Complex64> = window_samples(&disk(), z0, 0.1)
            .iter()
            .map(|p| f.eval(*p))
            .collect();
        let mut brute = f64::INFINITY;
        for i in 0..=200 {
            for j in -100..=100 {
                let c = c64(0.4 * i as f64 / 200.0, 0.4 * j as f64 / 200.0);
                brute = brute.min(vals.iter().map(|v| (v - c).norm()).fold(0.0, f64::max));
            }
        }
        assert!(w <= brute + 1e-12 && w >= brute - 2e-3, "{w} vs {brute}");
        assert!(w <= 0.1f64.sqrt() && w >= 0.5 * 0.1f64.sqrt() * 0.5);
    }

    #[test]
    fn enclosing_radius_examples() {
        let pts = [
            c64(1.0, 0.0),
            c64(-1.0, 0.0),
            c64(0.0, 1.0),
            c64(0.0, -0.5),
            c64(0.1, 0.1),
        ];
        assert!((enclosing_radius(&pts) - 1.0).abs() < 1e-15);
        let tri = [c64(0.0, 0.0), c64(1.0, 0.0), c64(0.5, 3f64.sqrt() / 2.0)];
        assert!((enclosing_radius(&tri) - 1.0 / 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn dini_of_square_root_profile() {
        let deltas: Vec<f64> = (1..=16).rev().map(|j| 0.5f64.powi(j)).collect();
        let omegas: Vec<f64> = deltas.iter().map(|d| d.sqrt()).collect();
        let p = ModulusProfile::from_table(1, deltas, omegas, 0.5).unwrap();
        let dini = p.dini_constant.unwrap();
        assert!((dini - 2.0).abs() <= 0.2, "{dini}");
    }

    #[test]
    fn profile_examples() {
        let e = disk();
        let id = FunctionHandle::new("z", 1, Smoothness::Analytic, |z, l| {
            if l == 0 {
                z
            } else {
                c64(1.0, 0.0)
            }
        });
        let deltas = dyadic_grid(&e, 5);
        let p = global_modulus_profile(&id, &e, 2, &deltas, 16).unwrap();
        assert!(p.omegas.iter().all(|w| *w <= 1e-9));

        let f = FunctionSpec::parse("branch(0.5,1)")
            .unwrap()
            .build(&e)
            .unwrap();
        let deltas = dyadic_grid(&e, 8);
        let p = global_modulus_profile(&f, &e, 1, &deltas, 32).unwrap();
        let fit = crate::fit::loglog_fit(&p.deltas, &p.omegas).unwrap();
        assert!((fit.slope - 0.5).abs() <= 0.1, "slope {}", fit.slope);
    }
}
