//! Polynomial kernels approximating the Cauchy kernel `1/(ζ − z)`.
//!
//! * [`KernelBuilder::first_order_kernel`] averages degree-`q` Faber partial
//!   sums of `1/(ξ − z)` over `ξ = Ψ(R e^{iθ})` against a Jackson kernel
//!   centred at `θ₀ = arg Φ(ζ)`.
//! * [`KernelBuilder::powered_kernel`] raises `V₁ = 1 − (ζ − z)Q` to the
//!   power `k` and divides `1 − V` by `ζ − z` exactly.
//! * [`damping`] is the factor `u = w^N` built from a disk through `ζ`
//!   enclosing `E`.
//! * [`KernelBuilder::combined_kernel`] is
//!   `T_n = (1 − u)/(ζ − z) + u·K_{⌈n/2⌉}`.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::c64;
use crate::conformal::ExteriorMap;
use crate::error::{invalid, Error, Result};
use crate::fit::loglog_fit;
use crate::geometry::{BoundaryPoint, Continuum, Shape};
use crate::polynomial::{CPolynomial, Frame};

/// Parameters of a powered kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    /// Powering exponent `k` (decay order).
    pub m: usize,
    /// Degree budget.
    pub n: usize,
    /// Jackson kernel degree.
    pub p: usize,
    /// Faber partial-sum degree.
    pub q: usize,
}

impl KernelSpec {
    /// Largest `q` with `m(q+1) − 1 ≤ n`, and `p = q`.
    pub fn for_budget(n: usize, m: usize) -> Result<Self> {
        if m == 0 {
            return invalid("kernel power must be at least 1");
        }
        let q = (n + 1) / m;
        if q < 2 {
            return invalid(format!("degree budget {n} too small for kernel power {m}"));
        }
        let spec = KernelSpec {
            m,
            n,
            p: q - 1,
            q: q - 1,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 1 || self.q < 1 || self.m < 1 {
            return invalid(format!("kernel spec needs p, q, m ≥ 1: {self:?}"));
        }
        if self.m * (self.q + 1) - 1 > self.n {
            return invalid(format!("kernel degree m(q+1)−1 exceeds budget: {self:?}"));
        }
        Ok(())
    }

    /// Radius `R = 1 + 1/n` of the averaging circle.
    pub fn shift(&self) -> f64 {
        1.0 + 1.0 / self.n as f64
    }

    /// Number of quadrature nodes on the averaging circle. The integrand
    /// carries `1/Ψ′(w)`, whose Fourier coefficients decay like `R^{−j}`
    /// when `L` has corners or endpoints, so `32n` nodes bring the aliasing
    /// below `e^{−32}`.
    pub fn nodes(&self) -> usize {
        (8 * self.p).max(32 * self.n)
    }
}

/// Jackson kernel `(sin(μt/2)/sin(t/2))^4` with `μ = ⌊p/2⌋ + 1`
/// (a nonnegative trigonometric polynomial of degree `2μ − 2 ≤ p`),
/// unnormalised.
pub fn jackson(p: usize, t: f64) -> f64 {
    let mu = (p / 2 + 1) as f64;
    let s = (t / 2.0).sin();
    if s.abs() < 1e-12 {
        return mu.powi(4);
    }
    ((mu * t / 2.0).sin() / s).powi(4)
}

/// Quadrature weights `J_p(θ₀ − θ_j)·(2π/M)`, normalised to sum to 1 (the
/// rule is exact for the kernel, so this is its integral).
pub fn jackson_weights(p: usize, theta0: f64, nodes: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..nodes)
        .map(|j| jackson(p, theta0 - TAU * j as f64 / nodes as f64))
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Builds kernels for one domain, caching Faber polynomials.
pub struct KernelBuilder<'a> {
    map: &'a ExteriorMap,
    frame: Frame,
    faber: Mutex<HashMap<usize, Arc<Vec<CPolynomial>>>>,
}

impl<'a> KernelBuilder<'a> {
    pub fn new(map: &'a ExteriorMap) -> Self {
        KernelBuilder {
            map,
            frame: Frame::for_continuum(map.domain()),
            faber: Mutex::new(HashMap::new()),
        }
    }

    pub fn map(&self) -> &ExteriorMap {
        self.map
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    fn faber(&self, q: usize) -> Arc<Vec<CPolynomial>> {
        if let Some(f) = self.faber.lock().expect("faber cache").get(&q) {
            return f.clone();
        }
        let f = Arc::new(self.map.faber_polynomials(q, self.frame));
        self.faber.lock().expect("faber cache").insert(q, f.clone());
        f
    }

    /// `Q(z) = Σ_j ω_j S_q(Ψ(R e^{iθ_j}), z)` with
    /// `S_q(Ψ(w), z) = Ψ′(w)^{−1} Σ_{k≤q} F_k(z) w^{−k−1}`.
    pub fn first_order_kernel(&self, spec: &KernelSpec, theta0: f64) -> Result<CPolynomial> {
        self.first_order_kernel_with_nodes(spec, theta0, spec.nodes())
    }

    pub fn first_order_kernel_with_nodes(
        &self,
        spec: &KernelSpec,
        theta0: f64,
        nodes: usize,
    ) -> Result<CPolynomial> {
        self.averaged_faber(spec, theta0, spec.shift(), nodes)
    }

    /// First-order kernel averaged over the circle `|w| = radius`.
    pub fn first_order_kernel_at(
        &self,
        spec: &KernelSpec,
        theta0: f64,
        radius: f64,
    ) -> Result<CPolynomial> {
        self.averaged_faber(spec, theta0, radius, spec.nodes())
    }

    fn averaged_faber(
        &self,
        spec: &KernelSpec,
        theta0: f64,
        r: f64,
        nodes: usize,
    ) -> Result<CPolynomial> {
        spec.validate()?;
        if r <= 1.0 {
            return invalid(format!("averaging radius {r} must exceed 1"));
        }
        let weights = jackson_weights(spec.p, theta0, nodes);
        let mut beta = vec![c64(0.0, 0.0); spec.q + 1];
        for (j, wt) in weights.iter().enumerate() {
            if *wt == 0.0 {
                continue;
            }
            let w = Complex64::from_polar(r, TAU * j as f64 / nodes as f64);
            let winv = 1.0 / w;
            let mut pw = winv / self.map.psi_prime(w)? * *wt;
            for b in beta.iter_mut() {
                *b += pw;
                pw *= winv;
            }
        }
        let faber = self.faber(spec.q);
        Ok(faber
            .iter()
            .zip(&beta)
            .fold(CPolynomial::zero(self.frame), |acc, (f, b)| {
                &acc + &f.scale_by(*b)
            }))
    }

    /// `V = (1 − (ζ − z)Q)^m` for the first-order kernel `Q`.
    pub fn powered_v(
        &self,
        spec: &KernelSpec,
        zeta: Complex64,
        theta0: f64,
    ) -> Result<CPolynomial> {
        self.powered_v_at(spec, zeta, theta0, spec.shift())
    }

    fn powered_v_at(
        &self,
        spec: &KernelSpec,
        zeta: Complex64,
        theta0: f64,
        radius: f64,
    ) -> Result<CPolynomial> {
        let q = self.first_order_kernel_at(spec, theta0, radius)?;
        // 1 − (ζ − z)Q = 1 + (z − ζ)Q
        let v1 = &CPolynomial::constant(self.frame, c64(1.0, 0.0)) + &q.mul_linear(zeta);
        Ok(v1.pow(spec.m))
    }

    /// `Q_m = (1 − V)/(ζ − z)`, so that `1 − (ζ − z)Q_m = V` exactly.
    pub fn powered_kernel(
        &self,
        spec: &KernelSpec,
        zeta: Complex64,
        theta0: f64,
    ) -> Result<CPolynomial> {
        let v = self.powered_v(spec, zeta, theta0)?;
        divide_one_minus(&v, zeta)
    }

    /// `T_n = (1 − u)/(ζ − z) + u·K` with `u = w^{⌊n/2⌋}` and `K` the powered
    /// kernel of power `m` within the remaining budget `n − ⌊n/2⌋`.
    pub fn combined_kernel(
        &self,
        n: usize,
        m: usize,
        bp: &BoundaryPoint,
    ) -> Result<CombinedKernel> {
        let zeta = bp.location;
        let theta0 = self.map.boundary_angle(bp)?;
        let big_n = n / 2;
        let u = damping(self.map.domain(), bp, big_n, self.frame)?;
        let spec = KernelSpec::for_budget(n - big_n, m)?;
        let v_k = self.powered_v(&spec, zeta, theta0)?;
        self.assemble(n, spec, zeta, u, v_k)
    }

    /// Combined kernel with pole `ζ` off `E`: damping is anchored at the
    /// nearest point of `E` and rescaled so that `u(ζ) = 1`. The first-order
    /// kernel is the plain Faber partial sum at `Φ(ζ)` when its truncation
    /// error `|Φ(ζ)|^{−q−1}` is below the Jackson bias `1.5/μ²`, and otherwise
    /// the Jackson average over `|w| = max(1 + 1/n, |Φ(ζ)|)`.
    pub fn combined_kernel_at(
        &self,
        n: usize,
        m: usize,
        zeta: Complex64,
    ) -> Result<CombinedKernel> {
        let e = self.map.domain();
        let d = e.distance(zeta);
        if d <= 1e-10 * e.diameter() {
            return self.combined_kernel(n, m, &boundary_point_of(e, zeta));
        }
        let anchor = e.nearest_point(zeta);
        let normal = (zeta - anchor) / d;
        let big_n = n / 2;
        let mut u = damping_with_normal(e, anchor, normal, big_n, self.frame)?;
        let scale = u.base.eval(zeta);
        u.base = u.base.scale_by(1.0 / scale);
        u.base_max /= scale.norm();
        u.zeta = zeta;
        let spec = KernelSpec::for_budget(n - big_n, m)?;
        let w = self.map.phi(zeta)?;
        let mu = (spec.p / 2 + 1) as f64;
        let v_k = if w.norm().powi(-(spec.q as i32 + 1)) <= 1.5 / (mu * mu) {
            let q = self.faber_partial_sum(spec.q, w)?;
            let v1 = &CPolynomial::constant(self.frame, c64(1.0, 0.0)) + &q.mul_linear(zeta);
            v1.pow(spec.m)
        } else {
            self.powered_v_at(&spec, zeta, w.arg(), w.norm().max(spec.shift()))?
        };
        self.assemble(n, spec, zeta, u, v_k)
    }

    /// `S_q(Ψ(w), z) = Ψ′(w)^{−1} Σ_{k≤q} F_k(z) w^{−k−1}` for `|w| > 1`.
    pub fn faber_partial_sum(&self, q: usize, w: Complex64) -> Result<CPolynomial> {
        let winv = 1.0 / w;
        let mut pw = winv / self.map.psi_prime(w)?;
        let faber = self.faber(q);
        let mut out = CPolynomial::zero(self.frame);
        for f in faber.iter() {
            out = &out + &f.scale_by(pw);
            pw *= winv;
        }
        Ok(out)
    }

    fn assemble(
        &self,
        n: usize,
        spec: KernelSpec,
        zeta: Complex64,
        u: DampingFactor,
        v_k: CPolynomial,
    ) -> Result<CombinedKernel> {
        let k = divide_one_minus(&v_k, zeta)?;
        let up = u.polynomial();
        let first = divide_one_minus(&up, zeta)?;
        let t = &first + &(&up * &k);
        if t.degree() > n {
            return Err(Error::Internal(format!(
                "combined kernel degree {} > {n}",
                t.degree()
            )));
        }
        // 1 − (ζ − z)T = u·V_K
        let v = &up * &v_k;
        Ok(CombinedKernel {
            t,
            v,
            damping: u,
            spec,
        })
    }
}

/// `(1 − V)/(ζ − z) = (V − 1)/(z − ζ)`; fails if `V(ζ) ≠ 1`.
fn divide_one_minus(v: &CPolynomial, zeta: Complex64) -> Result<CPolynomial> {
    let one = CPolynomial::constant(v.frame(), c64(1.0, 0.0));
    let (q, r) = (v - &one).div_linear_rem(zeta);
    if r.norm() > 1e-9 * (v.coeff_norm() + 1.0) {
        return Err(Error::Internal(format!(
            "kernel construction lost V(ζ) = 1: remainder {}",
            r.norm()
        )));
    }
    Ok(q)
}

/// The combined kernel with its ingredients.
#[derive(Clone, Debug)]
pub struct CombinedKernel {
    pub t: CPolynomial,
    /// `1 − (ζ − z)T`.
    pub v: CPolynomial,
    pub damping: DampingFactor,
    pub spec: KernelSpec,
}

/// `u(z) = w(z)^N` with `w` a degree-1 polynomial, `w(ζ) = 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DampingFactor {
    #[serde(with = "crate::serde_c64")]
    pub zeta: Complex64,
    pub power: usize,
    pub base: CPolynomial,
    #[serde(with = "crate::serde_c64")]
    pub disk_center: Complex64,
    pub disk_radius: f64,
    /// `max |w|` over boundary samples.
    pub base_max: f64,
}

impl DampingFactor {
    pub fn polynomial(&self) -> CPolynomial {
        self.base.pow(self.power)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.base.eval(z).powu(self.power as u32)
    }
}

const DAMPING_SAMPLES: usize = 1024;

/// Damping factor at a boundary point of a convex continuum.
///
/// The disk `D(c, R)` passes through `ζ` with inner normal `−n(ζ)` and is the
/// smallest such disk containing the boundary samples. Where `L` is flat at
/// `ζ` no finite disk contains `E`; `R` is then capped at
/// `diam E·max(1, √N)`, which keeps `‖u‖_E ≤ e^{1/4}`.
pub fn damping(
    e: &Continuum,
    bp: &BoundaryPoint,
    power: usize,
    frame: Frame,
) -> Result<DampingFactor> {
    if !e.is_convex() {
        return Err(Error::Unsupported(
            "interior damping needs a convex continuum".into(),
        ));
    }
    let normal = e.outward_normal(bp.parameter)?;
    damping_with_normal(e, bp.location, normal, power, frame)
}

/// Damping factor at `ζ ∈ L` with a given unit outer normal (any vector of
/// the normal cone at a corner).
pub fn damping_with_normal(
    e: &Continuum,
    zeta: Complex64,
    normal: Complex64,
    power: usize,
    frame: Frame,
) -> Result<DampingFactor> {
    if !e.is_convex() {
        return Err(Error::Unsupported(
            "interior damping needs a convex continuum".into(),
        ));
    }
    let diam = e.diameter();
    let (center, radius) = match e.shape() {
        Shape::Disk { center, radius } => (*center, *radius),
        _ => {
            let samples = e.boundary_samples(DAMPING_SAMPLES)?;
            let mut r_min: f64 = 0.0;
            for s in &samples {
                let d = s.location - zeta;
                let dn = d.norm();
                if dn <= 1e-12 * diam {
                    continue;
                }
                let depth = -(d * normal.conj()).re;
                if depth <= 1e-12 * dn {
                    r_min = f64::INFINITY;
                    break;
                }
                r_min = r_min.max(dn * dn / (2.0 * depth));
            }
            let cap = diam * (power as f64).sqrt().max(1.0);
            let r = r_min.max(diam / 2.0).min(cap) * (1.0 + 1e-12);
            (zeta - normal * r, r)
        }
    };
    // w(z) = (1 + ((z − c)/R)·conj((ζ − c)/R))/2
    let a = ((zeta - center) / radius).conj() / radius;
    let base = CPolynomial::new(
        frame,
        vec![
            (c64(1.0, 0.0) + (frame.center - center) * a) / 2.0,
            a * frame.unit() / 2.0,
        ],
    );
    let base_max = e
        .boundary_samples(DAMPING_SAMPLES)?
        .iter()
        .map(|s| base.eval(s.location).norm())
        .fold(0.0, f64::max);
    Ok(DampingFactor {
        zeta,
        power,
        base,
        disk_center: center,
        disk_radius: radius,
        base_max,
    })
}

/// Boundary sample closest to `z` (segment points get the side of the first
/// half of the parameterization).
pub fn boundary_point_of(e: &Continuum, z: Complex64) -> BoundaryPoint {
    let (_, t) = e.nearest_boundary_point(z);
    let mut bp = e.boundary_point(t);
    bp.location = z;
    bp
}

/// Boundary-decay diagnostics of the powered kernel at `ζ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelDiagnostic {
    pub spec: KernelSpec,
    pub rho: f64,
    /// Slope of `log|1/(ζ−z) − Q_m(z)|` against `log|ζ − z|` on
    /// `8ρ ≤ |ζ − z| ≤ diam/2`.
    pub slope: f64,
    /// `max_z |Q_m(z)|·|ζ − z|` over boundary samples.
    pub bound_constant: f64,
    /// `(|ζ − z|, error, (ρ/(|ζ−z|+ρ))^m/|ζ−z|)`.
    pub rows: Vec<(f64, f64, f64)>,
}

pub fn kernel_diagnostic(
    builder: &KernelBuilder<'_>,
    spec: &KernelSpec,
    bp: &BoundaryPoint,
    samples: usize,
) -> Result<KernelDiagnostic> {
    let map = builder.map();
    let e = map.domain();
    let zeta = bp.location;
    let theta0 = map.boundary_angle(bp)?;
    let qm = builder.powered_kernel(spec, zeta, theta0)?;
    let rho = map.rho_delta(zeta, 1.0 / spec.n as f64)?;
    let hi = e.diameter() / 2.0;
    let mut rows = Vec::new();
    let mut bound: f64 = 0.0;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for s in e.boundary_samples(samples)? {
        let d = (s.location - zeta).norm();
        if d <= 1e-12 * e.diameter() {
            continue;
        }
        let val = qm.eval(s.location);
        bound = bound.max(val.norm() * d);
        let err = (1.0 / (zeta - s.location) - val).norm();
        let model = (rho / (d + rho)).powi(spec.m as i32) / d;
        rows.push((d, err, model));
        if d >= 8.0 * rho && d <= hi {
            xs.push(d);
            ys.push(err);
        }
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let slope = loglog_fit(&xs, &ys).map(|f| f.slope).unwrap_or(f64::NAN);
    Ok(KernelDiagnostic {
        spec: *spec,
        rho,
        slope,
        bound_constant: bound,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Continuum;

    fn disk_map() -> ExteriorMap {
        ExteriorMap::build(&Continuum::unit_disk()).unwrap()
    }

    #[test]
    fn jackson_is_a_probability_density() {
        for p in [1, 4, 16, 33] {
            let nodes = 8 * p;
            let raw: Vec<f64> = (0..nodes)
                .map(|j| jackson(p, 0.3 - TAU * j as f64 / nodes as f64))
                .collect();
            assert!(raw.iter().all(|v| *v >= 0.0));
            // Integral by the trapezoid rule, normalised by the peak-free
            // closed form 2π·(2μ³ + μ)/3.
            let mu = (p / 2 + 1) as f64;
            let integral = raw.iter().sum::<f64>() * TAU / nodes as f64;
            let exact = TAU * (2.0 * mu.powi(3) + mu) / 3.0;
            assert!((integral / exact - 1.0).abs() < 1e-10, "p={p}");
            let w = jackson_weights(p, 0.3, nodes);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn first_order_kernel_on_disk() {
        let map = disk_map();
        let b = KernelBuilder::new(&map);
        let spec = KernelSpec {
            m: 1,
            n: 32,
            p: 16,
            q: 16,
        };
        let q = b.first_order_kernel(&spec, 0.0).unwrap();
        assert_eq!(q.degree(), 16);
        let z = c64(-1.0, 0.0);
        let exact = 1.0 / (c64(1.0, 0.0) - z);
        let err = (exact - q.eval(z)).norm();
        assert!(err <= 0.25 * exact.norm(), "{err}");
        // Direct sum: on the disk F_k = z^k and Ψ′ = 1.
        let nodes = spec.nodes();
        let w8 = jackson_weights(spec.p, 0.0, nodes);
        let r = spec.shift();
        let mut direct = c64(0.0, 0.0);
        for (j, wt) in w8.iter().enumerate() {
            let w = Complex64::from_polar(r, TAU * j as f64 / nodes as f64);
            for k in 0..=spec.q {
                direct += *wt * z.powu(k as u32) / w.powu(k as u32 + 1);
            }
        }
        assert!((direct - q.eval(z)).norm() < 1e-12);
        let v1 = 1.0 - (c64(1.0, 0.0) - c64(1.0, 0.0)) * q.eval(c64(1.0, 0.0));
        assert_eq!(v1, c64(1.0, 0.0));
        // Doubling the quadrature changes nothing.
        let q2 = b
            .first_order_kernel_with_nodes(&spec, 0.0, 2 * spec.nodes())
            .unwrap();
        assert!((&q - &q2).coeff_norm() < 1e-6);
    }

    #[test]
    fn powered_kernel_identity() {
        for dom in [
            Continuum::unit_disk(),
            Continuum::unit_segment(),
            Continuum::square(c64(0.0, 0.0), 1.0).unwrap(),
        ] {
            let map = ExteriorMap::build(&dom).unwrap();
            let b = KernelBuilder::new(&map);
            let spec = KernelSpec::for_budget(48, 3).unwrap();
            let bp = dom.boundary_point(0.1);
            let th = map.boundary_angle(&bp).unwrap();
            let v = b.powered_v(&spec, bp.location, th).unwrap();
            let qm = b.powered_kernel(&spec, bp.location, th).unwrap();
            assert!(qm.degree() <= spec.n);
            let back =
                &CPolynomial::constant(b.frame(), c64(1.0, 0.0)) + &qm.mul_linear(bp.location);
            assert!((&back - &v).coeff_norm() <= 1e-9 * v.coeff_norm().max(1.0));
            assert!((back.eval(bp.location) - 1.0).norm() < 1e-9);
        }
    }

    #[test]
    fn powered_kernel_decays_on_disk() {
        let map = disk_map();
        let b = KernelBuilder::new(&map);
        let bp = Continuum::unit_disk().boundary_point(0.0);
        let mut slopes = Vec::new();
        for k in [1usize, 2, 3] {
            let spec = KernelSpec::for_budget(256, k).unwrap();
            let d = kernel_diagnostic(&b, &spec, &bp, 2048).unwrap();
            slopes.push(d.slope);
            assert!(d.bound_constant <= 50.0);
        }
        assert!(slopes[2] <= -(3.0 + 1.0) + 0.5, "{slopes:?}");
        for w in slopes.windows(2) {
            assert!(w[1] <= w[0] - 0.8, "{slopes:?}");
        }
    }

    #[test]
    fn damping_on_disk() {
        let e = Continuum::unit_disk();
        let bp = e.boundary_point(0.0);
        let n = 10;
        let u = damping(&e, &bp, n, Frame::for_continuum(&e)).unwrap();
        assert!((u.base.eval(c64(1.0, 0.0)) - 1.0).norm() < 1e-12);
        assert!((u.eval(c64(0.0, 0.0)).norm() - 0.5f64.powi(n as i32)).abs() < 1e-15);
        for z in [c64(-1.0, 0.0), c64(0.3, 0.7)] {
            let want = ((1.0 + z) / 2.0).powu(n as u32);
            assert!((u.eval(z) - want).norm() < 1e-14);
        }
        assert!(u.base_max <= 1.0 + 1e-9);
    }

    #[test]
    fn damping_requires_convexity() {
        let l = Continuum::l_shape();
        let bp = l.boundary_point(0.1);
        assert!(matches!(
            damping(&l, &bp, 4, Frame::for_continuum(&l)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn damping_on_ellipse_and_segment_end() {
        let e = Continuum::ellipse(c64(0.0, 0.0), 2.0, 1.0).unwrap();
        for t in [0.0, 0.1, 0.25] {
            let bp = e.boundary_point(t);
            let u = damping(&e, &bp, 8, Frame::for_continuum(&e)).unwrap();
            assert!(u.base_max <= 1.0 + 1e-9);
            assert!((u.base.eval(bp.location) - 1.0).norm() < 1e-12);
        }
        let s = Continuum::unit_segment();
        let u = damping(&s, &s.boundary_point(0.0), 8, Frame::for_continuum(&s)).unwrap();
        assert!((u.disk_radius - 1.0).abs() < 1e-9);
        assert!(u.base_max <= 1.0 + 1e-9);
    }

    #[test]
    fn combined_kernel_contracts() {
        let e = Continuum::unit_disk();
        let map = disk_map();
        let b = KernelBuilder::new(&map);
        let bp = e.boundary_point(0.0);
        for n in [16usize, 32, 64] {
            let ck = b.combined_kernel(n, 2, &bp).unwrap();
            assert!(ck.t.degree() <= n);
            let zeta = bp.location;
            for s in e.boundary_samples(256).unwrap() {
                let d = (s.location - zeta).norm();
                if d > 1e-12 {
                    assert!(ck.t.eval(s.location).norm() * d <= 50.0);
                }
            }
        }
    }

    #[test]
    fn segment_endpoint_kernel_decays() {
        // Ψ′ vanishes at the endpoint, so the averaging rule must resolve 1/Ψ′.
        let e = Continuum::unit_segment();
        let map = ExteriorMap::build(&e).unwrap();
        let b = KernelBuilder::new(&map);
        for k in [2usize, 3] {
            let spec = KernelSpec::for_budget(256, k).unwrap();
            let d = kernel_diagnostic(&b, &spec, &e.boundary_point(0.0), 2048).unwrap();
            assert!(d.bound_constant <= 5.0, "k={k}: bound {}", d.bound_constant);
            assert!(
                d.slope <= -(k as f64 + 1.0) + 0.5,
                "k={k}: slope {}",
                d.slope
            );
        }
    }
}
