//! Primitive along segments, a Whitney-type continuous extension with
//! `∂̄`-control, and the area-integral polynomial
//! `t_n(z) = −(1/π) ∫ ∂̄F(ζ) Q(ζ, z)² dm(ζ)`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{enclosing_circle, lawson, DEFAULT_TOL};
use crate::c64;
use crate::error::{invalid, Error, Result};
use crate::functions::{FunctionHandle, Smoothness};
use crate::geometry::Continuum;
use crate::kernels::KernelBuilder;
use crate::polynomial::{CPolynomial, Frame};
use crate::quadrature::{gauss_legendre, integrate_segment};

pub const PRIMITIVE_TOL: f64 = 1e-10;

/// `F(ζ) = ∫_{[z₀, ζ]} f(ξ) dξ` on a convex continuum.
#[derive(Clone, Debug)]
pub struct Primitive {
    f: FunctionHandle,
    anchor: Complex64,
}

pub fn primitive(f: &FunctionHandle, e: &Continuum, z0: Complex64) -> Result<Primitive> {
    if !e.is_convex() {
        return Err(Error::Unsupported(
            "primitive along segments needs a convex continuum".into(),
        ));
    }
    if !e.contains(z0) {
        return invalid(format!("anchor {z0} is not in E"));
    }
    Ok(Primitive {
        f: f.clone(),
        anchor: z0,
    })
}

impl Primitive {
    pub fn anchor(&self) -> Complex64 {
        self.anchor
    }

    pub fn value(&self, zeta: Complex64) -> Result<Complex64> {
        if zeta == self.anchor {
            return Ok(c64(0.0, 0.0));
        }
        let f = &self.f;
        integrate_segment(|x| f.eval(x), self.anchor, zeta, PRIMITIVE_TOL)
            .map_err(|e| Error::Quadrature(format!("primitive at {zeta}: {e}")))
    }

    /// `F` as a function handle: order 0 is the integral, order `l ≥ 1` is
    /// `f^{(l−1)}`. Quadrature failures surface as NaN.
    pub fn handle(&self) -> FunctionHandle {
        let me = self.clone();
        let smoothness = match self.f.smoothness() {
            Smoothness::Holder { beta } => Smoothness::Holder { beta: beta + 1.0 },
            Smoothness::Analytic => Smoothness::Analytic,
            other => Smoothness::Custom {
                note: format!("primitive of {other:?}"),
            },
        };
        FunctionHandle::new(
            format!("primitive of {}", self.f.name()),
            self.f.max_order().saturating_add(1),
            smoothness,
            move |z, l| {
                if l == 0 {
                    me.value(z).unwrap_or(c64(f64::NAN, f64::NAN))
                } else {
                    me.f.derivative(z, l - 1).unwrap_or(c64(f64::NAN, f64::NAN))
                }
            },
        )
    }
}

/// Window factor for the local fits.
pub const FIT_WINDOW: f64 = 23.0;
/// Cells are split while `half-side > WHITNEY_RATIO·d(center, E)`.
pub const WHITNEY_RATIO: f64 = 0.8;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WhitneyCell {
    #[serde(with = "crate::serde_c64")]
    pub center: Complex64,
    pub half_side: f64,
    /// `d(center, E)`.
    pub dist: f64,
    /// Nearest point of `E` to the center.
    #[serde(with = "crate::serde_c64")]
    pub anchor: Complex64,
    /// Local fit of degree `k − 1` on `E ∩ D(anchor, window)`.
    pub fit: CPolynomial,
    pub window: f64,
}

#[derive(Clone, Debug)]
struct Node {
    center: Complex64,
    half: f64,
    children: Vec<Node>,
    cell: Option<usize>,
}

/// Parameters of the Whitney decomposition.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ExtensionOptions {
    /// Smallest half-side is `scale·2^{−depth}`.
    pub depth: u32,
    pub boundary_pool: usize,
    pub interior_pool: usize,
}

impl Default for ExtensionOptions {
    fn default() -> Self {
        ExtensionOptions {
            depth: 7,
            boundary_pool: 2048,
            interior_pool: 48,
        }
    }
}

/// Continuous compactly supported extension `F` of a function on `E`.
#[derive(Clone, Debug)]
pub struct ExtensionField {
    e: Continuum,
    f_on_e: FunctionHandle,
    k: usize,
    /// `diam E / 2`.
    pub scale: f64,
    pub cells: Vec<WhitneyCell>,
    root: Node,
    /// Area of the thin layer along `L` left uncovered at the finest level.
    pub dropped_area: f64,
    pub min_half_side: f64,
}

fn bump(s: f64) -> (f64, f64) {
    let a = s.abs();
    if a >= 1.0 {
        return (0.0, 0.0);
    }
    ((1.0 - a).powi(2) * (1.0 + 2.0 * a), -6.0 * s * (1.0 - a))
}

/// `C^∞` transition from 0 at `t ≤ 0` to 1 at `t ≥ 1`, with derivative.
fn smoothstep(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0)
    } else if t >= 1.0 {
        (1.0, 0.0)
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        let da = a / (t * t);
        let db = -b / ((1.0 - t) * (1.0 - t));
        let s = a + b;
        (a / s, (da * s - a * (da + db)) / (s * s))
    }
}

impl WhitneyCell {
    /// Bump `b` and `∂̄b` at `ζ` (support: twice the cell).
    fn weight(&self, zeta: Complex64) -> (f64, Complex64) {
        let w = 2.0 * self.half_side;
        let (bx, dx) = bump((zeta.re - self.center.re) / w);
        let (by, dy) = bump((zeta.im - self.center.im) / w);
        (bx * by, c64(dx * by / w, bx * dy / w) / 2.0)
    }
}

struct Pool {
    z: Vec<Complex64>,
    v: Vec<Complex64>,
}

/// Builds the extension of `f_on_e` (continuous on `E`) with local fits of
/// degree `k − 1`.
pub fn extend(
    f_on_e: &FunctionHandle,
    e: &Continuum,
    k: usize,
    opts: ExtensionOptions,
) -> Result<ExtensionField> {
    if k == 0 {
        return invalid("extension order k must be at least 1");
    }
    let scale = e.diameter() / 2.0;
    let h_min = scale * 0.5f64.powi(opts.depth as i32);
    let (lo, hi) = e.bbox();
    let mid = (lo + hi) / 2.0;
    let half = ((hi - lo).re.max((hi - lo).im)) / 2.0 + 3.0 * scale;

    let mut pool_z: Vec<Complex64> = e
        .boundary_samples(opts.boundary_pool)?
        .iter()
        .map(|b| b.location)
        .collect();
    if e.has_interior() {
        pool_z.extend(e.interior_grid(opts.interior_pool));
    }
    let pool_v: Vec<Complex64> = pool_z.par_iter().map(|z| f_on_e.eval(*z)).collect();
    if pool_v.iter().any(|v| !v.is_finite()) {
        return invalid("function is not finite on E");
    }
    let pool = Pool {
        z: pool_z,
        v: pool_v,
    };

    let mut specs: Vec<(Complex64, f64, f64, Complex64)> = Vec::new();
    let mut dropped = 0.0;
    let root = build_node(e, mid, half, scale, h_min, &mut specs, &mut dropped);
    let cells: Vec<WhitneyCell> = specs
        .par_iter()
        .map(|(c, h, d, a)| fit_cell(f_on_e, e, &pool, k, *c, *h, *d, *a))
        .collect::<Result<_>>()?;
    Ok(ExtensionField {
        e: e.clone(),
        f_on_e: f_on_e.clone(),
        k,
        scale,
        cells,
        root,
        dropped_area: dropped,
        min_half_side: h_min,
    })
}

fn build_node(
    e: &Continuum,
    center: Complex64,
    half: f64,
    scale: f64,
    h_min: f64,
    cells: &mut Vec<(Complex64, f64, f64, Complex64)>,
    dropped: &mut f64,
) -> Node {
    let mut node = Node {
        center,
        half,
        children: Vec::new(),
        cell: None,
    };
    let d = e.distance(center);
    if d - SQRT_2 * half > 3.0 * scale {
        return node;
    }
    if d == 0.0 && e.distance_to_boundary(center) > SQRT_2 * half {
        return node;
    }
    if half <= WHITNEY_RATIO * d {
        cells.push((center, half, d, e.nearest_point(center)));
        node.cell = Some(cells.len() - 1);
        return node;
    }
    if half <= h_min {
        if d > 0.0 {
            *dropped += 4.0 * half * half;
        }
        return node;
    }
    let q = half / 2.0;
    for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
        let child = build_node(
            e,
            center + c64(sx * q, sy * q),
            q,
            scale,
            h_min,
            cells,
            dropped,
        );
        node.children.push(child);
    }
    node
}

#[allow(clippy::too_many_arguments)]
fn fit_cell(
    f: &FunctionHandle,
    e: &Continuum,
    pool: &Pool,
    k: usize,
    center: Complex64,
    half: f64,
    dist: f64,
    anchor: Complex64,
) -> Result<WhitneyCell> {
    let mut window = (FIT_WINDOW * dist).min(e.diameter());
    let needed = if k == 1 { 1 } else { 2 * k };
    for _ in 0..=4 {
        let mut pts = vec![anchor];
        let mut vals = vec![f.eval(anchor)];
        for (z, v) in pool.z.iter().zip(&pool.v) {
            if (z - anchor).norm() <= window && (z - anchor).norm() > 1e-14 {
                pts.push(*z);
                vals.push(*v);
            }
        }
        if pts.len() >= needed {
            let frame = Frame::new(anchor, window.max(1e-300));
            let fit = if k == 1 {
                CPolynomial::constant(frame, enclosing_circle(&vals).0)
            } else {
                lawson(&pts, &vals, k - 1, frame, DEFAULT_TOL)?.polynomial
            };
            return Ok(WhitneyCell {
                center,
                half_side: half,
                dist,
                anchor,
                fit,
                window,
            });
        }
        window *= 2.0;
    }
    invalid(format!("empty fit window for the cell at {center}"))
}

impl ExtensionField {
    pub fn domain(&self) -> &Continuum {
        &self.e
    }

    pub fn order(&self) -> usize {
        self.k
    }

    /// Support radius: `F = 0` where `d(ζ, E) ≥ support()`.
    pub fn support(&self) -> f64 {
        3.0 * self.scale
    }

    fn visit(&self, node: &Node, zeta: Complex64, out: &mut Vec<usize>) {
        let reach = 2.0 * node.half;
        if (zeta.re - node.center.re).abs() >= reach || (zeta.im - node.center.im).abs() >= reach {
            return;
        }
        if let Some(i) = node.cell {
            out.push(i);
        }
        for c in &node.children {
            self.visit(c, zeta, out);
        }
    }

    /// Cells whose bump does not vanish at `ζ`.
    pub fn cells_at(&self, zeta: Complex64) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit(&self.root, zeta, &mut out);
        out
    }

    /// `(Σ b, Σ ∂̄b)` at `ζ`.
    pub fn weight_sum(&self, zeta: Complex64) -> (f64, Complex64) {
        self.cells_at(zeta)
            .iter()
            .map(|i| self.cells[*i].weight(zeta))
            .fold((0.0, c64(0.0, 0.0)), |a, b| (a.0 + b.0, a.1 + b.1))
    }

    fn cutoff(&self, zeta: Complex64) -> (f64, Complex64) {
        let d = self.e.distance(zeta);
        let s = self.scale;
        let (h, dh) = smoothstep((d - 2.0 * s) / s);
        if dh == 0.0 || d == 0.0 {
            return (1.0 - h, c64(0.0, 0.0));
        }
        let grad = (zeta - self.e.nearest_point(zeta)) / d;
        (1.0 - h, -dh / s * grad / 2.0)
    }

    /// `(F, ∂̄F)` at `ζ`.
    pub fn eval_with_dbar(&self, zeta: Complex64) -> (Complex64, Complex64) {
        if self.e.contains(zeta) {
            return (self.f_on_e.eval(zeta), c64(0.0, 0.0));
        }
        let (chi, dchi) = self.cutoff(zeta);
        if chi == 0.0 {
            return (c64(0.0, 0.0), c64(0.0, 0.0));
        }
        let ids = self.cells_at(zeta);
        let mut s = 0.0;
        let mut sbar = c64(0.0, 0.0);
        let mut g = c64(0.0, 0.0);
        let mut gbar = c64(0.0, 0.0);
        let mut vals = Vec::with_capacity(ids.len());
        for i in &ids {
            let cell = &self.cells[*i];
            let (b, db) = cell.weight(zeta);
            if b == 0.0 && db == c64(0.0, 0.0) {
                continue;
            }
            let p = cell.fit.eval(zeta);
            s += b;
            sbar += db;
            g += b * p;
            gbar += db * p;
            vals.push(p);
        }
        if s <= 0.0 {
            // thin layer along L not covered by any cell
            let v = self.f_on_e.eval(self.e.nearest_point(zeta));
            return (chi * v, c64(0.0, 0.0));
        }
        // G = Σ b P / Σ b
        let gv = g / s;
        let dg = (gbar * s - g * sbar) / (s * s);
        (chi * gv, chi * dg + dchi * gv)
    }

    pub fn eval(&self, zeta: Complex64) -> Complex64 {
        self.eval_with_dbar(zeta).0
    }

    pub fn dbar(&self, zeta: Complex64) -> Complex64 {
        self.eval_with_dbar(zeta).1
    }
}

/// Gauss points per unit of `half-side/scale` in each direction.
pub const GAUSS_DENSITY: f64 = 32.0;

/// Options for [`area_integral_tn`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AreaOptions {
    /// Kernel power.
    pub m: usize,
    /// Upper bound on `(quadrature points)·n`.
    pub budget: usize,
}

impl Default for AreaOptions {
    fn default() -> Self {
        AreaOptions {
            m: 1,
            budget: 50_000_000,
        }
    }
}

/// `t_n(z) = −(1/π) Σ_cells Σ_gauss ∂̄F(ζ) Q(ζ, z)² w(ζ)` with
/// `Q = T_{⌊n/2⌋}` the combined kernel with pole `ζ`. Cells of half-side
/// `h` use `g×g` Gauss points with `g = ⌈32h/scale⌉`, so the midpoint rule
/// runs near `L`.
pub fn area_integral_tn(
    ext: &ExtensionField,
    builder: &KernelBuilder<'_>,
    n: usize,
    opts: AreaOptions,
) -> Result<CPolynomial> {
    let half = n / 2;
    if half < 4 {
        return invalid(format!("degree {n} too small for the area integral"));
    }
    let mut points: Vec<(Complex64, f64)> = Vec::new();
    for cell in &ext.cells {
        let g = ((GAUSS_DENSITY * cell.half_side / ext.scale).ceil() as usize).clamp(1, 32);
        let (x, w) = gauss_legendre(g);
        for (xi, wi) in x.iter().zip(&w) {
            for (yj, wj) in x.iter().zip(&w) {
                let z = cell.center + c64(xi * cell.half_side, yj * cell.half_side);
                points.push((z, wi * wj * cell.half_side * cell.half_side));
            }
        }
    }
    let weighted: Vec<(Complex64, Complex64)> = points
        .par_iter()
        .map(|(z, w)| (*z, ext.dbar(*z) * *w))
        .collect();
    let top = weighted.iter().map(|p| p.1.norm()).fold(0.0, f64::max);
    let active: Vec<(Complex64, Complex64)> = weighted
        .into_iter()
        .filter(|p| p.1.norm() > 1e-16 * top && !ext.domain().contains(p.0))
        .collect();
    if active.len().saturating_mul(n) > opts.budget {
        return Err(Error::Resource(format!(
            "area integral needs {} kernel builds at degree {n}, budget {}",
            active.len(),
            opts.budget
        )));
    }
    let frame = builder.frame();
    let coeffs = active
        .par_iter()
        .map(|(zeta, wdbar)| -> Result<Vec<Complex64>> {
            let q = builder.combined_kernel_at(half, opts.m, *zeta)?.t;
            let q2 = (&q * &q).scale_by(*wdbar * (-1.0 / PI));
            let mut c = q2.coefficients().to_vec();
            c.resize(n + 1, c64(0.0, 0.0));
            Ok(c)
        })
        .try_reduce(
            || vec![c64(0.0, 0.0); n + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                Ok(a)
            },
        )?;
    Ok(CPolynomial::new(frame, coeffs))
}
