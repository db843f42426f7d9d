//! The continuum `E`, its boundary `L` and membership classification.
//!
//! Four kinds of continua are built in: closed disks, axis-aligned ellipses,
//! segments and simple polygons. Each carries a boundary parameterization
//! `t ∈ [0, 1) ↦ L`, which for segments traverses the segment twice (once per
//! side), so every kind is treated as a closed curve.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::{c64, serde_c64};

/// Relative tolerance (times `diam E`) for a point to count as on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Geometric description of a built-in continuum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum Shape {
    Disk {
        #[serde(with = "serde_c64")]
        center: Complex64,
        radius: f64,
    },
    /// Axis-aligned ellipse with semi-axis `a` along the real axis and `b`
    /// along the imaginary axis.
    Ellipse {
        #[serde(with = "serde_c64")]
        center: Complex64,
        a: f64,
        b: f64,
    },
    Segment {
        #[serde(with = "serde_c64")]
        start: Complex64,
        #[serde(with = "serde_c64")]
        end: Complex64,
    },
    Polygon {
        #[serde(with = "serde_c64::vec")]
        vertices: Vec<Complex64>,
    },
}

/// A compact connected set with connected complement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawContinuum", into = "RawContinuum")]
pub struct Continuum {
    shape: Shape,
    convex: bool,
    diameter: f64,
}

#[derive(Serialize, Deserialize)]
struct RawContinuum {
    #[serde(flatten)]
    shape: Shape,
    #[serde(default)]
    convex: Option<bool>,
}

impl TryFrom<RawContinuum> for Continuum {
    type Error = Error;

    fn try_from(raw: RawContinuum) -> Result<Self> {
        let c = Continuum::new(raw.shape)?;
        if let Some(flag) = raw.convex {
            if flag != c.convex {
                return invalid(format!(
                    "convex flag {flag} does not match the geometry (computed {})",
                    c.convex
                ));
            }
        }
        Ok(c)
    }
}

impl From<Continuum> for RawContinuum {
    fn from(c: Continuum) -> Self {
        RawContinuum {
            shape: c.shape,
            convex: Some(c.convex),
        }
    }
}

/// Where a point sits relative to `E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Interior,
    Boundary,
    Exterior,
}

/// A point of `L` together with its boundary parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub location: Complex64,
    pub parameter: f64,
    /// Unit tangent in the direction of increasing parameter, if defined.
    pub tangent: Option<Complex64>,
}

impl Continuum {
    pub fn new(shape: Shape) -> Result<Self> {
        let shape = match shape {
            Shape::Disk { center, radius } => {
                if !(radius > 0.0 && radius.is_finite()) || !finite(center) {
                    return invalid("disk radius must be positive and finite");
                }
                Shape::Disk { center, radius }
            }
            Shape::Ellipse { center, a, b } => {
                if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) || !finite(center) {
                    return invalid("ellipse semi-axes must be positive and finite");
                }
                Shape::Ellipse { center, a, b }
            }
            Shape::Segment { start, end } => {
                if !finite(start) || !finite(end) || (end - start).norm() == 0.0 {
                    return invalid("segment endpoints must be finite and distinct");
                }
                Shape::Segment { start, end }
            }
            Shape::Polygon { vertices } => Shape::Polygon {
                vertices: validate_polygon(vertices)?,
            },
        };
        let convex = match &shape {
            Shape::Polygon { vertices } => polygon_is_convex(vertices),
            _ => true,
        };
        let diameter = match &shape {
            Shape::Disk { radius, .. } => 2.0 * radius,
            Shape::Ellipse { a, b, .. } => 2.0 * a.max(*b),
            Shape::Segment { start, end } => (end - start).norm(),
            Shape::Polygon { vertices } => {
                let mut d: f64 = 0.0;
                for (i, p) in vertices.iter().enumerate() {
                    for q in &vertices[i + 1..] {
                        d = d.max((p - q).norm());
                    }
                }
                d
            }
        };
        Ok(Continuum {
            shape,
            convex,
            diameter,
        })
    }

    pub fn disk(center: Complex64, radius: f64) -> Result<Self> {
        Self::new(Shape::Disk { center, radius })
    }

    pub fn unit_disk() -> Self {
        Self::disk(c64(0.0, 0.0), 1.0).expect("unit disk")
    }

    pub fn ellipse(center: Complex64, a: f64, b: f64) -> Result<Self> {
        Self::new(Shape::Ellipse { center, a, b })
    }

    pub fn segment(start: Complex64, end: Complex64) -> Result<Self> {
        Self::new(Shape::Segment { start, end })
    }

    /// `[-1, 1]`.
    pub fn unit_segment() -> Self {
        Self::segment(c64(-1.0, 0.0), c64(1.0, 0.0)).expect("unit segment")
    }

    /// Simple polygon; a clockwise vertex list is reversed.
    pub fn polygon(vertices: Vec<Complex64>) -> Result<Self> {
        Self::new(Shape::Polygon { vertices })
    }

    /// Axis-aligned square of side `side` centred at `center`.
    pub fn square(center: Complex64, side: f64) -> Result<Self> {
        let h = side / 2.0;
        Self::polygon(vec![
            center + c64(-h, -h),
            center + c64(h, -h),
            center + c64(h, h),
            center + c64(-h, h),
        ])
    }

    /// The L-shaped hexagon `{(0,0),(2,0),(2,1),(1,1),(1,2),(0,2)}`.
    pub fn l_shape() -> Self {
        Self::polygon(vec![
            c64(0.0, 0.0),
            c64(2.0, 0.0),
            c64(2.0, 1.0),
            c64(1.0, 1.0),
            c64(1.0, 2.0),
            c64(0.0, 2.0),
        ])
        .expect("L-shape")
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Whether `E⁰ ≠ ∅`.
    pub fn has_interior(&self) -> bool {
        !matches!(self.shape, Shape::Segment { .. })
    }

    pub fn kind_name(&self) -> &'static str {
        match self.shape {
            Shape::Disk { .. } => "disk",
            Shape::Ellipse { .. } => "ellipse",
            Shape::Segment { .. } => "segment",
            Shape::Polygon { .. } => "polygon",
        }
    }

    /// Area centroid (midpoint for segments).
    pub fn centroid(&self) -> Complex64 {
        match &self.shape {
            Shape::Disk { center, .. } | Shape::Ellipse { center, .. } => *center,
            Shape::Segment { start, end } => (start + end) / 2.0,
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                let mut area = 0.0;
                let mut acc = c64(0.0, 0.0);
                for i in 0..n {
                    let p = vertices[i];
                    let q = vertices[(i + 1) % n];
                    let cross = p.re * q.im - q.re * p.im;
                    area += cross;
                    acc += (p + q) * cross;
                }
                acc / (3.0 * area)
            }
        }
    }

    pub fn perimeter(&self) -> f64 {
        match &self.shape {
            Shape::Disk { radius, .. } => 2.0 * PI * radius,
            Shape::Ellipse { a, b, .. } => {
                // Ramanujan's second approximation is accurate to ~1e-10 for
                // moderate eccentricity; the perimeter only sets sampling density.
                let h = ((a - b) / (a + b)).powi(2);
                PI * (a + b) * (1.0 + 3.0 * h / (10.0 + (4.0 - 3.0 * h).sqrt()))
            }
            Shape::Segment { start, end } => 2.0 * (end - start).norm(),
            Shape::Polygon { vertices } => edges(vertices).map(|(p, q)| (q - p).norm()).sum(),
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bbox(&self) -> (Complex64, Complex64) {
        match &self.shape {
            Shape::Disk { center, radius } => (
                center - c64(*radius, *radius),
                center + c64(*radius, *radius),
            ),
            Shape::Ellipse { center, a, b } => (center - c64(*a, *b), center + c64(*a, *b)),
            Shape::Segment { start, end } => (
                c64(start.re.min(end.re), start.im.min(end.im)),
                c64(start.re.max(end.re), start.im.max(end.im)),
            ),
            Shape::Polygon { vertices } => {
                let mut lo = vertices[0];
                let mut hi = vertices[0];
                for v in vertices {
                    lo = c64(lo.re.min(v.re), lo.im.min(v.im));
                    hi = c64(hi.re.max(v.re), hi.im.max(v.im));
                }
                (lo, hi)
            }
        }
    }

    /// Boundary point at parameter `t` (taken modulo 1).
    pub fn boundary_point(&self, t: f64) -> BoundaryPoint {
        let t = t.rem_euclid(1.0);
        let (location, tangent) = match &self.shape {
            Shape::Disk { center, radius } => {
                let e = Complex64::from_polar(1.0, 2.0 * PI * t);
                (center + e * *radius, Some(e * c64(0.0, 1.0)))
            }
            Shape::Ellipse { center, a, b } => {
                let (s, c) = (2.0 * PI * t).sin_cos();
                let d = c64(-a * s, b * c);
                (center + c64(a * c, b * s), Some(d / d.norm()))
            }
            Shape::Segment { start, end } => {
                // t = 0 at `end`, t = 1/2 at `start`.
                let dir = (start - end) / (start - end).norm();
                if t <= 0.5 {
                    let z = end + (start - end) * (2.0 * t);
                    (z, interior_tangent(t, 0.5, dir))
                } else {
                    let z = start + (end - start) * (2.0 * t - 1.0);
                    (z, interior_tangent(t - 0.5, 0.5, -dir))
                }
            }
            Shape::Polygon { vertices } => {
                let perimeter = self.perimeter();
                let mut s = t * perimeter;
                let mut out = (vertices[0], None);
                for (p, q) in edges(vertices) {
                    let len = (q - p).norm();
                    if s < len {
                        let tan = if s > 0.0 { Some((q - p) / len) } else { None };
                        out = (p + (q - p) * (s / len), tan);
                        break;
                    }
                    s -= len;
                }
                out
            }
        };
        BoundaryPoint {
            location,
            parameter: t,
            tangent,
        }
    }

    /// `m` points of `L` in parameter order.
    ///
    /// Disks, ellipses and segments use a uniform parameter grid starting at
    /// `t = 0`. Polygons distribute points edge by edge, proportionally to edge
    /// length, and always include every vertex.
    pub fn boundary_samples(&self, m: usize) -> Result<Vec<BoundaryPoint>> {
        if m < 4 {
            return invalid(format!("need at least 4 boundary samples, got {m}"));
        }
        match &self.shape {
            Shape::Polygon { vertices } => {
                let nv = vertices.len();
                if m < nv {
                    return invalid(format!(
                        "polygon with {nv} vertices needs at least {nv} samples, got {m}"
                    ));
                }
                let lens: Vec<f64> = edges(vertices).map(|(p, q)| (q - p).norm()).collect();
                let counts = allocate_counts(&lens, m);
                let perimeter: f64 = lens.iter().sum();
                let mut out = Vec::with_capacity(m);
                let mut s0 = 0.0;
                for (i, (p, q)) in edges(vertices).enumerate() {
                    let n = counts[i];
                    for j in 0..n {
                        let frac = j as f64 / n as f64;
                        let tan = if j == 0 {
                            None
                        } else {
                            Some((q - p) / lens[i])
                        };
                        out.push(BoundaryPoint {
                            location: p + (q - p) * frac,
                            parameter: (s0 + frac * lens[i]) / perimeter,
                            tangent: tan,
                        });
                    }
                    s0 += lens[i];
                }
                Ok(out)
            }
            _ => Ok((0..m)
                .map(|j| self.boundary_point(j as f64 / m as f64))
                .collect()),
        }
    }

    /// Upper bound on `|dγ/dt|`, used to convert parameter gaps into arc length.
    pub fn max_speed(&self) -> f64 {
        match &self.shape {
            Shape::Disk { radius, .. } => 2.0 * PI * radius,
            Shape::Ellipse { a, b, .. } => 2.0 * PI * a.max(*b),
            _ => self.perimeter(),
        }
    }

    /// Nearest point of `L` to `z`, with its parameter.
    pub fn nearest_boundary_point(&self, z: Complex64) -> (Complex64, f64) {
        match &self.shape {
            Shape::Disk { center, radius } => {
                let d = z - center;
                let dir = if d.norm() == 0.0 {
                    c64(1.0, 0.0)
                } else {
                    d / d.norm()
                };
                let t = (dir.arg() / (2.0 * PI)).rem_euclid(1.0);
                (center + dir * *radius, t)
            }
            Shape::Ellipse { center, a, b } => {
                let t = ellipse_nearest_param(z - center, *a, *b);
                (self.boundary_point(t).location, t)
            }
            Shape::Segment { start, end } => {
                let d = end - start;
                let s = (((z - start) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
                let p = start + d * s;
                // Parameter on the side facing `z`.
                let side = ((z - start) * d.conj()).im;
                let t = if side <= 0.0 {
                    0.5 * (1.0 - s)
                } else {
                    0.5 + 0.5 * s
                };
                (p, t.rem_euclid(1.0))
            }
            Shape::Polygon { vertices } => {
                let perimeter = self.perimeter();
                let mut best = (f64::INFINITY, vertices[0], 0.0);
                let mut s0 = 0.0;
                for (p, q) in edges(vertices) {
                    let d = q - p;
                    let len = d.norm();
                    let s = (((z - p) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
                    let w = p + d * s;
                    let dist = (z - w).norm();
                    if dist < best.0 {
                        best = (dist, w, (s0 + s * len) / perimeter);
                    }
                    s0 += len;
                }
                (best.1, best.2.rem_euclid(1.0))
            }
        }
    }

    /// `dist(z, L)`.
    pub fn distance_to_boundary(&self, z: Complex64) -> f64 {
        match &self.shape {
            Shape::Disk { center, radius } => ((z - center).norm() - radius).abs(),
            _ => (z - self.nearest_boundary_point(z).0).norm(),
        }
    }

    /// `d(z, E)`: zero on `E`.
    pub fn distance(&self, z: Complex64) -> f64 {
        match self.classify(z) {
            Location::Exterior => self.distance_to_boundary(z),
            _ => 0.0,
        }
    }

    /// Nearest point of `E` to `z` (`z` itself when `z ∈ E`).
    pub fn nearest_point(&self, z: Complex64) -> Complex64 {
        match self.classify(z) {
            Location::Exterior => self.nearest_boundary_point(z).0,
            _ => z,
        }
    }

    pub fn classify(&self, z: Complex64) -> Location {
        if self.distance_to_boundary(z) <= BOUNDARY_TOL * self.diameter {
            return Location::Boundary;
        }
        let inside = match &self.shape {
            Shape::Disk { center, radius } => (z - center).norm() < *radius,
            Shape::Ellipse { center, a, b } => {
                let d = z - center;
                (d.re / a).powi(2) + (d.im / b).powi(2) < 1.0
            }
            Shape::Segment { .. } => false,
            Shape::Polygon { vertices } => point_in_polygon(vertices, z),
        };
        if inside {
            Location::Interior
        } else {
            Location::Exterior
        }
    }

    /// `z ∈ E` (interior or boundary).
    pub fn contains(&self, z: Complex64) -> bool {
        self.classify(z) != Location::Exterior
    }

    /// Outward unit normal at the boundary point with parameter `t`, for
    /// convex continua. At polygon vertices and segment endpoints the bisector
    /// of the adjacent normals is returned; at interior points of a segment the
    /// normal on the side the parameter runs along.
    pub fn outward_normal(&self, t: f64) -> Result<Complex64> {
        if !self.convex {
            return Err(Error::Unsupported(
                "outward normal requires a convex continuum".into(),
            ));
        }
        let t = t.rem_euclid(1.0);
        Ok(match &self.shape {
            Shape::Disk { .. } => Complex64::from_polar(1.0, 2.0 * PI * t),
            Shape::Ellipse { a, b, .. } => {
                let (s, c) = (2.0 * PI * t).sin_cos();
                let n = c64(b * c, a * s);
                n / n.norm()
            }
            Shape::Segment { start, end } => {
                let dir = (end - start) / (end - start).norm();
                let tol = 1e-12;
                if t < tol || 1.0 - t < tol {
                    dir
                } else if (t - 0.5).abs() < tol {
                    -dir
                } else if t < 0.5 {
                    // Running from `end` to `start`: outward side is to the right.
                    -dir * c64(0.0, -1.0)
                } else {
                    dir * c64(0.0, -1.0)
                }
            }
            Shape::Polygon { vertices } => {
                let perimeter = self.perimeter();
                let mut s = t * perimeter;
                let n = vertices.len();
                let normal_of = |i: usize| {
                    let d = vertices[(i + 1) % n] - vertices[i];
                    d * c64(0.0, -1.0) / d.norm()
                };
                let mut out = normal_of(0);
                for i in 0..n {
                    let len = (vertices[(i + 1) % n] - vertices[i]).norm();
                    let tol = 1e-12 * perimeter;
                    if s.abs() <= tol {
                        let b = normal_of(i) + normal_of((i + n - 1) % n);
                        out = b / b.norm();
                        break;
                    }
                    if s < len - tol {
                        out = normal_of(i);
                        break;
                    }
                    s -= len;
                    if s.abs() <= tol {
                        let b = normal_of(i) + normal_of((i + 1) % n);
                        out = b / b.norm();
                        break;
                    }
                }
                out
            }
        })
    }

    /// Points of `E` on a `res × res` grid over the bounding box. For segments
    /// the grid degenerates to `res` points along the segment.
    pub fn interior_grid(&self, res: usize) -> Vec<Complex64> {
        if let Shape::Segment { start, end } = &self.shape {
            return (0..res)
                .map(|j| start + (end - start) * ((j as f64 + 0.5) / res as f64))
                .collect();
        }
        let (lo, hi) = self.bbox();
        let mut out = Vec::new();
        for i in 0..res {
            for j in 0..res {
                let z = c64(
                    lo.re + (hi.re - lo.re) * (i as f64 + 0.5) / res as f64,
                    lo.im + (hi.im - lo.im) * (j as f64 + 0.5) / res as f64,
                );
                if self.classify(z) == Location::Interior {
                    out.push(z);
                }
            }
        }
        out
    }

    /// Points of `L` lying in the closed disk `D(z, δ)`.
    ///
    /// A coarse scan of the parameterization locates parameter windows that
    /// can meet the disk; each window is then resampled at a spacing of about
    /// `δ / density`.
    pub fn boundary_points_in_disk(
        &self,
        z: Complex64,
        delta: f64,
        density: usize,
    ) -> Vec<Complex64> {
        let perimeter = self.perimeter();
        let coarse = ((16.0 * perimeter / delta).ceil() as usize).clamp(512, 16384);
        let speed = self.max_speed();
        let dt = 1.0 / coarse as f64;
        let reach = delta + speed * dt;
        let mut windows: Vec<(f64, f64)> = Vec::new();
        for i in 0..coarse {
            let t = i as f64 * dt;
            if (self.boundary_point(t).location - z).norm() <= reach {
                let (a, b) = (t - dt, t + dt);
                match windows.last_mut() {
                    Some(last) if last.1 >= a => last.1 = b,
                    _ => windows.push((a, b)),
                }
            }
        }
        let mut out = Vec::new();
        for (a, b) in windows {
            let arc = speed * (b - a);
            let n = ((density as f64 * arc / delta).ceil() as usize).clamp(density, 200_000);
            for j in 0..=n {
                let t = a + (b - a) * j as f64 / n as f64;
                let p = self.boundary_point(t).location;
                if (p - z).norm() <= delta {
                    out.push(p);
                }
            }
        }
        if let Shape::Polygon { vertices } = &self.shape {
            out.extend(vertices.iter().filter(|v| (*v - z).norm() <= delta));
        }
        out
    }

    /// The constant `c(E) ≥ 1` bounding in-`E` arc length by chord length.
    ///
    /// Convex continua return exactly 1 (straight chords lie in `E`). For
    /// polygons the shortest in-`E` path between two points is computed on the
    /// visibility graph spanned by the points and the reflex vertices, which
    /// gives exact geodesics. Pairs are formed between `m` boundary samples and
    /// the union of those samples and the grid points of
    /// [`Continuum::interior_grid`] at `grid` points per side.
    pub fn h_constant(&self, m: usize, grid: usize) -> Result<f64> {
        if m < 16 {
            return invalid(format!("h_constant needs at least 16 samples, got {m}"));
        }
        let vertices = match &self.shape {
            Shape::Polygon { vertices } if !self.convex => vertices,
            _ => return Ok(1.0),
        };
        let graph = VisibilityGraph::new(vertices);
        let boundary: Vec<Complex64> = self
            .boundary_samples(m)?
            .into_iter()
            .map(|b| b.location)
            .collect();
        let mut targets = boundary.clone();
        targets.extend(self.interior_grid(grid));
        let target_views: Vec<Vec<Option<f64>>> =
            targets.iter().map(|&q| graph.reflex_view(q)).collect();
        let mut worst: f64 = 1.0;
        for &p in &boundary {
            let from = graph.reflex_view(p);
            // Shortest distance from `p` to every reflex vertex.
            let to_reflex = graph.distances_from(&from);
            for (q, view) in targets.iter().zip(&target_views) {
                let chord = (p - q).norm();
                if chord <= 1e-12 * self.diameter {
                    continue;
                }
                let path = graph.geodesic(p, *q, &to_reflex, view);
                worst = worst.max(path / chord);
            }
        }
        Ok(worst)
    }
}

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn interior_tangent(s: f64, half: f64, dir: Complex64) -> Option<Complex64> {
    if s > 0.0 && s < half {
        Some(dir)
    } else {
        None
    }
}

pub(crate) fn edges(vertices: &[Complex64]) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
    let n = vertices.len();
    (0..n).map(move |i| (vertices[i], vertices[(i + 1) % n]))
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn signed_area(vertices: &[Complex64]) -> f64 {
    edges(vertices).map(|(p, q)| cross(p, q)).sum::<f64>() / 2.0
}

fn validate_polygon(mut vertices: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let n = vertices.len();
    if n < 3 {
        return invalid("polygon needs at least 3 vertices");
    }
    if vertices.iter().any(|v| !finite(*v)) {
        return invalid("polygon vertices must be finite");
    }
    let scale = vertices
        .iter()
        .map(|v| (v - vertices[0]).norm())
        .fold(0.0, f64::max);
    for i in 0..n {
        for j in i + 1..n {
            if (vertices[i] - vertices[j]).norm() <= 1e-12 * scale {
                return invalid(format!("repeated polygon vertex at index {j}"));
            }
        }
    }
    // Simplicity: non-adjacent edges must not meet.
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            let (c, d) = (vertices[j], vertices[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return invalid(format!("polygon edges {i} and {j} intersect"));
            }
        }
    }
    let area = signed_area(&vertices);
    if area.abs() <= 1e-14 * scale * scale {
        return invalid("polygon is degenerate (zero area)");
    }
    if area < 0.0 {
        vertices.reverse();
    }
    Ok(vertices)
}

fn polygon_is_convex(vertices: &[Complex64]) -> bool {
    let n = vertices.len();
    (0..n).all(|i| {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let c = vertices[(i + 2) % n];
        cross(b - a, c - b) >= -1e-14 * (b - a).norm() * (c - b).norm()
    })
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    cross(b - a, c - a)
}

fn on_segment(a: Complex64, b: Complex64, p: Complex64) -> bool {
    p.re >= a.re.min(b.re) - 1e-15
        && p.re <= a.re.max(b.re) + 1e-15
        && p.im >= a.im.min(b.im) - 1e-15
        && p.im <= a.im.max(b.im) + 1e-15
}

fn segments_intersect(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

fn point_in_polygon(vertices: &[Complex64], z: Complex64) -> bool {
    let mut inside = false;
    for (p, q) in edges(vertices) {
        if (p.im > z.im) != (q.im > z.im) {
            let x = p.re + (z.im - p.im) * (q.re - p.re) / (q.im - p.im);
            if z.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Largest-remainder allocation of `m` samples over edges, at least one each.
fn allocate_counts(lens: &[f64], m: usize) -> Vec<usize> {
    let total: f64 = lens.iter().sum();
    let ideal: Vec<f64> = lens.iter().map(|l| m as f64 * l / total).collect();
    let mut counts: Vec<usize> = ideal.iter().map(|x| (x.floor() as usize).max(1)).collect();
    let mut sum: usize = counts.iter().sum();
    while sum < m {
        let i = (0..lens.len())
            .max_by(|&i, &j| {
                (ideal[i] - counts[i] as f64)
                    .partial_cmp(&(ideal[j] - counts[j] as f64))
                    .unwrap()
            })
            .unwrap();
        counts[i] += 1;
        sum += 1;
    }
    while sum > m {
        let i = (0..lens.len())
            .filter(|&i| counts[i] > 1)
            .min_by(|&i, &j| {
                (lens[i] / counts[i] as f64)
                    .partial_cmp(&(lens[j] / counts[j] as f64))
                    .unwrap()
            })
            .unwrap();
        counts[i] -= 1;
        sum -= 1;
    }
    counts
}

/// Parameter of the nearest point on the ellipse `x²/a² + y²/b² = 1` to `d`.
fn ellipse_nearest_param(d: Complex64, a: f64, b: f64) -> f64 {
    let g = |phi: f64| {
        let (s, c) = phi.sin_cos();
        let p = c64(a * c, b * s);
        let dp = c64(-a * s, b * c);
        let ddp = c64(-a * c, -b * s);
        let r = p - d;
        let f = (r * dp.conj()).re;
        let fp = dp.norm_sqr() + (r * ddp.conj()).re;
        (r.norm_sqr(), f, fp)
    };
    let coarse = 64;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..coarse {
        let phi = 2.0 * PI * i as f64 / coarse as f64;
        let v = g(phi).0;
        if v < best.0 {
            best = (v, phi);
        }
    }
    let h = 2.0 * PI / coarse as f64;
    let (mut lo, mut hi) = (best.1 - h, best.1 + h);
    let mut phi = best.1;
    for _ in 0..100 {
        let (_, f, fp) = g(phi);
        if f.abs() < 1e-15 * (a + b) * (a + b) {
            break;
        }
        let (_, flo, _) = g(lo);
        // Keep a sign-changing bracket when there is one.
        if flo * f < 0.0 {
            hi = phi;
        } else {
            lo = phi;
        }
        let mut next = phi - f / fp;
        if fp.is_nan() || fp <= 0.0 || next <= lo.min(hi) || next >= lo.max(hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - phi).abs() < 1e-16 {
            phi = next;
            break;
        }
        phi = next;
    }
    (phi / (2.0 * PI)).rem_euclid(1.0)
}

/// Shortest paths inside a simple polygon through its reflex vertices.
struct VisibilityGraph<'a> {
    vertices: &'a [Complex64],
    reflex: Vec<Complex64>,
    /// All-pairs shortest distances between reflex vertices.
    between: Vec<Vec<f64>>,
}

impl<'a> VisibilityGraph<'a> {
    fn new(vertices: &'a [Complex64]) -> Self {
        let n = vertices.len();
        let reflex: Vec<Complex64> = (0..n)
            .filter(|&i| {
                let a = vertices[(i + n - 1) % n];
                let b = vertices[i];
                let c = vertices[(i + 1) % n];
                cross(b - a, c - b) < 0.0
            })
            .map(|i| vertices[i])
            .collect();
        let r = reflex.len();
        let mut between = vec![vec![f64::INFINITY; r]; r];
        for i in 0..r {
            between[i][i] = 0.0;
            for j in i + 1..r {
                if segment_inside(vertices, reflex[i], reflex[j]) {
                    let d = (reflex[i] - reflex[j]).norm();
                    between[i][j] = d;
                    between[j][i] = d;
                }
            }
        }
        for k in 0..r {
            for i in 0..r {
                for j in 0..r {
                    let via = between[i][k] + between[k][j];
                    if via < between[i][j] {
                        between[i][j] = via;
                    }
                }
            }
        }
        VisibilityGraph {
            vertices,
            reflex,
            between,
        }
    }

    /// Straight-line distances from `p` to the reflex vertices it can see.
    fn reflex_view(&self, p: Complex64) -> Vec<Option<f64>> {
        self.reflex
            .iter()
            .map(|&v| segment_inside(self.vertices, p, v).then(|| (p - v).norm()))
            .collect()
    }

    fn distances_from(&self, view: &[Option<f64>]) -> Vec<f64> {
        let r = self.reflex.len();
        (0..r)
            .map(|j| {
                (0..r)
                    .filter_map(|i| view[i].map(|d| d + self.between[i][j]))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    fn geodesic(
        &self,
        p: Complex64,
        q: Complex64,
        to_reflex: &[f64],
        q_view: &[Option<f64>],
    ) -> f64 {
        if segment_inside(self.vertices, p, q) {
            return (p - q).norm();
        }
        to_reflex
            .iter()
            .zip(q_view)
            .filter_map(|(a, b)| b.map(|d| a + d))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Whether the closed segment `[p, q]` lies in the closed polygon.
pub(crate) fn segment_inside(vertices: &[Complex64], p: Complex64, q: Complex64) -> bool {
    let d = q - p;
    let len = d.norm();
    if len == 0.0 {
        return true;
    }
    let scale = vertices
        .iter()
        .map(|v| (v - vertices[0]).norm())
        .fold(0.0, f64::max);
    let tol = 1e-12 * scale;
    let mut ts = vec![0.0, 1.0];
    for (a, b) in edges(vertices) {
        let e = b - a;
        let denom = cross(d, e);
        if denom.abs() > 1e-15 * len * e.norm() {
            let t = cross(a - p, e) / denom;
            let s = cross(a - p, d) / denom;
            if (-1e-12..=1.0 + 1e-12).contains(&s) && t > 0.0 && t < 1.0 {
                ts.push(t);
            }
        } else {
            // Parallel: record where the endpoints of the edge project.
            for v in [a, b] {
                let t = ((v - p) * d.conj()).re / (len * len);
                if t > 0.0 && t < 1.0 && cross(d, v - p).abs() <= tol * len {
                    ts.push(t);
                }
            }
        }
    }
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.windows(2).all(|w| {
        if w[1] - w[0] <= 1e-14 {
            return true;
        }
        let m = p + d * (0.5 * (w[0] + w[1]));
        point_in_polygon(vertices, m) || polygon_boundary_distance(vertices, m) <= tol
    })
}

fn polygon_boundary_distance(vertices: &[Complex64], z: Complex64) -> f64 {
    edges(vertices)
        .map(|(p, q)| {
            let d = q - p;
            let s = (((z - p) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
            (z - p - d * s).norm()
        })
        .fold(f64::INFINITY, f64::min)
}
