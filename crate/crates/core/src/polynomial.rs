//! Complex polynomials stored in a centred and scaled coordinate.
//!
//! A [`CPolynomial`] keeps its coefficients in `ẑ = (z − c)/(s·u)`, where the
//! [`Frame`] `(c, s, u)` is normally the centroid, half-diameter and axis of
//! the continuum. Monomials in the raw coordinate are badly conditioned on
//! off-centre domains; in the scaled coordinate Horner's rule behaves
//! uniformly across domains. On segments and elongated ellipses the
//! coefficients are taken in the Chebyshev basis `T_k(ẑ)` instead, since
//! monomials lose about `log10(1 + √2)` digits per degree on an interval.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Continuum, Shape};
use crate::{c64, serde_c64};

/// Largest degree any operation may produce.
pub const MAX_DEGREE: usize = 4096;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// `ẑ^k`.
    #[default]
    Power,
    /// `T_k(ẑ)`.
    Chebyshev,
}

fn unit_axis() -> Complex64 {
    c64(1.0, 0.0)
}

/// Affine coordinate `ẑ = (z − center)/(scale·axis)` and a coefficient basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    #[serde(with = "serde_c64")]
    pub center: Complex64,
    pub scale: f64,
    /// Unit direction of the real `ẑ` axis.
    #[serde(with = "serde_c64", default = "unit_axis")]
    pub axis: Complex64,
    #[serde(default)]
    pub basis: Basis,
}

impl Frame {
    pub const RAW: Frame = Frame {
        center: Complex64 { re: 0.0, im: 0.0 },
        scale: 1.0,
        axis: Complex64 { re: 1.0, im: 0.0 },
        basis: Basis::Power,
    };

    pub fn new(center: Complex64, scale: f64) -> Self {
        assert!(
            scale > 0.0 && scale.is_finite(),
            "frame scale must be positive"
        );
        Frame {
            center,
            scale,
            axis: unit_axis(),
            basis: Basis::Power,
        }
    }

    /// Chebyshev frame of the segment `[center − half·axis, center + half·axis]`.
    pub fn chebyshev(center: Complex64, half: f64, axis: Complex64) -> Self {
        assert!(
            half > 0.0 && half.is_finite(),
            "frame scale must be positive"
        );
        assert!(
            (axis.norm() - 1.0).abs() < 1e-12,
            "frame axis must be a unit vector"
        );
        Frame {
            center,
            scale: half,
            axis,
            basis: Basis::Chebyshev,
        }
    }

    /// Power frame on the centroid and half-diameter, except for segments and
    /// ellipses with axis ratio below 0.9, which get the Chebyshev frame of
    /// the segment or of the focal segment.
    pub fn for_continuum(e: &Continuum) -> Self {
        match e.shape() {
            Shape::Segment { start, end } => {
                let d = end - start;
                Frame::chebyshev((start + end) / 2.0, d.norm() / 2.0, d / d.norm())
            }
            Shape::Ellipse { center, a, b } if a.min(*b) <= 0.9 * a.max(*b) => {
                let focal = (a * a - b * b).abs().sqrt();
                let axis = if a >= b { c64(1.0, 0.0) } else { c64(0.0, 1.0) };
                Frame::chebyshev(*center, focal, axis)
            }
            _ => Frame::new(e.centroid(), e.diameter() / 2.0),
        }
    }

    /// `dz/dẑ = scale·axis`.
    #[inline]
    pub fn unit(&self) -> Complex64 {
        self.axis * self.scale
    }

    #[inline]
    pub fn to_local(&self, z: Complex64) -> Complex64 {
        (z - self.center) / self.unit()
    }
}

/// Polynomial with complex coefficients; trailing zeros are trimmed so the
/// leading coefficient is nonzero unless the polynomial is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CPolynomial {
    #[serde(flatten)]
    frame: Frame,
    #[serde(with = "serde_c64::vec")]
    coefficients: Vec<Complex64>,
}

impl CPolynomial {
    /// Coefficients are in the frame's basis of its local coordinate.
    pub fn new(frame: Frame, mut coefficients: Vec<Complex64>) -> Self {
        while coefficients.last().is_some_and(|c| *c == c64(0.0, 0.0)) {
            coefficients.pop();
        }
        assert!(
            coefficients.len() <= MAX_DEGREE + 1,
            "polynomial degree {} exceeds the cap {MAX_DEGREE}",
            coefficients.len() - 1
        );
        CPolynomial {
            frame,
            coefficients,
        }
    }

    pub fn zero(frame: Frame) -> Self {
        CPolynomial {
            frame,
            coefficients: Vec::new(),
        }
    }

    pub fn constant(frame: Frame, c: Complex64) -> Self {
        Self::new(frame, vec![c])
    }

    /// The polynomial `z − a`.
    pub fn linear(frame: Frame, a: Complex64) -> Self {
        // z − a = s·u·ẑ + (c − a); T_1(ẑ) = ẑ
        Self::new(frame, vec![frame.center - a, frame.unit()])
    }

    /// `∏ (z − r)`; factors are multiplied in Leja order.
    pub fn from_roots(frame: Frame, roots: &[Complex64]) -> Self {
        let mut p = Self::constant(frame, c64(1.0, 0.0));
        for r in leja_order(roots, frame) {
            p = p.mul_linear(r);
        }
        p
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// Coefficients in the frame basis (index = degree).
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// `max |coefficient|` in the local coordinate.
    pub fn coeff_norm(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let x = self.frame.to_local(z);
        match self.frame.basis {
            Basis::Power => self
                .coefficients
                .iter()
                .rev()
                .fold(c64(0.0, 0.0), |acc, c| acc * x + c),
            Basis::Chebyshev => clenshaw(&self.coefficients, x),
        }
    }

    /// `[p(z), p'(z), …, p^{(l_max)}(z)]`.
    pub fn eval_derivatives(&self, z: Complex64, l_max: usize) -> Vec<Complex64> {
        if self.frame.basis == Basis::Chebyshev {
            let mut out = Vec::with_capacity(l_max + 1);
            let mut p = self.clone();
            for l in 0..=l_max {
                out.push(p.eval(z));
                if l < l_max {
                    p = p.derivative();
                }
            }
            return out;
        }
        let x = self.frame.to_local(z);
        // acc[l] holds the l-th Taylor coefficient p^{(l)}/l! in the local coordinate.
        let mut acc = vec![c64(0.0, 0.0); l_max + 1];
        for c in self.coefficients.iter().rev() {
            for l in (1..=l_max).rev() {
                acc[l] = acc[l] * x + acc[l - 1];
            }
            acc[0] = acc[0] * x + c;
        }
        let mut fact = 1.0;
        let mut unit_pow = c64(1.0, 0.0);
        for (l, a) in acc.iter_mut().enumerate() {
            if l > 0 {
                fact *= l as f64;
                unit_pow *= self.frame.unit();
            }
            *a *= fact / unit_pow;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let u = self.frame.unit();
        let c = &self.coefficients;
        let coeffs = match self.frame.basis {
            Basis::Power => c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| c * (j as f64) / u)
                .collect(),
            Basis::Chebyshev => {
                // d_{k−1} = d_{k+1} + 2k·c_k, then d_0 is halved
                let n = c.len();
                if n <= 1 {
                    Vec::new()
                } else {
                    let mut d = vec![c64(0.0, 0.0); n + 1];
                    for k in (1..n).rev() {
                        d[k - 1] = d[k + 1] + c[k] * (2.0 * k as f64);
                    }
                    d[0] /= 2.0;
                    d.truncate(n - 1);
                    d.into_iter().map(|x| x / u).collect()
                }
            }
        };
        Self::new(self.frame, coeffs)
    }

    /// l-th derivative.
    pub fn nth_derivative(&self, l: usize) -> Self {
        (0..l).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn scale_by(&self, a: Complex64) -> Self {
        Self::new(
            self.frame,
            self.coefficients.iter().map(|c| c * a).collect(),
        )
    }

    /// `(z − a)·p(z)`.
    pub fn mul_linear(&self, a: Complex64) -> Self {
        let u = self.frame.unit();
        let root = self.frame.to_local(a);
        let mut out = times_local(&self.coefficients, self.frame.basis);
        for (o, c) in out.iter_mut().zip(&self.coefficients) {
            *o -= c * root;
        }
        Self::new(self.frame, out.into_iter().map(|c| c * u).collect())
    }

    /// Synthetic division by `(z − ζ)`: returns the quotient and the
    /// remainder `p(ζ)`.
    pub fn div_linear_rem(&self, zeta: Complex64) -> (Self, Complex64) {
        if self.coefficients.is_empty() {
            return (Self::zero(self.frame), c64(0.0, 0.0));
        }
        let u = self.frame.unit();
        let root = self.frame.to_local(zeta);
        if self.frame.basis == Basis::Chebyshev {
            let (q, r) = chebyshev_div_linear(&self.coefficients, root);
            return (
                Self::new(self.frame, q.into_iter().map(|c| c / u).collect()),
                r,
            );
        }
        let n = self.coefficients.len();
        let mut q = vec![c64(0.0, 0.0); n - 1];
        let mut carry = c64(0.0, 0.0);
        for j in (0..n).rev() {
            let v = self.coefficients[j] + carry * root;
            if j == 0 {
                carry = v;
            } else {
                q[j - 1] = v;
                carry = v;
            }
        }
        // p(ẑ) = (ẑ − ζ̂)·q(ẑ) + r and z − ζ = s·u·(ẑ − ζ̂).
        let quotient = Self::new(self.frame, q.into_iter().map(|c| c / u).collect());
        (quotient, carry)
    }

    /// Exact division by `(z − ζ)`; fails when `|p(ζ)| > 1e-9·‖p‖`.
    pub fn divide_linear(&self, zeta: Complex64) -> Result<Self> {
        let (q, r) = self.div_linear_rem(zeta);
        let tol = 1e-9 * self.coeff_norm().max(f64::MIN_POSITIVE);
        if r.norm() > tol {
            return Err(Error::NotDivisible {
                zeta: format!("{zeta}"),
                remainder: r.norm(),
            });
        }
        Ok(q)
    }

    /// `p^k`.
    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::constant(self.frame, c64(1.0, 0.0));
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                out = &out * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        out
    }

    /// Same polynomial expressed in another frame.
    pub fn to_frame(&self, target: Frame) -> Self {
        if target == self.frame {
            return self.clone();
        }
        // ẑ_old = a·ẑ_new + b; T_1(ẑ_new) = ẑ_new in either basis.
        let a = target.unit() / self.frame.unit();
        let b = (target.center - self.frame.center) / self.frame.unit();
        let lin = CPolynomial {
            frame: target,
            coefficients: vec![b, a],
        };
        let konst = |c: Complex64| Self::constant(target, c);
        match self.frame.basis {
            Basis::Power => {
                let mut out = Self::zero(target);
                for c in self.coefficients.iter().rev() {
                    out = &(&out * &lin) + &konst(*c);
                }
                out
            }
            Basis::Chebyshev => {
                // Clenshaw with polynomial arithmetic.
                let two_lin = lin.scale_by(c64(2.0, 0.0));
                let (mut b1, mut b2) = (Self::zero(target), Self::zero(target));
                for c in self.coefficients.iter().skip(1).rev() {
                    let b0 = &(&(&two_lin * &b1) - &b2) + &konst(*c);
                    b2 = b1;
                    b1 = b0;
                }
                let c0 = self.coefficients.first().copied().unwrap_or(c64(0.0, 0.0));
                &(&(&lin * &b1) - &b2) + &konst(c0)
            }
        }
    }

    /// Coefficients in powers of the raw coordinate `z`.
    pub fn raw_coefficients(&self) -> Vec<Complex64> {
        self.to_frame(Frame::RAW).coefficients
    }

    fn aligned<'a>(&self, other: &'a Self) -> std::borrow::Cow<'a, Self> {
        if other.frame == self.frame {
            std::borrow::Cow::Borrowed(other)
        } else {
            std::borrow::Cow::Owned(other.to_frame(self.frame))
        }
    }
}

impl Add for &CPolynomial {
    type Output = CPolynomial;

    fn add(self, rhs: &CPolynomial) -> CPolynomial {
        let rhs = self.aligned(rhs);
        let n = self.coefficients.len().max(rhs.coefficients.len());
        let zero = c64(0.0, 0.0);
        let coeffs = (0..n)
            .map(|j| {
                self.coefficients.get(j).copied().unwrap_or(zero)
                    + rhs.coefficients.get(j).copied().unwrap_or(zero)
            })
            .collect();
        CPolynomial::new(self.frame, coeffs)
    }
}

impl Sub for &CPolynomial {
    type Output = CPolynomial;

    fn sub(self, rhs: &CPolynomial) -> CPolynomial {
        self + &(-rhs)
    }
}

impl Neg for &CPolynomial {
    type Output = CPolynomial;

    fn neg(self) -> CPolynomial {
        CPolynomial::new(self.frame, self.coefficients.iter().map(|c| -c).collect())
    }
}

/// Panics if the product exceeds [`MAX_DEGREE`].
impl Mul for &CPolynomial {
    type Output = CPolynomial;

    fn mul(self, rhs: &CPolynomial) -> CPolynomial {
        let rhs = self.aligned(rhs);
        if self.is_zero() || rhs.is_zero() {
            return CPolynomial::zero(self.frame);
        }
        let (a, b) = (&self.coefficients, &rhs.coefficients);
        let mut out = vec![c64(0.0, 0.0); a.len() + b.len() - 1];
        match self.frame.basis {
            Basis::Power => {
                for (i, x) in a.iter().enumerate() {
                    for (j, y) in b.iter().enumerate() {
                        out[i + j] += x * y;
                    }
                }
            }
            Basis::Chebyshev => {
                // T_i·T_j = (T_{i+j} + T_{|i−j|})/2
                for (i, x) in a.iter().enumerate() {
                    for (j, y) in b.iter().enumerate() {
                        let h = x * y * 0.5;
                        out[i + j] += h;
                        out[i.abs_diff(j)] += h;
                    }
                }
            }
        }
        CPolynomial::new(self.frame, out)
    }
}

/// `Σ c_k T_k(x)`.
fn clenshaw(c: &[Complex64], x: Complex64) -> Complex64 {
    let zero = c64(0.0, 0.0);
    let (mut b1, mut b2) = (zero, zero);
    for ck in c.iter().skip(1).rev() {
        let b0 = ck + x * b1 * 2.0 - b2;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(zero) + x * b1 - b2
}

/// Coefficients of `ẑ·p(ẑ)`, one longer than `c`.
fn times_local(c: &[Complex64], basis: Basis) -> Vec<Complex64> {
    let mut out = vec![c64(0.0, 0.0); c.len() + 1];
    match basis {
        Basis::Power => out[1..].copy_from_slice(c),
        Basis::Chebyshev => {
            // x·T_0 = T_1, x·T_k = (T_{k+1} + T_{k−1})/2
            for (k, ck) in c.iter().enumerate() {
                if k == 0 {
                    out[1] += ck;
                } else {
                    out[k + 1] += ck * 0.5;
                    out[k - 1] += ck * 0.5;
                }
            }
        }
    }
    out
}

/// `p = (x − τ)·q + r` in the Chebyshev basis, by back substitution from
/// `c_j = α_{j−1}·b_{j−1} + b_{j+1}/2 − τ·b_j` (`α_0 = 1`, `α_i = 1/2`).
/// Rounding grows like `|τ ± √(τ² − 1)|^n`, the analogue of `|ẑ|^n` for the
/// power basis.
fn chebyshev_div_linear(c: &[Complex64], tau: Complex64) -> (Vec<Complex64>, Complex64) {
    let n = c.len() - 1;
    if n == 0 {
        return (Vec::new(), c[0]);
    }
    let mut b = vec![c64(0.0, 0.0); n + 2];
    for j in (1..=n).rev() {
        let alpha = if j == 1 { 1.0 } else { 0.5 };
        b[j - 1] = (c[j] - b[j + 1] * 0.5 + tau * b[j]) / alpha;
    }
    let r = c[0] - b[1] * 0.5 + tau * b[0];
    b.truncate(n);
    (b, r)
}

/// Distinct interpolation nodes, each with multiplicity `r + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    #[serde(with = "serde_c64::vec")]
    nodes: Vec<Complex64>,
    r: usize,
}

impl NodeSet {
    pub fn new(nodes: Vec<Complex64>, r: usize) -> Result<Self> {
        if nodes.is_empty() {
            return invalid("node set must be nonempty");
        }
        let mut diam: f64 = 0.0;
        for (i, a) in nodes.iter().enumerate() {
            for b in &nodes[i + 1..] {
                diam = diam.max((a - b).norm());
            }
        }
        let tol = 1e-12 * diam.max(1.0);
        for (i, a) in nodes.iter().enumerate() {
            for (j, b) in nodes.iter().enumerate().skip(i + 1) {
                if (a - b).norm() <= tol {
                    return invalid(format!("nodes {i} and {j} coincide"));
                }
            }
        }
        Ok(NodeSet { nodes, r })
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Derivative order matched at each node (`multiplicity − 1`).
    pub fn r(&self) -> usize {
        self.r
    }
}

/// `q(z) = ∏ (z − z_j)` together with `q′(z_j)`.
pub fn node_poly(frame: Frame, nodes: &NodeSet) -> Result<(CPolynomial, Vec<Complex64>)> {
    let zs = nodes.nodes();
    let q = CPolynomial::from_roots(frame, zs);
    let derivs: Vec<Complex64> = zs
        .iter()
        .enumerate()
        .map(|(j, zj)| {
            zs.iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .fold(c64(1.0, 0.0), |acc, (_, zi)| acc * (zj - zi))
        })
        .collect();
    if derivs.iter().any(|d| *d == c64(0.0, 0.0)) {
        return invalid("coincident nodes give q'(z_j) = 0");
    }
    Ok((q, derivs))
}

fn leja_order(roots: &[Complex64], frame: Frame) -> Vec<Complex64> {
    let mut pts = roots.to_vec();
    let mut out = Vec::with_capacity(pts.len());
    let mut score: Vec<f64> = pts.iter().map(|p| frame.to_local(*p).norm().ln()).collect();
    while !pts.is_empty() {
        let i = (0..pts.len())
            .max_by(|a, b| score[*a].total_cmp(&score[*b]))
            .expect("non-empty");
        let next = pts.swap_remove(i);
        score.swap_remove(i);
        for (p, s) in pts.iter().zip(score.iter_mut()) {
            *s += ((p - next) / frame.scale).norm().ln();
        }
        out.push(next);
    }
    out
}

/// `∏_{i≠j} (z − z_i)`, the quotient `q(z)/(z − z_j)` without division.
pub fn node_basis(frame: Frame, nodes: &NodeSet, j: usize) -> CPolynomial {
    let others: Vec<Complex64> = nodes
        .nodes()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != j)
        .map(|(_, z)| *z)
        .collect();
    CPolynomial::from_roots(frame, &others)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frame() -> Frame {
        Frame::new(c64(0.3, -0.1), 1.7)
    }

    #[test]
    fn horner_examples() {
        let p = CPolynomial::new(
            Frame::RAW,
            vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)],
        );
        assert!(p.eval(c64(0.0, 1.0)).norm() < 1e-15);
        let cube = CPolynomial::from_roots(frame(), &[c64(0.0, 0.0); 3]);
        let d = cube.eval_derivatives(c64(1.0, 0.0), 3);
        for (got, want) in d.iter().zip([1.0, 3.0, 6.0, 6.0]) {
            assert!((got - want).norm() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn linear_is_z_minus_a() {
        let a = c64(0.7, 0.2);
        let p = CPolynomial::linear(frame(), a);
        for z in [c64(0.0, 0.0), c64(1.0, -2.0)] {
            assert!((p.eval(z) - (z - a)).norm() < 1e-14);
        }
    }

    #[test]
    fn node_poly_examples() {
        let ns = NodeSet::new(vec![c64(1.0, 0.0), c64(-1.0, 0.0)], 0).unwrap();
        let (q, d) = node_poly(Frame::RAW, &ns).unwrap();
        let want = [c64(-1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)];
        assert!(q
            .coefficients()
            .iter()
            .zip(want)
            .all(|(a, b)| (a - b).norm() < 1e-15));
        assert!((d[0] - 2.0).norm() < 1e-15);

        let ns = NodeSet::new(vec![c64(0.0, 0.0)], 0).unwrap();
        let (q, d) = node_poly(Frame::RAW, &ns).unwrap();
        assert_eq!(q.degree(), 1);
        assert_eq!(d[0], c64(1.0, 0.0));

        let roots: Vec<_> = (0..8)
            .map(|j| Complex64::from_polar(1.0, std::f64::consts::PI * j as f64 / 4.0))
            .collect();
        let (q, _) = node_poly(Frame::RAW, &NodeSet::new(roots, 0).unwrap()).unwrap();
        let mut want = vec![c64(0.0, 0.0); 9];
        want[0] = c64(-1.0, 0.0);
        want[8] = c64(1.0, 0.0);
        assert_eq!(q.degree(), 8);
        for (a, b) in q.coefficients().iter().zip(want) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn coincident_nodes_rejected() {
        assert!(NodeSet::new(vec![c64(1.0, 0.0), c64(1.0, 0.0)], 0).is_err());
    }

    #[test]
    fn divide_linear_examples() {
        let p = CPolynomial::new(
            Frame::RAW,
            vec![c64(-1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)],
        );
        let q = p.divide_linear(c64(1.0, 0.0)).unwrap();
        assert_eq!(q.degree(), 1);
        assert!((q.coefficients()[0] - 1.0).norm() < 1e-15);
        assert!((q.coefficients()[1] - 1.0).norm() < 1e-15);

        let p = CPolynomial::new(
            Frame::RAW,
            vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)],
        );
        assert!(matches!(
            p.divide_linear(c64(1.0, 0.0)),
            Err(Error::NotDivisible { .. })
        ));
    }

    #[test]
    fn divide_one_minus_power() {
        // w(z) = (1 + z)/2 has w(1) = 1, so 1 − w^N vanishes at z = 1.
        let f = frame();
        let w = &CPolynomial::linear(f, c64(-1.0, 0.0)).scale_by(c64(0.5, 0.0));
        let n = 12;
        let p = &CPolynomial::constant(f, c64(1.0, 0.0)) - &w.pow(n);
        let (q, r) = p.div_linear_rem(c64(1.0, 0.0));
        assert_eq!(q.degree(), n - 1);
        assert!(r.norm() <= 1e-10);
    }

    #[test]
    fn frame_conversion_preserves_values() {
        let p = CPolynomial::new(frame(), vec![c64(1.0, 2.0), c64(-0.5, 0.1), c64(0.3, 0.0)]);
        let raw = p.to_frame(Frame::RAW);
        let other = p.to_frame(Frame::new(c64(-2.0, 1.0), 0.25));
        for z in [c64(0.0, 0.0), c64(1.0, 1.0), c64(-0.4, 0.9)] {
            assert!((p.eval(z) - raw.eval(z)).norm() < 1e-12);
            assert!((p.eval(z) - other.eval(z)).norm() < 1e-11);
        }
        let sum = &p + &other;
        assert!((sum.eval(c64(0.2, 0.2)) - 2.0 * p.eval(c64(0.2, 0.2))).norm() < 1e-11);
    }

    fn cheb() -> Frame {
        Frame::chebyshev(c64(0.2, 0.1), 1.3, Complex64::from_polar(1.0, 0.4))
    }

    #[test]
    fn chebyshev_basis_values() {
        let f = Frame::chebyshev(c64(0.0, 0.0), 1.0, c64(1.0, 0.0));
        // T_3(x) = 4x³ − 3x
        let t3 = CPolynomial::new(
            f,
            vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)],
        );
        for x in [c64(0.3, 0.0), c64(-0.9, 0.2), c64(2.0, 0.0)] {
            assert!((t3.eval(x) - (x * x * x * 4.0 - x * 3.0)).norm() < 1e-13);
        }
        let raw = t3.raw_coefficients();
        let want = [0.0, -3.0, 0.0, 4.0];
        assert!(raw.iter().zip(want).all(|(a, b)| (a - b).norm() < 1e-13));
        let d = t3.eval_derivatives(c64(0.5, 0.0), 3);
        for (got, want) in d.iter().zip([-1.0, 0.0, 12.0, 24.0]) {
            assert!((got - want).norm() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn chebyshev_frame_stays_bounded_on_interval() {
        // ∏ (x − x_j) over 200 Chebyshev points is 2^{1−200} T_200; the
        // power basis would need coefficients near 1e76.
        let f = Frame::chebyshev(c64(0.0, 0.0), 1.0, c64(1.0, 0.0));
        let roots: Vec<Complex64> = (0..200)
            .map(|j| c64((std::f64::consts::PI * (j as f64 + 0.5) / 200.0).cos(), 0.0))
            .collect();
        let p = CPolynomial::from_roots(f, &roots).scale_by(c64(2f64.powi(199), 0.0));
        assert!((p.coefficients()[200] - 1.0).norm() < 1e-9);
        assert!(p.coefficients()[..200].iter().all(|c| c.norm() < 1e-9));
        assert!((p.eval(c64(0.3, 0.0)) - (200.0 * 0.3f64.acos()).cos()).norm() < 1e-9);
    }

    fn frames() -> impl Strategy<Value = Frame> {
        prop_oneof![Just(frame()), Just(cheb())]
    }

    /// Compensated Horner (error-free transformations) used as a
    /// higher-precision reference.
    fn compensated_eval(coeffs: &[Complex64], x: Complex64) -> Complex64 {
        fn two_sum(a: f64, b: f64) -> (f64, f64) {
            let s = a + b;
            let bb = s - a;
            (s, (a - (s - bb)) + (b - bb))
        }
        fn two_prod(a: f64, b: f64) -> (f64, f64) {
            let p = a * b;
            (p, a.mul_add(b, -p))
        }
        let (mut hr, mut hi) = (0.0, 0.0);
        let (mut er, mut ei) = (0.0, 0.0);
        for c in coeffs.iter().rev() {
            // (hr + i hi)(xr + i xi) + c, tracking rounding errors.
            let (p1, e1) = two_prod(hr, x.re);
            let (p2, e2) = two_prod(hi, x.im);
            let (p3, e3) = two_prod(hr, x.im);
            let (p4, e4) = two_prod(hi, x.re);
            let (sr, e5) = two_sum(p1, -p2);
            let (si, e6) = two_sum(p3, p4);
            let (nr, e7) = two_sum(sr, c.re);
            let (ni, e8) = two_sum(si, c.im);
            let new_er = er * x.re - ei * x.im + e1 - e2 + e5 + e7;
            let new_ei = er * x.im + ei * x.re + e3 + e4 + e6 + e8;
            hr = nr;
            hi = ni;
            er = new_er;
            ei = new_ei;
        }
        c64(hr + er, hi + ei)
    }

    proptest! {
        #[test]
        fn horner_matches_compensated(
            coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 21),
            xr in -1.0f64..1.0, xi in -1.0f64..1.0,
        ) {
            let cs: Vec<Complex64> = coeffs.iter().map(|(a, b)| c64(*a, *b)).collect();
            let p = CPolynomial::new(Frame::RAW, cs.clone());
            let x = c64(xr, xi);
            let want = compensated_eval(&cs, x);
            let scale: f64 = cs.iter().enumerate().map(|(j, c)| c.norm() * x.norm().powi(j as i32)).sum();
            prop_assert!((p.eval(x) - want).norm() <= 1e-12 * scale.max(1e-300));
        }

        #[test]
        fn divide_then_multiply_back(
            coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..30),
            zr in -1.0f64..1.0, zi in -1.0f64..1.0,
            f in frames(),
        ) {
            let cs: Vec<Complex64> = coeffs.iter().map(|(a, b)| c64(*a, *b)).collect();
            let zeta = match f.basis {
                Basis::Power => c64(zr, zi),
                Basis::Chebyshev => f.center + f.unit() * c64(zr, 0.05 * zi),
            };
            // Make p divisible: p := base·(z − ζ).
            let p = CPolynomial::new(f, cs).mul_linear(zeta);
            let q = p.divide_linear(zeta).unwrap();
            let back = q.mul_linear(zeta);
            let diff = (&back - &p).coeff_norm();
            prop_assert!(diff <= 1e-10 * p.coeff_norm());
        }

        #[test]
        fn basis_operations_agree(
            coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..12),
            other in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6),
            zr in -1.0f64..1.0, zi in -1.0f64..1.0,
            f in frames(),
        ) {
            let to = |v: &[(f64, f64)]| v.iter().map(|(a, b)| c64(*a, *b)).collect::<Vec<_>>();
            let p = CPolynomial::new(f, to(&coeffs));
            let q = CPolynomial::new(f, to(&other));
            let pr = p.to_frame(Frame::RAW);
            let qr = q.to_frame(Frame::RAW);
            let z = c64(zr, zi);
            let tol = 1e-9 * (1.0 + pr.coeff_norm()) * (1.0 + qr.coeff_norm());
            prop_assert!((p.eval(z) - pr.eval(z)).norm() <= tol);
            prop_assert!(((&p * &q).eval(z) - (&pr * &qr).eval(z)).norm() <= tol);
            prop_assert!((p.mul_linear(c64(0.3, -0.2)).eval(z) - pr.mul_linear(c64(0.3, -0.2)).eval(z)).norm() <= tol);
            let (d, dr) = (p.eval_derivatives(z, 2), pr.eval_derivatives(z, 2));
            for (a, b) in d.iter().zip(&dr) {
                prop_assert!((a - b).norm() <= 10.0 * tol);
            }
            let (quo, rem) = p.div_linear_rem(c64(0.1, 0.2));
            prop_assert!((rem - p.eval(c64(0.1, 0.2))).norm() <= tol);
            let back = &quo.mul_linear(c64(0.1, 0.2)) + &CPolynomial::constant(f, rem);
            prop_assert!((back.eval(z) - p.eval(z)).norm() <= tol);
            prop_assert!((p.to_frame(cheb()).eval(z) - p.eval(z)).norm() <= tol);
        }

        #[test]
        fn node_poly_vanishes_at_nodes(angles in prop::collection::vec(0.0f64..std::f64::consts::TAU, 1..12)) {
            let mut nodes: Vec<Complex64> = angles.iter().map(|a| Complex64::from_polar(1.0, *a)).collect();
            nodes.dedup_by(|a, b| (*a - *b).norm() < 1e-6);
            if let Ok(ns) = NodeSet::new(nodes.clone(), 0) {
                let (q, _) = node_poly(Frame::RAW, &ns).unwrap();
                prop_assert_eq!(q.degree(), nodes.len());
                for z in &nodes {
                    prop_assert!(q.eval(*z).norm() <= 1e-10 * q.coeff_norm());
                }
            }
        }
    }
}
