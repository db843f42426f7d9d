//! Gauss rules and adaptive line integrals.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7.
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (i, g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Gauss–Jacobi rule for the weight `(1−x)^α (1+x)^β` on `[-1, 1]`, by the
/// Golub–Welsch eigenvalue method.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || alpha <= -1.0 || beta <= -1.0 {
        return invalid(format!(
            "bad Gauss-Jacobi parameters n={n}, α={alpha}, β={beta}"
        ));
    }
    let ab = alpha + beta;
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let denom = (2.0 * kf + ab) * (2.0 * kf + ab + 2.0);
        jm[(k, k)] = if denom.abs() < 1e-300 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / denom
        };
        if k + 1 < n {
            let k1 = kf + 1.0;
            let num = 4.0 * k1 * (k1 + alpha) * (k1 + beta) * (k1 + ab);
            let s = 2.0 * k1 + ab;
            let b = (num / (s * s * (s + 1.0) * (s - 1.0))).sqrt();
            jm[(k, k + 1)] = b;
            jm[(k + 1, k)] = b;
        }
    }
    let eig = SymmetricEigen::new(jm);
    let mu0 = ((ab + 1.0) * 2f64.ln() + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0)
        - ln_gamma(ab + 2.0))
    .exp();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pairs.iter().any(|(x, w)| !x.is_finite() || !w.is_finite()) {
        return Err(Error::Internal(
            "Gauss-Jacobi eigen-solve produced non-finite values".into(),
        ));
    }
    Ok(pairs.into_iter().unzip())
}

/// Adaptive Gauss–Legendre integral of `f` along the straight segment
/// `[a, b]` (complex line integral, `dξ = (b − a) dt`).
pub fn integrate_segment<F>(f: F, a: Complex64, b: Complex64, tol: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let (x, w) = gauss_legendre(12);
    let rule = |lo: f64, hi: f64| -> Complex64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut s = Complex64::new(0.0, 0.0);
        for (xi, wi) in x.iter().zip(&w) {
            let t = mid + half * xi;
            s += f(a + (b - a) * t) * (wi * half);
        }
        s * (b - a)
    };
    let whole = rule(0.0, 1.0);
    let scale = whole.norm().max(1.0);
    let mut stack = vec![(0.0f64, 1.0f64, whole, 0u32)];
    let mut total = Complex64::new(0.0, 0.0);
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule(lo, mid);
        let right = rule(mid, hi);
        let refined = left + right;
        let err = (refined - est).norm();
        if err <= tol * scale * (hi - lo) || (hi - lo) < 1e-12 {
            total += refined;
        } else if depth >= 40 {
            return Err(Error::Quadrature(format!("{b} (from {a})")));
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    if !total.is_finite() {
        return Err(Error::Quadrature(format!("{b} (non-finite integrand)")));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(5);
        for p in 0..10 {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let want = if p % 2 == 1 {
                0.0
            } else {
                2.0 / (p as f64 + 1.0)
            };
            assert!((got - want).abs() < 1e-14, "p={p}");
        }
    }

    #[test]
    fn jacobi_matches_legendre_and_beta_integrals() {
        let (x, w) = gauss_jacobi(6, 0.0, 0.0).unwrap();
        let (xl, wl) = gauss_legendre(6);
        for i in 0..6 {
            assert!((x[i] - xl[i]).abs() < 1e-13);
            assert!((w[i] - wl[i]).abs() < 1e-13);
        }
        // ∫ (1−x)^{-1/2}(1+x)^{1/2} dx = π.
        let (_, w) = gauss_jacobi(8, -0.5, 0.5).unwrap();
        assert!((w.iter().sum::<f64>() - std::f64::consts::PI).abs() < 1e-12);
        // ∫ (1+x)^{-2/3} x dx: exact value with the rule against a fine
        // Legendre sum after substitution 1+x = s^3.
        let (x, w) = gauss_jacobi(10, 0.0, -2.0 / 3.0).unwrap();
        let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x).sum();
        let (gx, gw) = gauss_legendre(40);
        let c = 2f64.cbrt();
        let want: f64 = gx
            .iter()
            .zip(&gw)
            .map(|(t, wt)| {
                let s = 0.5 * c * (t + 1.0);
                3.0 * (s * s * s - 1.0) * wt * 0.5 * c
            })
            .sum();
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn adaptive_segment() {
        let a = Complex64::new(0.0, 0.0);
        let b = Complex64::new(0.3, 0.8);
        let got = integrate_segment(|z| 2.0 * z, a, b, 1e-12).unwrap();
        assert!((got - b * b).norm() < 1e-13);
        let got =
            integrate_segment(|z| (1.0 - z).sqrt(), a, Complex64::new(1.0, 0.0), 1e-10).unwrap();
        assert!((got - 2.0 / 3.0).norm() < 1e-9);
    }
}
