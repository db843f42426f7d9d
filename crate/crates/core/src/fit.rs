//! Least-squares fits used to report the stand-ins for existential constants.

use serde::{Deserialize, Serialize};

/// `y ≈ intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn line_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(a, b)| (*a, *b))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Some(LineFit {
        slope,
        intercept,
        r2,
    })
}

/// Slope of `log y` against `log x`.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    line_fit(&lx, &ly)
}

/// Slope of `log y` against `x`.
pub fn semilog_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(_, b)| **b > 0.0)
        .map(|(a, b)| (*a, b.ln()))
        .unzip();
    line_fit(&lx, &ly)
}

/// Fit of `err(n) ≈ c₃ exp(−c₄ n^α)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c3: f64,
    pub c4: f64,
    pub alpha: f64,
    pub r2: f64,
}

/// Least squares of `log err` against `n^α` over `α ∈ {0.1, …, 1.0}`,
/// keeping the `α` with the best `R²` among fits with `c₄ > 0`.
pub fn interior_decay_fit(n: &[f64], err: &[f64]) -> Option<DecayFit> {
    let mut best: Option<DecayFit> = None;
    for i in 1..=10 {
        let alpha = i as f64 / 10.0;
        let x: Vec<f64> = n.iter().map(|v| v.powf(alpha)).collect();
        if let Some(f) = semilog_fit(&x, err) {
            if f.slope >= 0.0 {
                continue;
            }
            let cand = DecayFit {
                c3: f.intercept.exp(),
                c4: -f.slope,
                alpha,
                r2: f.r2,
            };
            if best.is_none_or(|b| cand.r2 > b.r2 + 1e-12) {
                best = Some(cand);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_lines() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = line_fit(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14 && (f.intercept - 2.0).abs() < 1e-14);
        assert!((f.r2 - 1.0).abs() < 1e-14);
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-2.5)).collect();
        assert!((loglog_fit(&x, &y).unwrap().slope + 2.5).abs() < 1e-12);
    }

    #[test]
    fn decay_fit_picks_true_alpha() {
        let n: Vec<f64> = [8.0, 16.0, 32.0, 64.0, 128.0].to_vec();
        let err: Vec<f64> = n
            .iter()
            .map(|v: &f64| 2.0 * (-0.7 * v.powf(0.5)).exp())
            .collect();
        let f = interior_decay_fit(&n, &err).unwrap();
        assert_eq!(f.alpha, 0.5);
        assert!((f.c4 - 0.7).abs() < 1e-10 && (f.c3 - 2.0).abs() < 1e-9);
    }
}
