//! Discrete Fekete points on the outer boundary and their diagnostics.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::{golden_min, ExteriorMap};
use crate::error::{invalid, Result};
use crate::geometry::{Continuum, Shape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeketeMethod {
    ExactSmall,
    LejaExchange,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeketeSet {
    #[serde(with = "crate::serde_c64::vec")]
    pub points: Vec<Complex64>,
    /// Boundary parameters of the points.
    pub parameters: Vec<f64>,
    /// `Σ_{i<j} log|z_i − z_j|`.
    pub energy: f64,
    pub method: FeketeMethod,
    /// Final candidate grid size.
    pub grid: usize,
    /// Energy spread over randomized restarts (`N ≤ 8` only).
    pub restart_spread: Option<f64>,
}

pub fn log_energy(points: &[Complex64]) -> f64 {
    let mut e = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            e += (points[i] - points[j]).norm().ln();
        }
    }
    e
}

struct Candidates {
    z: Vec<Complex64>,
    t: Vec<f64>,
}

fn candidates(e: &Continuum, m: usize) -> Result<Candidates> {
    let mut z = Vec::with_capacity(m);
    let mut t = Vec::with_capacity(m);
    let tol = 1e-12 * e.diameter();
    let segment = matches!(e.shape(), Shape::Segment { .. });
    for s in e.boundary_samples(m)? {
        // the two sides of a segment carry the same points
        if segment && s.parameter > 0.5 + 1e-15 {
            continue;
        }
        if z.iter().any(|p: &Complex64| (p - s.location).norm() <= tol) {
            continue;
        }
        z.push(s.location);
        t.push(s.parameter);
    }
    Ok(Candidates { z, t })
}

/// `Σ_{j ∉ skip} log|c − z_j|`.
fn potential(c: Complex64, pts: &[Complex64], skip: Option<usize>) -> f64 {
    pts.iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != skip)
        .map(|(_, p)| (c - p).norm().ln())
        .sum()
}

fn leja(c: &Candidates, n: usize, centroid: Complex64) -> Vec<usize> {
    let first = (0..c.z.len())
        .max_by(|a, b| {
            (c.z[*a] - centroid)
                .norm()
                .total_cmp(&(c.z[*b] - centroid).norm())
                .then(b.cmp(a))
        })
        .expect("nonempty grid");
    let mut idx = vec![first];
    let mut score: Vec<f64> = c.z.iter().map(|z| (z - c.z[first]).norm().ln()).collect();
    while idx.len() < n {
        let next = best_index(&score);
        idx.push(next);
        for (s, z) in score.iter_mut().zip(&c.z) {
            *s += (z - c.z[next]).norm().ln();
        }
    }
    idx
}

fn best_index(score: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in score.iter().enumerate() {
        if *s > score[best] {
            best = i;
        }
    }
    best
}

/// Single-point exchange on the grid until no move increases the energy.
/// With `window`, point `i` only moves among candidates within `window`
/// positions of its current one.
fn exchange(c: &Candidates, idx: &mut [usize], window: Option<usize>) -> f64 {
    let mut pts: Vec<Complex64> = idx.iter().map(|i| c.z[*i]).collect();
    let mut energy = log_energy(&pts);
    loop {
        let mut moved = false;
        for i in 0..idx.len() {
            let current = potential(pts[i], &pts, Some(i));
            let len = c.z.len();
            let range: Vec<usize> = match window {
                Some(w) => (0..=2 * w).map(|o| (idx[i] + len + o - w) % len).collect(),
                None => (0..len).collect(),
            };
            let (best, val) = range
                .par_iter()
                .map(|k| (*k, potential(c.z[*k], &pts, Some(i))))
                .filter(|(_, v)| v.is_finite())
                .reduce(
                    || (usize::MAX, f64::NEG_INFINITY),
                    |a, b| {
                        if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                            b
                        } else {
                            a
                        }
                    },
                );
            if best != usize::MAX && val > current + 1e-13 * (1.0 + current.abs()) {
                idx[i] = best;
                pts[i] = c.z[best];
                let next = log_energy(&pts);
                assert!(next >= energy - 1e-9, "exchange decreased the energy");
                energy = next;
                moved = true;
            }
        }
        if !moved {
            return energy;
        }
    }
}

/// Coordinate-wise golden-section polish in the boundary parameter.
fn polish(e: &Continuum, pts: &mut [Complex64], params: &mut [f64], h: f64) -> f64 {
    let segment = matches!(e.shape(), Shape::Segment { .. });
    let mut energy = log_energy(pts);
    for _ in 0..50 {
        let before = energy;
        for i in 0..pts.len() {
            let (mut lo, mut hi) = (params[i] - h, params[i] + h);
            if segment {
                lo = lo.max(0.0);
                hi = hi.min(0.5);
            }
            let obj =
                |t: f64| -potential(e.boundary_point(t.rem_euclid(1.0)).location, pts, Some(i));
            let (t, v) = golden_min(obj, lo, hi, 1e-12);
            let current = -potential(pts[i], pts, Some(i));
            if v < current {
                params[i] = t.rem_euclid(1.0);
                pts[i] = e.boundary_point(params[i]).location;
            }
        }
        energy = log_energy(pts);
        if energy - before < 1e-13 {
            break;
        }
    }
    energy
}

fn grid_fekete(c: &Candidates, start: Vec<usize>) -> (Vec<usize>, f64) {
    let mut idx = start;
    let en = exchange(c, &mut idx, None);
    (idx, en)
}

/// Fekete points among `grid` boundary candidates, refined by doubling the
/// grid until the energy gain drops below `1e-8`, then polished in the
/// boundary parameter. `N ≤ 8` adds randomized restarts.
pub fn fekete_points(e: &Continuum, n: usize, grid: usize, seed: u64) -> Result<FeketeSet> {
    if n < 2 {
        return invalid("Fekete sets need at least two points");
    }
    if grid < 32 * n {
        return invalid(format!(
            "candidate grid {grid} smaller than 32N = {}",
            32 * n
        ));
    }
    let centroid = e.centroid();
    let mut m = grid;
    let mut c = candidates(e, m)?;
    let (mut idx, mut energy) = grid_fekete(&c, leja(&c, n, centroid));
    let mut restart_spread = None;
    if n <= 8 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut energies = vec![energy];
        for _ in 0..2 {
            let mut start: Vec<usize> = Vec::new();
            while start.len() < n {
                let k = rng.gen_range(0..c.z.len());
                if !start.contains(&k) {
                    start.push(k);
                }
            }
            let (cand, en) = grid_fekete(&c, start);
            energies.push(en);
            if en > energy + 1e-12 {
                idx = cand;
                energy = en;
            }
        }
        let hi = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = energies.iter().cloned().fold(f64::INFINITY, f64::min);
        restart_spread = Some(hi - lo);
    }
    for _ in 0..4 {
        let finer = candidates(e, 2 * m)?;
        let mut start: Vec<usize> = idx
            .iter()
            .map(|i| {
                let z = c.z[*i];
                (0..finer.z.len())
                    .min_by(|a, b| {
                        (finer.z[*a] - z)
                            .norm()
                            .total_cmp(&(finer.z[*b] - z).norm())
                    })
                    .expect("nonempty grid")
            })
            .collect();
        let en = exchange(&finer, &mut start, Some(8));
        let gain = en - energy;
        m *= 2;
        c = finer;
        idx = start;
        energy = en;
        if gain < 1e-8 {
            break;
        }
    }
    let mut pts: Vec<Complex64> = idx.iter().map(|i| c.z[*i]).collect();
    let mut params: Vec<f64> = idx.iter().map(|i| c.t[*i]).collect();
    let polished = polish(e, &mut pts, &mut params, 1.0 / m as f64);
    debug_assert!(polished >= energy - 1e-9);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| params[*a].total_cmp(&params[*b]));
    Ok(FeketeSet {
        points: order.iter().map(|i| pts[*i]).collect(),
        parameters: order.iter().map(|i| params[*i]).collect(),
        energy: polished.max(energy),
        method: if n <= 8 {
            FeketeMethod::ExactSmall
        } else {
            FeketeMethod::LejaExchange
        },
        grid: m,
        restart_spread,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpacingDiagnostic {
    /// Sorted `arg Φ(z_j)` in `[0, 2π)`.
    pub thetas: Vec<f64>,
    pub gaps: Vec<f64>,
    pub max_min_ratio: f64,
    /// `N·min gap` and `N·max gap`.
    pub scaled_min: f64,
    pub scaled_max: f64,
}

fn angles(map: &ExteriorMap, s: &FeketeSet) -> Result<Vec<f64>> {
    let e = map.domain();
    let tol = 1e-8 * e.diameter().max(1.0);
    let mut th = Vec::with_capacity(s.points.len());
    for (z, t) in s.points.iter().zip(&s.parameters) {
        if e.distance_to_boundary(*z) > tol {
            return invalid(format!("point {z} is not on the boundary"));
        }
        let mut bp = e.boundary_point(*t);
        if (bp.location - z).norm() > tol {
            let (_, t2) = e.nearest_boundary_point(*z);
            bp = e.boundary_point(t2);
        }
        bp.location = *z;
        th.push(map.boundary_angle(&bp)?);
    }
    th.sort_by(f64::total_cmp);
    Ok(th)
}

/// Gaps between consecutive `arg Φ(z_j)`. On a segment all points sit on one
/// side, so the gaps cover `[0, π]`.
pub fn spacing_diagnostic(map: &ExteriorMap, s: &FeketeSet) -> Result<SpacingDiagnostic> {
    let thetas = angles(map, s)?;
    let n = thetas.len();
    let segment = matches!(map.domain().shape(), Shape::Segment { .. });
    let mut gaps: Vec<f64> = thetas.windows(2).map(|w| w[1] - w[0]).collect();
    if !segment {
        gaps.push(thetas[0] + TAU - thetas[n - 1]);
    }
    let lo = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = gaps.iter().cloned().fold(0.0, f64::max);
    Ok(SpacingDiagnostic {
        thetas,
        max_min_ratio: hi / lo,
        scaled_min: n as f64 * lo,
        scaled_max: n as f64 * hi,
        gaps,
    })
}

/// Kolmogorov distance of `μ_N` to the equilibrium measure: `θ_j/2π` against
/// the uniform law, or on a segment the arcsine law in `z`.
pub fn equilibrium_diagnostic(map: &ExteriorMap, s: &FeketeSet) -> Result<f64> {
    let mut u: Vec<f64> = match map.domain().shape() {
        Shape::Segment { start, end } => {
            let (a, b) = (*start, *end);
            s.points
                .iter()
                .map(|z| {
                    let x = (2.0 * ((z - a) / (b - a)).re - 1.0).clamp(-1.0, 1.0);
                    0.5 + x.asin() / PI
                })
                .collect()
        }
        _ => angles(map, s)?.into_iter().map(|t| t / TAU).collect(),
    };
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    Ok(u.iter()
        .enumerate()
        .map(|(i, v)| ((i + 1) as f64 / n - v).max(v - i as f64 / n))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn segment_two_and_three_points() {
        let e = Continuum::unit_segment();
        let s = fekete_points(&e, 2, 64, 1).unwrap();
        let mut xs: Vec<f64> = s.points.iter().map(|z| z.re).collect();
        xs.sort_by(f64::total_cmp);
        assert!((xs[0] + 1.0).abs() < 1e-12 && (xs[1] - 1.0).abs() < 1e-12);

        // Brute force over a 1e-3 grid: the middle point only, with the ends
        // at ±1 (any optimum does this), and then all three over a coarser grid.
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..=2000 {
            let x = -1.0 + i as f64 * 1e-3;
            let v = ((1.0 - x) * (1.0 + x) * 2.0f64).abs();
            if v > best.0 {
                best = (v, x);
            }
        }
        let mut coarse = (f64::NEG_INFINITY, [0.0; 3]);
        for a in 0..=40 {
            for b in a + 1..=40 {
                for c in b + 1..=40 {
                    let (x, y, z) = (
                        -1.0 + a as f64 / 20.0,
                        -1.0 + b as f64 / 20.0,
                        -1.0 + c as f64 / 20.0,
                    );
                    let v = ((x - y) * (x - z) * (y - z)).abs();
                    if v > coarse.0 {
                        coarse = (v, [x, y, z]);
                    }
                }
            }
        }
        let s = fekete_points(&e, 3, 96, 1).unwrap();
        let mut xs: Vec<f64> = s.points.iter().map(|z| z.re).collect();
        xs.sort_by(f64::total_cmp);
        for (x, want) in xs.iter().zip(coarse.1) {
            assert!((x - want).abs() < 1e-3);
        }
        assert!((xs[1] - best.1).abs() < 1e-3);
    }

    #[test]
    fn circle_five_points_equal_gaps() {
        let e = Continuum::unit_disk();
        let s = fekete_points(&e, 5, 160, 7).unwrap();
        let map = ExteriorMap::build(&e).unwrap();
        let d = spacing_diagnostic(&map, &s).unwrap();
        for g in &d.gaps {
            assert!((g - TAU / 5.0).abs() < 1e-4, "{:?}", d.gaps);
        }
        // Oracle: rotated roots of unity, best rotation by brute force.
        let roots = |a: f64| -> Vec<Complex64> {
            (0..5)
                .map(|k| Complex64::from_polar(1.0, a + TAU * k as f64 / 5.0))
                .collect()
        };
        let oracle = (0..1000)
            .map(|i| log_energy(&roots(i as f64 * 1e-3)))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((s.energy - oracle).abs() < 1e-8);
        assert!(s.restart_spread.unwrap() < 1e-6);
    }

    #[test]
    fn disk_roots_of_unity_diagnostics() {
        let e = Continuum::unit_disk();
        let map = ExteriorMap::build(&e).unwrap();
        let n = 12;
        let params: Vec<f64> = (0..n).map(|k| k as f64 / n as f64).collect();
        let points: Vec<Complex64> = params
            .iter()
            .map(|t| e.boundary_point(*t).location)
            .collect();
        let s = FeketeSet {
            energy: log_energy(&points),
            points,
            parameters: params,
            method: FeketeMethod::LejaExchange,
            grid: 0,
            restart_spread: None,
        };
        let d = spacing_diagnostic(&map, &s).unwrap();
        assert!((d.max_min_ratio - 1.0).abs() < 1e-9);
        assert!(equilibrium_diagnostic(&map, &s).unwrap() <= 1.0 / n as f64 + 1e-12);
    }

    #[test]
    fn off_boundary_point_rejected() {
        let e = Continuum::unit_disk();
        let map = ExteriorMap::build(&e).unwrap();
        let s = FeketeSet {
            points: vec![c64(0.5, 0.0), c64(-1.0, 0.0)],
            parameters: vec![0.0, 0.5],
            energy: 0.0,
            method: FeketeMethod::ExactSmall,
            grid: 0,
            restart_spread: None,
        };
        assert!(spacing_diagnostic(&map, &s).is_err());
    }

    #[test]
    fn square_and_segment_diagnostics() {
        let sq = Continuum::square(c64(0.0, 0.0), 1.0).unwrap();
        let map = ExteriorMap::build(&sq).unwrap();
        let s = fekete_points(&sq, 16, 512, 3).unwrap();
        let d = spacing_diagnostic(&map, &s).unwrap();
        assert!(d.max_min_ratio <= 3.0, "{}", d.max_min_ratio);
        let s32 = fekete_points(&sq, 32, 1024, 3).unwrap();
        assert!(equilibrium_diagnostic(&map, &s32).unwrap() <= 0.1);

        let seg = Continuum::unit_segment();
        let map = ExteriorMap::build(&seg).unwrap();
        let s = fekete_points(&seg, 32, 1024, 3).unwrap();
        assert!(equilibrium_diagnostic(&map, &s).unwrap() <= 0.1);
        let d = spacing_diagnostic(&map, &fekete_points(&seg, 8, 256, 3).unwrap()).unwrap();
        assert!(d.scaled_min > 0.0 && d.scaled_max.is_finite());
    }

    #[test]
    fn restarts_agree_for_small_n() {
        let sq = Continuum::square(c64(0.0, 0.0), 1.0).unwrap();
        for n in [3, 4, 6] {
            let s = fekete_points(&sq, n, 64 * n, 11).unwrap();
            assert!(
                s.restart_spread.unwrap() < 1e-6,
                "n={n}: {:?}",
                s.restart_spread
            );
        }
    }
}
