use num_complex::Complex64;
use proptest::prelude::*;
use simapprox::geometry::{Continuum, Location};

const NOTCH: Complex64 = Complex64 { re: 1.0, im: 1.0 };

/// Whether the open segment `pq` enters the quadrant `x > 1, y > 1` cut out
/// of the L-shape.
fn crosses_notch(p: Complex64, q: Complex64) -> bool {
    let interval = |a: f64, b: f64| -> (f64, f64) {
        // {t ∈ [0,1] : a + t(b − a) > 1}
        if (b - a).abs() < 1e-15 {
            return if a > 1.0 { (0.0, 1.0) } else { (1.0, 0.0) };
        }
        let t = (1.0 - a) / (b - a);
        if b > a {
            (t.max(0.0), 1.0)
        } else {
            (0.0, t.min(1.0))
        }
    };
    let (x0, x1) = interval(p.re, q.re);
    let (y0, y1) = interval(p.im, q.im);
    x1.min(y1) - x0.max(y0) > 1e-12
}

fn l_geodesic(p: Complex64, q: Complex64) -> f64 {
    if crosses_notch(p, q) {
        (p - NOTCH).norm() + (NOTCH - q).norm()
    } else {
        (p - q).norm()
    }
}

#[test]
fn l_shape_h_constant_matches_closed_form_geodesics() {
    let e = Continuum::l_shape();
    let (m, grid) = (64, 100);
    let c = e.h_constant(m, grid).unwrap();
    let boundary: Vec<Complex64> = e
        .boundary_samples(m)
        .unwrap()
        .iter()
        .map(|b| b.location)
        .collect();
    let mut targets = boundary.clone();
    targets.extend(e.interior_grid(grid));
    let mut oracle: f64 = 1.0;
    for p in &boundary {
        for q in &targets {
            let chord = (p - q).norm();
            if chord > 1e-12 {
                oracle = oracle.max(l_geodesic(*p, *q) / chord);
            }
        }
    }
    assert!(c > 1.0 && c <= 3.0, "c = {c}");
    assert!(
        (c - oracle).abs() <= 1e-9 * oracle,
        "c = {c}, oracle = {oracle}"
    );
}

#[test]
fn h_constant_of_segment_and_square_is_one() {
    for e in [
        Continuum::unit_segment(),
        Continuum::square(Complex64::new(0.0, 0.0), 1.0).unwrap(),
    ] {
        assert!((e.h_constant(32, 16).unwrap() - 1.0).abs() < 1e-9);
    }
}

fn domains() -> Vec<Continuum> {
    vec![
        Continuum::unit_disk(),
        Continuum::unit_segment(),
        Continuum::square(Complex64::new(0.0, 0.0), 1.0).unwrap(),
        Continuum::ellipse(Complex64::new(0.5, -0.2), 2.0, 1.0).unwrap(),
        Continuum::l_shape(),
    ]
}

/// Arc length between consecutive samples, measured along the boundary.
fn gaps(e: &Continuum, m: usize) -> Vec<f64> {
    let s = e.boundary_samples(m).unwrap();
    let closed = e.has_interior();
    let count = if closed { s.len() } else { s.len() - 1 };
    (0..count)
        .map(|i| {
            let (a, b) = (
                s[i].parameter,
                if i + 1 < s.len() {
                    s[i + 1].parameter
                } else {
                    s[0].parameter + 1.0
                },
            );
            // fine polyline between the two parameters
            let steps = 64;
            (0..steps)
                .map(|j| {
                    let t0 = a + (b - a) * j as f64 / steps as f64;
                    let t1 = a + (b - a) * (j + 1) as f64 / steps as f64;
                    (e.boundary_point(t1.rem_euclid(1.0)).location
                        - e.boundary_point(t0.rem_euclid(1.0)).location)
                        .norm()
                })
                .sum::<f64>()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn samples_are_boundary_points_with_even_gaps(kind in 0usize..5, m in 16usize..160) {
        let e = &domains()[kind];
        for b in e.boundary_samples(m).unwrap() {
            prop_assert_eq!(e.classify(b.location), Location::Boundary);
        }
        let g = gaps(e, m);
        let hi = g.iter().cloned().fold(0.0, f64::max);
        let lo = g.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!(hi <= 4.0 * lo, "gap ratio {}", hi / lo);
    }

    #[test]
    fn refined_samples_cover_coarse_ones(kind in 0usize..5, m in 8usize..80) {
        let e = &domains()[kind];
        let fine: Vec<Complex64> = e.boundary_samples(2 * m).unwrap().iter().map(|b| b.location).collect();
        for b in e.boundary_samples(m).unwrap() {
            let d = fine.iter().map(|z| (z - b.location).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(d <= e.diameter() / m as f64);
        }
    }

    #[test]
    fn classification_agrees_with_distance(kind in 0usize..5, x in -1.5f64..2.5, y in -1.5f64..2.5) {
        let e = &domains()[kind];
        let z = Complex64::new(x, y);
        let loc = e.classify(z);
        let d = e.distance(z);
        match loc {
            Location::Exterior => prop_assert!(d > 0.0),
            _ => prop_assert!(d <= 1e-10 * e.diameter()),
        }
    }
}
