use num_complex::Complex64;
use simapprox::conformal::ExteriorMap;
use simapprox::geometry::Continuum;

fn deltas() -> Vec<f64> {
    (1..=10).map(|k| 2f64.powi(-k)).collect()
}

fn maps() -> Vec<(&'static str, ExteriorMap)> {
    [
        ("disk", Continuum::unit_disk()),
        ("segment", Continuum::unit_segment()),
        (
            "square",
            Continuum::square(Complex64::new(0.0, 0.0), 1.0).unwrap(),
        ),
    ]
    .into_iter()
    .map(|(name, e)| (name, ExteriorMap::build(&e).unwrap()))
    .collect()
}

#[test]
fn rho_doubling_is_bounded_by_eight() {
    for (name, map) in maps() {
        let c = map.rho_doubling_constant(&deltas(), 64).unwrap();
        assert!((1.0..=8.0).contains(&c), "{name}: {c}");
    }
}

#[test]
fn rho_is_comparable_at_neighbours() {
    for (name, map) in maps() {
        let (lo, hi) = map.rho_neighbor_range(&deltas(), 64).unwrap();
        assert!(lo >= 0.1 && hi <= 10.0, "{name}: [{lo}, {hi}]");
    }
}

#[test]
fn square_holder_exponent_is_positive() {
    let map =
        ExteriorMap::build(&Continuum::square(Complex64::new(0.0, 0.0), 1.0).unwrap()).unwrap();
    let fit = map.rho_holder_fit(&deltas()[..8], 64).unwrap();
    assert!(fit.slope >= 0.2, "{fit:?}");
}

#[test]
fn disk_holder_exponent_is_one() {
    let map = ExteriorMap::build(&Continuum::unit_disk()).unwrap();
    let fit = map.rho_holder_fit(&deltas()[..8], 64).unwrap();
    assert!((fit.slope - 1.0).abs() < 0.1, "{fit:?}");
}

#[test]
fn rho_closed_forms_on_disk_and_segment() {
    let disk = ExteriorMap::build(&Continuum::unit_disk()).unwrap();
    let seg = ExteriorMap::build(&Continuum::unit_segment()).unwrap();
    for d in [1e-1, 1e-2, 1e-3] {
        for b in Continuum::unit_disk().boundary_samples(16).unwrap() {
            assert!((disk.rho_delta(b.location, d).unwrap() - d).abs() <= 1e-10);
        }
        let want = d * d / (2.0 * (1.0 + d));
        assert!((seg.rho_delta(Complex64::new(1.0, 0.0), d).unwrap() - want).abs() <= 1e-8);
    }
}
