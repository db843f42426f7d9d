//! One line per acceptance criterion.

use simapprox_harness::verify::{Verifier, CRITERIA};

#[test]
fn acceptance() {
    let mut v = Verifier::new();
    let outcomes = v.all();
    assert_eq!(outcomes.len(), CRITERIA.len());
    for o in &outcomes {
        println!("{o}");
    }
    let failed: Vec<u8> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.id)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
