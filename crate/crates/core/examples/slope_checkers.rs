//! Checkers for slope data supplied from outside: pairing, twisted
//! progressions, component degrees and weight-two transfer.
//!
//! Usage: `cargo run --example slope_checkers`

use std::collections::BTreeMap;

use upslope::polygon::Interval;
use upslope::slope_checks::{
    atkin_lehner_check, atkin_lehner_partner, classical_bounds, degree_formula_check, predicted_degrees,
    progression_check, progression_shape, slope_transfer, twisted_progressions, BetaTable, ROrdTable,
};
use upslope::Q;

fn q(a: i64, b: i64) -> Q {
    Q::new(a.into(), b.into())
}

fn main() -> upslope::Result<()> {
    let slopes: Vec<Q> = (0..9).map(|i| q(i, 3)).collect();
    let partner = atkin_lehner_partner(&slopes, 2);
    let res = atkin_lehner_check(&slopes, &partner, 2, 3, 2, 1)?;
    println!("pairing in weight 4: passed {} ({} checks)", res.passed, res.checked);

    let (count, diff) = progression_shape(3, 2, 1)?;
    println!("p = 3, M = 2: {count} progressions with difference {diff}");
    let alpha = twisted_progressions(&[q(0, 1), q(1, 9), q(1, 3)], 2, 3, 1, 12)?;
    println!("  constructed sequences pass: {}", progression_check(&alpha, 2, 3, 1)?.passed);

    let table = ROrdTable::new(5, BTreeMap::from([(0, 1), (1, 0), (2, 2), (3, 1)]));
    let degrees = predicted_degrees(&table, 1, 5, 2, 3)?;
    for (i, d) in &degrees {
        println!("  deg X_{i} = {d}");
    }
    let mut observed = degrees.clone();
    observed.insert(Interval::Open(1), degrees[&Interval::Open(1)] + 1);
    let res = degree_formula_check(&observed, &table, 1, 5, 2, 3)?;
    println!("one extra slope in (1,2): passed {}, {:?}", res.passed, res.failures);

    for (n, (lo, hi)) in classical_bounds(3, 2, 1, 1)?.iter().enumerate() {
        println!("  weight 3, slope {n} in [{lo}, {hi}]");
    }
    let beta = BetaTable { lists: BTreeMap::from([(0, vec![q(0, 1), q(1, 3), q(2, 3)]), (1, vec![q(1, 6), q(1, 2), q(5, 6)])]) };
    let moved = slope_transfer(&beta, 2, 3, 0, 3, 1, 1)?;
    println!("weight-two data moved to conductor 27: {:?}", moved.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    Ok(())
}
