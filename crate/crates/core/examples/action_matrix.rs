//! The matrix of one monoid element acting on the Mahler basis, with its
//! entry bounds.
//!
//! Usage: `cargo run --release --example action_matrix -- [size]`

use upslope::iwasawa::CharOfDelta;
use upslope::monoid::{action_matrix, check_monoid, verify_entry_bounds, ActionPrecision, DeltaMat};

fn main() -> upslope::Result<()> {
    let size: usize = std::env::args().nth(1).map_or(12, |a| a.parse().expect("integer argument"));
    let p = 5;
    for entries in [[5, 1, 5, 2], [1, 2, 5, 3], [2, 1, 1, 1]] {
        let delta = DeltaMat::new(p, 20, entries)?;
        println!("{delta}: {:?}", check_monoid(&delta));
        match verify_entry_bounds(&delta, size, CharOfDelta::new(1)) {
            Ok(report) => println!(
                "  {} entries checked, {} violations, smallest margin {}",
                report.checked,
                report.violations.len(),
                report.min_margin
            ),
            Err(e) => println!("  {e}"),
        }
    }

    let delta = DeltaMat::new(p, 20, [5, 1, 5, 2])?;
    let m = action_matrix(&delta, CharOfDelta::trivial(), 6, ActionPrecision::new(6, 6))?;
    println!("(p, T)-orders of the top-left 6 x 6 block:");
    for i in 0..6 {
        let row: Vec<String> = (0..6).map(|j| format!("{:>4}", m.get(i, j).mlambda_order().to_string())).collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
