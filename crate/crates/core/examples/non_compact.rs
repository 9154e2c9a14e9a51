//! The operator `f(z) ↦ f(pz) + … + f(pz + p − 1)` on Mahler coefficients has
//! large entries far from the diagonal, so it is not compact.
//!
//! Usage: `cargo run --release --example non_compact -- [p]`

use upslope::iwasawa::CharOfDelta;
use upslope::monoid::{summed_action_matrix, ActionPrecision, DeltaMat};

fn main() -> upslope::Result<()> {
    let p: u32 = std::env::args().nth(1).map_or(3, |a| a.parse().expect("integer argument"));
    let deltas: Vec<DeltaMat> =
        (0..p as i128).map(|i| DeltaMat::new(p, 20, [p as i128, i, 0, 1])).collect::<upslope::Result<_>>()?;
    for m in 1..=2u32 {
        let col = p.pow(m) as usize;
        let mat = summed_action_matrix(&deltas, CharOfDelta::trivial(), col + 1, ActionPrecision::new(6, 1))?;
        println!("column {col}:");
        for row in 0..=col {
            let c = mat.get(row, col).coeff(0);
            if !c.is_zero() {
                println!("  row {row:>3}: {c} (valuation {})", c.val_p());
            }
        }
    }
    Ok(())
}
