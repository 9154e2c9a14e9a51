//! Builds a synthetic operator, stores it as JSON, assembles its block matrix
//! and moves it to the T-rescaled basis.
//!
//! Usage: `cargo run --release --example up_operator_assembly -- [p] [t] [blocks] [seed]`

use upslope::iwasawa::CharOfDelta;
use upslope::monoid::ActionPrecision;
use upslope::up_operator::{assemble_at, load_up, rescale_halo_basis, save_up, synth_up, verify_block_bounds};

fn main() -> upslope::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let arg = |i: usize, default: u64| args.get(i).copied().unwrap_or(default);
    let (p, t, blocks, seed) = (arg(0, 3) as u32, arg(1, 2) as usize, arg(2, 10) as usize, arg(3, 42));

    let spec = synth_up(t, p, 16, 16, seed)?;
    let path = std::env::temp_dir().join(format!("upslope-operator-{p}-{t}-{seed}.json"));
    save_up(&spec, &path)?;
    let spec = load_up(&path)?;
    println!("operator with {} coset matrices, stored at {}", spec.cells.len(), path.display());
    for cell in spec.cells.iter().take(4) {
        println!("  cell ({}, {}): {}", cell.i, cell.j, cell.delta);
    }

    let depth = blocks as u32;
    let bm = assemble_at(&spec, blocks, CharOfDelta::new(1), ActionPrecision::new(depth, blocks))?;
    let report = verify_block_bounds(&bm)?;
    println!(
        "assembled {} x {}: {} entries, {} violations, min margin {}",
        bm.size(),
        bm.size(),
        report.checked,
        report.violations.len(),
        report.min_margin
    );

    let rm = rescale_halo_basis(&bm)?;
    println!("rescaled basis: every column meets its T-order bound, min margin {}", rm.min_margin);
    for col in [0, t, 2 * t, bm.size() - 1] {
        println!("  column {col}: entry (0, {col}) has T-order {}", rm.get(0, col).halo_t_order());
    }
    Ok(())
}
