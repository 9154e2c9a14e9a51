//! Characteristic series of a synthetic U_p operator and its coefficient bound.
//!
//! Usage: `cargo run --release --example char_series -- [p] [t] [r] [D] [seed]`

use std::time::Instant;

use upslope::charpoly::{char_series_run, lambda_seq, verify_char_bound};
use upslope::iwasawa::CharOfDelta;
use upslope::up_operator::synth_up;

fn main() -> upslope::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let arg = |i: usize, default: u64| args.get(i).copied().unwrap_or(default);
    let (p, t, r, d, seed) = (arg(0, 3) as u32, arg(1, 1) as usize, arg(2, 8) as u32, arg(3, 8) as usize, arg(4, 42));

    let start = Instant::now();
    let spec = synth_up(t, p, 16, 16, seed)?;
    let run = char_series_run(&spec, d, r, CharOfDelta::new(1))?;
    println!(
        "p = {p}, t = {t}: truncations {} and {} agree modulo (p, T)^{r} ({:.2?})",
        run.sizes.0,
        run.sizes.1,
        start.elapsed()
    );
    let report = verify_char_bound(&run.series, &lambda_seq(p, t, d))?;
    for (c, row) in run.series.coeffs.iter().zip(&report.rows) {
        let mark = if row.capped { " (checked up to r)" } else { "" };
        println!("c_{:<2} order {:>4}  λ = {:>3}{mark}  {}", row.n, row.observed, row.lambda, c);
    }
    println!("bound holds: {}", report.passed());
    Ok(())
}
