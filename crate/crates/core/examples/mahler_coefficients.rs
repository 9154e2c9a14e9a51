//! Mahler coefficients from samples, finite differences, and the tilted degree.
//!
//! Usage: `cargo run --example mahler_coefficients -- [p] [N]`

use upslope::mahler::{delta_op, evaluate, mahler_from_samples, tilted_degree, SampleVector};
use upslope::padic::PAdicNum;

fn main() -> upslope::Result<()> {
    let args: Vec<u32> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let p = args.first().copied().unwrap_or(3);
    let prec = args.get(1).copied().unwrap_or(12);
    let len = 24;

    let cube = SampleVector::from_fn(len, |z| PAdicNum::new(p, prec, (z as i128).pow(3)).expect("in range"));
    let f = mahler_from_samples(&cube, len)?;
    println!("z^3: Mahler coefficients {:?}", f.coeffs.iter().take(5).map(|c| c.to_string()).collect::<Vec<_>>());
    println!("  f(10) = {}", evaluate(&f, 10).expect("nonempty"));
    println!("  Δ^2 f coefficients start {:?}", delta_op(&f, 2).coeffs.iter().take(3).map(|c| c.to_string()).collect::<Vec<_>>());

    let base = PAdicNum::new(p, prec, 1 + p as i128)?;
    let power = SampleVector::from_fn(len, |z| base.pow(z));
    let g = mahler_from_samples(&power, len)?;
    let vals: Vec<String> = g.coeffs.iter().take(8).map(|c| c.val_p().to_string()).collect();
    println!("(1 + p)^z: valuations of the first coefficients {vals:?}");
    let deg = tilted_degree(&g);
    println!("  tilted degree: decided {}, ceiling {}, exact {}", deg.decided, deg.ceiling, deg.is_exact());

    let steps = SampleVector::from_fn(len, |z| PAdicNum::new(p, prec, (z % p as u64) as i128).expect("in range"));
    let deg = tilted_degree(&mahler_from_samples(&steps, len)?);
    println!("z mod p: tilted degree decided {}, ceiling {}", deg.decided, deg.ceiling);
    Ok(())
}
