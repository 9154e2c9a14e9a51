//! Arithmetic in `Z/p^N`: units, valuations, Teichmüller lifts and the
//! logarithm ratio that underlies the weight coordinate.
//!
//! Usage: `cargo run --example padic_basics -- [p] [N]`

use upslope::padic::{padic_log_ratio, q_of, teichmuller, PAdicNum};

fn main() -> upslope::Result<()> {
    let args: Vec<u32> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let p = args.first().copied().unwrap_or(5);
    let prec = args.get(1).copied().unwrap_or(10);

    let x = PAdicNum::new(p, prec, 2 * p as i128 + 1)?;
    let y = PAdicNum::new(p, prec, (p as i128).pow(3) * 7)?;
    println!("x = {x}, y = {y}");
    println!("x + y = {}, x·y = {}", x.checked_add(&y)?, x.checked_mul(&y)?);
    println!("v_p(y) = {}", y.val_p());
    println!("1/x = {}", x.inverse()?);
    println!("y / p^3 = {} (known to {} digits)", y.div_p_pow(3)?, y.div_p_pow(3)?.prec());

    for a in 1..p.min(6) as i128 {
        let d = PAdicNum::new(p, prec, a)?;
        let w = teichmuller(&d)?;
        println!("Teichmüller lift of {a}: {w}  (w^(p-1) = {})", w.pow((p - 1) as u64));
    }

    let q = q_of(p);
    let u = PAdicNum::new(p, prec, 1 + q as i128)?;
    println!("log(1 + q)/q = {}", padic_log_ratio(&u, q)?);
    Ok(())
}
