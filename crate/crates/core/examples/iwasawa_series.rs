//! Elements of the Iwasawa algebra `Z_p[[T]]`, truncated in both `p` and `T`.
//!
//! Usage: `cargo run --example iwasawa_series`

use upslope::iwasawa::{eval_valuation, one_plus_t_pow, LambdaElt};
use upslope::padic::PAdicNum;
use upslope::Q;

fn main() -> upslope::Result<()> {
    let (p, prec, m_t) = (3, 8, 8);
    let f = LambdaElt::from_ints(p, prec, &[3, 1, 0, 0, 0, 0, 0, 0])?;
    let g = LambdaElt::from_ints(p, prec, &[9, 0, 1, 0, 0, 0, 0, 0])?;
    let fg = f.checked_mul(&g)?;
    println!("f = 3 + T, g = 9 + T^2");
    println!("f·g residues: {:?}", fg.residues());
    println!("(p, T)-order of f·g: {}", fg.mlambda_order());
    println!("T-order in the halo sense: {}", fg.halo_t_order());

    let h = LambdaElt::from_ints(p, prec, &[1, 3, 0, 0, 0, 0, 0, 0])?;
    let inv = h.inverse()?;
    println!("(1 + 3T)^-1 residues: {:?}", inv.residues());
    println!("check: {:?}", h.checked_mul(&inv)?.residues());

    let g4 = PAdicNum::new(p, 2 * prec, 4)?;
    let pow = one_plus_t_pow(&g4, m_t, prec)?;
    println!("(1 + T)^4 = {:?}", pow.residues());

    for v in [Q::new(1.into(), 2.into()), Q::new(1.into(), 3.into()), Q::new(1.into(), 4.into())] {
        let (val, unique) = eval_valuation(&fg, &v)?;
        println!("v(f·g) at v(T) = {v}: {val}, unique minimiser: {unique}");
    }
    Ok(())
}
