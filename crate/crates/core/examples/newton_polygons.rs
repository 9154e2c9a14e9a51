//! Newton polygons of a characteristic series at several radii, against the
//! lower and upper bound polygons.
//!
//! Usage: `cargo run --release --example newton_polygons -- [p] [t] [r] [seed]`

use upslope::charpoly::char_series;
use upslope::iwasawa::CharOfDelta;
use upslope::polygon::{
    certified_prefix_polygon, lower_bound_polygon, ratio_rigidity, ratio_rigidity_below_upper, sandwich_check, series_points, slope_report,
    upper_bound_excess, upper_bound_polygon,
};
use upslope::up_operator::synth_up;
use upslope::Q;

fn main() -> upslope::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let arg = |i: usize, default: u64| args.get(i).copied().unwrap_or(default);
    let (p, t, r, seed) = (arg(0, 3) as u32, arg(1, 1) as usize, arg(2, 16) as u32, arg(3, 42));

    let spec = synth_up(t, p, 16, 16, seed)?;
    let cs = char_series(&spec, 12, r, CharOfDelta::new(1))?;
    let mut polygons = Vec::new();
    for v_t in [Q::new(1.into(), 3.into()), Q::new(1.into(), 4.into())] {
        let points = series_points(&cs, &v_t)?;
        let (np, used) = certified_prefix_polygon(&points)?;
        let lower = lower_bound_polygon(p, t, &v_t, cs.degree());
        let upper = upper_bound_polygon(p, t, &v_t, cs.degree() / (t * if p == 2 { 4 } else { p as usize }) + 1);
        println!("v(T) = {v_t}: certified through n = {}", used - 1);
        println!("  vertices: {}", np.vertices.iter().map(|(x, y)| format!("({x}, {y})")).collect::<Vec<_>>().join(" "));
        let report = slope_report(&np, &v_t, p);
        for (interval, deg) in report.degrees() {
            println!("  slope ratio in {interval}: multiplicity {deg}");
        }
        println!("  above the lower bound: {}", sandwich_check(&np, &lower).passed);
        println!("  points above the upper bound: {}", upper_bound_excess(&np, &upper).len());
        polygons.push((np, v_t));
    }
    let rigid = ratio_rigidity(&polygons[0].0, &polygons[0].1, &polygons[1].0, &polygons[1].1);
    println!("shared vertices with equal y/v(T): {} of {}", rigid.checked - rigid.failures.len(), rigid.checked);
    for f in &rigid.failures {
        println!("  {f}");
    }
    let below = ratio_rigidity_below_upper(p, t, &polygons[0].0, &polygons[0].1, &polygons[1].0, &polygons[1].1);
    println!("of those strictly below the upper bound: {} of {}", below.checked - below.failures.len(), below.checked);
    Ok(())
}
