//! Point balayage onto a union of intervals via the Kelvin transform, checked
//! against the single-interval closed form and the potential-match property.
//!
//!     cargo run --release --example kelvin_balayage

use riesz_annulus::balayage::SolveConfig;
use riesz_annulus::measures::Interval;
use riesz_annulus::special::{balayage_point_interval, kelvin_point_balayage};
use riesz_annulus::RieszParams;

fn main() -> riesz_annulus::Result<()> {
    let s = 0.7;
    let params = RieszParams::from_s(s)?;
    let cfg = SolveConfig::with_nodes(48);

    // single interval: the Kelvin route must match the closed form
    let iv = [Interval::new(0.3, 1.0)?];
    let kelvin = kelvin_point_balayage(-0.2, &iv, &params, &cfg)?;
    let closed = balayage_point_interval(-0.2, 0.3, 1.0, &params, cfg.n_nodes)?;
    let sup = kelvin.pieces()[0]
        .smooth_values()
        .iter()
        .zip(closed.smooth_values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("single interval, source at -0.2: |kelvin - closed form|_sup = {sup:.3e}");

    // two intervals with the source in the gap
    let k = [Interval::new(-1.0, -0.5)?, Interval::new(0.5, 1.0)?];
    let bal = kelvin_point_balayage(0.0, &k, &params, &cfg)?;
    println!("\nsource at 0 swept onto [-1,-0.5] u [0.5,1]:");
    println!("  mass = {:.10}", bal.total_mass());
    for x in [-0.8, 0.6, 0.9] {
        println!(
            "  potential({x:>5}) = {:.10}  vs  |x|^(-s) = {:.10}",
            bal.potential(x)?,
            x.abs().powf(-s)
        );
    }
    // evenness of the swept measure for the centered source
    let d1 = bal.density_at(0.7)?;
    let d2 = bal.density_at(-0.7)?;
    println!("  density(0.7) - density(-0.7) = {:.3e}", d1 - d2);
    Ok(())
}
