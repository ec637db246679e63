//! The closed-form measures: interval equilibrium measure, point balayage,
//! and the explicit single-interval steady state with its sign change.
//!
//!     cargo run --release --example closed_forms

use riesz_annulus::measures::SignedMeasure;
use riesz_annulus::special::{
    balayage_point_interval, equilibrium_interval, gamma, mu0_exact, mu0_sign_change,
};
use riesz_annulus::RieszParams;

fn main() -> riesz_annulus::Result<()> {
    let s = 0.7;
    let params = RieszParams::from_s(s)?;

    println!("gamma(1) = {:.15}", gamma(1.0)?);
    println!("gamma(1/2) = {:.15} (sqrt(pi) = {:.15})", gamma(0.5)?, std::f64::consts::PI.sqrt());

    let eq = equilibrium_interval(-1.0, 1.0, &params, 48)?;
    println!("\nequilibrium measure on [-1,1]: mass = {:.12}", eq.mass());
    let mu = SignedMeasure::new(vec![eq], false, s)?;
    for x in [-0.8, 0.0, 0.5, 0.95] {
        println!("  W*omega({x:>5}) = {:.10}", mu.potential(x)?);
    }

    let bal = balayage_point_interval(-1.5, -1.0, 1.0, &params, 48)?;
    println!("\npoint balayage from y = -1.5: mass = {:.10}", bal.mass());
    let bmu = SignedMeasure::new(vec![bal], false, s)?;
    for x in [-0.7, 0.2, 0.9] {
        println!(
            "  potential({x:>5}) = {:.10}  vs  |x-y|^(-s) = {:.10}",
            bmu.potential(x)?,
            (x + 1.5f64).abs().powf(-s)
        );
    }

    let mu0 = mu0_exact(&params, 48)?;
    println!("\nexplicit steady state on [-1,1]:");
    println!("  total mass       = {:.12}", mu0.total_mass());
    println!("  sign change at x = {:.10}", mu0_sign_change(&params));
    for x in [0.0, 0.3, 0.6, 0.9] {
        println!("  V[mu0]({x}) = {:.2e}", mu0.field_v(x)?);
    }
    Ok(())
}
