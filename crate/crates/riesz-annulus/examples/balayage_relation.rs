//! The balayage relations between members of the steady-state family:
//! sweeping mu_{0.2} onto K_{0.5,1} reproduces mu_{0.5}, and sweeping is
//! idempotent on its own support.
//!
//!     cargo run --release --example balayage_relation

use riesz_annulus::balayage::{balayage_onto, solve_mu_lambda, SolveConfig};
use riesz_annulus::RieszParams;

fn main() -> riesz_annulus::Result<()> {
    let s = 0.7;
    let params = RieszParams::from_s(s)?;
    let cfg = SolveConfig::default();

    let mu02 = solve_mu_lambda(0.2, &params, &cfg)?;
    let mu05 = solve_mu_lambda(0.5, &params, &cfg)?;
    let swept = balayage_onto(&mu02, 0.5, &cfg)?;

    let sup = swept
        .right_piece()
        .smooth_values()
        .iter()
        .zip(mu05.right_piece().smooth_values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("|Bal_0.5[mu_0.2] - mu_0.5|_sup = {sup:.3e}");
    println!("mass mu_0.2 = {:.8}, mass mu_0.5 = {:.8}", mu02.total_mass(), mu05.total_mass());

    let again = balayage_onto(&mu05, 0.5, &cfg)?;
    let idem = again
        .right_piece()
        .smooth_values()
        .iter()
        .zip(mu05.right_piece().smooth_values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("idempotence |Bal_0.5[mu_0.5] - mu_0.5|_sup = {idem:.3e}");
    Ok(())
}
