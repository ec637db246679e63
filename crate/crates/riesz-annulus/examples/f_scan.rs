//! Scan of the gap functional F(lambda) and the bracketed root lambda_star.
//!
//!     cargo run --release --example f_scan

use riesz_annulus::balayage::{min_smooth_factor, solve_mu_lambda, SolveConfig};
use riesz_annulus::iba::{f_of_lambda_with, find_lambda_star, run_iba};
use riesz_annulus::RieszParams;

fn main() -> riesz_annulus::Result<()> {
    let s = 0.7;
    let params = RieszParams::from_s(s)?;
    let cfg = SolveConfig::default();
    let trace = run_iba(&params, &cfg, 200, 1e-10)?;

    println!("s = {s}, lambda_inf = {:.6}", trace.lambda_inf);
    println!("{:>10} {:>14} {:>12} {:>14}", "lambda", "F", "mass", "min smooth");
    let mut lambda = trace.lambda_inf + 1e-3;
    while lambda < 0.999 {
        let mu = solve_mu_lambda(lambda, &params, &cfg)?;
        let f = f_of_lambda_with(&mu, lambda, &params, &cfg)?;
        let (min_sf, _) = min_smooth_factor(&mu);
        println!(
            "{lambda:>10.4} {f:>14.8} {:>12.6} {:>14.3e}",
            mu.total_mass(),
            min_sf
        );
        lambda += 0.05;
    }

    let lambda_star = find_lambda_star(&params, &cfg, &trace)?;
    let mu = solve_mu_lambda(lambda_star, &params, &cfg)?;
    let f = f_of_lambda_with(&mu, lambda_star, &params, &cfg)?;
    println!("\nroot: lambda_star = {lambda_star:.8}   F = {f:.2e}");
    println!("limit toward 1: F(0.999) = {:.6} vs -2/(1-s) = {:.6}",
        f_of_lambda_with(&solve_mu_lambda(0.999, &params, &cfg)?, 0.999, &params, &cfg)?,
        -2.0 / (1.0 - s));
    Ok(())
}
