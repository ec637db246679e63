//! Full pipeline for one exponent: balayage iteration, root of F, rescaling,
//! and the Euler–Lagrange verification report.
//!
//!     cargo run --release --example solve_minimizer

use riesz_annulus::balayage::SolveConfig;
use riesz_annulus::iba::{assemble_minimizer, verify_euler_lagrange};

fn main() -> riesz_annulus::Result<()> {
    let b = 1.3;
    let cfg = SolveConfig::default();
    let res = assemble_minimizer(b, &cfg)?;

    println!("b = {b}   (s = {})", res.s);
    println!("lambda_inf  = {:.8}", res.diagnostics.lambda_inf);
    println!("lambda_star = {:.8}", res.lambda_star);
    println!("R1 = {:.6}   R2 = {:.6}", res.r1, res.r2);
    println!("C0 = {:.8}   (spread over evaluation points {:.2e})", res.c0, res.diagnostics.c0_spread);
    println!("mass(rho) = {:.12}", res.diagnostics.mass);

    let report = verify_euler_lagrange(&res, 2000)?;
    println!("\nEuler–Lagrange verification on 2000 grid points over [-2 R2, 2 R2]:");
    println!("  max |field - C0| on support   = {:.3e}", report.support_residual_max);
    println!("  min (field - C0) off support  = {:.3e}", report.off_support_min);
    println!("  field(0) - C0                 = {:.6}", report.gap_field_at_zero);
    println!("  sign changes of V in the gap  = {}", report.gap_sign_changes);
    if let Some(z) = report.gap_sign_change_at {
        println!("  sign change at x             = {:.6}", z);
    }
    Ok(())
}
