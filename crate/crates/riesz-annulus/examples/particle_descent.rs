//! The solver-free cross-check: gradient descent on the discrete N-particle
//! energy.  For b = 2 the particles collapse onto two points at +-1; for
//! b = 1.3 the empirical support matches the computed radii R1, R2.
//!
//!     cargo run --release --example particle_descent

use riesz_annulus::particles::{descend, discrete_energy, ParticleSystem};

fn main() -> riesz_annulus::Result<()> {
    let ps = ParticleSystem::equispaced(50, 2.0)?;
    let done = descend(&ps, 2500);
    let (inner, outer) = done.support_endpoints();
    println!("b = 2.0, N = 50:");
    println!("  |x| range after descent: [{inner:.8}, {outer:.8}]  (exact minimizer: two points at 1)");
    println!("  energy = {:.10}  (exact: -0.25)", discrete_energy(&done));

    let ps = ParticleSystem::equispaced(400, 1.3)?;
    let done = descend(&ps, 4000);
    let (inner, outer) = done.support_endpoints();
    println!("\nb = 1.3, N = 400:");
    println!("  empirical support [{inner:.4}, {outer:.4}]");
    println!("  computed radii     [0.6532, 0.9411]");
    println!("  energy = {:.8} after {} iterations", discrete_energy(&done), done.iterations());
    Ok(())
}
