//! Trace of the iterated balayage sequence lambda_0 = 0 < lambda_1 < ...
//! together with the independent positivity-bisection cross-check.
//!
//!     cargo run --release --example iba_trace

use riesz_annulus::balayage::SolveConfig;
use riesz_annulus::iba::run_iba;
use riesz_annulus::RieszParams;

fn main() -> riesz_annulus::Result<()> {
    let cfg = SolveConfig::default();
    for s in [0.7, 0.3] {
        let params = RieszParams::from_s(s)?;
        let trace = run_iba(&params, &cfg, 200, 1e-10)?;
        println!("s = {s}");
        println!("{:>4} {:>14} {:>14} {:>10}", "j", "lambda", "min smooth", "residual");
        for st in &trace.steps {
            println!(
                "{:>4} {:>14.10} {:>14.3e} {:>10.1e}",
                st.j, st.lambda, st.min_smooth_factor, st.residual
            );
        }
        println!("iterate limit        : {:.10}", trace.lambda_inf_iterates);
        println!("positivity bisection : {:.10}", trace.lambda_inf);
        println!("edge smooth factor   : {:.3e}\n", trace.edge_value);
    }
    Ok(())
}
