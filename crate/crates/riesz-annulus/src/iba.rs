//! The iterated balayage algorithm, the gap functional F, and assembly of the
//! final two-interval minimizer.
//!
//! Starting from lambda_0 = 0, each step moves the inner edge to the first
//! nonnegativity point of the previous signed steady state; the increasing
//! sequence converges to lambda_inf, the smallest lambda with mu_lambda
//! nonnegative.  A safeguard bisection on the sign of the minimum smooth
//! factor refines lambda_inf independently of the iteration.  The admissible
//! inner-edge ratio lambda_* is then the root of
//!
//!   F(lambda) = int over (-lambda, lambda) of V applied to mu_lambda,
//!
//! which is positive at lambda_inf and tends to -2/(1-s) as lambda -> 1.
//! Rescaling mu_{lambda_*} by R2 = mass^{-1/(2+s)} produces the probability
//! measure solving the original Euler–Lagrange conditions.

use crate::balayage::{
    min_smooth_factor, solve_mu_lambda, solve_mu_lambda_detailed, SolveConfig, LAMBDA_MERGE,
};
use crate::error::{Error, Result};
use crate::measures::{EdgeDensity, Interval, SignedMeasure};
use crate::quad::{self, jacobi_rule};
use crate::RieszParams;

/// Per-step diagnostics of the iterated balayage run.
#[derive(Debug, Clone, Copy)]
pub struct IbaStep {
    pub j: usize,
    pub lambda: f64,
    pub min_smooth_factor: f64,
    pub residual: f64,
}

/// Trace of one iterated balayage run.
#[derive(Debug, Clone)]
pub struct IbaTrace {
    pub s: f64,
    /// The strictly increasing sequence lambda_0 = 0 < lambda_1 < ...
    pub lambdas: Vec<f64>,
    /// Positivity threshold, refined by the safeguard bisection.
    pub lambda_inf: f64,
    /// Raw limit of the iteration, before refinement.
    pub lambda_inf_iterates: f64,
    /// Smooth-factor value at the inner edge of mu_{lambda_inf}.
    pub edge_value: f64,
    pub steps: Vec<IbaStep>,
}

/// First zero of the smooth factor of `mu` beyond `lambda_prev`, or `None`
/// when the measure is already nonnegative there (the termination signal).
pub fn next_lambda(mu: &SignedMeasure, lambda_prev: f64) -> Result<Option<f64>> {
    let piece = mu.right_piece();
    let iv = piece.interval();
    let lo_bound = lambda_prev.max(iv.a()) + 1e-14 * iv.length().max(1.0);
    if lo_bound >= iv.b() {
        return Err(Error::Domain("lambda_prev is past the support".into()));
    }
    let m = 4096;
    let grid = |k: usize| lo_bound + k as f64 / m as f64 * (iv.b() - lo_bound);
    let first_negative = (0..=m).find(|&k| piece.smooth_at(grid(k)) < 0.0);
    let Some(k0) = first_negative else {
        return Ok(None);
    };
    for k in (k0 + 1)..=m {
        if piece.smooth_at(grid(k)) >= 0.0 {
            // bisect on the interpolant to 1e-12 in x
            let (mut lo, mut hi) = (grid(k - 1), grid(k));
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if piece.smooth_at(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
    }
    Err(Error::Inconsistent(
        "smooth factor stays negative up to the outer edge".into(),
    ))
}

/// Iterated balayage: from lambda_0 = 0, move the inner edge to the first
/// nonnegativity point until the steps drop below `tol` or `max_iter` is
/// reached, then refine by bisection on positivity.
pub fn run_iba(
    params: &RieszParams,
    cfg: &SolveConfig,
    max_iter: usize,
    tol: f64,
) -> Result<IbaTrace> {
    let s = params.s;
    let mut lambda = 0.0f64;
    let mut lambdas = vec![0.0];
    let mut steps = Vec::new();

    let (mut mu, diag) = solve_mu_lambda_detailed(lambda, params, cfg)?;
    let (min0, _) = min_smooth_factor(&mu);
    steps.push(IbaStep { j: 0, lambda: 0.0, min_smooth_factor: min0, residual: diag.residual });

    for j in 1..=max_iter {
        let next = match next_lambda(&mu, lambda)? {
            Some(l) => l,
            None => break,
        };
        if next <= lambda {
            return Err(Error::Inconsistent(format!(
                "iterate sequence not increasing: {next} after {lambda}"
            )));
        }
        let done = next - lambda < tol;
        lambda = next;
        lambdas.push(lambda);
        let (mu_next, diag) = solve_mu_lambda_detailed(lambda, params, cfg)?;
        mu = mu_next;
        let (minj, _) = min_smooth_factor(&mu);
        steps.push(IbaStep { j, lambda, min_smooth_factor: minj, residual: diag.residual });
        if done {
            break;
        }
    }
    let lambda_iba = lambda;

    // safeguard: lambda_inf is also the positivity threshold, so bisect the
    // sign of the minimum smooth factor around the iterate limit
    let min_at = |l: f64| -> Result<f64> {
        let mu = solve_mu_lambda(l, params, cfg)?;
        Ok(min_smooth_factor(&mu).0)
    };
    let mut delta = 1e-6f64;
    let (mut lo, mut hi) = (lambda_iba - delta, lambda_iba + delta);
    while min_at(lo.max(LAMBDA_MERGE))? >= 0.0 && delta < 0.1 {
        delta *= 4.0;
        lo = lambda_iba - delta;
    }
    delta = 1e-6;
    while min_at(hi.min(1.0 - 1e-6))? < 0.0 && delta < 0.1 {
        delta *= 4.0;
        hi = lambda_iba + delta;
    }
    let mut lo = lo.max(LAMBDA_MERGE);
    let mut hi = hi.min(1.0 - 1e-6);
    let lambda_inf = if min_at(lo)? < 0.0 && min_at(hi)? >= 0.0 {
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if min_at(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    } else {
        lambda_iba
    };

    let mu_inf = solve_mu_lambda(lambda_inf, params, cfg)?;
    let edge_value = mu_inf.right_piece().smooth_at(lambda_inf);
    let (min_inf, at) = min_smooth_factor(&mu_inf);
    if min_inf < -1e-4 {
        return Err(Error::Inconsistent(format!(
            "mu at lambda_inf is not nonnegative: min {min_inf:.3e} at {at:.6}"
        )));
    }
    if edge_value.abs() > 1e-4 {
        return Err(Error::Inconsistent(format!(
            "smooth factor does not vanish at lambda_inf: {edge_value:.3e}"
        )));
    }

    Ok(IbaTrace {
        s,
        lambdas,
        lambda_inf,
        lambda_inf_iterates: lambda_iba,
        edge_value,
        steps,
    })
}

/// `F(lambda)` = int over the gap of `V[mu_lambda]`.
///
/// Fubini against the gap slab turns this into two one-dimensional integrals
/// over the right piece:
///
///   F = 2/(1-s) * ( I1 - I2 - lambda^3 ),
///   I1 = int (y+lambda)^{1-s} dmu(y),
///   I2 = int (y-lambda)^{(1-s)/2} (1-y)^{(s-1)/2} u(y) dy,
///
/// where I2's weight is handled exactly by a mixed Gauss–Jacobi rule, so the
/// whole evaluation is spectral in the node count.
pub fn f_of_lambda(lambda: f64, params: &RieszParams, cfg: &SolveConfig) -> Result<f64> {
    let mu = solve_mu_lambda(lambda, params, cfg)?;
    f_of_lambda_with(&mu, lambda, params, cfg)
}

/// F for an already-solved steady state.
pub fn f_of_lambda_with(
    mu: &SignedMeasure,
    lambda: f64,
    params: &RieszParams,
    cfg: &SolveConfig,
) -> Result<f64> {
    let s = params.s;
    if !(lambda >= LAMBDA_MERGE && lambda < 1.0) {
        return Err(Error::Domain(format!(
            "F is defined for lambda in [{LAMBDA_MERGE}, 1), got {lambda}"
        )));
    }
    let piece = mu.right_piece();
    let iv = piece.interval();
    // I1: kernel |y - (-lambda)|^{1-s} against the measure, with the same
    // near/far handling as any exterior point evaluation
    let i1 = piece.exterior_power_integral(1.0 - s, -lambda, 24);
    // I2: mixed-weight rule, exponent (s-1)/2 at y=1 and (1-s)/2 at y=lambda
    let rule = jacobi_rule(cfg.n_nodes, (s - 1.0) / 2.0, (1.0 - s) / 2.0)?;
    let (ys, ws) = quad::mapped(&rule, iv.a(), iv.b());
    let i2: f64 = ys.iter().zip(&ws).map(|(&y, &w)| w * piece.smooth_at(y)).sum();
    Ok(2.0 / (1.0 - s) * (i1 - i2 - lambda.powi(3)))
}

/// Root of F in (lambda_inf, 1): bracketing bisection (extending the upper
/// end geometrically toward 1 when needed) followed by a secant polish.
pub fn find_lambda_star(params: &RieszParams, cfg: &SolveConfig, trace: &IbaTrace) -> Result<f64> {
    let lo0 = (trace.lambda_inf + 1e-4).min(1.0 - 1e-6);
    let f_lo = f_of_lambda(lo0, params, cfg)?;
    if f_lo <= 0.0 {
        return Err(Error::Bracket(format!(
            "F({lo0:.6}) = {f_lo:.3e} is not positive just above lambda_inf"
        )));
    }
    let mut hi = 0.999f64;
    let mut f_hi = f_of_lambda(hi, params, cfg)?;
    while f_hi > 0.0 {
        let eps = (1.0 - hi) / 10.0;
        if eps < 1e-12 {
            return Err(Error::Bracket(
                "F stays positive up to lambda = 1 - 1e-12; the root is beyond f64 resolution"
                    .into(),
            ));
        }
        hi = 1.0 - eps;
        f_hi = f_of_lambda(hi, params, cfg)?;
    }
    let mut lo = lo0;
    let mut f_lo = f_lo;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f_of_lambda(mid, params, cfg)?;
        if f_mid.abs() <= 1e-8 {
            return finish_root(mid, params, cfg);
        }
        if f_mid > 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    // secant polish
    let mut x0 = lo;
    let mut x1 = hi;
    let mut g0 = f_lo;
    let mut g1 = f_hi;
    for _ in 0..30 {
        if (g1 - g0).abs() < 1e-300 {
            break;
        }
        let x2 = x1 - g1 * (x1 - x0) / (g1 - g0);
        if !(x2 > lo && x2 < hi) {
            break;
        }
        let g2 = f_of_lambda(x2, params, cfg)?;
        x0 = x1;
        g0 = g1;
        x1 = x2;
        g1 = g2;
        if g1.abs() <= 1e-8 {
            break;
        }
    }
    if g1.abs() > 1e-8 {
        return Err(Error::Bracket(format!(
            "root polish stalled: |F({x1:.8})| = {:.3e}",
            g1.abs()
        )));
    }
    finish_root(x1, params, cfg)
}

fn finish_root(lambda_star: f64, params: &RieszParams, cfg: &SolveConfig) -> Result<f64> {
    let mu = solve_mu_lambda(lambda_star, params, cfg)?;
    let (min, at) = min_smooth_factor(&mu);
    if min < -1e-8 {
        return Err(Error::Inconsistent(format!(
            "mu at lambda_star is not positive: min {min:.3e} at {at:.6}"
        )));
    }
    Ok(lambda_star)
}

/// Diagnostics carried by an assembled minimizer.
#[derive(Debug, Clone)]
pub struct MinimizerDiagnostics {
    /// max |script-W * rho + script-U - C0| over an on-support grid.
    pub el_residual_support: f64,
    /// min of the field minus C0 over the off-support grid.
    pub off_support_min: f64,
    /// Minimum density smooth factor over the support.
    pub min_smooth_factor: f64,
    /// Spread of the C0 evaluations (outer edge and interior points).
    pub c0_spread: f64,
    /// |F(lambda_star)| at the accepted root.
    pub f_at_root: f64,
    /// Iterations the balayage sequence took.
    pub iba_iterations: usize,
    /// Positivity threshold found on the way.
    pub lambda_inf: f64,
    /// Mass of the rescaled measure (should be 1).
    pub mass: f64,
}

/// The assembled two-interval minimizer.
#[derive(Debug, Clone)]
pub struct MinimizerResult {
    pub b: f64,
    pub s: f64,
    pub lambda_star: f64,
    pub r1: f64,
    pub r2: f64,
    pub c0: f64,
    pub rho: SignedMeasure,
    pub diagnostics: MinimizerDiagnostics,
}

/// Full pipeline for one b in (1, 2): run the balayage iteration, find the
/// root of F, rescale, and evaluate the Euler–Lagrange constant.
pub fn assemble_minimizer(b: f64, cfg: &SolveConfig) -> Result<MinimizerResult> {
    let params = RieszParams::from_b(b)?;
    let s = params.s();
    let trace = run_iba(&params, cfg, 200, 1e-10)?;
    let lambda_star = find_lambda_star(&params, cfg, &trace)?;
    let mu = solve_mu_lambda(lambda_star, &params, cfg)?;
    let f_at_root = f_of_lambda_with(&mu, lambda_star, &params, cfg)?.abs();

    let mass = mu.total_mass();
    if !(mass > 0.0) {
        return Err(Error::Inconsistent(format!("mass of mu_lambda_star is {mass}")));
    }
    let r2 = mass.powf(-1.0 / (2.0 + s));
    let r1 = lambda_star * r2;

    // rescale: rho(x) = R2^{1+s} mu(x/R2); over the edge weight of [R1, R2]
    // the smooth factor becomes R2^2 u(x/R2)
    let src = mu.right_piece().clone();
    let right = EdgeDensity::from_fn(Interval::new(r1, r2)?, s, cfg.n_nodes, |x| {
        r2 * r2 * src.smooth_at(x / r2)
    })?;
    let rho = SignedMeasure::symmetric_pair(right)?;
    let mass_rho = rho.total_mass();
    if (mass_rho - 1.0).abs() > 1e-8 {
        return Err(Error::Inconsistent(format!(
            "rescaled measure has mass {mass_rho}, expected 1"
        )));
    }
    let (min_sf, _) = min_smooth_factor(&rho);
    if min_sf < -1e-10 {
        return Err(Error::Inconsistent(format!("rescaled density is negative: {min_sf:.3e}")));
    }

    // C0 at the outer edge, cross-checked at interior support points
    let mut c0_vals = vec![rho.original_potential(r2)?];
    for k in 1..=5 {
        let x = r1 + k as f64 / 6.0 * (r2 - r1);
        c0_vals.push(rho.original_potential(x)?);
    }
    let c0 = c0_vals.iter().sum::<f64>() / c0_vals.len() as f64;
    let c0_spread = c0_vals.iter().cloned().fold(f64::MIN, f64::max)
        - c0_vals.iter().cloned().fold(f64::MAX, f64::min);

    // support residual on a moderate grid
    let mut el_residual_support = 0.0f64;
    for k in 0..=200 {
        let x = r1 + k as f64 / 200.0 * (r2 - r1);
        el_residual_support = el_residual_support.max((rho.original_potential(x)? - c0).abs());
    }
    // off-support scan (gap and exterior out to 2 R2)
    let mut off_support_min = f64::MAX;
    for k in 0..=400 {
        let x = k as f64 / 400.0 * 2.0 * r2;
        if x >= r1 - 1e-9 && x <= r2 + 1e-9 {
            continue;
        }
        off_support_min = off_support_min.min(rho.original_potential(x)? - c0);
    }

    Ok(MinimizerResult {
        b,
        s,
        lambda_star,
        r1,
        r2,
        c0,
        rho,
        diagnostics: MinimizerDiagnostics {
            el_residual_support,
            off_support_min,
            min_smooth_factor: min_sf,
            c0_spread,
            f_at_root,
            iba_iterations: trace.lambdas.len() - 1,
            lambda_inf: trace.lambda_inf,
            mass: mass_rho,
        },
    })
}

/// Euler–Lagrange verification report.
#[derive(Debug, Clone)]
pub struct ElReport {
    /// max |field - C0| over the on-support part of the grid.
    pub support_residual_max: f64,
    /// min of (field - C0) over the off-support part of the grid.
    pub off_support_min: f64,
    /// field(0) - C0; positive in the gap for the two-interval minimizer.
    pub gap_field_at_zero: f64,
    /// Sign changes of `V[rho]` on (0, R1).
    pub gap_sign_changes: usize,
    /// Location of the single sign change (z R2 in the unrescaled variables).
    pub gap_sign_change_at: Option<f64>,
    /// max |field(x) - field(-x)| over the grid.
    pub asymmetry: f64,
}

/// Scan the Euler–Lagrange conditions on a symmetric grid of `grid` points
/// over [-2 R2, 2 R2] and report the residuals and the gap sign structure.
pub fn verify_euler_lagrange(res: &MinimizerResult, grid: usize) -> Result<ElReport> {
    let rho = &res.rho;
    let (r1, r2, c0) = (res.r1, res.r2, res.c0);
    let mut support_residual_max = 0.0f64;
    let mut off_support_min = f64::MAX;
    let mut asymmetry = 0.0f64;
    for k in 0..=grid {
        let x = -2.0 * r2 + k as f64 / grid as f64 * 4.0 * r2;
        let f = rho.original_potential(x)?;
        let fm = rho.original_potential(-x)?;
        asymmetry = asymmetry.max((f - fm).abs());
        let on_support = (x.abs() >= r1) && (x.abs() <= r2);
        if on_support {
            support_residual_max = support_residual_max.max((f - c0).abs());
        } else {
            off_support_min = off_support_min.min(f - c0);
        }
    }

    // sign structure of V[rho] across the gap (0, R1)
    let m = 400;
    let mut changes = 0usize;
    let mut change_at = None;
    let mut prev = rho.field_v(1e-4 * r1)?;
    for k in 1..m {
        let x = k as f64 / m as f64 * (r1 * (1.0 - 1e-6));
        let v = rho.field_v(x)?;
        if prev.signum() != v.signum() && prev != 0.0 {
            changes += 1;
            if change_at.is_none() {
                change_at = Some(x);
            }
        }
        prev = v;
    }
    let gap_field_at_zero = rho.original_potential(0.0)? - c0;

    Ok(ElReport {
        support_residual_max,
        off_support_min,
        gap_field_at_zero,
        gap_sign_changes: changes,
        gap_sign_change_at: change_at,
        asymmetry,
    })
}
