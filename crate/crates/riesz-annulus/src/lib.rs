//! Numerical library for the interaction energy with kernel -|x|^b / b
//! (1 < b < 2) and confinement x^4 / 4 on the real line.
//!
//! Differentiating the Euler–Lagrange condition twice turns the problem into
//! a steady-state equation for the Riesz kernel W(x) = |x|^{-s}, s = 2 - b,
//! with the quadratic external field U(x) = -(3/(1-s)) x^2 on symmetric
//! two-interval sets `K_{lambda,1} = [-1,-lambda] u [lambda,1]`.  The library
//! computes the one-parameter family of signed steady states mu_lambda by
//! spectral collocation, runs the iterated balayage algorithm to locate the
//! positivity threshold lambda_inf, finds the root lambda_* of the gap
//! functional F, and rescales mu_{lambda_*} into the unique minimizer
//! supported on `[-R2,-R1] u [R1,R2]`.  An independent N-particle gradient
//! descent on the original energy provides a solver-free cross-check.
//!
//! Entry points:
//! - [`balayage::solve_mu_lambda`] — the signed steady state for one lambda.
//! - [`iba::run_iba`] — the iterated balayage sequence and lambda_inf.
//! - [`iba::assemble_minimizer`] — the full pipeline for a given b.
//! - [`particles`] — the discrete-energy oracle.
//!
//! The `examples/` directory has one runnable example per capability; the
//! thin `riesz-annulus` binary exposes the same operations as subcommands.

pub mod balayage;
pub mod cli;
pub mod error;
pub mod iba;
pub mod measures;
pub mod particles;
mod pool;
pub mod quad;
pub mod special;

pub use error::{Error, Result};
pub use measures::{EdgeDensity, Interval, SignedMeasure};

/// Exponent bookkeeping for the kernel reduction: b in (1,2) is the original
/// power, s = 2 - b in (0,1) the Riesz exponent, and u_coeff = 3/(1-s) the
/// coefficient of x^2 in the reduced external field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszParams {
    s: f64,
    b: f64,
    u_coeff: f64,
}

impl RieszParams {
    /// Construct from the Riesz exponent s in (0, 1).
    pub fn from_s(s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain(format!("s must lie in (0,1), got {s}")));
        }
        Ok(RieszParams { s, b: 2.0 - s, u_coeff: 3.0 / (1.0 - s) })
    }

    /// Construct from the original exponent b in (1, 2).
    pub fn from_b(b: f64) -> Result<Self> {
        if !(b > 1.0 && b < 2.0) {
            return Err(Error::Domain(format!("b must lie in (1,2), got {b}")));
        }
        Self::from_s(2.0 - b)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// 3/(1-s), the coefficient of x^2 in U.
    pub fn u_coeff(&self) -> f64 {
        self.u_coeff
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_roundtrip() {
        let p = RieszParams::from_b(1.3).unwrap();
        assert!((p.s() - 0.7).abs() < 1e-15);
        assert!((p.u_coeff() - 10.0).abs() < 1e-12);
        let q = RieszParams::from_s(0.7).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn params_reject_out_of_range() {
        assert!(RieszParams::from_b(1.0).is_err());
        assert!(RieszParams::from_b(2.0).is_err());
        assert!(RieszParams::from_b(2.5).is_err());
        assert!(RieszParams::from_s(0.0).is_err());
        assert!(RieszParams::from_s(1.0).is_err());
    }
}
