//! Independent validation by discrete energy minimization: N-particle
//! gradient descent on the original energy
//!
//!   E_N = 1/(2 N^2) sum_{i != j} W(x_i - x_j) + 1/N sum_i U(x_i),
//!
//! with W(x) = -|x|^b / b and U(x) = x^4 / 4.  This gives a solver-free check
//! that mass concentrates on `[-R2,-R1] u [R1,R2]`.
//!
//! Forces are evaluated in parallel over particles with a fixed inner
//! summation order, and reductions use pairwise summation, so results are
//! independent of the thread count.

use crate::error::{Error, Result};
use crate::pool;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// State of the N-particle descent.
#[derive(Debug, Clone)]
pub struct ParticleSystem {
    positions: Vec<f64>,
    b: f64,
    step: f64,
    iterations: usize,
    seed: Option<u64>,
}

/// Pairwise (cascade) summation; the summation tree depends only on the
/// slice length, keeping reductions deterministic.
pub(crate) fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

impl ParticleSystem {
    /// Equispaced start on [-1.2, 1.2]; for even N the configuration is
    /// mirror symmetric.
    pub fn equispaced(n: usize, b: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain("need at least 2 particles".into()));
        }
        if !(b >= 1.0 && b <= 2.0) {
            return Err(Error::Domain(format!("particle oracle expects b in [1,2], got {b}")));
        }
        let positions = (0..n)
            .map(|i| -1.2 + 2.4 * i as f64 / (n - 1) as f64)
            .collect();
        Ok(ParticleSystem { positions, b, step: 0.05, iterations: 0, seed: None })
    }

    /// Equispaced start plus uniform jitter of the given amplitude.
    pub fn equispaced_with_jitter(n: usize, b: f64, amplitude: f64, seed: u64) -> Result<Self> {
        let mut ps = Self::equispaced(n, b)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for x in &mut ps.positions {
            *x += amplitude * (rng.gen::<f64>() - 0.5);
        }
        ps.seed = Some(seed);
        Ok(ps)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Empirical support endpoints: (min |x|, max |x|).
    pub fn support_endpoints(&self) -> (f64, f64) {
        let inner = self.positions.iter().map(|x| x.abs()).fold(f64::MAX, f64::min);
        let outer = self.positions.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
        (inner, outer)
    }
}

/// Discrete energy of the configuration.
pub fn discrete_energy(ps: &ParticleSystem) -> f64 {
    let x = &ps.positions;
    let n = x.len();
    let b = ps.b;
    let partials: Vec<f64> = pool::install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut wsum = 0.0;
                for j in 0..n {
                    if j != i {
                        wsum += -(x[i] - x[j]).abs().powf(b) / b;
                    }
                }
                wsum / (2.0 * (n * n) as f64) + x[i].powi(4) / (4.0 * n as f64)
            })
            .collect()
    });
    pairwise_sum(&partials)
}

fn gradient(ps: &ParticleSystem) -> Vec<f64> {
    let x = &ps.positions;
    let n = x.len();
    let b = ps.b;
    pool::install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut g = 0.0;
                for j in 0..n {
                    if j != i {
                        let d = x[i] - x[j];
                        g += -d.signum() * d.abs().powf(b - 1.0);
                    }
                }
                g / (n * n) as f64 + x[i].powi(3) / n as f64
            })
            .collect()
    })
}

/// Adaptive-step gradient descent: a step is accepted only when the energy
/// does not increase; rejected steps halve the step size, accepted ones grow
/// it by 10%.
pub fn descend(ps: &ParticleSystem, iters: usize) -> ParticleSystem {
    let mut out = ps.clone();
    let n = out.positions.len() as f64;
    let mut energy = discrete_energy(&out);
    for _ in 0..iters {
        let g = gradient(&out);
        let mut grew = false;
        loop {
            let trial: Vec<f64> = out
                .positions
                .iter()
                .zip(&g)
                .map(|(&xi, &gi)| xi - out.step * n * gi)
                .collect();
            let trial_ps = ParticleSystem { positions: trial, ..out.clone() };
            let trial_energy = discrete_energy(&trial_ps);
            if trial_energy <= energy + 1e-14 * energy.abs().max(1.0) {
                out.positions = trial_ps.positions;
                energy = trial_energy;
                break;
            }
            out.step *= 0.5;
            if out.step < 1e-14 {
                grew = true; // step exhausted: nothing left to do
                break;
            }
        }
        out.iterations += 1;
        if grew {
            break;
        }
        out.step *= 1.1;
    }
    out
}
