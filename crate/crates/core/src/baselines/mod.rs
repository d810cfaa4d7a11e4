//! Reference optimizers over the continuous, box-bounded parameter space:
//! whale optimization, grey wolf, particle swarm and Levenberg-Marquardt.
//!
//! All of them report an [`OptimizationRunResult`] whose trace is the
//! best-so-far objective, so runs of any optimizer can be compared directly.
//!
//! [`OptimizationRunResult`]: crate::result::OptimizationRunResult

mod gwo;
mod lm;
mod pso;
mod woa;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::Bounds;

pub use gwo::run_gwo;
pub use lm::{lm_gradient, run_lm};
pub use pso::run_pso;
pub use woa::run_woa;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsoCoefficients {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Velocity limit as a fraction of each dimension's range.
    pub velocity_clamp: f64,
}

impl Default for PsoCoefficients {
    fn default() -> Self {
        Self { inertia: 0.72, cognitive: 1.49, social: 1.49, velocity_clamp: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmSettings {
    pub damping_init: f64,
    pub damping_up: f64,
    pub damping_down: f64,
    /// Damping above this ends the run.
    pub damping_max: f64,
    /// Finite-difference step as a fraction of each parameter's range.
    pub fd_step: f64,
    pub grad_tol: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        Self {
            damping_init: 1e-3,
            damping_up: 10.0,
            damping_down: 10.0,
            damping_max: 1e16,
            fd_step: 1e-6,
            grad_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub population: usize,
    pub k_max: usize,
    pub seed: u64,
    #[serde(default)]
    pub pso: PsoCoefficients,
    #[serde(default)]
    pub lm: LmSettings,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { population: 30, k_max: 700, seed: 0, pso: PsoCoefficients::default(), lm: LmSettings::default() }
    }
}

impl BaselineConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::InvalidConfig("population must be at least 2".into()));
        }
        if self.k_max < 1 {
            return Err(Error::InvalidConfig("k_max must be at least 1".into()));
        }
        Ok(())
    }
}

pub(crate) fn random_point<R: Rng>(bounds: &Bounds, rng: &mut R) -> Vec<f64> {
    bounds.lo.iter().zip(&bounds.hi).map(|(l, h)| l + (h - l) * rng.random::<f64>()).collect()
}

pub(crate) fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
pub(crate) mod test_support {
    use crate::result::OptimizationRunResult;

    pub fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    pub fn median(mut v: Vec<f64>) -> f64 {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }

    pub fn monotone(r: &OptimizationRunResult) -> bool {
        r.trace.windows(2).all(|w| w[1] <= w[0])
    }
}
