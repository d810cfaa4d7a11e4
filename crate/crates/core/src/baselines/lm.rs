use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::result::OptimizationRunResult;
use crate::space::Bounds;

use super::{random_point, BaselineConfig, LmSettings};

const MAX_JACOBIAN_FAILURES: usize = 8;
const START_ATTEMPTS: usize = 200;

fn cost(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Central-difference Jacobian (rows: residuals, columns: parameters). Steps
/// are clipped at the bounds, so the difference becomes one-sided there.
fn jacobian<R>(residual: &R, x: &[f64], bounds: &Bounds, fd_step: f64) -> Option<DMatrix<f64>>
where
    R: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let mut cols = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let h = fd_step * (bounds.hi[i] - bounds.lo[i]);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] = (x[i] + h).min(bounds.hi[i]);
        xm[i] = (x[i] - h).max(bounds.lo[i]);
        let rp = residual(&xp)?;
        let rm = residual(&xm)?;
        let span = xp[i] - xm[i];
        cols.push(DVector::from_iterator(rp.len(), rp.iter().zip(&rm).map(|(a, b)| (a - b) / span)));
    }
    Some(DMatrix::from_columns(&cols))
}

/// Gradient of `sum(r^2)` from the finite-difference Jacobian: `2 J^T r`.
pub fn lm_gradient<R>(residual: &R, x: &[f64], bounds: &Bounds, fd_step: f64) -> Option<Vec<f64>>
where
    R: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let r = DVector::from_vec(residual(x)?);
    let j = jacobian(residual, x, bounds, fd_step)?;
    Some((j.transpose() * r * 2.0).iter().copied().collect())
}

/// Levenberg-Marquardt on `sum(r(x)^2)` with Marquardt diagonal scaling and
/// projection onto the bounds. Without `start`, the first point of a seeded
/// uniform sequence with a finite residual is used, falling back to the box
/// midpoint.
///
/// Stops when the gradient norm drops below `grad_tol`, when the damping
/// exceeds `damping_max`, or after `k_max` iterations. A residual callback
/// returning `None` (failed simulation) is treated as a rejected step.
pub fn run_lm<R>(
    residual: &R,
    bounds: &Bounds,
    start: Option<&[f64]>,
    config: &BaselineConfig,
) -> Result<OptimizationRunResult>
where
    R: Fn(&[f64]) -> Option<Vec<f64>>,
{
    config.validate()?;
    let LmSettings { damping_init, damping_up, damping_down, damping_max, fd_step, grad_tol } = config.lm;
    let mut x = match start {
        Some(s) => s.to_vec(),
        None => {
            let mut rng = crate::itq::agent_rng(config.seed, 0);
            (0..START_ATTEMPTS)
                .map(|_| random_point(bounds, &mut rng))
                .find(|p| residual(p).is_some())
                .unwrap_or_else(|| bounds.midpoint())
        }
    };
    bounds.clamp(&mut x);
    let mut result = OptimizationRunResult {
        algorithm: "lm".into(),
        best_position: x.clone(),
        best_fitness: crate::space::PENALTY,
        trace: vec![],
        mean_reward: vec![],
        iterations: 0,
        seed: config.seed,
        knowledge: None,
        warning: None,
    };
    let Some(mut r) = residual(&x) else {
        result.trace.push(result.best_fitness);
        result.warning = Some("model failed at the starting point".into());
        return Ok(result);
    };
    let mut c = cost(&r);
    result.trace.push(c);
    let mut lambda = damping_init;
    let mut failures = 0;

    while result.iterations < config.k_max {
        let Some(j) = jacobian(residual, &x, bounds, fd_step) else {
            failures += 1;
            lambda *= damping_up;
            if failures >= MAX_JACOBIAN_FAILURES {
                result.warning = Some("Jacobian evaluation kept failing".into());
                break;
            }
            continue;
        };
        let rv = DVector::from_column_slice(&r);
        let g = j.transpose() * &rv;
        if g.norm() < grad_tol {
            break;
        }
        let jtj = j.transpose() * &j;
        let diag: Vec<f64> = (0..jtj.nrows()).map(|i| jtj[(i, i)].max(1e-12)).collect();
        let mut accepted = false;
        let mut overflow = false;
        while !accepted {
            let mut a = jtj.clone();
            for (i, d) in diag.iter().enumerate() {
                a[(i, i)] += lambda * d;
            }
            let step = a.lu().solve(&(-&g));
            if let Some(step) = step {
                let mut xn: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, s)| xi + s).collect();
                bounds.clamp(&mut xn);
                if let Some(rn) = residual(&xn) {
                    let cn = cost(&rn);
                    if cn < c {
                        x = xn;
                        r = rn;
                        c = cn;
                        lambda = (lambda / damping_down).max(f64::MIN_POSITIVE);
                        accepted = true;
                        continue;
                    }
                }
            }
            lambda *= damping_up;
            if lambda > damping_max {
                overflow = true;
                break;
            }
        }
        if overflow {
            break;
        }
        result.iterations += 1;
        result.trace.push(c);
    }

    result.best_position = x;
    result.best_fitness = c;
    Ok(result)
}
