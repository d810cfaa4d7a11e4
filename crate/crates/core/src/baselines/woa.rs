use crate::error::Result;
use crate::itq::{agent_rng, evaluate_all, woa_move, WoaDraws};
use crate::result::OptimizationRunResult;
use crate::space::Bounds;

use super::{argmin, random_point, BaselineConfig};

const SPIRAL_B: f64 = 1.0;

/// Whale optimization. Each whale draws from its own seeded stream; all
/// whales move synchronously from the previous iteration's positions.
pub fn run_woa<F>(objective: &F, bounds: &Bounds, config: &BaselineConfig) -> Result<OptimizationRunResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    let n = config.population;
    let mut rngs: Vec<_> = (0..n).map(|j| agent_rng(config.seed, j)).collect();
    let mut pos: Vec<Vec<f64>> = rngs.iter_mut().map(|r| random_point(bounds, r)).collect();
    let fit = evaluate_all(objective, &pos);
    let b = argmin(&fit);
    let mut leader = pos[b].clone();
    let mut leader_fit = fit[b];
    let mut trace = vec![leader_fit];

    for k in 1..=config.k_max {
        let a = 2.0 - 2.0 * k as f64 / config.k_max as f64;
        let next: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let d = WoaDraws::sample(&mut rngs[j], n);
                let mut x = woa_move(&pos[j], &leader, &pos[d.partner], a, &d, SPIRAL_B);
                bounds.clamp(&mut x);
                x
            })
            .collect();
        pos = next;
        let fit = evaluate_all(objective, &pos);
        let b = argmin(&fit);
        if fit[b] < leader_fit {
            leader_fit = fit[b];
            leader = pos[b].clone();
        }
        trace.push(leader_fit);
    }

    Ok(OptimizationRunResult {
        algorithm: "woa".into(),
        best_position: leader,
        best_fitness: leader_fit,
        trace,
        mean_reward: vec![],
        iterations: config.k_max,
        seed: config.seed,
        knowledge: None,
        warning: None,
    })
}
