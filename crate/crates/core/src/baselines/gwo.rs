use rand::Rng;

use crate::error::Result;
use crate::itq::{agent_rng, evaluate_all};
use crate::result::OptimizationRunResult;
use crate::space::Bounds;

use super::{random_point, BaselineConfig};

/// Grey wolf optimizer with elitist alpha, beta and delta leaders.
pub fn run_gwo<F>(objective: &F, bounds: &Bounds, config: &BaselineConfig) -> Result<OptimizationRunResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    let n = config.population;
    let mut rngs: Vec<_> = (0..n).map(|j| agent_rng(config.seed, j)).collect();
    let mut pos: Vec<Vec<f64>> = rngs.iter_mut().map(|r| random_point(bounds, r)).collect();
    let fit = evaluate_all(objective, &pos);
    let mut leaders: Vec<(f64, Vec<f64>)> = Vec::with_capacity(3);
    refresh_leaders(&mut leaders, &pos, &fit);
    let mut trace = vec![leaders[0].0];

    for k in 1..=config.k_max {
        let a = 2.0 - 2.0 * k as f64 / config.k_max as f64;
        let next: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let rng = &mut rngs[j];
                let mut x: Vec<f64> = (0..bounds.dim())
                    .map(|d| {
                        let xd = pos[j][d];
                        let mut sum = 0.0;
                        for i in 0..3 {
                            let lead = &leaders[i.min(leaders.len() - 1)].1;
                            let big_a = 2.0 * a * rng.random::<f64>() - a;
                            let c = 2.0 * rng.random::<f64>();
                            sum += lead[d] - big_a * (c * lead[d] - xd).abs();
                        }
                        sum / 3.0
                    })
                    .collect();
                bounds.clamp(&mut x);
                x
            })
            .collect();
        pos = next;
        let fit = evaluate_all(objective, &pos);
        refresh_leaders(&mut leaders, &pos, &fit);
        trace.push(leaders[0].0);
    }

    let (best_fitness, best_position) = leaders.swap_remove(0);
    Ok(OptimizationRunResult {
        algorithm: "gwo".into(),
        best_position,
        best_fitness,
        trace,
        mean_reward: vec![],
        iterations: config.k_max,
        seed: config.seed,
        knowledge: None,
        warning: None,
    })
}

/// Keeps the three best distinct positions seen so far.
fn refresh_leaders(leaders: &mut Vec<(f64, Vec<f64>)>, pos: &[Vec<f64>], fit: &[f64]) {
    let mut pool: Vec<(f64, Vec<f64>)> = std::mem::take(leaders);
    pool.extend(fit.iter().copied().zip(pos.iter().cloned()));
    pool.sort_by(|a, b| a.0.total_cmp(&b.0));
    for cand in pool {
        if leaders.len() == 3 {
            break;
        }
        if !leaders.iter().any(|l| l.1 == cand.1) {
            leaders.push(cand);
        }
    }
}
