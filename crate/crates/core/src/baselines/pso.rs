use rand::Rng;

use crate::error::Result;
use crate::itq::{agent_rng, evaluate_all};
use crate::result::OptimizationRunResult;
use crate::space::Bounds;

use super::{argmin, random_point, BaselineConfig};

/// Global-best particle swarm with inertia. Velocities start at zero and are
/// limited per dimension to a fraction of the range.
pub fn run_pso<F>(objective: &F, bounds: &Bounds, config: &BaselineConfig) -> Result<OptimizationRunResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    let c = config.pso;
    let n = config.population;
    let dim = bounds.dim();
    let vmax: Vec<f64> = bounds.lo.iter().zip(&bounds.hi).map(|(l, h)| c.velocity_clamp * (h - l)).collect();
    let mut rngs: Vec<_> = (0..n).map(|j| agent_rng(config.seed, j)).collect();
    let mut pos: Vec<Vec<f64>> = rngs.iter_mut().map(|r| random_point(bounds, r)).collect();
    let mut vel = vec![vec![0.0; dim]; n];
    let fit = evaluate_all(objective, &pos);
    let mut pbest = pos.clone();
    let mut pbest_fit = fit;
    let g = argmin(&pbest_fit);
    let mut gbest = pbest[g].clone();
    let mut gbest_fit = pbest_fit[g];
    let mut trace = vec![gbest_fit];

    for _ in 1..=config.k_max {
        for j in 0..n {
            let rng = &mut rngs[j];
            for d in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let v = c.inertia * vel[j][d]
                    + c.cognitive * r1 * (pbest[j][d] - pos[j][d])
                    + c.social * r2 * (gbest[d] - pos[j][d]);
                vel[j][d] = v.clamp(-vmax[d], vmax[d]);
                pos[j][d] += vel[j][d];
            }
            bounds.clamp(&mut pos[j]);
        }
        let fit = evaluate_all(objective, &pos);
        for j in 0..n {
            if fit[j] < pbest_fit[j] {
                pbest_fit[j] = fit[j];
                pbest[j] = pos[j].clone();
            }
        }
        let g = argmin(&pbest_fit);
        if pbest_fit[g] < gbest_fit {
            gbest_fit = pbest_fit[g];
            gbest = pbest[g].clone();
        }
        trace.push(gbest_fit);
    }

    Ok(OptimizationRunResult {
        algorithm: "pso".into(),
        best_position: gbest,
        best_fitness: gbest_fit,
        trace,
        mean_reward: vec![],
        iterations: config.k_max,
        seed: config.seed,
        knowledge: None,
        warning: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::test_support::{median, monotone, sphere};

    #[test]
    fn one_step_matches_hand_replay() {
        let bounds = Bounds::uniform(2, -1.0, 1.0).unwrap();
        let cfg = BaselineConfig { population: 2, k_max: 1, seed: 8, ..Default::default() };
        let r = run_pso(&sphere, &bounds, &cfg).unwrap();

        let mut rngs: Vec<_> = (0..2).map(|j| agent_rng(8, j)).collect();
        let x0: Vec<Vec<f64>> = rngs
            .iter_mut()
            .map(|rng| (0..2).map(|_| -1.0 + 2.0 * rng.random::<f64>()).collect())
            .collect();
        let f0: Vec<f64> = x0.iter().map(|x| sphere(x)).collect();
        let g = if f0[1] < f0[0] { 1 } else { 0 };
        let mut best = f0[g];
        let mut best_x = x0[g].clone();
        for (j, rng) in rngs.iter_mut().enumerate() {
            let x: Vec<f64> = (0..2)
                .map(|d| {
                    let _r1: f64 = rng.random();
                    let r2: f64 = rng.random();
                    // Zero initial velocity and pbest = x0 leave only the social pull.
                    let v = (1.49 * r2 * (x0[g][d] - x0[j][d])).clamp(-0.4, 0.4);
                    (x0[j][d] + v).clamp(-1.0, 1.0)
                })
                .collect();
            if sphere(&x) < best {
                best = sphere(&x);
                best_x = x;
            }
        }
        assert_eq!(r.trace, vec![f0[g], best]);
        assert_eq!(r.best_position, best_x);
    }

    #[test]
    fn sphere_smoke() {
        let bounds = Bounds::uniform(13, -1.0, 1.0).unwrap();
        let finals: Vec<f64> = (0..10)
            .map(|s| {
                let cfg = BaselineConfig { k_max: 200, ..Default::default() }.with_seed(s);
                let r = run_pso(&sphere, &bounds, &cfg).unwrap();
                assert!(monotone(&r));
                assert!(bounds.contains(&r.best_position));
                r.best_fitness
            })
            .collect();
        assert!(median(finals) <= 1e-2);
    }
}
