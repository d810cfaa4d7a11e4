//! Swarm tabular Q-learning over chained per-variable knowledge matrices,
//! with half of the swarm imitating a whale-optimization teacher.
//!
//! Each parameter owns a `bins x bins` knowledge matrix. The action picked
//! for variable `i` is the state of variable `i + 1`; the first variable's
//! state is the agent's own previous action for it (index 0 at run start).
//! Every iteration the agents are ranked by reward: the top half acts
//! ε-greedily on the knowledge matrices, the bottom half takes positions
//! proposed by the teacher. The best chain found so far is always kept, so
//! the best-fitness trace never increases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::result::OptimizationRunResult;
use crate::scenario::MeasurementSeries;
use crate::space::{self, ActionChain, Bounds, DiscretizationGrid};

/// Reward granted for a perfect (zero) fitness.
pub const REWARD_CAP: f64 = 1e12;

/// Per-variable knowledge matrices, stored variable-major and row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeMatrixSet {
    variables: usize,
    bins: usize,
    data: Vec<f64>,
}

impl KnowledgeMatrixSet {
    pub fn zeros(variables: usize, bins: usize) -> Self {
        Self { variables, bins, data: vec![0.0; variables * bins * bins] }
    }

    pub fn for_grid(grid: &DiscretizationGrid) -> Self {
        Self::zeros(grid.variables(), grid.bins)
    }

    pub fn from_raw(variables: usize, bins: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != variables * bins * bins {
            return Err(Error::Validation(format!(
                "knowledge data has {} values, expected {variables}x{bins}x{bins}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("knowledge matrices contain non-finite values".into()));
        }
        Ok(Self { variables, bins, data })
    }

    pub fn variables(&self) -> usize {
        self.variables
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn matches(&self, grid: &DiscretizationGrid) -> bool {
        self.variables == grid.variables() && self.bins == grid.bins
    }

    #[inline]
    fn offset(&self, var: usize, state: usize, action: usize) -> usize {
        (var * self.bins + state) * self.bins + action
    }

    pub fn get(&self, var: usize, state: usize, action: usize) -> f64 {
        self.data[self.offset(var, state, action)]
    }

    pub fn set(&mut self, var: usize, state: usize, action: usize, value: f64) {
        let o = self.offset(var, state, action);
        self.data[o] = value;
    }

    pub fn row(&self, var: usize, state: usize) -> &[f64] {
        let o = self.offset(var, state, 0);
        &self.data[o..o + self.bins]
    }

    pub fn matrix(&self, var: usize) -> &[f64] {
        let n = self.bins * self.bins;
        &self.data[var * n..(var + 1) * n]
    }

    /// Index of the largest entry of a row; ties go to the lowest index.
    pub fn argmax(&self, var: usize, state: usize) -> usize {
        let row = self.row(var, state);
        let mut best = 0;
        for (a, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = a;
            }
        }
        best
    }

    /// The chain obtained by acting purely greedily from `first_state`.
    pub fn greedy_chain(&self, first_state: usize) -> ActionChain {
        let mut state = first_state;
        ActionChain(
            (0..self.variables)
                .map(|i| {
                    state = self.argmax(i, state);
                    state
                })
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// `self += weight * other`.
    pub fn add_scaled(&mut self, other: &KnowledgeMatrixSet, weight: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += weight * b;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentMode {
    Greedy,
    Teacher,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: usize,
    pub chain: ActionChain,
    pub previous: Option<ActionChain>,
    pub fitness: f64,
    pub reward: f64,
    pub mode: AgentMode,
    /// State fed to the first variable's matrix on the next greedy pick.
    pub first_state: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItqConfig {
    pub alpha: f64,
    pub gamma: f64,
    /// Probability of a greedy (exploiting) action.
    pub epsilon: f64,
    /// Reward multiplicator.
    pub w: f64,
    pub population: usize,
    pub k_max: usize,
    /// Knowledge-change threshold for early stopping.
    pub zeta: f64,
    pub seed: u64,
}

impl ItqConfig {
    pub fn prelearning() -> Self {
        Self { alpha: 0.1, gamma: 0.2, epsilon: 0.5, w: 1.0, population: 30, k_max: 700, zeta: 1e-4, seed: 0 }
    }

    pub fn transfer() -> Self {
        Self { gamma: 0.1, epsilon: 0.8, k_max: 200, ..Self::prelearning() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must lie in (0, 1]");
        }
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon must lie in [0, 1]");
        }
        if !(self.w > 0.0) {
            return bad("reward multiplicator must be positive");
        }
        if self.population < 2 || !self.population.is_multiple_of(2) {
            return bad("population must be even and at least 2");
        }
        if !(self.zeta >= 0.0) {
            return bad("zeta must be non-negative");
        }
        Ok(())
    }
}

/// A chain together with which variables were chosen greedily.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub chain: ActionChain,
    pub greedy: Vec<bool>,
}

/// ε-greedy walk along the chain. For every variable a uniform draw
/// `u <= epsilon` selects the row argmax, otherwise a uniform random action.
pub fn select_action_chain<R: Rng>(
    q: &KnowledgeMatrixSet,
    epsilon: f64,
    first_state: usize,
    rng: &mut R,
) -> Selection {
    let mut state = first_state;
    let mut chain = Vec::with_capacity(q.variables);
    let mut greedy = Vec::with_capacity(q.variables);
    for var in 0..q.variables {
        let u: f64 = rng.random();
        let action = if u <= epsilon {
            greedy.push(true);
            q.argmax(var, state)
        } else {
            greedy.push(false);
            rng.random_range(0..q.bins)
        };
        chain.push(action);
        state = action;
    }
    Selection { chain: ActionChain(chain), greedy }
}

/// `W / f_new` when the agent did not get worse, zero otherwise.
pub fn compute_reward(f_prev: f64, f_new: f64, w: f64) -> f64 {
    if f_new <= f_prev {
        if f_new == 0.0 {
            REWARD_CAP
        } else {
            (w / f_new).min(REWARD_CAP)
        }
    } else {
        0.0
    }
}

/// State-action pairs visited by one agent, one per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
}

impl Transition {
    pub fn from_chain(first_state: usize, chain: &ActionChain) -> Self {
        let actions = chain.0.clone();
        let mut states = Vec::with_capacity(actions.len());
        states.push(first_state);
        states.extend_from_slice(&actions[..actions.len().saturating_sub(1)]);
        Self { states, actions }
    }
}

/// One Q-learning step on every visited cell:
/// `Q(s,a) += alpha * (R + gamma * max_a' Q(s,a') - Q(s,a))`.
pub fn update_knowledge(q: &mut KnowledgeMatrixSet, t: &Transition, reward: f64, alpha: f64, gamma: f64) {
    for (var, (&s, &a)) in t.states.iter().zip(&t.actions).enumerate() {
        let row_max = q.row(var, s).iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let cur = q.get(var, s, a);
        q.set(var, s, a, cur + alpha * (reward + gamma * row_max - cur));
    }
}

/// Ranks agents by reward (ties: lower id first). The top half acts
/// greedily, the rest imitate the teacher. Also returns the top agent.
pub fn imitation_assignments(rewards: &[f64]) -> (Vec<AgentMode>, usize) {
    let mut order: Vec<usize> = (0..rewards.len()).collect();
    order.sort_by(|&a, &b| rewards[b].total_cmp(&rewards[a]).then(a.cmp(&b)));
    let mut modes = vec![AgentMode::Teacher; rewards.len()];
    for &id in &order[..rewards.len() / 2] {
        modes[id] = AgentMode::Greedy;
    }
    (modes, order[0])
}

/// Random numbers consumed by one whale move, in draw order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WoaDraws {
    pub r1: f64,
    pub r2: f64,
    pub p: f64,
    pub l: f64,
    pub partner: usize,
}

impl WoaDraws {
    pub fn sample<R: Rng>(rng: &mut R, population: usize) -> Self {
        WoaDraws {
            r1: rng.random(),
            r2: rng.random(),
            p: rng.random(),
            l: rng.random_range(-1.0..=1.0),
            partner: rng.random_range(0..population),
        }
    }
}

/// Standard whale move: encircle the leader (`p < 0.5`, `|A| < 1`), search
/// around a random partner (`p < 0.5`, `|A| >= 1`) or follow the log spiral
/// towards the leader (`p >= 0.5`). `a` decays from 2 to 0 over a run.
pub fn woa_move(position: &[f64], leader: &[f64], partner: &[f64], a: f64, d: &WoaDraws, spiral_b: f64) -> Vec<f64> {
    let big_a = 2.0 * a * d.r1 - a;
    let c = 2.0 * d.r2;
    if d.p < 0.5 {
        let target = if big_a.abs() < 1.0 { leader } else { partner };
        position
            .iter()
            .zip(target)
            .map(|(x, t)| t - big_a * (c * t - x).abs())
            .collect()
    } else {
        let spiral = (spiral_b * d.l).exp() * (2.0 * std::f64::consts::PI * d.l).cos();
        position
            .iter()
            .zip(leader)
            .map(|(x, t)| (t - x).abs() * spiral + t)
            .collect()
    }
}

/// Continuous whale-optimization teacher guiding the imitating agents.
#[derive(Debug, Clone, PartialEq)]
pub struct Teacher {
    pub leader: Vec<f64>,
    pub leader_fitness: f64,
    pub spiral_b: f64,
}

impl Teacher {
    pub fn new(leader: Vec<f64>, leader_fitness: f64) -> Self {
        Self { leader, leader_fitness, spiral_b: 1.0 }
    }

    /// Takes a transmitted chain as the incumbent when it is better.
    pub fn offer(&mut self, position: &[f64], fitness: f64) {
        if fitness < self.leader_fitness {
            self.leader = position.to_vec();
            self.leader_fitness = fitness;
        }
    }

    /// Proposal for agent `j` from the current swarm positions, clamped to
    /// the bounds.
    pub fn propose<R: Rng>(&self, positions: &[Vec<f64>], j: usize, a: f64, bounds: &Bounds, rng: &mut R) -> Vec<f64> {
        let d = WoaDraws::sample(rng, positions.len());
        let mut x = woa_move(&positions[j], &self.leader, &positions[d.partner], a, &d, self.spiral_b);
        bounds.clamp(&mut x);
        x
    }
}

pub(crate) fn agent_rng(seed: u64, agent: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(agent as u64);
    rng
}

pub(crate) fn evaluate_all<F>(objective: &F, points: &[Vec<f64>]) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        points.par_iter().map(|x| objective(x)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        points.iter().map(|x| objective(x)).collect()
    }
}

/// Sum over variables of the Frobenius norm of the change in each matrix,
/// restricted to the listed cells (the only ones that can change).
fn knowledge_change(q: &KnowledgeMatrixSet, cells: &[(usize, usize, f64)]) -> f64 {
    let mut per_var = vec![0.0; q.variables];
    for &(var, offset, old) in cells {
        let d = q.data[offset] - old;
        per_var[var] += d * d;
    }
    per_var.iter().map(|s| s.sqrt()).sum()
}

/// Runs the learning loop on an arbitrary objective over grid values,
/// starting from the given knowledge matrices.
pub fn run_itq_with<F>(
    objective: &F,
    grid: &DiscretizationGrid,
    config: &ItqConfig,
    initial: KnowledgeMatrixSet,
) -> Result<OptimizationRunResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    if !initial.matches(grid) {
        return Err(Error::InvalidConfig(format!(
            "knowledge matrices are {}x{}x{}, grid needs {}x{}x{}",
            initial.variables,
            initial.bins,
            initial.bins,
            grid.variables(),
            grid.bins,
            grid.bins
        )));
    }
    let n = config.population;
    let bounds = grid.bounds();
    let mut q = initial;
    let mut rngs: Vec<ChaCha8Rng> = (0..n).map(|j| agent_rng(config.seed, j)).collect();

    // Initial swarm: uniform random chains.
    let chains: Vec<ActionChain> = rngs
        .iter_mut()
        .map(|rng| ActionChain((0..grid.variables()).map(|_| rng.random_range(0..grid.bins)).collect()))
        .collect();
    let points: Vec<Vec<f64>> = chains.iter().map(|c| grid.values(c)).collect::<Result<_>>()?;
    let fitness = evaluate_all(objective, &points);
    let rewards: Vec<f64> = fitness.iter().map(|&f| compute_reward(f64::INFINITY, f, config.w)).collect();
    let (modes, top) = imitation_assignments(&rewards);
    let mut agents: Vec<Agent> = (0..n)
        .map(|j| Agent {
            id: j,
            chain: chains[j].clone(),
            previous: None,
            fitness: fitness[j],
            reward: rewards[j],
            mode: modes[j],
            first_state: 0,
        })
        .collect();

    let best_idx = argmin(&fitness);
    let mut best_chain = chains[best_idx].clone();
    let mut best_fitness = fitness[best_idx];
    let mut teacher = Teacher::new(points[top].clone(), fitness[top]);
    teacher.offer(&points[best_idx], best_fitness);

    let mut trace = vec![best_fitness];
    let mut mean_reward = vec![mean(&rewards)];
    let mut iterations = 0;

    for k in 1..=config.k_max {
        let a = 2.0 - 2.0 * k as f64 / config.k_max as f64;
        let positions: Vec<Vec<f64>> = agents.iter().map(|ag| grid.values(&ag.chain)).collect::<Result<_>>()?;
        let mut next = Vec::with_capacity(n);
        for (j, agent) in agents.iter().enumerate() {
            let chain = match agent.mode {
                AgentMode::Greedy => select_action_chain(&q, config.epsilon, agent.first_state, &mut rngs[j]).chain,
                AgentMode::Teacher => {
                    let x = teacher.propose(&positions, j, a, &bounds, &mut rngs[j]);
                    grid.encode_values(&x)?
                }
            };
            next.push(chain);
        }
        let points: Vec<Vec<f64>> = next.iter().map(|c| grid.values(c)).collect::<Result<_>>()?;
        let fitness = evaluate_all(objective, &points);

        let transitions: Vec<Transition> =
            agents.iter().zip(&next).map(|(ag, c)| Transition::from_chain(ag.first_state, c)).collect();
        let mut touched: Vec<(usize, usize, f64)> = transitions
            .iter()
            .flat_map(|t| {
                t.states.iter().zip(&t.actions).enumerate().map(|(var, (&s, &a))| {
                    let o = q.offset(var, s, a);
                    (var, o, q.data[o])
                })
            })
            .collect();
        touched.sort_by_key(|c| c.1);
        touched.dedup_by_key(|c| c.1);

        let mut rewards = Vec::with_capacity(n);
        for (j, agent) in agents.iter_mut().enumerate() {
            let r = compute_reward(agent.fitness, fitness[j], config.w);
            update_knowledge(&mut q, &transitions[j], r, config.alpha, config.gamma);
            agent.previous = Some(std::mem::replace(&mut agent.chain, next[j].clone()));
            agent.fitness = fitness[j];
            agent.reward = r;
            agent.first_state = next[j].0[0];
            rewards.push(r);
        }
        let change = knowledge_change(&q, &touched);

        let it_best = argmin(&fitness);
        if fitness[it_best] < best_fitness {
            best_fitness = fitness[it_best];
            best_chain = next[it_best].clone();
        }
        let (modes, top) = imitation_assignments(&rewards);
        for (agent, m) in agents.iter_mut().zip(modes) {
            agent.mode = m;
        }
        teacher.offer(&points[top], fitness[top]);

        trace.push(best_fitness);
        mean_reward.push(mean(&rewards));
        iterations = k;
        // An untouched all-zero table has not learned anything yet.
        if change <= config.zeta && !q.is_zero() {
            break;
        }
    }

    Ok(OptimizationRunResult {
        algorithm: "itq".into(),
        best_position: grid.values(&best_chain)?,
        best_fitness,
        trace,
        mean_reward,
        iterations,
        seed: config.seed,
        knowledge: Some(q),
        warning: None,
    })
}

/// Cold-start learning on a measurement series.
pub fn run_prelearn(
    series: &MeasurementSeries,
    grid: &DiscretizationGrid,
    config: &ItqConfig,
) -> Result<OptimizationRunResult> {
    series.validate()?;
    let objective = |x: &[f64]| space::fitness_of_vector(x, series);
    run_itq_with(&objective, grid, config, KnowledgeMatrixSet::for_grid(grid))
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_grid;

    fn small_q(bins: usize) -> KnowledgeMatrixSet {
        let mut q = KnowledgeMatrixSet::zeros(13, bins);
        for var in 0..13 {
            for s in 0..bins {
                q.set(var, s, (s + var + 1) % bins, 1.0 + var as f64);
            }
        }
        q
    }

    #[test]
    fn pure_exploitation_follows_argmax_chain() {
        let q = small_q(7);
        let mut rng = agent_rng(1, 0);
        let sel = select_action_chain(&q, 1.0, 0, &mut rng);
        assert!(sel.greedy.iter().all(|&g| g));
        assert_eq!(sel.chain, q.greedy_chain(0));
        assert_eq!(sel.chain.0[0], 1);
        assert_eq!(sel.chain.0[1], 3);
    }

    #[test]
    fn argmax_ties_pick_lowest() {
        let q = KnowledgeMatrixSet::zeros(13, 5);
        assert_eq!(q.greedy_chain(3), ActionChain(vec![0; 13]));
    }

    #[test]
    fn reward_rule() {
        assert_eq!(compute_reward(2.0, 0.5, 1.0), 2.0);
        assert_eq!(compute_reward(0.5, 2.0, 1.0), 0.0);
        assert_eq!(compute_reward(0.25, 0.25, 1.0), 4.0);
        assert_eq!(compute_reward(0.1, 0.0, 1.0), REWARD_CAP);
    }

    #[test]
    fn q_update_arithmetic() {
        let mut q = KnowledgeMatrixSet::zeros(1, 3);
        q.set(0, 1, 0, 0.5);
        q.set(0, 1, 2, 1.0);
        let t = Transition { states: vec![1], actions: vec![0] };
        update_knowledge(&mut q, &t, 2.0, 0.1, 0.2);
        assert!((q.get(0, 1, 0) - 0.67).abs() < 1e-12);
        assert_eq!(q.get(0, 1, 2), 1.0);

        let mut q2 = q.clone();
        update_knowledge(&mut q2, &t, 0.0, 1.0, 0.0);
        assert_eq!(q2.get(0, 1, 0), 0.0);
        let mut q3 = q.clone();
        update_knowledge(&mut q3, &t, 5.0, 0.0, 0.2);
        assert_eq!(q3, q);
    }

    #[test]
    fn update_touches_only_visited_cells() {
        let mut q = small_q(6);
        let before = q.clone();
        let chain = ActionChain((0..13).map(|i| (i * 5) % 6).collect());
        let t = Transition::from_chain(2, &chain);
        update_knowledge(&mut q, &t, 3.0, 0.1, 0.2);
        let changed = q.data.iter().zip(&before.data).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 13);
    }

    #[test]
    fn mode_assignment() {
        use AgentMode::*;
        let (m, top) = imitation_assignments(&[3.0, 1.0, 2.0, 0.0]);
        assert_eq!(m, vec![Greedy, Teacher, Greedy, Teacher]);
        assert_eq!(top, 0);
        let (m, top) = imitation_assignments(&[1.0; 6]);
        assert_eq!(m, vec![Greedy, Greedy, Greedy, Teacher, Teacher, Teacher]);
        assert_eq!(top, 0);
        let (m, _) = imitation_assignments(&[0.0, 5.0]);
        assert_eq!(m, vec![Teacher, Greedy]);
    }

    #[test]
    fn whale_contracts_onto_leader() {
        let x = vec![0.3, 0.7, 1.1];
        let leader = vec![0.5, 0.5, 0.5];
        let d = WoaDraws { r1: 0.9, r2: 0.4, p: 0.0, l: 0.0, partner: 0 };
        assert_eq!(woa_move(&x, &leader, &x, 0.0, &d, 1.0), leader);
    }

    #[test]
    fn teacher_proposals_encode_and_replay() {
        let grid = build_grid(100).unwrap();
        let bounds = grid.bounds();
        let positions: Vec<Vec<f64>> = (0..4).map(|i| grid.values(&ActionChain(vec![i * 30; 13])).unwrap()).collect();
        let teacher = Teacher::new(positions[1].clone(), 0.1);
        let run = |seed| {
            let mut rng = agent_rng(seed, 3);
            (0..50)
                .map(|k| teacher.propose(&positions, k % 4, 2.0 - k as f64 / 25.0, &bounds, &mut rng))
                .collect::<Vec<_>>()
        };
        let a = run(9);
        for x in &a {
            assert!(bounds.contains(x));
            grid.validate_chain(&grid.encode_values(x).unwrap()).unwrap();
        }
        assert_eq!(a, run(9));
    }

    #[test]
    fn config_validation() {
        assert!(ItqConfig::prelearning().validate().is_ok());
        assert!(ItqConfig { population: 3, ..ItqConfig::prelearning() }.validate().is_err());
        assert!(ItqConfig { gamma: 1.0, ..ItqConfig::prelearning() }.validate().is_err());
        assert!(ItqConfig { alpha: 0.0, ..ItqConfig::prelearning() }.validate().is_err());
    }

    fn sphere_on_grid(grid: &DiscretizationGrid) -> impl Fn(&[f64]) -> f64 + Sync + '_ {
        let mid = grid.bounds().midpoint();
        let span: Vec<f64> = grid.ranges.iter().map(|r| r.hi - r.lo).collect();
        move |x: &[f64]| x.iter().zip(&mid).zip(&span).map(|((v, m), s)| ((v - m) / s).powi(2)).sum()
    }

    #[test]
    fn zero_iterations_returns_initial_best() {
        let grid = build_grid(21).unwrap();
        let cfg = ItqConfig { k_max: 0, population: 6, ..ItqConfig::prelearning() };
        let f = sphere_on_grid(&grid);
        let r = run_itq_with(&f, &grid, &cfg, KnowledgeMatrixSet::for_grid(&grid)).unwrap();
        assert_eq!(r.trace.len(), 1);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.best_fitness, f(&r.best_position));
    }

    #[test]
    fn learning_on_toy_objective_is_elitist_and_deterministic() {
        let grid = build_grid(21).unwrap();
        let cfg = ItqConfig { k_max: 150, population: 10, seed: 4, ..ItqConfig::prelearning() };
        let f = sphere_on_grid(&grid);
        let r = run_itq_with(&f, &grid, &cfg, KnowledgeMatrixSet::for_grid(&grid)).unwrap();
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.best_fitness < r.trace[0]);
        assert!(r.best_fitness < 0.05, "best {}", r.best_fitness);
        let again = run_itq_with(&f, &grid, &cfg, KnowledgeMatrixSet::for_grid(&grid)).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn mismatched_initial_knowledge_rejected() {
        let grid = build_grid(10).unwrap();
        let f = sphere_on_grid(&grid);
        let err = run_itq_with(&f, &grid, &ItqConfig::prelearning(), KnowledgeMatrixSet::zeros(13, 11));
        assert!(matches!(err, Err(Error::InvalidConfig(_))));
    }
}
