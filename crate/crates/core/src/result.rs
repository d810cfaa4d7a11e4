use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::itq::KnowledgeMatrixSet;
use crate::model::CompositeParams;

/// Outcome of one optimizer run. `trace[k]` is the best fitness known after
/// iteration `k`, with `trace[0]` the best of the initial population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationRunResult {
    pub algorithm: String,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub trace: Vec<f64>,
    /// Mean agent reward per iteration; empty for optimizers without rewards.
    #[serde(default)]
    pub mean_reward: Vec<f64>,
    pub iterations: usize,
    pub seed: u64,
    #[serde(skip)]
    pub knowledge: Option<KnowledgeMatrixSet>,
    #[serde(default)]
    pub warning: Option<String>,
}

impl OptimizationRunResult {
    pub fn best_params(&self) -> Result<CompositeParams> {
        CompositeParams::from_slice(&self.best_position)
    }

    /// First iteration whose best-so-far fitness is at or below `level`.
    pub fn iterations_to_reach(&self, level: f64) -> Option<usize> {
        self.trace.iter().position(|&f| f <= level)
    }

    /// Writes `iteration,best_fitness,mean_reward` rows.
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "iteration,best_fitness,mean_reward")?;
        for (k, f) in self.trace.iter().enumerate() {
            match self.mean_reward.get(k) {
                Some(r) => writeln!(w, "{k},{f},{r}")?,
                None => writeln!(w, "{k},{f},")?,
            }
        }
        Ok(())
    }
}
