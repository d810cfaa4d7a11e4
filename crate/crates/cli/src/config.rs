use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use itq_load::baselines::BaselineConfig;
use itq_load::itq::ItqConfig;
use itq_load::transfer::{SimilarityWeights, TransferMode, TransferOptions};
use itq_load::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Every tunable of every command. Resolution order: built-in defaults, then
/// the `--config` JSON (partial objects allowed), then command-line flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub bins: usize,
    pub prelearn: ItqConfig,
    pub transfer: ItqConfig,
    pub baseline: BaselineConfig,
    pub weights: SimilarityWeights,
    pub mode: TransferMode,
    /// Divide transfer weights by their sum.
    pub normalize: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            bins: itq_load::space::DEFAULT_BINS,
            prelearn: ItqConfig::prelearning(),
            transfer: ItqConfig::transfer(),
            baseline: BaselineConfig::default(),
            weights: SimilarityWeights::default(),
            mode: TransferMode::WeightedSum,
            normalize: false,
        }
    }
}

/// Flag overrides shared by the optimizing commands.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// JSON config file, or a manifest written by an earlier run.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    /// Seed for every optimizer.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Iteration budget for every optimizer.
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Population size for every optimizer.
    #[arg(long)]
    pub population: Option<usize>,
    /// Bins per parameter range.
    #[arg(long)]
    pub bins: Option<usize>,
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, p) => *slot = p,
    }
}

/// Reads a JSON object from disk; a manifest contributes its `config` field.
pub fn read_config_value(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    let mut v: Value = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    if v.get("command").is_some() {
        if let Some(c) = v.get_mut("config") {
            v = c.take();
        }
    }
    if !v.is_object() {
        return Err(Error::InvalidConfig(format!("{}: expected a JSON object", path.display())));
    }
    Ok(v)
}

impl Config {
    pub fn resolve(o: &Overrides) -> Result<Self> {
        let mut value = serde_json::to_value(Config::default())?;
        if let Some(path) = &o.config {
            merge(&mut value, read_config_value(path)?);
        }
        let mut c: Config = serde_json::from_value(value).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if let Some(s) = o.seed {
            c.prelearn.seed = s;
            c.transfer.seed = s;
            c.baseline.seed = s;
        }
        if let Some(k) = o.kmax {
            c.prelearn.k_max = k;
            c.transfer.k_max = k;
            c.baseline.k_max = k;
        }
        if let Some(n) = o.population {
            c.prelearn.population = n;
            c.transfer.population = n;
            c.baseline.population = n;
        }
        if let Some(b) = o.bins {
            c.bins = b;
        }
        c.weights.validate()?;
        Ok(c)
    }

    pub fn transfer_options(&self) -> TransferOptions {
        TransferOptions { mode: self.mode, weights: self.weights, normalize: self.normalize }
    }
}

/// Record written next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: &'static str,
    pub config: Value,
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
    pub wall_clock_secs: f64,
}

impl RunManifest {
    pub fn new(command: &str, config: Value, seed: u64) -> Self {
        Self {
            command: command.into(),
            tool_version: env!("CARGO_PKG_VERSION"),
            config,
            inputs: BTreeMap::new(),
            outputs: vec![],
            seed,
            details: Value::Null,
            wall_clock_secs: 0.0,
        }
    }

    pub fn input(&mut self, key: &str, path: &Path) -> &mut Self {
        self.inputs.insert(key.into(), path.display().to_string());
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.display().to_string());
        self
    }

    pub fn write(&mut self, path: &Path, started: Instant) -> Result<()> {
        self.wall_clock_secs = started.elapsed().as_secs_f64();
        std::fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_defaults_file_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"prelearn": {"k_max": 50, "epsilon": 0.6}, "bins": 20}"#).unwrap();
        let o = Overrides { config: Some(path.clone()), kmax: Some(7), ..Default::default() };
        let c = Config::resolve(&o).unwrap();
        assert_eq!(c.prelearn.k_max, 7);
        assert_eq!(c.prelearn.epsilon, 0.6);
        assert_eq!(c.prelearn.alpha, 0.1);
        assert_eq!(c.bins, 20);
        assert_eq!(c.transfer.gamma, 0.1);

        std::fs::write(&path, r#"{"command": "prelearn", "config": {"bins": 30}}"#).unwrap();
        let c = Config::resolve(&Overrides { config: Some(path.clone()), ..Default::default() }).unwrap();
        assert_eq!(c.bins, 30);

        std::fs::write(&path, r#"{"bogus": 1}"#).unwrap();
        assert!(matches!(
            Config::resolve(&Overrides { config: Some(path), ..Default::default() }),
            Err(Error::InvalidConfig(_))
        ));
    }
}
