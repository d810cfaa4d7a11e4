//! Parameter ranges, their uniform discretization into per-variable action
//! sets, and the mean-squared power mismatch used as fitness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, CompositeParams, PARAM_COUNT, PARAM_NAMES};
use crate::scenario::MeasurementSeries;

/// Fitness assigned when the forward model cannot be initialized or
/// diverges.
pub const PENALTY: f64 = 1e6;

/// Default number of grid points per variable.
pub const DEFAULT_BINS: usize = 100;

const RANGE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRange {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

/// Identification intervals, in [`PARAM_NAMES`] order.
pub const DEFAULT_RANGES: [(f64, f64); PARAM_COUNT] = [
    (0.02, 0.2), // r_s
    (0.1, 0.2),  // x_s
    (2.0, 3.8),  // x_m
    (0.5, 1.5),  // x_r
    (0.2, 0.9),  // k_pm
    (0.01, 0.1), // r_r
    (0.1, 0.9),  // a_p
    (0.1, 0.9),  // a_q
    (0.1, 0.9),  // b_p
    (0.1, 0.9),  // b_q
    (0.5, 2.0),  // h
    (0.2, 1.0),  // a
    (0.0, 1.0),  // b
];

/// Box bounds for continuous optimizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidConfig("bounds need matching, non-empty lo/hi".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(Error::InvalidConfig("every lower bound must be below its upper bound".into()));
        }
        Ok(Bounds { lo, hi })
    }

    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    /// The identification intervals of the composite load parameters.
    pub fn load_model() -> Self {
        Bounds {
            lo: DEFAULT_RANGES.iter().map(|r| r.0).collect(),
            hi: DEFAULT_RANGES.iter().map(|r| r.1).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for ((xi, lo), hi) in x.iter_mut().zip(&self.lo).zip(&self.hi) {
            *xi = xi.clamp(*lo, *hi);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.lo).zip(&self.hi).all(|((v, l), h)| *v >= *l && *v <= *h)
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationGrid {
    pub ranges: Vec<ParameterRange>,
    pub bins: usize,
}

/// Indices into each variable's action set, one per parameter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActionChain(pub Vec<usize>);

impl ActionChain {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }
}

pub fn build_grid(bins: usize) -> Result<DiscretizationGrid> {
    if bins < 2 {
        return Err(Error::InvalidConfig(format!("bins must be at least 2, got {bins}")));
    }
    Ok(DiscretizationGrid {
        ranges: PARAM_NAMES
            .iter()
            .zip(DEFAULT_RANGES)
            .map(|(name, (lo, hi))| ParameterRange { name: name.to_string(), lo, hi })
            .collect(),
        bins,
    })
}

impl DiscretizationGrid {
    pub fn variables(&self) -> usize {
        self.ranges.len()
    }

    pub fn step(&self, var: usize) -> f64 {
        let r = &self.ranges[var];
        (r.hi - r.lo) / (self.bins - 1) as f64
    }

    pub fn point(&self, var: usize, index: usize) -> f64 {
        let r = &self.ranges[var];
        if index == self.bins - 1 {
            r.hi
        } else {
            r.lo + index as f64 * self.step(var)
        }
    }

    pub fn bounds(&self) -> Bounds {
        Bounds {
            lo: self.ranges.iter().map(|r| r.lo).collect(),
            hi: self.ranges.iter().map(|r| r.hi).collect(),
        }
    }

    pub fn validate_chain(&self, chain: &ActionChain) -> Result<()> {
        if chain.0.len() != self.variables() {
            return Err(Error::InvalidChain(format!(
                "chain has {} entries, grid has {} variables",
                chain.0.len(),
                self.variables()
            )));
        }
        if let Some((i, &a)) = chain.0.iter().enumerate().find(|(_, &a)| a >= self.bins) {
            return Err(Error::InvalidChain(format!(
                "index {a} of variable {} exceeds {} bins",
                self.ranges[i].name, self.bins
            )));
        }
        Ok(())
    }

    /// Grid values of a chain, in variable order.
    pub fn values(&self, chain: &ActionChain) -> Result<Vec<f64>> {
        self.validate_chain(chain)?;
        Ok(chain.0.iter().enumerate().map(|(i, &a)| self.point(i, a)).collect())
    }

    pub fn decode(&self, chain: &ActionChain) -> Result<CompositeParams> {
        CompositeParams::from_slice(&self.values(chain)?)
    }

    /// Nearest grid index per variable; an exact midpoint rounds down.
    pub fn encode_values(&self, values: &[f64]) -> Result<ActionChain> {
        if values.len() != self.variables() {
            return Err(Error::InvalidInput(format!(
                "expected {} values, got {}",
                self.variables(),
                values.len()
            )));
        }
        let mut out = Vec::with_capacity(values.len());
        for (i, &x) in values.iter().enumerate() {
            let r = &self.ranges[i];
            if !(x >= r.lo - RANGE_SLACK && x <= r.hi + RANGE_SLACK) {
                return Err(Error::OutOfRange(format!(
                    "{} = {x} outside [{}, {}]",
                    r.name, r.lo, r.hi
                )));
            }
            let pos = (x.clamp(r.lo, r.hi) - r.lo) / self.step(i);
            let below = pos.floor();
            let idx = if pos - below > 0.5 { below + 1.0 } else { below };
            out.push((idx as usize).min(self.bins - 1));
        }
        Ok(ActionChain(out))
    }

    pub fn encode(&self, params: &CompositeParams) -> Result<ActionChain> {
        self.encode_values(&params.to_vector())
    }
}

/// Result of a fitness evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fitness {
    pub value: f64,
    /// Set when the model failed and `value` is [`PENALTY`].
    pub penalized: bool,
}

/// Mean over samples of the squared P and Q mismatch between the model
/// driven by the measured voltage and the measured powers.
pub fn fitness(params: &CompositeParams, series: &MeasurementSeries) -> Fitness {
    let mut sum = 0.0;
    let res = model::simulate_with(
        params,
        &series.v,
        series.v0,
        series.p0,
        series.q0,
        series.dt,
        |k, p, q| {
            let dp = p - series.p[k];
            let dq = q - series.q[k];
            sum += dp * dp + dq * dq;
        },
    );
    match res {
        Ok(()) if sum.is_finite() => Fitness { value: sum / series.len() as f64, penalized: false },
        _ => Fitness { value: PENALTY, penalized: true },
    }
}

/// Residual vector `[P_θ - P, Q_θ - Q] / sqrt(L)`, whose squared norm equals
/// the fitness. `None` when the model fails.
pub fn residuals(params: &CompositeParams, series: &MeasurementSeries) -> Option<Vec<f64>> {
    let n = series.len();
    let scale = 1.0 / (n as f64).sqrt();
    let mut r = vec![0.0; 2 * n];
    model::simulate_with(params, &series.v, series.v0, series.p0, series.q0, series.dt, |k, p, q| {
        r[k] = (p - series.p[k]) * scale;
        r[n + k] = (q - series.q[k]) * scale;
    })
    .ok()?;
    r.iter().all(|x| x.is_finite()).then_some(r)
}

/// Fitness of a raw parameter vector in [`PARAM_NAMES`] order.
pub fn fitness_of_vector(x: &[f64], series: &MeasurementSeries) -> f64 {
    match CompositeParams::from_slice(x) {
        Ok(p) => fitness(&p, series).value,
        Err(_) => PENALTY,
    }
}
