//! Browser bindings: simulate a built-in scenario under an adjustable sag,
//! compare two scenarios' curves, and run a short identification.

use itq_load::itq::{run_prelearn, ItqConfig};
use itq_load::model::{self, PARAM_NAMES};
use itq_load::scenario::{builtin_scenario, make_sag_voltage, Recovery, SagTemplate, ScenarioSpec};
use itq_load::space::build_grid;
use itq_load::transfer::{task_similarity, SimilarityWeights, TaskSignature};
use itq_load::{Error, MeasurementSeries, Result};
use wasm_bindgen::prelude::*;

const DURATION: f64 = 5.0;
const DT: f64 = 0.01;
/// Upper bound on identification iterations so the page stays responsive.
const MAX_ITERATIONS: usize = 300;

fn scenario(name: &str) -> Result<ScenarioSpec> {
    builtin_scenario(name).ok_or_else(|| Error::InvalidInput(format!("unknown scenario `{name}` (use S1..S5)")))
}

fn sag(depth: f64, t_fault: f64, exponential_tau: f64) -> SagTemplate {
    let recovery = if exponential_tau > 0.0 { Recovery::Exponential { tau: exponential_tau } } else { Recovery::Step };
    SagTemplate { depth, t_start: 1.0, t_fault, recovery }
}

/// Sampled time, voltage, active and reactive power.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Curves {
    series: MeasurementSeries,
}

#[wasm_bindgen]
impl Curves {
    pub fn t(&self) -> Vec<f64> {
        self.series.t.clone()
    }
    pub fn v(&self) -> Vec<f64> {
        self.series.v.clone()
    }
    pub fn p(&self) -> Vec<f64> {
        self.series.p.clone()
    }
    pub fn q(&self) -> Vec<f64> {
        self.series.q.clone()
    }
}

pub fn simulate_curves(name: &str, depth: f64, t_fault: f64, tau: f64) -> Result<Curves> {
    let spec = scenario(name)?;
    let sag = sag(depth, t_fault, tau);
    sag.validate()?;
    let v = make_sag_voltage(&sag, spec.v0, DURATION, DT)?;
    let out = model::simulate(&spec.truth, &v, spec.v0, spec.p0, spec.q0, DT)?;
    let t = (0..v.len()).map(|k| k as f64 * DT).collect();
    Ok(Curves {
        series: MeasurementSeries { dt: DT, t, v, p: out.p, q: out.q, v0: spec.v0, p0: spec.p0, q0: spec.q0 },
    })
}

/// `[SU, SP, SQ, r]` between two built-in scenarios under their preset sags.
pub fn similarity_values(a: &str, b: &str) -> Result<Vec<f64>> {
    let sig = |n: &str| -> Result<TaskSignature> {
        let s = scenario(n)?;
        TaskSignature::from_series(&itq_load::scenario::synthesize_measurements(&s, DURATION, DT)?)
    };
    let s = task_similarity(&sig(a)?, &sig(b)?, &SimilarityWeights::default())?;
    Ok(vec![s.su, s.sp, s.sq, s.r])
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Identification {
    trace: Vec<f64>,
    params: Vec<f64>,
    estimate: MeasurementSeries,
    measured: MeasurementSeries,
}

#[wasm_bindgen]
impl Identification {
    /// Best-so-far fitness per iteration.
    pub fn trace(&self) -> Vec<f64> {
        self.trace.clone()
    }
    pub fn params(&self) -> Vec<f64> {
        self.params.clone()
    }
    pub fn param_names(&self) -> Vec<String> {
        PARAM_NAMES.iter().map(|s| s.to_string()).collect()
    }
    pub fn best_fitness(&self) -> f64 {
        self.trace.last().copied().unwrap_or(f64::INFINITY)
    }
    pub fn measured(&self) -> Curves {
        Curves { series: self.measured.clone() }
    }
    pub fn estimated(&self) -> Curves {
        Curves { series: self.estimate.clone() }
    }
}

pub fn identify_scenario(name: &str, iterations: usize, seed: u64) -> Result<Identification> {
    let spec = scenario(name)?;
    let measured = itq_load::scenario::synthesize_measurements(&spec, DURATION, DT)?;
    let grid = build_grid(itq_load::space::DEFAULT_BINS)?;
    let config = ItqConfig { k_max: iterations.min(MAX_ITERATIONS), seed, ..ItqConfig::prelearning() };
    let run = run_prelearn(&measured, &grid, &config)?;
    let theta = run.best_params()?;
    let est = model::simulate(&theta, &measured.v, measured.v0, measured.p0, measured.q0, measured.dt)?;
    let estimate = MeasurementSeries { p: est.p, q: est.q, ..measured.clone() };
    Ok(Identification { trace: run.trace, params: run.best_position, estimate, measured })
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Response of a built-in scenario's true load to a sag starting at 1 s.
/// `tau <= 0` selects a step recovery.
#[wasm_bindgen]
pub fn simulate(name: &str, depth: f64, t_fault: f64, tau: f64) -> std::result::Result<Curves, JsError> {
    simulate_curves(name, depth, t_fault, tau).map_err(js)
}

#[wasm_bindgen]
pub fn similarity(a: &str, b: &str) -> std::result::Result<Vec<f64>, JsError> {
    similarity_values(a, b).map_err(js)
}

/// Cold-start identification of a built-in scenario, capped at 300 iterations.
#[wasm_bindgen]
pub fn identify(name: &str, iterations: usize, seed: u64) -> std::result::Result<Identification, JsError> {
    identify_scenario(name, iterations, seed).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simulated_curves_have_matching_lengths() {
        let c = simulate_curves("S1", 0.3, 0.2, 0.0).unwrap();
        assert_eq!(c.t().len(), 500);
        assert_eq!(c.p().len(), 500);
        assert!((c.p()[0] - 1.0).abs() < 1e-9);
        assert!(c.v()[100] < 1.0);
        assert!(simulate_curves("S7", 0.3, 0.2, 0.0).is_err());
        assert!(simulate_curves("S1", 1.2, 0.2, 0.0).is_err());
    }

    #[test]
    fn self_similarity_is_one() {
        let s = similarity_values("S2", "s2").unwrap();
        assert_eq!(s, vec![1.0, 1.0, 1.0, 1.0]);
        let s = similarity_values("S1", "S3").unwrap();
        assert!(s.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn short_identification_improves() {
        let r = identify_scenario("S3", 5, 1).unwrap();
        assert_eq!(r.trace().len(), 6);
        assert!(r.best_fitness() <= r.trace()[0]);
        assert_eq!(r.params().len(), 13);
        assert_eq!(r.estimated().p().len(), r.measured().p().len());
    }
}
