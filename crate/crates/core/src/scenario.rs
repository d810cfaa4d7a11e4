//! Voltage-sag waveforms, synthetic measurement series and the measurement
//! CSV format.
//!
//! The CSV format is a header `t,v,p,q` followed by one float quadruple per
//! row. The pre-disturbance operating point may be recorded in a leading
//! comment line `# v0=..,p0=..,q0=..`; without it the first row is taken as
//! the operating point.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, CompositeParams};

pub const DEFAULT_DURATION: f64 = 5.0;
pub const DEFAULT_DT: f64 = 0.01;
const SPACING_TOL: f64 = 1e-9;

/// Uniformly sampled voltage and power measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSeries {
    pub dt: f64,
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub v0: f64,
    pub p0: f64,
    pub q0: f64,
}

impl MeasurementSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.t.len();
        if n < 2 {
            return Err(Error::Validation(format!("series needs at least 2 samples, got {n}")));
        }
        if self.v.len() != n || self.p.len() != n || self.q.len() != n {
            return Err(Error::Validation("series columns differ in length".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Validation(format!("dt must be positive, got {}", self.dt)));
        }
        for (k, &t) in self.t.iter().enumerate() {
            if (t - k as f64 * self.dt).abs() > SPACING_TOL {
                return Err(Error::Validation(format!(
                    "non-uniform sampling: t[{k}] = {t}, expected {}",
                    k as f64 * self.dt
                )));
            }
        }
        if (self.v[0] - self.v0).abs() > SPACING_TOL {
            return Err(Error::Validation(format!(
                "first voltage sample {} differs from V_0 = {}",
                self.v[0], self.v0
            )));
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# v0={},p0={},q0={}", self.v0, self.p0, self.q0)?;
        writeln!(w, "t,v,p,q")?;
        for k in 0..self.len() {
            writeln!(w, "{},{},{},{}", self.t[k], self.v[k], self.p[k], self.q[k])?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut op: Option<[f64; 3]> = None;
        let mut header_seen = false;
        let (mut t, mut v, mut p, mut q) = (vec![], vec![], vec![], vec![]);
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if !header_seen {
                if let Some(comment) = line.strip_prefix('#') {
                    if op.is_none() {
                        op = parse_operating_point(comment, line_no)?;
                    }
                    continue;
                }
                let cols: Vec<&str> = line.split(',').map(str::trim).collect();
                if cols != ["t", "v", "p", "q"] {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected header `t,v,p,q`, found `{line}`"),
                    });
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected 4 fields, found {}", fields.len()),
                });
            }
            let mut vals = [0.0; 4];
            for (slot, f) in vals.iter_mut().zip(&fields) {
                *slot = f.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: line_no,
                    msg: format!("bad number `{}`: {e}", f.trim()),
                })?;
            }
            t.push(vals[0]);
            v.push(vals[1]);
            p.push(vals[2]);
            q.push(vals[3]);
        }
        if !header_seen {
            return Err(Error::Parse { line: 1, msg: "missing header `t,v,p,q`".into() });
        }
        if t.len() < 2 {
            return Err(Error::Validation(format!(
                "series needs at least 2 samples, got {}",
                t.len()
            )));
        }
        let [v0, p0, q0] = op.unwrap_or([v[0], p[0], q[0]]);
        let series = MeasurementSeries { dt: t[1] - t[0], t, v, p, q, v0, p0, q0 };
        series.validate()?;
        Ok(series)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(fs::File::open(path)?)
    }
}

fn parse_operating_point(comment: &str, line: usize) -> Result<Option<[f64; 3]>> {
    let mut vals = [None; 3];
    for part in comment.split(',') {
        let Some((key, value)) = part.split_once('=') else { continue };
        let slot = match key.trim() {
            "v0" => 0,
            "p0" => 1,
            "q0" => 2,
            _ => continue,
        };
        vals[slot] = Some(value.trim().parse::<f64>().map_err(|e| Error::Parse {
            line,
            msg: format!("bad operating point value `{}`: {e}", value.trim()),
        })?);
    }
    match vals {
        [Some(a), Some(b), Some(c)] => Ok(Some([a, b, c])),
        [None, None, None] => Ok(None),
        _ => Err(Error::Parse { line, msg: "operating point needs v0, p0 and q0".into() }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "shape")]
pub enum Recovery {
    Step,
    Exponential { tau: f64 },
}

/// Rectangular voltage dip with a configurable recovery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SagTemplate {
    /// Relative voltage drop during the fault.
    pub depth: f64,
    pub t_start: f64,
    pub t_fault: f64,
    pub recovery: Recovery,
}

impl SagTemplate {
    pub fn t_recover(&self) -> f64 {
        self.t_start + self.t_fault
    }

    /// Waveform preset for a fault-type code: 0 three-phase, 1 line to
    /// ground, 2 line to line.
    pub fn preset(fault_type: u8, t_start: f64) -> Result<Self> {
        let (depth, t_fault, recovery) = match fault_type {
            0 => (0.5, 0.15, Recovery::Step),
            1 => (0.3, 0.2, Recovery::Exponential { tau: 0.1 }),
            2 => (0.4, 0.1, Recovery::Step),
            other => {
                return Err(Error::InvalidTemplate(format!("unknown fault type {other}")))
            }
        };
        Ok(SagTemplate { depth, t_start, t_fault, recovery })
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.depth) {
            return Err(Error::InvalidTemplate(format!("depth must lie in [0, 1), got {}", self.depth)));
        }
        if !(self.t_start >= 0.0) || !(self.t_fault > 0.0) {
            return Err(Error::InvalidTemplate(format!(
                "need 0 <= t_start < t_start + t_fault (t_start {}, t_fault {})",
                self.t_start, self.t_fault
            )));
        }
        if let Recovery::Exponential { tau } = self.recovery {
            if !(tau > 0.0) {
                return Err(Error::InvalidTemplate(format!("recovery tau must be positive, got {tau}")));
            }
        }
        Ok(())
    }
}

/// Samples a sag waveform at `t_k = k*dt` for `k < round(duration/dt)`.
pub fn make_sag_voltage(sag: &SagTemplate, v0: f64, duration: f64, dt: f64) -> Result<Vec<f64>> {
    sag.validate()?;
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    if !(v0 > 0.0) {
        return Err(Error::InvalidInput(format!("V_0 must be positive, got {v0}")));
    }
    if duration + SPACING_TOL < sag.t_recover() {
        return Err(Error::InvalidTemplate(format!(
            "duration {duration} s is shorter than the sag window ending at {} s",
            sag.t_recover()
        )));
    }
    let n = (duration / dt).round() as usize;
    let k_start = (sag.t_start / dt).round() as usize;
    let k_end = (sag.t_recover() / dt).round() as usize;
    let low = v0 * (1.0 - sag.depth);
    Ok((0..n)
        .map(|k| {
            if k < k_start {
                v0
            } else if k < k_end {
                low
            } else {
                match sag.recovery {
                    Recovery::Step => v0,
                    Recovery::Exponential { tau } => {
                        let elapsed = (k - k_end) as f64 * dt;
                        v0 * (1.0 - sag.depth * (-elapsed / tau).exp())
                    }
                }
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub truth: CompositeParams,
    pub v0: f64,
    pub p0: f64,
    pub q0: f64,
    pub sag: SagTemplate,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        self.truth.validate()?;
        self.sag.validate()?;
        if !(self.noise_std >= 0.0) {
            return Err(Error::Validation(format!("noise_std must be >= 0, got {}", self.noise_std)));
        }
        Ok(())
    }
}

/// Simulates the truth parameters under the scenario's sag and adds seeded
/// Gaussian noise of standard deviation `noise_std` to P and Q.
pub fn synthesize_measurements(spec: &ScenarioSpec, duration: f64, dt: f64) -> Result<MeasurementSeries> {
    spec.validate()?;
    let v = make_sag_voltage(&spec.sag, spec.v0, duration, dt)?;
    if v.len() < 2 {
        return Err(Error::InvalidInput(format!("duration {duration} s yields fewer than 2 samples")));
    }
    let sim = model::simulate(&spec.truth, &v, spec.v0, spec.p0, spec.q0, dt)?;
    let (mut p, mut q) = (sim.p, sim.q);
    if spec.noise_std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let normal = Normal::new(0.0, spec.noise_std)
            .map_err(|e| Error::Validation(format!("noise distribution: {e}")))?;
        for (pk, qk) in p.iter_mut().zip(q.iter_mut()) {
            *pk += normal.sample(&mut rng);
            *qk += normal.sample(&mut rng);
        }
    }
    Ok(MeasurementSeries {
        dt,
        t: (0..v.len()).map(|k| k as f64 * dt).collect(),
        v,
        p,
        q,
        v0: spec.v0,
        p0: spec.p0,
        q0: spec.q0,
    })
}

#[derive(Deserialize)]
struct Catalog {
    operating_point: OperatingPoint,
    t_start: f64,
    scenarios: Vec<CatalogRow>,
}

#[derive(Deserialize)]
struct OperatingPoint {
    v0: f64,
    p0: f64,
    q0: f64,
}

#[derive(Deserialize)]
struct CatalogRow {
    name: String,
    r_s: f64,
    x_s: f64,
    x_m: f64,
    x_r: f64,
    k_pm: f64,
    r_r: f64,
    a_p: f64,
    a_q: f64,
    b_p: f64,
    b_q: f64,
    h: f64,
    a: f64,
    b: f64,
    fault_type: u8,
}

const CATALOG_JSON: &str = include_str!("../data/scenarios.json");

/// The five reference scenarios S1..S5 (noise-free).
pub fn builtin_scenarios() -> Vec<ScenarioSpec> {
    let cat: Catalog = serde_json::from_str(CATALOG_JSON).expect("embedded catalog is valid JSON");
    cat.scenarios
        .into_iter()
        .enumerate()
        .map(|(i, r)| ScenarioSpec {
            truth: CompositeParams::from_vector(&[
                r.r_s, r.x_s, r.x_m, r.x_r, r.k_pm, r.r_r, r.a_p, r.a_q, r.b_p, r.b_q, r.h, r.a, r.b,
            ]),
            v0: cat.operating_point.v0,
            p0: cat.operating_point.p0,
            q0: cat.operating_point.q0,
            sag: SagTemplate::preset(r.fault_type, cat.t_start).expect("catalog fault types are known"),
            noise_std: 0.0,
            seed: i as u64 + 1,
            name: r.name,
        })
        .collect()
}

pub fn builtin_scenario(name: &str) -> Option<ScenarioSpec> {
    builtin_scenarios().into_iter().find(|s| s.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_sag() -> SagTemplate {
        SagTemplate { depth: 0.3, t_start: 1.0, t_fault: 0.2, recovery: Recovery::Step }
    }

    #[test]
    fn zero_depth_is_flat() {
        let sag = SagTemplate { depth: 0.0, ..step_sag() };
        let v = make_sag_voltage(&sag, 1.02, 5.0, 0.01).unwrap();
        assert_eq!(v.len(), 500);
        assert!(v.iter().all(|&x| x == 1.02));
    }

    #[test]
    fn step_sag_indexing() {
        let v = make_sag_voltage(&step_sag(), 1.0, 5.0, 0.01).unwrap();
        assert_eq!(v[99], 1.0);
        assert!(v[100..120].iter().all(|&x| x == 0.7));
        assert_eq!(v[120], 1.0);
    }

    #[test]
    fn exponential_recovery_after_one_tau() {
        let sag = SagTemplate { recovery: Recovery::Exponential { tau: 0.1 }, ..step_sag() };
        let v = make_sag_voltage(&sag, 1.0, 5.0, 0.01).unwrap();
        // t_recover + tau = 1.3 s is sample 130.
        assert!(((v[130] - 1.0).abs() - 0.3 / std::f64::consts::E).abs() < 1e-9);
        assert!(v.iter().all(|&x| x > 0.0 && x <= 1.0));
    }

    #[test]
    fn window_longer_than_duration_rejected() {
        assert!(matches!(
            make_sag_voltage(&step_sag(), 1.0, 1.1, 0.01),
            Err(Error::InvalidTemplate(_))
        ));
        let bad = SagTemplate { t_fault: -0.1, ..step_sag() };
        assert!(make_sag_voltage(&bad, 1.0, 5.0, 0.01).is_err());
    }

    #[test]
    fn catalog_has_five_rows() {
        let all = builtin_scenarios();
        assert_eq!(all.len(), 5);
        let s4 = builtin_scenario("s4").unwrap();
        assert_eq!(s4.truth.im.r_r, 0.021);
        assert_eq!(s4.sag, SagTemplate::preset(0, 1.0).unwrap());
        for s in &all {
            s.validate().unwrap();
        }
    }

    #[test]
    fn csv_fixture_parses() {
        let text = "t,v,p,q\n0,1,1,0.5\n0.01,0.9,0.95,0.45\n0.02,1,1,0.5\n";
        let s = MeasurementSeries::read_csv(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.dt, 0.01);
        assert_eq!((s.v0, s.p0, s.q0), (1.0, 1.0, 0.5));
    }

    #[test]
    fn csv_format_errors() {
        let reordered = "t,p,v,q\n0,1,1,0.5\n0.01,1,1,0.5\n";
        assert!(matches!(
            MeasurementSeries::read_csv(reordered.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        let bad_row = "t,v,p,q\n0,1,1,0.5\n0.01,1,x,0.5\n";
        assert!(matches!(
            MeasurementSeries::read_csv(bad_row.as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
        let short_row = "t,v,p,q\n0,1,1,0.5\n0.01,1,1\n";
        assert!(matches!(
            MeasurementSeries::read_csv(short_row.as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
        let uneven = "t,v,p,q\n0,1,1,0.5\n0.01,1,1,0.5\n0.03,1,1,0.5\n";
        assert!(matches!(
            MeasurementSeries::read_csv(uneven.as_bytes()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn noisy_series_roundtrips_through_csv() {
        let mut spec = builtin_scenario("S2").unwrap();
        spec.noise_std = 0.01;
        let s = synthesize_measurements(&spec, 2.0, 0.01).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = MeasurementSeries::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn same_seed_same_series() {
        let mut spec = builtin_scenario("S1").unwrap();
        spec.noise_std = 0.02;
        let a = synthesize_measurements(&spec, 5.0, 0.01).unwrap();
        let b = synthesize_measurements(&spec, 5.0, 0.01).unwrap();
        assert_eq!(a, b);
        spec.seed += 1;
        let c = synthesize_measurements(&spec, 5.0, 0.01).unwrap();
        assert_ne!(a.p, c.p);
    }
}
