//! Multi-run statistics and CSV exports for convergence curves, box plots
//! and measured/estimated overlays.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, CompositeParams};
use crate::scenario::MeasurementSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Quantile of sorted data with linear interpolation between order
/// statistics at position `p * (n - 1)`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn five_number_summary(values: &[f64]) -> Result<FiveNumber> {
    if values.is_empty() || values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidInput("summary needs non-empty, NaN-free values".into()));
    }
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(FiveNumber {
        min: s[0],
        q1: quantile_sorted(&s, 0.25),
        median: quantile_sorted(&s, 0.5),
        q3: quantile_sorted(&s, 0.75),
        max: s[s.len() - 1],
    })
}

/// Best-so-far trace of one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub optimizer: String,
    pub seed: u64,
    pub trace: Vec<f64>,
}

impl RunRecord {
    pub fn final_fitness(&self) -> f64 {
        self.trace.last().copied().unwrap_or(f64::INFINITY)
    }
}

/// Long format: `optimizer,seed,iteration,best_fitness`.
pub fn write_results_csv<W: Write>(runs: &[RunRecord], mut w: W) -> Result<()> {
    writeln!(w, "optimizer,seed,iteration,best_fitness")?;
    for r in runs {
        for (k, f) in r.trace.iter().enumerate() {
            writeln!(w, "{},{},{},{}", r.optimizer, r.seed, k, f)?;
        }
    }
    Ok(())
}

pub fn read_results_csv<R: BufRead>(reader: R) -> Result<Vec<RunRecord>> {
    let mut runs: Vec<RunRecord> = Vec::new();
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(h))) if h.trim() == "optimizer,seed,iteration,best_fitness" => {}
        Some((_, Err(e))) => return Err(e.into()),
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: "expected header `optimizer,seed,iteration,best_fitness`".into(),
            })
        }
    }
    for (i, line) in lines {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::Parse { line: lineno, msg: msg.to_string() };
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(bad("expected 4 columns"));
        }
        let seed: u64 = cols[1].parse().map_err(|_| bad("invalid seed"))?;
        let iter: usize = cols[2].parse().map_err(|_| bad("invalid iteration"))?;
        let f: f64 = cols[3].parse().map_err(|_| bad("invalid fitness"))?;
        let same = runs.last().is_some_and(|r| r.optimizer == cols[0] && r.seed == seed);
        if !same {
            runs.push(RunRecord { optimizer: cols[0].to_string(), seed, trace: vec![] });
        }
        let run = runs.last_mut().expect("pushed above");
        if iter != run.trace.len() {
            return Err(bad("iterations must be consecutive from 0 within a run"));
        }
        run.trace.push(f);
    }
    Ok(runs)
}

fn group(runs: &[RunRecord]) -> BTreeMap<&str, Vec<&RunRecord>> {
    let mut m: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in runs {
        m.entry(r.optimizer.as_str()).or_default().push(r);
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub optimizer: String,
    pub runs: usize,
    #[serde(flatten)]
    pub stats: FiveNumber,
}

/// Five-number summary of final fitness per optimizer, sorted by name.
pub fn summarize(runs: &[RunRecord]) -> Result<Vec<SummaryRow>> {
    group(runs)
        .into_iter()
        .map(|(name, rs)| {
            let finals: Vec<f64> = rs.iter().map(|r| r.final_fitness()).collect();
            Ok(SummaryRow { optimizer: name.to_string(), runs: rs.len(), stats: five_number_summary(&finals)? })
        })
        .collect()
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], mut w: W) -> Result<()> {
    writeln!(w, "optimizer,runs,min,q1,median,q3,max")?;
    for r in rows {
        let s = r.stats;
        writeln!(w, "{},{},{},{},{},{},{}", r.optimizer, r.runs, s.min, s.q1, s.median, s.q3, s.max)?;
    }
    Ok(())
}

/// Per-iteration median, min and max of best-so-far fitness across runs.
/// Shorter runs are held at their final value.
pub fn write_convergence_csv<W: Write>(runs: &[RunRecord], mut w: W) -> Result<()> {
    writeln!(w, "optimizer,iteration,median,min,max")?;
    for (name, rs) in group(runs) {
        let len = rs.iter().map(|r| r.trace.len()).max().unwrap_or(0);
        for k in 0..len {
            let vals: Vec<f64> = rs
                .iter()
                .filter_map(|r| r.trace.get(k).or(r.trace.last()).copied())
                .collect();
            let s = five_number_summary(&vals)?;
            writeln!(w, "{name},{k},{},{},{}", s.median, s.min, s.max)?;
        }
    }
    Ok(())
}

/// Final fitness of every run, one row each, for box plots.
pub fn write_boxplot_csv<W: Write>(runs: &[RunRecord], mut w: W) -> Result<()> {
    writeln!(w, "optimizer,seed,final_fitness")?;
    for r in runs {
        writeln!(w, "{},{},{}", r.optimizer, r.seed, r.final_fitness())?;
    }
    Ok(())
}

/// Measured curves next to the response of `params` to the same voltage.
pub fn write_overlay_csv<W: Write>(series: &MeasurementSeries, params: &CompositeParams, mut w: W) -> Result<()> {
    series.validate()?;
    let sim = model::simulate(params, &series.v, series.v0, series.p0, series.q0, series.dt)?;
    writeln!(w, "t,v,p_meas,q_meas,p_est,q_est")?;
    for k in 0..series.len() {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            series.t[k], series.v[k], series.p[k], series.q[k], sim.p[k], sim.q[k]
        )?;
    }
    Ok(())
}
