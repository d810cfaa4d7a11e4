//! Task similarity from discrete Fréchet distances between measurement
//! curves, knowledge warm-starting from solved source tasks, and the
//! on-disk task library.
//!
//! Library layout, one directory per task:
//!
//! ```text
//! <library>/<task>/meta.json        name, grid, config, best parameters
//! <library>/<task>/signature.csv    measurement series (t,v,p,q)
//! <library>/<task>/knowledge.json   shape header of knowledge.bin
//! <library>/<task>/knowledge.bin    little-endian f64, variable-major, row-major
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::itq::{self, ItqConfig, KnowledgeMatrixSet};
use crate::result::OptimizationRunResult;
use crate::scenario::MeasurementSeries;
use crate::space::{self, DiscretizationGrid};

pub type Point = [f64; 2];

fn dist(a: &Point, b: &Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Discrete Fréchet distance: the minimum over monotone couplings of the
/// largest coupled point distance, by the usual O(|a|·|b|) recurrence.
pub fn discrete_frechet(a: &[Point], b: &[Point]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("Fréchet distance needs non-empty curves".into()));
    }
    let m = b.len();
    let mut prev = vec![0.0_f64; m];
    let mut cur = vec![0.0_f64; m];
    for (i, pa) in a.iter().enumerate() {
        for (j, pb) in b.iter().enumerate() {
            let d = dist(pa, pb);
            cur[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => cur[j - 1].max(d),
                (_, 0) => prev[0].max(d),
                _ => prev[j].min(prev[j - 1]).min(cur[j - 1]).max(d),
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// Largest distance between any point of `a` and any point of `b`.
pub fn max_pair_distance(a: &[Point], b: &[Point]) -> f64 {
    a.iter()
        .flat_map(|pa| b.iter().map(move |pb| dist(pa, pb)))
        .fold(0.0, f64::max)
}

/// `1 - frechet / max_pair_distance`, clamped to `[0, 1]`; 1 when both
/// curves collapse onto the same single point.
pub fn curve_similarity(a: &[Point], b: &[Point]) -> Result<f64> {
    let num = discrete_frechet(a, b)?;
    let den = max_pair_distance(a, b);
    if den == 0.0 {
        return Ok(1.0);
    }
    Ok((1.0 - num / den).clamp(0.0, 1.0))
}

/// Voltage, active and reactive power curves over time normalized to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSignature {
    pub voltage: Vec<Point>,
    pub active: Vec<Point>,
    pub reactive: Vec<Point>,
}

impl TaskSignature {
    pub fn from_series(series: &MeasurementSeries) -> Result<Self> {
        series.validate()?;
        let span = series.t[series.len() - 1] - series.t[0];
        let tn: Vec<f64> = series.t.iter().map(|t| (t - series.t[0]) / span).collect();
        let curve = |y: &[f64]| tn.iter().zip(y).map(|(&t, &v)| [t, v]).collect::<Vec<_>>();
        Ok(Self { voltage: curve(&series.v), active: curve(&series.p), reactive: curve(&series.q) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

impl Default for SimilarityWeights {
    fn default() -> Self {
        Self { w1: 1.0 / 3.0, w2: 1.0 / 3.0, w3: 1.0 / 3.0 }
    }
}

impl SimilarityWeights {
    pub fn validate(&self) -> Result<()> {
        let w = [self.w1, self.w2, self.w3];
        if w.iter().any(|x| !(*x >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "similarity weights must be non-negative and sum to 1, got {w:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub su: f64,
    pub sp: f64,
    pub sq: f64,
    pub r: f64,
}

pub fn combine_similarity(su: f64, sp: f64, sq: f64, w: &SimilarityWeights) -> f64 {
    w.w1 * su + w.w2 * sp + w.w3 * sq
}

pub fn task_similarity(a: &TaskSignature, b: &TaskSignature, w: &SimilarityWeights) -> Result<Similarity> {
    w.validate()?;
    let su = curve_similarity(&a.voltage, &b.voltage)?;
    let sp = curve_similarity(&a.active, &b.active)?;
    let sq = curve_similarity(&a.reactive, &b.reactive)?;
    Ok(Similarity { su, sp, sq, r: combine_similarity(su, sp, sq, w) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TransferMode {
    /// Similarity-weighted sum of all source matrices.
    #[default]
    WeightedSum,
    /// Copy of the most similar source's matrices.
    BestSource,
}

/// A solved identification task kept for transfer.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceTaskRecord {
    pub name: String,
    pub signature: MeasurementSeries,
    pub knowledge: KnowledgeMatrixSet,
    pub best_params: Vec<f64>,
    pub best_fitness: f64,
    pub grid: DiscretizationGrid,
    pub config: ItqConfig,
}

impl SourceTaskRecord {
    pub fn from_run(
        name: &str,
        series: &MeasurementSeries,
        grid: &DiscretizationGrid,
        config: &ItqConfig,
        run: &OptimizationRunResult,
    ) -> Result<Self> {
        let knowledge = run
            .knowledge
            .clone()
            .ok_or_else(|| Error::InvalidInput("run carries no knowledge matrices".into()))?;
        Ok(Self {
            name: name.to_string(),
            signature: series.clone(),
            knowledge,
            best_params: run.best_position.clone(),
            best_fitness: run.best_fitness,
            grid: grid.clone(),
            config: *config,
        })
    }
}

/// Initial knowledge for a new task from source tasks and their
/// similarities `r_h`. With `normalize`, weights are divided by their sum.
pub fn transfer_init(
    sources: &[SourceTaskRecord],
    similarities: &[f64],
    mode: TransferMode,
    normalize: bool,
) -> Result<KnowledgeMatrixSet> {
    let first = sources.first().ok_or(Error::EmptyLibrary)?;
    if similarities.len() != sources.len() {
        return Err(Error::InvalidInput(format!(
            "{} similarities for {} sources",
            similarities.len(),
            sources.len()
        )));
    }
    for s in sources {
        if s.grid != first.grid || !s.knowledge.matches(&first.grid) {
            return Err(Error::IncompatibleLibrary(format!(
                "task `{}` uses a different grid than `{}`",
                s.name, first.name
            )));
        }
    }
    match mode {
        TransferMode::BestSource => {
            let mut best = 0;
            for (h, r) in similarities.iter().enumerate() {
                if *r > similarities[best] {
                    best = h;
                }
            }
            Ok(sources[best].knowledge.clone())
        }
        TransferMode::WeightedSum => {
            let total: f64 = similarities.iter().sum();
            let mut q = KnowledgeMatrixSet::for_grid(&first.grid);
            for (s, &r) in sources.iter().zip(similarities) {
                let w = if normalize { if total > 0.0 { r / total } else { 0.0 } } else { r };
                q.add_scaled(&s.knowledge, w);
            }
            Ok(q)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferOptions {
    pub mode: TransferMode,
    pub weights: SimilarityWeights,
    pub normalize: bool,
}

impl Default for TransferOptions {
    fn default() -> Self {
        Self { mode: TransferMode::WeightedSum, weights: SimilarityWeights::default(), normalize: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityRow {
    pub source: String,
    #[serde(flatten)]
    pub similarity: Similarity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferOutcome {
    pub result: OptimizationRunResult,
    pub similarities: Vec<SimilarityRow>,
    /// Sources whose knowledge entered the initial matrices.
    pub contributors: Vec<String>,
}

/// Similarity of the new series to every source task.
pub fn similarity_report(
    series: &MeasurementSeries,
    library: &[SourceTaskRecord],
    weights: &SimilarityWeights,
) -> Result<Vec<SimilarityRow>> {
    let sig = TaskSignature::from_series(series)?;
    library
        .iter()
        .map(|s| {
            let other = TaskSignature::from_series(&s.signature)?;
            Ok(SimilarityRow { source: s.name.clone(), similarity: task_similarity(&other, &sig, weights)? })
        })
        .collect()
}

/// Identifies a new task starting from knowledge transferred out of the
/// library.
pub fn run_transfer_identify(
    series: &MeasurementSeries,
    library: &[SourceTaskRecord],
    grid: &DiscretizationGrid,
    config: &ItqConfig,
    options: &TransferOptions,
) -> Result<TransferOutcome> {
    if library.is_empty() {
        return Err(Error::EmptyLibrary);
    }
    let similarities = similarity_report(series, library, &options.weights)?;
    let r: Vec<f64> = similarities.iter().map(|s| s.similarity.r).collect();
    let init = transfer_init(library, &r, options.mode, options.normalize)?;
    if !init.matches(grid) {
        return Err(Error::IncompatibleLibrary(format!(
            "library knowledge is {}x{}, grid has {} variables with {} bins",
            init.variables(),
            init.bins(),
            grid.variables(),
            grid.bins
        )));
    }
    let contributors = match options.mode {
        TransferMode::BestSource => {
            let mut best = 0;
            for (h, v) in r.iter().enumerate() {
                if *v > r[best] {
                    best = h;
                }
            }
            vec![library[best].name.clone()]
        }
        TransferMode::WeightedSum => library
            .iter()
            .zip(&r)
            .filter(|(_, &v)| v > 0.0)
            .map(|(s, _)| s.name.clone())
            .collect(),
    };
    series.validate()?;
    let objective = |x: &[f64]| space::fitness_of_vector(x, series);
    let mut result = itq::run_itq_with(&objective, grid, config, init)?;
    result.algorithm = "itq-transfer".into();
    Ok(TransferOutcome { result, similarities, contributors })
}

pub fn write_similarity_csv<W: Write>(rows: &[SimilarityRow], mut w: W) -> Result<()> {
    writeln!(w, "source,su,sp,sq,r")?;
    for row in rows {
        let s = &row.similarity;
        writeln!(w, "{},{},{},{},{}", row.source, s.su, s.sp, s.sq, s.r)?;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct TaskMeta {
    name: String,
    grid: DiscretizationGrid,
    config: ItqConfig,
    best_params: Vec<f64>,
    best_fitness: f64,
    signature_file: String,
    knowledge_header: String,
    knowledge_file: String,
}

#[derive(Serialize, Deserialize)]
struct KnowledgeHeader {
    variables: usize,
    rows: usize,
    cols: usize,
    dtype: String,
    layout: String,
}

const META: &str = "meta.json";
const SIGNATURE: &str = "signature.csv";
const KNOWLEDGE_HEADER: &str = "knowledge.json";
const KNOWLEDGE_BIN: &str = "knowledge.bin";

fn check_task_name(name: &str) -> Result<()> {
    if name.is_empty()
        || name.starts_with('.')
        || !name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
    {
        return Err(Error::InvalidInput(format!(
            "task name `{name}` must be non-empty ASCII letters, digits, `-`, `_` or `.`"
        )));
    }
    Ok(())
}

/// Writes a task into `library/<name>` via a temporary directory and a
/// rename. An existing task is replaced only with `force`.
pub fn save_task(library: &Path, record: &SourceTaskRecord, force: bool) -> Result<PathBuf> {
    check_task_name(&record.name)?;
    fs::create_dir_all(library)?;
    let target = library.join(&record.name);
    if target.exists() && !force {
        return Err(Error::TaskExists(record.name.clone()));
    }
    let tmp = library.join(format!(".tmp-{}-{}", record.name, std::process::id()));
    if tmp.exists() {
        fs::remove_dir_all(&tmp)?;
    }
    fs::create_dir(&tmp)?;

    let meta = TaskMeta {
        name: record.name.clone(),
        grid: record.grid.clone(),
        config: record.config,
        best_params: record.best_params.clone(),
        best_fitness: record.best_fitness,
        signature_file: SIGNATURE.into(),
        knowledge_header: KNOWLEDGE_HEADER.into(),
        knowledge_file: KNOWLEDGE_BIN.into(),
    };
    fs::write(tmp.join(META), serde_json::to_vec_pretty(&meta)?)?;
    record.signature.save(&tmp.join(SIGNATURE))?;
    let header = KnowledgeHeader {
        variables: record.knowledge.variables(),
        rows: record.knowledge.bins(),
        cols: record.knowledge.bins(),
        dtype: "f64-le".into(),
        layout: "variable-major, row-major (state, action)".into(),
    };
    fs::write(tmp.join(KNOWLEDGE_HEADER), serde_json::to_vec_pretty(&header)?)?;
    let mut bin = Vec::with_capacity(record.knowledge.as_slice().len() * 8);
    for v in record.knowledge.as_slice() {
        bin.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(tmp.join(KNOWLEDGE_BIN), bin)?;

    if target.exists() {
        fs::remove_dir_all(&target)?;
    }
    fs::rename(&tmp, &target)?;
    Ok(target)
}

pub fn load_task(dir: &Path) -> Result<SourceTaskRecord> {
    let meta: TaskMeta = serde_json::from_slice(&fs::read(dir.join(META))?)?;
    let header: KnowledgeHeader = serde_json::from_slice(&fs::read(dir.join(&meta.knowledge_header))?)?;
    if header.rows != header.cols || header.dtype != "f64-le" {
        return Err(Error::IncompatibleLibrary(format!(
            "task `{}`: unsupported knowledge layout {}x{} {}",
            meta.name, header.rows, header.cols, header.dtype
        )));
    }
    let bytes = fs::read(dir.join(&meta.knowledge_file))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::IncompatibleLibrary(format!("task `{}`: truncated knowledge file", meta.name)));
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let knowledge = KnowledgeMatrixSet::from_raw(header.variables, header.rows, data)?;
    if !knowledge.matches(&meta.grid) {
        return Err(Error::IncompatibleLibrary(format!(
            "task `{}`: knowledge shape does not match its grid",
            meta.name
        )));
    }
    Ok(SourceTaskRecord {
        signature: MeasurementSeries::load(&dir.join(&meta.signature_file))?,
        name: meta.name,
        knowledge,
        best_params: meta.best_params,
        best_fitness: meta.best_fitness,
        grid: meta.grid,
        config: meta.config,
    })
}

/// Loads every task of a library, ordered by directory name. A missing
/// library directory is an empty library.
pub fn load_library(library: &Path) -> Result<Vec<SourceTaskRecord>> {
    if !library.exists() {
        return Ok(vec![]);
    }
    let mut dirs: Vec<PathBuf> = fs::read_dir(library)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir() && p.join(META).exists())
        .filter(|p| !p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with('.')))
        .collect();
    dirs.sort();
    dirs.iter().map(|d| load_task(d)).collect()
}
