use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use mixmc_core::diagnostics::AutocorrEstimate;
use mixmc_core::sampler::RunSummary;
use mixmc_core::{Init, ModelConfig, PriorConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::{Family, IngestArgs};

pub const METADATA: &str = "metadata.json";
pub const TRACE: &str = "trace.csv";
pub const K_POSTERIOR: &str = "k_posterior.csv";
pub const ASSIGNMENTS: &str = "assignments.csv";
pub const CONSENSUS: &str = "consensus.csv";
pub const COMPONENTS: &str = "components.csv";
pub const MAP_ASSIGNMENT: &str = "map_assignment.csv";
pub const LEVELS: &str = "levels.csv";
pub const FITTED_PMF: &str = "fitted_pmf.csv";
pub const DIAGNOSTICS: &str = "diagnostics.json";
pub const MI: &str = "mi.csv";
pub const SPECTRAL: &str = "spectral.csv";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataInfo {
    pub path: PathBuf,
    pub family: Family,
    pub n_obs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cardinalities: Option<Vec<u32>>,
    pub ingest: IngestArgs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSettings {
    pub burn_in_sweeps: usize,
    pub sample_sweeps: usize,
    pub thin: usize,
    pub seed: u64,
    pub chains: usize,
    pub general_eta: bool,
    pub init: Init,
    pub record_assignments: bool,
    pub consensus: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RngInfo {
    pub algorithm: String,
    pub stream_version: String,
    /// Stream id of each chain.
    pub streams: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TauReport {
    pub chain: usize,
    pub series: String,
    /// In sweeps.
    pub tau: f64,
    /// In retained samples.
    pub window: usize,
    pub constant: bool,
    pub short: bool,
    pub window_exhausted: bool,
}

impl TauReport {
    pub fn new(chain: usize, series: &str, est: AutocorrEstimate, thin: usize) -> Self {
        Self {
            chain,
            series: series.to_string(),
            tau: est.tau * thin as f64,
            window: est.window,
            constant: est.constant,
            short: est.short,
            window_exhausted: est.window_exhausted,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Estimators {
    pub k_posterior: String,
    pub map_state: String,
    pub autocorrelation: String,
    pub window_factor: f64,
    pub sweep: String,
}

impl Default for Estimators {
    fn default() -> Self {
        Self {
            k_posterior: "dwell-weighted histogram of retained k; ties resolved to the smallest k".into(),
            map_state: "highest log posterior among retained samples of all chains".into(),
            autocorrelation: "tau = 1 + 2 sum_{t=1}^{W} rho(t), W the smallest lag with W >= c tau(W)".into(),
            window_factor: mixmc_core::diagnostics::WINDOW_FACTOR,
            sweep: "N elementary steps".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainReport {
    pub chain: usize,
    pub map_k: usize,
    pub map_log_posterior: f64,
    pub summary: Option<RunSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub data: DataInfo,
    pub model: ModelConfig,
    pub prior: PriorConfig,
    pub run: RunSettings,
    pub rng: RngInfo,
    pub estimators: Estimators,
    pub map_k: usize,
    pub autocorrelation: Vec<TauReport>,
    pub chains: Vec<ChainReport>,
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))
}

pub fn csv_writer(path: &Path) -> CliResult<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::runtime(e.to_string()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_metadata(run: &Path) -> CliResult<Metadata> {
    let path = run.join(METADATA);
    let file = File::open(&path).map_err(|e| {
        CliError::data(format!("{} is not a fit directory ({}: {e})", run.display(), METADATA))
    })?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CliError::data(format!("malformed {}: {e}", path.display())))
}

pub fn csv_reader(path: &Path) -> CliResult<csv::Reader<BufReader<File>>> {
    let file = File::open(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    Ok(csv::Reader::from_reader(BufReader::new(file)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    pub chain: usize,
    pub sweep: usize,
    pub k: usize,
    pub log_likelihood: f64,
    pub log_posterior: f64,
    pub dwell: f64,
}

pub fn read_trace(run: &Path) -> CliResult<Vec<TraceRow>> {
    let mut rdr = csv_reader(&run.join(TRACE))?;
    rdr.deserialize().map(|r| r.map_err(CliError::from)).collect()
}

/// One retained assignment snapshot with 0-based labels.
pub struct Snapshot {
    pub dwell: f64,
    pub labels: Vec<u32>,
}

pub fn read_assignments(run: &Path, n_obs: usize) -> CliResult<Vec<Snapshot>> {
    let path = run.join(ASSIGNMENTS);
    if !path.exists() {
        return Err(CliError::data(format!(
            "{} has no {ASSIGNMENTS}; rerun fit with --record-assignments",
            run.display()
        )));
    }
    let mut rdr = csv_reader(&path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != n_obs + 3 {
            return Err(CliError::data(format!("{ASSIGNMENTS}: expected {} fields, got {}", n_obs + 3, rec.len())));
        }
        let parse_err = |f: &str| CliError::data(format!("{ASSIGNMENTS}: bad field {f:?}"));
        let dwell = rec[2].parse().map_err(|_| parse_err(&rec[2]))?;
        let labels = rec
            .iter()
            .skip(3)
            .map(|f| match f.parse::<u32>() {
                Ok(l) if l >= 1 => Ok(l - 1),
                _ => Err(parse_err(f)),
            })
            .collect::<CliResult<Vec<u32>>>()?;
        out.push(Snapshot { dwell, labels });
    }
    if out.is_empty() {
        return Err(CliError::data(format!("{ASSIGNMENTS} holds no samples")));
    }
    Ok(out)
}
