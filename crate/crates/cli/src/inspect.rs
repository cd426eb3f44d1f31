use std::path::{Path, PathBuf};

use clap::Args;
use mixmc_core::diagnostics::{
    integrated_autocorrelation, spectral_consensus, ConsensusAccumulator, ConsensusMatrix, KPosterior,
    MutualInfoAccumulator,
};
use mixmc_core::Dataset;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::fit::{load_data, write_consensus};
use crate::output::*;
use crate::Family;

#[derive(Serialize)]
struct Diagnostics {
    n_samples: usize,
    map_k: usize,
    k_posterior: Vec<(usize, f64)>,
    autocorrelation: Vec<TauReport>,
}

pub fn diagnose(run: &Path) -> CliResult<()> {
    let meta = read_metadata(run)?;
    let trace = read_trace(run)?;
    if trace.is_empty() {
        return Err(CliError::data(format!("{TRACE} holds no samples")));
    }
    let k_post = KPosterior::from_pairs(trace.iter().map(|t| (t.k, t.dwell)))?;
    let chains = trace.iter().map(|t| t.chain).max().unwrap_or(0) + 1;
    let mut autocorrelation = Vec::new();
    for c in 0..chains {
        let rows: Vec<_> = trace.iter().filter(|t| t.chain == c).collect();
        let series: [(&str, Vec<f64>); 3] = [
            ("log_likelihood", rows.iter().map(|t| t.log_likelihood).collect()),
            ("log_posterior", rows.iter().map(|t| t.log_posterior).collect()),
            ("k", rows.iter().map(|t| t.k as f64).collect()),
        ];
        for (name, s) in series {
            autocorrelation.push(TauReport::new(c, name, integrated_autocorrelation(&s), meta.run.thin));
        }
    }
    let report = Diagnostics {
        n_samples: trace.len(),
        map_k: k_post.map_k,
        k_posterior: (1..=k_post.max_k()).map(|k| (k, k_post.probabilities[k])).collect(),
        autocorrelation,
    };
    write_json(&run.join(DIAGNOSTICS), &report)?;
    println!("samples {}  MAP k {}", report.n_samples, report.map_k);
    for (k, p) in &report.k_posterior {
        if *p > 0.0 {
            println!("  P(k={k}) = {p:.4}");
        }
    }
    for t in &report.autocorrelation {
        let flag = if t.short { " (short series)" } else { "" };
        println!("  chain {} tau_int[{}] = {:.2} sweeps{flag}", t.chain, t.series, t.tau);
    }
    Ok(())
}

pub fn mutual_information(run: &Path) -> CliResult<()> {
    let meta = read_metadata(run)?;
    if meta.data.family != Family::Categorical {
        return Err(CliError::config("mutual information needs a categorical fit"));
    }
    let Dataset::Categorical(data) = load_data(&meta.data.path, Family::Categorical, &meta.data.ingest)? else {
        unreachable!("categorical ingest")
    };
    if data.n_obs() != meta.data.n_obs {
        return Err(CliError::data(format!(
            "{} now holds {} rows, the fit used {}",
            meta.data.path.display(),
            data.n_obs(),
            meta.data.n_obs
        )));
    }
    let snaps = read_assignments(run, data.n_obs())?;
    let mut acc = MutualInfoAccumulator::new(&data);
    for s in &snaps {
        acc.add_assignment(&s.labels, s.dwell);
    }
    let mi = acc.finish()?;
    let mut order: Vec<usize> = (0..mi.len()).collect();
    order.sort_by(|&a, &b| mi[b].total_cmp(&mi[a]).then(a.cmp(&b)));
    let mut w = csv_writer(&run.join(MI))?;
    w.write_record(["question", "name", "mi_bits"])?;
    for &q in &order {
        w.write_record([(q + 1).to_string(), data.names()[q].clone(), mi[q].to_string()])?;
        println!("{:>10.6}  {}", mi[q], data.names()[q]);
    }
    w.flush()?;
    Ok(())
}

#[derive(Args, Debug, Clone)]
pub struct ConsensusArgs {
    /// Directory written by `fit`.
    pub run: PathBuf,
    /// Number of spectral clusters.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn read_consensus(path: &Path, n: usize) -> CliResult<ConsensusMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut values = Vec::with_capacity(n * n);
    for rec in rdr.records() {
        for f in rec?.iter() {
            values.push(
                f.parse::<f64>()
                    .map_err(|_| CliError::data(format!("{CONSENSUS}: bad value {f:?}")))?,
            );
        }
    }
    Ok(ConsensusMatrix::from_dense(n, values)?)
}

pub fn consensus(args: &ConsensusArgs) -> CliResult<()> {
    let meta = read_metadata(&args.run)?;
    let n = meta.data.n_obs;
    let path = args.run.join(CONSENSUS);
    let matrix = if path.exists() {
        read_consensus(&path, n)?
    } else {
        let snaps = read_assignments(&args.run, n).map_err(|_| {
            CliError::data(format!(
                "{} has neither {CONSENSUS} nor {ASSIGNMENTS}; rerun fit with --consensus or --record-assignments",
                args.run.display()
            ))
        })?;
        let mut acc = ConsensusAccumulator::new(n);
        for s in &snaps {
            acc.add_assignment(&s.labels, s.dwell);
        }
        let m = acc.finish()?;
        write_consensus(&path, &m)?;
        m
    };
    println!("consensus matrix {n} x {n} in {}", path.display());
    if let Some(k) = args.k {
        if k == 0 || k > n {
            return Err(CliError::config(format!("--k must lie in 1..={n}")));
        }
        let sc = spectral_consensus(&matrix, k, args.seed)?;
        let mut w = csv_writer(&args.run.join(SPECTRAL))?;
        let mut header = vec!["observation".to_string(), "label".into()];
        header.extend((1..=sc.eigenvalues.len()).map(|j| format!("v{j}")));
        w.write_record(&header)?;
        for i in 0..n {
            let mut row = vec![(i + 1).to_string(), (sc.labels[i] + 1).to_string()];
            row.extend(sc.embedding[i].iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        let mut sizes = vec![0usize; k];
        for &l in &sc.labels {
            sizes[l as usize] += 1;
        }
        println!("spectral labels (k={k}) sizes {sizes:?}; eigenvalues {:?}", sc.eigenvalues);
    }
    Ok(())
}
