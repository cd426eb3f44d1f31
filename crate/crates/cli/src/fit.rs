use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use mixmc_core::data::ingest_path;
use mixmc_core::diagnostics::{integrated_autocorrelation, ConsensusAccumulator, KPosterior};
use mixmc_core::sampler::{MapState, RNG_STREAM_VERSION};
use mixmc_core::special::ln_factorial;
use mixmc_core::{
    run_chains, ComponentSummary, DataKind, Dataset, Init, KPrior, ModelConfig, PriorConfig, RunConfig, RunOutput,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::*;
use crate::{Family, IngestArgs};

/// Above this many observations consensus needs `--large-consensus`.
pub const CONSENSUS_LIMIT: usize = 20_000;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitArg {
    /// All observations in one component.
    Single,
    /// Uniform k, assignments from the prior.
    Random,
}

#[derive(Args, Debug, Clone)]
pub struct FitArgs {
    /// Input CSV.
    pub data: PathBuf,
    /// Output directory, created if needed.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub model: Family,
    /// Known component variance (Gaussian, required).
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Width of the uniform prior on each mean (Gaussian). Default: data
    /// range plus six standard deviations.
    #[arg(long)]
    pub prior_width: Option<f64>,
    /// Gamma prior shape on Poisson means.
    #[arg(long)]
    pub gamma_shape: Option<f64>,
    /// Gamma prior rate on Poisson means.
    #[arg(long)]
    pub gamma_rate: Option<f64>,
    /// Dirichlet concentration on response probabilities (categorical).
    #[arg(long)]
    pub theta_eta: Option<f64>,
    /// Concentration of the assignment prior.
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Prior on k: `uniform` or `geometric:A` with 0 < A < 1.
    #[arg(long, default_value = "uniform", value_parser = parse_k_prior)]
    pub k_prior: KPrior,
    #[arg(long, default_value_t = 1000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 10_000)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use the continuous-time kernel even at eta = 1.
    #[arg(long)]
    pub general_eta: bool,
    /// Independent chains, run concurrently; chain c uses stream c.
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[arg(long, value_enum, default_value = "single")]
    pub init: InitArg,
    /// Write every retained assignment to assignments.csv.
    #[arg(long)]
    pub record_assignments: bool,
    /// Accumulate the N x N consensus matrix.
    #[arg(long)]
    pub consensus: bool,
    /// Allow --consensus above 20000 observations.
    #[arg(long, requires = "consensus")]
    pub large_consensus: bool,
    #[command(flatten)]
    pub ingest: IngestArgs,
}

fn parse_k_prior(s: &str) -> Result<KPrior, String> {
    if s == "uniform" {
        return Ok(KPrior::Uniform);
    }
    let a = s
        .strip_prefix("geometric:")
        .ok_or_else(|| format!("expected `uniform` or `geometric:A`, got {s:?}"))?;
    a.parse::<f64>()
        .map(KPrior::Geometric)
        .map_err(|_| format!("bad geometric ratio {a:?}"))
}

impl FitArgs {
    fn model_config(&self) -> CliResult<ModelConfig> {
        let family = self.model;
        let reject = |flag: &str, set: bool, allowed: Family| {
            if set && family != allowed {
                Err(CliError::config(format!("--{flag} does not apply to --model {}", family_name(family))))
            } else {
                Ok(())
            }
        };
        reject("sigma2", self.sigma2.is_some(), Family::Gaussian)?;
        reject("prior-width", self.prior_width.is_some(), Family::Gaussian)?;
        reject("gamma-shape", self.gamma_shape.is_some(), Family::Poisson)?;
        reject("gamma-rate", self.gamma_rate.is_some(), Family::Poisson)?;
        reject("theta-eta", self.theta_eta.is_some(), Family::Categorical)?;
        let cfg = match family {
            Family::Null => ModelConfig::Null,
            Family::Gaussian => ModelConfig::Gaussian {
                sigma2: self
                    .sigma2
                    .ok_or_else(|| CliError::config("--model gaussian requires --sigma2"))?,
                prior_width: self.prior_width,
            },
            Family::Poisson => ModelConfig::Poisson {
                gamma_shape: self.gamma_shape.unwrap_or(1.0),
                gamma_rate: self.gamma_rate.unwrap_or(0.01),
            },
            Family::Categorical => ModelConfig::Categorical {
                theta_eta: self.theta_eta.unwrap_or(1.0),
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn family_name(f: Family) -> &'static str {
    match f {
        Family::Gaussian => "gaussian",
        Family::Poisson => "poisson",
        Family::Categorical => "categorical",
        Family::Null => "null",
    }
}

pub fn data_kind(f: Family) -> DataKind {
    match f {
        Family::Gaussian => DataKind::Real,
        Family::Poisson => DataKind::Count,
        Family::Categorical | Family::Null => DataKind::Categorical,
    }
}

pub fn load_data(path: &Path, family: Family, ingest: &IngestArgs) -> CliResult<Dataset> {
    if !path.exists() {
        return Err(CliError::data(format!("{} does not exist", path.display())));
    }
    Ok(ingest_path(path, data_kind(family), &ingest.options())?)
}

pub fn run(args: &FitArgs) -> CliResult<()> {
    let model = args.model_config()?;
    let prior = PriorConfig {
        k_prior: args.k_prior,
        eta: args.eta,
    };
    prior.validate()?;
    if args.chains == 0 {
        return Err(CliError::config("--chains must be at least 1"));
    }
    let data = load_data(&args.data, args.model, &args.ingest)?;
    let n = data.n_obs();
    if args.consensus && n > CONSENSUS_LIMIT && !args.large_consensus {
        return Err(CliError::config(format!(
            "--consensus on {n} observations needs O(N^2) memory; add --large-consensus to proceed"
        )));
    }
    let model = model.resolve(&data);
    let cfg = RunConfig {
        burn_in_sweeps: args.burnin,
        sample_sweeps: args.sweeps,
        thin: args.thin,
        seed: args.seed,
        chain: 0,
        model,
        prior,
        general_eta: args.general_eta,
        init: match args.init {
            InitArg::Single => Init::SingleComponent,
            InitArg::Random => Init::RandomK,
        },
        record_assignments: args.record_assignments,
        record_coincidence: args.consensus,
        audit: false,
    };
    cfg.validate()?;
    let outputs = run_chains(&data, &cfg, args.chains)?;

    create_dir(&args.out)?;
    let k_post = KPosterior::from_pairs(outputs.iter().flat_map(|o| o.records.iter().map(|r| (r.k, r.dwell))))?;
    write_k_posterior(&args.out, &k_post)?;
    write_trace(&args.out, &outputs)?;
    let map = outputs
        .iter()
        .map(|o| &o.map)
        .fold(None::<&MapState>, |best, m| match best {
            Some(b) if b.log_posterior >= m.log_posterior => Some(b),
            _ => Some(m),
        })
        .expect("at least one chain");
    write_map(&args.out, &data, map)?;
    if args.record_assignments {
        write_assignments(&args.out, &outputs)?;
    }
    if args.consensus {
        let mut acc = ConsensusAccumulator::new(n);
        for o in &outputs {
            acc.merge(o.consensus.as_ref().expect("consensus requested"));
        }
        write_consensus(&args.out.join(CONSENSUS), &acc.finish()?)?;
    }

    let autocorrelation = outputs
        .iter()
        .enumerate()
        .flat_map(|(c, o)| {
            let ll: Vec<f64> = o.records.iter().map(|r| r.log_likelihood).collect();
            let k: Vec<f64> = o.records.iter().map(|r| r.k as f64).collect();
            [
                TauReport::new(c, "log_likelihood", integrated_autocorrelation(&ll), args.thin),
                TauReport::new(c, "k", integrated_autocorrelation(&k), args.thin),
            ]
        })
        .collect::<Vec<_>>();
    let meta = Metadata {
        tool: "mixmc".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        data: DataInfo {
            path: args.data.clone(),
            family: args.model,
            n_obs: n,
            cardinalities: match &data {
                Dataset::Categorical(c) => Some(c.cardinalities().to_vec()),
                _ => None,
            },
            ingest: args.ingest.clone(),
        },
        model,
        prior,
        run: RunSettings {
            burn_in_sweeps: args.burnin,
            sample_sweeps: args.sweeps,
            thin: args.thin,
            seed: args.seed,
            chains: args.chains,
            general_eta: args.general_eta,
            init: cfg.init,
            record_assignments: args.record_assignments,
            consensus: args.consensus,
        },
        rng: RngInfo {
            algorithm: "ChaCha8".into(),
            stream_version: RNG_STREAM_VERSION.into(),
            streams: (0..args.chains as u64).collect(),
        },
        estimators: Estimators::default(),
        map_k: k_post.map_k,
        autocorrelation,
        chains: outputs
            .iter()
            .enumerate()
            .map(|(c, o)| ChainReport {
                chain: c,
                map_k: o.map.k,
                map_log_posterior: o.map.log_posterior,
                summary: Some(o.summary.clone()),
            })
            .collect(),
    };
    write_json(&args.out.join(METADATA), &meta)?;

    let tau = &meta.autocorrelation[0];
    println!(
        "N={n} model={} MAP k={} P(MAP k)={:.4} tau_int(log-likelihood)={:.2} sweeps ({:.0} steps/s)",
        family_name(args.model),
        k_post.map_k,
        k_post.probability(k_post.map_k),
        tau.tau,
        outputs[0].summary.steps_per_second
    );
    Ok(())
}

fn write_k_posterior(dir: &Path, k_post: &KPosterior) -> CliResult<()> {
    let mut w = csv_writer(&dir.join(K_POSTERIOR))?;
    w.write_record(["k", "probability", "weight"])?;
    for k in 1..=k_post.max_k() {
        w.write_record([k.to_string(), k_post.probabilities[k].to_string(), k_post.weights[k].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn write_trace(dir: &Path, outputs: &[RunOutput]) -> CliResult<()> {
    let mut w = csv_writer(&dir.join(TRACE))?;
    for (c, o) in outputs.iter().enumerate() {
        for r in &o.records {
            w.serialize(TraceRow {
                chain: c,
                sweep: r.sweep,
                k: r.k,
                log_likelihood: r.log_likelihood,
                log_posterior: r.log_posterior,
                dwell: r.dwell,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_assignments(dir: &Path, outputs: &[RunOutput]) -> CliResult<()> {
    let mut w = csv_writer(&dir.join(ASSIGNMENTS))?;
    let n = outputs[0].final_assignment.len();
    let mut header = vec!["chain".to_string(), "sweep".into(), "dwell".into()];
    header.extend((1..=n).map(|i| format!("obs{i}")));
    w.write_record(&header)?;
    for (c, o) in outputs.iter().enumerate() {
        for r in &o.records {
            let z = r.assignment.as_ref().expect("assignments recorded");
            let mut row = vec![c.to_string(), r.sweep.to_string(), r.dwell.to_string()];
            row.extend(z.iter().map(|l| (l + 1).to_string()));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_consensus(path: &Path, m: &mixmc_core::diagnostics::ConsensusMatrix) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    for i in 0..m.n() {
        w.write_record(m.row(i).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the highest-posterior state with components numbered by first
/// appearance in the data.
fn write_map(dir: &Path, data: &Dataset, map: &MapState) -> CliResult<()> {
    let mut order: Vec<usize> = Vec::with_capacity(map.k);
    let mut relabel = vec![u32::MAX; map.k];
    for &l in &map.assignment {
        if relabel[l as usize] == u32::MAX {
            relabel[l as usize] = order.len() as u32;
            order.push(l as usize);
        }
    }
    let mut w = csv_writer(&dir.join(MAP_ASSIGNMENT))?;
    w.write_record(["observation", "component"])?;
    for (i, &l) in map.assignment.iter().enumerate() {
        w.write_record([(i + 1).to_string(), (relabel[l as usize] + 1).to_string()])?;
    }
    w.flush()?;

    let n = map.assignment.len() as f64;
    let comps: Vec<&ComponentSummary> = order.iter().map(|&l| &map.components[l]).collect();
    let mut w = csv_writer(&dir.join(COMPONENTS))?;
    match data {
        Dataset::Categorical(c) if matches!(comps[0], ComponentSummary::Categorical { .. }) => {
            w.write_record(["component", "size", "share", "question", "name", "code", "level", "probability"])?;
            for (r, comp) in comps.iter().enumerate() {
                let ComponentSummary::Categorical { size, probs } = comp else { unreachable!() };
                for (q, p) in probs.iter().enumerate() {
                    for (code, v) in p.iter().enumerate() {
                        w.write_record([
                            (r + 1).to_string(),
                            size.to_string(),
                            (*size as f64 / n).to_string(),
                            (q + 1).to_string(),
                            c.names()[q].clone(),
                            code.to_string(),
                            c.levels()[q][code].clone(),
                            v.to_string(),
                        ])?;
                    }
                }
            }
        }
        _ => {
            w.write_record(["component", "size", "share", "mean", "variance", "shape", "rate"])?;
            for (r, comp) in comps.iter().enumerate() {
                let (mean, var, shape, rate) = match **comp {
                    ComponentSummary::Gaussian { mean, variance, .. } => (Some(mean), Some(variance), None, None),
                    ComponentSummary::Poisson { shape, rate, mean, .. } => {
                        (Some(mean), Some(shape / (rate * rate)), Some(shape), Some(rate))
                    }
                    _ => (None, None, None, None),
                };
                let s = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                w.write_record([
                    (r + 1).to_string(),
                    comp.size().to_string(),
                    (comp.size() as f64 / n).to_string(),
                    s(mean),
                    s(var),
                    s(shape),
                    s(rate),
                ])?;
            }
        }
    }
    w.flush()?;

    match data {
        Dataset::Categorical(c) => {
            let mut w = csv_writer(&dir.join(LEVELS))?;
            w.write_record(["question", "name", "code", "level"])?;
            for (q, levels) in c.levels().iter().enumerate() {
                for (code, level) in levels.iter().enumerate() {
                    w.write_record([(q + 1).to_string(), c.names()[q].clone(), code.to_string(), level.clone()])?;
                }
            }
            w.flush()?;
        }
        Dataset::Count(x) => write_fitted_pmf(dir, x, &comps, n)?,
        Dataset::Real(_) => {}
    }
    Ok(())
}

/// Empirical frequencies next to the plug-in mixture pmf of the MAP state.
fn write_fitted_pmf(dir: &Path, x: &[u64], comps: &[&ComponentSummary], n: f64) -> CliResult<()> {
    let max = *x.iter().max().unwrap_or(&0) as usize;
    let mut counts = vec![0usize; max + 1];
    for &v in x {
        counts[v as usize] += 1;
    }
    let mut w = csv_writer(&dir.join(FITTED_PMF))?;
    w.write_record(["x", "empirical", "fitted"])?;
    for (v, &c) in counts.iter().enumerate() {
        let fitted: f64 = comps
            .iter()
            .map(|comp| match **comp {
                ComponentSummary::Poisson { size, mean, .. } => {
                    size as f64 / n * (v as f64 * mean.ln() - mean - ln_factorial(v)).exp()
                }
                _ => 0.0,
            })
            .sum();
        w.write_record([v.to_string(), (c as f64 / n).to_string(), fitted.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
