use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use mixmc_core::data::write_dataset;
use mixmc_core::synth::generate;
use mixmc_core::{SynthFamily, SynthSpec};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{csv_writer, write_json};

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum SynthKind {
    Gaussian,
    Poisson,
    Categorical,
}

#[derive(Args, Debug, Clone)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub family: SynthKind,
    /// Number of components (Gaussian, categorical).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Distance between consecutive Gaussian means.
    #[arg(long, default_value_t = 3.0)]
    pub spacing: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Comma-separated Poisson means.
    #[arg(long, value_delimiter = ',')]
    pub means: Vec<f64>,
    /// Comma-separated Poisson mixing weights.
    #[arg(long, value_delimiter = ',')]
    pub weights: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub questions: usize,
    #[arg(long, default_value_t = 4)]
    pub answers: u32,
    #[arg(long, default_value_t = 1.0)]
    pub theta_eta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub assignment_eta: f64,
    /// Data CSV to write. The generating spec goes to `<out>.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional CSV of true labels (observation, component; 1-based).
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Serialize)]
struct SynthMeta<'a> {
    tool: &'a str,
    version: &'a str,
    spec: &'a SynthSpec,
}

impl SynthArgs {
    fn spec(&self) -> CliResult<SynthSpec> {
        let need_k = || self.k.ok_or_else(|| CliError::config("--k is required for this family"));
        let spec = match self.family {
            SynthKind::Gaussian => SynthSpec {
                family: SynthFamily::Gaussian {
                    spacing: self.spacing,
                    sigma: self.sigma,
                },
                k_true: need_k()?,
                n_obs: self.n,
                seed: self.seed,
            },
            SynthKind::Poisson => {
                if self.means.is_empty() {
                    return Err(CliError::config("--family poisson requires --means"));
                }
                if self.k.is_some_and(|k| k != self.means.len()) {
                    return Err(CliError::config("--k disagrees with the number of --means"));
                }
                SynthSpec {
                    k_true: self.means.len(),
                    family: SynthFamily::Poisson {
                        means: self.means.clone(),
                        weights: (!self.weights.is_empty()).then(|| self.weights.clone()),
                    },
                    n_obs: self.n,
                    seed: self.seed,
                }
            }
            SynthKind::Categorical => SynthSpec {
                family: SynthFamily::Categorical {
                    cardinalities: vec![self.answers; self.questions],
                    theta_eta: self.theta_eta,
                    assignment_eta: self.assignment_eta,
                },
                k_true: need_k()?,
                n_obs: self.n,
                seed: self.seed,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

pub fn run(args: &SynthArgs) -> CliResult<()> {
    let spec = args.spec()?;
    let synth = generate(&spec)?;
    let file = File::create(&args.out)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", args.out.display())))?;
    write_dataset(BufWriter::new(file), &synth.data)?;
    let mut meta_path = args.out.clone().into_os_string();
    meta_path.push(".json");
    write_json(
        &PathBuf::from(meta_path),
        &SynthMeta {
            tool: "mixmc",
            version: env!("CARGO_PKG_VERSION"),
            spec: &spec,
        },
    )?;
    if let Some(path) = &args.labels {
        let mut w = csv_writer(path)?;
        w.write_record(["observation", "component"])?;
        for (i, l) in synth.labels.iter().enumerate() {
            w.write_record([(i + 1).to_string(), (l + 1).to_string()])?;
        }
        w.flush()?;
    }
    println!("wrote {} observations from {} components to {}", spec.n_obs, spec.k_true, args.out.display());
    Ok(())
}
