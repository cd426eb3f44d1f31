use std::path::PathBuf;

use clap::Args;
use mixmc_core::diagnostics::integrated_autocorrelation;
use mixmc_core::synth::generate;
use mixmc_core::{ModelConfig, RunConfig, SynthSpec};

use crate::error::{CliError, CliResult};
use crate::output::csv_writer;

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    /// Comma-separated true component counts.
    #[arg(long, value_delimiter = ',', default_value = "3,5,7,10")]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 5000)]
    pub sweeps: usize,
    /// Datasets per k; each gets its own data seed and chain seed.
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Optional CSV of per-k results.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (m, f64::NAN);
    }
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

pub fn run(args: &BenchArgs) -> CliResult<()> {
    if args.repeats == 0 || args.k.is_empty() {
        return Err(CliError::config("need at least one k and one repeat"));
    }
    let mut rows = Vec::new();
    println!("{:>4} {:>14} {:>18} {:>14} {:>8}", "k", "ms/sweep", "tau_int (sweeps)", "steps/s", "MAP=k");
    for &k in &args.k {
        let mut ms = Vec::new();
        let mut tau = Vec::new();
        let mut sps = Vec::new();
        let mut hits = 0;
        for rep in 0..args.repeats {
            let data_seed = args.seed.wrapping_mul(1_000_003).wrapping_add((k * 1000 + rep) as u64);
            let synth = generate(&SynthSpec::gaussian(k, args.n, data_seed))?;
            let mut cfg = RunConfig::new(ModelConfig::Gaussian {
                sigma2: 1.0,
                prior_width: None,
            });
            cfg.burn_in_sweeps = args.burnin;
            cfg.sample_sweeps = args.sweeps;
            cfg.seed = data_seed;
            let out = mixmc_core::run(&synth.data, &cfg)?;
            let ll: Vec<f64> = out.records.iter().map(|r| r.log_likelihood).collect();
            ms.push(out.summary.ms_per_sweep);
            sps.push(out.summary.steps_per_second);
            tau.push(integrated_autocorrelation(&ll).tau);
            let kp = mixmc_core::diagnostics::k_posterior(&out.records)?;
            hits += usize::from(kp.map_k == k);
        }
        let (ms_m, ms_se) = mean_se(&ms);
        let (tau_m, tau_se) = mean_se(&tau);
        let (sps_m, _) = mean_se(&sps);
        println!(
            "{k:>4} {:>14} {:>18} {sps_m:>14.3e} {:>8}",
            format!("{ms_m:.3}({ms_se:.3})"),
            format!("{tau_m:.1}({tau_se:.1})"),
            format!("{hits}/{}", args.repeats)
        );
        rows.push((k, ms_m, ms_se, tau_m, tau_se, sps_m, hits));
    }
    if let Some(path) = &args.out {
        let mut w = csv_writer(path)?;
        w.write_record(["k", "ms_per_sweep", "ms_per_sweep_se", "tau_sweeps", "tau_se", "steps_per_second", "map_hits"])?;
        for (k, a, b, c, d, e, h) in rows {
            w.write_record([k.to_string(), a.to_string(), b.to_string(), c.to_string(), d.to_string(), e.to_string(), h.to_string()])?;
        }
        w.flush()?;
    }
    Ok(())
}
