use serde::Serialize;

/// Window factor `c` of the self-consistent truncation `W >= c τ(W)`.
pub const WINDOW_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AutocorrEstimate {
    /// Integrated autocorrelation time in units of the series spacing.
    pub tau: f64,
    /// Summation window used.
    pub window: usize,
    /// The series has zero variance; `tau` is reported as 1.
    pub constant: bool,
    /// The series is shorter than 100 τ, so the estimate is unreliable.
    pub short: bool,
    /// No window satisfied the truncation rule; the whole series was used.
    pub window_exhausted: bool,
}

/// `τ = 1 + 2 Σ_{t=1}^{W} ρ(t)` with the smallest `W` such that
/// `W >= 5 τ(W)`.
pub fn integrated_autocorrelation(series: &[f64]) -> AutocorrEstimate {
    let n = series.len();
    let flat = AutocorrEstimate {
        tau: 1.0,
        window: 0,
        constant: true,
        short: true,
        window_exhausted: false,
    };
    if n < 2 {
        return flat;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0 = dev.iter().map(|d| d * d).sum::<f64>() / n as f64;
    if c0 <= f64::EPSILON * mean.abs().max(1.0).powi(2) * 1e-6 || c0 == 0.0 {
        return flat;
    }
    let mut tau = 1.0;
    for t in 1..n {
        let ct = dev[..n - t].iter().zip(&dev[t..]).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        tau += 2.0 * ct / c0;
        if t as f64 >= WINDOW_FACTOR * tau {
            return AutocorrEstimate {
                tau,
                window: t,
                constant: false,
                short: (n as f64) < 100.0 * tau,
                window_exhausted: false,
            };
        }
    }
    AutocorrEstimate {
        tau,
        window: n - 1,
        constant: false,
        short: true,
        window_exhausted: true,
    }
}
