//! Small numerical helpers shared by the priors, models and sampler.

/// Natural log of the gamma function for positive arguments.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    libm::lgamma(x)
}

/// `ln n!`
#[inline]
pub fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// `ln C(n, k)`
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Numerically stable `ln Σ exp(v)`. Returns `-inf` for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Picks an index with probability proportional to `exp(log_weights[i])`.
///
/// `uniform` must lie in `[0, 1)`. The weights are shifted by their maximum
/// before exponentiation and overwritten with the shifted linear weights.
/// Selection is by inverse CDF over the running sum.
#[inline]
pub fn select_log_weighted(log_weights: &mut [f64], uniform: f64) -> usize {
    debug_assert!(!log_weights.is_empty());
    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for w in log_weights.iter_mut() {
        *w = (*w - max).exp();
        total += *w;
    }
    select_linear(log_weights, total, uniform)
}

/// Inverse-CDF selection over non-negative linear weights with known total.
#[inline]
pub fn select_linear(weights: &[f64], total: f64, uniform: f64) -> usize {
    let target = uniform * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += *w;
        if target < acc {
            return i;
        }
    }
    // Only reachable through rounding in the running sum.
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(weights.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut fact = 1.0_f64;
        for n in 1..20usize {
            fact *= n as f64;
            assert!((ln_factorial(n) - fact.ln()).abs() < 1e-12 * fact.ln().max(1.0));
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn log_sum_exp_is_shift_stable() {
        let v = [1000.0, 1000.0];
        assert!((log_sum_exp(&v) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn selection_follows_cumulative_weights() {
        let mut w = [0.0f64.ln(), 1.0f64.ln(), 3.0f64.ln()];
        assert_eq!(select_log_weighted(&mut w.clone(), 0.0), 1);
        assert_eq!(select_log_weighted(&mut w.clone(), 0.2499), 1);
        assert_eq!(select_log_weighted(&mut w, 0.25), 2);
    }

    #[test]
    fn selection_survives_huge_log_weights() {
        let mut w = [-800.0, -900.0, -1200.0];
        assert_eq!(select_log_weighted(&mut w, 0.5), 0);
    }
}
