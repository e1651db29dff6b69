use statrs::distribution::{Beta, ContinuousCDF};

use super::DelphiError;

pub const DEFAULT_PSEUDO_COUNTS: f64 = 10.0;
pub const DEFAULT_LEVEL: f64 = 0.95;

/// Weighted mean computed as an offset from the minimum, so identical
/// inputs return that input exactly and the result never leaves
/// [min, max]. Weights need not be normalised.
pub(crate) fn weighted_mean(values: &[f64], weights: &[f64]) -> f64 {
    debug_assert_eq!(values.len(), weights.len());
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = weights.iter().sum();
    let offset: f64 = values.iter().zip(weights).map(|(x, w)| (w / total) * (x - lo)).sum();
    (lo + offset).clamp(lo, hi)
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    weighted_mean(values, &vec![1.0; values.len()])
}

/// Population standard deviation.
pub(crate) fn population_std(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Equal-tailed interval of the Beta(1 + p k, 1 + (1 - p) k) posterior: a
/// uniform prior updated with `k` pseudo-observations of which a fraction
/// `p` are successes.
pub fn credible_interval(p: f64, pseudo_counts: f64, level: f64) -> Result<(f64, f64), DelphiError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(DelphiError::InvalidInput(format!("probability {p} outside [0, 1]")));
    }
    if !(pseudo_counts.is_finite() && pseudo_counts >= 0.0) {
        return Err(DelphiError::InvalidInput(format!("pseudo counts {pseudo_counts} must be finite and non-negative")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(DelphiError::InvalidInput(format!("level {level} outside (0, 1)")));
    }
    let beta = Beta::new(1.0 + p * pseudo_counts, 1.0 + (1.0 - p) * pseudo_counts)
        .map_err(|e| DelphiError::InvalidInput(e.to_string()))?;
    let tail = (1.0 - level) / 2.0;
    Ok((beta.inverse_cdf(tail), beta.inverse_cdf(1.0 - tail)))
}

/// Mean Brier score of probability forecasts against 0/1 outcomes.
pub fn calibration(predictions: &[f64], outcomes: &[u8]) -> Result<f64, DelphiError> {
    if predictions.len() != outcomes.len() {
        return Err(DelphiError::InvalidInput(format!(
            "{} predictions but {} outcomes",
            predictions.len(),
            outcomes.len()
        )));
    }
    if predictions.is_empty() {
        return Err(DelphiError::InvalidInput("no forecasts to score".into()));
    }
    let mut total = 0.0;
    for (&p, &o) in predictions.iter().zip(outcomes) {
        if !(0.0..=1.0).contains(&p) {
            return Err(DelphiError::InvalidInput(format!("prediction {p} outside [0, 1]")));
        }
        if o > 1 {
            return Err(DelphiError::InvalidInput(format!("outcome {o} is not 0 or 1")));
        }
        total += (p - f64::from(o)).powi(2);
    }
    Ok(total / predictions.len() as f64)
}

/// Renders an estimate as whole percentages, e.g. "71% ± 6%".
pub fn format_percent_pm(mean: f64, std: f64) -> String {
    format!("{}% ± {}%", (mean * 100.0).round(), (std * 100.0).round())
}
