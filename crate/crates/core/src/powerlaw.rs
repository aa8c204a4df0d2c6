//! Continuous power-law tail fits, `ρ(λ) ∝ λ^(−α)` for `λ ≥ λmin`.
//!
//! `α` is the continuous maximum-likelihood (Hill) estimate for a fixed cutoff.
//! The cutoff is chosen by scanning every distinct eigenvalue and keeping the
//! one whose tail sits closest to the fitted model in Kolmogorov–Smirnov
//! distance.
//!
//! KS convention: the empirical CDF of the `i`-th smallest of `k` tail points
//! is taken at its step midpoint `(i − ½) / k`, so the distance is
//! `max_i |F(xᵢ) − (i − ½)/k|`. This is the usual two-sided statistic minus
//! `1/(2k)`; a lone sample sitting at `xmin` scores exactly `0.5`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Esd;

pub const DEFAULT_MIN_TAIL_COUNT: usize = 10;

/// Exponents above this are flagged as less reliable.
pub const LARGE_ALPHA: f64 = 4.0;
/// Exponents below this are flagged as less reliable.
pub const SMALL_ALPHA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitQuality {
    Good,
    SmallAlphaCaution,
    LargeAlphaCaution,
    InsufficientTail,
}

impl FitQuality {
    pub fn for_alpha(alpha: f64) -> Self {
        if alpha > LARGE_ALPHA {
            FitQuality::LargeAlphaCaution
        } else if alpha < SMALL_ALPHA {
            FitQuality::SmallAlphaCaution
        } else {
            FitQuality::Good
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    /// Fitted exponent; `NaN` when `quality` is `InsufficientTail`.
    pub alpha: f64,
    /// Tail cutoff, one of the input eigenvalues; `NaN` when insufficient.
    pub lambda_min: f64,
    pub ks_statistic: f64,
    pub tail_count: usize,
    pub quality: FitQuality,
}

impl PowerLawFit {
    fn insufficient(tail_count: usize) -> Self {
        Self {
            alpha: f64::NAN,
            lambda_min: f64::NAN,
            ks_statistic: f64::NAN,
            tail_count,
            quality: FitQuality::InsufficientTail,
        }
    }

    pub fn is_usable(&self) -> bool {
        self.quality != FitQuality::InsufficientTail
    }
}

/// `α = 1 + k / Σ ln(sᵢ / xmin)`.
pub fn mle_alpha(samples: &[f64], xmin: f64) -> Result<f64> {
    check_tail(samples, xmin)?;
    let log_sum: f64 = samples.iter().map(|&s| (s / xmin).ln()).sum();
    if log_sum <= 0.0 {
        return Err(Error::DegenerateTail);
    }
    Ok(1.0 + samples.len() as f64 / log_sum)
}

/// KS distance between the samples and the power law with cutoff `xmin` and
/// exponent `alpha`, whose CDF is `1 − (x / xmin)^(1 − α)`.
pub fn ks_distance(samples: &[f64], xmin: f64, alpha: f64) -> Result<f64> {
    check_tail(samples, xmin)?;
    if !(alpha > 1.0) {
        return Err(Error::invalid(format!("alpha must exceed 1, got {alpha}")));
    }
    let mut logs: Vec<f64> = samples.iter().map(|&s| (s / xmin).ln()).collect();
    logs.sort_by(f64::total_cmp);
    Ok(ks_sorted_log_ratios(&logs, 0.0, alpha))
}

fn check_tail(samples: &[f64], xmin: f64) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::invalid("at least one sample is required"));
    }
    if !(xmin > 0.0) || !xmin.is_finite() {
        return Err(Error::invalid(format!("xmin must be positive, got {xmin}")));
    }
    if let Some(&s) = samples.iter().find(|&&s| !(s >= xmin)) {
        return Err(Error::SampleBelowXmin { sample: s, xmin });
    }
    Ok(())
}

/// `log_x` ascending natural logs of the tail; `log_xmin` the cutoff's log.
fn ks_sorted_log_ratios(log_x: &[f64], log_xmin: f64, alpha: f64) -> f64 {
    let k = log_x.len() as f64;
    let decay = 1.0 - alpha;
    log_x
        .iter()
        .enumerate()
        .map(|(i, &lx)| {
            let model = 1.0 - (decay * (lx - log_xmin)).exp();
            let empirical = (i as f64 + 0.5) / k;
            (model - empirical).abs()
        })
        .fold(0.0, f64::max)
}

/// Fits the upper tail of the ESD's positive eigenvalues.
///
/// A spectrum with fewer than `min_tail_count` positive eigenvalues comes back
/// flagged `InsufficientTail` rather than as an error, so batch runs keep going.
pub fn fit_power_law(esd: &Esd, min_tail_count: usize) -> PowerLawFit {
    fit_sorted_samples(esd.positive(), min_tail_count)
}

/// Same as [`fit_power_law`] for an arbitrary ascending slice of positive values.
pub fn fit_sorted_samples(values: &[f64], min_tail_count: usize) -> PowerLawFit {
    let min_tail = min_tail_count.max(1);
    let len = values.len();
    if len < min_tail {
        return PowerLawFit::insufficient(len);
    }
    debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));

    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let mut suffix = vec![0.0; len + 1];
    for j in (0..len).rev() {
        suffix[j] = suffix[j + 1] + logs[j];
    }

    let mut best: Option<PowerLawFit> = None;
    for j in 0..=len - min_tail {
        if j > 0 && values[j] == values[j - 1] {
            continue;
        }
        let k = len - j;
        let log_sum = suffix[j] - k as f64 * logs[j];
        if !(log_sum > 0.0) {
            continue;
        }
        let alpha = 1.0 + k as f64 / log_sum;
        let ks = ks_sorted_log_ratios(&logs[j..], logs[j], alpha);
        // strict comparison keeps the smaller cutoff on ties
        if best.map_or(true, |b| ks < b.ks_statistic) {
            best = Some(PowerLawFit {
                alpha,
                lambda_min: values[j],
                ks_statistic: ks,
                tail_count: k,
                quality: FitQuality::for_alpha(alpha),
            });
        }
    }
    best.unwrap_or_else(|| PowerLawFit::insufficient(len))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn single_sample_at_e() {
        assert_eq!(mle_alpha(&[E], 1.0).unwrap(), 2.0);
        assert_eq!(mle_alpha(&[E, E], 1.0).unwrap(), 2.0);
    }

    #[test]
    fn mle_errors() {
        assert!(matches!(
            mle_alpha(&[0.5, 2.0], 1.0),
            Err(Error::SampleBelowXmin { .. })
        ));
        assert!(matches!(mle_alpha(&[1.0, 1.0], 1.0), Err(Error::DegenerateTail)));
        assert!(mle_alpha(&[], 1.0).is_err());
        assert!(mle_alpha(&[1.0], 0.0).is_err());
    }

    #[test]
    fn lone_sample_at_xmin_scores_half() {
        for alpha in [1.5, 2.0, 7.0] {
            assert_eq!(ks_distance(&[3.0], 3.0, alpha).unwrap(), 0.5);
        }
    }

    #[test]
    fn quantile_samples_are_close() {
        let (xmin, alpha) = (1.0f64, 2.5f64);
        let inv = |p: f64| xmin * (1.0 - p).powf(1.0 / (1.0 - alpha));
        let samples: Vec<f64> = [0.25, 0.5, 0.75].iter().map(|&p| inv(p)).collect();
        let d = ks_distance(&samples, xmin, alpha).unwrap();
        assert!(d <= 1.0 / 6.0 + 1e-12, "{d}");
    }

    #[test]
    fn insufficient_tail_is_flagged() {
        let esd = Esd::from_eigenvalues(vec![0.0, 0.0, 1.0, 2.0, 3.0]).unwrap();
        let fit = fit_power_law(&esd, 5);
        assert_eq!(fit.quality, FitQuality::InsufficientTail);
        assert_eq!(fit.tail_count, 3);
        assert!(!fit.is_usable());
    }

    #[test]
    fn constant_spectrum_cannot_be_fit() {
        let esd = Esd::from_eigenvalues(vec![2.0; 20]).unwrap();
        assert_eq!(fit_power_law(&esd, 5).quality, FitQuality::InsufficientTail);
    }

    #[test]
    fn quality_bands() {
        assert_eq!(FitQuality::for_alpha(1.7), FitQuality::SmallAlphaCaution);
        assert_eq!(FitQuality::for_alpha(2.0), FitQuality::Good);
        assert_eq!(FitQuality::for_alpha(4.0), FitQuality::Good);
        assert_eq!(FitQuality::for_alpha(4.01), FitQuality::LargeAlphaCaution);
    }

    #[test]
    fn cutoff_is_an_input_value() {
        let values: Vec<f64> = (1..=40).map(|i| (i as f64).powf(1.7)).collect();
        let fit = fit_power_law(&Esd::from_eigenvalues(values.clone()).unwrap(), 10);
        assert!(values.contains(&fit.lambda_min));
        assert!(fit.tail_count >= 10);
        assert!(fit.alpha > 1.0);
        assert!((0.0..=1.0).contains(&fit.ks_statistic));
    }
}
