//! Per-matrix and model-level capacity metrics.
//!
//! For each matrix the quantities of interest are the fitted exponent `α`, the
//! largest eigenvalue `λmax` of `X`, and `log10 ‖W‖²_F`. They are tied together
//! by the relation `α · log10 λmax ≈ log10 ‖W‖²_F`, which motivates both
//! model-level summaries:
//!
//! * `⟨log10 ‖W‖_F⟩`, the average log Frobenius norm (the log of a product norm);
//! * `α̂ = (1/D) Σ α · log10 λmax`, the weighted average of exponents.
//!
//! All logarithms are base 10. Matrices whose fit was flagged
//! `InsufficientTail` are left out of both summaries so that they cover the
//! same set of matrices.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::powerlaw::{FitQuality, PowerLawFit, DEFAULT_MIN_TAIL_COUNT};
use crate::spectral::Esd;
use crate::tensor_store::{SkipRecord, WeightMatrix, DEFAULT_MIN_MATRIX_DIM};

/// `|log10 λmax|` at or below this leaves the log-units stable rank undefined.
pub const STABLE_RANK_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerMetrics {
    pub layer_id: usize,
    pub slice_index: usize,
    pub n: usize,
    pub m: usize,
    pub q: f64,
    pub alpha: Option<f64>,
    pub lambda_min: Option<f64>,
    pub ks_statistic: Option<f64>,
    pub tail_count: usize,
    pub lambda_max: f64,
    pub log10_lambda_max: f64,
    pub log10_frobenius_sq: f64,
    pub log_stable_rank: Option<f64>,
    pub weighted_term: Option<f64>,
    pub quality_flag: FitQuality,
}

impl LayerMetrics {
    /// Whether this matrix takes part in the model-level averages.
    pub fn is_included(&self) -> bool {
        self.quality_flag != FitQuality::InsufficientTail && self.weighted_term.is_some()
    }

    /// Builds metrics from raw quantities; handy for hand-constructed cases.
    pub fn from_parts(
        layer_id: usize,
        slice_index: usize,
        alpha: f64,
        lambda_max: f64,
        frobenius_sq: f64,
    ) -> Self {
        let log10_lambda_max = lambda_max.log10();
        let log10_frobenius_sq = frobenius_sq.log10();
        Self {
            layer_id,
            slice_index,
            n: 0,
            m: 0,
            q: f64::NAN,
            alpha: Some(alpha),
            lambda_min: None,
            ks_statistic: None,
            tail_count: 0,
            lambda_max,
            log10_lambda_max,
            log10_frobenius_sq,
            log_stable_rank: stable_rank(log10_frobenius_sq, log10_lambda_max),
            weighted_term: Some(alpha * log10_lambda_max),
            quality_flag: FitQuality::for_alpha(alpha),
        }
    }
}

fn stable_rank(log10_frobenius_sq: f64, log10_lambda_max: f64) -> Option<f64> {
    (log10_lambda_max.abs() > STABLE_RANK_EPS).then(|| log10_frobenius_sq / log10_lambda_max)
}

pub fn layer_metrics(w: &WeightMatrix, esd: &Esd, fit: &PowerLawFit) -> LayerMetrics {
    let log10_lambda_max = esd.lambda_max.log10();
    let log10_frobenius_sq = esd.frobenius_sq.log10();
    let alpha = fit.is_usable().then_some(fit.alpha);
    LayerMetrics {
        layer_id: w.layer_id,
        slice_index: w.slice_index,
        n: w.n,
        m: w.m,
        q: w.q(),
        alpha,
        lambda_min: fit.is_usable().then_some(fit.lambda_min),
        ks_statistic: fit.is_usable().then_some(fit.ks_statistic),
        tail_count: fit.tail_count,
        lambda_max: esd.lambda_max,
        log10_lambda_max,
        log10_frobenius_sq,
        log_stable_rank: stable_rank(log10_frobenius_sq, log10_lambda_max),
        weighted_term: alpha.map(|a| a * log10_lambda_max),
        quality_flag: fit.quality,
    }
}

/// What `α̂` divides by.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DenominatorMode {
    /// Number of included matrices; each Conv2D kernel slice counts once.
    #[default]
    PerMatrix,
    /// Number of distinct layers among the included matrices.
    PerLayer,
}

impl fmt::Display for DenominatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DenominatorMode::PerMatrix => "per-matrix",
            DenominatorMode::PerLayer => "per-layer",
        })
    }
}

/// `α̂ = (1/D) Σ α · log10 λmax` over the included matrices.
pub fn alpha_hat(layers: &[LayerMetrics], mode: DenominatorMode) -> Result<f64> {
    let included: Vec<&LayerMetrics> = layers.iter().filter(|l| l.is_included()).collect();
    if included.is_empty() {
        return Err(Error::EmptyInclusion);
    }
    let sum: f64 = included.iter().filter_map(|l| l.weighted_term).sum();
    let denominator = match mode {
        DenominatorMode::PerMatrix => included.len(),
        DenominatorMode::PerLayer => included
            .iter()
            .map(|l| l.layer_id)
            .collect::<BTreeSet<_>>()
            .len(),
    };
    Ok(sum / denominator as f64)
}

/// `⟨log10 ‖W‖_F⟩` over the included matrices.
pub fn average_log_frobenius(layers: &[LayerMetrics]) -> Result<f64> {
    let logs: Vec<f64> = layers
        .iter()
        .filter(|l| l.is_included())
        .map(|l| 0.5 * l.log10_frobenius_sq)
        .collect();
    if logs.is_empty() {
        return Err(Error::EmptyInclusion);
    }
    Ok(logs.iter().sum::<f64>() / logs.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub min_dim: usize,
    pub min_tail_count: usize,
    pub denominator_mode: DenominatorMode,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            min_dim: DEFAULT_MIN_MATRIX_DIM,
            min_tail_count: DEFAULT_MIN_TAIL_COUNT,
            denominator_mode: DenominatorMode::PerMatrix,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    /// `None` when no matrix could be fit.
    pub alpha_hat: Option<f64>,
    pub avg_log_frobenius: Option<f64>,
    pub avg_log_frobenius_sq: Option<f64>,
    pub n_matrices: usize,
    pub denominator_mode: DenominatorMode,
}

impl ModelSummary {
    pub fn from_layers(layers: &[LayerMetrics], mode: DenominatorMode) -> Self {
        let avg_log_frobenius = average_log_frobenius(layers).ok();
        Self {
            alpha_hat: alpha_hat(layers, mode).ok(),
            avg_log_frobenius,
            avg_log_frobenius_sq: avg_log_frobenius.map(|v| 2.0 * v),
            n_matrices: layers.iter().filter(|l| l.is_included()).count(),
            denominator_mode: mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model_name: String,
    pub config: AnalysisConfig,
    pub layers: Vec<LayerMetrics>,
    pub summary: ModelSummary,
    pub skipped: Vec<SkipRecord>,
    /// Seconds since the Unix epoch; the only field that varies between runs.
    #[serde(default)]
    pub generated_at: Option<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers_of_ten() {
        let l = LayerMetrics::from_parts(0, 0, 2.0, 10.0, 100.0);
        assert_eq!(l.log10_frobenius_sq, 2.0);
        assert_eq!(l.log10_lambda_max, 1.0);
        assert_eq!(l.weighted_term, Some(2.0));
        assert_eq!(l.log_stable_rank, Some(2.0));
    }

    #[test]
    fn small_lambda_max_gives_negative_term() {
        let l = LayerMetrics::from_parts(0, 0, 2.0, 0.1, 100.0);
        assert_eq!(l.weighted_term, Some(-2.0));
    }

    #[test]
    fn stable_rank_undefined_at_unit_lambda() {
        let l = LayerMetrics::from_parts(0, 0, 2.0, 1.0, 100.0);
        assert_eq!(l.log_stable_rank, None);
        assert_eq!(l.weighted_term, Some(0.0));
    }

    #[test]
    fn alpha_hat_arithmetic() {
        let a = LayerMetrics::from_parts(0, 0, 2.0, 10.0, 1.0);
        let b = LayerMetrics::from_parts(1, 0, 3.0, 100.0, 1.0);
        assert_eq!(alpha_hat(&[a.clone()], DenominatorMode::PerMatrix).unwrap(), 2.0);
        assert_eq!(
            alpha_hat(&[a, b], DenominatorMode::PerMatrix).unwrap(),
            4.0
        );
        let c = LayerMetrics::from_parts(0, 0, 2.0, 0.01, 1.0);
        assert_eq!(alpha_hat(&[c], DenominatorMode::PerMatrix).unwrap(), -4.0);
    }

    #[test]
    fn per_layer_mode_counts_distinct_layers() {
        // two kernel slices of layer 0, one dense layer 1
        let layers = vec![
            LayerMetrics::from_parts(0, 0, 2.0, 10.0, 1.0),
            LayerMetrics::from_parts(0, 1, 2.0, 10.0, 1.0),
            LayerMetrics::from_parts(1, 0, 2.0, 10.0, 1.0),
        ];
        assert_eq!(alpha_hat(&layers, DenominatorMode::PerMatrix).unwrap(), 2.0);
        assert_eq!(alpha_hat(&layers, DenominatorMode::PerLayer).unwrap(), 3.0);
    }

    #[test]
    fn flagged_matrices_are_excluded() {
        let mut flagged = LayerMetrics::from_parts(1, 0, 5.0, 1e6, 1e9);
        flagged.alpha = None;
        flagged.weighted_term = None;
        flagged.quality_flag = FitQuality::InsufficientTail;
        let ok = LayerMetrics::from_parts(0, 0, 2.0, 10.0, 100.0);
        let layers = [ok, flagged.clone()];
        assert_eq!(alpha_hat(&layers, DenominatorMode::PerMatrix).unwrap(), 2.0);
        assert_eq!(average_log_frobenius(&layers).unwrap(), 1.0);
        assert!(matches!(
            alpha_hat(&[flagged], DenominatorMode::PerMatrix),
            Err(Error::EmptyInclusion)
        ));
        assert!(average_log_frobenius(&[]).is_err());
    }

    #[test]
    fn average_log_norm_examples() {
        let one = LayerMetrics::from_parts(0, 0, 2.0, 10.0, 100.0); // ‖W‖_F = 10
        assert_eq!(average_log_frobenius(&[one.clone()]).unwrap(), 1.0);
        let big = LayerMetrics::from_parts(1, 0, 2.0, 10.0, 1e6); // ‖W‖_F = 1000
        assert_eq!(average_log_frobenius(&[one, big]).unwrap(), 2.0);
        let ones = LayerMetrics::from_parts(0, 0, 2.0, 3.0, 12.0); // all-ones 4x3
        let v = average_log_frobenius(&[ones]).unwrap();
        assert!((v - 12f64.sqrt().log10()).abs() < 1e-15);
        assert!((v - 0.5396).abs() < 5e-5);
    }

    #[test]
    fn summary_identity() {
        let layers = vec![
            LayerMetrics::from_parts(0, 0, 2.3, 17.0, 450.0),
            LayerMetrics::from_parts(1, 0, 3.1, 0.4, 2.0),
        ];
        let s = ModelSummary::from_layers(&layers, DenominatorMode::PerMatrix);
        assert_eq!(s.avg_log_frobenius_sq, s.avg_log_frobenius.map(|v| 2.0 * v));
        assert_eq!(s.n_matrices, 2);
    }
}
