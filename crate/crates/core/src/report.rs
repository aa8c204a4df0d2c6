//! End-to-end analysis of a weight bundle into a [`ModelReport`].

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::write_json;
use crate::metrics::{layer_metrics, AnalysisConfig, LayerMetrics, ModelReport, ModelSummary};
use crate::powerlaw::fit_power_law;
use crate::spectral::correlation_spectrum;
use crate::tensor_store::{load_bundle, Bundle, SkipRecord, WeightMatrix};

enum Outcome {
    Kept(LayerMetrics, Option<SkipRecord>),
    Dropped(SkipRecord),
}

fn analyze_one(w: &WeightMatrix, config: &AnalysisConfig) -> Outcome {
    let skip = |reason: String| SkipRecord {
        layer_id: w.layer_id,
        slice_index: Some(w.slice_index),
        reason,
    };
    if w.values.iter().all(|&v| v == 0.0) {
        return Outcome::Dropped(skip("all-zero matrix".into()));
    }
    let esd = match correlation_spectrum(w) {
        Ok(esd) => esd,
        Err(e) => return Outcome::Dropped(skip(e.to_string())),
    };
    let fit = fit_power_law(&esd, config.min_tail_count);
    let metrics = layer_metrics(w, &esd, &fit);
    let note = (!fit.is_usable()).then(|| {
        skip(format!(
            "insufficient tail: {} positive eigenvalues, need {}",
            fit.tail_count, config.min_tail_count
        ))
    });
    Outcome::Kept(metrics, note)
}

/// Runs spectrum, fit and metrics over every matrix. Per-matrix failures end
/// up in `skipped`; they never abort the report.
pub fn analyze_matrices(
    model_name: &str,
    matrices: &[WeightMatrix],
    mut skipped: Vec<SkipRecord>,
    config: &AnalysisConfig,
) -> ModelReport {
    let outcomes: Vec<Outcome> = matrices.par_iter().map(|w| analyze_one(w, config)).collect();
    let mut layers = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        match outcome {
            Outcome::Kept(m, note) => {
                layers.push(m);
                skipped.extend(note);
            }
            Outcome::Dropped(record) => skipped.push(record),
        }
    }
    skipped.sort_by_key(|s| (s.layer_id, s.slice_index));
    ModelReport {
        model_name: model_name.to_string(),
        config: config.clone(),
        summary: ModelSummary::from_layers(&layers, config.denominator_mode),
        layers,
        skipped,
        generated_at: None,
    }
}

pub fn analyze_bundle(bundle: &Bundle, config: &AnalysisConfig) -> Result<ModelReport> {
    let extraction = bundle.extract_all(config.min_dim)?;
    Ok(analyze_matrices(
        &bundle.model_name,
        &extraction.matrices,
        extraction.skipped,
        config,
    ))
}

pub fn analyze_path(bundle_dir: &Path, config: &AnalysisConfig) -> Result<ModelReport> {
    analyze_bundle(&load_bundle(bundle_dir)?, config)
}

/// Stamps the report with the current time and writes it atomically.
pub fn write_report(path: &Path, report: &ModelReport) -> Result<()> {
    let mut stamped = report.clone();
    stamped.generated_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs());
    write_json(path, &stamped)
}

pub fn read_report(path: &Path) -> Result<ModelReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
