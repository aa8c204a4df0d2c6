//! Correlating a capacity metric with reported test accuracy.
//!
//! Rank correlations (Spearman, Kendall) are the headline numbers since the
//! claim being tested is about trends. Pearson and a least-squares line are
//! reported alongside.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures::FixtureRecord;
use crate::metrics::ModelReport;
use crate::stats::{least_squares, pearson};

/// One row of the accuracies CSV (`model,architecture_group,top1_accuracy`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRecord {
    #[serde(rename = "model")]
    pub model_name: String,
    pub architecture_group: String,
    /// `100 − top-1 error`, in percent.
    pub top1_accuracy: f64,
}

pub fn read_accuracies(path: &Path) -> Result<Vec<AccuracyRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in reader.deserialize() {
        let rec: AccuracyRecord = row?;
        if !(0.0..=100.0).contains(&rec.top1_accuracy) {
            return Err(Error::invalid(format!(
                "{}: top1_accuracy {} outside [0, 100]",
                rec.model_name, rec.top1_accuracy
            )));
        }
        out.push(rec);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    #[default]
    AlphaHat,
    LogNorm,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::AlphaHat => "alpha-hat",
            Metric::LogNorm => "log-norm",
        })
    }
}

/// A model's metric value joined with its accuracy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricPoint {
    pub model_name: String,
    pub group: String,
    pub metric: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub group: String,
    pub metric: Metric,
    pub n_models: usize,
    pub spearman_rho: Option<f64>,
    pub kendall_tau: Option<f64>,
    pub pearson_r: Option<f64>,
    /// Least-squares slope of accuracy against the metric.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub note: Option<String>,
}

/// Average ranks starting at 1; ties share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = shared;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's ρ as the Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() {
        return None;
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Kendall's τ-b, which corrects for ties in either variable.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return None;
    }
    let (mut concordant, mut discordant, mut ties_x, mut ties_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i].total_cmp(&x[j]) as i64;
            let dy = y[i].total_cmp(&y[j]) as i64;
            match (dx, dy) {
                (0, 0) => {}
                (0, _) => ties_x += 1,
                (_, 0) => ties_y += 1,
                _ if dx == dy => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let denom = (((concordant + discordant + ties_x) * (concordant + discordant + ties_y)) as f64)
        .sqrt();
    (denom > 0.0).then(|| (concordant - discordant) as f64 / denom)
}

/// Correlation of accuracy against metric over one set of points.
pub fn correlate(group: &str, metric: Metric, points: &[MetricPoint]) -> CorrelationResult {
    let x: Vec<f64> = points.iter().map(|p| p.metric).collect();
    let y: Vec<f64> = points.iter().map(|p| p.accuracy).collect();
    let mut result = CorrelationResult {
        group: group.to_string(),
        metric,
        n_models: points.len(),
        spearman_rho: None,
        kendall_tau: None,
        pearson_r: None,
        slope: None,
        intercept: None,
        note: None,
    };
    if points.len() < 2 {
        result.note = Some("fewer than two models".into());
        return result;
    }
    if x.iter().all(|&v| v == x[0]) {
        result.note = Some("metric is constant; correlations undefined".into());
        return result;
    }
    result.spearman_rho = spearman(&x, &y);
    result.kendall_tau = kendall_tau(&x, &y);
    result.pearson_r = pearson(&x, &y);
    if let Some(fit) = least_squares(&x, &y) {
        result.slope = Some(fit.slope);
        result.intercept = Some(fit.intercept);
    }
    result
}

/// One result per group (first-seen order) followed by a `combined` row.
pub fn correlate_groups(metric: Metric, points: &[MetricPoint]) -> Vec<CorrelationResult> {
    let mut order: Vec<&str> = Vec::new();
    let mut by_group: HashMap<&str, Vec<MetricPoint>> = HashMap::new();
    for p in points {
        if !by_group.contains_key(p.group.as_str()) {
            order.push(&p.group);
        }
        by_group.entry(&p.group).or_default().push(p.clone());
    }
    let mut out: Vec<CorrelationResult> = order
        .iter()
        .map(|g| correlate(g, metric, &by_group[g]))
        .collect();
    if order.len() > 1 {
        out.push(correlate("combined", metric, points));
    }
    out
}

pub fn fixture_points(records: &[FixtureRecord]) -> Vec<MetricPoint> {
    records
        .iter()
        .map(|r| MetricPoint {
            model_name: r.model_name.to_string(),
            group: r.family.to_string(),
            metric: r.alpha_hat,
            accuracy: r.top1_accuracy,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Join {
    pub points: Vec<MetricPoint>,
    /// Accuracy rows with no matching report.
    pub unmatched: Vec<String>,
    /// Reports whose summary lacks the requested metric.
    pub missing_metric: Vec<String>,
}

/// Pairs each report with its accuracy row by model name.
pub fn join_reports(
    reports: &[ModelReport],
    accuracies: &[AccuracyRecord],
    metric: Metric,
) -> Result<Join> {
    let by_name: HashMap<&str, &ModelReport> =
        reports.iter().map(|r| (r.model_name.as_str(), r)).collect();
    let mut join = Join {
        points: Vec::new(),
        unmatched: Vec::new(),
        missing_metric: Vec::new(),
    };
    for acc in accuracies {
        let Some(report) = by_name.get(acc.model_name.as_str()) else {
            join.unmatched.push(acc.model_name.clone());
            continue;
        };
        let value = match metric {
            Metric::AlphaHat => report.summary.alpha_hat,
            Metric::LogNorm => report.summary.avg_log_frobenius,
        };
        match value {
            Some(v) => join.points.push(MetricPoint {
                model_name: acc.model_name.clone(),
                group: acc.architecture_group.clone(),
                metric: v,
                accuracy: acc.top1_accuracy,
            }),
            None => join.missing_metric.push(acc.model_name.clone()),
        }
    }
    if join.points.is_empty() {
        return Err(Error::invalid(
            "no model names overlap between the reports and the accuracies",
        ));
    }
    Ok(join)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn points(metric: &[f64], acc: &[f64]) -> Vec<MetricPoint> {
        metric
            .iter()
            .zip(acc)
            .enumerate()
            .map(|(i, (&m, &a))| MetricPoint {
                model_name: format!("m{i}"),
                group: "g".into(),
                metric: m,
                accuracy: a,
            })
            .collect()
    }

    #[test]
    fn perfect_anti_monotone() {
        let r = correlate("g", Metric::AlphaHat, &points(&[3.0, 2.0, 1.0], &[70.0, 80.0, 90.0]));
        assert_eq!(r.spearman_rho, Some(-1.0));
        assert_eq!(r.kendall_tau, Some(-1.0));
        assert!((r.slope.unwrap() + 10.0).abs() < 1e-12);
    }

    #[test]
    fn ties_share_ranks() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn constant_metric_is_undefined() {
        let r = correlate("g", Metric::AlphaHat, &points(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]));
        assert_eq!(r.spearman_rho, None);
        assert_eq!(r.kendall_tau, None);
        assert!(r.note.is_some());
    }

    #[test]
    fn single_model_is_undefined() {
        let r = correlate("g", Metric::AlphaHat, &points(&[1.0], &[1.0]));
        assert_eq!(r.n_models, 1);
        assert_eq!(r.spearman_rho, None);
    }

    #[test]
    fn kendall_with_ties() {
        // x ties one pair; tau-b = (C - D) / sqrt((n0 - n1)(n0 - n2))
        let x = [1.0, 1.0, 2.0, 3.0];
        let y = [1.0, 2.0, 3.0, 4.0];
        let tau = kendall_tau(&x, &y).unwrap();
        assert!((tau - 5.0 / (5.0f64 * 6.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn groups_then_combined() {
        let mut pts = points(&[1.0, 2.0], &[2.0, 1.0]);
        pts.extend(points(&[1.0, 2.0], &[1.0, 2.0]).into_iter().map(|mut p| {
            p.group = "h".into();
            p
        }));
        let out = correlate_groups(Metric::AlphaHat, &pts);
        assert_eq!(out.len(), 3);
        assert_eq!(out[0].spearman_rho, Some(-1.0));
        assert_eq!(out[1].spearman_rho, Some(1.0));
        assert_eq!(out[2].group, "combined");
    }
}
