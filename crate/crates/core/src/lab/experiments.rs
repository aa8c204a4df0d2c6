use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    cell_seed, classify, predicted_alpha_vht, predicted_lambda_max_exponent, sample_pareto_matrix,
    taylor_comparison, ParetoMatrixSpec, RNG_ALGORITHM, SEED_DERIVATION,
};
use crate::error::{Error, Result};
use crate::io::{write_csv, write_json};
use crate::powerlaw::{fit_power_law, DEFAULT_MIN_TAIL_COUNT};
use crate::spectral::correlation_spectrum;
use crate::stats::{least_squares, median, LinearFit};

pub const DEFAULT_N_GRID: [usize; 5] = [200, 400, 800, 1600, 3200];
pub const DEFAULT_TRIALS: usize = 10;

/// Knobs shared by every experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSettings {
    pub trials: usize,
    pub seed: u64,
    /// `Q = N / M`. Only `Q = 1` is validated.
    pub aspect_ratio: f64,
    pub w0: f64,
    pub min_tail_count: usize,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            trials: DEFAULT_TRIALS,
            seed: 0,
            aspect_ratio: 1.0,
            w0: 1.0,
            min_tail_count: DEFAULT_MIN_TAIL_COUNT,
        }
    }
}

impl ExperimentSettings {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if !(self.aspect_ratio >= 1.0) || !self.aspect_ratio.is_finite() {
            return Err(Error::invalid(format!(
                "aspect ratio must be >= 1, got {}",
                self.aspect_ratio
            )));
        }
        Ok(())
    }

    fn spec(&self, n: usize, mu: f64, seed: u64) -> ParetoMatrixSpec {
        let m = ((n as f64 / self.aspect_ratio).round() as usize).clamp(1, n);
        ParetoMatrixSpec {
            n,
            m,
            mu,
            w0: self.w0,
            seed,
        }
    }
}

/// What one random matrix yields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observation {
    pub mu: f64,
    pub n: usize,
    pub trial: usize,
    /// `None` when the fit was flagged as having too short a tail.
    pub alpha: Option<f64>,
    pub lambda_max: f64,
    pub log10_lambda_max: f64,
    pub weighted_term: Option<f64>,
    pub log10_frobenius_sq: f64,
}

fn observe(spec: &ParetoMatrixSpec, trial: usize, min_tail_count: usize) -> Result<Observation> {
    let w = sample_pareto_matrix(spec)?;
    let esd = correlation_spectrum(&w)?;
    let fit = fit_power_law(&esd, min_tail_count);
    let alpha = fit.is_usable().then_some(fit.alpha);
    let log10_lambda_max = esd.lambda_max.log10();
    Ok(Observation {
        mu: spec.mu,
        n: spec.n,
        trial,
        alpha,
        lambda_max: esd.lambda_max,
        log10_lambda_max,
        weighted_term: alpha.map(|a| a * log10_lambda_max),
        log10_frobenius_sq: esd.frobenius_sq.log10(),
    })
}

/// Every `(μ, N, trial)` cell of a grid, in grid order.
pub fn run_grid(
    mu_grid: &[f64],
    n_grid: &[usize],
    settings: &ExperimentSettings,
) -> Result<Vec<Observation>> {
    settings.validate()?;
    if mu_grid.is_empty() || n_grid.is_empty() {
        return Err(Error::invalid("mu and n grids must be non-empty"));
    }
    for &mu in mu_grid {
        classify(mu)?;
    }
    let cells: Vec<(usize, usize, usize)> = (0..mu_grid.len())
        .flat_map(|i| {
            (0..n_grid.len()).flat_map(move |j| (0..settings.trials).map(move |t| (i, j, t)))
        })
        .collect();
    cells
        .par_iter()
        .map(|&(i, j, t)| {
            let seed = cell_seed(settings.seed, i, j, t);
            observe(
                &settings.spec(n_grid[j], mu_grid[i], seed),
                t,
                settings.min_tail_count,
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaMuRow {
    pub mu: f64,
    pub n: usize,
    pub universality_class: &'static str,
    pub trials: usize,
    pub fitted_trials: usize,
    pub median_alpha: Option<f64>,
    pub predicted_alpha_vht: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaMuResult {
    pub rows: Vec<AlphaMuRow>,
    /// Least-squares `α = aμ + b` over the MHT part of the grid, when it has
    /// at least two points.
    pub mht_fit: Option<LinearFit>,
    pub observations: Vec<Observation>,
}

/// Median fitted `α` per `μ`, plus a linear fit over the MHT sub-grid.
pub fn alpha_mu_experiment(
    mu_grid: &[f64],
    n: usize,
    settings: &ExperimentSettings,
) -> Result<AlphaMuResult> {
    let observations = run_grid(mu_grid, &[n], settings)?;
    let rows: Vec<AlphaMuRow> = mu_grid
        .iter()
        .enumerate()
        .map(|(i, &mu)| {
            let cell = &observations[i * settings.trials..(i + 1) * settings.trials];
            let alphas: Vec<f64> = cell.iter().filter_map(|o| o.alpha).collect();
            AlphaMuRow {
                mu,
                n,
                universality_class: classify(mu).map(|c| c.label()).unwrap_or("invalid"),
                trials: settings.trials,
                fitted_trials: alphas.len(),
                median_alpha: median(&alphas),
                predicted_alpha_vht: predicted_alpha_vht(mu).ok(),
            }
        })
        .collect();

    let (mx, my): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.mu > 2.0 && r.mu < 4.0)
        .filter_map(|r| r.median_alpha.map(|a| (r.mu, a)))
        .unzip();
    Ok(AlphaMuResult {
        mht_fit: least_squares(&mx, &my),
        rows,
        observations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingExperimentResult {
    pub mu: f64,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    /// Slope of `log λmax` against `log N` over the per-size medians.
    pub measured_exponent: f64,
    pub predicted_exponent: f64,
    pub intercept: f64,
    pub per_size_medians: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub mu: f64,
    pub n: usize,
    pub trials: usize,
    pub median_lambda_max: f64,
    pub log10_n: f64,
    pub log10_median_lambda_max: f64,
    pub measured_exponent: f64,
    pub predicted_exponent: f64,
}

impl ScalingExperimentResult {
    pub fn rows(&self) -> Vec<ScalingRow> {
        self.n_grid
            .iter()
            .zip(&self.per_size_medians)
            .map(|(&n, &lm)| ScalingRow {
                mu: self.mu,
                n,
                trials: self.trials,
                median_lambda_max: lm,
                log10_n: (n as f64).log10(),
                log10_median_lambda_max: lm.log10(),
                measured_exponent: self.measured_exponent,
                predicted_exponent: self.predicted_exponent,
            })
            .collect()
    }

    pub fn relative_error(&self) -> f64 {
        ((self.measured_exponent - self.predicted_exponent) / self.predicted_exponent).abs()
    }
}

/// Regresses the per-size median `log λmax` against `log N`.
pub fn lambda_max_scaling_experiment(
    mu: f64,
    n_grid: &[usize],
    settings: &ExperimentSettings,
) -> Result<ScalingExperimentResult> {
    if !(mu > 0.0 && mu < 4.0) {
        return Err(Error::invalid(format!(
            "the lambda_max scaling law needs 0 < mu < 4, got {mu}"
        )));
    }
    if n_grid.len() < 3 {
        return Err(Error::invalid("the size grid needs at least 3 sizes"));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("the size grid must be strictly increasing"));
    }
    let observations = run_grid(&[mu], n_grid, settings)?;
    let per_size_medians: Vec<f64> = observations
        .chunks(settings.trials)
        .map(|cell| {
            let lm: Vec<f64> = cell.iter().map(|o| o.lambda_max).collect();
            median(&lm).unwrap_or(f64::NAN)
        })
        .collect();
    let x: Vec<f64> = n_grid.iter().map(|&n| (n as f64).log10()).collect();
    let y: Vec<f64> = per_size_medians.iter().map(|v| v.log10()).collect();
    let fit = least_squares(&x, &y).ok_or_else(|| Error::invalid("degenerate regression"))?;
    Ok(ScalingExperimentResult {
        mu,
        n_grid: n_grid.to_vec(),
        trials: settings.trials,
        measured_exponent: fit.slope,
        predicted_exponent: predicted_lambda_max_exponent(mu)?,
        intercept: fit.intercept,
        per_size_medians,
    })
}

/// Per-`(μ, N)` medians of the PL–norm quantities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlNormMedian {
    pub mu: f64,
    pub n: usize,
    pub trials: usize,
    pub median_alpha: Option<f64>,
    pub median_log10_lambda_max: Option<f64>,
    pub median_weighted_term: Option<f64>,
    pub median_log10_frobenius_sq: Option<f64>,
}

/// Raw per-matrix table for the PL–norm relation across a `μ × N` grid.
pub fn pl_norm_relation_experiment(
    mu_grid: &[f64],
    n_grid: &[usize],
    settings: &ExperimentSettings,
) -> Result<Vec<Observation>> {
    run_grid(mu_grid, n_grid, settings)
}

/// Collapses observations to medians, one row per `(μ, N)` in first-seen order.
pub fn pl_norm_medians(observations: &[Observation]) -> Vec<PlNormMedian> {
    let mut keys: Vec<(f64, usize)> = Vec::new();
    for o in observations {
        if !keys.iter().any(|&(mu, n)| mu == o.mu && n == o.n) {
            keys.push((o.mu, o.n));
        }
    }
    keys.into_iter()
        .map(|(mu, n)| {
            let cell: Vec<&Observation> = observations
                .iter()
                .filter(|o| o.mu == mu && o.n == n)
                .collect();
            let col = |f: &dyn Fn(&Observation) -> Option<f64>| {
                median(&cell.iter().filter_map(|o| f(o)).collect::<Vec<_>>())
            };
            PlNormMedian {
                mu,
                n,
                trials: cell.len(),
                median_alpha: col(&|o| o.alpha),
                median_log10_lambda_max: col(&|o| Some(o.log10_lambda_max)),
                median_weighted_term: col(&|o| o.weighted_term),
                median_log10_frobenius_sq: col(&|o| Some(o.log10_frobenius_sq)),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivationCheck {
    pub mu: f64,
    pub n: usize,
    pub trials: usize,
    /// Median over trials of `log N / log λmax`.
    pub lhs: f64,
    /// `μ / 2`.
    pub rhs: f64,
    /// `μ/2 − 1/6`.
    pub taylor_rhs: f64,
    /// `1 / (4/μ − 1)`, the value the scaling law gives before expansion.
    pub exact_rhs: f64,
}

/// Compares `log N / log λmax` on random matrices with `μ/2`.
pub fn derivation_check(
    mu: f64,
    n: usize,
    settings: &ExperimentSettings,
) -> Result<DerivationCheck> {
    if !(mu > 0.0 && mu < 2.0) {
        return Err(Error::invalid(format!(
            "the derivation check needs 0 < mu < 2, got {mu}"
        )));
    }
    let observations = run_grid(&[mu], &[n], settings)?;
    let ln_n = (n as f64).ln();
    let ratios: Vec<f64> = observations
        .iter()
        .map(|o| ln_n / o.lambda_max.ln())
        .collect();
    let (exact_rhs, taylor_rhs) = taylor_comparison(mu)?;
    Ok(DerivationCheck {
        mu,
        n,
        trials: settings.trials,
        lhs: median(&ratios).unwrap_or(f64::NAN),
        rhs: 0.5 * mu,
        taylor_rhs,
        exact_rhs,
    })
}

/// Sidecar describing how an experiment's CSV was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentMeta {
    pub experiment: String,
    pub mu_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub settings: ExperimentSettings,
    pub rng: &'static str,
    pub seed_derivation: &'static str,
    pub files: Vec<String>,
    pub version: &'static str,
}

impl ExperimentMeta {
    pub fn new(
        experiment: &str,
        mu_grid: &[f64],
        n_grid: &[usize],
        settings: &ExperimentSettings,
    ) -> Self {
        Self {
            experiment: experiment.to_string(),
            mu_grid: mu_grid.to_vec(),
            n_grid: n_grid.to_vec(),
            settings: settings.clone(),
            rng: RNG_ALGORITHM,
            seed_derivation: SEED_DERIVATION,
            files: Vec::new(),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// Which lab experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    AlphaMu,
    Scaling,
    PlNorm,
    Derivation,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::AlphaMu => "alpha-mu",
            Experiment::Scaling => "scaling",
            Experiment::PlNorm => "pl-norm",
            Experiment::Derivation => "derivation",
        }
    }
}

/// Runs an experiment and writes its CSV file(s) plus `meta.json` into
/// `out_dir`. Returns the paths written, CSVs first.
pub fn run_and_write(
    experiment: Experiment,
    mu_grid: &[f64],
    n_grid: &[usize],
    settings: &ExperimentSettings,
    out_dir: &Path,
) -> Result<Vec<std::path::PathBuf>> {
    if mu_grid.is_empty() || n_grid.is_empty() {
        return Err(Error::invalid("mu and n grids must be non-empty"));
    }
    let mut meta = ExperimentMeta::new(experiment.name(), mu_grid, n_grid, settings);
    let mut written = Vec::new();
    let mut emit = |name: &str, write: &dyn Fn(&Path) -> Result<()>| -> Result<()> {
        let path = out_dir.join(name);
        write(&path)?;
        meta.files.push(name.to_string());
        written.push(path);
        Ok(())
    };
    match experiment {
        Experiment::AlphaMu => {
            let n = n_grid[0];
            let result = alpha_mu_experiment(mu_grid, n, settings)?;
            emit("alpha_mu.csv", &|p| write_csv(p, &result.rows))?;
            emit("alpha_mu_trials.csv", &|p| write_csv(p, &result.observations))?;
            emit("alpha_mu_mht_fit.csv", &|p| {
                write_csv(p, &result.mht_fit.into_iter().collect::<Vec<_>>())
            })?;
        }
        Experiment::Scaling => {
            let rows: Vec<ScalingRow> = mu_grid
                .iter()
                .map(|&mu| lambda_max_scaling_experiment(mu, n_grid, settings).map(|r| r.rows()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .collect();
            emit("scaling.csv", &|p| write_csv(p, &rows))?;
        }
        Experiment::PlNorm => {
            let obs = pl_norm_relation_experiment(mu_grid, n_grid, settings)?;
            emit("pl_norm.csv", &|p| write_csv(p, &obs))?;
            emit("pl_norm_medians.csv", &|p| write_csv(p, &pl_norm_medians(&obs)))?;
        }
        Experiment::Derivation => {
            let rows = mu_grid
                .iter()
                .flat_map(|&mu| n_grid.iter().map(move |&n| (mu, n)))
                .map(|(mu, n)| derivation_check(mu, n, settings))
                .collect::<Result<Vec<_>>>()?;
            emit("derivation.csv", &|p| write_csv(p, &rows))?;
        }
    }
    let meta_path = out_dir.join("meta.json");
    write_json(&meta_path, &meta)?;
    written.push(meta_path);
    Ok(written)
}
