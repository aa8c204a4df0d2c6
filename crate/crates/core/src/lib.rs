//! Heavy-tailed spectral capacity metrics for neural-network weights.
//!
//! The pipeline runs from a weight bundle on disk to a model report:
//!
//! 1. [`tensor_store`] loads the bundle and cuts each layer into oriented 2D
//!    matrices (one per dense layer, one per kernel position of a Conv2D layer).
//! 2. [`spectral`] computes the eigenvalues of `X = WᵀW / N` from the
//!    singular values of `W`.
//! 3. [`powerlaw`] fits the tail of that spectrum to `λ^(−α)`.
//! 4. [`metrics`] turns fits and norms into per-matrix numbers and the model
//!    summaries `α̂` and `⟨log10 ‖W‖_F⟩`.
//!
//! [`lab`] generates heavy-tailed random matrices and runs the experiments
//! that check the relations the metric rests on. [`correlation`] and
//! [`fixtures`] compare metric values against reported accuracies.
//!
//! ```
//! use htsr::lab::{sample_pareto_matrix, ParetoMatrixSpec};
//! use htsr::{correlation_spectrum, fit_power_law};
//!
//! let w = sample_pareto_matrix(&ParetoMatrixSpec::square(200, 1.0, 7)).unwrap();
//! let esd = correlation_spectrum(&w).unwrap();
//! let fit = fit_power_law(&esd, 10);
//! assert!(fit.alpha > 1.0);
//! ```

pub mod correlation;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod lab;
pub mod metrics;
pub mod powerlaw;
pub mod report;
pub mod spectral;
pub mod stats;
pub mod tensor_store;

pub use error::{Error, Result};
pub use metrics::{
    alpha_hat, average_log_frobenius, layer_metrics, AnalysisConfig, DenominatorMode,
    LayerMetrics, ModelReport, ModelSummary,
};
pub use powerlaw::{fit_power_law, ks_distance, mle_alpha, FitQuality, PowerLawFit};
pub use spectral::{correlation_spectrum, esd_histogram, Esd};
pub use tensor_store::{
    extract_matrices, load_bundle, write_bundle, AxisRole, Bundle, LayerDescriptor, LayerKind,
    TensorRecord, WeightMatrix,
};

// The guide under `book/` is compiled as doctests so its snippets stay in sync.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/bundles.md")]
    mod bundles {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/power-law-fits.md")]
    mod power_law_fits {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/random-matrices.md")]
    mod random_matrices {}
    #[doc = include_str!("../../../book/src/trends.md")]
    mod trends {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
