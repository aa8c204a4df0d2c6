//! Empirical spectral density of the layer correlation matrix `X = WᵀW / n`.
//!
//! Eigenvalues come from the singular values of `W` (`λᵢ = σᵢ² / n`). Forming
//! `WᵀW` squares the condition number and wipes out the small end of the
//! bulk, so the production path never does.

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor_store::WeightMatrix;

/// Eigenvalues below this fraction of `lambda_max` are treated as zero.
pub const NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Esd {
    pub layer_id: usize,
    pub slice_index: usize,
    /// Ascending, non-negative, length `m`.
    pub eigenvalues: Vec<f64>,
    pub n: usize,
    pub m: usize,
    /// `‖W‖²_F`, summed directly from the entries.
    pub frobenius_sq: f64,
    pub lambda_max: f64,
}

impl Esd {
    pub fn q(&self) -> f64 {
        self.n as f64 / self.m as f64
    }

    /// Strictly positive eigenvalues, ascending.
    pub fn positive(&self) -> &[f64] {
        let first = self.eigenvalues.partition_point(|&v| v <= 0.0);
        &self.eigenvalues[first..]
    }

    /// Builds an ESD straight from a list of eigenvalues. Useful for fitting
    /// spectra that did not come from a [`WeightMatrix`].
    ///
    /// `frobenius_sq` is set from the trace identity with `n = m`.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        if eigenvalues.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(
                "eigenvalues must be finite and non-negative",
            ));
        }
        eigenvalues.sort_by(f64::total_cmp);
        let m = eigenvalues.len();
        let lambda_max = eigenvalues[m - 1];
        let frobenius_sq = eigenvalues.iter().sum::<f64>() * m as f64;
        Ok(Self {
            layer_id: 0,
            slice_index: 0,
            eigenvalues,
            n: m,
            m,
            frobenius_sq,
            lambda_max,
        })
    }
}

pub fn correlation_spectrum(w: &WeightMatrix) -> Result<Esd> {
    let fail = |reason: String| Error::Decomposition {
        layer_id: w.layer_id,
        reason,
    };
    if w.n < w.m {
        return Err(fail(format!("matrix {}x{} is not oriented with n >= m", w.n, w.m)));
    }
    if let Some(i) = w.values.iter().position(|v| !v.is_finite()) {
        return Err(fail(format!("non-finite entry at flat index {i}")));
    }

    let mat = Mat::<f64>::from_fn(w.n, w.m, |i, j| w.get(i, j));
    let singular = mat
        .singular_values()
        .map_err(|e| fail(format!("{e:?}")))?;

    let n = w.n as f64;
    let mut eigenvalues: Vec<f64> = singular.iter().map(|s| s * s / n).collect();
    eigenvalues.sort_by(f64::total_cmp);
    debug_assert_eq!(eigenvalues.len(), w.m);

    let lambda_max = *eigenvalues.last().unwrap_or(&0.0);
    let floor = NOISE_FLOOR * lambda_max;
    for v in eigenvalues.iter_mut() {
        if *v < floor {
            *v = 0.0;
        }
    }

    Ok(Esd {
        layer_id: w.layer_id,
        slice_index: w.slice_index,
        eigenvalues,
        n: w.n,
        m: w.m,
        frobenius_sq: w.frobenius_sq(),
        lambda_max,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub center: f64,
    pub lo: f64,
    pub hi: f64,
    /// Probability density with respect to `λ` (not `log λ`).
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
    /// Zero eigenvalues dropped because the bins are logarithmic.
    pub dropped_zeros: usize,
}

impl Histogram {
    /// `Σ density · width`, which is 1 up to rounding.
    pub fn total_mass(&self) -> f64 {
        self.bins.iter().map(|b| b.density * (b.hi - b.lo)).sum()
    }
}

/// Plot-ready histogram of the ESD. With `log_scale`, bin edges are evenly
/// spaced in `log10 λ` and centers are geometric means.
pub fn esd_histogram(esd: &Esd, bins: usize, log_scale: bool) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::invalid("bins must be at least 1"));
    }
    let (values, dropped_zeros) = if log_scale {
        let pos = esd.positive();
        (pos, esd.eigenvalues.len() - pos.len())
    } else {
        (&esd.eigenvalues[..], 0)
    };
    if values.is_empty() {
        return Err(Error::EmptySpectrum);
    }

    let map = |v: f64| if log_scale { v.log10() } else { v };
    let unmap = |t: f64| if log_scale { 10f64.powf(t) } else { t };
    let mut lo = map(values[0]);
    let mut hi = map(values[values.len() - 1]);
    if hi <= lo {
        lo -= 0.5;
        hi += 0.5;
    }
    let step = (hi - lo) / bins as f64;

    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = (((map(v) - lo) / step) as usize).min(bins - 1);
        counts[k] += 1;
    }

    let total = values.len() as f64;
    let bins = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let a = unmap(lo + k as f64 * step);
            let b = unmap(lo + (k + 1) as f64 * step);
            let center = if log_scale { (a * b).sqrt() } else { 0.5 * (a + b) };
            HistogramBin {
                center,
                lo: a,
                hi: b,
                density: c as f64 / (total * (b - a)),
            }
        })
        .collect();
    Ok(Histogram {
        bins,
        dropped_zeros,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(n: usize, m: usize, values: Vec<f64>) -> WeightMatrix {
        WeightMatrix::from_row_major(0, 0, n, m, values).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn identity_spectrum() {
        let esd = correlation_spectrum(&matrix(2, 2, vec![1.0, 0.0, 0.0, 1.0])).unwrap();
        assert!(close(esd.eigenvalues[0], 0.5) && close(esd.eigenvalues[1], 0.5));
        assert_eq!(esd.lambda_max, esd.eigenvalues[1]);
    }

    #[test]
    fn diagonal_spectrum() {
        let esd = correlation_spectrum(&matrix(2, 2, vec![3.0, 0.0, 0.0, 4.0])).unwrap();
        assert!(close(esd.eigenvalues[0], 4.5), "{:?}", esd.eigenvalues);
        assert!(close(esd.eigenvalues[1], 8.0));
        assert_eq!(esd.frobenius_sq, 25.0);
    }

    #[test]
    fn rank_one_spectrum_clamps_noise() {
        // all-ones 4x3: X = ones(3,3), eigenvalues {0, 0, 3}
        let esd = correlation_spectrum(&matrix(4, 3, vec![1.0; 12])).unwrap();
        assert_eq!(&esd.eigenvalues[..2], &[0.0, 0.0]);
        assert!(close(esd.lambda_max, 3.0));
        assert_eq!(esd.positive().len(), 1);
    }

    #[test]
    fn non_finite_entry_reports_layer() {
        let mut w = matrix(2, 2, vec![1.0; 4]);
        w.layer_id = 7;
        w.values[1] = f64::INFINITY;
        let err = correlation_spectrum(&w).unwrap_err();
        assert!(matches!(err, Error::Decomposition { layer_id: 7, .. }));
    }

    #[test]
    fn single_valued_histogram_has_unit_mass() {
        let esd = Esd::from_eigenvalues(vec![1.0; 4]).unwrap();
        for log_scale in [false, true] {
            let h = esd_histogram(&esd, 1, log_scale).unwrap();
            assert_eq!(h.bins.len(), 1);
            assert!((h.total_mass() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn two_point_histogram_splits_mass() {
        let esd = Esd::from_eigenvalues(vec![0.5, 8.0]).unwrap();
        let h = esd_histogram(&esd, 2, false).unwrap();
        let masses: Vec<f64> = h.bins.iter().map(|b| b.density * (b.hi - b.lo)).collect();
        assert!((masses[0] - 0.5).abs() < 1e-12 && (masses[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn log_histogram_drops_zeros() {
        let esd = Esd::from_eigenvalues(vec![0.0, 0.0, 1.0, 10.0, 100.0]).unwrap();
        let h = esd_histogram(&esd, 4, true).unwrap();
        assert_eq!(h.dropped_zeros, 2);
        assert!((h.total_mass() - 1.0).abs() < 1e-9);
        assert!(esd_histogram(&Esd::from_eigenvalues(vec![0.0]).unwrap(), 3, true).is_err());
        assert!(esd_histogram(&esd, 0, false).is_err());
    }
}
