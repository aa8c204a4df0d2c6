//! Heavy-tailed random matrices and the experiments that check the
//! universality relations behind `α̂`.
//!
//! Entries are i.i.d. symmetric Pareto: `|Wᵢⱼ| = w0 · u^(−1/μ)` with `u`
//! uniform on `(0, 1]` and an independent fair sign, so
//! `P(|W| > x) = (x / w0)^(−μ)` for `x ≥ w0`. The tail parameter `μ` places
//! a matrix in one of three classes:
//!
//! | μ          | class                       | fitted α            |
//! |------------|-----------------------------|---------------------|
//! | `0 < μ < 2`| very heavy-tailed (Lévy)    | `μ/2 + 1`           |
//! | `2 < μ < 4`| moderately heavy-tailed     | `aμ + b`, size dependent |
//! | `μ > 4`    | weakly heavy-tailed         | unreliable          |
//!
//! For `μ < 4` the largest eigenvalue of `X` grows like `N^(4/μ − 1)`.

mod experiments;

pub use experiments::*;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor_store::WeightMatrix;

/// Recorded in experiment metadata so runs can be reproduced.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9, SeedableRng::seed_from_u64)";
pub const SEED_DERIVATION: &str =
    "splitmix64(splitmix64(splitmix64(splitmix64(seed) ^ mu_index) ^ n_index) ^ trial)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoMatrixSpec {
    pub n: usize,
    pub m: usize,
    pub mu: f64,
    pub w0: f64,
    pub seed: u64,
}

impl ParetoMatrixSpec {
    pub fn square(n: usize, mu: f64, seed: u64) -> Self {
        Self {
            n,
            m: n,
            mu,
            w0: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n < self.m {
            return Err(Error::invalid(format!(
                "need n >= m >= 1, got n={} m={}",
                self.n, self.m
            )));
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::invalid(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.w0 > 0.0) || !self.w0.is_finite() {
            return Err(Error::invalid(format!("w0 must be positive, got {}", self.w0)));
        }
        Ok(())
    }
}

/// Inverse-CDF map from `u ∈ (0, 1]` to an entry magnitude.
#[inline]
pub fn pareto_magnitude(u: f64, mu: f64, w0: f64) -> f64 {
    w0 * u.powf(-1.0 / mu)
}

/// Draws a symmetric Pareto matrix. Identical specs give bit-identical matrices.
pub fn sample_pareto_matrix(spec: &ParetoMatrixSpec) -> Result<WeightMatrix> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let values = (0..spec.n * spec.m)
        .map(|_| {
            let u = 1.0 - rng.random::<f64>();
            let magnitude = pareto_magnitude(u, spec.mu, spec.w0);
            if rng.random::<bool>() {
                magnitude
            } else {
                -magnitude
            }
        })
        .collect();
    WeightMatrix::from_row_major(0, 0, spec.n, spec.m, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UniversalityClass {
    #[serde(rename = "VHT")]
    VeryHeavyTailed,
    #[serde(rename = "MHT")]
    ModeratelyHeavyTailed,
    #[serde(rename = "WHT")]
    WeaklyHeavyTailed,
    /// `μ` exactly 2 or 4, where the class behavior differs and is not resolved.
    Boundary,
}

impl UniversalityClass {
    pub fn label(self) -> &'static str {
        match self {
            UniversalityClass::VeryHeavyTailed => "VHT",
            UniversalityClass::ModeratelyHeavyTailed => "MHT",
            UniversalityClass::WeaklyHeavyTailed => "WHT",
            UniversalityClass::Boundary => "boundary",
        }
    }
}

pub fn classify(mu: f64) -> Result<UniversalityClass> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::invalid(format!("mu must be positive, got {mu}")));
    }
    Ok(if mu == 2.0 || mu == 4.0 {
        UniversalityClass::Boundary
    } else if mu < 2.0 {
        UniversalityClass::VeryHeavyTailed
    } else if mu < 4.0 {
        UniversalityClass::ModeratelyHeavyTailed
    } else {
        UniversalityClass::WeaklyHeavyTailed
    })
}

/// `α = μ/2 + 1`, valid for `0 < μ < 2`.
pub fn predicted_alpha_vht(mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < 2.0) {
        return Err(Error::invalid(format!(
            "the VHT relation holds for 0 < mu < 2, got {mu}"
        )));
    }
    Ok(0.5 * mu + 1.0)
}

/// Exponent of `λmax ∼ N^(4/μ − 1)`.
pub fn predicted_lambda_max_exponent(mu: f64) -> Result<f64> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::invalid(format!("mu must be positive, got {mu}")));
    }
    Ok(4.0 / mu - 1.0)
}

/// The two sides of the small-`μ` comparison: `1/(4/μ − 1)` and its linear
/// expansion `μ/2 − 1/6`.
pub fn taylor_comparison(mu: f64) -> Result<(f64, f64)> {
    let exponent = predicted_lambda_max_exponent(mu)?;
    if exponent <= 0.0 {
        return Err(Error::invalid(format!("need mu < 4, got {mu}")));
    }
    Ok((1.0 / exponent, 0.5 * mu - 1.0 / 6.0))
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one experiment cell. Depends only on its coordinates, so serial and
/// parallel runs draw the same matrices.
pub fn cell_seed(base: u64, mu_index: usize, n_index: usize, trial: usize) -> u64 {
    let s = splitmix64(base);
    let s = splitmix64(s ^ mu_index as u64);
    let s = splitmix64(s ^ n_index as u64);
    splitmix64(s ^ trial as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_cdf_endpoints() {
        assert_eq!(pareto_magnitude(1.0, 1.7, 3.0), 3.0);
        assert_eq!(pareto_magnitude(0.25, 2.0, 1.0), 2.0);
    }

    #[test]
    fn classes() {
        use UniversalityClass::*;
        assert_eq!(classify(1.0).unwrap(), VeryHeavyTailed);
        assert_eq!(classify(3.0).unwrap(), ModeratelyHeavyTailed);
        assert_eq!(classify(4.0).unwrap(), Boundary);
        assert_eq!(classify(2.0).unwrap(), Boundary);
        assert_eq!(classify(4.5).unwrap(), WeaklyHeavyTailed);
        assert!(classify(0.0).is_err());
        assert!(classify(-1.0).is_err());
    }

    #[test]
    fn vht_prediction() {
        assert_eq!(predicted_alpha_vht(1.0).unwrap(), 1.5);
        assert!((predicted_alpha_vht(2.0 - 1e-12).unwrap() - 2.0).abs() < 1e-11);
        assert!((predicted_alpha_vht(1e-12).unwrap() - 1.0).abs() < 1e-11);
        assert!(predicted_alpha_vht(2.0).is_err());
        assert!(predicted_alpha_vht(0.0).is_err());
    }

    #[test]
    fn lambda_max_exponent() {
        assert_eq!(predicted_lambda_max_exponent(1.0).unwrap(), 3.0);
        assert_eq!(predicted_lambda_max_exponent(4.0).unwrap(), 0.0);
    }

    #[test]
    fn taylor_at_small_mu() {
        let (exact, _) = taylor_comparison(1e-9).unwrap();
        assert!(exact < 1e-9 && exact > 0.0);
    }

    #[test]
    fn sampling_is_reproducible() {
        let spec = ParetoMatrixSpec::square(20, 1.3, 42);
        let a = sample_pareto_matrix(&spec).unwrap();
        let b = sample_pareto_matrix(&spec).unwrap();
        assert_eq!(a, b);
        let c = sample_pareto_matrix(&ParetoMatrixSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a, c);
        assert!(a.values.iter().all(|v| v.abs() >= 1.0));
    }

    #[test]
    fn spec_validation() {
        let mut spec = ParetoMatrixSpec::square(4, 1.0, 0);
        spec.m = 5;
        assert!(sample_pareto_matrix(&spec).is_err());
        assert!(ParetoMatrixSpec::square(4, 0.0, 0).validate().is_err());
        let mut spec = ParetoMatrixSpec::square(4, 1.0, 0);
        spec.w0 = 0.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn cell_seeds_differ_per_coordinate() {
        let base = cell_seed(7, 0, 0, 0);
        assert_ne!(base, cell_seed(7, 1, 0, 0));
        assert_ne!(base, cell_seed(7, 0, 1, 0));
        assert_ne!(base, cell_seed(7, 0, 0, 1));
        assert_ne!(base, cell_seed(8, 0, 0, 0));
        assert_eq!(base, cell_seed(7, 0, 0, 0));
    }
}
