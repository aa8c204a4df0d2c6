use htsr::metrics::LayerMetrics;
use htsr::{alpha_hat, average_log_frobenius, DenominatorMode, FitQuality, ModelSummary};
use proptest::prelude::*;

fn layer() -> impl Strategy<Value = LayerMetrics> {
    (0usize..6, 0usize..9, 1.1f64..8.0, 1e-3f64..1e4, 1.0f64..1e6)
        .prop_map(|(id, slice, alpha, lmax, fro)| LayerMetrics::from_parts(id, slice, alpha, lmax, fro))
}

fn rescaled(l: &LayerMetrics, c: f64) -> LayerMetrics {
    // λ ↦ cλ and ‖W‖² ↦ c‖W‖² under W ↦ √c W; α is unchanged.
    LayerMetrics::from_parts(l.layer_id, l.slice_index, l.alpha.unwrap(), c * l.lambda_max, c * 10f64.powf(l.log10_frobenius_sq))
}

proptest! {
    #[test]
    fn alpha_hat_ignores_order(mut layers in prop::collection::vec(layer(), 1..12), seed in any::<u64>()) {
        let before = alpha_hat(&layers, DenominatorMode::PerMatrix).unwrap();
        let k = layers.len();
        layers.rotate_left((seed as usize) % k);
        layers.reverse();
        let after = alpha_hat(&layers, DenominatorMode::PerMatrix).unwrap();
        prop_assert!((before - after).abs() <= 1e-12 * before.abs().max(1.0));
    }

    #[test]
    fn rescaling_shifts_alpha_hat_by_mean_alpha(layers in prop::collection::vec(layer(), 1..12), c in 1e-2f64..1e2) {
        let scaled: Vec<LayerMetrics> = layers.iter().map(|l| rescaled(l, c)).collect();
        for mode in [DenominatorMode::PerMatrix, DenominatorMode::PerLayer] {
            let base = alpha_hat(&layers, mode).unwrap();
            let moved = alpha_hat(&scaled, mode).unwrap();
            let alpha_sum: f64 = layers.iter().map(|l| l.alpha.unwrap()).sum();
            let d = match mode {
                DenominatorMode::PerMatrix => layers.len() as f64,
                DenominatorMode::PerLayer => {
                    let mut ids: Vec<usize> = layers.iter().map(|l| l.layer_id).collect();
                    ids.sort();
                    ids.dedup();
                    ids.len() as f64
                }
            };
            let shift = alpha_sum / d * c.log10();
            prop_assert!((moved - base - shift).abs() <= 1e-9 * (1.0 + base.abs() + shift.abs()));
        }
    }

    #[test]
    fn summary_identities(layers in prop::collection::vec(layer(), 1..12)) {
        let summary = ModelSummary::from_layers(&layers, DenominatorMode::PerMatrix);
        prop_assert_eq!(summary.avg_log_frobenius_sq, summary.avg_log_frobenius.map(|v| 2.0 * v));
        for l in &layers {
            let term = l.weighted_term.unwrap();
            prop_assert!(term == 0.0 || term.signum() == l.log10_lambda_max.signum());
        }
    }

    #[test]
    fn modes_share_a_numerator(layers in prop::collection::vec(layer(), 1..12)) {
        let per_matrix = alpha_hat(&layers, DenominatorMode::PerMatrix).unwrap();
        let per_layer = alpha_hat(&layers, DenominatorMode::PerLayer).unwrap();
        let mut ids: Vec<usize> = layers.iter().map(|l| l.layer_id).collect();
        ids.sort();
        ids.dedup();
        let a = per_matrix * layers.len() as f64;
        let b = per_layer * ids.len() as f64;
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
    }
}

#[test]
fn flagged_layers_leave_both_averages() {
    let mut flagged = LayerMetrics::from_parts(9, 0, 3.0, 1e6, 1e12);
    flagged.alpha = None;
    flagged.weighted_term = None;
    flagged.quality_flag = FitQuality::InsufficientTail;
    let good = LayerMetrics::from_parts(1, 0, 2.0, 100.0, 1e4);
    let with = vec![good.clone(), flagged];
    assert_eq!(alpha_hat(&with, DenominatorMode::PerMatrix).unwrap(), 4.0);
    assert_eq!(average_log_frobenius(&with).unwrap(), 2.0);
}

#[test]
fn weighted_term_tracks_log_norm_for_very_heavy_tails() {
    use htsr::lab::{sample_pareto_matrix, ParetoMatrixSpec};
    use htsr::{correlation_spectrum, fit_power_law, layer_metrics};

    let mut gaps: Vec<f64> = (0..10)
        .map(|seed| {
            let w = sample_pareto_matrix(&ParetoMatrixSpec::square(1000, 1.0, seed)).unwrap();
            let esd = correlation_spectrum(&w).unwrap();
            let m = layer_metrics(&w, &esd, &fit_power_law(&esd, 10));
            (m.weighted_term.unwrap() - m.log10_frobenius_sq).abs() / m.log10_frobenius_sq
        })
        .collect();
    gaps.sort_by(f64::total_cmp);
    let median = 0.5 * (gaps[4] + gaps[5]);
    assert!(median <= 0.15, "{median}");
}
