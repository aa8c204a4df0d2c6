//! Published top-1 accuracies and `α̂` values for pretrained ImageNet models.
//!
//! These let the trend analysis run without any weight files. Three families
//! (ResNeXt, MeNet, FDMobileNet) are counterexamples where `α̂` does not track
//! accuracy; they are kept and labeled rather than dropped.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixtureRecord {
    pub family: &'static str,
    pub architecture_group: &'static str,
    pub model_name: &'static str,
    pub top1_accuracy: f64,
    pub alpha_hat: f64,
    pub counterexample: bool,
}

const fn rec(
    family: &'static str,
    architecture_group: &'static str,
    model_name: &'static str,
    top1_accuracy: f64,
    alpha_hat: f64,
    counterexample: bool,
) -> FixtureRecord {
    FixtureRecord {
        family,
        architecture_group,
        model_name,
        top1_accuracy,
        alpha_hat,
        counterexample,
    }
}

pub static FIXTURES: &[FixtureRecord] = &[
    rec("VGG", "VGG11", "VGG11", 68.97, 1.84, false),
    rec("VGG", "VGG11", "VGG11_BN", 70.45, 1.60, false),
    rec("VGG", "VGG13", "VGG13", 69.66, 1.65, false),
    rec("VGG", "VGG13", "VGG13_BN", 71.51, 1.36, false),
    rec("VGG", "VGG16", "VGG16", 71.64, 1.41, false),
    rec("VGG", "VGG16", "VGG16_BN", 73.52, 1.08, false),
    rec("VGG", "VGG19", "VGG19", 72.08, 1.16, false),
    rec("VGG", "VGG19", "VGG19_BN", 74.27, 0.81, false),
    rec("ResNet", "ResNet (small)", "resnet10", 62.54, 1.94, false),
    rec("ResNet", "ResNet (small)", "resnet12", 63.82, 0.74, false),
    rec("ResNet", "ResNet (small)", "resnet14", 66.83, 1.70, false),
    rec("ResNet", "ResNet (small)", "resnet16", 69.10, 1.49, false),
    rec("ResNet", "ResNet18", "resnet18_wd4", 50.50, 1.83, false),
    rec("ResNet", "ResNet18", "resnet18_wd2", 62.96, 1.82, false),
    rec("ResNet", "ResNet18", "resnet18_w3d4", 66.39, 0.28, false),
    rec("ResNet", "ResNet18", "resnet18", 70.48, 1.09, false),
    rec("ResNet", "ResNet34", "resnet34", 74.34, -0.42, false),
    rec("ResNet", "ResNet50", "resnet50", 76.21, 0.13, false),
    rec("ResNet", "ResNet50", "resnet50b", 76.95, 0.09, false),
    rec("ResNet", "ResNet101", "resnet101", 78.10, -0.67, false),
    rec("ResNet", "ResNet101", "resnet101b", 78.55, -0.92, false),
    rec("ResNet", "ResNet152", "resnet152", 78.74, -1.11, false),
    rec("ResNet", "ResNet152", "resnet152b", 79.26, -1.74, false),
    rec("DenseNet", "DenseNet", "densenet121", 74.43, 1.25, false),
    rec("DenseNet", "DenseNet", "densenet161", 77.14, 0.84, false),
    rec("DenseNet", "DenseNet", "densenet169", 75.60, 0.68, false),
    rec("DenseNet", "DenseNet", "densenet201", 76.90, 0.50, false),
    rec("SqueezeNet", "SqueezeNet", "squeezenet_v1_0", 58.69, 2.55, false),
    rec("SqueezeNet", "SqueezeNet", "squeezenet_v1_1", 58.18, 1.56, false),
    rec("CondenseNet", "CondenseNet", "condensenet74_c4_g4", 73.75, -1.83, false),
    rec("CondenseNet", "CondenseNet", "condensenet74_c8_g8", 71.07, -1.63, false),
    rec("DPN", "DPN", "dpn68", 75.83, 0.57, false),
    rec("DPN", "DPN", "dpn98", 79.19, 0.11, false),
    rec("DPN", "DPN", "dpn131", 79.46, -0.13, false),
    rec("ShuffleNet", "ShuffleNet", "shufflenetv2_wd2", 58.52, 5.12, false),
    rec("ShuffleNet", "ShuffleNet", "shufflenetv2_w1", 65.61, 2.86, false),
    rec("MobileNet", "MobileNet", "mobilenet_wd4", 53.74, 5.54, false),
    rec("MobileNet", "MobileNet", "mobilenet_wd2", 63.70, 4.26, false),
    rec("MobileNet", "MobileNet", "mobilenet_w3d4", 66.46, 4.41, false),
    rec("MobileNet", "MobileNet", "mobilenet_w1", 70.14, 4.19, false),
    rec("MobileNet", "MobileNet", "mobilenetv2_wd4", 50.28, 12.12, false),
    rec("MobileNet", "MobileNet", "mobilenetv2_wd2", 63.46, 4.69, false),
    rec("MobileNet", "MobileNet", "mobilenetv2_w3d4", 68.11, 4.21, false),
    rec("MobileNet", "MobileNet", "mobilenetv2_w1", 70.69, 3.50, false),
    rec("SE-ResNet", "SE-ResNet", "seresnet50", 77.53, -0.35, false),
    rec("SE-ResNet", "SE-ResNet", "seresnet101", 78.12, -1.24, false),
    rec("SE-ResNet", "SE-ResNet", "seresnet152", 78.52, -1.53, false),
    rec("SE-ResNeXt", "SE-ResNeXt", "seresnext50_32x4d", 79.00, 1.81, false),
    rec("SE-ResNeXt", "SE-ResNeXt", "seresnext101_32x4d", 80.04, 0.76, false),
    rec("ResNeXt", "ResNeXt", "resnext101_32x4d", 78.19, 1.22, true),
    rec("ResNeXt", "ResNeXt", "resnext101_64x4d", 78.96, 1.34, true),
    rec("MeNet", "MeNet", "menet108_8x1_g3", 56.08, 5.31, true),
    rec("MeNet", "MeNet", "menet128_8x1_g4", 56.05, 4.46, true),
    rec("MeNet", "MeNet", "menet228_12x1_g3", 66.43, 4.82, true),
    rec("MeNet", "MeNet", "menet256_12x1_g4", 66.59, 4.97, true),
    rec("MeNet", "MeNet", "menet348_12x1_g3", 69.90, 5.74, true),
    rec("MeNet", "MeNet", "menet352_12x1_g8", 66.69, 4.42, true),
    rec("MeNet", "MeNet", "menet456_24x1_g3", 71.60, 5.11, true),
    rec("FDMobileNet", "FDMobileNet", "fdmobilenet_wd4", 44.23, 6.40, true),
    rec("FDMobileNet", "FDMobileNet", "fdmobilenet_wd2", 56.15, 7.01, true),
    rec("FDMobileNet", "FDMobileNet", "fdmobilenet_w1", 65.30, 7.10, true),
];

/// Records of one family, matched case-insensitively; `"all"` returns everything.
pub fn fixture(family: &str) -> Vec<FixtureRecord> {
    FIXTURES
        .iter()
        .filter(|r| family.eq_ignore_ascii_case("all") || r.family.eq_ignore_ascii_case(family))
        .copied()
        .collect()
}

/// Family names in table order.
pub fn families() -> Vec<&'static str> {
    let mut out: Vec<&'static str> = Vec::new();
    for r in FIXTURES {
        if !out.contains(&r.family) {
            out.push(r.family);
        }
    }
    out
}
