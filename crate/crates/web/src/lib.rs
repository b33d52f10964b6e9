//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string, so the page
//! needs no generated TypeScript types.

use neatboost::analysis::{anova_table, lda_project};
use neatboost::fusion::{fuse, optimize_weights, EnsembleWeights, ProbabilityMatrix};
use neatboost::gbdt::{self, GbdtConfig};
use neatboost::imaging::{describe_image, ImageGray, FEATURE_NAMES};
use neatboost::mlp::{self, MlpConfig};
use neatboost::pipeline::{cross_val_predict, stratified_kfold, synthesize_dataset, weighted_f1, CLASS_NAMES};
use neatboost::{seed, N_CLASSES};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const PHANTOM_W: usize = 160;
const PHANTOM_H: usize = 120;
const LANDSCAPE_STEPS: usize = 50;

#[derive(Serialize)]
struct Descriptors {
    width: usize,
    height: usize,
    /// Grayscale pixels scaled to 0..=255, row-major.
    pixels: Vec<u8>,
    /// 1 where the pixel belongs to the segmented specimen.
    mask: Vec<u8>,
    features: Vec<(&'static str, f64)>,
}

/// Synthetic transillumination image: a bright elliptical fillet with a
/// darker dense core and periodic striations.
pub fn phantom(core_radius: f64, striation: f64, angle_deg: f64) -> ImageGray {
    let (cx, cy) = (PHANTOM_W as f64 / 2.0, PHANTOM_H as f64 / 2.0);
    let (a, b) = (64.0, 40.0);
    let (s, c) = angle_deg.to_radians().sin_cos();
    ImageGray::from_fn(PHANTOM_W, PHANTOM_H, |x, y| {
        let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
        if (dx / a).powi(2) + (dy / b).powi(2) > 1.0 {
            return 0.03;
        }
        let stripes = striation * (0.35 * (dx * c + dy * s)).sin();
        let r2 = dx * dx + dy * dy;
        let base = if r2 <= core_radius * core_radius { 0.38 } else { 0.82 };
        base + 0.08 * stripes
    })
    .expect("phantom dimensions are fixed")
}

pub fn descriptors_json(core_radius: f64, striation: f64, angle_deg: f64) -> Result<String, String> {
    let img = phantom(core_radius.max(0.0), striation.clamp(0.0, 1.0), angle_deg);
    let (fv, mask) = describe_image(&img).map_err(|e| e.to_string())?;
    let out = Descriptors {
        width: img.width(),
        height: img.height(),
        pixels: img.data().iter().map(|v| (v * 255.0).round() as u8).collect(),
        mask: mask.as_slice().iter().map(|&m| u8::from(m)).collect(),
        features: FEATURE_NAMES.iter().copied().zip(fv.0).collect(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Landscape {
    /// Weight on the boosted model; the MLP gets the rest.
    weights: Vec<f64>,
    f1: Vec<f64>,
    gbdt_f1: f64,
    mlp_f1: f64,
    optimum_weight: f64,
    optimum_f1: f64,
}

/// Out-of-fold probabilities for small boosted and MLP models on a
/// synthetic benchmark, then weighted F1 of the fusion over the weight
/// simplex alongside the Nelder–Mead optimum.
pub fn landscape_json(n_per_class: usize, separation: f64, root: u64) -> Result<String, String> {
    let err = |e: neatboost::Error| e.to_string();
    let ds = synthesize_dataset(n_per_class.clamp(10, 150), separation, root).map_err(err)?;
    let folds = stratified_kfold(&ds.y, 3, seed::derive(root, "folds", &[])).map_err(err)?;
    let gb = cross_val_predict(
        &ds.x,
        &ds.y,
        N_CLASSES,
        &folds,
        Some(5),
        seed::derive(root, "gbdt", &[]),
        |tx, ty, vx, f| {
            let cfg = GbdtConfig {
                n_estimators: 40,
                seed: seed::derive(root, "gbdt-fit", &[f as u64]),
                ..GbdtConfig::default()
            };
            gbdt::predict_proba(&gbdt::fit_with_classes(tx, ty, N_CLASSES, &cfg)?, vx)
        },
    )
    .map_err(err)?;
    let nn = cross_val_predict(
        &ds.x,
        &ds.y,
        N_CLASSES,
        &folds,
        Some(5),
        seed::derive(root, "mlp", &[]),
        |tx, ty, vx, f| {
            let cfg = MlpConfig {
                hidden_size: 16,
                epochs: 60,
                seed: seed::derive(root, "mlp-fit", &[f as u64]),
                ..MlpConfig::default()
            };
            mlp::predict_proba(&mlp::train_with_classes(tx, ty, N_CLASSES, &cfg)?, vx)
        },
    )
    .map_err(err)?;
    let probs: [ProbabilityMatrix; 2] = [gb.probs, nn.probs];
    let score = |p: &ProbabilityMatrix| weighted_f1(&ds.y, &p.argmax_rows(), N_CLASSES);
    let mut weights = Vec::with_capacity(LANDSCAPE_STEPS + 1);
    let mut f1 = Vec::with_capacity(LANDSCAPE_STEPS + 1);
    for i in 0..=LANDSCAPE_STEPS {
        let w = i as f64 / LANDSCAPE_STEPS as f64;
        let (_, labels) = fuse(&probs, &EnsembleWeights::new(vec![w, 1.0 - w]).map_err(err)?).map_err(err)?;
        weights.push(w);
        f1.push(weighted_f1(&ds.y, &labels, N_CLASSES));
    }
    let fit = optimize_weights(&probs, &ds.y).map_err(err)?;
    let out = Landscape {
        weights,
        f1,
        gbdt_f1: score(&probs[0]),
        mlp_f1: score(&probs[1]),
        optimum_weight: fit.weights.as_slice()[0],
        optimum_f1: fit.objective,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Scatter {
    classes: [&'static str; 3],
    /// `[ld1, ld2, class]` per sample.
    points: Vec<[f64; 3]>,
    explained_variance_ratio: Vec<f64>,
    /// Three strongest features by ANOVA F.
    top_features: Vec<(&'static str, f64)>,
}

pub fn scatter_json(n_per_class: usize, separation: f64, root: u64) -> Result<String, String> {
    let err = |e: neatboost::Error| e.to_string();
    let ds = synthesize_dataset(n_per_class.clamp(5, 500), separation, root).map_err(err)?;
    let lda = lda_project(&ds.x, &ds.y, 2).map_err(err)?;
    let points = (0..ds.len())
        .map(|i| {
            let r = lda.coordinates.row(i);
            [r[0], r.get(1).copied().unwrap_or(0.0), ds.y[i] as f64]
        })
        .collect();
    let mut anova = anova_table(&ds.x, &ds.y).map_err(err)?;
    anova.sort_by(|a, b| b.f.total_cmp(&a.f).then(a.feature.cmp(&b.feature)));
    let out = Scatter {
        classes: CLASS_NAMES,
        points,
        explained_variance_ratio: lda.explained_variance_ratio,
        top_features: anova.iter().take(3).map(|a| (FEATURE_NAMES[a.feature], a.f)).collect(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

/// Descriptors of a phantom fillet with the given dense-core radius (pixels),
/// striation strength (0..1) and striation angle (degrees).
#[wasm_bindgen]
pub fn describe_phantom(core_radius: f64, striation: f64, angle_deg: f64) -> Result<String, JsValue> {
    descriptors_json(core_radius, striation, angle_deg).map_err(|e| JsValue::from_str(&e))
}

/// Weighted F1 of the two-model fusion as the boosted-model weight sweeps 0..1.
#[wasm_bindgen]
pub fn fusion_landscape(n_per_class: usize, separation: f64, seed: u32) -> Result<String, JsValue> {
    landscape_json(n_per_class, separation, u64::from(seed)).map_err(|e| JsValue::from_str(&e))
}

/// Two-component LDA projection of a synthetic three-class table.
#[wasm_bindgen]
pub fn lda_scatter(n_per_class: usize, separation: f64, seed: u32) -> Result<String, JsValue> {
    scatter_json(n_per_class, separation, u64::from(seed)).map_err(|e| JsValue::from_str(&e))
}
