use serde::{Deserialize, Serialize};

use super::filters::{gabor_energy, local_variance, orientation_histogram, sobel_gradients, GaborOrientation};
use super::segment::{binary_open, otsu_threshold};
use super::{io, segment, FilletMask, ImageGray};
use crate::error::{Error, Result};
use crate::N_FEATURES;

/// Sobel magnitude above which a pixel counts as an edge.
pub const EDGE_THRESHOLD: f64 = 0.1;

pub const LOCAL_VARIANCE_WINDOW: usize = 7;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "grad_mag_mean",
    "grad_mag_std",
    "mean_local_variance",
    "std_local_variance",
    "edge_density",
    "edge_pixel_count",
    "orient_hist_1",
    "orient_hist_2",
    "orient_hist_3",
    "orient_hist_4",
    "orient_hist_5",
    "gabor_0",
    "gabor_45",
    "gabor_90",
    "gabor_135",
    "percentage_dense_area",
];

/// The 16 structural descriptors of one specimen, in [`FEATURE_NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn orientation_bins(&self) -> &[f64] {
        &self.0[6..11]
    }

    pub fn gabor(&self) -> &[f64] {
        &self.0[11..15]
    }

    pub fn dense_area(&self) -> f64 {
        self.0[15]
    }
}

impl TryFrom<&[f64]> for FeatureVector {
    type Error = Error;

    fn try_from(v: &[f64]) -> Result<Self> {
        let arr: [f64; N_FEATURES] = v.try_into().map_err(|_| Error::DimensionMismatch {
            expected: N_FEATURES,
            actual: v.len(),
        })?;
        Ok(Self(arr))
    }
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    (mean, var.sqrt())
}

/// Share of mask pixels that are darker than the in-mask Otsu threshold and
/// survive a 3x3 opening. Degenerate (constant) regions give 0.
pub fn dense_area_fraction(img: &ImageGray, mask: &FilletMask) -> Result<f64> {
    mask.check_matches(img)?;
    let inside = mask.count();
    if inside == 0 {
        return Ok(0.0);
    }
    let values = img
        .data()
        .iter()
        .zip(mask.as_slice())
        .filter(|(_, &m)| m)
        .map(|(&v, _)| v);
    let Some(th) = otsu_threshold(values) else {
        return Ok(0.0);
    };
    let dense: Vec<bool> = img
        .data()
        .iter()
        .zip(mask.as_slice())
        .map(|(&v, &m)| m && th.is_dark(v))
        .collect();
    let opened = binary_open(&dense, img.width(), img.height());
    let kept = opened.iter().filter(|&&d| d).count();
    Ok(kept as f64 / inside as f64)
}

/// Compute all 16 descriptors for a segmented specimen.
pub fn extract_descriptors(img: &ImageGray, mask: &FilletMask) -> Result<FeatureVector> {
    mask.check_matches(img)?;
    if mask.count() == 0 {
        return Err(Error::NoSpecimen);
    }
    let inside = mask.as_slice();
    let masked = |v: &[f64]| -> Vec<f64> { v.iter().zip(inside).filter(|(_, &m)| m).map(|(&x, _)| x).collect() };

    let grad = sobel_gradients(img, mask)?;
    let mags = masked(&grad.magnitude);
    let (grad_mean, grad_std) = mean_std(mags.iter().copied());

    let lv = masked(&local_variance(img, LOCAL_VARIANCE_WINDOW));
    let (lv_mean, lv_std) = mean_std(lv.iter().copied());

    let edges = mags.iter().filter(|&&m| m > EDGE_THRESHOLD).count();
    let edge_density = edges as f64 / mags.len() as f64;

    let hist = orientation_histogram(&grad, mask);

    let mut out = [0.0; N_FEATURES];
    out[0] = grad_mean;
    out[1] = grad_std;
    out[2] = lv_mean;
    out[3] = lv_std;
    out[4] = edge_density;
    out[5] = edges as f64;
    out[6..11].copy_from_slice(&hist);
    for (slot, o) in out[11..15].iter_mut().zip(GaborOrientation::ALL) {
        *slot = gabor_energy(img, mask, o)?;
    }
    out[15] = dense_area_fraction(img, mask)?;
    debug_assert!(out.iter().all(|v| v.is_finite()));
    Ok(FeatureVector(out))
}

/// Downscale, segment and describe one raw image.
pub fn describe_image(img: &ImageGray) -> Result<(FeatureVector, FilletMask)> {
    let img = io::prepare(img)?;
    let mask = segment::segment_fillet(&img)?;
    let fv = extract_descriptors(&img, &mask)?;
    Ok((fv, mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::segment_fillet;

    fn dense_core_phantom() -> (ImageGray, f64) {
        let (w, h) = (160usize, 120usize);
        let (cx, cy) = (80.0, 60.0);
        let (a, b, r) = (60.0, 40.0, 15.0);
        let img = ImageGray::from_fn(w, h, |x, y| {
            let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
            if dx * dx + dy * dy <= r * r {
                0.35
            } else if (dx / a).powi(2) + (dy / b).powi(2) <= 1.0 {
                0.85
            } else {
                0.02
            }
        })
        .unwrap();
        (img, (r * r) / (a * b))
    }

    #[test]
    fn constant_specimen_has_vanishing_texture() {
        let img = ImageGray::from_fn(40, 40, |_, _| 0.6).unwrap();
        let fv = extract_descriptors(&img, &FilletMask::full(&img)).unwrap();
        for (i, v) in fv.0.iter().enumerate() {
            assert!(v.abs() < 1e-9, "feature {i} = {v}");
        }
    }

    #[test]
    fn dense_area_counting() {
        // Left quarter dark as one solid block.
        let img = ImageGray::from_fn(40, 40, |x, _| if x < 10 { 0.2 } else { 0.8 }).unwrap();
        let f = dense_area_fraction(&img, &FilletMask::full(&img)).unwrap();
        assert!((f - 0.25).abs() < 0.01, "{f}");
    }

    #[test]
    fn dense_area_ignores_isolated_pixels() {
        let img = ImageGray::from_fn(40, 40, |x, y| if x % 4 == 1 && y % 4 == 1 { 0.2 } else { 0.8 }).unwrap();
        assert_eq!(dense_area_fraction(&img, &FilletMask::full(&img)).unwrap(), 0.0);
        let flat = ImageGray::from_fn(10, 10, |_, _| 0.9).unwrap();
        assert_eq!(dense_area_fraction(&flat, &FilletMask::full(&flat)).unwrap(), 0.0);
    }

    #[test]
    fn dense_area_affine_invariant() {
        let (img, _) = dense_core_phantom();
        let mask = segment_fillet(&img).unwrap();
        let base = dense_area_fraction(&img, &mask).unwrap();
        for (a, b) in [(0.5, 0.1), (0.9, 0.05), (1.1, -0.01)] {
            let f = dense_area_fraction(&img.map_affine(a, b), &mask).unwrap();
            assert_eq!(f, base);
        }
    }

    #[test]
    fn dense_core_phantom_area_ratio() {
        let (img, ratio) = dense_core_phantom();
        let mask = segment_fillet(&img).unwrap();
        let fv = extract_descriptors(&img, &mask).unwrap();
        assert!((fv.dense_area() - ratio).abs() < 0.02, "{} vs {ratio}", fv.dense_area());
        let bins: f64 = fv.orientation_bins().iter().sum();
        assert!((bins - 1.0).abs() < 1e-9);
        assert!(fv.0.iter().all(|v| v.is_finite()));
        assert!((0.0..=1.0).contains(&fv.0[4]));
    }

    #[test]
    fn extraction_is_bit_exact() {
        let (img, _) = dense_core_phantom();
        let (a, ma) = describe_image(&img).unwrap();
        let (b, mb) = describe_image(&img).unwrap();
        assert_eq!(ma, mb);
        assert_eq!(a.0.map(f64::to_bits), b.0.map(f64::to_bits),);
    }

    #[test]
    fn empty_mask_is_rejected() {
        let img = ImageGray::from_fn(5, 5, |x, _| x as f64 / 4.0).unwrap();
        let mask = FilletMask::new(5, 5, vec![false; 25]).unwrap();
        assert!(extract_descriptors(&img, &mask).is_err());
    }
}
