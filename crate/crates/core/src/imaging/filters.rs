use std::f64::consts::PI;

use super::{FilletMask, ImageGray};
use crate::error::{Error, Result};

pub const HISTOGRAM_BINS: usize = 5;

pub const GABOR_WAVELENGTH: f64 = 8.0;
pub const GABOR_SIGMA: f64 = 4.0;
pub const GABOR_GAMMA: f64 = 0.5;
pub const GABOR_SIZE: usize = 21;

/// Per-pixel Sobel magnitude and orientation folded into `[0, pi)`.
#[derive(Debug, Clone)]
pub struct GradientMaps {
    pub width: usize,
    pub height: usize,
    pub magnitude: Vec<f64>,
    pub orientation: Vec<f64>,
}

pub fn sobel_gradients(img: &ImageGray, mask: &FilletMask) -> Result<GradientMaps> {
    mask.check_matches(img)?;
    let (w, h) = (img.width(), img.height());
    let mut magnitude = vec![0.0; w * h];
    let mut orientation = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let p = |dx: isize, dy: isize| img.get_clamped(x + dx, y + dy);
            let gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            let i = y as usize * w + x as usize;
            magnitude[i] = (gx * gx + gy * gy).sqrt();
            let mut theta = gy.atan2(gx);
            if theta < 0.0 {
                theta += PI;
            }
            if theta >= PI {
                theta -= PI;
            }
            orientation[i] = theta;
        }
    }
    Ok(GradientMaps {
        width: w,
        height: h,
        magnitude,
        orientation,
    })
}

/// Magnitude-weighted, L1-normalized orientation histogram over mask pixels.
pub fn orientation_histogram(grad: &GradientMaps, mask: &FilletMask) -> [f64; HISTOGRAM_BINS] {
    let mut bins = [0.0; HISTOGRAM_BINS];
    let width = PI / HISTOGRAM_BINS as f64;
    for (i, &inside) in mask.as_slice().iter().enumerate() {
        if !inside {
            continue;
        }
        let b = ((grad.orientation[i] / width).floor() as usize).min(HISTOGRAM_BINS - 1);
        bins[b] += grad.magnitude[i];
    }
    let total: f64 = bins.iter().sum();
    if total > 0.0 {
        bins.iter_mut().for_each(|b| *b /= total);
    }
    bins
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaborOrientation {
    D0,
    D45,
    D90,
    D135,
}

impl GaborOrientation {
    pub const ALL: [GaborOrientation; 4] = [Self::D0, Self::D45, Self::D90, Self::D135];

    pub fn degrees(self) -> u32 {
        match self {
            Self::D0 => 0,
            Self::D45 => 45,
            Self::D90 => 90,
            Self::D135 => 135,
        }
    }
}

impl TryFrom<u32> for GaborOrientation {
    type Error = Error;

    fn try_from(deg: u32) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|o| o.degrees() == deg)
            .ok_or_else(|| Error::InvalidConfig(format!("Gabor orientation {deg} not in 0/45/90/135")))
    }
}

/// Real, zero-mean Gabor kernel, `GABOR_SIZE` squared, row-major.
pub fn gabor_kernel(orientation: GaborOrientation) -> Vec<f64> {
    let theta = f64::from(orientation.degrees()).to_radians();
    let (s, c) = theta.sin_cos();
    let r = (GABOR_SIZE / 2) as isize;
    let mut k = Vec::with_capacity(GABOR_SIZE * GABOR_SIZE);
    for dy in -r..=r {
        for dx in -r..=r {
            let (x, y) = (dx as f64, dy as f64);
            let xr = x * c + y * s;
            let yr = -x * s + y * c;
            let envelope = (-(xr * xr + GABOR_GAMMA * GABOR_GAMMA * yr * yr) / (2.0 * GABOR_SIGMA * GABOR_SIGMA)).exp();
            k.push(envelope * (2.0 * PI * xr / GABOR_WAVELENGTH).cos());
        }
    }
    let mean = k.iter().sum::<f64>() / k.len() as f64;
    k.iter_mut().for_each(|v| *v -= mean);
    k
}

/// Mean absolute Gabor response over mask pixels.
pub fn gabor_energy(img: &ImageGray, mask: &FilletMask, orientation: GaborOrientation) -> Result<f64> {
    mask.check_matches(img)?;
    let kernel = gabor_kernel(orientation);
    let r = (GABOR_SIZE / 2) as isize;
    let (w, h) = (img.width() as isize, img.height() as isize);
    let mut total = 0.0;
    let mut count = 0usize;
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x as usize, y as usize) {
                continue;
            }
            let mut acc = 0.0;
            let interior = x >= r && y >= r && x + r < w && y + r < h;
            for (ki, dy) in (-r..=r).enumerate() {
                let krow = &kernel[ki * GABOR_SIZE..(ki + 1) * GABOR_SIZE];
                if interior {
                    let start = ((y + dy) * w + x - r) as usize;
                    let row = &img.data()[start..start + GABOR_SIZE];
                    acc += krow.iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
                } else {
                    for (kj, dx) in (-r..=r).enumerate() {
                        acc += krow[kj] * img.get_clamped(x + dx, y + dy);
                    }
                }
            }
            total += acc.abs();
            count += 1;
        }
    }
    Ok(if count == 0 { 0.0 } else { total / count as f64 })
}

/// Population variance in a `window x window` neighbourhood of every pixel.
pub fn local_variance(img: &ImageGray, window: usize) -> Vec<f64> {
    let r = (window / 2) as isize;
    let n = (2 * r + 1).pow(2) as f64;
    let (w, h) = (img.width() as isize, img.height() as isize);
    let mut out = Vec::with_capacity(img.data().len());
    let mut buf = Vec::with_capacity(n as usize);
    for y in 0..h {
        for x in 0..w {
            buf.clear();
            for dy in -r..=r {
                for dx in -r..=r {
                    buf.push(img.get_clamped(x + dx, y + dy));
                }
            }
            let mean = buf.iter().sum::<f64>() / n;
            out.push(buf.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n);
        }
    }
    out
}
