//! Grayscale image handling and the 16 structural descriptors.

mod descriptors;
mod filters;
mod io;
mod segment;

pub use descriptors::{
    dense_area_fraction, describe_image, extract_descriptors, FeatureVector, EDGE_THRESHOLD, FEATURE_NAMES,
    LOCAL_VARIANCE_WINDOW,
};
pub use filters::{
    gabor_energy, gabor_kernel, local_variance, orientation_histogram, sobel_gradients, GaborOrientation, GradientMaps,
    GABOR_GAMMA, GABOR_SIGMA, GABOR_SIZE, GABOR_WAVELENGTH, HISTOGRAM_BINS,
};
pub use io::{decode_grayscale, downscale_to, load_grayscale, prepare, MAX_SIDE};
pub use segment::{
    binary_open, fill_holes, largest_component, otsu_bin, otsu_threshold, segment_fillet, OtsuThreshold,
};

use crate::error::{Error, Result};

/// Row-major grayscale image with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGray {
    width: usize,
    height: usize,
    data: Vec<f64>,
    bit_depth: u8,
}

impl ImageGray {
    pub fn new(width: usize, height: usize, data: Vec<f64>, bit_depth: u8) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        if data.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: width * height,
                actual: data.len(),
            });
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidData(format!("intensity {v} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            data,
            bit_depth,
        })
    }

    /// Image built from a function of `(x, y)`; values are clamped to `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y).clamp(0.0, 1.0));
            }
        }
        Self::new(width, height, data, 8)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Pixel lookup with replicate padding.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.data[yc * self.width + xc]
    }

    /// Rotate 90° clockwise.
    pub fn rotate90(&self) -> ImageGray {
        let (w, h) = (self.width, self.height);
        let mut data = vec![0.0; w * h];
        // New image is h wide and w tall: (x', y') = (h - 1 - y, x).
        for y in 0..h {
            for x in 0..w {
                data[x * h + (h - 1 - y)] = self.data[y * w + x];
            }
        }
        ImageGray {
            width: h,
            height: w,
            data,
            bit_depth: self.bit_depth,
        }
    }

    /// Apply `v -> a * v + b`, clamped to `[0, 1]`.
    pub fn map_affine(&self, a: f64, b: f64) -> ImageGray {
        ImageGray {
            data: self.data.iter().map(|v| (a * v + b).clamp(0.0, 1.0)).collect(),
            ..self.clone()
        }
    }
}

/// Boolean specimen mask, `true` marks specimen pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilletMask {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl FilletMask {
    pub fn new(width: usize, height: usize, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: width * height,
                actual: mask.len(),
            });
        }
        Ok(Self { width, height, mask })
    }

    /// Mask covering every pixel of `img`.
    pub fn full(img: &ImageGray) -> Self {
        Self {
            width: img.width,
            height: img.height,
            mask: vec![true; img.width * img.height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.mask
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn rotate90(&self) -> FilletMask {
        let (w, h) = (self.width, self.height);
        let mut mask = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                mask[x * h + (h - 1 - y)] = self.mask[y * w + x];
            }
        }
        FilletMask {
            width: h,
            height: w,
            mask,
        }
    }

    fn check_matches(&self, img: &ImageGray) -> Result<()> {
        if self.width != img.width || self.height != img.height {
            return Err(Error::DimensionMismatch {
                expected: img.width * img.height,
                actual: self.width * self.height,
            });
        }
        Ok(())
    }
}
