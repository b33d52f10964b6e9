use std::collections::VecDeque;

use super::{FilletMask, ImageGray};
use crate::error::{Error, Result};

const OTSU_BINS: usize = 256;

/// Otsu split of a 256-bin histogram spanning `[lo, hi]`.
///
/// Values whose bin is `<= bin` form the dark class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtsuThreshold {
    pub bin: usize,
    pub lo: f64,
    pub hi: f64,
    pub between_variance: f64,
}

impl OtsuThreshold {
    pub fn is_dark(&self, v: f64) -> bool {
        otsu_bin(v, self.lo, self.hi) <= self.bin
    }

    /// Upper edge of the dark class on the intensity scale.
    pub fn value(&self) -> f64 {
        self.lo + (self.hi - self.lo) * (self.bin + 1) as f64 / OTSU_BINS as f64
    }
}

#[inline]
pub fn otsu_bin(v: f64, lo: f64, hi: f64) -> usize {
    let t = (v - lo) / (hi - lo);
    ((t * OTSU_BINS as f64).floor().max(0.0) as usize).min(OTSU_BINS - 1)
}

/// Otsu threshold over `values`, histogrammed on their own min..max range.
///
/// Returns `None` when the values are constant or every split has zero
/// between-class variance.
pub fn otsu_threshold(values: impl Iterator<Item = f64> + Clone) -> Option<OtsuThreshold> {
    let (lo, hi) = values
        .clone()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !(hi > lo) {
        return None;
    }
    let mut hist = [0u64; OTSU_BINS];
    let mut total = 0u64;
    for v in values {
        hist[otsu_bin(v, lo, hi)] += 1;
        total += 1;
    }
    let total = total as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let mut best: Option<(usize, f64)> = None;
    for (t, &c) in hist.iter().enumerate().take(OTSU_BINS - 1) {
        w0 += c as f64;
        sum0 += t as f64 * c as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (sum_all - sum0) / w1;
        let var = (w0 / total) * (w1 / total) * (mu0 - mu1) * (mu0 - mu1);
        if best.is_none_or(|(_, b)| var > b) {
            best = Some((t, var));
        }
    }
    best.filter(|&(_, v)| v > 0.0)
        .map(|(bin, between_variance)| OtsuThreshold {
            bin,
            lo,
            hi,
            between_variance,
        })
}

const NEIGHBORS4: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

fn flood(mask: &[bool], width: usize, height: usize, start: usize, seen: &mut [bool], target: bool) -> Vec<usize> {
    let mut out = vec![start];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(p) = queue.pop_front() {
        let (x, y) = ((p % width) as isize, (p / width) as isize);
        for (dx, dy) in NEIGHBORS4 {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= width as isize || ny >= height as isize {
                continue;
            }
            let q = ny as usize * width + nx as usize;
            if !seen[q] && mask[q] == target {
                seen[q] = true;
                out.push(q);
                queue.push_back(q);
            }
        }
    }
    out
}

/// Largest 4-connected `true` component; ties go to the first in raster order.
pub fn largest_component(mask: &[bool], width: usize, height: usize) -> Vec<bool> {
    let mut seen = vec![false; mask.len()];
    let mut best: Vec<usize> = Vec::new();
    for p in 0..mask.len() {
        if mask[p] && !seen[p] {
            let comp = flood(mask, width, height, p, &mut seen, true);
            if comp.len() > best.len() {
                best = comp;
            }
        }
    }
    let mut out = vec![false; mask.len()];
    for p in best {
        out[p] = true;
    }
    out
}

/// Set every background pixel not 4-connected to the image border.
pub fn fill_holes(mask: &[bool], width: usize, height: usize) -> Vec<bool> {
    let mut seen = vec![false; mask.len()];
    let mut outside = vec![false; mask.len()];
    let border = (0..width)
        .flat_map(|x| [x, (height - 1) * width + x])
        .chain((0..height).flat_map(|y| [y * width, y * width + width - 1]));
    for p in border {
        if !mask[p] && !seen[p] {
            for q in flood(mask, width, height, p, &mut seen, false) {
                outside[q] = true;
            }
        }
    }
    outside.iter().map(|&o| !o).collect()
}

fn morph3(mask: &[bool], width: usize, height: usize, erode: bool) -> Vec<bool> {
    let mut out = vec![false; mask.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = erode;
            'win: for dy in -1isize..=1 {
                let yy = (y as isize + dy).clamp(0, height as isize - 1) as usize;
                for dx in -1isize..=1 {
                    let xx = (x as isize + dx).clamp(0, width as isize - 1) as usize;
                    let v = mask[yy * width + xx];
                    if erode && !v {
                        acc = false;
                        break 'win;
                    }
                    if !erode && v {
                        acc = true;
                        break 'win;
                    }
                }
            }
            out[y * width + x] = acc;
        }
    }
    out
}

/// 3x3 binary opening (erosion then dilation) with replicate borders.
pub fn binary_open(mask: &[bool], width: usize, height: usize) -> Vec<bool> {
    let eroded = morph3(mask, width, height, true);
    morph3(&eroded, width, height, false)
}

/// Segment the light-transmitting specimen from the background.
pub fn segment_fillet(img: &ImageGray) -> Result<FilletMask> {
    let th = otsu_threshold(img.data().iter().copied()).ok_or(Error::NoSpecimen)?;
    let (w, h) = (img.width(), img.height());
    let bright: Vec<bool> = img.data().iter().map(|&v| !th.is_dark(v)).collect();
    let comp = largest_component(&bright, w, h);
    if !comp.iter().any(|&m| m) {
        return Err(Error::NoSpecimen);
    }
    FilletMask::new(w, h, fill_holes(&comp, w, h))
}
