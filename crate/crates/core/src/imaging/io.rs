use std::io::Cursor;
use std::path::Path;

use super::ImageGray;
use crate::error::{Error, Result};

/// Longer image side after preprocessing.
pub const MAX_SIDE: usize = 1024;

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Load a PGM (P2/P5) or grayscale PNG and scale intensities to `[0, 1]`.
pub fn load_grayscale(path: impl AsRef<Path>) -> Result<ImageGray> {
    let bytes = std::fs::read(path.as_ref())?;
    decode_grayscale(&bytes)
}

/// Decode an in-memory PGM or PNG.
pub fn decode_grayscale(bytes: &[u8]) -> Result<ImageGray> {
    if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else {
        Err(Error::UnsupportedFormat("expected PGM (P2/P5) or PNG".into()))
    }
}

/// Header tokenizer that skips whitespace and `#` comments.
struct PgmHeader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PgmHeader<'a> {
    fn token(&mut self) -> Option<&'a [u8]> {
        loop {
            match self.bytes.get(self.pos)? {
                b'#' => {
                    while *self.bytes.get(self.pos)? != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|c| !c.is_ascii_whitespace()) {
            self.pos += 1;
        }
        Some(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let tok = self
            .token()
            .ok_or_else(|| Error::UnsupportedFormat(format!("truncated PGM header ({what})")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::UnsupportedFormat(format!("bad PGM {what}")))
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<ImageGray> {
    let binary = &bytes[..2] == b"P5";
    let mut hdr = PgmHeader { bytes, pos: 2 };
    let width = hdr.number("width")?;
    let height = hdr.number("height")?;
    let maxval = hdr.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage { width, height });
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::UnsupportedFormat(format!("PGM maxval {maxval}")));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::UnsupportedFormat("PGM dimensions overflow".into()))?;
    let scale = maxval as f64;
    let mut data = Vec::with_capacity(n);
    if binary {
        // Exactly one whitespace byte separates maxval from the raster.
        let start = hdr.pos + 1;
        let bpp = if maxval < 256 { 1 } else { 2 };
        let raster = bytes
            .get(start..)
            .filter(|r| r.len() >= n * bpp)
            .ok_or_else(|| Error::UnsupportedFormat("truncated PGM raster".into()))?;
        for i in 0..n {
            let v = if bpp == 1 {
                usize::from(raster[i])
            } else {
                usize::from(u16::from_be_bytes([raster[2 * i], raster[2 * i + 1]]))
            };
            data.push(v.min(maxval) as f64 / scale);
        }
    } else {
        for _ in 0..n {
            let v = hdr.number("pixel")?;
            data.push(v.min(maxval) as f64 / scale);
        }
    }
    let bit_depth = if maxval < 256 { 8 } else { 16 };
    ImageGray::new(width, height, data, bit_depth)
}

fn decode_png(bytes: &[u8]) -> Result<ImageGray> {
    let bad = |e: png::DecodingError| Error::UnsupportedFormat(format!("PNG: {e}"));
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    // Sub-byte gray depths are widened to 8 bits.
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(bad)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::UnsupportedFormat("PNG too large".into()))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(bad)?;
    if info.color_type != png::ColorType::Grayscale {
        return Err(Error::UnsupportedFormat(format!(
            "PNG color type {:?}, expected grayscale",
            info.color_type
        )));
    }
    let (width, height) = (info.width as usize, info.height as usize);
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage { width, height });
    }
    let mut data = Vec::with_capacity(width * height);
    let depth = match info.bit_depth {
        png::BitDepth::Sixteen => {
            for row in buf.chunks(info.line_size).take(height) {
                for px in row.chunks_exact(2).take(width) {
                    data.push(f64::from(u16::from_be_bytes([px[0], px[1]])) / 65535.0);
                }
            }
            16
        }
        _ => {
            for row in buf.chunks(info.line_size).take(height) {
                data.extend(row.iter().take(width).map(|&v| f64::from(v) / 255.0));
            }
            8
        }
    };
    ImageGray::new(width, height, data, depth)
}

/// Area-averaging resample to `new_w x new_h`.
pub fn downscale_to(img: &ImageGray, new_w: usize, new_h: usize) -> Result<ImageGray> {
    if new_w == 0 || new_h == 0 {
        return Err(Error::EmptyImage {
            width: new_w,
            height: new_h,
        });
    }
    let (w, h) = (img.width(), img.height());
    let horizontal = box_weights(w, new_w);
    let vertical = box_weights(h, new_h);
    // Resample rows first, then columns.
    let mut tmp = vec![0.0; new_w * h];
    for y in 0..h {
        let row = &img.data()[y * w..(y + 1) * w];
        for (ox, taps) in horizontal.iter().enumerate() {
            tmp[y * new_w + ox] = taps.iter().map(|&(i, wt)| wt * row[i]).sum();
        }
    }
    let mut out = vec![0.0; new_w * new_h];
    for (oy, taps) in vertical.iter().enumerate() {
        for ox in 0..new_w {
            let v: f64 = taps.iter().map(|&(i, wt)| wt * tmp[i * new_w + ox]).sum();
            out[oy * new_w + ox] = v.clamp(0.0, 1.0);
        }
    }
    ImageGray::new(new_w, new_h, out, img.bit_depth())
}

/// For each output cell, the source cells it covers and their normalized overlap.
fn box_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    let ratio = src as f64 / dst as f64;
    (0..dst)
        .map(|o| {
            let lo = o as f64 * ratio;
            let hi = (o + 1) as f64 * ratio;
            let mut taps = Vec::new();
            let mut i = lo.floor() as usize;
            while (i as f64) < hi && i < src {
                let overlap = (hi.min(i as f64 + 1.0) - lo.max(i as f64)).max(0.0);
                if overlap > 0.0 {
                    taps.push((i, overlap / ratio));
                }
                i += 1;
            }
            taps
        })
        .collect()
}

/// Downscale so the longer side is at most [`MAX_SIDE`]; smaller images pass through.
pub fn prepare(img: &ImageGray) -> Result<ImageGray> {
    let longer = img.width().max(img.height());
    if longer <= MAX_SIDE {
        return Ok(img.clone());
    }
    let s = MAX_SIDE as f64 / longer as f64;
    let new_w = ((img.width() as f64 * s).round() as usize).max(1);
    let new_h = ((img.height() as f64 * s).round() as usize).max(1);
    downscale_to(img, new_w, new_h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn encode_png(width: u32, height: u32, depth: png::BitDepth, raw: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, width, height);
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(depth);
            let mut w = enc.write_header().unwrap();
            w.write_image_data(raw).unwrap();
        }
        out
    }

    #[test]
    fn ascii_pgm_scales_by_maxval() {
        let img = decode_grayscale(b"P2\n# comment\n2 2\n255\n0 255\n128 64\n").unwrap();
        assert_eq!((img.width(), img.height(), img.bit_depth()), (2, 2, 8));
        let expected = [0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0];
        for (a, b) in img.data().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((img.data()[2] - 0.50196).abs() < 1e-5);
        assert!((img.data()[3] - 0.25098).abs() < 1e-5);
    }

    #[test]
    fn binary_pgm_16_bit_full_scale() {
        let mut bytes = b"P5 2 1 65535\n".to_vec();
        bytes.extend_from_slice(&[0xff, 0xff, 0x00, 0x00]);
        let img = decode_grayscale(&bytes).unwrap();
        assert_eq!(img.bit_depth(), 16);
        assert_eq!(img.data(), &[1.0, 0.0]);
    }

    #[test]
    fn truncated_header_is_unsupported_format() {
        for bad in [&b"P2\n2"[..], b"P5 3", b"P2\n2 2\n255\n1 2 3"] {
            let err = decode_grayscale(bad).unwrap_err();
            assert!(err.to_string().contains("unsupported format"), "{err}");
        }
        let err = decode_grayscale(b"GIF89a").unwrap_err();
        assert!(matches!(err, Error::UnsupportedFormat(_)));
    }

    #[test]
    fn zero_dimension_is_rejected() {
        let err = decode_grayscale(b"P2 0 3 255\n").unwrap_err();
        assert!(matches!(err, Error::EmptyImage { .. }));
    }

    #[test]
    fn png_8_and_16_bit() {
        let png8 = encode_png(2, 1, png::BitDepth::Eight, &[0, 255]);
        assert_eq!(decode_grayscale(&png8).unwrap().data(), &[0.0, 1.0]);
        let png16 = encode_png(1, 2, png::BitDepth::Sixteen, &[0xff, 0xff, 0x80, 0x00]);
        let img = decode_grayscale(&png16).unwrap();
        assert_eq!(img.bit_depth(), 16);
        assert_eq!(img.data()[0], 1.0);
        assert!((img.data()[1] - 32768.0 / 65535.0).abs() < 1e-12);
    }

    #[test]
    fn area_average_preserves_mean() {
        let img = ImageGray::from_fn(9, 6, |x, y| ((x * 7 + y * 3) % 11) as f64 / 10.0).unwrap();
        let small = downscale_to(&img, 4, 3).unwrap();
        let mean = |d: &[f64]| d.iter().sum::<f64>() / d.len() as f64;
        assert!((mean(img.data()) - mean(small.data())).abs() < 1e-12);
    }

    #[test]
    fn prepare_caps_longer_side() {
        let img = ImageGray::from_fn(2048, 1000, |x, _| (x % 2) as f64).unwrap();
        let p = prepare(&img).unwrap();
        assert_eq!((p.width(), p.height()), (1024, 500));
        assert!(p.data().iter().all(|v| (v - 0.5).abs() < 1e-12));
    }
}
