//! Pixel-buffer types, image decode/encode, resizing, and range normalization.
//!
//! Everything downstream works on three buffer types: [`Rgb8Image`] for decoded
//! inputs, [`GrayField`] for real-valued maps, and [`BoolMap`] for binary masks.
//! All values are immutable after construction and safe to share across threads.

use crate::error::{Error, Result};
use std::io::Cursor;

/// 8-bit RGB raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rgb8Image {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl Rgb8Image {
    pub fn new(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Contract("image dimensions must be >= 1".into()));
        }
        if pixels.len() != (width as usize) * (height as usize) {
            return Err(Error::Contract(format!(
                "pixel buffer length {} does not match {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Self {
        let mut pixels = Vec::with_capacity((width as usize) * (height as usize));
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[(y as usize) * (self.width as usize) + (x as usize)]
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }
}

/// Real-valued map with a declared value range.
///
/// The `constant` flag marks fields produced by a degenerate min-max
/// normalization (all input values equal); such fields carry no contrast and
/// are skipped by the attention sweep.
#[derive(Debug, Clone)]
pub struct GrayField {
    width: u32,
    height: u32,
    values: Vec<f64>,
    range: (f64, f64),
    constant: bool,
}

impl GrayField {
    pub fn from_values(width: u32, height: u32, values: Vec<f64>, range: (f64, f64)) -> Self {
        assert_eq!(values.len(), (width as usize) * (height as usize));
        debug_assert!(values.iter().all(|v| *v >= range.0 && *v <= range.1));
        Self {
            width,
            height,
            values,
            range,
            constant: false,
        }
    }

    pub fn constant(width: u32, height: u32, value: f64, range: (f64, f64)) -> Self {
        Self {
            width,
            height,
            values: vec![value; (width as usize) * (height as usize)],
            range,
            constant: true,
        }
    }

    pub fn from_fn(
        width: u32,
        height: u32,
        range: (f64, f64),
        mut f: impl FnMut(u32, u32) -> f64,
    ) -> Self {
        let mut values = Vec::with_capacity((width as usize) * (height as usize));
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::from_values(width, height, values, range)
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[(y as usize) * (self.width as usize) + (x as usize)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub(crate) fn set_constant(&mut self, flag: bool) {
        self.constant = flag;
    }

    /// Actual (min, max) over the stored values.
    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Pointwise map; the caller supplies the new declared range.
    pub fn map(&self, range: (f64, f64), f: impl Fn(f64) -> f64) -> GrayField {
        let values = self.values.iter().map(|&v| f(v)).collect();
        GrayField::from_values(self.width, self.height, values, range)
    }
}

/// Bit-packed binary mask. Each row is stored as little-endian `u64` words
/// (bit `x % 64` of word `x / 64`); bits past `width` in the last word stay 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolMap {
    width: u32,
    height: u32,
    words_per_row: usize,
    words: Vec<u64>,
}

impl BoolMap {
    pub fn new(width: u32, height: u32) -> Self {
        let words_per_row = (width as usize).div_ceil(64);
        Self {
            width,
            height,
            words_per_row,
            words: vec![0u64; words_per_row * height as usize],
        }
    }

    pub fn filled(width: u32, height: u32, bit: bool) -> Self {
        let mut map = Self::new(width, height);
        if bit {
            for w in map.words.iter_mut() {
                *w = u64::MAX;
            }
            map.mask_tail();
        }
        map
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut map = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    map.set(x, y, true);
                }
            }
        }
        map
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        let row = &self.words[(y as usize) * self.words_per_row..];
        (row[(x as usize) / 64] >> (x % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, bit: bool) {
        let idx = (y as usize) * self.words_per_row + (x as usize) / 64;
        if bit {
            self.words[idx] |= 1u64 << (x % 64);
        } else {
            self.words[idx] &= !(1u64 << (x % 64));
        }
    }

    pub(crate) fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    pub(crate) fn row(&self, y: u32) -> &[u64] {
        let start = (y as usize) * self.words_per_row;
        &self.words[start..start + self.words_per_row]
    }

    pub(crate) fn row_mut(&mut self, y: u32) -> &mut [u64] {
        let start = (y as usize) * self.words_per_row;
        &mut self.words[start..start + self.words_per_row]
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    /// Mask for valid bits of the last word in a row.
    pub(crate) fn tail_mask(&self) -> u64 {
        let rem = (self.width as usize) % 64;
        if rem == 0 {
            u64::MAX
        } else {
            (1u64 << rem) - 1
        }
    }

    /// Clears the padding bits past `width` in every row.
    pub(crate) fn mask_tail(&mut self) {
        let mask = self.tail_mask();
        let wpr = self.words_per_row;
        for y in 0..self.height as usize {
            self.words[y * wpr + wpr - 1] &= mask;
        }
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    /// True if every set bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BoolMap) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    /// Expands to one byte per pixel (1 = foreground). Used by flood fills.
    pub(crate) fn to_bytes(&self) -> Vec<u8> {
        let w = self.width as usize;
        let mut out = vec![0u8; w * (self.height as usize)];
        for y in 0..self.height as usize {
            let row = &self.words[y * self.words_per_row..(y + 1) * self.words_per_row];
            let base = y * w;
            for (wi, &word) in row.iter().enumerate() {
                let mut m = word;
                while m != 0 {
                    let b = m.trailing_zeros() as usize;
                    out[base + wi * 64 + b] = 1;
                    m &= m - 1;
                }
            }
        }
        out
    }

    pub(crate) fn from_bytes(width: u32, height: u32, bytes: &[u8]) -> Self {
        let mut map = Self::new(width, height);
        let w = width as usize;
        for y in 0..height as usize {
            let row = map.row_mut(y as u32);
            for (wi, chunk) in bytes[y * w..(y + 1) * w].chunks(64).enumerate() {
                let mut word = 0u64;
                for (b, &v) in chunk.iter().enumerate() {
                    word |= ((v != 0) as u64) << b;
                }
                row[wi] = word;
            }
        }
        map
    }

    /// 0/1 view as a gray field.
    pub fn to_field(&self) -> GrayField {
        let mut values = vec![0.0; (self.width as usize) * (self.height as usize)];
        let w = self.width as usize;
        for y in 0..self.height as usize {
            let row = &self.words[y * self.words_per_row..(y + 1) * self.words_per_row];
            for x in 0..w {
                values[y * w + x] = ((row[x / 64] >> (x % 64)) & 1) as f64;
            }
        }
        GrayField::from_values(self.width, self.height, values, (0.0, 1.0))
    }
}

/// Decodes a PNG, JPEG, or BMP byte stream into an 8-bit RGB raster.
/// Grayscale sources are replicated across the three channels.
pub fn decode_image(bytes: &[u8]) -> Result<Rgb8Image> {
    let format = image::guess_format(bytes)
        .map(|f| format!("{f:?}"))
        .unwrap_or_else(|_| "unknown format".to_string());
    let dynamic =
        image::load_from_memory(bytes).map_err(|e| Error::Decode(format!("{format}: {e}")))?;
    let rgb = dynamic.to_rgb8();
    let (width, height) = rgb.dimensions();
    let pixels = rgb.pixels().map(|p| p.0).collect();
    Rgb8Image::new(width, height, pixels)
}

/// Encodes an integer-valued `[0,255]` field as a single-channel 8-bit PNG.
pub fn encode_gray_png(field: &GrayField) -> Result<Vec<u8>> {
    let mut data = Vec::with_capacity(field.values().len());
    for &v in field.values() {
        if !(0.0..=255.0).contains(&v) {
            return Err(Error::Contract(format!(
                "gray value {v} outside [0,255], cannot encode"
            )));
        }
        data.push(v.round() as u8);
    }
    let img = image::GrayImage::from_raw(field.width(), field.height(), data)
        .expect("buffer length checked above");
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png)
        .map_err(|e| Error::Decode(format!("png encode: {e}")))?;
    Ok(out.into_inner())
}

/// Channel-mean gray view of an RGB raster, exact for replicated-gray inputs.
pub fn to_gray_mean(img: &Rgb8Image) -> GrayField {
    GrayField::from_fn(img.width(), img.height(), (0.0, 255.0), |x, y| {
        let [r, g, b] = img.get(x, y);
        ((r as u32 + g as u32 + b as u32) / 3) as f64
    })
}

// Per-axis sample positions for center-aligned bilinear interpolation.
fn bilinear_axis(src: u32, dst: u32) -> Vec<(usize, usize, f64)> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let s = (i as f64 + 0.5) * scale - 0.5;
            let floor = s.floor();
            let i0 = (floor as i64).clamp(0, src as i64 - 1) as usize;
            let i1 = (floor as i64 + 1).clamp(0, src as i64 - 1) as usize;
            (i0, i1, s - floor)
        })
        .collect()
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// Resizes to `target` width with bilinear interpolation, preserving aspect
/// ratio (`height = round(h * target / w)`, at least 1).
pub fn resize_to_width(img: &Rgb8Image, target: u32) -> Result<Rgb8Image> {
    if target == 0 {
        return Err(Error::Contract("target width must be >= 1".into()));
    }
    if target == img.width() {
        return Ok(img.clone());
    }
    let new_h = ((img.height() as f64 * target as f64 / img.width() as f64).round() as u32).max(1);
    let xs = bilinear_axis(img.width(), target);
    let ys = bilinear_axis(img.height(), new_h);
    let out = Rgb8Image::from_fn(target, new_h, |x, y| {
        let (x0, x1, fx) = xs[x as usize];
        let (y0, y1, fy) = ys[y as usize];
        let mut px = [0u8; 3];
        for (c, out) in px.iter_mut().enumerate() {
            let sample =
                |ix: usize, iy: usize| img.pixels()[iy * img.width() as usize + ix][c] as f64;
            let top = lerp(sample(x0, y0), sample(x1, y0), fx);
            let bot = lerp(sample(x0, y1), sample(x1, y1), fx);
            *out = lerp(top, bot, fy).round().clamp(0.0, 255.0) as u8;
        }
        px
    });
    Ok(out)
}

/// Bilinear resample of a gray field to explicit dimensions.
pub fn resize_field(field: &GrayField, width: u32, height: u32) -> GrayField {
    if width == field.width() && height == field.height() {
        return field.clone();
    }
    let xs = bilinear_axis(field.width(), width);
    let ys = bilinear_axis(field.height(), height);
    let src_w = field.width() as usize;
    let values = field.values();
    GrayField::from_fn(width, height, field.range(), |x, y| {
        let (x0, x1, fx) = xs[x as usize];
        let (y0, y1, fy) = ys[y as usize];
        let top = lerp(values[y0 * src_w + x0], values[y0 * src_w + x1], fx);
        let bot = lerp(values[y1 * src_w + x0], values[y1 * src_w + x1], fx);
        lerp(top, bot, fy)
    })
}

/// Linear map of `[min(f), max(f)]` onto `out_range`. A constant input maps
/// to all-`lo` and the result is flagged constant.
pub fn normalize_minmax(field: &GrayField, out_range: (f64, f64)) -> GrayField {
    let (lo, hi) = out_range;
    let (min, max) = field.min_max();
    if min == max {
        return GrayField::constant(field.width(), field.height(), lo, out_range);
    }
    let span = max - min;
    field.map(out_range, |v| lo + (hi - lo) * ((v - min) / span))
}

/// Quantizes a `[0,1]` field to integer values in `[0,255]`, rounding half up.
pub fn quantize_u8(field: &GrayField) -> Result<GrayField> {
    let mut values = Vec::with_capacity(field.values().len());
    for &v in field.values() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Contract(format!(
                "quantize_u8 input {v} outside [0,1]"
            )));
        }
        values.push((255.0 * v).round());
    }
    Ok(GrayField::from_values(
        field.width(),
        field.height(),
        values,
        (0.0, 255.0),
    ))
}

/// Rounds an arbitrary-valued field to whole numbers (used before histogram
/// operations that assume integer levels).
pub fn round_values(field: &GrayField) -> GrayField {
    field.map(field.range(), |v| v.round())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn png_bytes(img: &image::DynamicImage) -> Vec<u8> {
        let mut out = Cursor::new(Vec::new());
        img.write_to(&mut out, image::ImageFormat::Png).unwrap();
        out.into_inner()
    }

    #[test]
    fn decode_rgb_png_identity() {
        let mut buf = image::RgbImage::new(1, 1);
        buf.put_pixel(0, 0, image::Rgb([255, 0, 0]));
        let bytes = png_bytes(&image::DynamicImage::ImageRgb8(buf));
        let img = decode_image(&bytes).unwrap();
        assert_eq!((img.width(), img.height()), (1, 1));
        assert_eq!(img.get(0, 0), [255, 0, 0]);
    }

    #[test]
    fn decode_gray_png_replicates_channels() {
        let mut buf = image::GrayImage::new(1, 1);
        buf.put_pixel(0, 0, image::Luma([128]));
        let bytes = png_bytes(&image::DynamicImage::ImageLuma8(buf));
        let img = decode_image(&bytes).unwrap();
        assert_eq!(img.get(0, 0), [128, 128, 128]);
    }

    #[test]
    fn decode_truncated_stream_fails() {
        let mut buf = image::RgbImage::new(8, 8);
        buf.put_pixel(0, 0, image::Rgb([1, 2, 3]));
        let mut bytes = png_bytes(&image::DynamicImage::ImageRgb8(buf));
        bytes.truncate(bytes.len() / 2);
        assert!(matches!(decode_image(&bytes), Err(Error::Decode(_))));
    }

    #[test]
    fn resize_identity_when_width_matches() {
        let img = Rgb8Image::from_fn(400, 300, |x, y| [(x % 256) as u8, (y % 256) as u8, 7]);
        let out = resize_to_width(&img, 400).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn resize_exact_halving() {
        let img = Rgb8Image::from_fn(800, 600, |_, _| [10, 20, 30]);
        let out = resize_to_width(&img, 400).unwrap();
        assert_eq!((out.width(), out.height()), (400, 300));
    }

    #[test]
    fn resize_uniform_color_stays_uniform() {
        let img = Rgb8Image::from_fn(350, 233, |_, _| [37, 119, 201]);
        let out = resize_to_width(&img, 400).unwrap();
        assert_eq!((out.width(), out.height()), (400, 266));
        assert!(out.pixels().iter().all(|p| *p == [37, 119, 201]));
    }

    #[test]
    fn resize_rejects_zero_width() {
        let img = Rgb8Image::from_fn(4, 4, |_, _| [1, 2, 3]);
        assert!(matches!(resize_to_width(&img, 0), Err(Error::Contract(_))));
    }

    #[test]
    fn resize_round_trip_restores_dimensions() {
        let img = Rgb8Image::from_fn(350, 233, |x, y| [(x ^ y) as u8, 0, 0]);
        let out = resize_to_width(&img, 400).unwrap();
        let back = resize_to_width(&out, 350).unwrap();
        assert_eq!((back.width(), back.height()), (350, 233));
    }

    #[test]
    fn normalize_affine_map() {
        let f = GrayField::from_values(3, 1, vec![0.0, 0.5, 1.0], (0.0, 1.0));
        let n = normalize_minmax(&f, (0.0, 255.0));
        assert_eq!(n.values(), &[0.0, 127.5, 255.0]);
        assert!(!n.is_constant());
    }

    #[test]
    fn normalize_constant_yields_lo() {
        let f = GrayField::from_values(2, 2, vec![0.7; 4], (0.0, 1.0));
        let n = normalize_minmax(&f, (0.0, 1.0));
        assert!(n.values().iter().all(|v| *v == 0.0));
        assert!(n.is_constant());
    }

    #[test]
    fn normalize_two_point_map() {
        let f = GrayField::from_values(2, 1, vec![2.0, 4.0], (0.0, 10.0));
        let n = normalize_minmax(&f, (0.0, 1.0));
        assert_eq!(n.values(), &[0.0, 1.0]);
    }

    #[test]
    fn normalize_hits_endpoints_exactly() {
        let f = GrayField::from_values(4, 1, vec![0.3, 0.9, 0.4, 0.55], (0.0, 1.0));
        let n = normalize_minmax(&f, (0.0, 255.0));
        let (lo, hi) = n.min_max();
        assert_eq!(lo, 0.0);
        assert_eq!(hi, 255.0);
    }

    #[test]
    fn quantize_endpoints_and_rounding() {
        let f = GrayField::from_values(4, 1, vec![0.0, 1.0, 0.5, 0.252], (0.0, 1.0));
        let q = quantize_u8(&f).unwrap();
        assert_eq!(q.values(), &[0.0, 255.0, 128.0, 64.0]);
    }

    #[test]
    fn quantize_rejects_out_of_range() {
        let f = GrayField::from_values(1, 1, vec![1.5], (0.0, 2.0));
        assert!(matches!(quantize_u8(&f), Err(Error::Contract(_))));
    }

    #[test]
    fn gray_png_is_single_channel_8bit() {
        let f = GrayField::from_fn(9, 5, (0.0, 255.0), |x, y| ((x * 31 + y * 7) % 256) as f64);
        let png = encode_gray_png(&f).unwrap();
        let decoded = image::load_from_memory(&png).unwrap();
        assert_eq!(decoded.color(), image::ColorType::L8);
        let back = decode_image(&png).unwrap();
        for y in 0..5 {
            for x in 0..9 {
                let [r, g, b] = back.get(x, y);
                assert_eq!(r as f64, f.get(x, y));
                assert_eq!(r, g);
                assert_eq!(g, b);
            }
        }
    }

    #[test]
    fn boolmap_bits_round_trip() {
        let m = BoolMap::from_fn(130, 3, |x, y| (x + y) % 7 == 0);
        let bytes = m.to_bytes();
        let back = BoolMap::from_bytes(130, 3, &bytes);
        assert_eq!(m, back);
        assert_eq!(m.count_ones(), bytes.iter().map(|b| *b as u64).sum::<u64>());
    }

    #[cfg(test)]
    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn quantize_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                let f = GrayField::from_values(2, 1, vec![lo, hi], (0.0, 1.0));
                let q = quantize_u8(&f).unwrap();
                prop_assert!(q.values()[0] <= q.values()[1]);
            }

            #[test]
            fn normalize_endpoints(vals in proptest::collection::vec(0.0f64..=1.0, 2..32)) {
                let n = vals.len() as u32;
                let f = GrayField::from_values(n, 1, vals.clone(), (0.0, 1.0));
                let out = normalize_minmax(&f, (0.0, 255.0));
                let (min, max) = f.min_max();
                if min < max {
                    let (lo, hi) = out.min_max();
                    prop_assert_eq!(lo, 0.0);
                    prop_assert_eq!(hi, 255.0);
                } else {
                    prop_assert!(out.is_constant());
                }
            }
        }
    }
}
