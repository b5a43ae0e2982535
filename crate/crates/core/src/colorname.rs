//! RGB to color name space conversion.
//!
//! A color name table maps every 8x8x8 RGB bin to a probability vector over
//! the eleven basic color terms. Pipeline I consumes the probabilistic
//! channels ([`ColorProbField`]); Pipeline II consumes the argmax index map
//! ([`ColorNameImage`]), its histogram, and the per-name indicator masks.

use crate::error::{Error, Result};
use crate::raster::{BoolMap, GrayField, Rgb8Image};
use std::path::Path;

/// Number of color names.
pub const NUM_COLOR_NAMES: usize = 11;

/// Number of 8x8x8 RGB bins in a lookup table.
pub const TABLE_ROWS: usize = 32768;

/// Row-sum tolerance accepted when validating a table.
const ROW_SUM_TOL: f64 = 1e-4;

/// The eleven basic color terms, in table column order.
pub const COLOR_TERMS: [&str; NUM_COLOR_NAMES] = [
    "black", "blue", "brown", "grey", "green", "orange", "pink", "purple", "red", "white", "yellow",
];

/// Prototype RGB triples for the eleven color terms, each channel in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorPrototypes {
    rgb: [[f64; 3]; NUM_COLOR_NAMES],
}

impl Default for ColorPrototypes {
    fn default() -> Self {
        Self {
            rgb: [
                [0.0, 0.0, 0.0],  // black
                [0.0, 0.0, 1.0],  // blue
                [0.5, 0.4, 0.25], // brown
                [0.5, 0.5, 0.5],  // grey
                [0.0, 1.0, 0.0],  // green
                [1.0, 0.8, 0.0],  // orange
                [1.0, 0.5, 1.0],  // pink
                [1.0, 0.0, 1.0],  // purple
                [1.0, 0.0, 0.0],  // red
                [1.0, 1.0, 1.0],  // white
                [1.0, 1.0, 0.0],  // yellow
            ],
        }
    }
}

impl ColorPrototypes {
    /// RGB triple of color name `i` (zero-based).
    #[inline]
    pub fn rgb(&self, i: usize) -> [f64; 3] {
        self.rgb[i]
    }

    /// 8-bit RGB of color name `i`, rounded to the nearest integer.
    pub fn rgb_u8(&self, i: usize) -> [u8; 3] {
        let c = self.rgb[i];
        [
            (c[0] * 255.0).round() as u8,
            (c[1] * 255.0).round() as u8,
            (c[2] * 255.0).round() as u8,
        ]
    }
}

/// 32768-row lookup table: one probability row per 8x8x8 RGB bin.
#[derive(Debug, Clone)]
pub struct ColorNameTable {
    rows: Vec<[f64; NUM_COLOR_NAMES]>,
}

/// Zero-based table row index of an 8-bit RGB triple.
#[inline]
pub fn table_index(r: u8, g: u8, b: u8) -> usize {
    (r as usize) / 8 + 32 * ((g as usize) / 8) + 1024 * ((b as usize) / 8)
}

impl ColorNameTable {
    /// Builds a table from raw rows, validating shape and row normalization.
    pub fn from_rows(rows: Vec<[f64; NUM_COLOR_NAMES]>) -> Result<Self> {
        if rows.len() != TABLE_ROWS {
            return Err(Error::TableRowCount { found: rows.len() });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.iter().any(|v| !v.is_finite() || *v < 0.0 || *v > 1.0) {
                return Err(Error::TableRow {
                    row: i,
                    reason: "entry outside [0,1]".into(),
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::TableRow {
                    row: i,
                    reason: format!("row not normalized (sum {sum})"),
                });
            }
        }
        Ok(Self { rows })
    }

    #[inline]
    pub fn row(&self, r: u8, g: u8, b: u8) -> &[f64; NUM_COLOR_NAMES] {
        &self.rows[table_index(r, g, b)]
    }

    /// Zero-based argmax of the row for an RGB triple; ties break low.
    #[inline]
    pub fn argmax(&self, r: u8, g: u8, b: u8) -> usize {
        let row = self.row(r, g, b);
        let mut best = 0;
        for (i, v) in row.iter().enumerate().skip(1) {
            if *v > row[best] {
                best = i;
            }
        }
        best
    }
}

/// Loads a table from a plain-text file: 32768 lines, 11 space- or
/// comma-separated decimals per line.
pub fn load_table(path: impl AsRef<Path>) -> Result<ColorNameTable> {
    let text = std::fs::read_to_string(path)?;
    parse_table(&text)
}

/// Parses table text (see [`load_table`] for the format).
pub fn parse_table(text: &str) -> Result<ColorNameTable> {
    let mut rows = Vec::with_capacity(TABLE_ROWS);
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut row = [0.0; NUM_COLOR_NAMES];
        let mut count = 0;
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            if count >= NUM_COLOR_NAMES {
                return Err(Error::TableRow {
                    row: lineno,
                    reason: "more than 11 values".into(),
                });
            }
            row[count] = tok.parse::<f64>().map_err(|_| Error::TableRow {
                row: lineno,
                reason: format!("unparseable value {tok:?}"),
            })?;
            count += 1;
        }
        if count != NUM_COLOR_NAMES {
            return Err(Error::TableRow {
                row: lineno,
                reason: format!("expected 11 values, found {count}"),
            });
        }
        rows.push(row);
    }
    ColorNameTable::from_rows(rows)
}

/// Builds the built-in substitute table: for each RGB bin center `p` (scaled
/// to `[0,1]^3`), `entry_i ∝ exp(-||p - c_i||^2 / τ)` with τ = 0.15,
/// normalized to sum 1.
pub fn fallback_table() -> ColorNameTable {
    const TAU: f64 = 0.15;
    let protos = ColorPrototypes::default();
    let mut rows = Vec::with_capacity(TABLE_ROWS);
    for bin in 0..TABLE_ROWS {
        let center = |k: usize| (8.0 * k as f64 + 3.5) / 255.0;
        let p = [
            center(bin % 32),
            center((bin / 32) % 32),
            center(bin / 1024),
        ];
        let mut row = [0.0; NUM_COLOR_NAMES];
        let mut sum = 0.0;
        for (i, v) in row.iter_mut().enumerate() {
            let c = protos.rgb(i);
            let d2 = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2);
            *v = (-d2 / TAU).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
        rows.push(row);
    }
    ColorNameTable { rows }
}

/// The eleven probabilistic color name channels of an image.
#[derive(Debug, Clone)]
pub struct ColorProbField {
    channels: Vec<GrayField>,
}

impl ColorProbField {
    #[inline]
    pub fn channel(&self, i: usize) -> &GrayField {
        &self.channels[i]
    }

    pub fn channels(&self) -> &[GrayField] {
        &self.channels
    }

    pub fn width(&self) -> u32 {
        self.channels[0].width()
    }

    pub fn height(&self) -> u32 {
        self.channels[0].height()
    }
}

/// Indexed map assigning each pixel its most probable color name (1..=11).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorNameImage {
    width: u32,
    height: u32,
    indices: Vec<u8>,
}

impl ColorNameImage {
    pub fn new(width: u32, height: u32, indices: Vec<u8>) -> Result<Self> {
        if indices.len() != (width as usize) * (height as usize) {
            return Err(Error::Contract("index buffer length mismatch".into()));
        }
        if indices.iter().any(|i| *i < 1 || *i > 11) {
            return Err(Error::Contract("color name index outside [1,11]".into()));
        }
        Ok(Self {
            width,
            height,
            indices,
        })
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    /// One-based color name index at a pixel.
    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.indices[(y as usize) * (self.width as usize) + (x as usize)]
    }

    pub fn indices(&self) -> &[u8] {
        &self.indices
    }
}

/// Relative frequencies of the eleven color names over an indexed map.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorNameHistogram {
    freqs: [f64; NUM_COLOR_NAMES],
}

impl ColorNameHistogram {
    pub fn from_freqs(freqs: [f64; NUM_COLOR_NAMES]) -> Result<Self> {
        if freqs.iter().any(|f| *f < 0.0) {
            return Err(Error::Contract("negative frequency".into()));
        }
        let sum: f64 = freqs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Contract(format!(
                "frequencies sum to {sum}, expected 1"
            )));
        }
        Ok(Self { freqs })
    }

    /// Frequency of color name `i` (zero-based).
    #[inline]
    pub fn freq(&self, i: usize) -> f64 {
        self.freqs[i]
    }

    pub fn freqs(&self) -> &[f64; NUM_COLOR_NAMES] {
        &self.freqs
    }
}

/// Converts an image to its eleven probabilistic color name channels.
pub fn to_prob_field(img: &Rgb8Image, table: &ColorNameTable) -> ColorProbField {
    let n = (img.width() as usize) * (img.height() as usize);
    let mut planes: Vec<Vec<f64>> = (0..NUM_COLOR_NAMES)
        .map(|_| Vec::with_capacity(n))
        .collect();
    for px in img.pixels() {
        let row = table.row(px[0], px[1], px[2]);
        for (i, plane) in planes.iter_mut().enumerate() {
            plane.push(row[i]);
        }
    }
    let channels = planes
        .into_iter()
        .map(|values| GrayField::from_values(img.width(), img.height(), values, (0.0, 1.0)))
        .collect();
    ColorProbField { channels }
}

/// Converts an image to its indexed color name map (argmax per pixel,
/// ties broken by the lowest index).
pub fn to_index_image(img: &Rgb8Image, table: &ColorNameTable) -> ColorNameImage {
    let indices = img
        .pixels()
        .iter()
        .map(|px| (table.argmax(px[0], px[1], px[2]) + 1) as u8)
        .collect();
    ColorNameImage {
        width: img.width(),
        height: img.height(),
        indices,
    }
}

/// Relative frequency of each color name in an indexed map.
pub fn histogram(map: &ColorNameImage) -> ColorNameHistogram {
    let mut counts = [0u64; NUM_COLOR_NAMES];
    for &i in map.indices() {
        counts[(i - 1) as usize] += 1;
    }
    let total = map.indices().len() as f64;
    let mut freqs = [0.0; NUM_COLOR_NAMES];
    for (f, c) in freqs.iter_mut().zip(&counts) {
        *f = *c as f64 / total;
    }
    ColorNameHistogram { freqs }
}

/// The eleven per-name indicator masks; exactly one is set at every pixel.
pub fn indicator_matrices(map: &ColorNameImage) -> [BoolMap; NUM_COLOR_NAMES] {
    let mut out: [BoolMap; NUM_COLOR_NAMES] =
        std::array::from_fn(|_| BoolMap::new(map.width(), map.height()));
    for y in 0..map.height() {
        for x in 0..map.width() {
            let i = (map.get(x, y) - 1) as usize;
            out[i].set(x, y, true);
        }
    }
    out
}
