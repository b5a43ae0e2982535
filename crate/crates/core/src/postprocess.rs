//! Post-processing of a mean attention map into a saliency map:
//! reconstruction smoothing, histogram-driven truncation threshold,
//! gamma-style intensity adjustment, and grayscale hole fill.

use crate::error::{Error, Result};
use crate::morphology;
use crate::raster::{self, GrayField};

/// 256-level intensity histogram of an integer-valued `[0,255]` field.
#[derive(Debug, Clone)]
pub struct Histogram256 {
    counts: [u64; 256],
}

impl Histogram256 {
    pub fn from_field(field: &GrayField) -> Result<Self> {
        let mut counts = [0u64; 256];
        for &v in field.values() {
            if v.fract() != 0.0 || !(0.0..=255.0).contains(&v) {
                return Err(Error::Contract(format!(
                    "histogram input {v} is not an integer level in [0,255]"
                )));
            }
            counts[v as usize] += 1;
        }
        Ok(Self { counts })
    }

    #[inline]
    pub fn count(&self, level: usize) -> u64 {
        self.counts[level]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Saturation ratio and gamma of the intensity adjustment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjustParams {
    pub saturation_ratio: f64,
    pub gamma: f64,
}

impl AdjustParams {
    pub fn new(saturation_ratio: f64, gamma: f64) -> Result<Self> {
        if !(saturation_ratio > 0.0 && saturation_ratio <= 0.1) {
            return Err(Error::InvalidParam(format!(
                "saturation ratio {saturation_ratio} outside (0, 0.1]"
            )));
        }
        if gamma < 1.0 {
            return Err(Error::InvalidParam(format!("gamma {gamma} below 1")));
        }
        Ok(Self {
            saturation_ratio,
            gamma,
        })
    }
}

/// Smallest level `k` whose cumulative count reaches `(1 - ratio) * N`.
pub fn truncation_threshold(hist: &Histogram256, saturation_ratio: f64) -> u8 {
    let total = hist.total();
    debug_assert!(total >= 1);
    let needed = (1.0 - saturation_ratio) * total as f64;
    let mut cum = 0u64;
    for level in 0..256 {
        cum += hist.count(level);
        if cum as f64 >= needed {
            return level as u8;
        }
    }
    255
}

/// Intensity adjustment: clip at the truncation threshold, rescale to
/// `[0,1]`, and apply the gamma curve. All values at or above the threshold
/// map to exactly 1.
pub fn adjust(field: &GrayField, saturation_ratio: f64, gamma: f64) -> Result<GrayField> {
    let hist = Histogram256::from_field(field)?;
    let t_f = truncation_threshold(&hist, saturation_ratio) as f64;
    if t_f == 0.0 {
        return Ok(field.map((0.0, 1.0), |_| 1.0));
    }
    Ok(field.map((0.0, 1.0), |v| {
        if v >= t_f {
            1.0
        } else {
            (v / t_f).powf(gamma)
        }
    }))
}

/// Full post-processing of a mean attention map: normalize, smooth by
/// reconstruction, renormalize to integer levels, adjust, fill dark holes,
/// and quantize back to `[0,255]`.
pub fn post_process(
    mean_attention: &GrayField,
    omega_r: u32,
    saturation_ratio: f64,
    gamma: f64,
) -> Result<GrayField> {
    let unit = raster::normalize_minmax(mean_attention, (0.0, 1.0));
    if unit.is_constant() {
        let mut out = unit.map((0.0, 255.0), |_| 0.0);
        out.set_constant(true);
        return Ok(out);
    }
    let smoothed = morphology::smooth_by_reconstruction(&unit, omega_r);
    let renormalized = raster::normalize_minmax(&smoothed, (0.0, 255.0));
    if renormalized.is_constant() {
        // Smoothing erased all structure (nothing larger than the disk);
        // a contrast-free map must stay empty rather than saturate.
        let mut out = renormalized.map((0.0, 255.0), |_| 0.0);
        out.set_constant(true);
        return Ok(out);
    }
    let leveled = raster::round_values(&renormalized);
    let adjusted = adjust(&leveled, saturation_ratio, gamma)?;
    let filled = morphology::fill_holes_gray(&adjusted);
    raster::quantize_u8(&filled)
}
