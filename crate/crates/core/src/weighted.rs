//! Global color cues: contrast-based weighting coefficients, the weighted
//! mean attention map, and its post-processed saliency map.

use crate::attention::MasterAttentionMap;
use crate::colorname::{ColorNameHistogram, ColorPrototypes, NUM_COLOR_NAMES};
use crate::error::{Error, Result};
use crate::postprocess;
use crate::raster::{normalize_minmax, BoolMap, GrayField};

/// Per-name contrast weights; zero for color names absent from the image.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastWeights {
    values: [f64; NUM_COLOR_NAMES],
}

impl ContrastWeights {
    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64; NUM_COLOR_NAMES] {
        &self.values
    }
}

/// Weight of each color name: its squared-distance contrast to every other
/// name, frequency-weighted; names absent from the image get weight 0.
pub fn contrast_weights(hist: &ColorNameHistogram, protos: &ColorPrototypes) -> ContrastWeights {
    let mut values = [0.0; NUM_COLOR_NAMES];
    for (i, w) in values.iter_mut().enumerate() {
        if hist.freq(i) == 0.0 {
            continue;
        }
        let ci = protos.rgb(i);
        let mut sum = 0.0;
        for j in 0..NUM_COLOR_NAMES {
            let cj = protos.rgb(j);
            let d2 = (ci[0] - cj[0]).powi(2) + (ci[1] - cj[1]).powi(2) + (ci[2] - cj[2]).powi(2);
            sum += hist.freq(j) * d2;
        }
        *w = sum;
    }
    ContrastWeights { values }
}

/// Weighted mean attention map: each master map is masked by its name's
/// frequency-scaled indicator, min-max normalized, scaled by the contrast
/// weight, and summed; the sum is min-max normalized to `[0,1]`.
pub fn weighted_mean_attention(
    maps: &[MasterAttentionMap],
    indicators: &[BoolMap; NUM_COLOR_NAMES],
    weights: &ContrastWeights,
    hist: &ColorNameHistogram,
) -> Result<GrayField> {
    let first = &maps[0].field;
    let (w, h) = (first.width(), first.height());
    for m in maps {
        if (m.field.width(), m.field.height()) != (w, h) {
            return Err(Error::DimensionMismatch {
                expected: (w, h),
                found: (m.field.width(), m.field.height()),
            });
        }
    }
    for ind in indicators.iter() {
        if (ind.width(), ind.height()) != (w, h) {
            return Err(Error::DimensionMismatch {
                expected: (w, h),
                found: (ind.width(), ind.height()),
            });
        }
    }

    let n = (w as usize) * (h as usize);
    let weight_sum: f64 = weights.values().iter().sum();
    let mut acc = vec![0.0f64; n];
    let mut term = vec![0.0f64; n];
    for (i, map) in maps.iter().enumerate() {
        let w_i = weights.get(i);
        if w_i == 0.0 {
            continue;
        }
        let f_i = hist.freq(i);
        let mask = indicators[i].to_bytes();
        for (t, (v, m)) in term
            .iter_mut()
            .zip(map.field.values().iter().zip(mask.iter()))
        {
            *t = f_i * (*m as f64) * v;
        }
        let normalized = normalize_minmax(
            &GrayField::from_values(w, h, term.clone(), (0.0, 1.0)),
            (0.0, 1.0),
        );
        for (a, v) in acc.iter_mut().zip(normalized.values()) {
            *a += w_i * v;
        }
    }

    let raw = GrayField::from_values(w, h, acc, (0.0, weight_sum.max(1.0)));
    Ok(normalize_minmax(&raw, (0.0, 1.0)))
}

/// Post-processes the weighted mean attention map with the same pipeline as
/// the surroundedness saliency map.
pub fn weighted_saliency(
    weighted_mean: &GrayField,
    omega_r: u32,
    saturation_ratio: f64,
    gamma: f64,
) -> Result<GrayField> {
    postprocess::post_process(weighted_mean, omega_r, saturation_ratio, gamma)
}
