//! Fusion of the two saliency maps and the end-to-end detection pipeline.

use crate::attention::{self, MasterAttentionMap, SweepConfig};
use crate::colorname::{self, ColorNameTable, ColorPrototypes};
use crate::error::{Error, Result};
use crate::morphology;
use crate::postprocess::{self, AdjustParams};
use crate::raster::{self, GrayField, Rgb8Image};
use crate::weighted;
use rayon::prelude::*;

/// Processing width every input is resampled to before detection.
pub const WORKING_WIDTH: u32 = 400;

/// The five tunables of the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSet {
    /// Sample step of the threshold sweep.
    pub delta: u32,
    /// Disk radius of the closing in the attention stage.
    pub omega_c: u32,
    /// Disk radius of the reconstruction smoothing.
    pub omega_r: u32,
    /// Saturation ratio of the intensity adjustment.
    pub theta_r: f64,
    /// Gamma of the intensity adjustment.
    pub theta_g: f64,
}

impl ParamSet {
    pub fn new(delta: u32, omega_c: u32, omega_r: u32, theta_r: f64, theta_g: f64) -> Result<Self> {
        let p = Self {
            delta,
            omega_c,
            omega_r,
            theta_r,
            theta_g,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta < 1 || self.delta > 255 {
            return Err(Error::InvalidParam(format!(
                "delta {} outside [1,255]",
                self.delta
            )));
        }
        if self.omega_c < 1 || self.omega_r < 1 {
            return Err(Error::InvalidParam(
                "omega_c and omega_r must be >= 1".into(),
            ));
        }
        AdjustParams::new(self.theta_r, self.theta_g)?;
        if self.theta_g > 3.0 {
            return Err(Error::InvalidParam(format!(
                "theta_g {} outside [1,3]",
                self.theta_g
            )));
        }
        Ok(())
    }

    /// Tuned for the ASD dataset.
    pub fn asd() -> Self {
        Self {
            delta: 8,
            omega_c: 11,
            omega_r: 13,
            theta_r: 0.04,
            theta_g: 1.8,
        }
    }

    /// Tuned for the ECSSD dataset.
    pub fn ecssd() -> Self {
        Self {
            delta: 16,
            omega_c: 9,
            omega_r: 17,
            theta_r: 0.04,
            theta_g: 2.2,
        }
    }

    /// Tuned for the ImgSal dataset.
    pub fn imgsal() -> Self {
        Self {
            delta: 32,
            omega_c: 18,
            omega_r: 9,
            theta_r: 0.003,
            theta_g: 2.0,
        }
    }

    /// Dataset-independent setting.
    pub fn common() -> Self {
        Self {
            delta: 8,
            omega_c: 14,
            omega_r: 14,
            theta_r: 0.02,
            theta_g: 1.5,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "asd" => Some(Self::asd()),
            "ecssd" => Some(Self::ecssd()),
            "imgsal" => Some(Self::imgsal()),
            "common" => Some(Self::common()),
            _ => None,
        }
    }
}

/// Clipped average of the two `[0,255]` saliency maps: `min(s + s_w, 255) / 2`.
pub fn truncated_mean(s: &GrayField, s_w: &GrayField) -> Result<GrayField> {
    if (s.width(), s.height()) != (s_w.width(), s_w.height()) {
        return Err(Error::DimensionMismatch {
            expected: (s.width(), s.height()),
            found: (s_w.width(), s_w.height()),
        });
    }
    let values = s
        .values()
        .iter()
        .zip(s_w.values())
        .map(|(a, b)| (a + b).min(255.0) / 2.0)
        .collect();
    Ok(GrayField::from_values(
        s.width(),
        s.height(),
        values,
        (0.0, 127.5),
    ))
}

/// Final refinement: intensity adjustment and hole fill only, then quantize.
/// An all-zero input stays zero (nothing salient survives the fusion; the
/// truncation threshold would otherwise saturate the empty map).
pub fn final_refine(s_bar: &GrayField, theta_r: f64, theta_g: f64) -> Result<GrayField> {
    if s_bar.values().iter().all(|v| *v == 0.0) {
        return Ok(s_bar.map((0.0, 255.0), |_| 0.0));
    }
    let leveled = s_bar.map((0.0, 255.0), |v| v.round());
    let adjusted = postprocess::adjust(&leveled, theta_r, theta_g)?;
    let filled = morphology::fill_holes_gray(&adjusted);
    raster::quantize_u8(&filled)
}

// The 11 master attention maps, computed in parallel per channel.
fn master_maps(
    prob: &colorname::ColorProbField,
    cfg: &SweepConfig,
    omega_c: u32,
) -> Vec<MasterAttentionMap> {
    (0..colorname::NUM_COLOR_NAMES)
        .into_par_iter()
        .map(|i| {
            let normalized = raster::normalize_minmax(prob.channel(i), (0.0, 255.0));
            attention::master_attention_map(&normalized, i, cfg, omega_c)
        })
        .collect()
}

/// Runs the full detector and returns an integer-valued `[0,255]` saliency
/// map with the dimensions of the original input.
pub fn detect(img: &Rgb8Image, params: &ParamSet, table: &ColorNameTable) -> Result<GrayField> {
    params.validate()?;
    let working = raster::resize_to_width(img, WORKING_WIDTH)?;
    let cfg = SweepConfig::new(params.delta)?;

    // Shared front end: probabilistic channels and the indexed map.
    let prob = colorname::to_prob_field(&working, table);
    let index = colorname::to_index_image(&working, table);
    let masters = master_maps(&prob, &cfg, params.omega_c);

    // Pipeline I: surroundedness saliency.
    let mean = attention::mean_attention_map(&masters)?;
    let s = postprocess::post_process(&mean, params.omega_r, params.theta_r, params.theta_g)?;

    // Pipeline II: global color cue saliency.
    let hist = colorname::histogram(&index);
    let indicators = colorname::indicator_matrices(&index);
    let weights = weighted::contrast_weights(&hist, &ColorPrototypes::default());
    let weighted_mean = weighted::weighted_mean_attention(&masters, &indicators, &weights, &hist)?;
    let s_w = weighted::weighted_saliency(
        &weighted_mean,
        params.omega_r,
        params.theta_r,
        params.theta_g,
    )?;

    let fused = truncated_mean(&s, &s_w)?;
    let refined = final_refine(&fused, params.theta_r, params.theta_g)?;

    // Back to the original resolution; refinement statistics belong to the
    // processing resolution, so this is the last step.
    let restored = raster::resize_field(&refined, img.width(), img.height());
    Ok(restored.map((0.0, 255.0), |v| v.round().clamp(0.0, 255.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_expected_values() {
        assert_eq!(
            ParamSet::asd(),
            ParamSet::new(8, 11, 13, 0.04, 1.8).unwrap()
        );
        assert_eq!(
            ParamSet::ecssd(),
            ParamSet::new(16, 9, 17, 0.04, 2.2).unwrap()
        );
        assert_eq!(
            ParamSet::imgsal(),
            ParamSet::new(32, 18, 9, 0.003, 2.0).unwrap()
        );
        assert_eq!(
            ParamSet::common(),
            ParamSet::new(8, 14, 14, 0.02, 1.5).unwrap()
        );
        assert_eq!(ParamSet::preset("common"), Some(ParamSet::common()));
        assert_eq!(ParamSet::preset("bogus"), None);
    }

    #[test]
    fn paramset_rejects_out_of_range() {
        assert!(ParamSet::new(0, 14, 14, 0.02, 1.5).is_err());
        assert!(ParamSet::new(8, 0, 14, 0.02, 1.5).is_err());
        assert!(ParamSet::new(8, 14, 14, 0.2, 1.5).is_err());
        assert!(ParamSet::new(8, 14, 14, 0.02, 0.5).is_err());
        assert!(ParamSet::new(8, 14, 14, 0.02, 3.5).is_err());
    }

    #[test]
    fn truncated_mean_clips_at_255() {
        let a = GrayField::from_values(2, 1, vec![255.0, 100.0], (0.0, 255.0));
        let b = GrayField::from_values(2, 1, vec![255.0, 100.0], (0.0, 255.0));
        let m = truncated_mean(&a, &b).unwrap();
        assert_eq!(m.values(), &[127.5, 100.0]);

        let c = GrayField::from_values(1, 1, vec![200.0], (0.0, 255.0));
        let d = GrayField::from_values(1, 1, vec![100.0], (0.0, 255.0));
        assert_eq!(truncated_mean(&c, &d).unwrap().values(), &[127.5]);
    }

    #[test]
    fn truncated_mean_rejects_mismatched_dims() {
        let a = GrayField::from_values(2, 1, vec![0.0, 0.0], (0.0, 255.0));
        let b = GrayField::from_values(1, 2, vec![0.0, 0.0], (0.0, 255.0));
        assert!(truncated_mean(&a, &b).is_err());
    }

    #[test]
    fn final_refine_drives_uniform_blob_to_white() {
        let f = GrayField::from_fn(40, 30, (0.0, 127.5), |x, y| {
            if (10..30).contains(&x) && (8..22).contains(&y) {
                127.0
            } else {
                0.0
            }
        });
        let out = final_refine(&f, 0.02, 1.5).unwrap();
        assert_eq!(out.get(20, 15), 255.0);
        assert_eq!(out.get(0, 0), 0.0);
    }

    #[test]
    fn final_refine_zero_stays_zero() {
        let f = GrayField::from_values(8, 8, vec![0.0; 64], (0.0, 127.5));
        let out = final_refine(&f, 0.02, 1.5).unwrap();
        assert!(out.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn final_refine_fills_pinholes() {
        let f = GrayField::from_fn(40, 30, (0.0, 127.5), |x, y| {
            let blob = (10..30).contains(&x) && (8..22).contains(&y);
            let pinhole = (x == 20 && y == 15) || (x == 15 && y == 12);
            if blob && !pinhole {
                120.0
            } else {
                0.0
            }
        });
        let out = final_refine(&f, 0.02, 1.5).unwrap();
        assert_eq!(out.get(20, 15), 255.0);
        assert_eq!(out.get(15, 12), 255.0);
    }
}
