//! Boolean-map sweep per color name channel and the mean attention map.
//!
//! Each channel is binarized at every threshold of the sweep grid; the direct
//! and complemented boolean maps both pass through closing, hole fill, and
//! border suppression. Per-channel accumulation uses integer hit counts so
//! results are bit-reproducible under any parallel schedule.

use crate::error::{Error, Result};
use crate::morphology;
use crate::raster::{BoolMap, GrayField};

/// Threshold grid `0, δ, 2δ, ... <= 255`.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    step: u32,
    thresholds: Vec<f64>,
}

impl SweepConfig {
    pub fn new(step: u32) -> Result<Self> {
        if step == 0 || step > 255 {
            return Err(Error::InvalidParam(format!(
                "sample step {step} outside [1,255]"
            )));
        }
        let thresholds = (0..=255u32 / step).map(|j| (j * step) as f64).collect();
        Ok(Self { step, thresholds })
    }

    pub fn step(&self) -> u32 {
        self.step
    }

    /// Number of thresholds (`floor(255/δ) + 1`).
    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }
}

/// Average of all attention maps of one color name channel; values in `[0,1]`.
#[derive(Debug, Clone)]
pub struct MasterAttentionMap {
    pub channel_index: usize,
    pub field: GrayField,
}

/// One attention map: closing, hole fill, then border suppression.
pub fn attention_from_boolean(map: &BoolMap, omega_c: u32) -> BoolMap {
    morphology::suppress_border_components(&morphology::fill_holes_binary(&morphology::close(
        map, omega_c,
    )))
}

/// Sweeps one channel (already min-max normalized to `[0,255]`) and averages
/// the direct and complemented attention maps over all thresholds.
///
/// Channels flagged constant carry no contrast and yield an all-zero map.
pub fn master_attention_map(
    channel: &GrayField,
    channel_index: usize,
    cfg: &SweepConfig,
    omega_c: u32,
) -> MasterAttentionMap {
    let w = channel.width();
    let h = channel.height();
    if channel.is_constant() {
        let mut field = GrayField::from_values(w, h, vec![0.0; (w * h) as usize], (0.0, 1.0));
        field.set_constant(true);
        return MasterAttentionMap {
            channel_index,
            field,
        };
    }

    let mut counts = vec![0u32; (w as usize) * (h as usize)];
    for &theta in cfg.thresholds() {
        let direct = morphology::threshold(channel, theta);
        let inverted = morphology::complement(&direct);
        for map in [direct, inverted] {
            let att = attention_from_boolean(&map, omega_c);
            accumulate(&mut counts, &att);
        }
    }

    let scale = 1.0 / (2.0 * cfg.len() as f64);
    let values = counts.iter().map(|&c| c as f64 * scale).collect();
    MasterAttentionMap {
        channel_index,
        field: GrayField::from_values(w, h, values, (0.0, 1.0)),
    }
}

fn accumulate(counts: &mut [u32], map: &BoolMap) {
    let w = map.width() as usize;
    for y in 0..map.height() {
        let row = map.row(y);
        let base = (y as usize) * w;
        for (wi, &word) in row.iter().enumerate() {
            let mut m = word;
            while m != 0 {
                let b = m.trailing_zeros() as usize;
                counts[base + wi * 64 + b] += 1;
                m &= m - 1;
            }
        }
    }
}

/// Pixelwise arithmetic mean of the 11 master attention maps.
pub fn mean_attention_map(maps: &[MasterAttentionMap]) -> Result<GrayField> {
    let first = &maps[0].field;
    let (w, h) = (first.width(), first.height());
    for m in maps {
        if m.field.width() != w || m.field.height() != h {
            return Err(Error::DimensionMismatch {
                expected: (w, h),
                found: (m.field.width(), m.field.height()),
            });
        }
    }
    let n = maps.len() as f64;
    let mut acc = vec![0.0f64; (w as usize) * (h as usize)];
    for m in maps {
        for (a, v) in acc.iter_mut().zip(m.field.values()) {
            *a += v;
        }
    }
    for a in acc.iter_mut() {
        *a /= n;
    }
    Ok(GrayField::from_values(w, h, acc, (0.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::normalize_minmax;

    #[test]
    fn sweep_grid_shape() {
        let cfg = SweepConfig::new(8).unwrap();
        assert_eq!(cfg.len(), 32);
        assert_eq!(cfg.thresholds()[0], 0.0);
        assert_eq!(*cfg.thresholds().last().unwrap(), 248.0);
        assert_eq!(SweepConfig::new(32).unwrap().len(), 8);
        assert_eq!(SweepConfig::new(255).unwrap().len(), 2);
        assert!(SweepConfig::new(0).is_err());
    }

    #[test]
    fn attention_keeps_centered_square() {
        let square = BoolMap::from_fn(40, 30, |x, y| (12..28).contains(&x) && (8..22).contains(&y));
        assert_eq!(attention_from_boolean(&square, 2), square);
    }

    #[test]
    fn attention_drops_border_ring_with_hole() {
        // Ring touching the top border; its hole gets filled, then the whole
        // border-connected component is suppressed.
        let ring = BoolMap::from_fn(20, 20, |x, y| {
            let on_ring = (6..=14).contains(&x) && (0..=8).contains(&y);
            let inside = (8..=12).contains(&x) && (2..=6).contains(&y);
            on_ring && !inside
        });
        assert!(attention_from_boolean(&ring, 1).is_empty());
    }

    #[test]
    fn attention_of_empty_is_empty() {
        assert!(attention_from_boolean(&BoolMap::new(10, 10), 3).is_empty());
    }

    #[test]
    fn master_map_square_channel_is_half_inside() {
        // Background 0, centered square at 255: all 32 direct maps keep the
        // square, all 32 complements are border-connected and vanish.
        let channel = GrayField::from_fn(60, 40, (0.0, 255.0), |x, y| {
            if (20..40).contains(&x) && (12..28).contains(&y) {
                255.0
            } else {
                0.0
            }
        });
        let cfg = SweepConfig::new(8).unwrap();
        let master = master_attention_map(&channel, 0, &cfg, 3);
        for y in 0..40 {
            for x in 0..60 {
                let inside = (20..40).contains(&x) && (12..28).contains(&y);
                let expected = if inside { 0.5 } else { 0.0 };
                assert_eq!(master.field.get(x, y), expected, "({x},{y})");
            }
        }
    }

    #[test]
    fn master_map_constant_channel_is_zero() {
        let flat = GrayField::from_values(8, 8, vec![0.3; 64], (0.0, 1.0));
        let norm = normalize_minmax(&flat, (0.0, 255.0));
        assert!(norm.is_constant());
        let cfg = SweepConfig::new(16).unwrap();
        let master = master_attention_map(&norm, 4, &cfg, 2);
        assert!(master.field.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn master_map_values_in_unit_interval() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let noisy = GrayField::from_fn(32, 24, (0.0, 255.0), |_, _| {
            (rng.random::<f64>() * 255.0).round()
        });
        let cfg = SweepConfig::new(64).unwrap();
        let master = master_attention_map(&noisy, 0, &cfg, 1);
        assert!(master
            .field
            .values()
            .iter()
            .all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn mean_of_identical_maps_is_that_map() {
        let field = GrayField::from_fn(6, 4, (0.0, 1.0), |x, y| ((x + y) % 2) as f64);
        let maps: Vec<MasterAttentionMap> = (0..11)
            .map(|i| MasterAttentionMap {
                channel_index: i,
                field: field.clone(),
            })
            .collect();
        let mean = mean_attention_map(&maps).unwrap();
        for (a, b) in mean.values().iter().zip(field.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_one_hot_is_one_eleventh() {
        let ones = GrayField::from_values(3, 3, vec![1.0; 9], (0.0, 1.0));
        let zeros = GrayField::from_values(3, 3, vec![0.0; 9], (0.0, 1.0));
        let mut maps = vec![MasterAttentionMap {
            channel_index: 0,
            field: ones,
        }];
        for i in 1..11 {
            maps.push(MasterAttentionMap {
                channel_index: i,
                field: zeros.clone(),
            });
        }
        let mean = mean_attention_map(&maps).unwrap();
        assert!(mean.values().iter().all(|v| (v - 1.0 / 11.0).abs() < 1e-12));
    }

    #[test]
    fn mean_rejects_dimension_mismatch() {
        let a = MasterAttentionMap {
            channel_index: 0,
            field: GrayField::from_values(2, 2, vec![0.0; 4], (0.0, 1.0)),
        };
        let b = MasterAttentionMap {
            channel_index: 1,
            field: GrayField::from_values(3, 2, vec![0.0; 6], (0.0, 1.0)),
        };
        assert!(mean_attention_map(&[a, b]).is_err());
    }

    #[test]
    fn swapping_direct_and_complement_roles_leaves_master_unchanged() {
        // The summand of the average is (att(B) + att(~B)); exchanging the two
        // terms per threshold cannot change the sum.
        let channel =
            GrayField::from_fn(24, 18, (0.0, 255.0), |x, y| ((x * 11 + y * 7) % 256) as f64);
        let cfg = SweepConfig::new(64).unwrap();
        let omega_c = 2;

        let master = master_attention_map(&channel, 0, &cfg, omega_c);

        let mut counts = vec![0u32; 24 * 18];
        for &theta in cfg.thresholds() {
            let direct = morphology::threshold(&channel, theta);
            let inverted = morphology::complement(&direct);
            // complement first, then direct
            for map in [inverted, direct] {
                let att = attention_from_boolean(&map, omega_c);
                super::accumulate(&mut counts, &att);
            }
        }
        let scale = 1.0 / (2.0 * cfg.len() as f64);
        for (idx, &c) in counts.iter().enumerate() {
            assert_eq!(c as f64 * scale, master.field.values()[idx]);
        }
    }
}
