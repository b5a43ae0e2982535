//! Evaluation protocol: fixed-threshold precision/recall/F curves, AvgF and
//! MaxF, adaptive-threshold scores, and the one-at-a-time parameter sweep.

use crate::colorname::ColorNameTable;
use crate::combine::{self, ParamSet};
use crate::error::{Error, Result};
use crate::raster::{BoolMap, GrayField, Rgb8Image};
use rayon::prelude::*;

/// `beta^2` of the F-measure, emphasizing precision.
pub const BETA_SQUARED: f64 = 0.3;

/// One point of the fixed-threshold curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub threshold: u8,
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
}

/// Mean precision/recall/F over a dataset at each threshold in `[0,255]`.
#[derive(Debug, Clone)]
pub struct EvalCurves {
    points: Vec<CurvePoint>,
}

impl EvalCurves {
    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    /// CSV with a `threshold,precision,recall,f_beta` header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,precision,recall,f_beta\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6}\n",
                p.threshold, p.precision, p.recall, p.f_beta
            ));
        }
        out
    }
}

/// Scalar scores of one evaluation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreSummary {
    pub avg_f: f64,
    pub max_f: f64,
    pub max_f_threshold: u8,
    pub adapt_f: f64,
    pub adaptive_precision: f64,
    pub adaptive_recall: f64,
}

impl ScoreSummary {
    /// Key-value text block.
    pub fn to_text(&self) -> String {
        format!(
            "AvgF = {:.4}\nMaxF = {:.4}\nMaxF_threshold = {}\nAdaptF = {:.4}\nadaptive_precision = {:.4}\nadaptive_recall = {:.4}\n",
            self.avg_f,
            self.max_f,
            self.max_f_threshold,
            self.adapt_f,
            self.adaptive_precision,
            self.adaptive_recall
        )
    }
}

fn check_aligned(maps: &[GrayField], gts: &[BoolMap]) -> Result<()> {
    if maps.is_empty() || maps.len() != gts.len() {
        return Err(Error::DatasetMismatch(format!(
            "{} maps vs {} ground truths",
            maps.len(),
            gts.len()
        )));
    }
    for (m, g) in maps.iter().zip(gts) {
        if (m.width(), m.height()) != (g.width(), g.height()) {
            return Err(Error::DimensionMismatch {
                expected: (g.width(), g.height()),
                found: (m.width(), m.height()),
            });
        }
    }
    Ok(())
}

// Mask counts at a real-valued threshold (strict >).
fn mask_counts(map: &GrayField, gt: &BoolMap, t: f64) -> (u64, u64) {
    let w = map.width();
    let mut mask = 0u64;
    let mut hit = 0u64;
    for y in 0..map.height() {
        for x in 0..w {
            if map.get(x, y) > t {
                mask += 1;
                if gt.get(x, y) {
                    hit += 1;
                }
            }
        }
    }
    (mask, hit)
}

fn precision_recall(mask: u64, hit: u64, gt_total: u64) -> (f64, f64) {
    let p = if mask == 0 {
        1.0
    } else {
        hit as f64 / mask as f64
    };
    let r = hit as f64 / gt_total as f64;
    (p, r)
}

/// Precision and recall of `map > t` against a nonempty ground truth.
/// An empty mask counts as precision 1 (no false positives exist).
pub fn pr_at_threshold(map: &GrayField, gt: &BoolMap, t: u8) -> Result<(f64, f64)> {
    if (map.width(), map.height()) != (gt.width(), gt.height()) {
        return Err(Error::DimensionMismatch {
            expected: (gt.width(), gt.height()),
            found: (map.width(), map.height()),
        });
    }
    let gt_total = gt.count_ones();
    if gt_total == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    let (mask, hit) = mask_counts(map, gt, t as f64);
    Ok(precision_recall(mask, hit, gt_total))
}

/// Weighted harmonic mean of precision and recall with `beta^2 = 0.3`;
/// zero when both inputs are zero.
pub fn f_beta(precision: f64, recall: f64) -> f64 {
    if precision == 0.0 && recall == 0.0 {
        return 0.0;
    }
    (1.0 + BETA_SQUARED) * precision * recall / (BETA_SQUARED * precision + recall)
}

// Per-image suffix counts of `value > t` for all 256 integer thresholds.
fn threshold_counts(map: &GrayField, gt: &BoolMap) -> ([u64; 256], [u64; 256]) {
    let mut hist_all = [0u64; 256];
    let mut hist_gt = [0u64; 256];
    let w = map.width();
    for y in 0..map.height() {
        for x in 0..w {
            let level = map.get(x, y).round().clamp(0.0, 255.0) as usize;
            hist_all[level] += 1;
            if gt.get(x, y) {
                hist_gt[level] += 1;
            }
        }
    }
    // counts[t] = number of pixels with level > t
    let mut mask = [0u64; 256];
    let mut hit = [0u64; 256];
    let mut acc_all = 0;
    let mut acc_gt = 0;
    for t in (0..255).rev() {
        acc_all += hist_all[t + 1];
        acc_gt += hist_gt[t + 1];
        mask[t] = acc_all;
        hit[t] = acc_gt;
    }
    (mask, hit)
}

/// Result of the fixed-threshold protocol.
#[derive(Debug, Clone)]
pub struct FixedEval {
    pub curves: EvalCurves,
    pub avg_f: f64,
    pub max_f: f64,
    pub max_f_threshold: u8,
}

/// Fixed thresholding over a dataset: per threshold, precision and recall are
/// averaged over images and F is computed from the means; AvgF and MaxF
/// summarize the 256-point F curve.
pub fn fixed_threshold_eval(maps: &[GrayField], gts: &[BoolMap]) -> Result<FixedEval> {
    check_aligned(maps, gts)?;
    let n = maps.len() as f64;
    let mut sum_p = [0.0f64; 256];
    let mut sum_r = [0.0f64; 256];
    for (map, gt) in maps.iter().zip(gts) {
        let gt_total = gt.count_ones();
        if gt_total == 0 {
            return Err(Error::EmptyGroundTruth);
        }
        let (mask, hit) = threshold_counts(map, gt);
        for t in 0..256 {
            let (p, r) = precision_recall(mask[t], hit[t], gt_total);
            sum_p[t] += p;
            sum_r[t] += r;
        }
    }

    let mut points = Vec::with_capacity(256);
    let mut avg_f = 0.0;
    let mut max_f = f64::MIN;
    let mut max_f_threshold = 0u8;
    for t in 0..256 {
        let p = sum_p[t] / n;
        let r = sum_r[t] / n;
        let f = f_beta(p, r);
        points.push(CurvePoint {
            threshold: t as u8,
            precision: p,
            recall: r,
            f_beta: f,
        });
        avg_f += f;
        if f > max_f {
            max_f = f;
            max_f_threshold = t as u8;
        }
    }
    avg_f /= 256.0;

    Ok(FixedEval {
        curves: EvalCurves { points },
        avg_f,
        max_f,
        max_f_threshold,
    })
}

/// Adaptive threshold of a map: twice its mean value (may exceed 255).
pub fn adaptive_threshold(map: &GrayField) -> f64 {
    2.0 * map.mean()
}

/// Adaptive thresholding over a dataset: each map is binarized at its own
/// adaptive threshold; precision and recall are averaged over images and
/// AdaptF computed from the means.
pub fn adaptive_eval(maps: &[GrayField], gts: &[BoolMap]) -> Result<(f64, f64, f64)> {
    check_aligned(maps, gts)?;
    let mut sum_p = 0.0;
    let mut sum_r = 0.0;
    for (map, gt) in maps.iter().zip(gts) {
        let gt_total = gt.count_ones();
        if gt_total == 0 {
            return Err(Error::EmptyGroundTruth);
        }
        let t = adaptive_threshold(map);
        let (mask, hit) = mask_counts(map, gt, t);
        let (p, r) = precision_recall(mask, hit, gt_total);
        sum_p += p;
        sum_r += r;
    }
    let n = maps.len() as f64;
    let mean_p = sum_p / n;
    let mean_r = sum_r / n;
    Ok((mean_p, mean_r, f_beta(mean_p, mean_r)))
}

/// Runs both protocols and collects the summary scores.
pub fn evaluate(maps: &[GrayField], gts: &[BoolMap]) -> Result<(EvalCurves, ScoreSummary)> {
    let fixed = fixed_threshold_eval(maps, gts)?;
    let (mean_p, mean_r, adapt_f) = adaptive_eval(maps, gts)?;
    let summary = ScoreSummary {
        avg_f: fixed.avg_f,
        max_f: fixed.max_f,
        max_f_threshold: fixed.max_f_threshold,
        adapt_f,
        adaptive_precision: mean_p,
        adaptive_recall: mean_r,
    };
    Ok((fixed.curves, summary))
}

/// Binarizes an 8-bit ground-truth image at channel mean > 127.
pub fn ground_truth_from_image(img: &Rgb8Image) -> BoolMap {
    BoolMap::from_fn(img.width(), img.height(), |x, y| {
        let [r, g, b] = img.get(x, y);
        (r as u32 + g as u32 + b as u32) / 3 > 127
    })
}

/// Aligned images and ground-truth masks.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub images: Vec<Rgb8Image>,
    pub gts: Vec<BoolMap>,
}

impl Dataset {
    pub fn new(images: Vec<Rgb8Image>, gts: Vec<BoolMap>) -> Result<Self> {
        if images.is_empty() || images.len() != gts.len() {
            return Err(Error::DatasetMismatch(format!(
                "{} images vs {} ground truths",
                images.len(),
                gts.len()
            )));
        }
        Ok(Self { images, gts })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

/// Candidate values per parameter for the one-at-a-time sweep.
#[derive(Debug, Clone, Default)]
pub struct SweepGrid {
    pub delta: Vec<u32>,
    pub omega_c: Vec<u32>,
    pub omega_r: Vec<u32>,
    pub theta_r: Vec<f64>,
    pub theta_g: Vec<f64>,
}

impl SweepGrid {
    /// The default sweep ranges: `delta 4:4:40`, `omega_c 1:1:20`,
    /// `omega_r 1:1:20`, `theta_r 0.001:0.001:0.009 + 0.01:0.01:0.1`,
    /// `theta_g 1.0:0.1:3.0`.
    pub fn default_ranges() -> Self {
        let mut theta_r: Vec<f64> = (1..=9).map(|i| i as f64 * 0.001).collect();
        theta_r.extend((1..=10).map(|i| i as f64 * 0.01));
        Self {
            delta: (1..=10).map(|i| i * 4).collect(),
            omega_c: (1..=20).collect(),
            omega_r: (1..=20).collect(),
            theta_r,
            theta_g: (0..=20).map(|i| 1.0 + i as f64 * 0.1).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
            && self.omega_c.is_empty()
            && self.omega_r.is_empty()
            && self.theta_r.is_empty()
            && self.theta_g.is_empty()
    }
}

/// One sweep measurement: a single parameter changed from the base set.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub parameter: &'static str,
    pub value: f64,
    pub max_f: f64,
}

/// Outcome of a parameter sweep.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub best: ParamSet,
    pub best_max_f: f64,
}

impl SweepReport {
    /// CSV with a `parameter,value,max_f` header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("parameter,value,max_f\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{:.6}\n", r.parameter, r.value, r.max_f));
        }
        out
    }
}

// MaxF of one parameter setting, averaged over the datasets.
fn sweep_score(datasets: &[Dataset], params: &ParamSet, table: &ColorNameTable) -> Result<f64> {
    let mut total = 0.0;
    for ds in datasets {
        let maps: Vec<GrayField> = ds
            .images
            .par_iter()
            .map(|img| combine::detect(img, params, table))
            .collect::<Result<_>>()?;
        total += fixed_threshold_eval(&maps, &ds.gts)?.max_f;
    }
    Ok(total / datasets.len() as f64)
}

/// One-at-a-time sweep around `base`: each parameter is varied over its grid
/// while the others stay at the base value; MaxF (averaged over datasets) is
/// recorded per value, and the best value per parameter is composed into the
/// returned `best` set.
pub fn parameter_sweep(
    datasets: &[Dataset],
    grid: &SweepGrid,
    base: &ParamSet,
    table: &ColorNameTable,
) -> Result<SweepReport> {
    if datasets.is_empty() || datasets.iter().any(|d| d.is_empty()) {
        return Err(Error::DatasetMismatch("empty dataset".into()));
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }

    let mut rows = Vec::new();
    let mut best = *base;

    macro_rules! sweep_axis {
        ($axis:ident, $name:literal, $to_f64:expr, $assign:expr) => {
            if !grid.$axis.is_empty() {
                let mut best_value = None;
                let mut best_score = f64::MIN;
                for &v in &grid.$axis {
                    let mut candidate = *base;
                    $assign(&mut candidate, v);
                    candidate.validate()?;
                    let score = sweep_score(datasets, &candidate, table)?;
                    rows.push(SweepRow {
                        parameter: $name,
                        value: $to_f64(v),
                        max_f: score,
                    });
                    if score > best_score {
                        best_score = score;
                        best_value = Some(v);
                    }
                }
                if let Some(v) = best_value {
                    $assign(&mut best, v);
                }
            }
        };
    }

    sweep_axis!(delta, "delta", |v: u32| v as f64, |p: &mut ParamSet, v| p
        .delta =
        v);
    sweep_axis!(
        omega_c,
        "omega_c",
        |v: u32| v as f64,
        |p: &mut ParamSet, v| p.omega_c = v
    );
    sweep_axis!(
        omega_r,
        "omega_r",
        |v: u32| v as f64,
        |p: &mut ParamSet, v| p.omega_r = v
    );
    sweep_axis!(theta_r, "theta_r", |v: f64| v, |p: &mut ParamSet, v| p
        .theta_r =
        v);
    sweep_axis!(theta_g, "theta_g", |v: f64| v, |p: &mut ParamSet, v| p
        .theta_g =
        v);

    best.validate()?;
    let best_max_f = sweep_score(datasets, &best, table)?;
    Ok(SweepReport {
        rows,
        best,
        best_max_f,
    })
}
