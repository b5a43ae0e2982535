//! Pairing of an image directory with a ground-truth directory by file stem.

use anyhow::{bail, Result};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

/// Image/ground-truth path pairs, sorted by stem. Every image has exactly
/// one ground truth and stems are unique on both sides.
#[derive(Debug, Clone)]
pub struct DatasetManifest {
    pub pairs: Vec<(String, PathBuf, PathBuf)>,
}

/// Image files of a directory keyed by stem; duplicate stems are an error.
pub fn image_files(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(ext) = path.extension().and_then(|e| e.to_str()) else {
            continue;
        };
        if !IMAGE_EXTENSIONS.contains(&ext.to_lowercase().as_str()) {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        if let Some(previous) = out.insert(stem.to_string(), path.clone()) {
            bail!(
                "duplicate stem {:?} in {}: {} and {}",
                stem,
                dir.display(),
                previous.display(),
                path.display()
            );
        }
    }
    Ok(out)
}

impl DatasetManifest {
    /// Pairs every image in `images` with the ground truth of the same stem
    /// in `gts`. Unmatched stems on either side are an error, listed.
    pub fn pair_directories(images: &Path, gts: &Path) -> Result<Self> {
        let image_map = image_files(images)?;
        let mut gt_map = image_files(gts)?;

        let mut pairs = Vec::new();
        let mut missing_gt = Vec::new();
        for (stem, img_path) in image_map {
            match gt_map.remove(&stem) {
                Some(gt_path) => pairs.push((stem, img_path, gt_path)),
                None => missing_gt.push(stem),
            }
        }
        let extra_gt: Vec<String> = gt_map.into_keys().collect();
        if !missing_gt.is_empty() || !extra_gt.is_empty() {
            bail!(
                "unmatched stems: images without ground truth {:?}, ground truths without image {:?}",
                missing_gt,
                extra_gt
            );
        }
        if pairs.is_empty() {
            bail!("no image/ground-truth pairs found");
        }
        Ok(Self { pairs })
    }
}
