//! Salient object detection in the color name space.
//!
//! An input image is converted to eleven probabilistic color name channels.
//! Pipeline I sweeps boolean maps over each channel and keeps the surrounded
//! regions (closing, hole fill, border suppression) to build a mean attention
//! map. Pipeline II weights the same per-channel attention maps with two
//! global color cues derived from the indexed color name image. Both maps are
//! post-processed (reconstruction smoothing, histogram-driven intensity
//! adjustment, hole fill), fused by a truncated mean, refined once more, and
//! emitted as an 8-bit saliency map at the original input resolution.
//!
//! ```no_run
//! use cns_core::{colorname, combine, raster};
//!
//! let bytes = std::fs::read("photo.jpg").unwrap();
//! let img = raster::decode_image(&bytes).unwrap();
//! let table = colorname::fallback_table();
//! let map = combine::detect(&img, &combine::ParamSet::common(), &table).unwrap();
//! std::fs::write("saliency.png", raster::encode_gray_png(&map).unwrap()).unwrap();
//! ```

pub mod attention;
pub mod colorname;
pub mod combine;
pub mod error;
pub mod eval;
pub mod morphology;
pub mod postprocess;
pub mod raster;
pub mod synthetic;
pub mod weighted;

pub use combine::{detect, ParamSet, WORKING_WIDTH};
pub use error::{Error, Result};
pub use raster::{BoolMap, GrayField, Rgb8Image};
