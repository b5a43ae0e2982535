//! Shared fixtures for the pipeline benchmarks.

use cns_core::colorname::{fallback_table, to_prob_field, ColorNameTable};
use cns_core::raster::{normalize_minmax, GrayField};
use cns_core::synthetic::{convex_object_scene, SyntheticScene};

/// Scene, table, and a sweep-ready channel shared by the benchmarks.
pub struct Fixture {
    pub scene: SyntheticScene,
    pub table: ColorNameTable,
    pub channel: GrayField,
}

pub fn fixture() -> Fixture {
    let scene = convex_object_scene(42);
    let table = fallback_table();
    let prob = to_prob_field(&scene.image, &table);
    let channel = normalize_minmax(prob.channel(scene.object_color), (0.0, 255.0));
    Fixture {
        scene,
        table,
        channel,
    }
}
