//! Deterministic synthetic scenes for tests and benchmarks: one uniform
//! convex object on a uniform background, both drawn from the prototype
//! colors, with the object mask as ground truth.

use crate::colorname::{ColorPrototypes, NUM_COLOR_NAMES};
use crate::raster::{BoolMap, Rgb8Image};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const SCENE_WIDTH: u32 = 400;
pub const SCENE_HEIGHT: u32 = 300;

/// A generated image plus its object mask.
#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub image: Rgb8Image,
    pub mask: BoolMap,
    /// Prototype index of the object color (zero-based).
    pub object_color: usize,
    /// Prototype index of the background color (zero-based).
    pub background_color: usize,
}

#[derive(Clone, Copy)]
enum Shape {
    Rect,
    Ellipse,
    Diamond,
}

fn inside(shape: Shape, x: u32, y: u32, cx: f64, cy: f64, a: f64, b: f64) -> bool {
    let dx = (x as f64 - cx) / a;
    let dy = (y as f64 - cy) / b;
    match shape {
        Shape::Rect => dx.abs() <= 1.0 && dy.abs() <= 1.0,
        Shape::Ellipse => dx * dx + dy * dy <= 1.0,
        Shape::Diamond => dx.abs() + dy.abs() <= 1.0,
    }
}

fn pick_colors(rng: &mut StdRng) -> (usize, usize) {
    let object = rng.random_range(0..NUM_COLOR_NAMES);
    loop {
        let background = rng.random_range(0..NUM_COLOR_NAMES);
        if background != object {
            return (object, background);
        }
    }
}

fn render(mask: &BoolMap, object: usize, background: usize) -> Rgb8Image {
    let protos = ColorPrototypes::default();
    let obj_rgb = protos.rgb_u8(object);
    let bg_rgb = protos.rgb_u8(background);
    Rgb8Image::from_fn(mask.width(), mask.height(), |x, y| {
        if mask.get(x, y) {
            obj_rgb
        } else {
            bg_rgb
        }
    })
}

/// 400x300 scene: a single convex object covering 10-40% of the frame, not
/// touching the border, in a prototype color distinct from the background.
pub fn convex_object_scene(seed: u64) -> SyntheticScene {
    let mut rng = StdRng::seed_from_u64(seed);
    let (w, h) = (SCENE_WIDTH, SCENE_HEIGHT);
    // Margin stays above the preset closing radii: a closing whose disk spans
    // the gap to the frame welds the object onto the border and the sweep
    // then suppresses it wholesale.
    let margin = 24.0;
    loop {
        let shape = match rng.random_range(0..3) {
            0 => Shape::Rect,
            1 => Shape::Ellipse,
            _ => Shape::Diamond,
        };
        let fraction = rng.random_range(0.10..=0.40);
        let aspect = rng.random_range(0.7..=1.4);
        let area = fraction * (w as f64) * (h as f64);
        let ab = match shape {
            Shape::Rect => area / 4.0,
            Shape::Ellipse => area / std::f64::consts::PI,
            Shape::Diamond => area / 2.0,
        };
        let b = (ab / aspect).sqrt();
        let a = aspect * b;
        let a_max = w as f64 / 2.0 - margin - 1.0;
        let b_max = h as f64 / 2.0 - margin - 1.0;
        if a < 35.0 || b < 35.0 || a > a_max || b > b_max {
            continue;
        }
        let cx = rng.random_range((margin + a)..=(w as f64 - 1.0 - margin - a));
        let cy = rng.random_range((margin + b)..=(h as f64 - 1.0 - margin - b));
        let mask = BoolMap::from_fn(w, h, |x, y| inside(shape, x, y, cx, cy, a, b));
        let (object_color, background_color) = pick_colors(&mut rng);
        return SyntheticScene {
            image: render(&mask, object_color, background_color),
            mask,
            object_color,
            background_color,
        };
    }
}

/// 400x300 scene whose object is flush against one image border.
pub fn border_object_scene(seed: u64) -> SyntheticScene {
    let mut rng = StdRng::seed_from_u64(seed);
    let (w, h) = (SCENE_WIDTH, SCENE_HEIGHT);
    let a = rng.random_range(40.0..=90.0);
    let b = rng.random_range(40.0..=90.0);
    let side = rng.random_range(0..4);
    // Center placed so the rectangle overlaps the chosen edge; from_fn clips it.
    let (cx, cy) = match side {
        0 => (
            a * rng.random_range(0.0..0.8),
            rng.random_range(b + 1.0..h as f64 - b - 1.0),
        ),
        1 => (
            w as f64 - 1.0 - a * rng.random_range(0.0..0.8),
            rng.random_range(b + 1.0..h as f64 - b - 1.0),
        ),
        2 => (
            rng.random_range(a + 1.0..w as f64 - a - 1.0),
            b * rng.random_range(0.0..0.8),
        ),
        _ => (
            rng.random_range(a + 1.0..w as f64 - a - 1.0),
            h as f64 - 1.0 - b * rng.random_range(0.0..0.8),
        ),
    };
    let mask = BoolMap::from_fn(w, h, |x, y| inside(Shape::Rect, x, y, cx, cy, a, b));
    let (object_color, background_color) = pick_colors(&mut rng);
    SyntheticScene {
        image: render(&mask, object_color, background_color),
        mask,
        object_color,
        background_color,
    }
}
