use super::{ingest_rgb_image, Dataset, Sample, INPUT_SIZE};
use crate::error::{Error, Result};
use crate::imgproc::{Image, PreprocessConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shape classes the generator can render, in class-index order.
pub const SHAPE_NAMES: [&str; 5] = ["ellipse", "triangle", "crescent", "bar", "ring"];

/// One rendered frame plus its ground-truth geometry.
#[derive(Debug, Clone)]
pub struct SynthFrame {
    pub image: Image,
    pub class_name: String,
    /// Inclusive bounding box (x0, y0, x1, y1) of the rendered shape pixels.
    pub bbox: (usize, usize, usize, usize),
}

#[derive(Clone, Copy)]
enum Shape {
    Ellipse,
    Triangle,
    Crescent,
    Bar,
    Ring,
}

const SHAPES: [Shape; 5] = [
    Shape::Ellipse,
    Shape::Triangle,
    Shape::Crescent,
    Shape::Bar,
    Shape::Ring,
];

/// Bright, class-distinct base colors; jittered per sample.
const BASE_COLORS: [[f32; 3]; 5] = [
    [205.0, 70.0, 70.0],   // ellipse: red
    [70.0, 195.0, 80.0],   // triangle: green
    [80.0, 100.0, 215.0],  // crescent: blue
    [210.0, 195.0, 70.0],  // bar: yellow
    [200.0, 75.0, 205.0],  // ring: magenta
];

/// Render `per_class` frames for each of the first `n_classes` shapes onto
/// noisy dark backgrounds, with seeded color jitter and random position and
/// rotation. Deterministic per seed; frames are ordered class-major.
pub fn render_synthetic(n_classes: usize, per_class: usize, seed: u64) -> Result<Vec<SynthFrame>> {
    if !(2..=5).contains(&n_classes) {
        return Err(Error::InvalidParameter(format!(
            "synthetic generator supports 2..=5 classes, got {n_classes}"
        )));
    }
    if per_class == 0 {
        return Err(Error::InvalidParameter(
            "per-class sample count must be >= 1".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frames = Vec::with_capacity(n_classes * per_class);
    for class in 0..n_classes {
        for _ in 0..per_class {
            frames.push(render_frame(SHAPES[class], class, &mut rng));
        }
    }
    Ok(frames)
}

/// Render frames and run the standard ingestion (segmentation + four-channel
/// stacking) in memory. Class labels follow the lexicographically sorted
/// class-name table.
pub fn synth_generate(
    n_classes: usize,
    per_class: usize,
    seed: u64,
    cfg: &PreprocessConfig,
) -> Result<Dataset> {
    let frames = render_synthetic(n_classes, per_class, seed)?;
    let mut class_names: Vec<String> = SHAPE_NAMES[..n_classes]
        .iter()
        .map(|s| s.to_string())
        .collect();
    class_names.sort();

    let mut samples = Vec::with_capacity(frames.len());
    for (i, frame) in frames.iter().enumerate() {
        let label = class_names
            .iter()
            .position(|n| *n == frame.class_name)
            .expect("class name is in the table");
        let tensor = ingest_rgb_image(&frame.image, cfg)?;
        samples.push(Sample {
            tensor,
            label,
            source: format!("synthetic:{}/{i}", frame.class_name),
        });
    }
    Ok(Dataset {
        samples,
        class_names,
    })
}

fn render_frame(shape: Shape, class: usize, rng: &mut ChaCha8Rng) -> SynthFrame {
    let n = INPUT_SIZE;
    // Per-sample parameters, drawn in a fixed order.
    let cx = n as f32 / 2.0 + rng.random_range(-12.0..12.0);
    let cy = n as f32 / 2.0 + rng.random_range(-12.0..12.0);
    let angle = rng.random_range(0.0..std::f32::consts::PI);
    let scale = rng.random_range(0.85..1.15f32);
    let color_jitter: [f32; 3] = [
        rng.random_range(-25.0..25.0),
        rng.random_range(-25.0..25.0),
        rng.random_range(-25.0..25.0),
    ];
    let bg_base = rng.random_range(18.0..34.0f32);

    let (sin, cos) = angle.sin_cos();
    let mut data = vec![0u8; n * n * 3];
    let mut bbox = (usize::MAX, usize::MAX, 0usize, 0usize);
    for y in 0..n {
        for x in 0..n {
            // Rotate into the shape's local frame.
            let dx = x as f32 - cx;
            let dy = y as f32 - cy;
            let u = (dx * cos + dy * sin) / scale;
            let v = (-dx * sin + dy * cos) / scale;
            let inside = shape_contains(shape, u, v);

            let idx = (y * n + x) * 3;
            if inside {
                bbox.0 = bbox.0.min(x);
                bbox.1 = bbox.1.min(y);
                bbox.2 = bbox.2.max(x);
                bbox.3 = bbox.3.max(y);
                let texture = rng.random_range(-8.0..8.0f32);
                for c in 0..3 {
                    let val = BASE_COLORS[class][c] + color_jitter[c] + texture;
                    data[idx + c] = val.round().clamp(0.0, 255.0) as u8;
                }
            } else {
                for slot in data.iter_mut().skip(idx).take(3) {
                    let noise = rng.random_range(-12.0..12.0f32);
                    *slot = (bg_base + noise).round().clamp(0.0, 255.0) as u8;
                }
            }
        }
    }
    debug_assert!(bbox.0 <= bbox.2, "shape rendered no pixels");

    SynthFrame {
        image: Image::new(n, n, 3, data).expect("consistent frame dimensions"),
        class_name: SHAPE_NAMES[class].to_string(),
        bbox,
    }
}

fn shape_contains(shape: Shape, u: f32, v: f32) -> bool {
    match shape {
        Shape::Ellipse => {
            let (a, b) = (30.0f32, 16.0f32);
            (u / a).powi(2) + (v / b).powi(2) <= 1.0
        }
        Shape::Triangle => {
            // Isoceles triangle with apex at (0, -22) and base y = 20.
            let (half_base, top, bottom) = (27.0f32, -22.0f32, 20.0f32);
            if v < top || v > bottom {
                return false;
            }
            let frac = (v - top) / (bottom - top);
            u.abs() <= half_base * frac
        }
        Shape::Crescent => {
            let outer = u * u + v * v <= 24.0 * 24.0;
            let hole = (u - 9.0) * (u - 9.0) + v * v <= 17.0 * 17.0;
            outer && !hole
        }
        Shape::Bar => u.abs() <= 32.0 && v.abs() <= 9.0,
        Shape::Ring => {
            let r2 = u * u + v * v;
            (14.0 * 14.0..=24.0 * 24.0).contains(&r2)
        }
    }
}
