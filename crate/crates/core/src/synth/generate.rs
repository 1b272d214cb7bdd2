//! Pristine test content.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::video_io::{chroma_dims, ClipMeta, FrameYuv, MIN_DIMENSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContentKind {
    Gradient,
    MovingChecker,
    NoiseTexture,
    TalkingHeadProxy,
}

impl ContentKind {
    pub const ALL: [ContentKind; 4] = [
        ContentKind::Gradient,
        ContentKind::MovingChecker,
        ContentKind::NoiseTexture,
        ContentKind::TalkingHeadProxy,
    ];
}

impl std::str::FromStr for ContentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gradient" => Ok(ContentKind::Gradient),
            "moving_checker" => Ok(ContentKind::MovingChecker),
            "noise_texture" => Ok(ContentKind::NoiseTexture),
            "talking_head_proxy" => Ok(ContentKind::TalkingHeadProxy),
            other => Err(format!("unknown content kind `{other}`")),
        }
    }
}

/// Motion parameters. `velocity` is in luma pixels per frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionParams {
    pub velocity: usize,
    pub checker_cell: usize,
}

impl Default for MotionParams {
    fn default() -> Self {
        MotionParams {
            velocity: 3,
            checker_cell: 7,
        }
    }
}

pub fn generate_pristine(kind: ContentKind, meta: &ClipMeta, seed: u64) -> Result<Vec<FrameYuv>, SynthError> {
    generate_pristine_with(kind, meta, seed, MotionParams::default())
}

pub fn generate_pristine_with(
    kind: ContentKind,
    meta: &ClipMeta,
    seed: u64,
    motion: MotionParams,
) -> Result<Vec<FrameYuv>, SynthError> {
    let (w, h) = (meta.width, meta.height);
    if w < MIN_DIMENSION || h < MIN_DIMENSION || w % 2 != 0 || h % 2 != 0 {
        return Err(SynthError::InvalidMeta(format!("dimensions {w}x{h} must be even and at least 8")));
    }
    if meta.frame_count < 2 {
        return Err(SynthError::InvalidMeta("need at least two frames".into()));
    }
    if motion.velocity == 0 || motion.checker_cell == 0 {
        return Err(SynthError::InvalidMeta("velocity and checker cell must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frames = match kind {
        ContentKind::Gradient => gradient(w, h, meta.frame_count, motion.velocity, &mut rng),
        ContentKind::MovingChecker => checker(w, h, meta.frame_count, motion),
        ContentKind::NoiseTexture => noise(w, h, meta.frame_count, motion.velocity, &mut rng),
        ContentKind::TalkingHeadProxy => talking_head(w, h, meta.frame_count, motion.velocity, &mut rng),
    };
    Ok(frames)
}

fn frame(w: usize, h: usize, y: Vec<u8>, u: Vec<u8>, v: Vec<u8>) -> FrameYuv {
    FrameYuv::new(w, h, y, u, v).expect("generator plane sizes")
}

/// Per-clip scale of fine texture, so clips differ in how much a blur
/// removes.
fn texture_detail(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.15..=1.0)
}

fn wave(x: usize, period: usize, amplitude: f64) -> f64 {
    amplitude * (std::f64::consts::TAU * (x % period) as f64 / period as f64).sin()
}

/// Bilinear interpolation of uniform noise on a `cell`-spaced lattice, in
/// `[-64, 64]`, wrapping at the canvas edges.
fn smooth_noise(w: usize, h: usize, cell: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (gx, gy) = (w.div_ceil(cell), h.div_ceil(cell));
    let lattice: Vec<f64> = (0..gx * gy).map(|_| rng.random_range(-64.0..=64.0)).collect();
    let at = |x: usize, y: usize| lattice[(y % gy) * gx + x % gx];
    (0..w * h)
        .map(|i| {
            let (x, y) = (i % w, i / w);
            let (cx, cy) = (x / cell, y / cell);
            let fx = (x % cell) as f64 / cell as f64;
            let fy = (y % cell) as f64 / cell as f64;
            let top = at(cx, cy) * (1.0 - fx) + at(cx + 1, cy) * fx;
            let bottom = at(cx, cy + 1) * (1.0 - fx) + at(cx + 1, cy + 1) * fx;
            top * (1.0 - fy) + bottom * fy
        })
        .collect()
}

/// Sawtooth diagonal ramp with a fixed dither texture, scrolling sideways.
fn gradient(w: usize, h: usize, n: usize, vel: usize, rng: &mut ChaCha8Rng) -> Vec<FrameYuv> {
    let (cw, ch) = chroma_dims(w, h);
    let detail = texture_detail(rng);
    let dither: Vec<i32> = (0..w * h).map(|_| (rng.random_range(-24.0..=24.0) * detail).round() as i32).collect();
    let phase = rng.random_range(0..256usize);
    (0..n)
        .map(|t| {
            let shift = phase + vel * t;
            let y = (0..w * h)
                .map(|i| {
                    let (x, yy) = (i % w, i / w);
                    let ramp = ((2 * (x + shift) + yy) * 3 % 256) as i32;
                    (ramp + dither[i]).clamp(0, 255) as u8
                })
                .collect();
            let u = (0..cw * ch).map(|i| (64 + ((i % cw) * 2 + shift) % 128) as u8).collect();
            let v = (0..cw * ch).map(|i| (192 - ((i / cw) * 3 + shift / 2) % 128) as u8).collect();
            frame(w, h, y, u, v)
        })
        .collect()
}

/// Checkerboard circularly shifted by `velocity * t` columns, so each frame
/// holds the same samples in a different arrangement.
fn checker(w: usize, h: usize, n: usize, motion: MotionParams) -> Vec<FrameYuv> {
    let (cw, ch) = chroma_dims(w, h);
    let cell = motion.checker_cell;
    let luma = |x: usize, y: usize| {
        let base = if (x / cell + y / cell).is_multiple_of(2) { 55.0 } else { 185.0 };
        (base + wave(x, 32, 45.0)).round() as u8
    };
    let chroma = |x: usize, y: usize| if (2 * x / cell + 2 * y / cell).is_multiple_of(2) { 96u8 } else { 160 };
    (0..n)
        .map(|t| {
            let s = motion.velocity * t;
            let y = (0..w * h).map(|i| luma((i % w + w - s % w) % w, i / w)).collect();
            let sc = s / 2;
            let u: Vec<u8> = (0..cw * ch).map(|i| chroma((i % cw + cw - sc % cw) % cw, i / cw)).collect();
            let v = u.iter().map(|&c| 255 - c).collect();
            frame(w, h, y, u, v)
        })
        .collect()
}

/// Window panning diagonally over a large block-noise canvas.
fn noise(w: usize, h: usize, n: usize, vel: usize, rng: &mut ChaCha8Rng) -> Vec<FrameYuv> {
    const CELL: usize = 4;
    let cwid = (4 * w).max(256);
    let chei = (4 * h).max(256);
    let cells_x = cwid.div_ceil(CELL);
    let cells_y = chei.div_ceil(CELL);
    let detail = texture_detail(rng);
    let coarse: Vec<u8> = (0..cells_x * cells_y).map(|_| rng.random()).collect();
    let fine: Vec<i16> = (0..cwid * chei).map(|_| rng.random_range(-20..=20)).collect();
    let blobs = smooth_noise(cwid, chei, 32, rng);
    let canvas: Vec<u8> = (0..cwid * chei)
        .map(|i| {
            let (x, y) = (i % cwid, i / cwid);
            let texture = (coarse[(y / CELL) * cells_x + x / CELL] as f64 - 127.5) * 0.6 + fine[i] as f64;
            (128.0 + blobs[i] + detail * texture).round().clamp(0.0, 255.0) as u8
        })
        .collect();
    let tint: Vec<u8> = (0..cells_x * cells_y).map(|_| rng.random_range(96..160)).collect();
    let (cw, ch) = chroma_dims(w, h);
    (0..n)
        .map(|t| {
            let ox = vel * t;
            let oy = t;
            let y = (0..w * h)
                .map(|i| canvas[((i / w + oy) % chei) * cwid + (i % w + ox) % cwid])
                .collect();
            let u: Vec<u8> = (0..cw * ch)
                .map(|i| {
                    let x = (2 * (i % cw) + ox) % cwid;
                    let yy = (2 * (i / cw) + oy) % chei;
                    tint[(yy / CELL) * cells_x + x / CELL]
                })
                .collect();
            let v = u.iter().map(|&c| 255 - c).collect();
            frame(w, h, y, u, v)
        })
        .collect()
}

/// A face-like ellipse drifting across a textured wall, with a mouth that
/// opens and closes and eyes that blink.
fn talking_head(w: usize, h: usize, n: usize, vel: usize, rng: &mut ChaCha8Rng) -> Vec<FrameYuv> {
    let (cw, ch) = chroma_dims(w, h);
    let detail = texture_detail(rng);
    let grain: Vec<f64> = (0..w * h).map(|_| rng.random_range(-12.0..=12.0) * detail).collect();
    let rx = (w as f64 * 0.22).max(3.0);
    let ry = (h as f64 * 0.32).max(3.0);
    let span = w as f64 + 2.0 * rx;
    let start = rng.random_range(0.0..span);
    let blink_phase = rng.random_range(0..40usize);
    (0..n)
        .map(|t| {
            let cx = (start + (vel * t) as f64) % span - rx;
            let cy = h as f64 * 0.5 + ((t % 24) as f64 - 12.0).abs() * 0.25;
            let mouth_open = 0.04 + 0.10 * ((t % 6) as f64 / 5.0);
            let eyes_closed = (t + blink_phase) % 40 < 3;
            // the camera pans, so the wall slides by `vel` every frame
            let mut y: Vec<u8> = (0..w * h)
                .map(|i| {
                    let x = i % w + vel * t;
                    let stripe = if (x / 5).is_multiple_of(2) { -20.0 } else { 20.0 };
                    (90.0 + stripe * detail + wave(x, 40, 40.0) + grain[i]).round().clamp(0.0, 255.0) as u8
                })
                .collect();
            let mut u = vec![128u8; cw * ch];
            let mut v = vec![128u8; cw * ch];
            for py in 0..h {
                for px in 0..w {
                    let dx = (px as f64 + 0.5 - cx) / rx;
                    let dy = (py as f64 + 0.5 - cy) / ry;
                    if dx * dx + dy * dy > 1.0 {
                        continue;
                    }
                    let mut luma = if dy < -0.55 { 30 } else { 175 }; // hair / skin
                    let eye = ((dx.abs() - 0.38).powi(2) + (dy + 0.2).powi(2)) < 0.018;
                    if eye {
                        luma = if eyes_closed { 150 } else { 20 };
                    }
                    let mouth = (dx / 0.4).powi(2) + ((dy - 0.45) / mouth_open).powi(2) < 1.0;
                    if mouth {
                        luma = 60;
                    }
                    y[py * w + px] = luma;
                    let ci = (py / 2) * cw + px / 2;
                    if luma == 175 {
                        u[ci] = 108;
                        v[ci] = 152;
                    }
                }
            }
            frame(w, h, y, u, v)
        })
        .collect()
}
