//! Spatial quality: perceptual bitrate (PBR) from an intra-only block coder,
//! and a DCT zero-coefficient blur score kept as a comparison baseline.
//!
//! The intra coder is a cost model only. Each plane is tiled into 8x8
//! blocks, level shifted, transformed, quantized with an H.264-style step and
//! costed with Exp-Golomb code lengths. No prediction between frames or
//! between blocks is used, so the resulting size depends on how much detail
//! each picture holds and not on how the picture moves.

pub mod dct;
pub mod entropy;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block::{grid, load_block, BLOCK, BLOCK_AREA};
use crate::video_io::{ClipMeta, FrameYuv};
use crate::Execution;

/// Fixed per-frame header cost.
pub const FRAME_HEADER_BITS: u64 = 32;
pub const MAX_QP: u8 = 51;
pub const DEFAULT_QP: u8 = 30;

/// First zigzag position counted as high frequency by the blur baseline.
const BASELINE_HF_START: usize = 32;

#[derive(Debug, Error, PartialEq)]
pub enum SpatialError {
    #[error("clip has no frames")]
    EmptyClip,
    #[error("frame {index} is {actual:?}, expected {expected:?}")]
    DimensionMismatch {
        index: usize,
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("clip metadata has no recorded bitrate")]
    MissingRecordedBitrate,
    #[error("qp {0} outside 0..=51")]
    QpOutOfRange(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntraCoderConfig {
    qp: u8,
}

impl Default for IntraCoderConfig {
    fn default() -> Self {
        IntraCoderConfig { qp: DEFAULT_QP }
    }
}

impl IntraCoderConfig {
    pub fn new(qp: u8) -> Result<Self, SpatialError> {
        if qp > MAX_QP {
            return Err(SpatialError::QpOutOfRange(qp));
        }
        Ok(IntraCoderConfig { qp })
    }

    pub fn qp(&self) -> u8 {
        self.qp
    }

    pub fn block_size(&self) -> usize {
        BLOCK
    }

    /// Quantizer step, doubling every 6 QP: `2^((qp - 4) / 6)`.
    pub fn q_step(&self) -> f64 {
        2f64.powf((self.qp as f64 - 4.0) / 6.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PbrResult {
    pub intra_bitrate_bps: f64,
    pub recorded_bitrate_bps: f64,
    pub pbr_percent: f64,
}

fn check_frames(frames: &[FrameYuv]) -> Result<(), SpatialError> {
    let first = frames.first().ok_or(SpatialError::EmptyClip)?;
    for (index, f) in frames.iter().enumerate() {
        if !f.same_dimensions(first) {
            return Err(SpatialError::DimensionMismatch {
                index,
                expected: (first.width(), first.height()),
                actual: (f.width(), f.height()),
            });
        }
    }
    Ok(())
}

fn quantize(block: &[u8; BLOCK_AREA], q_step: f64) -> [i32; BLOCK_AREA] {
    let coef = dct::forward(&dct::level_shift(block));
    let mut levels = [0i32; BLOCK_AREA];
    for (l, c) in levels.iter_mut().zip(coef.iter()) {
        // f64::round rounds half away from zero
        *l = (c / q_step).round() as i32;
    }
    levels
}

fn plane_bits(plane: &[u8], width: usize, height: usize, q_step: f64) -> u64 {
    let (gw, gh) = grid(width, height);
    let mut block = [0u8; BLOCK_AREA];
    let mut bits = 0u64;
    for by in 0..gh {
        for bx in 0..gw {
            load_block(plane, width, height, bx, by, &mut block);
            bits += entropy::block_bits(&quantize(&block, q_step)) as u64;
        }
    }
    bits
}

/// Coded size of one frame in bits, header included.
pub fn frame_bits(frame: &FrameYuv, config: &IntraCoderConfig) -> u64 {
    let q_step = config.q_step();
    FRAME_HEADER_BITS
        + frame
            .planes()
            .iter()
            .map(|&(p, w, h)| plane_bits(p, w, h, q_step))
            .sum::<u64>()
}

/// Total intra-only coded size of a clip, in bits.
pub fn intra_encode_size(frames: &[FrameYuv], config: &IntraCoderConfig) -> Result<u64, SpatialError> {
    intra_encode_size_with(frames, config, Execution::default())
}

pub fn intra_encode_size_with(
    frames: &[FrameYuv],
    config: &IntraCoderConfig,
    exec: Execution,
) -> Result<u64, SpatialError> {
    check_frames(frames)?;
    Ok(exec.map(frames, |f| frame_bits(f, config)).into_iter().sum())
}

/// Perceptual bitrate: how far the intra-coded bitrate falls below the
/// recorded bitrate, as a percentage of the recorded bitrate, floored at 0.
pub fn compute_pbr(
    frames: &[FrameYuv],
    meta: &ClipMeta,
    config: &IntraCoderConfig,
) -> Result<PbrResult, SpatialError> {
    compute_pbr_with(frames, meta, config, Execution::default())
}

pub fn compute_pbr_with(
    frames: &[FrameYuv],
    meta: &ClipMeta,
    config: &IntraCoderConfig,
    exec: Execution,
) -> Result<PbrResult, SpatialError> {
    let recorded = meta
        .recorded_bitrate_bps
        .ok_or(SpatialError::MissingRecordedBitrate)?;
    let bits = intra_encode_size_with(frames, config, exec)?;
    let duration = meta.fps.seconds(frames.len());
    let intra = bits as f64 / duration;
    Ok(PbrResult {
        intra_bitrate_bps: intra,
        recorded_bitrate_bps: recorded,
        pbr_percent: pbr_percent(recorded, intra),
    })
}

pub fn pbr_percent(recorded_bps: f64, intra_bps: f64) -> f64 {
    ((recorded_bps - intra_bps) / recorded_bps).max(0.0) * 100.0
}

/// Zero-coefficient blur score in `[0, 1]`, higher meaning blurrier.
///
/// For every luma block, the fraction of high-frequency positions (zigzag
/// index 32 and up) that quantize to zero at QP 30, averaged over blocks and
/// then over frames.
pub fn dct_blur_baseline(frames: &[FrameYuv]) -> Result<f64, SpatialError> {
    check_frames(frames)?;
    let q_step = IntraCoderConfig::default().q_step();
    let hf = &entropy::ZIGZAG[BASELINE_HF_START..];
    let per_frame = Execution::default().map(frames, |frame| {
        let (w, h) = (frame.width(), frame.height());
        let (gw, gh) = grid(w, h);
        let mut block = [0u8; BLOCK_AREA];
        let mut acc = 0.0;
        for by in 0..gh {
            for bx in 0..gw {
                load_block(frame.y(), w, h, bx, by, &mut block);
                let levels = quantize(&block, q_step);
                let zeros = hf.iter().filter(|&&p| levels[p] == 0).count();
                acc += zeros as f64 / hf.len() as f64;
            }
        }
        acc / (gw * gh) as f64
    });
    Ok(per_frame.iter().sum::<f64>() / frames.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::video_io::{attach_recorded_bitrate, FrameRate};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise_frame(w: usize, h: usize, rng: &mut ChaCha8Rng) -> FrameYuv {
        let (cw, ch) = (w.div_ceil(2), h.div_ceil(2));
        let mut plane = |n| (0..n).map(|_| rng.random::<u8>()).collect::<Vec<_>>();
        let y = plane(w * h);
        let u = plane(cw * ch);
        let v = plane(cw * ch);
        FrameYuv::new(w, h, y, u, v).unwrap()
    }

    #[test]
    fn q_step_mapping() {
        assert!((IntraCoderConfig::new(4).unwrap().q_step() - 1.0).abs() < 1e-15);
        assert!((IntraCoderConfig::new(10).unwrap().q_step() - 2.0).abs() < 1e-12);
        let steps: Vec<f64> = (0..=51).map(|qp| IntraCoderConfig::new(qp).unwrap().q_step()).collect();
        assert!(steps.iter().all(|&s| s > 0.0));
        assert!(steps.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(IntraCoderConfig::default().qp(), 30);
        assert_eq!(IntraCoderConfig::new(52), Err(SpatialError::QpOutOfRange(52)));
    }

    #[test]
    fn mid_gray_clip_costs_one_bit_per_block() {
        // 64x64 luma -> 64 blocks; 32x32 chroma -> 16 blocks each; 1 bit per
        // all-zero block plus the 32-bit frame header.
        let frames = vec![FrameYuv::filled(64, 64, 128, 128, 128).unwrap(); 10];
        let expected = 10 * (32 + 64 + 16 + 16);
        for qp in [0, 30, 51] {
            let cfg = IntraCoderConfig::new(qp).unwrap();
            assert_eq!(intra_encode_size(&frames, &cfg).unwrap(), expected);
        }
    }

    #[test]
    fn higher_qp_never_costs_more() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let frames: Vec<_> = (0..3).map(|_| noise_frame(40, 24, &mut rng)).collect();
        let size = |qp| intra_encode_size(&frames, &IntraCoderConfig::new(qp).unwrap()).unwrap();
        assert!(size(40) <= size(30));
        assert!(size(30) <= size(20));
    }

    #[test]
    fn errors() {
        let cfg = IntraCoderConfig::default();
        assert_eq!(intra_encode_size(&[], &cfg), Err(SpatialError::EmptyClip));
        let frames = vec![
            FrameYuv::filled(16, 16, 0, 0, 0).unwrap(),
            FrameYuv::filled(16, 24, 0, 0, 0).unwrap(),
        ];
        assert!(matches!(
            intra_encode_size(&frames, &cfg),
            Err(SpatialError::DimensionMismatch { index: 1, .. })
        ));
        let meta = ClipMeta::new("x", 16, 16, FrameRate::integer(30), 2);
        let same = vec![FrameYuv::filled(16, 16, 0, 0, 0).unwrap(); 2];
        assert_eq!(compute_pbr(&same, &meta, &cfg), Err(SpatialError::MissingRecordedBitrate));
        assert_eq!(dct_blur_baseline(&[]), Err(SpatialError::EmptyClip));
    }

    #[test]
    fn pbr_of_equal_bitrates_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let frames: Vec<_> = (0..4).map(|_| noise_frame(32, 32, &mut rng)).collect();
        let cfg = IntraCoderConfig::default();
        let meta = ClipMeta::new("n", 32, 32, FrameRate::integer(30), frames.len());
        let bits = intra_encode_size(&frames, &cfg).unwrap();
        let intra_bps = bits as f64 / meta.duration_seconds();
        let meta = attach_recorded_bitrate(meta, intra_bps).unwrap();
        let r = compute_pbr(&frames, &meta, &cfg).unwrap();
        assert_eq!(r.pbr_percent, 0.0);
        assert_eq!(r.intra_bitrate_bps, intra_bps);
        // recorded below intra clamps to zero
        let meta = attach_recorded_bitrate(meta, intra_bps / 2.0).unwrap();
        assert_eq!(compute_pbr(&frames, &meta, &cfg).unwrap().pbr_percent, 0.0);
        // recorded at twice intra gives 50%
        let meta = attach_recorded_bitrate(meta, intra_bps * 2.0).unwrap();
        assert!((compute_pbr(&frames, &meta, &cfg).unwrap().pbr_percent - 50.0).abs() < 1e-9);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let frames: Vec<_> = (0..6).map(|_| noise_frame(48, 40, &mut rng)).collect();
        let cfg = IntraCoderConfig::default();
        assert_eq!(
            intra_encode_size_with(&frames, &cfg, Execution::Sequential).unwrap(),
            intra_encode_size_with(&frames, &cfg, Execution::Parallel).unwrap()
        );
    }

    #[test]
    fn baseline_extremes() {
        let flat = vec![FrameYuv::filled(64, 48, 200, 128, 128).unwrap(); 3];
        assert_eq!(dct_blur_baseline(&flat).unwrap(), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let noise: Vec<_> = (0..3).map(|_| noise_frame(64, 64, &mut rng)).collect();
        let score = dct_blur_baseline(&noise).unwrap();
        assert!(score < 0.5, "{score}");
        // frozen regression value: 671 of 6144 high-frequency positions are zero
        assert_eq!(score, 0.10921223958333333);
        assert!((score - 671.0 / 6144.0).abs() < 1e-15);
    }
}
