//! Duplicate-frame detection and freeze segmentation.
//!
//! A frame is a duplicate of its predecessor when no 8x8 luma block differs
//! by more than `hi` (sum of absolute differences) and at most a `frac`
//! fraction of blocks differ by more than `lo`. Maximal runs of duplicates
//! lasting longer than one second are freeze events.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block::{grid, load_block, BLOCK_AREA};
use crate::video_io::{ClipMeta, FrameYuv};
use crate::Execution;

#[derive(Debug, Error, PartialEq)]
pub enum TemporalError {
    #[error("need at least two frames, got {0}")]
    EmptyClip(usize),
    #[error("frame {index} is {actual:?}, expected {expected:?}")]
    DimensionMismatch {
        index: usize,
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecimateThresholds {
    pub hi: u32,
    pub lo: u32,
    pub frac: f64,
}

impl Default for DecimateThresholds {
    fn default() -> Self {
        DecimateThresholds {
            hi: 64 * 12,
            lo: 64 * 5,
            frac: 0.1,
        }
    }
}

impl DecimateThresholds {
    pub fn new(hi: u32, lo: u32, frac: f64) -> Result<Self, TemporalError> {
        if lo > hi {
            return Err(TemporalError::InvalidThresholds(format!("lo {lo} > hi {hi}")));
        }
        if !(0.0..=1.0).contains(&frac) {
            return Err(TemporalError::InvalidThresholds(format!("frac {frac} outside [0, 1]")));
        }
        Ok(DecimateThresholds { hi, lo, frac })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreezeEvent {
    pub start_frame: usize,
    /// Inclusive.
    pub end_frame: usize,
    pub duration_seconds: f64,
}

impl FreezeEvent {
    pub fn frames(&self) -> usize {
        self.end_frame - self.start_frame + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalResult {
    pub freeze_ratio: f64,
    pub duplicate_frames: usize,
    pub num_freezes: usize,
    pub total_freeze_seconds: f64,
    pub events: Vec<FreezeEvent>,
    /// Every frame after the first repeats its predecessor; the clip is a
    /// still image and the freeze metrics say nothing about stalls.
    pub still_clip: bool,
}

fn dims(f: &FrameYuv) -> (usize, usize) {
    (f.width(), f.height())
}

fn block_sad(a: &[u8; BLOCK_AREA], b: &[u8; BLOCK_AREA]) -> u32 {
    a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y) as u32).sum()
}

/// Duplicate test on the luma planes of two frames.
pub fn is_duplicate(prev: &FrameYuv, curr: &FrameYuv, th: &DecimateThresholds) -> Result<bool, TemporalError> {
    if !prev.same_dimensions(curr) {
        return Err(TemporalError::DimensionMismatch {
            index: 1,
            expected: dims(prev),
            actual: dims(curr),
        });
    }
    Ok(duplicate_unchecked(prev, curr, th))
}

fn duplicate_unchecked(prev: &FrameYuv, curr: &FrameYuv, th: &DecimateThresholds) -> bool {
    let (w, h) = dims(prev);
    let (gw, gh) = grid(w, h);
    let total = gw * gh;
    let mut a = [0u8; BLOCK_AREA];
    let mut b = [0u8; BLOCK_AREA];
    let mut changed = 0usize;
    for by in 0..gh {
        for bx in 0..gw {
            load_block(prev.y(), w, h, bx, by, &mut a);
            load_block(curr.y(), w, h, bx, by, &mut b);
            let sad = block_sad(&a, &b);
            if sad > th.hi {
                return false;
            }
            if sad > th.lo {
                changed += 1;
            }
        }
    }
    changed as f64 <= th.frac * total as f64
}

/// Per-frame duplicate flags; `flags[0]` is always false.
pub fn duplicate_flags(frames: &[FrameYuv], th: &DecimateThresholds, exec: Execution) -> Result<Vec<bool>, TemporalError> {
    if let Some(first) = frames.first() {
        for (index, f) in frames.iter().enumerate() {
            if !f.same_dimensions(first) {
                return Err(TemporalError::DimensionMismatch {
                    index,
                    expected: dims(first),
                    actual: dims(f),
                });
            }
        }
    }
    let mut flags = vec![false];
    flags.extend(exec.map_range(frames.len().saturating_sub(1), |i| {
        duplicate_unchecked(&frames[i], &frames[i + 1], th)
    }));
    flags.truncate(frames.len());
    Ok(flags)
}

/// Turns duplicate flags into a [`TemporalResult`].
pub fn segment_freezes(flags: &[bool], meta: &ClipMeta) -> TemporalResult {
    let n = flags.len();
    let duplicate_frames = flags.iter().filter(|&&d| d).count();
    let mut events = Vec::new();
    let mut i = 0;
    while i < n {
        if !flags[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && flags[i] {
            i += 1;
        }
        let len = i - start;
        if meta.fps.exceeds_one_second(len) {
            events.push(FreezeEvent {
                start_frame: start,
                end_frame: i - 1,
                duration_seconds: meta.fps.seconds(len),
            });
        }
    }
    TemporalResult {
        freeze_ratio: if n == 0 { 0.0 } else { duplicate_frames as f64 / n as f64 },
        duplicate_frames,
        num_freezes: events.len(),
        // fold from +0.0: an empty f64 sum is -0.0
        total_freeze_seconds: events.iter().fold(0.0, |acc, e| acc + e.duration_seconds),
        events,
        still_clip: n >= 2 && duplicate_frames == n - 1,
    }
}

pub fn detect_freezes(frames: &[FrameYuv], meta: &ClipMeta, th: &DecimateThresholds) -> Result<TemporalResult, TemporalError> {
    detect_freezes_with(frames, meta, th, Execution::default())
}

pub fn detect_freezes_with(
    frames: &[FrameYuv],
    meta: &ClipMeta,
    th: &DecimateThresholds,
    exec: Execution,
) -> Result<TemporalResult, TemporalError> {
    if frames.len() < 2 {
        return Err(TemporalError::EmptyClip(frames.len()));
    }
    let flags = duplicate_flags(frames, th, exec)?;
    Ok(segment_freezes(&flags, meta))
}
