//! Blur and freeze injection.

use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::video_io::FrameYuv;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkProfile {
    Good,
    Average,
    Bad,
    Custom,
}

impl NetworkProfile {
    pub fn as_str(self) -> &'static str {
        match self {
            NetworkProfile::Good => "good",
            NetworkProfile::Average => "average",
            NetworkProfile::Bad => "bad",
            NetworkProfile::Custom => "custom",
        }
    }
}

/// A frozen stretch: frames `start + 1 ..= start + length` repeat `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreezeSpan {
    pub start: usize,
    pub length: usize,
}

impl FreezeSpan {
    pub fn new(start: usize, length: usize) -> Self {
        FreezeSpan { start, length }
    }

    /// Last repeated frame, inclusive.
    pub fn end(&self) -> usize {
        self.start + self.length
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationSpec {
    pub blur_sigma: f64,
    pub freeze_spans: Vec<FreezeSpan>,
    pub network_profile: NetworkProfile,
}

impl DegradationSpec {
    pub fn pristine() -> Self {
        DegradationSpec {
            blur_sigma: 0.0,
            freeze_spans: Vec::new(),
            network_profile: NetworkProfile::Good,
        }
    }

    /// Repeated frames over the clip length.
    pub fn freeze_fraction(&self, frame_count: usize) -> f64 {
        if frame_count == 0 {
            return 0.0;
        }
        self.freeze_spans.iter().map(|s| s.length).sum::<usize>() as f64 / frame_count as f64
    }

    /// Spans sorted by start, checked against `frame_count`.
    pub fn validate(&self, frame_count: usize) -> Result<Vec<FreezeSpan>, SynthError> {
        if !(self.blur_sigma.is_finite() && self.blur_sigma >= 0.0) {
            return Err(SynthError::InvalidSigma(self.blur_sigma));
        }
        let mut spans = self.freeze_spans.clone();
        spans.sort_by_key(|s| s.start);
        for s in &spans {
            if s.length == 0 || s.end() >= frame_count {
                return Err(SynthError::SpanOutOfBounds {
                    start: s.start,
                    length: s.length,
                    frame_count,
                });
            }
        }
        for pair in spans.windows(2) {
            if pair[1].start <= pair[0].end() {
                return Err(SynthError::OverlappingSpans {
                    first: pair[0],
                    second: pair[1],
                });
            }
        }
        Ok(spans)
    }
}

/// Synthetic MOS in `[1, 5]`, decreasing in blur and in frozen fraction.
/// A test oracle only, not a model of human ratings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthLabel {
    pub mos: f64,
    pub spec: DegradationSpec,
}

impl SynthLabel {
    pub fn new(spec: DegradationSpec, frame_count: usize) -> Self {
        SynthLabel {
            mos: synthetic_mos(spec.blur_sigma, spec.freeze_fraction(frame_count)),
            spec,
        }
    }
}

pub fn synthetic_mos(blur_sigma: f64, freeze_fraction: f64) -> f64 {
    (5.0 - 3.0 * (blur_sigma / 5.0).min(1.0) - 2.5 * freeze_fraction).clamp(1.0, 5.0)
}

pub fn apply_degradation(frames: &[FrameYuv], spec: &DegradationSpec) -> Result<Vec<FrameYuv>, SynthError> {
    let spans = spec.validate(frames.len())?;
    let mut repeated = vec![false; frames.len()];
    for s in &spans {
        repeated[s.start + 1..=s.end()].iter_mut().for_each(|r| *r = true);
    }
    let mut out: Vec<FrameYuv> = frames
        .iter()
        .zip(&repeated)
        .map(|(f, &rep)| if rep || spec.blur_sigma == 0.0 { f.clone() } else { blur_frame(f, spec.blur_sigma) })
        .collect();
    for s in spans {
        for i in s.start + 1..=s.end() {
            out[i] = out[s.start].clone();
        }
    }
    Ok(out)
}

/// Luma at `sigma`, chroma at `sigma / 2` to match its half resolution.
pub fn blur_frame(frame: &FrameYuv, sigma: f64) -> FrameYuv {
    let (w, h) = (frame.width(), frame.height());
    let (cw, ch) = (frame.chroma_width(), frame.chroma_height());
    let y = blur_plane(frame.y(), w, h, sigma);
    let u = blur_plane(frame.u(), cw, ch, sigma / 2.0);
    let v = blur_plane(frame.v(), cw, ch, sigma / 2.0);
    FrameYuv::new(w, h, y, u, v).expect("blur keeps plane sizes")
}

pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as usize;
    let raw: Vec<f64> = (0..=2 * r)
        .map(|i| {
            let x = i as f64 - r as f64;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|k| k / total).collect()
}

/// Mirror an out-of-range index back into `0..n` (edge sample repeated).
fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

pub fn blur_plane(plane: &[u8], w: usize, h: usize, sigma: f64) -> Vec<u8> {
    if sigma <= 0.0 {
        return plane.to_vec();
    }
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as isize;
    let mut tmp = vec![0.0f64; w * h];
    let mut padded = vec![0.0f64; w + 2 * r as usize];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for (i, p) in padded.iter_mut().enumerate() {
            *p = row[reflect(i as isize - r, w)] as f64;
        }
        for (x, out) in tmp[y * w..(y + 1) * w].iter_mut().enumerate() {
            *out = k.iter().zip(&padded[x..]).map(|(kv, p)| kv * p).sum();
        }
    }
    let mut acc = vec![0.0f64; w];
    let mut out = vec![0u8; w * h];
    for y in 0..h {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for (j, kv) in k.iter().enumerate() {
            let src = reflect(y as isize + j as isize - r, h) * w;
            for (a, t) in acc.iter_mut().zip(&tmp[src..src + w]) {
                *a += kv * t;
            }
        }
        for (o, a) in out[y * w..(y + 1) * w].iter_mut().zip(&acc) {
            *o = a.round().clamp(0.0, 255.0) as u8;
        }
    }
    out
}
