//! Labeled corpora on disk: Y4M clips, a manifest and a metadata file.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::degrade::{apply_degradation, DegradationSpec, FreezeSpan, NetworkProfile, SynthLabel};
use super::generate::{generate_pristine_with, ContentKind, MotionParams};
use super::SynthError;
use crate::features::{write_manifest, ManifestRow};
use crate::spatial::{intra_encode_size_with, IntraCoderConfig};
use crate::temporal::{duplicate_flags, DecimateThresholds};
use crate::video_io::{write_y4m_file, ClipMeta, FrameRate, FrameYuv};
use crate::Execution;

pub const GENERATOR_VERSION: &str = "vqoe-synth/1";
pub const MIN_CORPUS_CLIPS: usize = 10;
const MAX_ATTEMPTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusOptions {
    pub width: usize,
    pub height: usize,
    pub fps: FrameRate,
    pub frame_count: usize,
    pub motion: MotionParams,
    pub coder: IntraCoderConfig,
    pub thresholds: DecimateThresholds,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            width: 64,
            height: 64,
            fps: FrameRate::integer(30),
            frame_count: 240,
            motion: MotionParams::default(),
            coder: IntraCoderConfig::default(),
            thresholds: DecimateThresholds::default(),
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusClip {
    pub clip_id: String,
    pub path: String,
    pub kind: ContentKind,
    pub content_seed: u64,
    pub recorded_bitrate_bps: f64,
    pub label: SynthLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub generator_version: String,
    pub seed: u64,
    pub n_clips: usize,
    pub options: CorpusOptions,
    pub clips: Vec<CorpusClip>,
}

impl CorpusSummary {
    pub fn manifest_path(dir: &Path) -> PathBuf {
        dir.join("manifest.csv")
    }

    pub fn metadata_path(dir: &Path) -> PathBuf {
        dir.join("corpus.json")
    }

    pub fn clips_with(&self, profile: NetworkProfile) -> impl Iterator<Item = &CorpusClip> {
        self.clips.iter().filter(move |c| c.label.spec.network_profile == profile)
    }
}

pub fn build_corpus(n_clips: usize, seed: u64, out_dir: &Path) -> Result<CorpusSummary, SynthError> {
    build_corpus_with(n_clips, seed, out_dir, &CorpusOptions::default())
}

/// Writes `n_clips` degraded clips under `out_dir/clips`, `manifest.csv` and
/// `corpus.json`. Profiles are split 30/40/30 bad/average/good and shuffled.
pub fn build_corpus_with(
    n_clips: usize,
    seed: u64,
    out_dir: &Path,
    opts: &CorpusOptions,
) -> Result<CorpusSummary, SynthError> {
    if n_clips < MIN_CORPUS_CLIPS {
        return Err(SynthError::TooFewClips {
            min: MIN_CORPUS_CLIPS,
            got: n_clips,
        });
    }
    let clip_dir = out_dir.join("clips");
    fs::create_dir_all(&clip_dir).map_err(|source| SynthError::Io {
        path: clip_dir.clone(),
        source,
    })?;

    let profiles = profile_plan(n_clips, seed);
    let results = opts.exec.map_range(n_clips, |i| build_clip(i, profiles[i], seed, out_dir, opts));
    let mut clips = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    clips.sort_by(|a, b| a.clip_id.cmp(&b.clip_id));

    let rows: Vec<ManifestRow> = clips
        .iter()
        .map(|c| ManifestRow {
            clip_id: c.clip_id.clone(),
            path: c.path.clone(),
            recorded_bitrate_bps: c.recorded_bitrate_bps,
            mos: c.label.mos,
        })
        .collect();
    write_manifest(&CorpusSummary::manifest_path(out_dir), &rows)?;

    let summary = CorpusSummary {
        generator_version: GENERATOR_VERSION.to_string(),
        seed,
        n_clips,
        options: *opts,
        clips,
    };
    let meta_path = CorpusSummary::metadata_path(out_dir);
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(&meta_path, text).map_err(|source| SynthError::Io { path: meta_path, source })?;
    Ok(summary)
}

fn profile_plan(n: usize, seed: u64) -> Vec<NetworkProfile> {
    let n_bad = (0.3 * n as f64).round() as usize;
    let n_good = n_bad;
    let mut plan = vec![NetworkProfile::Bad; n_bad];
    plan.extend(std::iter::repeat_n(NetworkProfile::Good, n_good));
    plan.extend(std::iter::repeat_n(NetworkProfile::Average, n - n_bad - n_good));
    plan.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    plan
}

fn clip_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Smallest run that counts as a freeze event.
fn min_event_frames(fps: FrameRate) -> usize {
    (fps.num / fps.den) as usize + 1
}

/// Sample a degradation for `profile` on a clip of `n` frames.
pub(crate) fn sample_spec(profile: NetworkProfile, n: usize, fps: FrameRate, rng: &mut ChaCha8Rng) -> DegradationSpec {
    match profile {
        NetworkProfile::Good | NetworkProfile::Custom => DegradationSpec {
            network_profile: profile,
            ..DegradationSpec::pristine()
        },
        NetworkProfile::Average => {
            let max_len = (0.18 * n as f64).floor() as usize;
            let freeze_spans = if max_len >= 1 {
                let len = rng.random_range(max_len.div_ceil(4).max(1)..=max_len);
                let start = rng.random_range(0..n - len);
                vec![FreezeSpan::new(start, len)]
            } else {
                Vec::new()
            };
            DegradationSpec {
                blur_sigma: rng.random_range(1.0..=2.0),
                freeze_spans,
                network_profile: profile,
            }
        }
        NetworkProfile::Bad => {
            let fraction = rng.random_range(0.82..=0.90);
            let frozen = ((fraction * n as f64).round() as usize).min(n.saturating_sub(1));
            let min_len = min_event_frames(fps);
            let k = rng.random_range(2..=3usize).min(frozen / min_len).min(n - frozen).max(1);
            DegradationSpec {
                blur_sigma: rng.random_range(3.0..=5.0),
                freeze_spans: split_spans(n, frozen, k, min_len.min(frozen / k), rng),
                network_profile: profile,
            }
        }
    }
}

/// `k` spans totalling `frozen` frames, each at least `min_len` long, laid out
/// between randomly sized runs of live frames.
fn split_spans(n: usize, frozen: usize, k: usize, min_len: usize, rng: &mut ChaCha8Rng) -> Vec<FreezeSpan> {
    if frozen == 0 || k == 0 {
        return Vec::new();
    }
    let mut lens = vec![min_len; k];
    for _ in 0..frozen - min_len * k {
        lens[rng.random_range(0..k)] += 1;
    }
    // gap 0 holds the first anchor, gaps 1..k-1 the later anchors, gap k is tail
    let live = n - frozen;
    let mut gaps = vec![1usize; k];
    gaps.push(0);
    for _ in 0..live - k {
        gaps[rng.random_range(0..=k)] += 1;
    }
    let mut spans = Vec::with_capacity(k);
    let mut pos = 0;
    for (j, len) in lens.into_iter().enumerate() {
        pos += gaps[j];
        spans.push(FreezeSpan::new(pos - 1, len));
        pos += len;
    }
    spans
}

fn injected_flags(n: usize, spec: &DegradationSpec) -> Vec<bool> {
    let mut flags = vec![false; n];
    for s in &spec.freeze_spans {
        flags[s.start + 1..=s.end()].iter_mut().for_each(|f| *f = true);
    }
    flags
}

fn build_clip(
    index: usize,
    profile: NetworkProfile,
    seed: u64,
    out_dir: &Path,
    opts: &CorpusOptions,
) -> Result<CorpusClip, SynthError> {
    let clip_id = format!("clip_{index:04}");
    let kind = ContentKind::ALL[index % ContentKind::ALL.len()];
    let meta = ClipMeta::new(clip_id.clone(), opts.width, opts.height, opts.fps, opts.frame_count);
    let mut rng = clip_rng(seed, index);
    for _ in 0..MAX_ATTEMPTS {
        let content_seed: u64 = rng.random();
        let spec = sample_spec(profile, opts.frame_count, opts.fps, &mut rng);
        let pristine = generate_pristine_with(kind, &meta, content_seed, opts.motion)?;
        let degraded = apply_degradation(&pristine, &spec)?;
        let flags = duplicate_flags(&degraded, &opts.thresholds, Execution::Sequential)?;
        if flags != injected_flags(degraded.len(), &spec) {
            continue;
        }
        let recorded_bitrate_bps = reference_bitrate(&pristine, &meta, opts)?;
        let rel = format!("clips/{clip_id}.y4m");
        let path = out_dir.join(&rel);
        write_y4m_file(&path, opts.fps, &degraded).map_err(|source| SynthError::Video { path, source })?;
        return Ok(CorpusClip {
            clip_id,
            path: rel,
            kind,
            content_seed,
            recorded_bitrate_bps,
            label: SynthLabel::new(spec, opts.frame_count),
        });
    }
    Err(SynthError::Undetectable { clip_id })
}

/// Intra size of the undegraded clip over its duration, standing in for
/// what a motion-compensated encoder would have spent on it.
fn reference_bitrate(pristine: &[FrameYuv], meta: &ClipMeta, opts: &CorpusOptions) -> Result<f64, SynthError> {
    let bits = intra_encode_size_with(pristine, &opts.coder, Execution::Sequential)?;
    Ok(bits as f64 / meta.fps.seconds(pristine.len()))
}
