//! Per-clip feature vectors and labeled datasets.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spatial::{compute_pbr_with, IntraCoderConfig, PbrResult, SpatialError};
use crate::temporal::{detect_freezes_with, DecimateThresholds, TemporalError, TemporalResult};
use crate::video_io::{attach_recorded_bitrate, read_y4m, ClipMeta, FrameYuv, VideoError};
use crate::Execution;

pub const N_FEATURES: usize = 4;
pub const FEATURE_NAMES: [&str; N_FEATURES] = ["pbr_percent", "freeze_ratio", "num_freezes", "total_freeze_seconds"];
pub const EXTRACTOR_VERSION: &str = "vqoe-features/1";
pub const MOS_MIN: f64 = 1.0;
pub const MOS_MAX: f64 = 5.0;

const CACHE_DIR: &str = ".vqoe-cache";

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error(transparent)]
    Video(#[from] VideoError),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
    #[error(transparent)]
    Temporal(#[from] TemporalError),
    #[error("row {row}: MOS {mos} outside [1, 5]")]
    MosOutOfRange { row: usize, mos: f64 },
    #[error("row {row}: clip file {path} not found")]
    MissingFile { row: usize, path: PathBuf },
    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("manifest {path}: {reason}")]
    Manifest { path: PathBuf, reason: String },
    #[error("clip {clip_id}: {source}")]
    Clip {
        clip_id: String,
        #[source]
        source: Box<FeatureError>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The model input: PBR, freeze ratio, freeze count and total freeze time,
/// always in that order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QoeFeatures {
    pub pbr_percent: f64,
    pub freeze_ratio: f64,
    pub num_freezes: u32,
    pub total_freeze_seconds: f64,
}

impl QoeFeatures {
    pub fn to_array(&self) -> [f64; N_FEATURES] {
        [
            self.pbr_percent,
            self.freeze_ratio,
            self.num_freezes as f64,
            self.total_freeze_seconds,
        ]
    }

    pub fn is_valid(&self) -> bool {
        [self.pbr_percent, self.freeze_ratio, self.total_freeze_seconds]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MosSample {
    pub clip_id: String,
    pub features: QoeFeatures,
    pub mos: f64,
}

/// Everything the metrics produced for one clip.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub features: QoeFeatures,
    pub pbr: PbrResult,
    pub temporal: TemporalResult,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractOptions {
    pub coder: IntraCoderConfig,
    pub thresholds: DecimateThresholds,
    pub exec: Execution,
    pub use_cache: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            coder: IntraCoderConfig::default(),
            thresholds: DecimateThresholds::default(),
            exec: Execution::default(),
            use_cache: true,
        }
    }
}

impl ExtractOptions {
    /// Version string folding in every parameter that changes the features.
    pub fn fingerprint(&self) -> String {
        format!(
            "{EXTRACTOR_VERSION};qp={};hi={};lo={};frac={}",
            self.coder.qp(),
            self.thresholds.hi,
            self.thresholds.lo,
            self.thresholds.frac
        )
    }
}

pub fn extract_features(
    frames: &[FrameYuv],
    meta: &ClipMeta,
    coder: &IntraCoderConfig,
    thresholds: &DecimateThresholds,
) -> Result<QoeFeatures, FeatureError> {
    extract_with(frames, meta, coder, thresholds, Execution::default()).map(|e| e.features)
}

pub fn extract_with(
    frames: &[FrameYuv],
    meta: &ClipMeta,
    coder: &IntraCoderConfig,
    thresholds: &DecimateThresholds,
    exec: Execution,
) -> Result<Extraction, FeatureError> {
    let pbr = compute_pbr_with(frames, meta, coder, exec)?;
    let temporal = detect_freezes_with(frames, meta, thresholds, exec)?;
    let features = QoeFeatures {
        pbr_percent: pbr.pbr_percent,
        freeze_ratio: temporal.freeze_ratio,
        num_freezes: temporal.num_freezes as u32,
        total_freeze_seconds: temporal.total_freeze_seconds,
    };
    Ok(Extraction {
        features,
        pbr,
        temporal,
    })
}

/// One manifest row. `path` is relative to the manifest's directory unless
/// absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub clip_id: String,
    pub path: String,
    pub recorded_bitrate_bps: f64,
    pub mos: f64,
}

pub fn read_manifest(manifest: &Path) -> Result<Vec<ManifestRow>, FeatureError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(manifest)
        .map_err(|e| FeatureError::Manifest {
            path: manifest.to_path_buf(),
            reason: e.to_string(),
        })?;
    let headers = reader.headers().map_err(|e| FeatureError::Manifest {
        path: manifest.to_path_buf(),
        reason: e.to_string(),
    })?;
    for col in ["clip_id", "path", "recorded_bitrate_bps", "mos"] {
        if !headers.iter().any(|h| h == col) {
            return Err(FeatureError::Manifest {
                path: manifest.to_path_buf(),
                reason: format!("missing column `{col}`"),
            });
        }
    }
    let mut rows = Vec::new();
    for (i, record) in reader.deserialize::<ManifestRow>().enumerate() {
        let row = i + 1;
        let r = record.map_err(|e| FeatureError::MalformedRow {
            row,
            reason: e.to_string(),
        })?;
        if !(MOS_MIN..=MOS_MAX).contains(&r.mos) {
            return Err(FeatureError::MosOutOfRange { row, mos: r.mos });
        }
        if !(r.recorded_bitrate_bps.is_finite() && r.recorded_bitrate_bps > 0.0) {
            return Err(FeatureError::MalformedRow {
                row,
                reason: format!("recorded_bitrate_bps {} is not positive", r.recorded_bitrate_bps),
            });
        }
        rows.push(r);
    }
    Ok(rows)
}

pub fn write_manifest(path: &Path, rows: &[ManifestRow]) -> Result<(), FeatureError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| FeatureError::Manifest {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    for r in rows {
        w.serialize(r).map_err(|e| FeatureError::Manifest {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CacheEntry {
    clip_id: String,
    pbr_percent: f64,
    freeze_ratio: f64,
    num_freezes: u32,
    total_freeze_seconds: f64,
    extractor_version: String,
    recorded_bitrate_bps: f64,
    source: String,
    source_len: u64,
    source_mtime_ns: u128,
}

fn cache_path(dir: &Path, clip_id: &str) -> PathBuf {
    let safe: String = clip_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    dir.join(CACHE_DIR).join(format!("{safe}.json"))
}

fn read_cache(path: &Path, expect: &CacheEntry) -> Option<QoeFeatures> {
    let entry: CacheEntry = serde_json::from_str(&fs::read_to_string(path).ok()?).ok()?;
    let same_inputs = entry.clip_id == expect.clip_id
        && entry.extractor_version == expect.extractor_version
        && entry.recorded_bitrate_bps == expect.recorded_bitrate_bps
        && entry.source == expect.source
        && entry.source_len == expect.source_len
        && entry.source_mtime_ns == expect.source_mtime_ns;
    same_inputs.then_some(QoeFeatures {
        pbr_percent: entry.pbr_percent,
        freeze_ratio: entry.freeze_ratio,
        num_freezes: entry.num_freezes,
        total_freeze_seconds: entry.total_freeze_seconds,
    })
}

/// Atomic replace: write a temp file in the same directory, then rename.
fn write_cache(path: &Path, entry: &CacheEntry) -> std::io::Result<()> {
    let dir = path.parent().expect("cache path has a parent");
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(serde_json::to_string_pretty(entry).expect("cache entry serializes").as_bytes())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn features_for_row(base: &Path, row_no: usize, row: &ManifestRow, opts: &ExtractOptions) -> Result<QoeFeatures, FeatureError> {
    let clip_path = base.join(&row.path);
    if !clip_path.is_file() {
        return Err(FeatureError::MissingFile {
            row: row_no,
            path: clip_path,
        });
    }
    let stat = fs::metadata(&clip_path)?;
    let mut entry = CacheEntry {
        clip_id: row.clip_id.clone(),
        pbr_percent: 0.0,
        freeze_ratio: 0.0,
        num_freezes: 0,
        total_freeze_seconds: 0.0,
        extractor_version: opts.fingerprint(),
        recorded_bitrate_bps: row.recorded_bitrate_bps,
        source: row.path.clone(),
        source_len: stat.len(),
        source_mtime_ns: stat
            .modified()
            .ok()
            .and_then(|t| t.duration_since(std::time::UNIX_EPOCH).ok())
            .map_or(0, |d| d.as_nanos()),
    };
    let cache = cache_path(base, &row.clip_id);
    if opts.use_cache {
        if let Some(f) = read_cache(&cache, &entry) {
            return Ok(f);
        }
    }
    let wrap = |e: FeatureError| FeatureError::Clip {
        clip_id: row.clip_id.clone(),
        source: Box::new(e),
    };
    let (meta, frames) = read_y4m(&clip_path).map_err(|e| wrap(e.into()))?;
    let meta = attach_recorded_bitrate(meta, row.recorded_bitrate_bps).map_err(|e| wrap(e.into()))?;
    // clips are already spread across threads; keep per-clip work sequential
    let f = extract_with(&frames, &meta, &opts.coder, &opts.thresholds, Execution::Sequential)
        .map_err(wrap)?
        .features;
    if opts.use_cache {
        entry.pbr_percent = f.pbr_percent;
        entry.freeze_ratio = f.freeze_ratio;
        entry.num_freezes = f.num_freezes;
        entry.total_freeze_seconds = f.total_freeze_seconds;
        write_cache(&cache, &entry)?;
    }
    Ok(f)
}

/// Reads a `clip_id,path,recorded_bitrate_bps,mos` manifest and extracts (or
/// loads cached) features for every row, in manifest order.
pub fn load_dataset(manifest: impl AsRef<Path>, opts: &ExtractOptions) -> Result<Vec<MosSample>, FeatureError> {
    let manifest = manifest.as_ref();
    let rows = read_manifest(manifest)?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let indexed: Vec<(usize, &ManifestRow)> = rows.iter().enumerate().map(|(i, r)| (i + 1, r)).collect();
    opts.exec
        .map(&indexed, |&(row_no, row)| {
            features_for_row(base, row_no, row, opts).map(|features| MosSample {
                clip_id: row.clip_id.clone(),
                features,
                mos: row.mos,
            })
        })
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::intra_encode_size;
    use crate::video_io::{write_y4m_file, FrameRate};
    use proptest::prelude::*;

    fn moving_clip(n: usize) -> Vec<FrameYuv> {
        (0..n)
            .map(|t| {
                let mut f = FrameYuv::filled(32, 32, 0, 128, 128).unwrap();
                for (i, p) in f.y_mut().iter_mut().enumerate() {
                    *p = ((i % 32 + t * 5) * 8 % 256) as u8;
                }
                f
            })
            .collect()
    }

    #[test]
    fn pristine_clip_with_matching_bitrate() {
        let frames = moving_clip(40);
        let meta = ClipMeta::new("p", 32, 32, FrameRate::integer(30), 40);
        let bits = intra_encode_size(&frames, &IntraCoderConfig::default()).unwrap();
        let meta = attach_recorded_bitrate(meta.clone(), bits as f64 / meta.duration_seconds()).unwrap();
        let f = extract_features(&frames, &meta, &Default::default(), &Default::default()).unwrap();
        assert_eq!(
            f,
            QoeFeatures {
                pbr_percent: 0.0,
                freeze_ratio: 0.0,
                num_freezes: 0,
                total_freeze_seconds: 0.0
            }
        );
    }

    #[test]
    fn missing_bitrate_propagates() {
        let frames = moving_clip(4);
        let meta = ClipMeta::new("p", 32, 32, FrameRate::integer(30), 4);
        assert!(matches!(
            extract_features(&frames, &meta, &Default::default(), &Default::default()),
            Err(FeatureError::Spatial(SpatialError::MissingRecordedBitrate))
        ));
    }

    fn write_manifest_text(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("manifest.csv");
        fs::write(&p, format!("clip_id,path,recorded_bitrate_bps,mos\n{body}")).unwrap();
        p
    }

    #[test]
    fn manifest_validation() {
        let dir = tempfile::tempdir().unwrap();
        write_y4m_file(dir.path().join("a.y4m"), FrameRate::integer(30), &moving_clip(5)).unwrap();
        let opts = ExtractOptions::default();

        let m = write_manifest_text(dir.path(), "a,a.y4m,100000,5.0\nb,a.y4m,100000,1.0\n");
        let samples = load_dataset(&m, &opts).unwrap();
        assert_eq!(samples.len(), 2);
        assert_eq!(samples[0].mos, 5.0);

        let m = write_manifest_text(dir.path(), "a,a.y4m,100000,4.0\na,a.y4m,100000,5.1\n");
        assert!(matches!(load_dataset(&m, &opts), Err(FeatureError::MosOutOfRange { row: 2, .. })));

        let m = write_manifest_text(dir.path(), "a,nope.y4m,100000,3.0\n");
        assert!(matches!(load_dataset(&m, &opts), Err(FeatureError::MissingFile { row: 1, .. })));

        let m = write_manifest_text(dir.path(), "a,a.y4m,100000,3.0\nb,a.y4m,fast,3.0\n");
        assert!(matches!(load_dataset(&m, &opts), Err(FeatureError::MalformedRow { row: 2, .. })));

        let m = write_manifest_text(dir.path(), "a,a.y4m,0,3.0\n");
        assert!(matches!(load_dataset(&m, &opts), Err(FeatureError::MalformedRow { row: 1, .. })));

        let p = dir.path().join("nohdr.csv");
        fs::write(&p, "clip,path,mos\n").unwrap();
        assert!(matches!(load_dataset(&p, &opts), Err(FeatureError::Manifest { .. })));
    }

    #[test]
    fn three_hundred_rows() {
        let dir = tempfile::tempdir().unwrap();
        write_y4m_file(dir.path().join("a.y4m"), FrameRate::integer(30), &moving_clip(3)).unwrap();
        let body: String = (0..300)
            .map(|i| format!("clip{i:03},a.y4m,{},{}\n", 50_000 + i, 1.0 + (i % 40) as f64 / 10.0))
            .collect();
        let m = write_manifest_text(dir.path(), &body);
        let samples = load_dataset(&m, &ExtractOptions::default()).unwrap();
        assert_eq!(samples.len(), 300);
        assert_eq!(samples[299].clip_id, "clip299");
    }

    #[test]
    fn cache_is_reused_and_invalidated() {
        let dir = tempfile::tempdir().unwrap();
        write_y4m_file(dir.path().join("a.y4m"), FrameRate::integer(30), &moving_clip(6)).unwrap();
        let m = write_manifest_text(dir.path(), "a,a.y4m,100000,3.0\n");
        let opts = ExtractOptions::default();
        let first = load_dataset(&m, &opts).unwrap();
        let cache = cache_path(dir.path(), "a");
        let text = fs::read_to_string(&cache).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["clip_id", "pbr_percent", "freeze_ratio", "num_freezes", "total_freeze_seconds", "extractor_version"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        // a doctored cache entry is served as-is while the inputs match
        let mut doctored = v.clone();
        doctored["freeze_ratio"] = serde_json::json!(0.5);
        fs::write(&cache, doctored.to_string()).unwrap();
        assert_eq!(load_dataset(&m, &opts).unwrap()[0].features.freeze_ratio, 0.5);
        // so does rewriting the clip in place
        write_y4m_file(dir.path().join("a.y4m"), FrameRate::integer(30), &moving_clip(8)).unwrap();
        assert_eq!(load_dataset(&m, &opts).unwrap()[0].features.freeze_ratio, first[0].features.freeze_ratio);
        write_y4m_file(dir.path().join("a.y4m"), FrameRate::integer(30), &moving_clip(6)).unwrap();
        // changing the bitrate invalidates it
        let m = write_manifest_text(dir.path(), "a,a.y4m,200000,3.0\n");
        assert_eq!(load_dataset(&m, &opts).unwrap()[0].features.freeze_ratio, first[0].features.freeze_ratio);
        let no_cache = ExtractOptions {
            use_cache: false,
            ..opts
        };
        assert_eq!(load_dataset(&m, &no_cache).unwrap()[0].features, load_dataset(&m, &opts).unwrap()[0].features);
    }

    proptest! {
        #[test]
        fn json_round_trip(pbr in 0.0f64..100.0, ratio in 0.0f64..1.0, n in 0u32..50, secs in 0.0f64..1e4) {
            let f = QoeFeatures { pbr_percent: pbr, freeze_ratio: ratio, num_freezes: n, total_freeze_seconds: secs };
            let back: QoeFeatures = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
            for (a, b) in f.to_array().iter().zip(back.to_array()) {
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-300));
            }
            prop_assert!(back.is_valid());
        }
    }
}
