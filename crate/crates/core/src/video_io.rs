//! Planar 4:2:0 frames, clip metadata and YUV4MPEG2 reading/writing.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest accepted frame edge; every metric needs at least one full 8x8 block.
pub const MIN_DIMENSION: usize = 8;

const Y4M_MAGIC: &str = "YUV4MPEG2";
const MAX_HEADER_LEN: usize = 4096;

#[derive(Debug, Error)]
pub enum VideoError {
    #[error("malformed y4m header: {0}")]
    MalformedHeader(String),
    #[error("unsupported chroma sampling `{0}`, only 4:2:0 is accepted")]
    UnsupportedChroma(String),
    #[error("frame {index} is truncated")]
    TruncatedFrame { index: usize },
    #[error("frame {index} does not start with a FRAME marker")]
    MalformedFrameHeader { index: usize },
    #[error("odd dimensions {width}x{height} are not valid for 4:2:0")]
    OddDimensions { width: usize, height: usize },
    #[error("frame {width}x{height} is smaller than the 8x8 minimum")]
    FrameTooSmall { width: usize, height: usize },
    #[error("plane `{plane}` has {actual} samples, expected {expected}")]
    PlaneSize {
        plane: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("recorded bitrate must be positive and finite, got {0}")]
    NonPositiveBitrate(f64),
    #[error("frame rate {num}:{den} is not positive")]
    InvalidFrameRate { num: u32, den: u32 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Frames per second as an exact rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrameRate {
    pub num: u32,
    pub den: u32,
}

impl FrameRate {
    pub fn new(num: u32, den: u32) -> Result<Self, VideoError> {
        if num == 0 || den == 0 {
            return Err(VideoError::InvalidFrameRate { num, den });
        }
        Ok(FrameRate { num, den })
    }

    pub const fn integer(fps: u32) -> Self {
        FrameRate { num: fps, den: 1 }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Duration of `frames` frames in seconds.
    pub fn seconds(self, frames: usize) -> f64 {
        frames as f64 * self.den as f64 / self.num as f64
    }

    /// `frames / fps > 1.0`, evaluated exactly.
    pub fn exceeds_one_second(self, frames: usize) -> bool {
        frames as u128 * self.den as u128 > self.num as u128
    }
}

impl fmt::Display for FrameRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.num, self.den)
    }
}

/// One decoded 8-bit planar 4:2:0 picture.
#[derive(Clone, PartialEq, Eq)]
pub struct FrameYuv {
    width: usize,
    height: usize,
    y: Vec<u8>,
    u: Vec<u8>,
    v: Vec<u8>,
}

impl fmt::Debug for FrameYuv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FrameYuv")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

pub fn chroma_dims(width: usize, height: usize) -> (usize, usize) {
    (width.div_ceil(2), height.div_ceil(2))
}

impl FrameYuv {
    pub fn new(
        width: usize,
        height: usize,
        y: Vec<u8>,
        u: Vec<u8>,
        v: Vec<u8>,
    ) -> Result<Self, VideoError> {
        if width < MIN_DIMENSION || height < MIN_DIMENSION {
            return Err(VideoError::FrameTooSmall { width, height });
        }
        let (cw, ch) = chroma_dims(width, height);
        for (plane, data, expected) in [
            ("y", &y, width * height),
            ("u", &u, cw * ch),
            ("v", &v, cw * ch),
        ] {
            if data.len() != expected {
                return Err(VideoError::PlaneSize {
                    plane,
                    expected,
                    actual: data.len(),
                });
            }
        }
        Ok(FrameYuv {
            width,
            height,
            y,
            u,
            v,
        })
    }

    /// A frame with every sample of each plane set to the given value.
    pub fn filled(width: usize, height: usize, y: u8, u: u8, v: u8) -> Result<Self, VideoError> {
        let (cw, ch) = chroma_dims(width, height);
        FrameYuv::new(
            width,
            height,
            vec![y; width * height],
            vec![u; cw * ch],
            vec![v; cw * ch],
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn chroma_width(&self) -> usize {
        self.width.div_ceil(2)
    }

    pub fn chroma_height(&self) -> usize {
        self.height.div_ceil(2)
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn u(&self) -> &[u8] {
        &self.u
    }

    pub fn v(&self) -> &[u8] {
        &self.v
    }

    pub fn y_mut(&mut self) -> &mut [u8] {
        &mut self.y
    }

    pub fn u_mut(&mut self) -> &mut [u8] {
        &mut self.u
    }

    pub fn v_mut(&mut self) -> &mut [u8] {
        &mut self.v
    }

    /// The three planes as `(samples, width, height)`, luma first.
    pub fn planes(&self) -> [(&[u8], usize, usize); 3] {
        let (cw, ch) = (self.chroma_width(), self.chroma_height());
        [
            (&self.y, self.width, self.height),
            (&self.u, cw, ch),
            (&self.v, cw, ch),
        ]
    }

    pub fn same_dimensions(&self, other: &FrameYuv) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Per-clip metadata. `recorded_bitrate_bps` is the bitrate of the clip as it
/// was recorded; raw inputs do not carry it, so it is attached separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipMeta {
    pub clip_id: String,
    pub width: usize,
    pub height: usize,
    pub fps: FrameRate,
    pub frame_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recorded_bitrate_bps: Option<f64>,
}

impl ClipMeta {
    pub fn new(
        clip_id: impl Into<String>,
        width: usize,
        height: usize,
        fps: FrameRate,
        frame_count: usize,
    ) -> Self {
        ClipMeta {
            clip_id: clip_id.into(),
            width,
            height,
            fps,
            frame_count,
            recorded_bitrate_bps: None,
        }
    }

    pub fn duration_seconds(&self) -> f64 {
        self.fps.seconds(self.frame_count)
    }
}

/// Returns `meta` with the recorded bitrate set.
pub fn attach_recorded_bitrate(mut meta: ClipMeta, bitrate_bps: f64) -> Result<ClipMeta, VideoError> {
    if !(bitrate_bps.is_finite() && bitrate_bps > 0.0) {
        return Err(VideoError::NonPositiveBitrate(bitrate_bps));
    }
    meta.recorded_bitrate_bps = Some(bitrate_bps);
    Ok(meta)
}

/// Stream parameters from a YUV4MPEG2 header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Y4mHeader {
    pub width: usize,
    pub height: usize,
    pub fps: FrameRate,
}

impl Y4mHeader {
    fn frame_bytes(&self) -> usize {
        let (cw, ch) = chroma_dims(self.width, self.height);
        self.width * self.height + 2 * cw * ch
    }
}

fn parse_header_line(line: &str) -> Result<Y4mHeader, VideoError> {
    let mut tokens = line.split(' ').filter(|t| !t.is_empty());
    if tokens.next() != Some(Y4M_MAGIC) {
        return Err(VideoError::MalformedHeader("missing YUV4MPEG2 signature".into()));
    }
    let (mut width, mut height, mut fps) = (None, None, None);
    let bad = |what: &str, tok: &str| VideoError::MalformedHeader(format!("bad {what} `{tok}`"));
    for tok in tokens {
        let (tag, val) = tok.split_at(1);
        match tag {
            "W" => width = Some(val.parse::<usize>().map_err(|_| bad("width", tok))?),
            "H" => height = Some(val.parse::<usize>().map_err(|_| bad("height", tok))?),
            "F" => {
                let (n, d) = val.split_once(':').ok_or_else(|| bad("frame rate", tok))?;
                let n = n.parse::<u32>().map_err(|_| bad("frame rate", tok))?;
                let d = d.parse::<u32>().map_err(|_| bad("frame rate", tok))?;
                fps = Some(FrameRate::new(n, d).map_err(|_| bad("frame rate", tok))?);
            }
            "I" if val != "p" => {
                return Err(VideoError::MalformedHeader(format!(
                    "interlacing `{val}` not supported, only progressive"
                )))
            }
            "C" => match val {
                "420" | "420jpeg" | "420paldv" | "420mpeg2" => {}
                other => return Err(VideoError::UnsupportedChroma(other.to_string())),
            },
            // aspect ratio, progressive flag, comments and unknown tags
            _ => {}
        }
    }
    let width = width.ok_or_else(|| VideoError::MalformedHeader("missing W tag".into()))?;
    let height = height.ok_or_else(|| VideoError::MalformedHeader("missing H tag".into()))?;
    let fps = fps.ok_or_else(|| VideoError::MalformedHeader("missing F tag".into()))?;
    if width % 2 != 0 || height % 2 != 0 {
        return Err(VideoError::OddDimensions { width, height });
    }
    if width < MIN_DIMENSION || height < MIN_DIMENSION {
        return Err(VideoError::FrameTooSmall { width, height });
    }
    Ok(Y4mHeader { width, height, fps })
}

/// Reads bytes up to and excluding `\n`. Returns `None` on clean EOF.
fn read_line<R: BufRead>(reader: &mut R, limit: usize) -> io::Result<Option<Vec<u8>>> {
    let mut buf = Vec::new();
    let n = reader.by_ref().take(limit as u64).read_until(b'\n', &mut buf)?;
    if n == 0 {
        return Ok(None);
    }
    if buf.last() == Some(&b'\n') {
        buf.pop();
    } else {
        return Err(io::ErrorKind::UnexpectedEof.into());
    }
    Ok(Some(buf))
}

/// Streaming YUV4MPEG2 reader yielding frames in presentation order.
pub struct Y4mReader<R> {
    reader: R,
    header: Y4mHeader,
    index: usize,
    done: bool,
}

impl<R: BufRead> Y4mReader<R> {
    pub fn new(mut reader: R) -> Result<Self, VideoError> {
        let line = match read_line(&mut reader, MAX_HEADER_LEN) {
            Ok(Some(line)) => line,
            Ok(None) => return Err(VideoError::MalformedHeader("empty input".into())),
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => {
                return Err(VideoError::MalformedHeader("unterminated header".into()))
            }
            Err(e) => return Err(e.into()),
        };
        let line = std::str::from_utf8(&line)
            .map_err(|_| VideoError::MalformedHeader("header is not ASCII".into()))?;
        let header = parse_header_line(line)?;
        Ok(Y4mReader {
            reader,
            header,
            index: 0,
            done: false,
        })
    }

    pub fn header(&self) -> Y4mHeader {
        self.header
    }

    fn read_frame(&mut self) -> Result<Option<FrameYuv>, VideoError> {
        let index = self.index;
        let line = match read_line(&mut self.reader, MAX_HEADER_LEN) {
            Ok(None) => return Ok(None),
            Ok(Some(line)) => line,
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => {
                return Err(VideoError::TruncatedFrame { index })
            }
            Err(e) => return Err(e.into()),
        };
        if !line.starts_with(b"FRAME") {
            return Err(VideoError::MalformedFrameHeader { index });
        }
        let Y4mHeader { width, height, .. } = self.header;
        let mut payload = vec![0u8; self.header.frame_bytes()];
        self.reader.read_exact(&mut payload).map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => VideoError::TruncatedFrame { index },
            _ => VideoError::Io(e),
        })?;
        let luma = width * height;
        let (cw, ch) = chroma_dims(width, height);
        let v = payload.split_off(luma + cw * ch);
        let u = payload.split_off(luma);
        self.index += 1;
        FrameYuv::new(width, height, payload, u, v).map(Some)
    }
}

impl<R: BufRead> Iterator for Y4mReader<R> {
    type Item = Result<FrameYuv, VideoError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.read_frame() {
            Ok(Some(frame)) => Some(Ok(frame)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Opens a `.y4m` file for streaming.
pub fn open_y4m(path: impl AsRef<Path>) -> Result<Y4mReader<BufReader<File>>, VideoError> {
    let file = File::open(path)?;
    Y4mReader::new(BufReader::with_capacity(1 << 20, file))
}

/// Reads a whole clip. The clip id is the file stem.
pub fn read_y4m(path: impl AsRef<Path>) -> Result<(ClipMeta, Vec<FrameYuv>), VideoError> {
    let path = path.as_ref();
    let reader = open_y4m(path)?;
    let header = reader.header();
    let frames = reader.collect::<Result<Vec<_>, _>>()?;
    let clip_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let meta = ClipMeta::new(clip_id, header.width, header.height, header.fps, frames.len());
    Ok((meta, frames))
}

/// Writes frames as a progressive 4:2:0 YUV4MPEG2 stream.
pub fn write_y4m<W: Write>(mut out: W, fps: FrameRate, frames: &[FrameYuv]) -> Result<(), VideoError> {
    let Some(first) = frames.first() else {
        return Err(VideoError::MalformedHeader("cannot write an empty clip".into()));
    };
    let (width, height) = (first.width(), first.height());
    if width % 2 != 0 || height % 2 != 0 {
        return Err(VideoError::OddDimensions { width, height });
    }
    writeln!(out, "{Y4M_MAGIC} W{width} H{height} F{fps} Ip A1:1 C420jpeg")?;
    for frame in frames {
        if !frame.same_dimensions(first) {
            return Err(VideoError::MalformedHeader(format!(
                "frame {}x{} in a {width}x{height} stream",
                frame.width(),
                frame.height()
            )));
        }
        out.write_all(b"FRAME\n")?;
        out.write_all(frame.y())?;
        out.write_all(frame.u())?;
        out.write_all(frame.v())?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_y4m_file(path: impl AsRef<Path>, fps: FrameRate, frames: &[FrameYuv]) -> Result<(), VideoError> {
    let file = File::create(path)?;
    write_y4m(BufWriter::new(file), fps, frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn stream(header: &str, frames: usize, frame_bytes: usize) -> Vec<u8> {
        let mut data = format!("{header}\n").into_bytes();
        for i in 0..frames {
            data.extend_from_slice(b"FRAME\n");
            data.extend(std::iter::repeat_n((i % 251) as u8, frame_bytes));
        }
        data
    }

    #[test]
    fn header_transcription() {
        let data = stream("YUV4MPEG2 W64 H64 F30:1 C420", 90, 64 * 64 * 3 / 2);
        let reader = Y4mReader::new(Cursor::new(data)).unwrap();
        let h = reader.header();
        assert_eq!((h.width, h.height, h.fps), (64, 64, FrameRate::integer(30)));
        let frames: Vec<_> = reader.collect::<Result<_, _>>().unwrap();
        assert_eq!(frames.len(), 90);
        assert_eq!(frames[7].y()[0], 7);
    }

    #[test]
    fn full_hd_header() {
        let header = parse_header_line("YUV4MPEG2 W1920 H1280 F60:1 Ip A1:1").unwrap();
        assert_eq!((header.width, header.height), (1920, 1280));
        assert_eq!(header.fps.as_f64(), 60.0);
    }

    #[test]
    fn rejects_non_420() {
        let err = parse_header_line("YUV4MPEG2 W64 H64 F30:1 C444").unwrap_err();
        assert!(matches!(err, VideoError::UnsupportedChroma(c) if c == "444"));
        assert!(matches!(
            parse_header_line("YUV4MPEG2 W64 H64 F30:1 C422"),
            Err(VideoError::UnsupportedChroma(_))
        ));
    }

    #[test]
    fn malformed_headers() {
        for line in [
            "YUV4MPEG W64 H64 F30:1",
            "YUV4MPEG2 H64 F30:1",
            "YUV4MPEG2 W64 F30:1",
            "YUV4MPEG2 W64 H64",
            "YUV4MPEG2 W64 H64 F30",
            "YUV4MPEG2 W64 H64 F0:1",
            "YUV4MPEG2 Wx H64 F30:1",
            "YUV4MPEG2 W64 H64 F30:1 It",
        ] {
            assert!(
                matches!(parse_header_line(line), Err(VideoError::MalformedHeader(_))),
                "{line}"
            );
        }
        assert!(matches!(
            parse_header_line("YUV4MPEG2 W63 H64 F30:1"),
            Err(VideoError::OddDimensions { .. })
        ));
        assert!(matches!(
            parse_header_line("YUV4MPEG2 W6 H64 F30:1"),
            Err(VideoError::FrameTooSmall { .. })
        ));
    }

    #[test]
    fn truncated_payload() {
        let mut data = stream("YUV4MPEG2 W16 H16 F25:1", 3, 16 * 16 * 3 / 2);
        data.truncate(data.len() - 10);
        let results: Vec<_> = Y4mReader::new(Cursor::new(data)).unwrap().collect();
        assert_eq!(results.len(), 3);
        assert!(matches!(results[2], Err(VideoError::TruncatedFrame { index: 2 })));
    }

    #[test]
    fn bad_frame_marker() {
        let mut data = b"YUV4MPEG2 W8 H8 F25:1\nFRAMX\n".to_vec();
        data.extend([0u8; 96]);
        let mut reader = Y4mReader::new(Cursor::new(data)).unwrap();
        assert!(matches!(
            reader.next(),
            Some(Err(VideoError::MalformedFrameHeader { index: 0 }))
        ));
        assert!(reader.next().is_none());
    }

    #[test]
    fn bitrate_attachment() {
        let meta = ClipMeta::new("a", 64, 64, FrameRate::integer(30), 90);
        let with = attach_recorded_bitrate(meta.clone(), 2_000_000.0).unwrap();
        assert_eq!(with.recorded_bitrate_bps, Some(2_000_000.0));
        assert_eq!(ClipMeta { recorded_bitrate_bps: None, ..with }, meta);
        let bad = attach_recorded_bitrate(meta.clone(), 512_000.0).unwrap();
        assert_eq!(bad.recorded_bitrate_bps, Some(512_000.0));
        assert!(matches!(
            attach_recorded_bitrate(meta.clone(), 0.0),
            Err(VideoError::NonPositiveBitrate(_))
        ));
        assert!(attach_recorded_bitrate(meta, f64::NAN).is_err());
    }

    #[test]
    fn frame_validation() {
        assert!(FrameYuv::filled(8, 8, 0, 0, 0).is_ok());
        assert!(FrameYuv::filled(9, 9, 0, 0, 0).is_ok());
        assert!(matches!(
            FrameYuv::filled(7, 8, 0, 0, 0),
            Err(VideoError::FrameTooSmall { .. })
        ));
        assert!(matches!(
            FrameYuv::new(8, 8, vec![0; 64], vec![0; 15], vec![0; 16]),
            Err(VideoError::PlaneSize { plane: "u", .. })
        ));
        let f = FrameYuv::filled(9, 11, 1, 2, 3).unwrap();
        assert_eq!((f.u().len(), f.chroma_width(), f.chroma_height()), (30, 5, 6));
    }

    #[test]
    fn duration() {
        let meta = ClipMeta::new("a", 64, 64, FrameRate::new(30000, 1001).unwrap(), 300);
        assert!((meta.duration_seconds() - 10.01).abs() < 1e-12);
        assert!(FrameRate::integer(30).exceeds_one_second(31));
        assert!(!FrameRate::integer(30).exceeds_one_second(30));
    }
}
