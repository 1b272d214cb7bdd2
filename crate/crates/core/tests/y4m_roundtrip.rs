use proptest::prelude::*;

use vqoe::video_io::{read_y4m, write_y4m, write_y4m_file, Y4mReader};
use vqoe::{ClipMeta, FrameRate, FrameYuv};

fn frames_strategy() -> impl Strategy<Value = (FrameRate, Vec<FrameYuv>)> {
    (4usize..=20, 4usize..=20, 1usize..=4, 1u32..=60, 1u32..=2).prop_flat_map(|(hw, hh, n, num, den)| {
        let (w, h) = (hw * 2, hh * 2);
        let plane = w * h + 2 * (w / 2) * (h / 2);
        prop::collection::vec(prop::collection::vec(any::<u8>(), plane), n).prop_map(move |raw| {
            let frames = raw
                .into_iter()
                .map(|mut y| {
                    let v = y.split_off(w * h + (w / 2) * (h / 2));
                    let u = y.split_off(w * h);
                    FrameYuv::new(w, h, y, u, v).unwrap()
                })
                .collect();
            (FrameRate::new(num, den).unwrap(), frames)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn write_then_read_is_identity((fps, frames) in frames_strategy()) {
        let mut buf = Vec::new();
        write_y4m(&mut buf, fps, &frames).unwrap();
        let reader = Y4mReader::new(buf.as_slice()).unwrap();
        prop_assert_eq!(reader.header().fps, fps);
        let back = reader.collect::<Result<Vec<_>, _>>().unwrap();
        prop_assert_eq!(back, frames);
    }
}

#[test]
fn file_round_trip_keeps_meta() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("clip_7.y4m");
    let frames: Vec<FrameYuv> = (0..5u8).map(|i| FrameYuv::filled(32, 16, i * 40, 100, 150).unwrap()).collect();
    let fps = FrameRate::new(30000, 1001).unwrap();
    write_y4m_file(&path, fps, &frames).unwrap();
    let (meta, back) = read_y4m(&path).unwrap();
    assert_eq!(meta, ClipMeta::new("clip_7", 32, 16, fps, 5));
    assert_eq!(back, frames);
    let mut again = Vec::new();
    write_y4m(&mut again, fps, &back).unwrap();
    assert_eq!(again, std::fs::read(&path).unwrap());
}
