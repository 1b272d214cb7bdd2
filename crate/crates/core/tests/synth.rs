use std::fs;
use std::path::Path;

use vqoe::synth::{build_corpus, CorpusSummary};

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for sub in [dir.to_path_buf(), dir.join("clips")] {
        for entry in fs::read_dir(&sub).unwrap() {
            let path = entry.unwrap().path();
            if path.is_file() {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn same_seed_gives_identical_corpus() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let sa = build_corpus(12, 21, a.path()).unwrap();
    let sb = build_corpus(12, 21, b.path()).unwrap();
    assert_eq!(sa, sb);
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    assert_eq!(ta.len(), 12 + 2);
    assert!(ta == tb);
    let c = tempfile::tempdir().unwrap();
    build_corpus(12, 22, c.path()).unwrap();
    assert!(tree(c.path()) != ta);
}

#[test]
fn metadata_file_matches_summary() {
    let dir = tempfile::tempdir().unwrap();
    let summary = build_corpus(10, 3, dir.path()).unwrap();
    let text = fs::read_to_string(CorpusSummary::metadata_path(dir.path())).unwrap();
    let back: CorpusSummary = serde_json::from_str(&text).unwrap();
    assert_eq!(back, summary);
}
