use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vqoe::learn::kfold_cv_with;
use vqoe::spatial::intra_encode_size_with;
use vqoe::synth::{apply_degradation, generate_pristine, ContentKind, DegradationSpec, FreezeSpan, NetworkProfile};
use vqoe::temporal::duplicate_flags;
use vqoe::{AdtConfig, ClipMeta, DecimateThresholds, Execution, FrameRate, FrameYuv, IntraCoderConfig, MosSample, QoeFeatures};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn clip() -> Vec<FrameYuv> {
    let meta = ClipMeta::new("bench", 128, 128, FrameRate::integer(30), 120);
    let pristine = generate_pristine(ContentKind::TalkingHeadProxy, &meta, 1).unwrap();
    let spec = DegradationSpec {
        blur_sigma: 2.0,
        freeze_spans: vec![FreezeSpan::new(40, 35)],
        network_profile: NetworkProfile::Custom,
    };
    apply_degradation(&pristine, &spec).unwrap()
}

fn samples(n: usize) -> Vec<MosSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    (0..n)
        .map(|i| {
            let pbr: f64 = rng.random_range(0.0..90.0);
            let ratio: f64 = rng.random_range(0.0..1.0);
            MosSample {
                clip_id: format!("c{i}"),
                features: QoeFeatures {
                    pbr_percent: pbr,
                    freeze_ratio: ratio,
                    num_freezes: rng.random_range(0..4),
                    total_freeze_seconds: ratio * 8.0,
                },
                mos: (5.0 - 0.03 * pbr - 2.5 * ratio).clamp(1.0, 5.0),
            }
        })
        .collect()
}

fn bench(c: &mut Criterion) {
    let frames = clip();
    let coder = IntraCoderConfig::default();
    let th = DecimateThresholds::default();
    let data = samples(300);
    let config = AdtConfig::default();

    let mut g = c.benchmark_group("intra_encode_size");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| intra_encode_size_with(black_box(&frames), &coder, exec).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("duplicate_flags");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| duplicate_flags(black_box(&frames), &th, exec).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("kfold_cv");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| kfold_cv_with(black_box(&data), &config, 10, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
