use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use levgen_bench::{random_grounded_level, random_level, random_objectives, random_trace};
use levgen_core::gan::TrainConfig;
use levgen_core::indicators::hypervolume;
use levgen_core::level::{extract_patterns, TileVocabulary};
use levgen_core::metrics::{dtw, tpjs, ObjectiveMode};
use levgen_core::moea::{sde_survival_select, SelectionCandidate};
use levgen_core::neural::{gaussian_noise_batch, generator_forward, MlpParams};
use levgen_core::sim::simulate;

fn bench_dtw(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = random_trace(64, &mut rng);
    let b = random_trace(64, &mut rng);
    c.bench_function("dtw_64x64", |bench| {
        bench.iter(|| dtw(black_box(&a), black_box(&b)).unwrap())
    });
}

fn bench_tpjs(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let la = random_level(14, 28, 8, &mut rng);
    let lb = random_level(14, 28, 8, &mut rng);
    let pa = extract_patterns(&la, 2).unwrap();
    let pb = extract_patterns(&lb, 2).unwrap();
    c.bench_function("tpjs_14x28_k2", |bench| {
        bench.iter(|| tpjs(black_box(&pa), black_box(&pb)).unwrap())
    });
    c.bench_function("extract_patterns_14x28_k2", |bench| {
        bench.iter(|| extract_patterns(black_box(&la), 2).unwrap())
    });
}

fn bench_simulate(c: &mut Criterion) {
    let vocab = TileVocabulary::default_alphabet();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let level = random_grounded_level(14, 28, &mut rng);
    c.bench_function("simulate_14x28", |bench| {
        bench.iter(|| simulate(black_box(&level), black_box(&vocab)))
    });
}

fn bench_generator_forward(c: &mut Criterion) {
    let cfg = TrainConfig::desk_profile();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = MlpParams::init(&cfg.generator_dims(8), &mut rng);
    let z = gaussian_noise_batch(32, cfg.z_dim, &mut rng);
    c.bench_function("generator_forward_b32", |bench| {
        bench.iter(|| generator_forward(black_box(&g), black_box(&z)).unwrap())
    });
}

fn bench_hypervolume(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let points: Vec<Vec<f64>> = random_objectives(30, &mut rng)
        .into_iter()
        .map(|o| o.as_array().to_vec())
        .collect();
    let nadir = vec![1.1, 2.1, 1.1];
    c.bench_function("hypervolume_3d_30pts", |bench| {
        bench.iter(|| hypervolume(black_box(&points), black_box(&nadir)).unwrap())
    });
}

fn bench_selection(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pool: Vec<SelectionCandidate> = random_objectives(90, &mut rng)
        .into_iter()
        .map(|objectives| SelectionCandidate { objectives, born: 0 })
        .collect();
    c.bench_function("sde_survival_select_90_to_30", |bench| {
        bench.iter(|| {
            sde_survival_select(black_box(&pool), 30, ObjectiveMode::PPdCd).unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_dtw,
    bench_tpjs,
    bench_simulate,
    bench_generator_forward,
    bench_hypervolume,
    bench_selection
);
criterion_main!(benches);
