//! Probe: warm-start learning signal at desk scale.
//! Prints the mean TPJS between generated samples and the pooled corpus
//! pattern distribution before and after the warm start, per seed.

use levgen_core::experiment::{load_corpus, ExperimentConfig};
use levgen_core::gan::{init_population, sample_levels, warm_start, EncodedCorpus, TrainConfig};
use levgen_core::level::{extract_patterns, PatternDistribution, TileVocabulary};
use levgen_core::metrics::tpjs;
use levgen_core::neural::MlpParams;
use levgen_core::rng;

fn mean_tpjs(
    gens: &[MlpParams],
    vocab: &TileVocabulary,
    cfg: &TrainConfig,
    pooled: &PatternDistribution,
) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for (i, g) in gens.iter().enumerate() {
        let samples = sample_levels(g, vocab, cfg, 9000 + i as u64, cfg.eval_samples).unwrap();
        for s in samples {
            total += tpjs(&extract_patterns(&s, cfg.pattern_k).unwrap(), pooled).unwrap();
            count += 1;
        }
    }
    total / count as f64
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let warm_epochs: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(30);
    let g_lr: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(5e-3);
    let d_lr: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(2e-2);

    let cfg = TrainConfig {
        lambda: 4,
        warm_epochs,
        g_lr,
        d_lr,
        ..TrainConfig::desk_profile()
    };
    let exp = ExperimentConfig::desk();
    let vocab = TileVocabulary::default_alphabet();
    let levels = load_corpus(&exp.corpus_dir, &vocab).unwrap();
    let corpus = EncodedCorpus::encode(&levels, &vocab, &cfg).unwrap();
    let pooled = PatternDistribution::pooled(
        levels
            .iter()
            .map(|l| extract_patterns(l, cfg.pattern_k).unwrap())
            .collect::<Vec<_>>()
            .iter(),
    );

    let mut drops = Vec::new();
    for seed in 0..5u64 {
        let t0 = std::time::Instant::now();
        let mut rng0 = rng::stream(seed, &[rng::TAG_WARM]);
        let (init, _) = init_population(&cfg, vocab.len(), &mut rng0);
        let init: Vec<MlpParams> = init.into_iter().map(|g| g.params).collect();
        let before = mean_tpjs(&init, &vocab, &cfg, &pooled);

        let mut rng1 = rng::stream(seed, &[rng::TAG_WARM]);
        let (after_params, _) = warm_start(&corpus, &cfg, vocab.len(), &mut rng1).unwrap();
        let after = mean_tpjs(&after_params, &vocab, &cfg, &pooled);

        let drop = (before - after) / before;
        drops.push(drop);
        println!(
            "seed {seed}: before {before:.4} after {after:.4} drop {:.1}%  ({:.1}s)",
            drop * 100.0,
            t0.elapsed().as_secs_f64()
        );
    }
    drops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!("median drop: {:.1}%", drops[2] * 100.0);
}
