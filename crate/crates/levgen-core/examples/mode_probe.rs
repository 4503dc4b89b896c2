//! Probe: directional mode comparison at desk scale.
//! Runs every objective mode over shared seeds and prints the normalized
//! hypervolume of each run at generation 1 and the final generation.

use levgen_core::experiment::{load_corpus, run_trial, ExperimentConfig, NADIR};
use levgen_core::gan::EncodedCorpus;
use levgen_core::indicators::{build_pseudo_pf, hv_history};
use levgen_core::level::TileVocabulary;
use levgen_core::metrics::ObjectiveMode;

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs[xs.len() / 2]
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seeds: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(5);

    let vocab = TileVocabulary::default_alphabet();
    let base = ExperimentConfig::desk();
    let levels = load_corpus(&base.corpus_dir, &vocab).unwrap();
    let corpus = EncodedCorpus::encode(&levels, &vocab, &base.train).unwrap();

    let tmp = tempfile::tempdir().unwrap();
    let t0 = std::time::Instant::now();

    // (mode, seed) -> per-generation objective triples
    let mut histories = Vec::new();
    for mode in ObjectiveMode::ALL {
        for seed in 0..seeds {
            let mut cfg = base.clone();
            cfg.mode = mode;
            cfg.master_seed = seed;
            cfg.out_dir = tmp.path().join(format!("{}_{seed}", mode.name().replace('+', "_")));
            let run = std::time::Instant::now();
            let summary = run_trial(&cfg, &vocab, &corpus, 0).unwrap();
            println!(
                "ran {:>8} seed {seed}: {:.1}s",
                mode.name(),
                run.elapsed().as_secs_f64()
            );
            histories.push((mode, seed, summary.per_generation));
        }
    }

    let all: Vec<[f64; 3]> = histories
        .iter()
        .flat_map(|(_, _, h)| h.iter().flatten().copied())
        .collect();
    let reference = build_pseudo_pf(&all).unwrap();
    println!("pseudo front size {}", reference.points.len());

    let mut finals: std::collections::HashMap<(&str, u64), f64> = Default::default();
    let mut gen1: std::collections::HashMap<(&str, u64), f64> = Default::default();
    for (mode, seed, history) in &histories {
        let hv = hv_history(history, &reference.bounds, &NADIR).unwrap();
        finals.insert((mode.name(), *seed), *hv.last().unwrap());
        gen1.insert((mode.name(), *seed), hv[1.min(hv.len() - 1)]);
    }

    for mode in ObjectiveMode::ALL {
        let mut f: Vec<f64> = (0..seeds).map(|s| finals[&(mode.name(), s)]).collect();
        let mut g: Vec<f64> = (0..seeds).map(|s| gen1[&(mode.name(), s)]).collect();
        println!(
            "{:>8}: gen1 median {:.4}  final median {:.4}  finals {:?}",
            mode.name(),
            median(&mut g),
            median(&mut f),
            (0..seeds).map(|s| (finals[&(mode.name(), s)] * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        );
    }

    for other in [ObjectiveMode::PPd, ObjectiveMode::PCd, ObjectiveMode::P] {
        let wins = (0..seeds)
            .filter(|&s| finals[&("P+PD+CD", s)] >= finals[&(other.name(), s)])
            .count();
        println!("P+PD+CD >= {:>5} in {wins}/{seeds} pairings", other.name());
    }
    println!("total {:.1}s", t0.elapsed().as_secs_f64());
}
