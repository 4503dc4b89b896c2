//! Population-level GAN training.
//!
//! One discriminator is shared by the whole generator population. The warm
//! start trains all of them jointly against the corpus; afterwards each
//! evolutionary generation refreshes the discriminator, mutates every
//! parent twice (a minmax child and a least-squares child) and evaluates
//! the offspring on freshly decoded level samples.
//!
//! Randomness discipline: the warm start and each discriminator refresh
//! consume one sequential stream (per-epoch shuffle, then per batch the
//! fake-batch noise, then one noise batch per generator update). Mutations
//! and evaluations each derive their own stream from (master seed, tag,
//! generation / member id), so they can run on any number of workers
//! without changing results.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::level::{decode_logits, one_hot, Level, LevelError, TileVocabulary};
use crate::metrics::{objectives, Evaluation, MetricError};
use crate::neural::{
    adam_update, d_hinge_gradients, discriminator_forward, g_lsq_gradients, g_minmax_gradients,
    gaussian_noise_batch, generator_forward, AdamState, MlpParams, NeuralError,
};
use crate::rng;

#[derive(Debug, Error)]
pub enum GanError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("corpus level is {0}x{1}, config expects {2}x{3}")]
    CorpusShape(usize, usize, usize, usize),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Level(#[from] LevelError),
}

/// Training hyperparameters. Defaults are the full-scale settings; the
/// desk profile shrinks the run so the whole pipeline fits in minutes on
/// one core (and raises learning rates, which at desk step counts would
/// otherwise produce no measurable movement).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lambda: usize,
    pub generations: usize,
    pub warm_epochs: usize,
    pub d_iters: usize,
    pub g_iters: usize,
    pub batch: usize,
    pub eval_samples: usize,
    pub z_dim: usize,
    pub pattern_k: usize,
    pub height: usize,
    pub width: usize,
    pub g_hidden: Vec<usize>,
    pub d_hidden: Vec<usize>,
    pub g_lr: f64,
    pub g_wd: f64,
    pub d_lr: f64,
    pub d_wd: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 30,
            generations: 100,
            warm_epochs: 100,
            d_iters: 1,
            g_iters: 1,
            batch: 32,
            eval_samples: 30,
            z_dim: 128,
            pattern_k: 2,
            height: 14,
            width: 28,
            g_hidden: vec![256, 256],
            d_hidden: vec![256, 64],
            g_lr: 1e-4,
            g_wd: 0.0,
            d_lr: 4e-4,
            d_wd: 5e-4,
            beta1: 0.0,
            beta2: 0.9,
        }
    }
}

impl TrainConfig {
    /// Down-scaled profile used by the bundled corpus and the test suite.
    pub fn desk_profile() -> Self {
        Self {
            lambda: 8,
            generations: 20,
            warm_epochs: 30,
            eval_samples: 10,
            g_hidden: vec![64, 64],
            d_hidden: vec![64, 32],
            g_lr: 5e-3,
            d_lr: 2e-2,
            ..Self::default()
        }
    }

    pub fn level_cells(&self, vocab_size: usize) -> usize {
        self.height * self.width * vocab_size
    }

    pub fn generator_dims(&self, vocab_size: usize) -> Vec<usize> {
        let mut dims = vec![self.z_dim];
        dims.extend_from_slice(&self.g_hidden);
        dims.push(self.level_cells(vocab_size));
        dims
    }

    pub fn discriminator_dims(&self, vocab_size: usize) -> Vec<usize> {
        let mut dims = vec![self.level_cells(vocab_size)];
        dims.extend_from_slice(&self.d_hidden);
        dims.push(1);
        dims
    }

    pub fn generator_adam(&self, shape: &MlpParams) -> AdamState {
        AdamState::new(shape, self.g_lr, self.beta1, self.beta2, self.g_wd)
    }

    pub fn discriminator_adam(&self, shape: &MlpParams) -> AdamState {
        AdamState::new(shape, self.d_lr, self.beta1, self.beta2, self.d_wd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MutationKind {
    Minmax,
    LeastSquares,
}

impl MutationKind {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Minmax => "minmax",
            Self::LeastSquares => "lsq",
        }
    }
}

/// Where a member came from; rendered into the run logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lineage {
    Init,
    Mutated { parent: u64, kind: MutationKind },
}

impl std::fmt::Display for Lineage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Init => f.write_str("init"),
            Self::Mutated { parent, kind } => write!(f, "{}:{}", parent, kind.tag()),
        }
    }
}

/// One generator in the evolving population.
#[derive(Debug, Clone)]
pub struct PopulationMember {
    pub id: u64,
    pub lineage: Lineage,
    pub born: usize,
    pub generator: MlpParams,
    pub eval: Option<Evaluation>,
}

impl PopulationMember {
    pub fn evaluation(&self) -> &Evaluation {
        self.eval.as_ref().expect("member must be evaluated before use")
    }
}

/// Generator plus its optimizer state; used while the warm start owns the
/// population. Evolutionary mutations use fresh optimizer states instead.
pub struct GeneratorUnit {
    pub params: MlpParams,
    pub adam: AdamState,
}

/// The shared discriminator; its Adam state persists across the warm start
/// and all later refreshes.
pub struct DiscriminatorUnit {
    pub params: MlpParams,
    pub adam: AdamState,
}

/// Corpus levels pre-encoded for discriminator input.
pub struct EncodedCorpus {
    onehots: Vec<Vec<f64>>,
}

impl EncodedCorpus {
    pub fn encode(
        corpus: &[Level],
        vocab: &TileVocabulary,
        cfg: &TrainConfig,
    ) -> Result<Self, GanError> {
        if corpus.is_empty() {
            return Err(GanError::EmptyCorpus);
        }
        for level in corpus {
            if level.height() != cfg.height || level.width() != cfg.width {
                return Err(GanError::CorpusShape(
                    level.height(),
                    level.width(),
                    cfg.height,
                    cfg.width,
                ));
            }
        }
        Ok(Self { onehots: corpus.iter().map(|l| one_hot(l, vocab.len())).collect() })
    }

    pub fn len(&self) -> usize {
        self.onehots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.onehots.is_empty()
    }
}

/// Freshly initialized population and discriminator, drawn sequentially
/// from one stream: generators first, then the discriminator.
pub fn init_population(
    cfg: &TrainConfig,
    vocab_size: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<GeneratorUnit>, DiscriminatorUnit) {
    let g_dims = cfg.generator_dims(vocab_size);
    let generators: Vec<GeneratorUnit> = (0..cfg.lambda)
        .map(|_| {
            let params = MlpParams::init(&g_dims, rng);
            let adam = cfg.generator_adam(&params);
            GeneratorUnit { params, adam }
        })
        .collect();
    let d_params = MlpParams::init(&cfg.discriminator_dims(vocab_size), rng);
    let d_adam = cfg.discriminator_adam(&d_params);
    (generators, DiscriminatorUnit { params: d_params, adam: d_adam })
}

fn shuffled_indices(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx
}

/// Fake batch for one discriminator step: `batch_size` samples split
/// `floor(b/lambda)` per generator, remainder to the earliest generators.
fn fake_batch(
    generators: &[&MlpParams],
    batch_size: usize,
    z_dim: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>, GanError> {
    let lambda = generators.len();
    let noise = gaussian_noise_batch(batch_size, z_dim, rng);
    let mut fakes = Vec::with_capacity(batch_size);
    let base = batch_size / lambda;
    let rem = batch_size % lambda;
    let mut row = 0;
    for (j, g) in generators.iter().enumerate() {
        let take = base + usize::from(j < rem);
        if take == 0 {
            continue;
        }
        let slice = crate::neural::NoiseBatch { rows: noise.rows[row..row + take].to_vec() };
        row += take;
        fakes.extend(generator_forward(g, &slice)?);
    }
    Ok(fakes)
}

/// One hinge update of the shared discriminator on one corpus batch.
fn discriminator_step(
    d: &mut DiscriminatorUnit,
    corpus: &EncodedCorpus,
    batch_idx: &[usize],
    generators: &[&MlpParams],
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(), GanError> {
    let reals: Vec<Vec<f64>> = batch_idx.iter().map(|&i| corpus.onehots[i].clone()).collect();
    let fakes = fake_batch(generators, reals.len(), cfg.z_dim, rng)?;
    let grads = d_hinge_gradients(&d.params, &reals, &fakes)?;
    adam_update(&mut d.params, &grads, &mut d.adam)?;
    Ok(())
}

/// Pre-trains `lambda` generators and the shared discriminator: for each
/// of `warm_epochs` passes over the shuffled corpus, every batch does one
/// discriminator hinge update followed by one minmax step per generator.
pub fn warm_start(
    corpus: &EncodedCorpus,
    cfg: &TrainConfig,
    vocab_size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<MlpParams>, DiscriminatorUnit), GanError> {
    if corpus.is_empty() {
        return Err(GanError::EmptyCorpus);
    }
    let (mut generators, mut d) = init_population(cfg, vocab_size, rng);
    for _epoch in 0..cfg.warm_epochs {
        let order = shuffled_indices(corpus.len(), rng);
        for batch_idx in order.chunks(cfg.batch) {
            {
                let g_refs: Vec<&MlpParams> = generators.iter().map(|g| &g.params).collect();
                discriminator_step(&mut d, corpus, batch_idx, &g_refs, cfg, rng)?;
            }
            for unit in &mut generators {
                let z = gaussian_noise_batch(cfg.batch, cfg.z_dim, rng);
                let grads = g_minmax_gradients(&unit.params, &d.params, &z)?;
                adam_update(&mut unit.params, &grads, &mut unit.adam)?;
            }
        }
    }
    Ok((generators.into_iter().map(|g| g.params).collect(), d))
}

/// `d_iters` passes over the corpus updating only the discriminator.
pub fn refresh_discriminator(
    d: &mut DiscriminatorUnit,
    corpus: &EncodedCorpus,
    population: &[PopulationMember],
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(), GanError> {
    let g_refs: Vec<&MlpParams> = population.iter().map(|m| &m.generator).collect();
    for _ in 0..cfg.d_iters {
        let order = shuffled_indices(corpus.len(), rng);
        for batch_idx in order.chunks(cfg.batch) {
            discriminator_step(d, corpus, batch_idx, &g_refs, cfg, rng)?;
        }
    }
    Ok(())
}

fn mutate(
    parent: &MlpParams,
    d: &MlpParams,
    kind: MutationKind,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<MlpParams, GanError> {
    let mut child = parent.clone();
    let mut adam = cfg.generator_adam(&child);
    for _ in 0..cfg.g_iters {
        let z = gaussian_noise_batch(cfg.batch, cfg.z_dim, rng);
        let grads = match kind {
            MutationKind::Minmax => g_minmax_gradients(&child, d, &z)?,
            MutationKind::LeastSquares => g_lsq_gradients(&child, d, &z)?,
        };
        adam_update(&mut child, &grads, &mut adam)?;
    }
    Ok(child)
}

/// Produces `2 * lambda` offspring: for each parent, a minmax child then a
/// least-squares child, each trained for `g_iters` steps from a fresh
/// optimizer state. Parents are left untouched.
pub fn variation(
    population: &[PopulationMember],
    d: &MlpParams,
    cfg: &TrainConfig,
    master_seed: u64,
    generation: usize,
    next_id: &mut u64,
) -> Result<Vec<PopulationMember>, GanError> {
    let base_id = *next_id;
    let offspring: Result<Vec<Vec<PopulationMember>>, GanError> = population
        .par_iter()
        .enumerate()
        .map(|(j, parent)| {
            let mut pair = Vec::with_capacity(2);
            for (slot, kind) in [MutationKind::Minmax, MutationKind::LeastSquares]
                .into_iter()
                .enumerate()
            {
                let mut rng = rng::stream(
                    master_seed,
                    &[rng::TAG_VAR, generation as u64, j as u64, slot as u64],
                );
                let child = mutate(&parent.generator, d, kind, cfg, &mut rng)?;
                pair.push(PopulationMember {
                    id: base_id + (2 * j + slot) as u64,
                    lineage: Lineage::Mutated { parent: parent.id, kind },
                    born: generation,
                    generator: child,
                    eval: None,
                });
            }
            Ok(pair)
        })
        .collect();
    let offspring: Vec<PopulationMember> = offspring?.into_iter().flatten().collect();
    *next_id = base_id + offspring.len() as u64;
    Ok(offspring)
}

/// Samples `eval_samples` levels from the generator's own evaluation
/// stream, simulates them all and computes every metric. The stream is
/// fully determined by `eval_seed`, so a checkpointed generator re-evaluates
/// to exactly the same numbers.
pub fn evaluate_generator(
    generator: &MlpParams,
    vocab: &TileVocabulary,
    cfg: &TrainConfig,
    eval_seed: u64,
) -> Result<Evaluation, GanError> {
    let levels = sample_levels(generator, vocab, cfg, eval_seed, cfg.eval_samples)?;
    Ok(objectives(&levels, vocab, cfg.pattern_k)?)
}

/// Decodes `count` levels from the stream seeded with `eval_seed`.
pub fn sample_levels(
    generator: &MlpParams,
    vocab: &TileVocabulary,
    cfg: &TrainConfig,
    eval_seed: u64,
    count: usize,
) -> Result<Vec<Level>, GanError> {
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(eval_seed);
    let z = gaussian_noise_batch(count, cfg.z_dim, &mut rng);
    let logits = generator_forward(generator, &z)?;
    logits
        .iter()
        .map(|row| Ok(decode_logits(row, cfg.height, cfg.width, vocab.len())?))
        .collect()
}

/// Seed of a member's evaluation stream.
pub fn eval_seed_for(master_seed: u64, member_id: u64) -> u64 {
    rng::derive_seed(master_seed, &[rng::TAG_EVAL, member_id])
}

/// Mean critic margin between corpus levels and generator fakes; a
/// training-signal diagnostic used by tests and reports.
pub fn critic_margin(
    d: &MlpParams,
    corpus: &EncodedCorpus,
    population: &[&MlpParams],
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<f64, GanError> {
    let fakes = fake_batch(population, corpus.len(), cfg.z_dim, rng)?;
    let mut real_sum = 0.0;
    for x in &corpus.onehots {
        real_sum += discriminator_forward(d, x)?;
    }
    let mut fake_sum = 0.0;
    for x in &fakes {
        fake_sum += discriminator_forward(d, x)?;
    }
    Ok(real_sum / corpus.len() as f64 - fake_sum / fakes.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::level::{extract_patterns, PatternDistribution};
    use crate::metrics::tpjs;
    use crate::rng::{stream, TAG_WARM};

    fn toy_cfg() -> TrainConfig {
        TrainConfig {
            lambda: 3,
            warm_epochs: 0,
            batch: 8,
            eval_samples: 4,
            z_dim: 8,
            height: 6,
            width: 8,
            g_hidden: vec![16],
            d_hidden: vec![16],
            g_lr: 5e-3,
            d_lr: 2e-2,
            ..TrainConfig::default()
        }
    }

    fn toy_corpus(cfg: &TrainConfig, vocab: &TileVocabulary) -> Vec<Level> {
        // simple grounds with varying platform rows
        (0..8)
            .map(|i| {
                let mut level = Level::filled(cfg.height, cfg.width, 0);
                for c in 0..cfg.width {
                    level.set(cfg.height - 1, c, 1);
                }
                if i % 2 == 0 {
                    for c in 2..5 {
                        level.set(cfg.height - 3 - (i % 3), c, 7); // platform
                    }
                }
                assert!(level.cells().iter().all(|&v| (v as usize) < vocab.len()));
                level
            })
            .collect()
    }

    #[test]
    fn warm_start_zero_epochs_returns_inits() {
        let cfg = toy_cfg();
        let vocab = TileVocabulary::default_alphabet();
        let corpus =
            EncodedCorpus::encode(&toy_corpus(&cfg, &vocab), &vocab, &cfg).unwrap();
        let mut rng1 = stream(5, &[TAG_WARM]);
        let (gens, d) = warm_start(&corpus, &cfg, vocab.len(), &mut rng1).unwrap();
        let mut rng2 = stream(5, &[TAG_WARM]);
        let (init_gens, init_d) = init_population(&cfg, vocab.len(), &mut rng2);
        assert_eq!(gens.len(), cfg.lambda);
        for (got, want) in gens.iter().zip(&init_gens) {
            assert_eq!(got, &want.params);
        }
        assert_eq!(d.params, init_d.params);
    }

    #[test]
    fn warm_start_is_bit_reproducible() {
        let cfg = TrainConfig { warm_epochs: 2, ..toy_cfg() };
        let vocab = TileVocabulary::default_alphabet();
        let corpus =
            EncodedCorpus::encode(&toy_corpus(&cfg, &vocab), &vocab, &cfg).unwrap();
        let run = |seed| {
            let mut rng = stream(seed, &[TAG_WARM]);
            warm_start(&corpus, &cfg, vocab.len(), &mut rng).unwrap()
        };
        let (g1, d1) = run(9);
        let (g2, d2) = run(9);
        assert_eq!(g1, g2);
        assert_eq!(d1.params, d2.params);
        let (g3, _) = run(10);
        assert_ne!(g1, g3);
    }

    #[test]
    fn warm_start_moves_samples_toward_corpus_patterns() {
        let cfg = TrainConfig { warm_epochs: 12, ..toy_cfg() };
        let vocab = TileVocabulary::default_alphabet();
        let levels = toy_corpus(&cfg, &vocab);
        let corpus = EncodedCorpus::encode(&levels, &vocab, &cfg).unwrap();
        let pooled = PatternDistribution::pooled(
            levels.iter().map(|l| extract_patterns(l, 2).unwrap()).collect::<Vec<_>>().iter(),
        );

        let mean_tpjs = |gens: &[MlpParams]| {
            let mut total = 0.0;
            let mut count = 0;
            for (i, g) in gens.iter().enumerate() {
                let samples = sample_levels(g, &vocab, &cfg, 777 + i as u64, 6).unwrap();
                for s in samples {
                    let dist = extract_patterns(&s, 2).unwrap();
                    total += tpjs(&dist, &pooled).unwrap();
                    count += 1;
                }
            }
            total / count as f64
        };

        let mut rng = stream(11, &[TAG_WARM]);
        let (before, _) = init_population(&cfg, vocab.len(), &mut rng);
        let before: Vec<MlpParams> = before.into_iter().map(|g| g.params).collect();
        let mut rng = stream(11, &[TAG_WARM]);
        let (after, _) = warm_start(&corpus, &cfg, vocab.len(), &mut rng).unwrap();

        let js_before = mean_tpjs(&before);
        let js_after = mean_tpjs(&after);
        assert!(
            js_after < js_before,
            "warm start should reduce corpus divergence: {js_before} -> {js_after}"
        );
    }

    #[test]
    fn refresh_zero_iters_is_identity_and_margins_grow() {
        let cfg = TrainConfig { warm_epochs: 1, ..toy_cfg() };
        let vocab = TileVocabulary::default_alphabet();
        let levels = toy_corpus(&cfg, &vocab);
        let corpus = EncodedCorpus::encode(&levels, &vocab, &cfg).unwrap();
        let mut rng = stream(13, &[TAG_WARM]);
        let (gens, mut d) = warm_start(&corpus, &cfg, vocab.len(), &mut rng).unwrap();
        let population: Vec<PopulationMember> = gens
            .into_iter()
            .enumerate()
            .map(|(i, generator)| PopulationMember {
                id: i as u64,
                lineage: Lineage::Init,
                born: 0,
                generator,
                eval: None,
            })
            .collect();

        let zero_cfg = TrainConfig { d_iters: 0, ..cfg.clone() };
        let before = d.params.clone();
        let mut r = stream(14, &[1]);
        refresh_discriminator(&mut d, &corpus, &population, &zero_cfg, &mut r).unwrap();
        assert_eq!(d.params, before);

        let g_refs: Vec<&MlpParams> = population.iter().map(|m| &m.generator).collect();
        let mut r = stream(14, &[2]);
        let margin_before = critic_margin(&d.params, &corpus, &g_refs, &cfg, &mut r).unwrap();
        let many = TrainConfig { d_iters: 8, ..cfg.clone() };
        let mut r = stream(14, &[3]);
        refresh_discriminator(&mut d, &corpus, &population, &many, &mut r).unwrap();
        let mut r = stream(14, &[2]);
        let margin_after = critic_margin(&d.params, &corpus, &g_refs, &cfg, &mut r).unwrap();
        assert!(
            margin_after > margin_before,
            "refresh should separate reals from fakes: {margin_before} -> {margin_after}"
        );
    }

    fn init_members(cfg: &TrainConfig, vocab: &TileVocabulary, seed: u64) -> (Vec<PopulationMember>, DiscriminatorUnit) {
        let mut rng = stream(seed, &[TAG_WARM]);
        let (gens, d) = init_population(cfg, vocab.len(), &mut rng);
        let members = gens
            .into_iter()
            .enumerate()
            .map(|(i, g)| PopulationMember {
                id: i as u64,
                lineage: Lineage::Init,
                born: 0,
                generator: g.params,
                eval: None,
            })
            .collect();
        (members, d)
    }

    #[test]
    fn variation_yields_two_children_per_parent_in_order() {
        let cfg = toy_cfg();
        let vocab = TileVocabulary::default_alphabet();
        let (members, d) = init_members(&cfg, &vocab, 15);
        let mut next_id = members.len() as u64;
        let kids = variation(&members, &d.params, &cfg, 99, 1, &mut next_id).unwrap();
        assert_eq!(kids.len(), 6);
        assert_eq!(next_id, 9);
        for (j, pair) in kids.chunks(2).enumerate() {
            assert_eq!(
                pair[0].lineage,
                Lineage::Mutated { parent: j as u64, kind: MutationKind::Minmax }
            );
            assert_eq!(
                pair[1].lineage,
                Lineage::Mutated { parent: j as u64, kind: MutationKind::LeastSquares }
            );
            assert_eq!(pair[0].id, (members.len() + 2 * j) as u64);
            assert!(pair.iter().all(|k| k.born == 1));
        }
    }

    #[test]
    fn variation_zero_steps_copies_parents_exactly() {
        let cfg = TrainConfig { g_iters: 0, ..toy_cfg() };
        let vocab = TileVocabulary::default_alphabet();
        let (members, d) = init_members(&cfg, &vocab, 16);
        let mut next_id = members.len() as u64;
        let kids = variation(&members, &d.params, &cfg, 99, 1, &mut next_id).unwrap();
        for (j, pair) in kids.chunks(2).enumerate() {
            assert_eq!(pair[0].generator, members[j].generator);
            assert_eq!(pair[1].generator, members[j].generator);
        }
    }

    #[test]
    fn variation_leaves_parents_untouched_and_is_reproducible() {
        let cfg = toy_cfg();
        let vocab = TileVocabulary::default_alphabet();
        let (members, d) = init_members(&cfg, &vocab, 17);
        let snapshot: Vec<MlpParams> = members.iter().map(|m| m.generator.clone()).collect();
        let mut id1 = members.len() as u64;
        let kids1 = variation(&members, &d.params, &cfg, 42, 3, &mut id1).unwrap();
        for (m, s) in members.iter().zip(&snapshot) {
            assert_eq!(&m.generator, s);
        }
        let mut id2 = members.len() as u64;
        let kids2 = variation(&members, &d.params, &cfg, 42, 3, &mut id2).unwrap();
        for (a, b) in kids1.iter().zip(&kids2) {
            assert_eq!(a.generator, b.generator);
        }
        // a different parent or kind changes the child
        assert_ne!(kids1[0].generator, kids1[1].generator);
    }

    #[test]
    fn variation_single_step_equals_manual_adam_step() {
        let cfg = toy_cfg();
        let vocab = TileVocabulary::default_alphabet();
        let (members, d) = init_members(&cfg, &vocab, 18);
        let mut next_id = members.len() as u64;
        let kids = variation(&members, &d.params, &cfg, 7, 2, &mut next_id).unwrap();

        // replay parent 0's minmax mutation by hand
        let mut rng = rng::stream(7, &[rng::TAG_VAR, 2, 0, 0]);
        let z = gaussian_noise_batch(cfg.batch, cfg.z_dim, &mut rng);
        let mut expect = members[0].generator.clone();
        let grads = g_minmax_gradients(&expect, &d.params, &z).unwrap();
        let mut adam = cfg.generator_adam(&expect);
        adam_update(&mut expect, &grads, &mut adam).unwrap();
        assert_eq!(kids[0].generator, expect);
    }

    #[test]
    fn constant_generator_has_zero_diversity() {
        let cfg = toy_cfg();
        let vocab = TileVocabulary::default_alphabet();
        // zero weights, zero bias: identical logits -> identical levels
        let dims = cfg.generator_dims(vocab.len());
        let zero = MlpParams {
            layers: dims
                .windows(2)
                .map(|d| crate::neural::DenseLayer::zeros(d[0], d[1]))
                .collect(),
        };
        let eval = evaluate_generator(&zero, &vocab, &cfg, 123).unwrap();
        assert_eq!(eval.raw_cd, 0.0);
        assert_eq!(eval.vector.f_cd, 1.0);
        let again = evaluate_generator(&zero, &vocab, &cfg, 123).unwrap();
        assert_eq!(eval, again);
    }

    #[test]
    fn evaluation_matches_hand_computed_metrics() {
        let cfg = toy_cfg();
        let vocab = TileVocabulary::default_alphabet();
        let (members, _) = init_members(&cfg, &vocab, 19);
        let g = &members[0].generator;
        let eval = evaluate_generator(g, &vocab, &cfg, 55).unwrap();
        let levels = sample_levels(g, &vocab, &cfg, 55, cfg.eval_samples).unwrap();
        let direct = objectives(&levels, &vocab, cfg.pattern_k).unwrap();
        assert_eq!(eval, direct);
    }
}
