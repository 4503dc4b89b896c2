//! Generator evaluation metrics and their minimization transforms.
//!
//! Three raw metrics over a sample of `n` levels:
//!
//! * `P`  — fraction the agent completes;
//! * `PD` — mean pairwise dynamic-time-warping distance between playtraces;
//! * `CD` — mean pairwise Jensen-Shannon divergence between tile-pattern
//!   distributions (base-2 logs, so the value lives in `[0, 1]`).
//!
//! `PD` and `CD` are the unordered-pair means: `2 / (n (n-1)) * sum_{i<j}`.
//! The transforms `f_P = 1 - P`, `f_PD = (200 - PD) / 100`, `f_CD = 1 - CD`
//! flip everything into minimization form; they are affine, so orderings
//! are preserved exactly. `f_PD` is deliberately not clamped when `PD`
//! exceeds 200.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::level::{extract_patterns, Level, LevelError, PatternDistribution, TileVocabulary};
use crate::sim::{simulate, Playtrace};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("playtrace is empty")]
    EmptyTrace,
    #[error("pattern sizes differ: {0} vs {1}")]
    PatternSizeMismatch(usize, usize),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error(transparent)]
    Level(#[from] LevelError),
}

/// Transformed objective triple, minimized componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub f_p: f64,
    pub f_pd: f64,
    pub f_cd: f64,
}

impl ObjectiveVector {
    pub fn from_raw(p: f64, pd: f64, cd: f64) -> Self {
        Self { f_p: 1.0 - p, f_pd: (200.0 - pd) / 100.0, f_cd: 1.0 - cd }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.f_p, self.f_pd, self.f_cd]
    }

    pub fn is_finite(&self) -> bool {
        self.f_p.is_finite() && self.f_pd.is_finite() && self.f_cd.is_finite()
    }
}

/// Which objectives drive selection. Evaluation always computes all three;
/// the mode only restricts the subset selection sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectiveMode {
    P,
    PPd,
    PCd,
    PPdCd,
}

impl ObjectiveMode {
    pub const ALL: [ObjectiveMode; 4] =
        [Self::PPdCd, Self::PPd, Self::PCd, Self::P];

    /// Indices into [`ObjectiveVector::as_array`] this mode optimizes.
    pub fn active(&self) -> &'static [usize] {
        match self {
            Self::P => &[0],
            Self::PPd => &[0, 1],
            Self::PCd => &[0, 2],
            Self::PPdCd => &[0, 1, 2],
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "P" => Some(Self::P),
            "P+PD" => Some(Self::PPd),
            "P+CD" => Some(Self::PCd),
            "P+PD+CD" => Some(Self::PPdCd),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::P => "P",
            Self::PPd => "P+PD",
            Self::PCd => "P+CD",
            Self::PPdCd => "P+PD+CD",
        }
    }
}

impl std::fmt::Display for ObjectiveMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Raw metrics plus their transformed vector for one evaluated generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub raw_p: f64,
    pub raw_pd: f64,
    pub raw_cd: f64,
    pub vector: ObjectiveVector,
}

fn euclid(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    (dx * dx + dy * dy).sqrt()
}

/// Classic dynamic time warping with Euclidean local cost.
pub fn dtw(a: &Playtrace, b: &Playtrace) -> Result<f64, MetricError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptyTrace);
    }
    let (n, m) = (a.len(), b.len());
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for i in 1..=n {
        cur[0] = f64::INFINITY;
        for j in 1..=m {
            let pa = a.points[i - 1];
            let pb = b.points[j - 1];
            let d = euclid((pa.x, pa.y), (pb.x, pb.y));
            cur[j] = d + prev[j].min(cur[j - 1]).min(prev[j - 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m])
}

/// Jensen-Shannon divergence between two pattern distributions, log base 2.
pub fn tpjs(p: &PatternDistribution, q: &PatternDistribution) -> Result<f64, MetricError> {
    if p.k() != q.k() {
        return Err(MetricError::PatternSizeMismatch(p.k(), q.k()));
    }
    let mut keys: Vec<&Vec<u8>> = p.counts().keys().collect();
    keys.extend(q.counts().keys());
    keys.sort();
    keys.dedup();

    let mut js = 0.0;
    for key in keys {
        let pp = p.probability(key);
        let qq = q.probability(key);
        let m = 0.5 * (pp + qq);
        if pp > 0.0 {
            js += 0.5 * pp * (pp / m).log2();
        }
        if qq > 0.0 {
            js += 0.5 * qq * (qq / m).log2();
        }
    }
    // rounding can push an exact 0 or 1 a hair outside the range
    Ok(js.clamp(0.0, 1.0))
}

/// Fraction of levels the agent completes.
pub fn playability_p(levels: &[Level], vocab: &TileVocabulary) -> Result<f64, MetricError> {
    if levels.is_empty() {
        return Err(MetricError::TooFewSamples { needed: 1, got: 0 });
    }
    let done = levels.iter().filter(|l| simulate(l, vocab).completed).count();
    Ok(done as f64 / levels.len() as f64)
}

/// Mean DTW over unordered playtrace pairs.
pub fn player_diversity_pd(traces: &[Playtrace]) -> Result<f64, MetricError> {
    let n = traces.len();
    if n < 2 {
        return Err(MetricError::TooFewSamples { needed: 2, got: n });
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += dtw(&traces[i], &traces[j])?;
        }
    }
    Ok(2.0 * sum / (n as f64 * (n - 1) as f64))
}

/// Mean TPJS over unordered level pairs.
pub fn content_diversity_cd(levels: &[Level], k: usize) -> Result<f64, MetricError> {
    let n = levels.len();
    if n < 2 {
        return Err(MetricError::TooFewSamples { needed: 2, got: n });
    }
    let dists: Vec<PatternDistribution> =
        levels.iter().map(|l| extract_patterns(l, k)).collect::<Result<_, _>>()?;
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += tpjs(&dists[i], &dists[j])?;
        }
    }
    Ok(2.0 * sum / (n as f64 * (n - 1) as f64))
}

/// Simulates every level once and assembles all three metrics.
pub fn objectives(
    levels: &[Level],
    vocab: &TileVocabulary,
    pattern_k: usize,
) -> Result<Evaluation, MetricError> {
    let n = levels.len();
    if n < 2 {
        return Err(MetricError::TooFewSamples { needed: 2, got: n });
    }
    let results: Vec<_> = levels.iter().map(|l| simulate(l, vocab)).collect();
    let raw_p = results.iter().filter(|r| r.completed).count() as f64 / n as f64;
    let traces: Vec<Playtrace> = results.into_iter().map(|r| r.trace).collect();
    let raw_pd = player_diversity_pd(&traces)?;
    let raw_cd = content_diversity_cd(levels, pattern_k)?;
    Ok(Evaluation { raw_p, raw_pd, raw_cd, vector: ObjectiveVector::from_raw(raw_p, raw_pd, raw_cd) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::level::{PatternDistribution, TileCategory, TileVocabulary};
    use crate::sim::Point;
    use proptest::prelude::*;
    use rand::Rng;
    use std::collections::BTreeMap;

    fn trace(pts: &[(f64, f64)]) -> Playtrace {
        Playtrace { points: pts.iter().map(|&(x, y)| Point { x, y }).collect() }
    }

    /// Exhaustive minimum over monotone alignments, enumerated as explicit
    /// paths. Only usable for short traces.
    fn brute_dtw(a: &Playtrace, b: &Playtrace) -> f64 {
        fn walk(a: &Playtrace, b: &Playtrace, i: usize, j: usize, acc: f64, best: &mut f64) {
            let pa = a.points[i];
            let pb = b.points[j];
            let acc = acc + euclid((pa.x, pa.y), (pb.x, pb.y));
            if i + 1 == a.len() && j + 1 == b.len() {
                *best = best.min(acc);
                return;
            }
            if i + 1 < a.len() {
                walk(a, b, i + 1, j, acc, best);
            }
            if j + 1 < b.len() {
                walk(a, b, i, j + 1, acc, best);
            }
            if i + 1 < a.len() && j + 1 < b.len() {
                walk(a, b, i + 1, j + 1, acc, best);
            }
        }
        let mut best = f64::INFINITY;
        walk(a, b, 0, 0, 0.0, &mut best);
        best
    }

    #[test]
    fn dtw_identical_is_zero() {
        let t = trace(&[(0.0, 0.0), (1.0, 2.0), (3.0, 3.0)]);
        assert_eq!(dtw(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn dtw_single_points_is_euclidean() {
        let a = trace(&[(0.0, 0.0)]);
        let b = trace(&[(3.0, 4.0)]);
        assert!((dtw(&a, &b).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn dtw_two_point_alignment() {
        let a = trace(&[(0.0, 0.0), (1.0, 0.0)]);
        let b = trace(&[(0.0, 0.0), (2.0, 0.0)]);
        assert!((dtw(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert!((brute_dtw(&a, &b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dtw_rejects_empty() {
        let a = trace(&[]);
        let b = trace(&[(0.0, 0.0)]);
        assert!(matches!(dtw(&a, &b), Err(MetricError::EmptyTrace)));
    }

    #[test]
    fn dtw_matches_brute_force_on_short_traces() {
        let mut rng = crate::rng::stream(11, &[0]);
        for _ in 0..50 {
            let la = rng.gen_range(1..=6);
            let lb = rng.gen_range(1..=6);
            let a = trace(
                &(0..la).map(|_| (rng.gen_range(0.0..8.0), rng.gen_range(0.0..8.0))).collect::<Vec<_>>(),
            );
            let b = trace(
                &(0..lb).map(|_| (rng.gen_range(0.0..8.0), rng.gen_range(0.0..8.0))).collect::<Vec<_>>(),
            );
            let fast = dtw(&a, &b).unwrap();
            let slow = brute_dtw(&a, &b);
            assert!((fast - slow).abs() < 1e-9, "dtw {fast} vs brute {slow}");
        }
    }

    fn dist(k: usize, entries: &[(&[u8], u64)]) -> PatternDistribution {
        let counts: BTreeMap<Vec<u8>, u64> =
            entries.iter().map(|&(p, n)| (p.to_vec(), n)).collect();
        PatternDistribution::from_counts(k, counts)
    }

    #[test]
    fn tpjs_identity_and_disjoint() {
        let p = dist(1, &[(&[0], 3), (&[1], 1)]);
        let q = dist(1, &[(&[2], 5)]);
        assert_eq!(tpjs(&p, &p).unwrap(), 0.0);
        assert!((tpjs(&p, &q).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tpjs_closed_form_value() {
        // p = {A: 1}, q = {A: 1/2, B: 1/2}
        let p = dist(1, &[(&[0], 2)]);
        let q = dist(1, &[(&[0], 1), (&[1], 1)]);
        let expect = {
            // direct KL expansion against m = (p+q)/2
            let kl_p = 1.0 * (1.0f64 / 0.75).log2();
            let kl_q = 0.5 * (0.5f64 / 0.75).log2() + 0.5 * (0.5f64 / 0.25).log2();
            0.5 * kl_p + 0.5 * kl_q
        };
        let got = tpjs(&p, &q).unwrap();
        assert!((got - expect).abs() < 1e-12);
        assert!((got - 0.311278).abs() < 1e-5);
    }

    #[test]
    fn tpjs_mismatched_k_is_rejected() {
        let p = dist(1, &[(&[0], 1)]);
        let q = dist(2, &[(&[0, 0, 0, 0], 1)]);
        assert!(matches!(tpjs(&p, &q), Err(MetricError::PatternSizeMismatch(1, 2))));
    }

    #[test]
    fn playability_counts_fraction() {
        let vocab = TileVocabulary::default_alphabet();
        let mut playable = Level::filled(6, 10, 0);
        for c in 0..10 {
            playable.set(5, c, 1);
        }
        let unplayable = Level::filled(6, 10, 0);
        let levels = vec![
            playable.clone(),
            unplayable.clone(),
            playable.clone(),
            unplayable.clone(),
            unplayable,
        ];
        // 2 of 5 playable
        assert!((playability_p(&levels, &vocab).unwrap() - 0.4).abs() < 1e-12);
        assert!((playability_p(&vec![playable; 3], &vocab).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pd_small_cases() {
        let a = trace(&[(0.0, 0.0)]);
        let b = trace(&[(3.0, 4.0)]);
        assert_eq!(player_diversity_pd(&[a.clone(), a.clone()]).unwrap(), 0.0);
        assert!((player_diversity_pd(&[a.clone(), b.clone()]).unwrap() - 5.0).abs() < 1e-12);
        assert!(matches!(
            player_diversity_pd(&[a]),
            Err(MetricError::TooFewSamples { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn pd_matches_double_loop() {
        let mut rng = crate::rng::stream(12, &[0]);
        let traces: Vec<Playtrace> = (0..4)
            .map(|_| {
                trace(
                    &(0..rng.gen_range(2..6))
                        .map(|_| (rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0)))
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        let n = traces.len();
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    sum += dtw(&traces[i], &traces[j]).unwrap();
                }
            }
        }
        let oracle = sum / (n * (n - 1)) as f64;
        assert!((player_diversity_pd(&traces).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn cd_small_cases() {
        let a = Level::new(2, 2, vec![0, 0, 0, 0]);
        let b = Level::new(2, 2, vec![1, 1, 1, 1]);
        assert_eq!(content_diversity_cd(&[a.clone(), a.clone(), a.clone()], 2).unwrap(), 0.0);
        assert!((content_diversity_cd(&[a, b], 2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cd_matches_double_loop() {
        let mut rng = crate::rng::stream(13, &[0]);
        let levels: Vec<Level> =
            (0..4).map(|_| Level::new(4, 5, (0..20).map(|_| rng.gen_range(0..3u8)).collect())).collect();
        let dists: Vec<_> = levels.iter().map(|l| extract_patterns(l, 2).unwrap()).collect();
        let n = levels.len();
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    sum += tpjs(&dists[i], &dists[j]).unwrap();
                }
            }
        }
        let oracle = sum / (n * (n - 1)) as f64;
        assert!((content_diversity_cd(&levels, 2).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn transform_boundary_values() {
        assert_eq!(ObjectiveVector::from_raw(1.0, 0.0, 0.0).f_p, 0.0);
        assert_eq!(ObjectiveVector::from_raw(0.0, 0.0, 0.0).f_p, 1.0);
        assert_eq!(ObjectiveVector::from_raw(0.0, 200.0, 0.0).f_pd, 0.0);
        assert_eq!(ObjectiveVector::from_raw(0.0, 0.0, 0.0).f_pd, 2.0);
        assert_eq!(ObjectiveVector::from_raw(0.0, 0.0, 1.0).f_cd, 0.0);
        assert_eq!(ObjectiveVector::from_raw(0.0, 0.0, 0.0).f_cd, 1.0);
    }

    #[test]
    fn constant_generator_objectives() {
        let vocab = TileVocabulary::default_alphabet();
        let level = Level::filled(4, 6, 0);
        let eval = objectives(&vec![level; 5], &vocab, 2).unwrap();
        assert_eq!(eval.raw_cd, 0.0);
        assert_eq!(eval.vector.f_cd, 1.0);
        assert_eq!(eval.raw_pd, 0.0);
        assert_eq!(eval.vector.f_pd, 2.0);
    }

    #[test]
    fn tile_category_round_trip() {
        for cat in [
            TileCategory::Empty,
            TileCategory::Solid,
            TileCategory::Breakable,
            TileCategory::QuestionBox,
            TileCategory::Coin,
            TileCategory::Hazard,
            TileCategory::PipeBody,
            TileCategory::Platform,
        ] {
            assert_eq!(cat.to_string().parse::<TileCategory>().unwrap(), cat);
        }
    }

    proptest! {
        #[test]
        fn dtw_is_symmetric(ax in proptest::collection::vec((0.0f64..8.0, 0.0f64..8.0), 1..8),
                            bx in proptest::collection::vec((0.0f64..8.0, 0.0f64..8.0), 1..8)) {
            let a = trace(&ax);
            let b = trace(&bx);
            let ab = dtw(&a, &b).unwrap();
            let ba = dtw(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!(ab >= 0.0);
        }

        #[test]
        fn tpjs_bounded_and_symmetric(pa in proptest::collection::btree_map(0u8..6, 1u64..50, 1..6),
                                      qa in proptest::collection::btree_map(0u8..6, 1u64..50, 1..6)) {
            let p = PatternDistribution::from_counts(
                1, pa.into_iter().map(|(k, v)| (vec![k], v)).collect());
            let q = PatternDistribution::from_counts(
                1, qa.into_iter().map(|(k, v)| (vec![k], v)).collect());
            let pq = tpjs(&p, &q).unwrap();
            let qp = tpjs(&q, &p).unwrap();
            prop_assert!((0.0..=1.0).contains(&pq));
            prop_assert!((pq - qp).abs() < 1e-12);
            if p == q {
                prop_assert!(pq < 1e-12);
            }
        }

        #[test]
        fn transforms_reverse_order(p1 in 0.0f64..1.0, p2 in 0.0f64..1.0,
                                    d1 in 0.0f64..300.0, d2 in 0.0f64..300.0) {
            prop_assume!(p1 != p2 && d1 != d2);
            let a = ObjectiveVector::from_raw(p1, d1, 0.0);
            let b = ObjectiveVector::from_raw(p2, d2, 0.0);
            prop_assert_eq!(p1 > p2, a.f_p < b.f_p);
            prop_assert_eq!(d1 > d2, a.f_pd < b.f_pd);
        }
    }
}
