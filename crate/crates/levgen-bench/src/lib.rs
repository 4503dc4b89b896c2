//! Shared builders for the criterion benchmarks.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use levgen_core::level::Level;
use levgen_core::metrics::ObjectiveVector;
use levgen_core::sim::{Playtrace, Point};

/// Random level over the full default alphabet.
pub fn random_level(h: usize, w: usize, vocab_size: u8, rng: &mut ChaCha8Rng) -> Level {
    Level::new(h, w, (0..h * w).map(|_| rng.gen_range(0..vocab_size)).collect())
}

/// Random level that keeps a solid floor, so the agent actually travels.
pub fn random_grounded_level(h: usize, w: usize, rng: &mut ChaCha8Rng) -> Level {
    let mut level = Level::filled(h, w, 0);
    for c in 0..w {
        level.set(h - 1, c, 1);
    }
    for _ in 0..(h * w / 6) {
        let r = rng.gen_range(0..h - 1);
        let c = rng.gen_range(0..w);
        level.set(r, c, rng.gen_range(0..8));
    }
    level
}

pub fn random_trace(len: usize, rng: &mut ChaCha8Rng) -> Playtrace {
    let mut x = 0.5;
    let mut y = 12.5;
    let points = (0..len)
        .map(|_| {
            x += rng.gen_range(0.0..1.0);
            y += rng.gen_range(-1.0..1.0);
            Point { x, y }
        })
        .collect();
    Playtrace { points }
}

pub fn random_objectives(n: usize, rng: &mut ChaCha8Rng) -> Vec<ObjectiveVector> {
    (0..n)
        .map(|_| ObjectiveVector {
            f_p: rng.gen_range(0.0..1.0),
            f_pd: rng.gen_range(0.0..2.0),
            f_cd: rng.gen_range(0.0..1.0),
        })
        .collect()
}
