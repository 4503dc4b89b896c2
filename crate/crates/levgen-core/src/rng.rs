//! Seed derivation and Gaussian sampling.
//!
//! Every random stream in a run is a `ChaCha8Rng` seeded from the master
//! seed through [`derive_seed`], so any piece of work (one discriminator
//! refresh, one mutation, one evaluation) owns a stream that does not
//! depend on scheduling order. This is what makes parallel evaluation and
//! bit-exact reruns compatible.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags; keep these stable, they are part of run reproducibility.
pub const TAG_TRIAL: u64 = 0x7472_6961_6c00_0001;
pub const TAG_WARM: u64 = 0x7761_726d_0000_0002;
pub const TAG_DREF: u64 = 0x6472_6566_0000_0003;
pub const TAG_VAR: u64 = 0x7661_7269_0000_0004;
pub const TAG_EVAL: u64 = 0x6576_616c_0000_0005;
pub const TAG_SAMPLE: u64 = 0x736d_706c_0000_0006;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a list of tag words into a child seed.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut h = splitmix64(master);
    for &p in parts {
        h = splitmix64(h ^ splitmix64(p));
    }
    h
}

/// Stream for a derived seed.
pub fn stream(master: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, parts))
}

/// Uniform in (0, 1]: zero is excluded so `ln` below stays finite.
fn unit_open(rng: &mut impl RngCore) -> f64 {
    (((rng.next_u64() >> 11) as f64) + 1.0) / (1u64 << 53) as f64
}

/// Fills `out` with i.i.d. standard normals via Box-Muller.
pub fn fill_standard_normal(rng: &mut impl RngCore, out: &mut [f64]) {
    let mut i = 0;
    while i < out.len() {
        let u1 = unit_open(rng);
        let u2 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        out[i] = r * theta.cos();
        i += 1;
        if i < out.len() {
            out[i] = r * theta.sin();
            i += 1;
        }
    }
}
