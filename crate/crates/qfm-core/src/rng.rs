//! Counter-based splittable random streams.
//!
//! Every stochastic operation in the library takes an explicit [`RngStream`].
//! Streams are split by label or index, so concurrent workers can own
//! independent streams that are fully determined by the root seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A seeded random stream that can be split into independent child streams.
///
/// Splitting derives a fresh key from the parent key and the split label,
/// independent of how many values the parent has already drawn.
#[derive(Debug, Clone)]
pub struct RngStream {
    key: [u64; 4],
    rng: ChaCha8Rng,
}

const SALT: [u64; 4] = [
    0x9e37_79b9_7f4a_7c15,
    0xbf58_476d_1ce4_e5b9,
    0x94d0_49bb_1331_11eb,
    0x2545_f491_4f6c_dd1d,
];

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

fn rng_from_key(key: &[u64; 4]) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    for (i, k) in key.iter().enumerate() {
        seed[i * 8..(i + 1) * 8].copy_from_slice(&k.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        let key = [
            splitmix(seed ^ SALT[0]),
            splitmix(seed ^ SALT[1]),
            splitmix(seed ^ SALT[2]),
            splitmix(seed ^ SALT[3]),
        ];
        let rng = rng_from_key(&key);
        Self { key, rng }
    }

    /// Derive an independent child stream identified by `label`.
    pub fn split(&self, label: &str) -> Self {
        let h = fnv1a(label.as_bytes());
        self.split_mixed(h)
    }

    /// Derive an independent child stream identified by a counter.
    pub fn split_index(&self, index: u64) -> Self {
        self.split_mixed(splitmix(index ^ 0xa076_1d64_78bd_642f))
    }

    fn split_mixed(&self, h: u64) -> Self {
        let key = [
            splitmix(self.key[0] ^ h ^ SALT[0]),
            splitmix(self.key[1] ^ h ^ SALT[1]),
            splitmix(self.key[2] ^ h ^ SALT[2]),
            splitmix(self.key[3] ^ h ^ SALT[3]),
        ];
        let rng = rng_from_key(&key);
        Self { key, rng }
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.gen::<f64>()
    }

    /// Standard normal draw (Box-Muller).
    pub fn standard_normal(&mut self) -> f64 {
        let u1: f64 = loop {
            let u = self.rng.gen::<f64>();
            if u > 0.0 {
                break u;
            }
        };
        let u2: f64 = self.rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn gen_u64(&mut self) -> u64 {
        self.rng.gen()
    }

    pub fn gen_range_usize(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }
}
