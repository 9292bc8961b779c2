//! Splittable counter-based random number generator.
//!
//! Every stream is a (key, counter) pair run through the splitmix64 finalizer,
//! so draws depend only on the pair and are identical on every platform.
//! Child streams are derived by hashing a label into the key, which lets the
//! trainer give each consumer (init, rollout, shuffling, ...) its own stream
//! regardless of the order in which the consumers are created.

/// Counter-based 64-bit generator. `Clone` copies the stream position.
#[derive(Debug, Clone)]
pub struct Rng {
    key: u64,
    counter: u64,
}

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

impl Rng {
    pub fn from_seed(seed: u64) -> Self {
        Rng {
            key: mix(seed.wrapping_add(GAMMA)),
            counter: 0,
        }
    }

    /// Independent child stream identified by a label. Derivation reads the
    /// parent's key only, so it does not advance the parent.
    pub fn derive(&self, label: &str) -> Rng {
        Rng {
            key: mix(self.key ^ fnv1a(label.as_bytes())),
            counter: 0,
        }
    }

    /// Independent child stream identified by an index (worker streams).
    pub fn split(&self, index: u64) -> Rng {
        Rng {
            key: mix(self.key ^ mix(index.wrapping_add(GAMMA))),
            counter: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.key.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    /// Uniform draw in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal draw via Box-Muller (cosine branch only, two u64 per draw).
    pub fn normal(&mut self) -> f64 {
        // keep u1 strictly positive so ln is finite
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / ((1u64 << 53) as f64 + 1.0));
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in [0, n) via Lemire's multiply-shift.
    pub fn next_below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }
}
