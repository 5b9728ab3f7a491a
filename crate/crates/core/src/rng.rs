//! Deterministic splittable random number generation.
//!
//! Substreams are keyed by (seed, replicate, stream): the triple is
//! mixed through SplitMix64 finalizers into an independent sequential
//! state, so replicates can run on any thread in any order and still
//! reproduce bit-identical draws. Sampling algorithms are fixed here
//! (Box-Muller normals, Marsaglia-Tsang gammas) rather than delegated,
//! so fixtures reproduce across platforms and dependency upgrades.

/// SplitMix64 finalizer; good bit diffusion, non-cryptographic.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A sequential generator owned by one (seed, replicate, stream) triple.
#[derive(Debug, Clone)]
pub struct SubRng {
    state: u64,
}

impl SubRng {
    /// Derive the substream for `(seed, replicate, stream)`.
    pub fn substream(seed: u64, replicate: u64, stream: u64) -> Self {
        let mut key = mix(seed ^ 0x9e37_79b9_7f4a_7c15);
        key = mix(key ^ replicate.wrapping_mul(0xd134_2543_de82_ef95));
        key = mix(key ^ stream.wrapping_mul(0xa24b_aed4_963e_e407));
        Self { state: key }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        mix(self.state)
    }

    /// Uniform on [0, 1) with 53-bit precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        const DEN: f64 = (1u64 << 53) as f64;
        ((self.next_u64() >> 11) as f64) / DEN
    }

    /// Uniform on (0, 1]; safe under logarithms.
    #[inline]
    fn next_f64_open(&mut self) -> f64 {
        const DEN: f64 = (1u64 << 53) as f64;
        (((self.next_u64() >> 11) + 1) as f64) / DEN
    }

    /// Uniform index in `0..n`.
    #[inline]
    pub fn next_index(&mut self, n: usize) -> usize {
        // Multiply-shift; bias is negligible for the n used here (< 2^32).
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Standard normal via Box-Muller (cosine branch only, so the draw
    /// count per variate is fixed).
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.next_f64_open();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Gamma(shape, rate) via Marsaglia-Tsang; shape >= 1 suffices for
    /// the shape-2 simulation families, and the boost trick covers
    /// shape < 1.
    pub fn gamma(&mut self, shape: f64, rate: f64) -> f64 {
        assert!(
            shape > 0.0 && rate > 0.0,
            "gamma parameters must be positive"
        );
        if shape < 1.0 {
            let boost = self.next_f64_open().powf(1.0 / shape);
            return self.gamma(shape + 1.0, rate) * boost;
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.standard_normal();
            let v = 1.0 + c * x;
            if v <= 0.0 {
                continue;
            }
            let v = v * v * v;
            let u = self.next_f64_open();
            if u.ln() < 0.5 * x * x + d - d * v + d * v.ln() {
                return d * v / rate;
            }
        }
    }

    /// Lognormal: exp(mu + sigma * Z) with Z standard normal.
    pub fn lognormal(&mut self, mu: f64, sigma: f64) -> f64 {
        (mu + sigma * self.standard_normal()).exp()
    }
}
