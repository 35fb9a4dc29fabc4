//! SplitMix64: a counter-based, splittable pseudo-random generator.
//!
//! The state walks a Weyl sequence (`state += GAMMA`) and each output is a
//! bijective mix of the state, so draw i is a pure function of
//! `seed + (i+1) * GAMMA`. That makes streams cheap to split, trivially
//! reproducible across platforms and languages, and safe to shard across
//! threads by deriving one stream per shard. Non-cryptographic.
//!
//! Reference output for seed 1234567 (first five draws):
//! 6457827717110365317, 3203168211198807973, 9817491932198370423,
//! 4593380528125082431, 16408922859458223821.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_SALT: u64 = 0xD2B7_4407_B1CE_6E93;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Independent stream for shard `index`, a pure function of the original
    /// seed so shards can be created in any order.
    pub fn stream(seed: u64, index: u64) -> Self {
        SplitMix64 {
            state: mix64(mix64(seed) ^ STREAM_SALT.wrapping_mul(index.wrapping_add(1))),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        const DEN: f64 = (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 / DEN
    }

    /// Uniform draw in [lo, hi).
    #[inline]
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal variate by the Marsaglia polar method. The second
    /// variate of each accepted pair is discarded so a draw consumes a
    /// deterministic, state-only-dependent number of uniforms.
    pub fn next_normal(&mut self) -> f64 {
        loop {
            let u = 2.0 * self.next_f64() - 1.0;
            let v = 2.0 * self.next_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                return u * (-2.0 * s.ln() / s).sqrt();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_test_vector_seed_1234567() {
        let mut r = SplitMix64::new(1234567);
        let expect: [u64; 5] = [
            6457827717110365317,
            3203168211198807973,
            9817491932198370423,
            4593380528125082431,
            16408922859458223821,
        ];
        for e in expect {
            assert_eq!(r.next_u64(), e);
        }
    }

    #[test]
    fn zero_seed_reference_values() {
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xE220A8397B1DCDAF);
        assert_eq!(r.next_u64(), 0x6E789E6AA1B965F4);
        assert_eq!(r.next_u64(), 0x06C45D188009454F);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a1 = SplitMix64::stream(99, 0);
        let mut a2 = SplitMix64::stream(99, 0);
        let mut b = SplitMix64::stream(99, 1);
        for _ in 0..100 {
            assert_eq!(a1.next_u64(), a2.next_u64());
        }
        let firsts: Vec<u64> = (0..4).map(|_| b.next_u64()).collect();
        let mut a = SplitMix64::stream(99, 0);
        assert!(firsts.iter().any(|&v| v != a.next_u64()));
    }

    #[test]
    fn uniform_draws_live_in_unit_interval() {
        let mut r = SplitMix64::new(7);
        let mut mean = 0.0;
        const N: usize = 100_000;
        for _ in 0..N {
            let u = r.next_f64();
            assert!((0.0..1.0).contains(&u));
            mean += u;
        }
        mean /= N as f64;
        // 3 sigma for mean of uniforms: 3 / sqrt(12 N)
        assert!((mean - 0.5).abs() < 3.0 / (12.0 * N as f64).sqrt());
    }

    #[test]
    fn polar_normals_have_unit_variance() {
        let mut r = SplitMix64::new(123);
        const N: usize = 200_000;
        let mut m = 0.0;
        let mut m2 = 0.0;
        for _ in 0..N {
            let z = r.next_normal();
            m += z;
            m2 += z * z;
        }
        m /= N as f64;
        m2 /= N as f64;
        assert!(m.abs() < 3.0 / (N as f64).sqrt());
        assert!((m2 - 1.0).abs() < 3.0 * (2.0 / N as f64).sqrt());
    }
}
