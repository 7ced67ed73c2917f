//! Pinned pseudorandom generator for reproducible fixtures.
//!
//! The generator is SplitMix64 (Vigna's 64-bit counter-based mixer) and
//! Gaussian variates come from the Box-Muller transform, cosine branch only,
//! two uniforms consumed per variate. Both are fixed here, with outputs pinned
//! in the tests below, so fixtures generated on one platform replay on any
//! other.

use std::f64::consts::PI;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX1: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX2: u64 = 0x94D0_49BB_1331_11EB;

/// SplitMix64 stream seeded with an arbitrary 64-bit value.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Next raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(MIX1);
        z = (z ^ (z >> 27)).wrapping_mul(MIX2);
        z ^ (z >> 31)
    }

    /// Uniform in the half-open interval (0, 1]; never zero, so it is safe
    /// to take its logarithm.
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal variate via Box-Muller (cosine branch).
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = self.next_open01();
        let u2 = self.next_open01();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference outputs computed from the published SplitMix64 recurrence
    // with an independent big-integer implementation.
    #[test]
    fn raw_stream_matches_reference_vectors() {
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xe220a8397b1dcdaf);
        assert_eq!(r.next_u64(), 0x6e789e6aa1b965f4);
        assert_eq!(r.next_u64(), 0x06c45d188009454f);
        assert_eq!(r.next_u64(), 0xf88bb8a8724c81ec);

        let mut r = SplitMix64::new(42);
        assert_eq!(r.next_u64(), 0xbdd732262feb6e95);
        assert_eq!(r.next_u64(), 0x28efe333b266f103);
        assert_eq!(r.next_u64(), 0x47526757130f9f52);
        assert_eq!(r.next_u64(), 0x581ce1ff0e4ae394);
    }

    #[test]
    fn gaussian_stream_is_pinned() {
        let mut r = SplitMix64::new(42);
        let expect = [
            0.41471975043153003,
            -0.8918862136277573,
            1.729593087937403,
            0.545620436182866,
        ];
        for e in expect {
            assert_eq!(r.next_gaussian(), e);
        }
    }

    #[test]
    fn gaussian_moments_are_sane() {
        let mut r = SplitMix64::new(7);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| r.next_gaussian()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var.sqrt() - 1.0).abs() < 0.02, "std {}", var.sqrt());
    }

    #[test]
    fn open01_never_zero() {
        let mut r = SplitMix64::new(123);
        for _ in 0..10_000 {
            let u = r.next_open01();
            assert!(u > 0.0 && u <= 1.0);
        }
    }
}
