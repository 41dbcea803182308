//! Deterministic random streams.
//!
//! Every random decision in the pipeline comes out of a [`RandomStream`]: a
//! SplitMix64 counter generator. The algorithm is frozen on purpose — stream
//! output is part of the reproducibility contract, so we cannot ride along
//! with a third-party RNG crate whose output may change between versions.
//!
//! A stream is `state_i = state_0 + i * GOLDEN`, output `mix64(state_i)`.
//! Distinct seeds give distinct first draws because `mix64` is a bijection.

use crate::math::{vec3, Quat, Vec3};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer. Bijective on `u64`.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    x
}

/// FNV-1a over the bytes of a label; used to fold stream purposes into seeds.
#[inline]
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// A deterministic random stream with a single 64-bit state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomStream {
    state: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream { state: seed }
    }

    /// The seed this stream started from plus the draws consumed so far,
    /// folded into one word. Recorded in manifests as the stream tag.
    pub fn seed_state(&self) -> u64 {
        self.state
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53 significant bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`; returns `lo` when the range is empty.
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[lo, hi]` inclusive. Modulo bias is below 2^-32
    /// for any range this crate uses.
    #[inline]
    pub fn uniform_u32(&mut self, lo: u32, hi: u32) -> u32 {
        debug_assert!(lo <= hi);
        let span = (hi - lo) as u64 + 1;
        lo + (self.next_u64() % span) as u32
    }

    /// Poisson-distributed count via exponential inter-arrival summation.
    /// Exact for any `lambda >= 0`; runtime is O(lambda).
    pub fn poisson(&mut self, lambda: f64) -> u64 {
        debug_assert!(lambda >= 0.0 && lambda.is_finite());
        let mut count = 0u64;
        let mut acc = 0.0;
        loop {
            // 1 - next_f64() lies in (0, 1]; keeps ln finite.
            acc += -(1.0 - self.next_f64()).ln();
            if acc >= lambda {
                return count;
            }
            count += 1;
        }
    }

    /// Uniform point on the unit disc (polar mapping; area-uniform).
    pub fn unit_disc(&mut self) -> (f64, f64) {
        let r = self.next_f64().sqrt();
        let phi = self.next_f64() * std::f64::consts::TAU;
        (r * phi.cos(), r * phi.sin())
    }

    /// Uniform direction on the unit sphere.
    pub fn unit_vector(&mut self) -> Vec3 {
        let z = 1.0 - 2.0 * self.next_f64();
        let phi = self.next_f64() * std::f64::consts::TAU;
        let r = (1.0 - z * z).max(0.0).sqrt();
        vec3(r * phi.cos(), r * phi.sin(), z)
    }

    /// Cosine-weighted direction around a unit normal.
    pub fn cosine_hemisphere(&mut self, normal: Vec3) -> Vec3 {
        let u1 = self.next_f64();
        let phi = self.next_f64() * std::f64::consts::TAU;
        let r = u1.sqrt();
        let z = (1.0 - u1).sqrt();
        let (t, b) = crate::math::orthonormal_basis(normal);
        t * (r * phi.cos()) + b * (r * phi.sin()) + normal * z
    }

    /// Uniform random rotation (Shoemake's subgroup algorithm).
    pub fn unit_quaternion(&mut self) -> Quat {
        use std::f64::consts::TAU;
        let u1 = self.next_f64();
        let u2 = self.next_f64() * TAU;
        let u3 = self.next_f64() * TAU;
        let a = (1.0 - u1).sqrt();
        let b = u1.sqrt();
        Quat {
            w: b * u3.cos(),
            x: a * u2.sin(),
            y: a * u2.cos(),
            z: b * u3.sin(),
        }
    }
}
