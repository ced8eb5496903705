//! Counter-based sampling of Rayleigh channel realisations.
//!
//! Sample `i` of stream `s` always consumes the same fixed window of the
//! ChaCha8 keystream for `(seed, s)`, so any partition of the sample range
//! across workers reproduces the same draws.

use core::f64::consts::TAU;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::channel::ChannelDraw;
use crate::math::{ln, sin_cos, sqrt};

/// 32-bit keystream words reserved per sample.
const WORDS_PER_SAMPLE: u128 = 32;

#[derive(Debug, Clone)]
pub struct ChannelSampler {
    rng: ChaCha8Rng,
    current: u64,
    used: u128,
}

impl ChannelSampler {
    /// Sampler for `stream` under `seed`, positioned at sample `start`.
    pub fn new(seed: u64, stream: u64, start: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut s = ChannelSampler {
            rng,
            current: start,
            used: 0,
        };
        s.seek(start);
        s
    }

    /// Jumps to the start of sample `index`.
    pub fn seek(&mut self, index: u64) {
        self.rng.set_word_pos(index as u128 * WORDS_PER_SAMPLE);
        self.current = index;
        self.used = 0;
    }

    /// Moves to the next sample window, skipping whatever the current sample
    /// left unused.
    pub fn begin_sample(&mut self) {
        if self.used > 0 {
            while self.used < WORDS_PER_SAMPLE {
                self.rng.next_u32();
                self.used += 1;
            }
            self.current += 1;
            self.used = 0;
        }
    }

    /// Uniform in `(0, 1]`; never zero, so `ln` is always finite.
    pub fn uniform(&mut self) -> f64 {
        self.used += 2;
        debug_assert!(self.used <= WORDS_PER_SAMPLE, "sample window overrun");
        let bits = self.rng.next_u64() >> 11;
        (bits + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Circularly symmetric `CN(0, 1)` via Box-Muller: `E|z|^2 = 1`.
    pub fn complex_normal(&mut self) -> Complex64 {
        let radius = sqrt(-ln(self.uniform()));
        let (s, c) = sin_cos(TAU * self.uniform());
        Complex64::new(radius * c, radius * s)
    }

    /// A fresh Rayleigh realisation of every link (one sample window).
    pub fn draw(&mut self) -> ChannelDraw {
        self.begin_sample();
        let h_sr = self.complex_normal();
        let h_s = [self.complex_normal(), self.complex_normal()];
        let h_r = [self.complex_normal(), self.complex_normal()];
        ChannelDraw { h_sr, h_s, h_r }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitioning_does_not_change_draws() {
        let mut whole = ChannelSampler::new(42, 3, 0);
        let all: alloc::vec::Vec<ChannelDraw> = (0..100).map(|_| whole.draw()).collect();
        let mut tail = ChannelSampler::new(42, 3, 57);
        for expected in &all[57..] {
            assert_eq!(tail.draw(), *expected);
        }
    }

    #[test]
    fn streams_and_seeds_differ() {
        let a = ChannelSampler::new(1, 0, 0).draw();
        let b = ChannelSampler::new(1, 1, 0).draw();
        let c = ChannelSampler::new(2, 0, 0).draw();
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn complex_normal_moments() {
        let mut s = ChannelSampler::new(7, 0, 0);
        let n = 200_000;
        let (mut m, mut p, mut q) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
        for _ in 0..n {
            let d = s.draw();
            m += d.h_sr;
            p += d.h_sr.norm_sqr();
            q += d.h_sr.re * d.h_sr.im;
        }
        let n = n as f64;
        assert!((m / n).norm_sqr() < 1e-4);
        assert!((p / n - 1.0).abs() < 0.01);
        assert!((q / n).abs() < 0.01);
    }

    #[test]
    fn uniforms_are_in_the_half_open_unit_interval() {
        let mut s = ChannelSampler::new(0, 0, 0);
        for i in 0..10_000u64 {
            s.seek(i);
            let u = s.uniform();
            assert!(u > 0.0 && u <= 1.0);
        }
    }
}
