use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// A reproducible random stream identified by `(seed, stream)`.
///
/// Backed by ChaCha8 keyed with `seed` (expanded by `seed_from_u64`) and the
/// ChaCha stream id set to `stream`, so distinct streams are independent and
/// the sequence is identical on every platform. Uniform doubles take the top
/// 53 bits of each 64-bit output.
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

impl RngState {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        RngState {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * INV_2_53
    }

    /// Uniform on the open interval `(0, 1)`.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * INV_2_53
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = RngState::new(42, 7);
        let mut b = RngState::new(42, 7);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = RngState::new(42, 0);
        let mut b = RngState::new(42, 1);
        let same = (0..100).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn golden_values() {
        // Frozen: changing the generator breaks reproducibility of published runs.
        let mut r = RngState::new(1, 0);
        let first: Vec<u64> = (0..3).map(|_| r.next_u64()).collect();
        let mut again = RngState::new(1, 0);
        assert_eq!(first, (0..3).map(|_| again.next_u64()).collect::<Vec<_>>());
        assert_eq!(first, GOLDEN_SEED1_STREAM0);
    }

    const GOLDEN_SEED1_STREAM0: [u64; 3] =
        [7424550030962593201, 1482817706323250795, 11004592982271133285];

    #[test]
    fn open_interval_bounds() {
        let mut r = RngState::new(3, 3);
        for _ in 0..10_000 {
            let u = r.uniform_open();
            assert!(u > 0.0 && u < 1.0);
            let v = r.uniform();
            assert!((0.0..1.0).contains(&v));
        }
    }
}
