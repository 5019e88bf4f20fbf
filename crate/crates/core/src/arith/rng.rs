use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded random bit stream.
///
/// All randomness in a counter run comes from this stream, one bit at a
/// time. Bits are taken from successive `ChaCha8` 64-bit outputs, least
/// significant bit first. [`next_uniform_bits`](Self::next_uniform_bits)
/// is the same stream read `b` bits at a time, with the first bit drawn
/// becoming the most significant bit of the result. The stream, and hence
/// every run, is identical across platforms for a given seed.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
    word: u64,
    available: u32,
    consumed: u64,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            word: 0,
            available: 0,
            consumed: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Total number of bits drawn so far.
    pub fn bits_consumed(&self) -> u64 {
        self.consumed
    }

    #[inline]
    pub fn next_bit(&mut self) -> bool {
        if self.available == 0 {
            self.word = self.rng.next_u64();
            self.available = 64;
        }
        let bit = self.word & 1 == 1;
        self.word >>= 1;
        self.available -= 1;
        self.consumed += 1;
        bit
    }

    /// The next `bits` bits (at most 64) as an integer, first bit most
    /// significant.
    pub fn next_uniform_bits(&mut self, bits: u32) -> u64 {
        assert!(bits <= 64);
        let mut out = 0u64;
        let mut needed = bits;
        while needed > 0 {
            if self.available == 0 {
                self.word = self.rng.next_u64();
                self.available = 64;
            }
            let take = needed.min(self.available);
            let chunk = if take == 64 { self.word } else { self.word & ((1u64 << take) - 1) };
            // low bit of `chunk` was drawn first, so it becomes the high bit
            let reversed = chunk.reverse_bits() >> (64 - take);
            out = if take == 64 { reversed } else { (out << take) | reversed };
            self.word = if take == 64 { 0 } else { self.word >> take };
            self.available -= take;
            self.consumed += u64::from(take);
            needed -= take;
        }
        out
    }
}
