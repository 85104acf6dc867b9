use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) type Rng = ChaCha8Rng;

/// Independent stream for a named sampling task under one run seed.
pub(crate) fn stream(seed: u64, tag: u64) -> Rng {
    let mixed = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(17);
    ChaCha8Rng::seed_from_u64(mixed)
}
