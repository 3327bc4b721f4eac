//! Inner-product preserving feature hashing for bag-of-words text.
//!
//! The hash is pinned so ingestion is reproducible across platforms:
//! 64-bit FNV-1a over the token's UTF-8 bytes, with the caller's seed XORed
//! into the offset basis. The slot is the low `hash_bits` bits of the
//! digest; the sign comes from the next bit up (+1 when that bit is 0).
//! Duplicate tokens accumulate, so a line maps to its signed term-count
//! vector in `2^hash_bits` dimensions.

use super::SparseVec;

pub const FNV64_OFFSET_BASIS: u64 = 0xcbf2_9ce4_8422_2325;
pub const FNV64_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Seeded 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8], seed: u64) -> u64 {
    let mut h = FNV64_OFFSET_BASIS ^ seed;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV64_PRIME);
    }
    h
}

/// Hash slot and sign for one token.
pub fn token_slot_sign(token: &str, hash_bits: u32, hash_seed: u64) -> (u32, f64) {
    debug_assert!((1..=30).contains(&hash_bits));
    let h = fnv1a64(token.as_bytes(), hash_seed);
    let slot = (h & ((1u64 << hash_bits) - 1)) as u32;
    let sign = if (h >> hash_bits) & 1 == 0 { 1.0 } else { -1.0 };
    (slot, sign)
}

/// Signed hashed bag-of-words for a token stream.
pub fn hash_tokens<'a>(
    tokens: impl Iterator<Item = &'a str>,
    hash_bits: u32,
    hash_seed: u64,
) -> SparseVec {
    let pairs: Vec<(u32, f64)> = tokens
        .map(|t| token_slot_sign(t, hash_bits, hash_seed))
        .collect();
    SparseVec::from_pairs(pairs)
}
