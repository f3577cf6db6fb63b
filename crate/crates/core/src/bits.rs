//! Bit-vector helpers. Bits are stored one per `u8` (0 or 1) and packed
//! LSB-first within bytes.

pub fn pack(bits: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        out[i / 8] |= (b & 1) << (i % 8);
    }
    out
}

/// Inverse of [`pack`]; `len` bits are taken, so trailing padding is dropped.
pub fn unpack(bytes: &[u8], len: usize) -> Vec<u8> {
    assert!(len <= bytes.len() * 8, "not enough bytes for {len} bits");
    (0..len).map(|i| (bytes[i / 8] >> (i % 8)) & 1).collect()
}

/// `count` uniformly random bits.
pub fn random_bits<R: rand::Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let word: u64 = rng.random();
        let take = (count - out.len()).min(64);
        out.extend((0..take).map(|i| ((word >> i) & 1) as u8));
    }
    out
}
