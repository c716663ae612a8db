//! Packed GF(2) bit vectors and seeded randomness.
//!
//! Bit 0 is always the first transmitted position and the most significant
//! bit in every integer, byte and hex conversion. Storage follows the same
//! convention: bit `i` lives in word `i / 64` at position `63 - i % 64`.

use std::fmt;
use std::ops::BitXor;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// Fixed-length sequence of bits with GF(2) arithmetic.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

#[inline]
fn mask(i: usize) -> u64 {
    1u64 << (WORD_BITS - 1 - i % WORD_BITS)
}

impl BitVector {
    /// All-zero vector of `len` bits.
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(WORD_BITS)],
        }
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut v = Self::zeros(0);
        for b in bits {
            v.push(b);
        }
        v
    }

    /// Builds a vector from 0/1 bytes (any nonzero byte counts as 1).
    pub fn from_bits(bits: &[u8]) -> Self {
        Self::from_bools(bits.iter().map(|&b| b != 0))
    }

    /// Vector with a single one at `index`.
    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(index, true);
        v
    }

    /// The low `len` bits of `value`, bit 0 of the vector being the most
    /// significant of those bits.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        Self::from_bools((0..len).map(|i| (value >> (len - 1 - i)) & 1 == 1))
    }

    /// Inverse of [`BitVector::from_u64`].
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 supports at most 64 bits");
        self.iter().fold(0u64, |acc, b| (acc << 1) | b as u64)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.words[i / WORD_BITS] & mask(i) != 0
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        let w = &mut self.words[i / WORD_BITS];
        if bit {
            *w |= mask(i);
        } else {
            *w &= !mask(i);
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.words[i / WORD_BITS] ^= mask(i);
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % WORD_BITS == 0 {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Packed words, bit 0 in the MSB of word 0. Padding bits are zero.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Hamming distance; lengths must agree.
    pub fn distance(&self, other: &Self) -> Result<usize> {
        Ok(self.xor(other)?.count_ones())
    }

    /// Elementwise GF(2) addition.
    pub fn xor(&self, other: &Self) -> Result<Self> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        Ok(Self {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    /// Bits at the listed positions, in list order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self::from_bools(indices.iter().map(|&i| self.get(i)))
    }

    /// Contiguous sub-range `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        Self::from_bools((start..start + len).map(|i| self.get(i)))
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for b in other.iter() {
            out.push(b);
        }
        out
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    /// Packs into bytes, bit 0 as the MSB of byte 0; the last byte is
    /// zero-padded on the right.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(nbytes);
        for w in &self.words {
            out.extend_from_slice(&w.to_be_bytes());
        }
        out.truncate(nbytes);
        out
    }

    /// Unpacks the first `len` bits of `bytes`.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if len > bytes.len() * 8 {
            return Err(Error::LengthMismatch {
                expected: len.div_ceil(8),
                actual: bytes.len(),
            });
        }
        let mut words = vec![0u64; len.div_ceil(WORD_BITS)];
        for (k, w) in words.iter_mut().enumerate() {
            let mut buf = [0u8; 8];
            let start = k * 8;
            let end = (start + 8).min(bytes.len());
            buf[..end - start].copy_from_slice(&bytes[start..end]);
            *w = u64::from_be_bytes(buf);
        }
        let mut v = Self { len, words };
        v.clear_padding();
        Ok(v)
    }

    /// Binary string such as `"1010"`.
    pub fn to_bin_string(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bin_string(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid binary digit {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::from_bools)
    }

    /// Lowercase hex, bit 0 as the MSB of the first nibble. A trailing
    /// partial nibble is zero-padded on the right.
    pub fn to_hex(&self) -> String {
        let nibbles = self.len.div_ceil(4);
        let mut s = String::with_capacity(nibbles);
        for k in 0..nibbles {
            let byte = self.words[k / 16].to_be_bytes()[(k % 16) / 2];
            let nib = if k % 2 == 0 { byte >> 4 } else { byte & 0xf };
            s.push(char::from_digit(nib as u32, 16).unwrap());
        }
        s
    }

    /// Parses `len` bits from hex. The string must have exactly
    /// `ceil(len / 4)` digits and the padding bits must be zero.
    pub fn from_hex(s: &str, len: usize) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_prefix("0x").unwrap_or(s);
        if s.len() != len.div_ceil(4) {
            return Err(Error::Parse(format!(
                "expected {} hex digits for {len} bits, got {}",
                len.div_ceil(4),
                s.len()
            )));
        }
        let mut v = Self::zeros(len);
        for (k, c) in s.chars().enumerate() {
            let nib = c
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("invalid hex digit {c:?}")))?;
            for j in 0..4 {
                let bit = (nib >> (3 - j)) & 1 == 1;
                let pos = 4 * k + j;
                if pos < len {
                    v.set(pos, bit);
                } else if bit {
                    return Err(Error::Parse("nonzero hex padding bits".into()));
                }
            }
        }
        Ok(v)
    }

    fn clear_padding(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= !0u64 << (WORD_BITS - rem);
            }
        }
    }
}

impl BitXor for &BitVector {
    type Output = BitVector;

    /// Panics on length mismatch; use [`BitVector::xor`] for a checked form.
    fn bitxor(self, rhs: &BitVector) -> BitVector {
        self.xor(rhs)
            .expect("xor of bit vectors with different lengths")
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            write!(f, "BitVector({})", self.to_bin_string())
        } else {
            write!(
                f,
                "BitVector(len={}, hex={}…)",
                self.len,
                &self.to_hex()[..32]
            )
        }
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bin_string())
    }
}

/// Identity of a reproducible random stream.
///
/// The generator is ChaCha20 keyed by `rand`'s `seed_from_u64(master_seed)`
/// expansion, with the ChaCha stream number set to `stream_id`. Equal
/// seeds give identical streams on every platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct RngSeed {
    pub master_seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngSeed {
    pub const fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    /// Derives an independent sub-stream. Same parent and label always give
    /// the same child.
    pub fn child(self, label: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(label.wrapping_add(0x5eed))),
        }
    }

    pub fn rng(self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Uniform bits drawn from an existing generator.
pub fn random_bits_from<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> BitVector {
    let mut words = vec![0u64; len.div_ceil(WORD_BITS)];
    for w in words.iter_mut() {
        *w = rng.next_u64();
    }
    let mut v = BitVector { len, words };
    v.clear_padding();
    v
}

/// `len` independent uniform bits, deterministic per seed.
pub fn random_bits(len: usize, seed: RngSeed) -> BitVector {
    random_bits_from(len, &mut seed.rng())
}

/// Uniform nonzero vector (rejection sampling). `len` must be positive.
pub fn random_nonzero_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> BitVector {
    assert!(len > 0, "no nonzero vector of length 0");
    loop {
        let v = random_bits_from(len, rng);
        if !v.is_zero() {
            return v;
        }
    }
}

/// GF(2) addition of two vectors.
pub fn xor(a: &BitVector, b: &BitVector) -> Result<BitVector> {
    a.xor(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bv(s: &str) -> BitVector {
        BitVector::from_bin_string(s).unwrap()
    }

    #[test]
    fn xor_examples() {
        assert_eq!(xor(&bv("1010"), &bv("0110")).unwrap(), bv("1100"));
        let x = bv("1101001");
        assert!(xor(&x, &x).unwrap().is_zero());
        assert_eq!(xor(&x, &BitVector::zeros(7)).unwrap(), x);
    }

    #[test]
    fn xor_length_mismatch() {
        let err = xor(&bv("10"), &bv("101")).unwrap_err();
        assert!(matches!(
            err,
            Error::LengthMismatch {
                expected: 2,
                actual: 3
            }
        ));
    }

    #[test]
    fn random_bits_empty_and_deterministic() {
        let seed = RngSeed::new(7, 3);
        assert!(random_bits(0, seed).is_empty());
        assert_eq!(random_bits(1000, seed), random_bits(1000, seed));
        assert_ne!(random_bits(1000, seed), random_bits(1000, seed.child(1)));
        assert_ne!(
            random_bits(1000, seed),
            random_bits(1000, RngSeed::new(8, 3))
        );
    }

    #[test]
    fn random_bits_are_balanced() {
        let v = random_bits(1_000_000, RngSeed::new(2024, 0));
        let frac = v.count_ones() as f64 / 1e6;
        assert!((0.497..=0.503).contains(&frac), "ones fraction {frac}");
    }

    #[test]
    fn padding_stays_clear() {
        let v = random_bits(70, RngSeed::new(1, 1));
        assert_eq!(v.words()[1] & (u64::MAX >> 6), 0);
        assert_eq!(v.count_ones(), v.iter().filter(|&b| b).count());
    }

    #[test]
    fn hex_uses_bit0_as_msb() {
        let v = bv("10100001");
        assert_eq!(v.to_hex(), "a1");
        let v = bv("111");
        assert_eq!(v.to_hex(), "e");
        assert_eq!(BitVector::from_hex("e", 3).unwrap(), v);
        assert!(BitVector::from_hex("f", 3).is_err());
        assert!(BitVector::from_hex("ee", 3).is_err());
    }

    #[test]
    fn u64_conversion_is_msb_first() {
        assert_eq!(BitVector::from_u64(0b001, 3), bv("001"));
        assert_eq!(bv("1100").to_u64(), 12);
    }

    #[test]
    fn byte_round_trip_exhaustive_lengths() {
        for len in 0..=64 {
            let v = random_bits(len, RngSeed::new(len as u64, 9));
            let bytes = v.to_bytes();
            assert_eq!(bytes.len(), len.div_ceil(8));
            assert_eq!(BitVector::from_bytes(&bytes, len).unwrap(), v);
            assert_eq!(BitVector::from_hex(&v.to_hex(), len).unwrap(), v);
        }
    }

    #[test]
    fn select_slice_concat() {
        let v = bv("110010");
        assert_eq!(v.select(&[5, 0, 2]), bv("010"));
        assert_eq!(v.slice(1, 3), bv("100"));
        assert_eq!(bv("10").concat(&bv("011")), bv("10011"));
    }

    fn arb_triple() -> impl Strategy<Value = (BitVector, BitVector, BitVector)> {
        (0usize..200).prop_flat_map(|len| {
            let one = proptest::collection::vec(any::<bool>(), len);
            (one.clone(), one.clone(), one).prop_map(|(a, b, c)| {
                (
                    BitVector::from_bools(a),
                    BitVector::from_bools(b),
                    BitVector::from_bools(c),
                )
            })
        })
    }

    proptest! {
        #[test]
        fn xor_is_associative_and_commutative((a, b, c) in arb_triple()) {
            prop_assert_eq!(&(&a ^ &b) ^ &c, &a ^ &(&b ^ &c));
            prop_assert_eq!(&a ^ &b, &b ^ &a);
        }
    }
}
