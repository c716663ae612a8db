//! Polar transform, bit-channel quality profiles and successive-cancellation
//! decoding.
//!
//! Codewords are `x = v · P_n · G^{⊗r}` with `G = [[1,0],[1,1]]` and `P_n`
//! the bit-reversal permutation. Because `P_n` commutes with `G^{⊗r}`, the
//! transform is computed as the natural-order butterfly followed by a
//! bit-reversal of the output, and the decoder undoes that reversal on the
//! channel LLRs before running the natural-order SC recursion. Bit-channel
//! index `i` of a [`QualityProfile`] is the `i`-th bit decoded by
//! [`sc_decode`]; its binary expansion, read from the most significant bit,
//! lists the minus (`0`) and plus (`1`) steps applied to the base channel.

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::channel::{BscParam, LLR_CLAMP};
use crate::error::{Error, Result};

/// Block length `n = 2^r` with `r ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolarParams {
    r: u32,
}

impl PolarParams {
    pub fn new(r: u32) -> Result<Self> {
        if r == 0 || r > 30 {
            return Err(Error::InvalidParameter(format!(
                "polar exponent r={r} outside 1..=30"
            )));
        }
        Ok(Self { r })
    }

    /// Parameters for block length `n`, which must be a power of two ≥ 2.
    pub fn from_len(n: usize) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        Self::new(n.trailing_zeros())
    }

    pub fn r(self) -> u32 {
        self.r
    }

    pub fn n(self) -> usize {
        1 << self.r
    }
}

/// Reverses the low `bits` bits of `i`.
#[inline]
fn reverse_bits(i: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - bits)
    }
}

/// `π(i)` = reversal of the `log2 n`-bit expansion of `i`.
pub fn bit_reversal_permutation(n: usize) -> Result<Vec<usize>> {
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let bits = n.trailing_zeros();
    Ok((0..n).map(|i| reverse_bits(i, bits)).collect())
}

/// In-place `u ← u · G^{⊗r}` over GF(2) on 0/1 bytes.
fn butterfly(u: &mut [u8]) {
    let n = u.len();
    let mut half = 1;
    while half < n {
        for block in u.chunks_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
}

/// `v · P_n · G^{⊗r}` on a byte-per-bit slice.
pub(crate) fn transform_bits(v: &[u8]) -> Vec<u8> {
    let n = v.len();
    let bits = n.trailing_zeros();
    let mut w = v.to_vec();
    butterfly(&mut w);
    (0..n).map(|k| w[reverse_bits(k, bits)]).collect()
}

/// Encodes `v` as `v · P_n · G^{⊗r}` in `O(n log n)`.
///
/// The map is a GF(2)-linear involution, so it also inverts itself.
pub fn polar_transform(v: &BitVector, pp: PolarParams) -> Result<BitVector> {
    if v.len() != pp.n() {
        return Err(Error::LengthMismatch {
            expected: pp.n(),
            actual: v.len(),
        });
    }
    Ok(BitVector::from_bits(&transform_bits(&v.to_bits())))
}

/// Bhattacharyya parameter of BSC(p): `2·sqrt(p(1-p))`.
pub fn base_bhattacharyya(ch: BscParam) -> f64 {
    let p = ch.crossover();
    2.0 * (p * (1.0 - p)).sqrt()
}

/// Per-bit-channel Bhattacharyya values from the erasure-surrogate
/// recursion `z⁻ = 2z − z²`, `z⁺ = z²`.
///
/// `z⁺` is exact for any binary-input channel; `z⁻` is an upper bound, so
/// every entry upper-bounds the true `Z(W_i)`. `1 − z[i]` is used as the
/// capacity proxy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityProfile {
    z: Vec<f64>,
}

impl QualityProfile {
    /// Wraps raw values; each must lie in `[0, 1]` and the count must be a
    /// power of two.
    pub fn from_values(z: Vec<f64>) -> Result<Self> {
        if !z.len().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(z.len()));
        }
        if let Some(bad) = z.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!(
                "Bhattacharyya value {bad} outside [0, 1]"
            )));
        }
        Ok(Self { z })
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// Surrogate capacity `1 − z[i]`.
    pub fn capacity(&self, i: usize) -> f64 {
        1.0 - self.z[i]
    }
}

/// One level of the surrogate recursion: child `2k` is the minus channel of
/// `z[k]`, child `2k+1` the plus channel.
pub fn polarize_step(z: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * z.len());
    for &v in z {
        out.push((2.0 * v - v * v).clamp(0.0, 1.0));
        out.push(v * v);
    }
    out
}

pub fn quality_profile(ch: BscParam, pp: PolarParams) -> QualityProfile {
    let mut z = vec![base_bhattacharyya(ch)];
    for _ in 0..pp.r() {
        z = polarize_step(&z);
    }
    QualityProfile { z }
}

/// Exact bit-channel Bhattacharyya parameters and capacities.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactQuality {
    pub z: Vec<f64>,
    pub capacity: Vec<f64>,
}

/// Exact `Z(W_i)` and `C(W_i)` by summing the synthetic channel law over
/// every output `y^n` and past-bit prefix `v^{i-1}`.
///
/// Cost is `4^n`, so `n` is capped at 16 (and `n = 16` takes seconds even
/// optimized). `n = 1` returns the base channel itself.
pub fn exact_bitchannel_quality(ch: BscParam, n: usize) -> Result<ExactQuality> {
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    if n > 16 {
        return Err(Error::TooLarge(n));
    }
    let p = ch.crossover();
    let size = 1usize << n;
    // v and y are n-bit integers with bit 0 of the vector as the MSB.
    let to_bits =
        |x: usize| -> Vec<u8> { (0..n).map(|i| ((x >> (n - 1 - i)) & 1) as u8).collect() };
    let from_bits =
        |b: &[u8]| -> usize { b.iter().fold(0usize, |acc, &x| (acc << 1) | x as usize) };
    let codewords: Vec<usize> = (0..size)
        .map(|v| from_bits(&transform_bits(&to_bits(v))))
        .collect();
    let flip_prob: Vec<f64> = (0..=n)
        .map(|d| p.powi(d as i32) * (1.0 - p).powi((n - d) as i32))
        .collect();
    let norm = 1.0 / (1usize << (n - 1)) as f64;

    let mut z = vec![0.0; n];
    let mut cap = vec![0.0; n];
    let mut sums = vec![0.0; size];
    for y in 0..size {
        for (s, &cw) in sums.iter_mut().zip(&codewords) {
            *s = flip_prob[(cw ^ y).count_ones() as usize];
        }
        // After collapsing the low `n - 1 - i` bits, entries 2m / 2m+1 hold
        // the law of W_i for prefix m and v_i = 0 / 1.
        let mut level = sums.clone();
        for i in (0..n).rev() {
            for pair in level.chunks_exact(2) {
                let (w0, w1) = (pair[0] * norm, pair[1] * norm);
                z[i] += (w0 * w1).sqrt();
                let mid = 0.5 * (w0 + w1);
                for w in [w0, w1] {
                    if w > 0.0 {
                        cap[i] += 0.5 * w * (w / mid).log2();
                    }
                }
            }
            if i > 0 {
                level = level.chunks_exact(2).map(|c| c[0] + c[1]).collect();
            }
        }
    }
    Ok(ExactQuality { z, capacity: cap })
}

/// Bit positions fixed before decoding, with their values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrozenSpec {
    indices: Vec<usize>,
    values: BitVector,
}

impl FrozenSpec {
    /// `indices` must be distinct and below `n`; `values[k]` is the bit at
    /// `indices[k]`.
    pub fn new(n: usize, indices: Vec<usize>, values: BitVector) -> Result<Self> {
        if values.len() != indices.len() {
            return Err(Error::LengthMismatch {
                expected: indices.len(),
                actual: values.len(),
            });
        }
        let mut seen = vec![false; n];
        for &i in &indices {
            if i >= n || seen[i] {
                return Err(Error::InvalidParameter(format!(
                    "frozen index {i} repeated or outside [0, {n})"
                )));
            }
            seen[i] = true;
        }
        Ok(Self { indices, values })
    }

    /// All listed positions frozen to zero.
    pub fn zeros(n: usize, indices: Vec<usize>) -> Result<Self> {
        let len = indices.len();
        Self::new(n, indices, BitVector::zeros(len))
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &BitVector {
        &self.values
    }

    /// Per-position decision constraint: `Some(bit)` if frozen.
    pub fn mask(&self, n: usize) -> Vec<Option<bool>> {
        let mut m = vec![None; n];
        for (k, &i) in self.indices.iter().enumerate() {
            m[i] = Some(self.values.get(k));
        }
        m
    }
}

/// Channel LLRs `ln(P(y_k|0) / P(y_k|1))` for a received word.
pub fn channel_llrs(y: &BitVector, ch: BscParam) -> Vec<f64> {
    let mag = ch.llr_magnitude();
    y.iter().map(|b| if b { -mag } else { mag }).collect()
}

/// Check-node combination `2·atanh(tanh(a/2)·tanh(b/2))` in a form that
/// does not overflow.
#[inline]
fn combine_minus(a: f64, b: f64) -> f64 {
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    sign * a.abs().min(b.abs()) + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

#[inline]
fn combine_plus(a: f64, b: f64, upper_bit: u8) -> f64 {
    if upper_bit == 0 {
        b + a
    } else {
        b - a
    }
}

/// Natural-order SC recursion over `w = v · G^{⊗k}`.
///
/// Writes decided bits into `v` and the re-encoded partial sums into
/// `partial`; `scratch` must hold at least `llr.len()` entries.
fn sc_recurse(
    llr: &[f64],
    scratch: &mut [f64],
    frozen: &[Option<bool>],
    v: &mut [u8],
    partial: &mut [u8],
) {
    let n = llr.len();
    if n == 1 {
        let bit = match frozen[0] {
            Some(b) => b as u8,
            None => u8::from(llr[0] < 0.0),
        };
        v[0] = bit;
        partial[0] = bit;
        return;
    }
    let h = n / 2;
    let (top, bottom) = llr.split_at(h);
    let (mine, rest) = scratch.split_at_mut(h);
    let (f_lo, f_hi) = frozen.split_at(h);
    let (v_lo, v_hi) = v.split_at_mut(h);
    let (p_lo, p_hi) = partial.split_at_mut(h);

    for i in 0..h {
        mine[i] = combine_minus(top[i], bottom[i]);
    }
    sc_recurse(mine, rest, f_lo, v_lo, p_lo);
    for i in 0..h {
        mine[i] = combine_plus(top[i], bottom[i], p_lo[i]);
    }
    sc_recurse(mine, rest, f_hi, v_hi, p_hi);
    for i in 0..h {
        p_lo[i] ^= p_hi[i];
    }
}

/// SC decoding from channel LLRs (indexed like the codeword) under a
/// per-position frozen mask. Returns the decided `v` as 0/1 bytes.
pub fn sc_decode_llrs(llr: &[f64], frozen: &[Option<bool>]) -> Vec<u8> {
    let n = llr.len();
    assert!(n.is_power_of_two() && frozen.len() == n);
    let bits = n.trailing_zeros();
    let natural: Vec<f64> = (0..n)
        .map(|k| llr[reverse_bits(k, bits)].clamp(-LLR_CLAMP, LLR_CLAMP))
        .collect();
    let mut scratch = vec![0.0; n];
    let mut v = vec![0u8; n];
    let mut partial = vec![0u8; n];
    sc_recurse(&natural, &mut scratch, frozen, &mut v, &mut partial);
    v
}

/// Successive-cancellation estimate of `v` from `y` received over `ch`.
///
/// Frozen positions take their declared values; every other bit is the
/// likelihood-maximizing choice given `y` and the bits already decided.
/// An LLR of exactly zero resolves to 0.
pub fn sc_decode(
    y: &BitVector,
    ch: BscParam,
    fs: &FrozenSpec,
    pp: PolarParams,
) -> Result<BitVector> {
    if y.len() != pp.n() {
        return Err(Error::LengthMismatch {
            expected: pp.n(),
            actual: y.len(),
        });
    }
    let v = sc_decode_llrs(&channel_llrs(y, ch), &fs.mask(pp.n()));
    Ok(BitVector::from_bits(&v))
}
