//! LFSR-generated Toeplitz hashing, `ψ(m) = m·A ⊕ b`.
//!
//! Row `i` of the `t × u` matrix `A` is the window `(a_i, …, a_{i+u-1})`
//! of the sequence produced by an LFSR with a primitive feedback polynomial
//! and a nonzero initial state. A key is the polynomial's `u` low
//! coefficients, the `u`-bit initial state and the `u`-bit offset `b`:
//! `3u` bits in total. For `t`-bit messages the family is
//! `t / 2^{u-1}`-balanced.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{random_bits_from, random_nonzero_bits, BitVector};
use crate::error::{Error, Result};

/// Largest supported tag length; windows are kept in a `u128`.
pub const MAX_TAG_BITS: usize = 128;

/// Degrees above this are accepted only from [`CURATED_POLYNOMIALS`].
pub const EXACT_CHECK_MAX_DEGREE: usize = 24;

/// Primitive polynomials too large for the exact check, as exponent lists.
pub const CURATED_POLYNOMIALS: &[&[u32]] =
    &[&[101, 84, 66, 49, 32, 16, 0], &[64, 9, 8, 7, 6, 3, 0]];

/// Monic feedback polynomial `x^u + c_{u-1}x^{u-1} + … + c_1 x + c_0`.
///
/// Only the `u` low coefficients are stored; bit `j` of `taps` is `c_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GenPoly {
    degree: usize,
    taps: u128,
}

impl GenPoly {
    /// Builds from the low coefficients. The constant term must be 1.
    pub fn new(degree: usize, taps: u128) -> Result<Self> {
        if degree == 0 || degree > MAX_TAG_BITS {
            return Err(Error::InvalidParameter(format!(
                "polynomial degree {degree} outside 1..={MAX_TAG_BITS}"
            )));
        }
        if degree < 128 && taps >> degree != 0 {
            return Err(Error::InvalidParameter(
                "coefficient above the degree".into(),
            ));
        }
        if taps & 1 == 0 {
            return Err(Error::InvalidParameter(
                "constant term of the feedback polynomial must be 1".into(),
            ));
        }
        Ok(Self { degree, taps })
    }

    /// From exponents with nonzero coefficients, e.g. `[3, 1, 0]` for
    /// `x³ + x + 1`. The largest exponent is the degree.
    pub fn from_exponents(exponents: &[u32]) -> Result<Self> {
        let degree = *exponents
            .iter()
            .max()
            .ok_or_else(|| Error::InvalidParameter("empty polynomial".into()))?
            as usize;
        let mut taps = 0u128;
        for &e in exponents {
            if (e as usize) < degree {
                taps ^= 1u128 << e;
            }
        }
        Self::new(degree, taps)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn taps(&self) -> u128 {
        self.taps
    }

    /// Exponents with nonzero coefficient, highest first.
    pub fn exponents(&self) -> Vec<u32> {
        let mut e = vec![self.degree as u32];
        e.extend(
            (0..self.degree as u32)
                .rev()
                .filter(|&j| (self.taps >> j) & 1 == 1),
        );
        e
    }

    /// Low coefficients `c_0 … c_{u-1}` as a bit vector (bit `j` = `c_j`).
    pub fn coefficient_bits(&self) -> BitVector {
        BitVector::from_bools((0..self.degree).map(|j| (self.taps >> j) & 1 == 1))
    }

    pub fn from_coefficient_bits(bits: &BitVector) -> Result<Self> {
        let taps = bits
            .iter()
            .enumerate()
            .fold(0u128, |acc, (j, b)| acc | (u128::from(b) << j));
        Self::new(bits.len(), taps)
    }

    /// The curated polynomial of this degree, if any.
    pub fn curated(degree: usize) -> Option<Self> {
        CURATED_POLYNOMIALS
            .iter()
            .map(|e| Self::from_exponents(e).expect("curated table is well formed"))
            .find(|p| p.degree == degree)
    }

    /// Draws a primitive polynomial of the given degree: uniform over
    /// primitive polynomials for degrees up to 24, the curated entry above.
    pub fn random_primitive<R: Rng + ?Sized>(degree: usize, rng: &mut R) -> Result<Self> {
        if degree > EXACT_CHECK_MAX_DEGREE {
            return Self::curated(degree).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "no curated primitive polynomial of degree {degree}"
                ))
            });
        }
        if degree == 0 {
            return Err(Error::InvalidParameter("degree 0".into()));
        }
        loop {
            let taps = (rng.gen::<u128>() & ((1u128 << degree) - 1)) | 1;
            let poly = Self::new(degree, taps)?;
            if validate_poly(&poly) {
                return Ok(poly);
            }
        }
    }

    fn full_u64(&self) -> u64 {
        debug_assert!(self.degree <= EXACT_CHECK_MAX_DEGREE);
        (1u64 << self.degree) | self.taps as u64
    }
}

/// `a mod m` over GF(2), polynomials packed with bit `k` = coefficient of `x^k`.
fn gf2_mod(mut a: u64, m: u64) -> u64 {
    let dm = 63 - m.leading_zeros();
    while a != 0 && 63 - a.leading_zeros() >= dm {
        a ^= m << ((63 - a.leading_zeros()) - dm);
    }
    a
}

fn gf2_mulmod(a: u64, b: u64, m: u64) -> u64 {
    let dm = 63 - m.leading_zeros();
    let mut result = 0u64;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            result ^= a;
        }
        b >>= 1;
        a <<= 1;
        if (a >> dm) & 1 == 1 {
            a ^= m;
        }
    }
    result
}

fn gf2_powmod(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut result = 1u64;
    let mut b = gf2_mod(base, m);
    while exp > 0 {
        if exp & 1 == 1 {
            result = gf2_mulmod(result, b, m);
        }
        b = gf2_mulmod(b, b, m);
        exp >>= 1;
    }
    result
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Irreducibility by trial division with every polynomial of degree up to
/// `deg / 2`.
fn is_irreducible(full: u64) -> bool {
    let deg = 63 - full.leading_zeros();
    for d in 1..=deg / 2 {
        for low in 0..(1u64 << d) {
            let g = (1u64 << d) | low;
            if gf2_mod(full, g) == 0 {
                return false;
            }
        }
    }
    true
}

/// True iff `poly` is primitive.
///
/// Degrees up to 24 are checked exactly (irreducibility by trial division,
/// then the order of `x` is `2^u − 1`); higher degrees must be in
/// [`CURATED_POLYNOMIALS`].
pub fn validate_poly(poly: &GenPoly) -> bool {
    if poly.taps & 1 == 0 {
        return false;
    }
    if poly.degree > EXACT_CHECK_MAX_DEGREE {
        return GenPoly::curated(poly.degree) == Some(*poly);
    }
    let full = poly.full_u64();
    if !is_irreducible(full) {
        return false;
    }
    let order = (1u64 << poly.degree) - 1;
    if poly.degree == 1 {
        return true;
    }
    gf2_powmod(2, order, full) == 1
        && prime_factors(order)
            .into_iter()
            .all(|f| gf2_powmod(2, order / f, full) != 1)
}

/// Message and tag lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HashParams {
    t: usize,
    u: usize,
}

impl HashParams {
    pub fn new(t: usize, u: usize) -> Result<Self> {
        if u == 0 || u > MAX_TAG_BITS {
            return Err(Error::InvalidParameter(format!(
                "tag length u={u} outside 1..={MAX_TAG_BITS}"
            )));
        }
        if t <= u {
            return Err(Error::InvalidParameter(format!(
                "message length t={t} must exceed tag length u={u}"
            )));
        }
        Ok(Self { t, u })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn u(&self) -> usize {
        self.u
    }

    /// Balance bound `t / 2^{u-1}`.
    pub fn epsilon(&self) -> f64 {
        epsilon_bound(self)
    }

    /// False when the bound is vacuous (`ε ≥ 1`).
    pub fn is_secure(&self) -> bool {
        self.epsilon() < 1.0
    }
}

pub fn epsilon_bound(hp: &HashParams) -> f64 {
    hp.t as f64 * 2f64.powi(1 - hp.u as i32)
}

/// `(poly, init, b)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LfsrHashKey {
    poly: GenPoly,
    init: BitVector,
    offset: BitVector,
}

impl LfsrHashKey {
    pub fn new(poly: GenPoly, init: BitVector, offset: BitVector) -> Result<Self> {
        let u = poly.degree;
        for v in [&init, &offset] {
            if v.len() != u {
                return Err(Error::LengthMismatch {
                    expected: u,
                    actual: v.len(),
                });
            }
        }
        if init.is_zero() {
            return Err(Error::ZeroState);
        }
        Ok(Self { poly, init, offset })
    }

    /// Uniform key over primitive polynomial, nonzero state and offset.
    pub fn random<R: Rng + ?Sized>(u: usize, rng: &mut R) -> Result<Self> {
        let poly = GenPoly::random_primitive(u, rng)?;
        let init = random_nonzero_bits(u, rng);
        let offset = random_bits_from(u, rng);
        Self::new(poly, init, offset)
    }

    pub fn poly(&self) -> &GenPoly {
        &self.poly
    }

    pub fn init(&self) -> &BitVector {
        &self.init
    }

    pub fn offset(&self) -> &BitVector {
        &self.offset
    }

    pub fn u(&self) -> usize {
        self.poly.degree
    }

    /// Same key with a different offset.
    pub fn with_offset(&self, offset: BitVector) -> Result<Self> {
        Self::new(self.poly, self.init.clone(), offset)
    }

    /// `c_0…c_{u-1} ‖ init ‖ b`, exactly `3u` bits.
    pub fn to_bits(&self) -> BitVector {
        self.poly
            .coefficient_bits()
            .concat(&self.init)
            .concat(&self.offset)
    }

    pub fn from_bits(bits: &BitVector) -> Result<Self> {
        if bits.len() % 3 != 0 || bits.is_empty() {
            return Err(Error::Parse(format!(
                "key length {} is not a positive multiple of 3",
                bits.len()
            )));
        }
        let u = bits.len() / 3;
        let poly = GenPoly::from_coefficient_bits(&bits.slice(0, u))?;
        Self::new(poly, bits.slice(u, u), bits.slice(2 * u, u))
    }

    /// Hex of [`LfsrHashKey::to_bits`] (bit 0 as MSB of the first nibble).
    pub fn to_hex(&self) -> String {
        self.to_bits().to_hex()
    }

    pub fn from_hex(s: &str, u: usize) -> Result<Self> {
        Self::from_bits(&BitVector::from_hex(s, 3 * u)?)
    }

    fn window0(&self) -> u128 {
        self.init
            .iter()
            .enumerate()
            .fold(0u128, |acc, (j, b)| acc | (u128::from(b) << j))
    }

    fn offset_word(&self) -> u128 {
        self.offset
            .iter()
            .enumerate()
            .fold(0u128, |acc, (j, b)| acc | (u128::from(b) << j))
    }
}

/// Window `(a_i … a_{i+u-1})` packed with `a_{i+j}` at bit `j`.
#[derive(Debug, Clone, Copy)]
struct Window {
    bits: u128,
    taps: u128,
    top: u32,
}

impl Window {
    fn new(key: &LfsrHashKey) -> Self {
        Self {
            bits: key.window0(),
            taps: key.poly.taps,
            top: key.u() as u32 - 1,
        }
    }

    #[inline]
    fn advance(&mut self) {
        let next = (self.bits & self.taps).count_ones() as u128 & 1;
        self.bits = (self.bits >> 1) | (next << self.top);
    }
}

/// First `count` bits `a_0 … a_{count-1}` of the LFSR sequence, where
/// `a_{k+u} = Σ_j c_j · a_{k+j}`.
pub fn lfsr_stream(key: &LfsrHashKey, count: usize) -> Result<BitVector> {
    if key.init.is_zero() {
        return Err(Error::ZeroState);
    }
    let mut w = Window::new(key);
    let mut out = BitVector::zeros(count);
    for i in 0..count {
        if w.bits & 1 == 1 {
            out.set(i, true);
        }
        w.advance();
    }
    Ok(out)
}

fn word_to_tag(word: u128, u: usize) -> BitVector {
    BitVector::from_bools((0..u).map(|j| (word >> j) & 1 == 1))
}

/// Tag `m·A ⊕ b` of a `t`-bit message.
///
/// Streams the LFSR once, accumulating the current window whenever the
/// message bit is set; `t + u − 1` sequence bits are consumed.
pub fn hash(m: &BitVector, key: &LfsrHashKey, hp: &HashParams) -> Result<BitVector> {
    if key.u() != hp.u {
        return Err(Error::LengthMismatch {
            expected: hp.u,
            actual: key.u(),
        });
    }
    if m.len() != hp.t {
        return Err(Error::LengthMismatch {
            expected: hp.t,
            actual: m.len(),
        });
    }
    let mut w = Window::new(key);
    let mut acc = key.offset_word();
    let mut remaining = hp.t;
    for &word in m.words() {
        let take = remaining.min(64);
        for k in 0..take {
            if (word >> (63 - k)) & 1 == 1 {
                acc ^= w.bits;
            }
            w.advance();
        }
        remaining -= take;
    }
    Ok(word_to_tag(acc, hp.u))
}

/// Fraction of keys in `keys` that map `m` to `s`.
pub fn balance_fraction<'a, I>(
    m: &BitVector,
    s: &BitVector,
    keys: I,
    hp: &HashParams,
) -> Result<f64>
where
    I: IntoIterator<Item = &'a LfsrHashKey>,
{
    let mut hits = 0usize;
    let mut total = 0usize;
    for key in keys {
        total += 1;
        if &hash(m, key, hp)? == s {
            hits += 1;
        }
    }
    Ok(if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    })
}
