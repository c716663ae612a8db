//! Binary symmetric channels and the binary symmetric wiretap channel.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{BitVector, RngSeed};
use crate::error::{Error, Result};

/// Crossover probability of a BSC, restricted to `[0, 0.5]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct BscParam(f64);

impl BscParam {
    pub fn new(crossover: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&crossover) {
            return Err(Error::Domain(format!(
                "BSC crossover {crossover} outside [0, 0.5]"
            )));
        }
        Ok(Self(crossover))
    }

    pub fn crossover(self) -> f64 {
        self.0
    }

    /// Log-likelihood ratio `ln(W(0|0) / W(0|1))` of a received zero,
    /// clamped to ±[`LLR_CLAMP`] so that `p = 0` stays finite.
    pub fn llr_magnitude(self) -> f64 {
        let p = self.0;
        if p == 0.0 {
            LLR_CLAMP
        } else {
            ((1.0 - p) / p).ln().min(LLR_CLAMP)
        }
    }
}

impl TryFrom<f64> for BscParam {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<BscParam> for f64 {
    fn from(p: BscParam) -> f64 {
        p.0
    }
}

/// Largest LLR magnitude used anywhere (natural-log units).
pub const LLR_CLAMP: f64 = 40.0;

/// BSC(p) to Bob, BSC(q) to Eve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WiretapChannel {
    pub main: BscParam,
    pub eve: BscParam,
}

impl WiretapChannel {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        Ok(Self {
            main: BscParam::new(p)?,
            eve: BscParam::new(q)?,
        })
    }

    /// True when Eve's channel is strictly noisier than Bob's.
    pub fn has_positive_secrecy(&self) -> bool {
        self.eve.crossover() > self.main.crossover()
    }
}

/// Passes `x` through the BSC, flipping each bit independently.
pub fn transmit_with<R: Rng + ?Sized>(x: &BitVector, ch: BscParam, rng: &mut R) -> BitVector {
    let p = ch.crossover();
    let mut y = x.clone();
    if p == 0.0 {
        return y;
    }
    for i in 0..y.len() {
        if rng.gen_bool(p) {
            y.flip(i);
        }
    }
    y
}

/// [`transmit_with`] driven by a fresh stream for `seed`.
pub fn transmit(x: &BitVector, ch: BscParam, seed: RngSeed) -> BitVector {
    transmit_with(x, ch, &mut seed.rng())
}

/// Binary entropy in bits, with `0·log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!(
            "entropy argument {p} outside [0, 1]"
        )));
    }
    let term = |x: f64| if x == 0.0 { 0.0 } else { -x * x.log2() };
    Ok(term(p) + term(1.0 - p))
}

/// Capacity of the BSC, `1 - h(p)`.
pub fn bsc_capacity(ch: BscParam) -> f64 {
    1.0 - binary_entropy(ch.crossover()).expect("crossover is in range")
}

/// Secrecy capacity `h(q) - h(p)` of the binary symmetric wiretap channel.
///
/// Uniform input maximizes both mutual informations for symmetric channels,
/// so no optimization over input laws is needed.
pub fn secrecy_capacity(wc: &WiretapChannel) -> Result<f64> {
    let (p, q) = (wc.main.crossover(), wc.eve.crossover());
    if q < p {
        return Err(Error::NoPositiveSecrecy { p, q });
    }
    Ok(binary_entropy(q)? - binary_entropy(p)?)
}
