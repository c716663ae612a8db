//! Concrete attackers and Monte-Carlo success estimation.
//!
//! Oscar sees every message in the clear and Eve's output `z` of every
//! honest round. Forged channel words reach Bob without noise. The four
//! variants behave as follows.
//!
//! | variant | impersonation | type I | type II |
//! |---|---|---|---|
//! | `random_tag` | fresh `m`, uniform payload | uniform `m_o ≠ m_j` | uniform `m_o ≠ m_j`, uniform payload |
//! | `replay_codeword` | `m_prev ⊕ δ`, replays `z_prev` | `m_o = m_prev` | `m_j ⊕ δ`, replays `z_j` |
//! | `bitflip_message` | `m_prev ⊕ δ`, Eve's tag estimate | `m_j ⊕ δ` | `m_j ⊕ δ`, Eve's tag estimate |
//! | `eve_decode_reuse` | fresh `m`, Eve's tag estimate | same as `bitflip_message` | fresh `m_o`, Eve's tag estimate |
//!
//! `δ` is a uniform nonzero difference. "Eve's tag estimate" means the
//! first `u` bits of Eve's SC decoding of `z`, re-encoded with fresh
//! randomness in the rest of the payload. Impersonation variants that need a
//! previous round fall back to `random_tag` when the history is empty.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::bits::{random_bits_from, random_nonzero_bits, BitVector, RngSeed};
use crate::error::{Error, Result};
use crate::lfsr_hash::{hash, validate_poly, GenPoly, HashParams, LfsrHashKey};
use crate::protocol::{assemble_payload, honest_round, verify, ProtocolConfig, RoundTranscript};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    Impersonation,
    SubstitutionType1,
    SubstitutionType2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackVariant {
    RandomTag,
    ReplayCodeword,
    BitflipMessage,
    EveDecodeReuse,
}

impl AttackKind {
    pub const ALL: [AttackKind; 3] = [
        AttackKind::Impersonation,
        AttackKind::SubstitutionType1,
        AttackKind::SubstitutionType2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackKind::Impersonation => "impersonation",
            AttackKind::SubstitutionType1 => "substitution_type1",
            AttackKind::SubstitutionType2 => "substitution_type2",
        }
    }
}

impl AttackVariant {
    pub const ALL: [AttackVariant; 4] = [
        AttackVariant::RandomTag,
        AttackVariant::ReplayCodeword,
        AttackVariant::BitflipMessage,
        AttackVariant::EveDecodeReuse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackVariant::RandomTag => "random_tag",
            AttackVariant::ReplayCodeword => "replay_codeword",
            AttackVariant::BitflipMessage => "bitflip_message",
            AttackVariant::EveDecodeReuse => "eve_decode_reuse",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttackStrategy {
    pub kind: AttackKind,
    pub variant: AttackVariant,
}

impl AttackStrategy {
    pub fn new(kind: AttackKind, variant: AttackVariant) -> Self {
        Self { kind, variant }
    }

    /// All twelve kind/variant pairs.
    pub fn all() -> Vec<AttackStrategy> {
        AttackKind::ALL
            .iter()
            .flat_map(|&k| {
                AttackVariant::ALL
                    .iter()
                    .map(move |&v| AttackStrategy::new(k, v))
            })
            .collect()
    }
}

impl fmt::Display for AttackStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.kind.name(), self.variant.name())
    }
}

impl FromStr for AttackStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown attack strategy `{s}`"));
        let (k, v) = s.split_once('/').ok_or_else(bad)?;
        let kind = AttackKind::ALL
            .into_iter()
            .find(|x| x.name() == k)
            .ok_or_else(bad)?;
        let variant = AttackVariant::ALL
            .into_iter()
            .find(|x| x.name() == v)
            .ok_or_else(bad)?;
        Ok(Self::new(kind, variant))
    }
}

/// A forged `(m_o, y_o)` pair as Bob receives it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Forgery {
    pub message: BitVector,
    pub word: BitVector,
}

fn eve_tag_estimate(z: &BitVector, cfg: &ProtocolConfig) -> Result<BitVector> {
    let code = cfg.code();
    Ok(code.decode_over(z, code.channel().eve)?.slice(0, cfg.u()))
}

fn encode_tag(tag: &BitVector, cfg: &ProtocolConfig, seed: RngSeed) -> Result<BitVector> {
    let payload = assemble_payload(tag, cfg.code().payload_len(), &mut seed.child(0).rng());
    cfg.code().encode(&payload, seed.child(1))
}

fn uniform_word(cfg: &ProtocolConfig, seed: RngSeed) -> Result<BitVector> {
    let tag = random_bits_from(cfg.u(), &mut seed.child(2).rng());
    encode_tag(&tag, cfg, seed)
}

fn flip_some(m: &BitVector, seed: RngSeed) -> Result<BitVector> {
    let delta = random_nonzero_bits(m.len(), &mut seed.child(3).rng());
    m.xor(&delta)
}

/// Uniform message different from `avoid`.
fn fresh_message_avoiding(avoid: &BitVector, seed: RngSeed) -> Result<BitVector> {
    flip_some(avoid, seed)
}

fn require_kind(strategy: AttackStrategy, kind: AttackKind) -> Result<()> {
    if strategy.kind != kind {
        return Err(Error::InvalidParameter(format!(
            "strategy {strategy} is not a {} attack",
            kind.name()
        )));
    }
    Ok(())
}

/// Forges a pair before Alice's next round, using only `history`.
pub fn impersonate(
    strategy: AttackStrategy,
    history: &[RoundTranscript],
    cfg: &ProtocolConfig,
    seed: RngSeed,
) -> Result<Forgery> {
    require_kind(strategy, AttackKind::Impersonation)?;
    let fresh = || random_bits_from(cfg.t(), &mut seed.child(4).rng());
    let Some(prev) = history.last() else {
        return Ok(Forgery {
            message: fresh(),
            word: uniform_word(cfg, seed)?,
        });
    };
    let (message, word) = match strategy.variant {
        AttackVariant::RandomTag => (fresh(), uniform_word(cfg, seed)?),
        AttackVariant::ReplayCodeword => (flip_some(&prev.m_received, seed)?, prev.z.clone()),
        AttackVariant::BitflipMessage => (
            flip_some(&prev.m_received, seed)?,
            encode_tag(&eve_tag_estimate(&prev.z, cfg)?, cfg, seed)?,
        ),
        AttackVariant::EveDecodeReuse => (
            fresh(),
            encode_tag(&eve_tag_estimate(&prev.z, cfg)?, cfg, seed)?,
        ),
    };
    Ok(Forgery { message, word })
}

/// Picks the substituted message for round `round`; Bob's channel word is
/// left as it arrived.
pub fn substitute_type1(
    strategy: AttackStrategy,
    round: &RoundTranscript,
    history: &[RoundTranscript],
    _cfg: &ProtocolConfig,
    seed: RngSeed,
) -> Result<BitVector> {
    require_kind(strategy, AttackKind::SubstitutionType1)?;
    let m_j = &round.m_sent;
    match strategy.variant {
        AttackVariant::RandomTag => fresh_message_avoiding(m_j, seed),
        AttackVariant::ReplayCodeword => match history.last() {
            Some(prev) if prev.m_sent != *m_j => Ok(prev.m_sent.clone()),
            _ => fresh_message_avoiding(m_j, seed),
        },
        AttackVariant::BitflipMessage | AttackVariant::EveDecodeReuse => flip_some(m_j, seed),
    }
}

/// Replaces both the message and the channel word of round `round`.
pub fn substitute_type2(
    strategy: AttackStrategy,
    round: &RoundTranscript,
    cfg: &ProtocolConfig,
    seed: RngSeed,
) -> Result<Forgery> {
    require_kind(strategy, AttackKind::SubstitutionType2)?;
    let m_j = &round.m_sent;
    let (message, word) = match strategy.variant {
        AttackVariant::RandomTag => (fresh_message_avoiding(m_j, seed)?, uniform_word(cfg, seed)?),
        AttackVariant::ReplayCodeword => (flip_some(m_j, seed)?, round.z.clone()),
        AttackVariant::BitflipMessage => (
            flip_some(m_j, seed)?,
            encode_tag(&eve_tag_estimate(&round.z, cfg)?, cfg, seed)?,
        ),
        AttackVariant::EveDecodeReuse => (
            fresh_message_avoiding(m_j, seed)?,
            encode_tag(&eve_tag_estimate(&round.z, cfg)?, cfg, seed)?,
        ),
    };
    Ok(Forgery { message, word })
}

/// Whether Bob accepts a substitution. Delivering the original message is
/// not a substitution and is refused.
pub fn substitution_succeeds(
    m_o: &BitVector,
    word: &BitVector,
    m_j: &BitVector,
    cfg: &ProtocolConfig,
) -> Result<bool> {
    if m_o == m_j {
        return Err(Error::InvalidParameter(
            "substituted message equals the original".into(),
        ));
    }
    Ok(verify(m_o, word, cfg).is_accept())
}

/// Wilson score interval for `successes` out of `rounds`. With no rounds
/// the interval is `[0, 1]`.
pub fn wilson_interval(successes: u64, rounds: u64, z: f64) -> (f64, f64) {
    if rounds == 0 {
        return (0.0, 1.0);
    }
    let n = rounds as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = p + z2 / (2.0 * n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 {
        0.0
    } else {
        ((centre - half) / denom).max(0.0)
    };
    let hi = if successes == rounds {
        1.0
    } else {
        ((centre + half) / denom).min(1.0)
    };
    (lo, hi)
}

/// Two-sided p-value of the pooled two-proportion z-test. Returns 1 when
/// the pooled proportion is 0 or 1.
pub fn two_proportion_p_value(s1: u64, n1: u64, s2: u64, n2: u64) -> f64 {
    if n1 == 0 || n2 == 0 {
        return 1.0;
    }
    let (a, b) = (n1 as f64, n2 as f64);
    let pooled = (s1 + s2) as f64 / (a + b);
    let se = (pooled * (1.0 - pooled) * (1.0 / a + 1.0 / b)).sqrt();
    if se == 0.0 {
        return 1.0;
    }
    let z = (s1 as f64 / a - s2 as f64 / b).abs() / se;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    2.0 * (1.0 - normal.cdf(z))
}

/// One CSV row of attack results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub scenario: String,
    pub strategy: String,
    pub rounds: u64,
    pub successes: u64,
    #[serde(rename = "rate")]
    pub success_rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub epsilon_bound: f64,
}

impl AttackOutcome {
    pub fn new(
        scenario: &str,
        strategy: &str,
        rounds: u64,
        successes: u64,
        epsilon_bound: f64,
    ) -> Self {
        assert!(successes <= rounds);
        let (ci_lo, ci_hi) = wilson_interval(successes, rounds, Z_95);
        Self {
            scenario: scenario.to_string(),
            strategy: strategy.to_string(),
            rounds,
            successes,
            success_rate: if rounds == 0 {
                0.0
            } else {
                successes as f64 / rounds as f64
            },
            ci_lo,
            ci_hi,
            epsilon_bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Estimate {
    /// Honest operation has no success probability to estimate.
    NotAnAttack,
    Measured(AttackOutcome),
}

impl Estimate {
    pub fn outcome(&self) -> Option<&AttackOutcome> {
        match self {
            Estimate::Measured(o) => Some(o),
            Estimate::NotAnAttack => None,
        }
    }
}

fn attack_trial(
    strategy: AttackStrategy,
    template: &ProtocolConfig,
    seed: RngSeed,
) -> Result<bool> {
    let key = LfsrHashKey::random(template.u(), &mut seed.child(10).rng())?;
    let cfg = template.with_key(key)?;
    let m_prev = random_bits_from(cfg.t(), &mut seed.child(11).rng());
    let m_j = random_bits_from(cfg.t(), &mut seed.child(12).rng());
    let oscar = seed.child(13);
    let needs_prev_round = strategy.variant != AttackVariant::RandomTag;
    let history = if needs_prev_round {
        vec![honest_round(0, &m_prev, &cfg, seed.child(14))?]
    } else {
        Vec::new()
    };
    match strategy.kind {
        AttackKind::Impersonation => {
            let f = impersonate(strategy, &history, &cfg, oscar)?;
            Ok(verify(&f.message, &f.word, &cfg).is_accept())
        }
        AttackKind::SubstitutionType1 => {
            let round = honest_round(1, &m_j, &cfg, seed.child(15))?;
            let m_o = substitute_type1(strategy, &round, &history, &cfg, oscar)?;
            substitution_succeeds(&m_o, &round.y, &m_j, &cfg)
        }
        AttackKind::SubstitutionType2 => {
            let round = honest_round(1, &m_j, &cfg, seed.child(15))?;
            let f = substitute_type2(strategy, &round, &cfg, oscar)?;
            substitution_succeeds(&f.message, &f.word, &m_j, &cfg)
        }
    }
}

/// Monte-Carlo success rate of `strategy` against the code and lengths of
/// `template`. Every trial draws its own key, messages and channel noise
/// from `seed.child(trial)`, so results do not depend on thread count.
pub fn estimate_success(
    strategy: Option<AttackStrategy>,
    template: &ProtocolConfig,
    scenario: &str,
    rounds: u64,
    seed: RngSeed,
) -> Result<Estimate> {
    let Some(strategy) = strategy else {
        return Ok(Estimate::NotAnAttack);
    };
    let wins = (0..rounds)
        .into_par_iter()
        .map(|i| attack_trial(strategy, template, seed.child(i)).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(Estimate::Measured(AttackOutcome::new(
        scenario,
        &strategy.to_string(),
        rounds,
        wins,
        template.hash_params().epsilon(),
    )))
}

/// Writes outcomes as CSV with a header row.
pub fn write_outcomes_csv<W: std::io::Write>(out: W, rows: &[AttackOutcome]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Parse(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}

/// Collision statistics of the whole hash family by enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionProfile {
    /// `Pr[ψ_k(m) = ψ_k(m ⊕ δ)]` over uniform keys and uniform nonzero `δ`.
    pub mean: f64,
    /// The best single `δ` for an attacker who knows only the family.
    pub max: f64,
    pub best_delta: BitVector,
}

/// Every primitive polynomial of degree `u ≤ 16`.
pub fn primitive_polynomials(u: usize) -> Result<Vec<GenPoly>> {
    if u == 0 || u > 16 {
        return Err(Error::TooLarge(u));
    }
    let mut out = Vec::new();
    for taps in (1u128..(1u128 << u)).step_by(2) {
        let p = GenPoly::new(u, taps)?;
        if validate_poly(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Enumerates every key (polynomial and nonzero initial state; the offset
/// cancels in a collision) against every nonzero difference of length `t`.
/// Refuses work above 2^27 hash evaluations.
pub fn exhaustive_collision_profile(hp: &HashParams) -> Result<CollisionProfile> {
    let (t, u) = (hp.t(), hp.u());
    if t > 24 || u > 16 {
        return Err(Error::TooLarge(t.max(u)));
    }
    let polys = primitive_polynomials(u)?;
    let keys: Vec<LfsrHashKey> = polys
        .iter()
        .flat_map(|p| {
            (1u64..(1u64 << u)).map(move |init| {
                let init = BitVector::from_u64(init, u);
                LfsrHashKey::new(*p, init, BitVector::zeros(u))
            })
        })
        .collect::<Result<_>>()?;
    let deltas = (1u64 << t) - 1;
    if keys.len() as u64 * deltas > 1 << 27 {
        return Err(Error::TooLarge(keys.len() * deltas as usize));
    }
    let zero_tag = BitVector::zeros(u);
    let counts: Vec<u64> = (1..=deltas)
        .into_par_iter()
        .map(|d| {
            let delta = BitVector::from_u64(d, t);
            keys.iter()
                .filter(|k| hash(&delta, k, hp).expect("lengths agree") == zero_tag)
                .count() as u64
        })
        .collect();
    let total: u64 = counts.iter().sum();
    let (best, &best_count) = counts
        .iter()
        .enumerate()
        .max_by_key(|&(i, c)| (*c, std::cmp::Reverse(i)))
        .expect("t >= 1");
    let k = keys.len() as f64;
    Ok(CollisionProfile {
        mean: total as f64 / (k * deltas as f64),
        max: best_count as f64 / k,
        best_delta: BitVector::from_u64(best as u64 + 1, t),
    })
}
