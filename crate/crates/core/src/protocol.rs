//! Tag, encode, transmit, verify.
//!
//! Alice sends `m` in the clear and the tag `ψ_k(m)` as the first `u`
//! payload bits of a secure polar codeword; the remaining `|A| − u` payload
//! positions carry fresh random bits. Bob decodes the payload, takes the
//! first `u` bits as `s'` and accepts iff `ψ_k(m') = s'`. One key serves
//! every round of a session.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bits::{random_bits_from, BitVector, RngSeed};
use crate::channel::{transmit, WiretapChannel};
use crate::error::{Error, Result};
use crate::lfsr_hash::{hash, HashParams, LfsrHashKey};
use crate::polar::PolarParams;
use crate::secure_code::{PartitionParams, SecurePolarCode};

/// Everything Alice and Bob share: the code, the hash lengths and the key.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    code: Arc<SecurePolarCode>,
    hp: HashParams,
    key: LfsrHashKey,
}

impl ProtocolConfig {
    pub fn new(
        code: impl Into<Arc<SecurePolarCode>>,
        hp: HashParams,
        key: LfsrHashKey,
    ) -> Result<Self> {
        let code = code.into();
        if key.u() != hp.u() {
            return Err(Error::LengthMismatch {
                expected: hp.u(),
                actual: key.u(),
            });
        }
        if code.payload_len() < hp.u() {
            return Err(Error::InsufficientSecureCapacity {
                available: code.payload_len(),
                required: hp.u(),
            });
        }
        Ok(Self { code, hp, key })
    }

    pub fn code(&self) -> &SecurePolarCode {
        &self.code
    }

    pub fn hash_params(&self) -> &HashParams {
        &self.hp
    }

    pub fn key(&self) -> &LfsrHashKey {
        &self.key
    }

    pub fn channel(&self) -> &WiretapChannel {
        self.code.channel()
    }

    pub fn t(&self) -> usize {
        self.hp.t()
    }

    pub fn u(&self) -> usize {
        self.hp.u()
    }

    pub fn n(&self) -> usize {
        self.code.n()
    }

    /// Same code and lengths under another key. The code is shared.
    pub fn with_key(&self, key: LfsrHashKey) -> Result<Self> {
        Self::new(Arc::clone(&self.code), self.hp, key)
    }

    /// `ψ_k(m)`.
    pub fn tag(&self, m: &BitVector) -> Result<BitVector> {
        hash(m, &self.key, &self.hp)
    }
}

/// Scalar inputs for [`build_config`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigParams {
    pub p: f64,
    pub q: f64,
    pub r: u32,
    pub beta: f64,
    pub gamma: f64,
    pub t: usize,
    pub u: usize,
}

/// Builds the code and draws a uniform key from `seed`.
///
/// Fails with `InsufficientSecureCapacity` when `|A| < u`.
pub fn build_config(params: &ConfigParams, seed: RngSeed) -> Result<ProtocolConfig> {
    let wc = WiretapChannel::new(params.p, params.q)?;
    let pp = PolarParams::new(params.r)?;
    let pparams = PartitionParams::new(params.beta, params.gamma)?;
    let hp = HashParams::new(params.t, params.u)?;
    let code = SecurePolarCode::new(wc, pp, pparams);
    if code.payload_len() < hp.u() {
        return Err(Error::InsufficientSecureCapacity {
            available: code.payload_len(),
            required: hp.u(),
        });
    }
    let key = LfsrHashKey::random(hp.u(), &mut seed.rng())?;
    ProtocolConfig::new(code, hp, key)
}

/// Places `tag` in the first `u` payload positions and fills the rest of A
/// from `rng`.
pub fn assemble_payload<R: rand::RngCore + ?Sized>(
    tag: &BitVector,
    payload_len: usize,
    rng: &mut R,
) -> BitVector {
    let fill = payload_len.saturating_sub(tag.len());
    tag.concat(&random_bits_from(fill, rng))
}

/// What Alice puts on the two channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outgoing {
    pub message: BitVector,
    pub tag: BitVector,
    pub codeword: BitVector,
}

/// Alice's step: tag, pad, secure-encode.
pub fn authenticate_send(m: &BitVector, cfg: &ProtocolConfig, seed: RngSeed) -> Result<Outgoing> {
    let tag = cfg.tag(m)?;
    let payload = assemble_payload(&tag, cfg.code.payload_len(), &mut seed.child(0).rng());
    let codeword = cfg.code.encode(&payload, seed.child(1))?;
    Ok(Outgoing {
        message: m.clone(),
        tag,
        codeword,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Accept,
    Reject,
}

impl Decision {
    pub fn is_accept(self) -> bool {
        self == Decision::Accept
    }
}

/// Bob's tag estimate `s'`: the first `u` decoded payload bits, or `None`
/// (the ⊥ outcome) for a malformed channel word.
pub fn received_tag(y: &BitVector, cfg: &ProtocolConfig) -> Option<BitVector> {
    cfg.code.decode(y).ok().map(|a| a.slice(0, cfg.u()))
}

/// Bob's step. Any malformed input is a rejection.
pub fn verify(m_rx: &BitVector, y: &BitVector, cfg: &ProtocolConfig) -> Decision {
    let Some(s) = received_tag(y, cfg) else {
        return Decision::Reject;
    };
    match cfg.tag(m_rx) {
        Ok(expected) if expected == s => Decision::Accept,
        _ => Decision::Reject,
    }
}

/// One honest round as seen by every party.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTranscript {
    pub round: usize,
    pub m_sent: BitVector,
    pub m_received: BitVector,
    pub codeword: BitVector,
    pub y: BitVector,
    pub z: BitVector,
    pub decision: Decision,
}

/// Hex-encoded form of a [`RoundTranscript`], one JSON object per line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub round: usize,
    pub t: usize,
    pub n: usize,
    pub m_sent: String,
    pub m_received: String,
    pub codeword: String,
    pub y: String,
    pub z: String,
    pub decision: Decision,
}

impl RoundTranscript {
    pub fn to_record(&self) -> TranscriptRecord {
        TranscriptRecord {
            round: self.round,
            t: self.m_sent.len(),
            n: self.codeword.len(),
            m_sent: self.m_sent.to_hex(),
            m_received: self.m_received.to_hex(),
            codeword: self.codeword.to_hex(),
            y: self.y.to_hex(),
            z: self.z.to_hex(),
            decision: self.decision,
        }
    }

    pub fn from_record(rec: &TranscriptRecord) -> Result<Self> {
        Ok(Self {
            round: rec.round,
            m_sent: BitVector::from_hex(&rec.m_sent, rec.t)?,
            m_received: BitVector::from_hex(&rec.m_received, rec.t)?,
            codeword: BitVector::from_hex(&rec.codeword, rec.n)?,
            y: BitVector::from_hex(&rec.y, rec.n)?,
            z: BitVector::from_hex(&rec.z, rec.n)?,
            decision: rec.decision,
        })
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("transcript serializes")
    }
}

/// Runs round `round` honestly: the message arrives verbatim, the codeword
/// goes through BSC(p) to Bob and BSC(q) to Eve.
pub fn honest_round(
    round: usize,
    m: &BitVector,
    cfg: &ProtocolConfig,
    seed: RngSeed,
) -> Result<RoundTranscript> {
    let out = authenticate_send(m, cfg, seed.child(0))?;
    let wc = cfg.channel();
    let y = transmit(&out.codeword, wc.main, seed.child(1));
    let z = transmit(&out.codeword, wc.eve, seed.child(2));
    let decision = verify(m, &y, cfg);
    Ok(RoundTranscript {
        round,
        m_sent: out.message,
        m_received: m.clone(),
        codeword: out.codeword,
        y,
        z,
        decision,
    })
}

/// Authenticates `msgs` in order under one key. Round `j` uses the
/// sub-stream `seed.child(j)`.
pub fn run_session(
    msgs: &[BitVector],
    cfg: &ProtocolConfig,
    seed: RngSeed,
) -> Result<Vec<RoundTranscript>> {
    msgs.iter()
        .enumerate()
        .map(|(j, m)| {
            if m.len() != cfg.t() {
                return Err(Error::LengthMismatch {
                    expected: cfg.t(),
                    actual: m.len(),
                });
            }
            honest_round(j, m, cfg, seed.child(j as u64))
        })
        .collect()
}

/// Message bits authenticated per channel use, `t / n`.
pub fn authentication_rate(cfg: &ProtocolConfig) -> f64 {
    cfg.t() as f64 / cfg.n() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::random_bits;

    fn params(r: u32, p: f64, q: f64, t: usize, u: usize) -> ConfigParams {
        ConfigParams {
            p,
            q,
            r,
            beta: 0.1,
            gamma: 0.1,
            t,
            u,
        }
    }

    #[test]
    fn build_config_capacity_checks() {
        let err = build_config(&params(9, 0.1, 0.2, 4096, 101), RngSeed::new(1, 0)).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientSecureCapacity {
                available: 0,
                required: 101
            }
        ));
        let cfg = build_config(&params(13, 0.1, 0.3, 4096, 101), RngSeed::new(1, 0)).unwrap();
        assert!(cfg.code().payload_len() >= 101);
        assert_eq!(cfg.key().u(), 101);
        assert!(build_config(&params(10, 0.1, 0.3, 64, 0), RngSeed::new(1, 0)).is_err());
    }

    #[test]
    fn send_is_deterministic_and_checks_length() {
        let cfg = build_config(&params(10, 0.1, 0.3, 64, 16), RngSeed::new(2, 0)).unwrap();
        let m = random_bits(64, RngSeed::new(2, 1));
        let seed = RngSeed::new(2, 2);
        assert_eq!(
            authenticate_send(&m, &cfg, seed).unwrap(),
            authenticate_send(&m, &cfg, seed).unwrap()
        );
        assert!(matches!(
            authenticate_send(&BitVector::zeros(63), &cfg, seed),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn tag_occupies_first_payload_bits() {
        let cfg = build_config(&params(10, 0.1, 0.3, 64, 16), RngSeed::new(3, 0)).unwrap();
        let m = random_bits(64, RngSeed::new(3, 1));
        let out = authenticate_send(&m, &cfg, RngSeed::new(3, 2)).unwrap();
        let payload = cfg.code().decode(&out.codeword).unwrap();
        assert_eq!(payload.slice(0, 16), out.tag);
        assert_eq!(out.tag, cfg.tag(&m).unwrap());
    }

    #[test]
    fn one_bit_changes_change_the_tag() {
        let hp = HashParams::new(64, 16).unwrap();
        let mut rng = RngSeed::new(4, 0).rng();
        let mut differ = 0;
        for trial in 0..1000u64 {
            let key = LfsrHashKey::random(16, &mut rng).unwrap();
            let m = random_bits(64, RngSeed::new(4, trial));
            let mut m2 = m.clone();
            m2.flip((trial % 64) as usize);
            if hash(&m, &key, &hp).unwrap() != hash(&m2, &key, &hp).unwrap() {
                differ += 1;
            }
        }
        let eps = hp.epsilon();
        assert!(differ as f64 / 1000.0 >= 1.0 - eps - 0.01);
    }

    #[test]
    fn verify_rejects_modified_messages_and_bad_words() {
        let base = build_config(&params(10, 0.1, 0.3, 64, 16), RngSeed::new(5, 0)).unwrap();
        let mut rng = RngSeed::new(5, 1).rng();
        let mut rejects = 0;
        for trial in 0..1000u64 {
            let cfg = base
                .with_key(LfsrHashKey::random(16, &mut rng).unwrap())
                .unwrap();
            let round = honest_round(
                0,
                &random_bits(64, RngSeed::new(5, trial)),
                &cfg,
                RngSeed::new(6, trial),
            )
            .unwrap();
            assert_eq!(round.decision, Decision::Accept);
            let mut forged = round.m_sent.clone();
            forged.flip((trial * 7 % 64) as usize);
            if verify(&forged, &round.y, &cfg) == Decision::Reject {
                rejects += 1;
            }
            if trial == 0 {
                assert_eq!(
                    verify(&round.m_sent, &BitVector::zeros(1023), &cfg),
                    Decision::Reject
                );
                assert_eq!(
                    verify(&BitVector::zeros(63), &round.y, &cfg),
                    Decision::Reject
                );
            }
        }
        assert!(rejects as f64 / 1000.0 >= 1.0 - cfg_eps(&base) - 0.01);
    }

    fn cfg_eps(cfg: &ProtocolConfig) -> f64 {
        cfg.hash_params().epsilon()
    }

    #[test]
    fn sessions_are_reproducible() {
        let cfg = build_config(&params(10, 0.1, 0.3, 256, 24), RngSeed::new(7, 0)).unwrap();
        let msgs: Vec<BitVector> = (0..10)
            .map(|j| random_bits(256, RngSeed::new(8, j)))
            .collect();
        let a = run_session(&msgs, &cfg, RngSeed::new(9, 0)).unwrap();
        let b = run_session(&msgs, &cfg, RngSeed::new(9, 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        assert!(a.iter().all(|r| r.decision.is_accept()));
        assert!(run_session(&[], &cfg, RngSeed::new(9, 0))
            .unwrap()
            .is_empty());
        assert!(run_session(&[BitVector::zeros(5)], &cfg, RngSeed::new(9, 0)).is_err());
    }

    #[test]
    fn transcript_json_round_trip() {
        let cfg = build_config(&params(8, 0.05, 0.4, 40, 8), RngSeed::new(10, 0)).unwrap();
        let msgs = vec![random_bits(40, RngSeed::new(10, 1))];
        let round = &run_session(&msgs, &cfg, RngSeed::new(10, 2)).unwrap()[0];
        let line = round.to_json_line();
        assert!(!line.contains('\n'));
        let rec: TranscriptRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(&RoundTranscript::from_record(&rec).unwrap(), round);
        assert_eq!(rec.codeword.len(), 64);
    }

    #[test]
    fn accepted_rounds_carry_the_tag() {
        let cfg = build_config(&params(10, 0.1, 0.3, 128, 16), RngSeed::new(11, 0)).unwrap();
        let msgs: Vec<BitVector> = (0..20)
            .map(|j| random_bits(128, RngSeed::new(11, j)))
            .collect();
        for r in run_session(&msgs, &cfg, RngSeed::new(12, 0)).unwrap() {
            if r.decision.is_accept() {
                assert_eq!(
                    received_tag(&r.y, &cfg).unwrap(),
                    cfg.tag(&r.m_received).unwrap()
                );
            }
        }
    }

    #[test]
    fn authentication_rates() {
        let cfg = build_config(&params(10, 0.1, 0.3, 1024, 16), RngSeed::new(13, 0)).unwrap();
        assert_eq!(authentication_rate(&cfg), 1.0);
        let cfg = build_config(&params(13, 0.2, 0.3, 1 << 20, 64), RngSeed::new(13, 0)).unwrap();
        assert_eq!(authentication_rate(&cfg), 128.0);
    }
}
