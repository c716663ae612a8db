//! Strong-secrecy polar coding over the binary symmetric wiretap channel.
//!
//! Bit-channels are split by two tests: good or bad for Bob (Bhattacharyya
//! value below `2^{-n^β}/n`) and poor or not for Eve (surrogate capacity at
//! most `σ_n`). The four intersections are
//!
//! | set | Eve       | Bob  | carries          |
//! |-----|-----------|------|------------------|
//! | A   | poor      | good | payload          |
//! | B   | poor      | bad  | frozen zeros     |
//! | X   | not poor  | bad  | uniform random   |
//! | Y   | not poor  | good | uniform random   |
//!
//! The decoder freezes only B. X positions are decoded as free bits, which
//! costs reliability in proportion to `|X|`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::{random_bits_from, BitVector, RngSeed};
use crate::channel::{BscParam, WiretapChannel};
use crate::error::{Error, Result};
use crate::polar::{
    channel_llrs, polar_transform, quality_profile, sc_decode_llrs, PolarParams, QualityProfile,
};

/// Construction constants `β` and `γ`, with an optional explicit `σ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionParams {
    beta: f64,
    gamma: f64,
    sigma_override: Option<f64>,
}

impl PartitionParams {
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "beta={beta} outside (0, 0.5)"
            )));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma={gamma} must be positive"
            )));
        }
        Ok(Self {
            beta,
            gamma,
            sigma_override: None,
        })
    }

    /// Replaces the derived `σ_n` by a fixed threshold in `(0, 1)`.
    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma={sigma} outside (0, 1)"
            )));
        }
        self.sigma_override = Some(sigma);
        Ok(self)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sigma_override(&self) -> Option<f64> {
        self.sigma_override
    }

    /// `σ_n` used for block length `n`.
    pub fn sigma(&self, n: usize) -> f64 {
        self.sigma_override
            .unwrap_or_else(|| sigma_n(n, self.gamma))
    }
}

/// Poor-channel capacity threshold `2^{-n^γ}`.
pub fn sigma_n(n: usize, gamma: f64) -> f64 {
    2f64.powf(-(n as f64).powf(gamma))
}

/// Good-channel threshold `2^{-n^β} / n`.
pub fn good_threshold(n: usize, beta: f64) -> f64 {
    2f64.powf(-(n as f64).powf(beta)) / n as f64
}

/// `{ i : z[i] < 2^{-n^β}/n }`.
pub fn good_set(profile: &QualityProfile, beta: f64) -> Vec<usize> {
    let th = good_threshold(profile.n(), beta);
    (0..profile.n()).filter(|&i| profile.z()[i] < th).collect()
}

/// `{ i : 1 − z[i] ≤ σ }`.
pub fn poor_set(profile: &QualityProfile, sigma: f64) -> Result<Vec<usize>> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Domain(format!("sigma={sigma} outside (0, 1)")));
    }
    Ok((0..profile.n())
        .filter(|&i| profile.capacity(i) <= sigma)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndexSet {
    A,
    B,
    X,
    Y,
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IndexSet::A => "A",
            IndexSet::B => "B",
            IndexSet::X => "X",
            IndexSet::Y => "Y",
        };
        f.write_str(s)
    }
}

/// Disjoint cover of `[0, n)` by A, B, X and Y, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexPartition {
    pub n: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

impl IndexPartition {
    /// Builds the partition from per-index membership tests.
    pub fn from_membership(n: usize, poor_for_eve: &[bool], good_for_bob: &[bool]) -> Self {
        let mut p = Self {
            n,
            a: vec![],
            b: vec![],
            x: vec![],
            y: vec![],
        };
        for i in 0..n {
            match (poor_for_eve[i], good_for_bob[i]) {
                (true, true) => p.a.push(i),
                (true, false) => p.b.push(i),
                (false, false) => p.x.push(i),
                (false, true) => p.y.push(i),
            }
        }
        p
    }

    /// Set label of every index.
    pub fn labels(&self) -> Vec<IndexSet> {
        let mut out = vec![IndexSet::B; self.n];
        for (set, idx) in [
            (IndexSet::A, &self.a),
            (IndexSet::B, &self.b),
            (IndexSet::X, &self.x),
            (IndexSet::Y, &self.y),
        ] {
            for &i in idx {
                out[i] = set;
            }
        }
        out
    }

    /// Checks that the four sets are pairwise disjoint and cover `[0, n)`.
    pub fn is_disjoint_cover(&self) -> bool {
        let mut seen = vec![0u8; self.n];
        for idx in [&self.a, &self.b, &self.x, &self.y] {
            for &i in idx {
                if i >= self.n {
                    return false;
                }
                seen[i] += 1;
            }
        }
        seen.iter().all(|&c| c == 1)
    }

    pub fn sizes(&self) -> [usize; 4] {
        [self.a.len(), self.b.len(), self.x.len(), self.y.len()]
    }

    /// Positions carrying uniform randomness, `X ∪ Y` in ascending order.
    pub fn random_positions(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.x.iter().chain(&self.y).copied().collect();
        v.sort_unstable();
        v
    }
}

/// Quality profiles of both channels and the resulting partition.
pub fn partition(wc: &WiretapChannel, pp: PolarParams, params: &PartitionParams) -> IndexPartition {
    let main = quality_profile(wc.main, pp);
    let eve = quality_profile(wc.eve, pp);
    partition_from_profiles(&main, &eve, params)
}

fn partition_from_profiles(
    main: &QualityProfile,
    eve: &QualityProfile,
    params: &PartitionParams,
) -> IndexPartition {
    let n = main.n();
    let sigma = params.sigma(n);
    let threshold = good_threshold(n, params.beta);
    let poor: Vec<bool> = (0..n).map(|i| eve.capacity(i) <= sigma).collect();
    let good: Vec<bool> = (0..n).map(|i| main.z()[i] < threshold).collect();
    IndexPartition::from_membership(n, &poor, &good)
}

/// A wiretap polar code: parameters, both quality profiles and the A/B/X/Y
/// split derived from them. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SecurePolarCode {
    pp: PolarParams,
    wc: WiretapChannel,
    params: PartitionParams,
    main_profile: QualityProfile,
    eve_profile: QualityProfile,
    partition: IndexPartition,
    frozen_mask: Vec<Option<bool>>,
}

impl SecurePolarCode {
    pub fn new(wc: WiretapChannel, pp: PolarParams, params: PartitionParams) -> Self {
        let main_profile = quality_profile(wc.main, pp);
        let eve_profile = quality_profile(wc.eve, pp);
        let partition = partition_from_profiles(&main_profile, &eve_profile, &params);
        Self::assemble(wc, pp, params, main_profile, eve_profile, partition)
    }

    /// Code with an explicitly supplied partition (for toy experiments).
    pub fn with_partition(
        wc: WiretapChannel,
        pp: PolarParams,
        params: PartitionParams,
        partition: IndexPartition,
    ) -> Result<Self> {
        if partition.n != pp.n() || !partition.is_disjoint_cover() {
            return Err(Error::InvalidParameter(
                "partition is not a disjoint cover of the block".into(),
            ));
        }
        let main_profile = quality_profile(wc.main, pp);
        let eve_profile = quality_profile(wc.eve, pp);
        Ok(Self::assemble(
            wc,
            pp,
            params,
            main_profile,
            eve_profile,
            partition,
        ))
    }

    fn assemble(
        wc: WiretapChannel,
        pp: PolarParams,
        params: PartitionParams,
        main_profile: QualityProfile,
        eve_profile: QualityProfile,
        partition: IndexPartition,
    ) -> Self {
        let mut frozen_mask = vec![None; pp.n()];
        for &i in &partition.b {
            frozen_mask[i] = Some(false);
        }
        Self {
            pp,
            wc,
            params,
            main_profile,
            eve_profile,
            partition,
            frozen_mask,
        }
    }

    pub fn n(&self) -> usize {
        self.pp.n()
    }

    pub fn polar_params(&self) -> PolarParams {
        self.pp
    }

    pub fn channel(&self) -> &WiretapChannel {
        &self.wc
    }

    pub fn params(&self) -> &PartitionParams {
        &self.params
    }

    pub fn partition(&self) -> &IndexPartition {
        &self.partition
    }

    pub fn main_profile(&self) -> &QualityProfile {
        &self.main_profile
    }

    pub fn eve_profile(&self) -> &QualityProfile {
        &self.eve_profile
    }

    /// Number of payload bits, `|A|`.
    pub fn payload_len(&self) -> usize {
        self.partition.a.len()
    }

    /// True when A is empty and nothing secret can be sent.
    pub fn is_empty(&self) -> bool {
        self.partition.a.is_empty()
    }

    /// Encodes `info` (one bit per A position, in ascending index order).
    ///
    /// B is zero and X ∪ Y take uniform bits from `seed`.
    pub fn encode(&self, info: &BitVector, seed: RngSeed) -> Result<BitVector> {
        if info.len() != self.payload_len() {
            return Err(Error::LengthMismatch {
                expected: self.payload_len(),
                actual: info.len(),
            });
        }
        let mut v = BitVector::zeros(self.n());
        for (k, &i) in self.partition.a.iter().enumerate() {
            v.set(i, info.get(k));
        }
        let random_pos = self.partition.random_positions();
        let e = random_bits_from(random_pos.len(), &mut seed.rng());
        for (k, &i) in random_pos.iter().enumerate() {
            v.set(i, e.get(k));
        }
        polar_transform(&v, self.pp)
    }

    /// Bob's decoder: SC with B frozen to zero, returning the A bits.
    pub fn decode(&self, y: &BitVector) -> Result<BitVector> {
        self.decode_over(y, self.wc.main)
    }

    /// SC decoding of the A bits under an arbitrary channel law. Eve runs
    /// this with her own crossover since the index sets are public.
    pub fn decode_over(&self, y: &BitVector, ch: BscParam) -> Result<BitVector> {
        if y.len() != self.n() {
            return Err(Error::MalformedInput {
                expected: self.n(),
                actual: y.len(),
            });
        }
        let v = sc_decode_llrs(&channel_llrs(y, ch), &self.frozen_mask);
        Ok(BitVector::from_bools(
            self.partition.a.iter().map(|&i| v[i] == 1),
        ))
    }

    /// `|A| / n`.
    pub fn secrecy_rate(&self) -> f64 {
        self.payload_len() as f64 / self.n() as f64
    }

    /// Rows `(index, z_main, z_eve, set)`.
    pub fn partition_rows(&self) -> Vec<PartitionRow> {
        let labels = self.partition.labels();
        (0..self.n())
            .map(|i| PartitionRow {
                index: i,
                z_main: self.main_profile.z()[i],
                z_eve: self.eve_profile.z()[i],
                set: labels[i],
            })
            .collect()
    }
}

/// One line of the partition export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionRow {
    pub index: usize,
    pub z_main: f64,
    pub z_eve: f64,
    pub set: IndexSet,
}

pub fn secure_encode(info: &BitVector, code: &SecurePolarCode, seed: RngSeed) -> Result<BitVector> {
    code.encode(info, seed)
}

/// Bob's decode; a wrong-length word is the only failure (`MalformedInput`).
pub fn secure_decode(y: &BitVector, code: &SecurePolarCode) -> Result<BitVector> {
    code.decode(y)
}

pub fn secrecy_rate(code: &SecurePolarCode) -> f64 {
    code.secrecy_rate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::random_bits;
    use crate::channel::{secrecy_capacity, transmit};

    fn profile(values: Vec<f64>) -> QualityProfile {
        QualityProfile::from_values(values).unwrap()
    }

    fn code(n: usize, p: f64, q: f64, beta: f64, gamma: f64) -> SecurePolarCode {
        SecurePolarCode::new(
            WiretapChannel::new(p, q).unwrap(),
            PolarParams::from_len(n).unwrap(),
            PartitionParams::new(beta, gamma).unwrap(),
        )
    }

    #[test]
    fn params_validation() {
        assert!(PartitionParams::new(0.0, 0.1).is_err());
        assert!(PartitionParams::new(0.5, 0.1).is_err());
        assert!(PartitionParams::new(0.1, 0.0).is_err());
        let p = PartitionParams::new(0.1, 0.1).unwrap();
        assert!(p.with_sigma(1.0).is_err());
        assert_eq!(p.with_sigma(0.3).unwrap().sigma(1024), 0.3);
    }

    #[test]
    fn good_set_extremes() {
        assert_eq!(
            good_set(&profile(vec![0.0; 8]), 0.1),
            (0..8).collect::<Vec<_>>()
        );
        assert!(good_set(&profile(vec![1.0; 8]), 0.1).is_empty());
    }

    #[test]
    fn good_set_count_matches_scalar_threshold() {
        let n = 1024usize;
        let prof = quality_profile(
            BscParam::new(0.1).unwrap(),
            PolarParams::from_len(n).unwrap(),
        );
        let threshold = 2f64.powf(-1024f64.powf(0.1)) / 1024.0;
        let count = prof.z().iter().filter(|&&z| z < threshold).count();
        assert_eq!(good_set(&prof, 0.1).len(), count);
        assert!(count > 0 && count < n);
    }

    #[test]
    fn poor_set_semantics() {
        let prof = profile(vec![0.0, 0.2, 0.6, 0.95]);
        let sigma = 0.999;
        assert_eq!(poor_set(&prof, sigma).unwrap(), vec![1, 2, 3]);
        assert!(poor_set(&profile(vec![0.0; 4]), 0.5).unwrap().is_empty());
        assert!(poor_set(&prof, 0.0).is_err());
        assert!(poor_set(&prof, 1.0).is_err());
    }

    #[test]
    fn poor_set_count_matches_scalar_threshold() {
        let n = 8192usize;
        let prof = quality_profile(
            BscParam::new(0.3).unwrap(),
            PolarParams::from_len(n).unwrap(),
        );
        let sigma = 2f64.powf(-8192f64.powf(0.1));
        let count = prof.z().iter().filter(|&&z| 1.0 - z <= sigma).count();
        assert_eq!(poor_set(&prof, sigma).unwrap().len(), count);
        assert!((sigma - sigma_n(n, 0.1)).abs() < 1e-15);
    }

    #[test]
    fn partition_is_a_disjoint_cover() {
        for n in [64, 512, 4096] {
            for (p, q) in [(0.1, 0.2), (0.1, 0.4), (0.2, 0.2), (0.3, 0.1)] {
                let c = code(n, p, q, 0.1, 0.1);
                assert!(c.partition().is_disjoint_cover());
                assert_eq!(c.partition().sizes().iter().sum::<usize>(), n);
            }
        }
    }

    #[test]
    fn partition_is_idempotent() {
        let c = code(2048, 0.1, 0.3, 0.1, 0.1);
        let again = partition(c.channel(), c.polar_params(), c.params());
        assert_eq!(&again, c.partition());
    }

    #[test]
    fn identical_channels_leave_a_empty() {
        let params = PartitionParams::new(0.1, 0.1)
            .unwrap()
            .with_sigma(0.01)
            .unwrap();
        let c = SecurePolarCode::new(
            WiretapChannel::new(0.1, 0.1).unwrap(),
            PolarParams::from_len(1024).unwrap(),
            params,
        );
        assert!(c.is_empty());
    }

    #[test]
    fn reported_partition_sizes() {
        assert_eq!(code(512, 0.1, 0.2, 0.1, 0.1).payload_len(), 0);
        assert!(code(8192, 0.1, 0.3, 0.1, 0.1).payload_len() >= 101);
    }

    #[test]
    fn empty_payload_still_encodes() {
        let c = code(512, 0.1, 0.2, 0.1, 0.1);
        assert!(c.is_empty());
        let x = c.encode(&BitVector::zeros(0), RngSeed::new(1, 1)).unwrap();
        assert_eq!(x.len(), 512);
        assert_eq!(c.decode(&x).unwrap().len(), 0);
        assert_eq!(c.secrecy_rate(), 0.0);
    }

    #[test]
    fn encode_is_deterministic_and_checks_length() {
        let c = code(1024, 0.1, 0.3, 0.1, 0.1);
        let info = random_bits(c.payload_len(), RngSeed::new(4, 0));
        let seed = RngSeed::new(4, 1);
        assert_eq!(
            c.encode(&info, seed).unwrap(),
            c.encode(&info, seed).unwrap()
        );
        assert!(matches!(
            c.encode(&BitVector::zeros(c.payload_len() + 1), seed),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn malformed_word_is_rejected() {
        let c = code(256, 0.1, 0.3, 0.1, 0.1);
        assert_eq!(
            secure_decode(&BitVector::zeros(255), &c),
            Err(Error::MalformedInput {
                expected: 256,
                actual: 255
            })
        );
    }

    #[test]
    fn noiseless_round_trip() {
        for n in [256usize, 1024, 8192] {
            let c = SecurePolarCode::new(
                WiretapChannel::new(0.0, 0.3).unwrap(),
                PolarParams::from_len(n).unwrap(),
                PartitionParams::new(0.1, 0.1).unwrap(),
            );
            let noisy = code(n, 0.1, 0.3, 0.1, 0.1);
            for trial in 0..100u64 {
                for cc in [&c, &noisy] {
                    let info = random_bits(cc.payload_len(), RngSeed::new(n as u64, trial));
                    let x = secure_encode(&info, cc, RngSeed::new(n as u64, 1000 + trial)).unwrap();
                    assert_eq!(
                        cc.decode_over(&x, BscParam::new(0.0).unwrap()).unwrap(),
                        info
                    );
                }
            }
        }
    }

    #[test]
    fn codeword_bits_are_unbiased_across_seeds() {
        let c = code(1024, 0.1, 0.3, 0.1, 0.1);
        let info = random_bits(c.payload_len(), RngSeed::new(8, 8));
        let encodings = 1000;
        let mut ones = vec![0usize; c.n()];
        for s in 0..encodings {
            let x = c.encode(&info, RngSeed::new(9, s)).unwrap();
            for (i, count) in ones.iter_mut().enumerate() {
                *count += x.get(i) as usize;
            }
        }
        let worst = ones
            .iter()
            .map(|&k| (k as f64 / encodings as f64 - 0.5).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 0.05, "max per-position bias {worst}");
    }

    #[test]
    fn secrecy_rate_below_capacity_and_growing_in_n() {
        let mut prev = 0.0;
        for r in 9..=13 {
            let c = code(1 << r, 0.1, 0.3, 0.1, 0.1);
            let rate = secrecy_rate(&c);
            assert!(rate >= prev);
            assert!(rate <= secrecy_capacity(c.channel()).unwrap());
            prev = rate;
        }
    }

    #[test]
    fn a_grows_with_worse_eavesdropper() {
        let sizes: Vec<usize> = [0.2, 0.3, 0.4]
            .iter()
            .map(|&q| code(8192, 0.1, q, 0.1, 0.1).payload_len())
            .collect();
        assert!(sizes.windows(2).all(|w| w[0] <= w[1]), "{sizes:?}");
    }

    #[test]
    fn bob_decodes_scenario_b_through_noise() {
        let c = code(8192, 0.1, 0.3, 0.1, 0.1);
        let mut errors = 0;
        for trial in 0..20u64 {
            let info = random_bits(c.payload_len(), RngSeed::new(21, trial));
            let x = c.encode(&info, RngSeed::new(22, trial)).unwrap();
            let y = transmit(&x, c.channel().main, RngSeed::new(23, trial));
            errors += c.decode(&y).unwrap().distance(&info).unwrap();
        }
        assert_eq!(errors, 0);
    }

    #[test]
    fn eve_is_confused_in_scenario_b() {
        let c = code(8192, 0.1, 0.3, 0.1, 0.1);
        let mut errors = 0;
        let trials = 20u64;
        for trial in 0..trials {
            let info = random_bits(c.payload_len(), RngSeed::new(31, trial));
            let x = c.encode(&info, RngSeed::new(32, trial)).unwrap();
            let z = transmit(&x, c.channel().eve, RngSeed::new(33, trial));
            errors += c
                .decode_over(&z, c.channel().eve)
                .unwrap()
                .distance(&info)
                .unwrap();
        }
        let rate = errors as f64 / (trials as usize * c.payload_len()) as f64;
        println!("eve bit error on A: {rate}");
        assert!((0.45..=0.55).contains(&rate), "eve error {rate}");
    }
}
