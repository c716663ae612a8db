//! Batch experiments over the scenario table and parameter sweeps.
//!
//! Every experiment returns a [`Table`] whose provenance records the
//! parameters and seed. Per-trial randomness comes from
//! `seed.child(trial)`, so bodies are reproducible regardless of thread
//! count. Timing columns are wall-clock medians and are the only
//! non-reproducible fields.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::bits::{random_bits, BitVector, RngSeed};
use crate::channel::{secrecy_capacity, transmit, WiretapChannel};
use crate::error::{Error, Result};
use crate::lfsr_hash::{hash, HashParams, LfsrHashKey};
use crate::polar::PolarParams;
use crate::protocol::{authentication_rate, run_session, ProtocolConfig};
use crate::secure_code::{PartitionParams, SecurePolarCode};

/// Code length of the scenario table.
pub const SCENARIO_N: usize = 8192;
/// β and γ used unless a sweep says otherwise.
pub const DEFAULT_BETA_GAMMA: f64 = 0.1;

/// One row of the scenario table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub label: char,
    pub p: f64,
    pub q: f64,
    pub t: usize,
    pub u: usize,
}

impl Scenario {
    pub const TABLE: [Scenario; 6] = [
        Scenario {
            label: 'A',
            p: 0.1,
            q: 0.2,
            t: 1 << 25,
            u: 101,
        },
        Scenario {
            label: 'B',
            p: 0.1,
            q: 0.3,
            t: 1 << 25,
            u: 101,
        },
        Scenario {
            label: 'C',
            p: 0.1,
            q: 0.4,
            t: 1 << 25,
            u: 101,
        },
        Scenario {
            label: 'D',
            p: 0.2,
            q: 0.3,
            t: 1 << 20,
            u: 64,
        },
        Scenario {
            label: 'E',
            p: 0.2,
            q: 0.4,
            t: 1 << 20,
            u: 64,
        },
        Scenario {
            label: 'F',
            p: 0.3,
            q: 0.4,
            t: 1 << 20,
            u: 64,
        },
    ];

    pub fn get(label: char) -> Result<Scenario> {
        let l = label.to_ascii_uppercase();
        Self::TABLE
            .iter()
            .copied()
            .find(|s| s.label == l)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scenario {label}")))
    }

    pub fn channel(&self) -> WiretapChannel {
        WiretapChannel::new(self.p, self.q).expect("table crossovers are valid")
    }

    /// Key length in bits.
    pub fn key_bits(&self) -> usize {
        3 * self.u
    }

    /// Message length after applying `scale`; never below `u + 1`.
    pub fn scaled_t(&self, scale: f64) -> Result<usize> {
        check_scale(scale)?;
        Ok(((self.t as f64 * scale).round() as usize).max(self.u + 1))
    }

    pub fn code(&self, n: usize) -> Result<SecurePolarCode> {
        let pp = PolarParams::from_len(n)?;
        let params = PartitionParams::new(DEFAULT_BETA_GAMMA, DEFAULT_BETA_GAMMA)?;
        Ok(SecurePolarCode::new(self.channel(), pp, params))
    }

    /// Protocol configuration at code length `n` with `t` scaled; the key is
    /// drawn from `seed`.
    pub fn config(&self, n: usize, scale: f64, seed: RngSeed) -> Result<ProtocolConfig> {
        let hp = HashParams::new(self.scaled_t(scale)?, self.u)?;
        let key = LfsrHashKey::random(self.u, &mut seed.rng())?;
        ProtocolConfig::new(self.code(n)?, hp, key)
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "scale must be in (0, 1], got {scale}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVar {
    N,
    Beta,
    Gamma,
    Q,
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepVar::N => "n",
            SweepVar::Beta => "beta",
            SweepVar::Gamma => "gamma",
            SweepVar::Q => "q",
        })
    }
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(SweepVar::N),
            "beta" => Ok(SweepVar::Beta),
            "gamma" => Ok(SweepVar::Gamma),
            "q" => Ok(SweepVar::Q),
            _ => Err(Error::Parse(format!("unknown sweep variable `{s}`"))),
        }
    }
}

/// Parameters held fixed while one of them sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedParams {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for FixedParams {
    fn default() -> Self {
        Self {
            n: SCENARIO_N,
            p: 0.1,
            q: 0.3,
            beta: DEFAULT_BETA_GAMMA,
            gamma: DEFAULT_BETA_GAMMA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub grid: Vec<f64>,
    pub fixed: FixedParams,
}

impl SweepSpec {
    pub fn new(variable: SweepVar, grid: Vec<f64>, fixed: FixedParams) -> Result<Self> {
        let spec = Self {
            variable,
            grid,
            fixed,
        };
        spec.points()?;
        Ok(spec)
    }

    /// The fully specified parameter set at every grid value, validated.
    pub fn points(&self) -> Result<Vec<FixedParams>> {
        if self.grid.is_empty() {
            return Err(Error::InvalidParameter("sweep grid is empty".into()));
        }
        self.grid
            .iter()
            .map(|&v| {
                let mut f = self.fixed;
                match self.variable {
                    SweepVar::N => {
                        if v.fract() != 0.0 || v < 2.0 {
                            return Err(Error::InvalidParameter(format!("bad code length {v}")));
                        }
                        f.n = v as usize;
                    }
                    SweepVar::Beta => f.beta = v,
                    SweepVar::Gamma => f.gamma = v,
                    SweepVar::Q => f.q = v,
                }
                PolarParams::from_len(f.n)?;
                WiretapChannel::new(f.p, f.q)?;
                PartitionParams::new(f.beta, f.gamma)?;
                Ok(f)
            })
            .collect()
    }
}

impl FixedParams {
    pub fn code(&self) -> Result<SecurePolarCode> {
        Ok(SecurePolarCode::new(
            WiretapChannel::new(self.p, self.q)?,
            PolarParams::from_len(self.n)?,
            PartitionParams::new(self.beta, self.gamma)?,
        ))
    }
}

/// Experiment output: a provenance record plus named columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub provenance: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    /// Columns holding wall-clock measurements.
    #[serde(skip)]
    pub timing_columns: Vec<String>,
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Table {
    fn new(name: &str, params: Value, seed: Option<RngSeed>, columns: &[&str]) -> Self {
        Self {
            provenance: json!({
                "experiment": name,
                "crate_version": env!("CARGO_PKG_VERSION"),
                "seed": seed,
                "params": params,
            }),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            timing_columns: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of one column.
    pub fn column(&self, name: &str) -> Vec<Value> {
        let i = self
            .column_index(name)
            .unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[i].clone()).collect()
    }

    /// Numeric values of one column; nulls become `None`.
    pub fn numbers(&self, name: &str) -> Vec<Option<f64>> {
        self.column(name).iter().map(Value::as_f64).collect()
    }

    /// CSV: one `# ` provenance line, a header, then rows. Nulls are empty.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = format!("# {}\n", self.provenance);
        out.push_str(&self.csv_body(&[])?);
        Ok(out)
    }

    /// Header and rows without the provenance line, leaving out `skip`.
    pub fn csv_body(&self, skip: &[String]) -> Result<String> {
        let keep: Vec<usize> = (0..self.columns.len())
            .filter(|&i| !skip.contains(&self.columns[i]))
            .collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(keep.iter().map(|&i| &self.columns[i]))
            .map_err(err)?;
        for row in &self.rows {
            w.write_record(keep.iter().map(|&i| cell_text(&row[i])))
                .map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// CSV body with the timing columns removed; reproducible per seed.
    pub fn deterministic_body(&self) -> Result<String> {
        self.csv_body(&self.timing_columns)
    }

    /// `{"provenance": …, "rows": [{column: value}]}`.
    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(r.iter().cloned())
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let doc = json!({ "provenance": self.provenance, "columns": self.columns, "rows": rows });
        serde_json::to_string_pretty(&doc).expect("table serializes")
    }
}

/// Default `(p, q)` pairs: the scenario table's channels.
pub fn default_channel_pairs() -> Vec<(f64, f64)> {
    Scenario::TABLE.iter().map(|s| (s.p, s.q)).collect()
}

/// `n = 2^9 … 2^13`.
pub fn default_lengths() -> Vec<usize> {
    (9..=13).map(|r| 1usize << r).collect()
}

/// `|A|, |B|, |X|, |Y|` for every `(n, p, q)` with β = γ = 0.1.
pub fn exp_index_sets(lengths: &[usize], pairs: &[(f64, f64)]) -> Result<Table> {
    let mut table = Table::new(
        "index_sets",
        json!({ "n": lengths, "pairs": pairs, "beta": DEFAULT_BETA_GAMMA, "gamma": DEFAULT_BETA_GAMMA }),
        None,
        &["n", "p", "q", "size_a", "size_b", "size_x", "size_y"],
    );
    for &(p, q) in pairs {
        for &n in lengths {
            let fixed = FixedParams {
                n,
                p,
                q,
                ..FixedParams::default()
            };
            let [a, b, x, y] = fixed.code()?.partition().sizes();
            table.push(vec![
                json!(n),
                json!(p),
                json!(q),
                json!(a),
                json!(b),
                json!(x),
                json!(y),
            ]);
        }
    }
    Ok(table)
}

/// Per-trial fraction of wrong A bits at Bob and at Eve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitErrors {
    pub bob: f64,
    pub eve: f64,
}

/// Sends uniform payloads through both channels and decodes each side.
pub fn payload_bit_errors(
    code: &SecurePolarCode,
    trials: usize,
    seed: RngSeed,
) -> Result<Vec<BitErrors>> {
    let k = code.payload_len();
    if k == 0 {
        return Ok(Vec::new());
    }
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let s = seed.child(i);
            let info = random_bits(k, s.child(0));
            let x = code.encode(&info, s.child(1))?;
            let wc = code.channel();
            let y = transmit(&x, wc.main, s.child(2));
            let z = transmit(&x, wc.eve, s.child(3));
            let bob = code.decode(&y)?.distance(&info)? as f64 / k as f64;
            let eve = code.decode_over(&z, wc.eve)?.distance(&info)? as f64 / k as f64;
            Ok(BitErrors { bob, eve })
        })
        .collect()
}

/// Mean and normal-approximation 95% interval.
pub fn mean_ci(xs: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, mean, mean);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let half = crate::adversary::Z_95 * (var / n).sqrt();
    (mean, mean - half, mean + half)
}

/// A labelled code for the Eve-error experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EveCase {
    pub label: String,
    pub n: usize,
    pub p: f64,
    pub q: f64,
}

/// Scenarios A–F at `n = 8192` plus the two short `q = 0.2` codes.
pub fn default_eve_cases() -> Vec<EveCase> {
    let mut cases: Vec<EveCase> = Scenario::TABLE
        .iter()
        .map(|s| EveCase {
            label: s.label.to_string(),
            n: SCENARIO_N,
            p: s.p,
            q: s.q,
        })
        .collect();
    for n in [512, 1024] {
        cases.push(EveCase {
            label: format!("q0.2_n{n}"),
            n,
            p: 0.1,
            q: 0.2,
        });
    }
    cases
}

/// Eve's and Bob's mean bit error on A. Rows with `|A| = 0` carry nulls.
pub fn exp_eve_error(cases: &[EveCase], trials: usize, seed: RngSeed) -> Result<Table> {
    let mut table = Table::new(
        "eve_error",
        json!({ "cases": cases, "trials": trials, "beta": DEFAULT_BETA_GAMMA, "gamma": DEFAULT_BETA_GAMMA }),
        Some(seed),
        &[
            "label",
            "n",
            "p",
            "q",
            "size_a",
            "trials",
            "eve_error",
            "eve_ci_lo",
            "eve_ci_hi",
            "bob_error",
        ],
    );
    for (ci, case) in cases.iter().enumerate() {
        let fixed = FixedParams {
            n: case.n,
            p: case.p,
            q: case.q,
            ..FixedParams::default()
        };
        let code = fixed.code()?;
        let errs = payload_bit_errors(&code, trials, seed.child(ci as u64))?;
        let head = vec![
            json!(case.label),
            json!(case.n),
            json!(case.p),
            json!(case.q),
            json!(code.payload_len()),
        ];
        let tail = if errs.is_empty() {
            vec![json!(0), Value::Null, Value::Null, Value::Null, Value::Null]
        } else {
            let eve: Vec<f64> = errs.iter().map(|e| e.eve).collect();
            let (m, lo, hi) = mean_ci(&eve);
            let bob = errs.iter().map(|e| e.bob).sum::<f64>() / errs.len() as f64;
            vec![
                json!(errs.len()),
                json!(m),
                json!(lo),
                json!(hi),
                json!(bob),
            ]
        };
        table.push(head.into_iter().chain(tail).collect());
    }
    Ok(table)
}

/// `|A|/n` against `h(q) − h(p)` along a length sweep.
pub fn exp_secrecy_rate(lengths: &[usize], p: f64, q: f64) -> Result<Table> {
    let wc = WiretapChannel::new(p, q)?;
    let capacity = secrecy_capacity(&wc)?;
    let mut table = Table::new(
        "secrecy_rate",
        json!({ "n": lengths, "p": p, "q": q, "beta": DEFAULT_BETA_GAMMA, "gamma": DEFAULT_BETA_GAMMA }),
        None,
        &["n", "size_a", "rate", "capacity", "gap"],
    );
    for &n in lengths {
        let code = FixedParams {
            n,
            p,
            q,
            ..FixedParams::default()
        }
        .code()?;
        let rate = code.secrecy_rate();
        table.push(vec![
            json!(n),
            json!(code.payload_len()),
            json!(rate),
            json!(capacity),
            json!(capacity - rate),
        ]);
    }
    Ok(table)
}

/// `β ∈ {0.05, …, 0.45}`.
pub fn default_beta_grid() -> Vec<f64> {
    (1..=9).map(|k| k as f64 * 0.05).collect()
}

/// `γ ∈ {0.05, …, 0.3}`.
pub fn default_gamma_grid() -> Vec<f64> {
    (1..=6).map(|k| k as f64 * 0.05).collect()
}

/// `|A|` and Eve's error as β or γ moves.
pub fn exp_beta_gamma(sweep: &SweepSpec, trials: usize, seed: RngSeed) -> Result<Table> {
    if !matches!(sweep.variable, SweepVar::Beta | SweepVar::Gamma) {
        return Err(Error::InvalidParameter(
            "beta_gamma sweeps beta or gamma".into(),
        ));
    }
    let mut table = Table::new(
        "beta_gamma",
        json!({ "sweep": sweep, "trials": trials }),
        Some(seed),
        &["variable", "beta", "gamma", "size_a", "eve_error"],
    );
    for (i, f) in sweep.points()?.into_iter().enumerate() {
        let code = f.code()?;
        let errs = payload_bit_errors(&code, trials, seed.child(i as u64))?;
        let eve = if errs.is_empty() {
            Value::Null
        } else {
            json!(errs.iter().map(|e| e.eve).sum::<f64>() / errs.len() as f64)
        };
        table.push(vec![
            json!(sweep.variable.to_string()),
            json!(f.beta),
            json!(f.gamma),
            json!(code.payload_len()),
            eve,
        ]);
    }
    Ok(table)
}

/// Median of `reps` timed runs of `f`, in seconds.
pub fn median_seconds<F: FnMut()>(reps: usize, mut f: F) -> f64 {
    let mut times: Vec<f64> = (0..reps.max(1))
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    let m = times.len() / 2;
    if times.len() % 2 == 1 {
        times[m]
    } else {
        (times[m - 1] + times[m]) / 2.0
    }
}

/// Honest sessions of `trials` rounds per scenario, plus median timings of
/// tagging, encoding and decoding over `reps ≥ 5` repetitions.
pub fn exp_scenarios(
    scenarios: &[Scenario],
    trials: usize,
    scale: f64,
    reps: usize,
    seed: RngSeed,
) -> Result<Table> {
    check_scale(scale)?;
    let reps = reps.max(5);
    let mut table = Table::new(
        "scenarios",
        json!({ "scenarios": scenarios, "n": SCENARIO_N, "trials": trials, "scale": scale, "reps": reps }),
        Some(seed),
        &[
            "scenario",
            "n",
            "p",
            "q",
            "t",
            "u",
            "scale",
            "size_a",
            "accepts",
            "rejects",
            "auth_rate",
            "tag_time",
            "encode_time",
            "decode_time",
        ],
    );
    table.timing_columns = ["tag_time", "encode_time", "decode_time"]
        .map(String::from)
        .to_vec();
    for (si, sc) in scenarios.iter().enumerate() {
        let s = seed.child(si as u64);
        let cfg = sc.config(SCENARIO_N, scale, s.child(0))?;
        let msgs: Vec<BitVector> = (0..trials as u64)
            .map(|j| random_bits(cfg.t(), s.child(1).child(j)))
            .collect();
        let rounds = run_session(&msgs, &cfg, s.child(2))?;
        let accepts = rounds.iter().filter(|r| r.decision.is_accept()).count();

        let m = random_bits(cfg.t(), s.child(3));
        let tag_time = median_seconds(reps, || {
            hash(&m, cfg.key(), cfg.hash_params()).expect("lengths agree");
        });
        let info = random_bits(cfg.code().payload_len(), s.child(4));
        let x = cfg.code().encode(&info, s.child(5))?;
        let encode_time = median_seconds(reps, || {
            cfg.code().encode(&info, s.child(5)).expect("length agrees");
        });
        let y = transmit(&x, cfg.channel().main, s.child(6));
        let decode_time = median_seconds(reps, || {
            cfg.code().decode(&y).expect("length agrees");
        });
        table.push(vec![
            json!(sc.label.to_string()),
            json!(SCENARIO_N),
            json!(sc.p),
            json!(sc.q),
            json!(cfg.t()),
            json!(sc.u),
            json!(scale),
            json!(cfg.code().payload_len()),
            json!(accepts),
            json!(rounds.len() - accepts),
            json!(authentication_rate(&cfg)),
            json!(tag_time),
            json!(encode_time),
            json!(decode_time),
        ]);
    }
    Ok(table)
}

/// Median encode and decode time along a length sweep, and hashing time
/// along a message-length sweep.
pub fn exp_timing(
    lengths: &[usize],
    message_lengths: &[usize],
    reps: usize,
    seed: RngSeed,
) -> Result<Table> {
    let reps = reps.max(5);
    let mut table = Table::new(
        "timing",
        json!({ "n": lengths, "t": message_lengths, "reps": reps, "p": 0.1, "q": 0.3, "u": 64 }),
        Some(seed),
        &["operation", "size", "seconds"],
    );
    table.timing_columns = vec!["seconds".into()];
    for (i, &n) in lengths.iter().enumerate() {
        let code = FixedParams {
            n,
            ..FixedParams::default()
        }
        .code()?;
        let s = seed.child(i as u64);
        let info = random_bits(code.payload_len(), s.child(0));
        let x = code.encode(&info, s.child(1))?;
        let enc = median_seconds(reps, || {
            code.encode(&info, s.child(1)).expect("length agrees");
        });
        let dec = median_seconds(reps, || {
            code.decode(&x).expect("length agrees");
        });
        table.push(vec![json!("encode"), json!(n), json!(enc)]);
        table.push(vec![json!("decode"), json!(n), json!(dec)]);
    }
    let key = LfsrHashKey::random(64, &mut seed.child(1000).rng())?;
    for (i, &t) in message_lengths.iter().enumerate() {
        let hp = HashParams::new(t, 64)?;
        let m = random_bits(t, seed.child(2000 + i as u64));
        let secs = median_seconds(reps, || {
            hash(&m, &key, &hp).expect("lengths agree");
        });
        table.push(vec![json!("hash"), json!(t), json!(secs)]);
    }
    Ok(table)
}

/// Names accepted by [`run_named`].
pub const EXPERIMENT_NAMES: [&str; 7] = [
    "index_sets",
    "eve_error",
    "secrecy_rate",
    "beta",
    "gamma",
    "scenarios",
    "timing",
];

/// Knobs shared by every named experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub seed: RngSeed,
    pub scale: f64,
    pub trials: usize,
    pub p: f64,
    pub q: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: RngSeed::new(0, 0),
            scale: 1.0,
            trials: 100,
            p: 0.1,
            q: 0.3,
        }
    }
}

/// Runs an experiment by name with its default grid.
pub fn run_named(name: &str, opts: &RunOptions) -> Result<Table> {
    let fixed = FixedParams {
        p: opts.p,
        q: opts.q,
        ..FixedParams::default()
    };
    match name {
        "index_sets" => exp_index_sets(&default_lengths(), &default_channel_pairs()),
        "eve_error" => exp_eve_error(&default_eve_cases(), opts.trials, opts.seed),
        "secrecy_rate" => exp_secrecy_rate(&default_lengths(), opts.p, opts.q),
        "beta" => exp_beta_gamma(
            &SweepSpec::new(SweepVar::Beta, default_beta_grid(), fixed)?,
            opts.trials,
            opts.seed,
        ),
        "gamma" => exp_beta_gamma(
            &SweepSpec::new(SweepVar::Gamma, default_gamma_grid(), fixed)?,
            opts.trials,
            opts.seed,
        ),
        "scenarios" => exp_scenarios(&Scenario::TABLE, opts.trials, opts.scale, 5, opts.seed),
        "timing" => {
            let ts: Vec<usize> = (12..=20)
                .step_by(2)
                .map(|e| ((1usize << e) as f64 * opts.scale).max(65.0) as usize)
                .collect();
            exp_timing(&default_lengths(), &ts, 5, opts.seed)
        }
        other => Err(Error::InvalidParameter(format!(
            "unknown experiment `{other}`; expected one of {}",
            EXPERIMENT_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_table_values() {
        let b = Scenario::get('b').unwrap();
        assert_eq!(
            (b.p, b.q, b.t, b.u, b.key_bits()),
            (0.1, 0.3, 1 << 25, 101, 303)
        );
        let f = Scenario::get('F').unwrap();
        assert_eq!((f.p, f.q, f.t, f.u), (0.3, 0.4, 1 << 20, 64));
        assert!(Scenario::get('G').is_err());
        assert_eq!(b.scaled_t(1.0 / 1024.0).unwrap(), 1 << 15);
        assert_eq!(b.scaled_t(1e-9).unwrap(), 102);
        assert!(b.scaled_t(0.0).is_err() && b.scaled_t(1.5).is_err());
    }

    #[test]
    fn sweep_validation() {
        let f = FixedParams::default();
        assert!(SweepSpec::new(SweepVar::Beta, vec![], f).is_err());
        assert!(SweepSpec::new(SweepVar::Beta, vec![0.6], f).is_err());
        assert!(SweepSpec::new(SweepVar::N, vec![1000.0], f).is_err());
        assert!(SweepSpec::new(SweepVar::Q, vec![0.05], f).is_ok());
        assert_eq!("gamma".parse::<SweepVar>().unwrap(), SweepVar::Gamma);
    }

    #[test]
    fn index_sets_cover_and_x_is_small() {
        let t = exp_index_sets(&default_lengths(), &default_channel_pairs()).unwrap();
        for row in &t.rows {
            let n = row[0].as_u64().unwrap();
            let sum: u64 = row[3..7].iter().map(|v| v.as_u64().unwrap()).sum();
            assert_eq!(sum, n);
            if row[1] == json!(0.1) && row[2] == json!(0.3) {
                assert!(row[5].as_u64().unwrap() as f64 / n as f64 <= 0.05);
            }
        }
    }

    #[test]
    fn secrecy_rate_rows() {
        let t = exp_secrecy_rate(&default_lengths(), 0.1, 0.3).unwrap();
        let rates: Vec<f64> = t.numbers("rate").into_iter().map(Option::unwrap).collect();
        assert!(rates.windows(2).all(|w| w[0] <= w[1]));
        assert!(rates.last() > rates.first());
        assert!(t.numbers("gap").iter().all(|g| g.unwrap() > 0.0));
        let caps = t.numbers("capacity");
        assert!(caps.iter().all(|c| *c == caps[0]));
    }

    #[test]
    fn eve_error_null_rows_and_reproducibility() {
        let cases = vec![
            EveCase {
                label: "short".into(),
                n: 512,
                p: 0.1,
                q: 0.2,
            },
            EveCase {
                label: "toy".into(),
                n: 256,
                p: 0.1,
                q: 0.4,
            },
        ];
        let a = exp_eve_error(&cases, 10, RngSeed::new(1, 0)).unwrap();
        let b = exp_eve_error(&cases, 10, RngSeed::new(1, 0)).unwrap();
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
        assert!(a.rows[0][6].is_null());
        assert!(a
            .to_csv()
            .unwrap()
            .lines()
            .nth(2)
            .unwrap()
            .ends_with(",,,,"));
        assert!(a.rows[1][6].as_f64().unwrap() > 0.3);
    }

    #[test]
    fn scenario_rows_are_complete() {
        let d = Scenario::get('D').unwrap();
        let t = exp_scenarios(&[d], 3, 1.0 / 1024.0, 5, RngSeed::new(2, 0)).unwrap();
        assert_eq!(t.column("rejects"), vec![json!(0)]);
        assert_eq!(t.column("auth_rate"), vec![json!(0.125)]);
        let again = exp_scenarios(&[d], 3, 1.0 / 1024.0, 5, RngSeed::new(2, 0)).unwrap();
        assert_eq!(
            t.deterministic_body().unwrap(),
            again.deterministic_body().unwrap()
        );
        assert!(!t.deterministic_body().unwrap().contains("tag_time"));
        assert!(t.to_csv().unwrap().starts_with("# {"));
    }

    #[test]
    fn json_rows_are_keyed() {
        let t = exp_secrecy_rate(&[512], 0.1, 0.3).unwrap();
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["rows"][0]["n"], json!(512));
        assert_eq!(v["provenance"]["experiment"], json!("secrecy_rate"));
    }

    #[test]
    fn unknown_experiment_is_a_parameter_error() {
        assert!(run_named("fig99", &RunOptions::default())
            .unwrap_err()
            .is_parameter_error());
    }

    #[test]
    fn mean_ci_examples() {
        assert_eq!(mean_ci(&[0.5]), (0.5, 0.5, 0.5));
        let (m, lo, hi) = mean_ci(&[0.4, 0.6]);
        assert!((m - 0.5).abs() < 1e-12 && lo < m && hi > m);
        assert!(median_seconds(5, || {}) >= 0.0);
    }
}
