use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use wiretap_auth::adversary::{estimate_success, write_outcomes_csv, AttackStrategy, Estimate};
use wiretap_auth::bits::{random_bits, BitVector, RngSeed};
use wiretap_auth::channel::WiretapChannel;
use wiretap_auth::experiments::{run_named, RunOptions, Scenario, EXPERIMENT_NAMES};
use wiretap_auth::lfsr_hash::{hash, HashParams, LfsrHashKey};
use wiretap_auth::polar::PolarParams;
use wiretap_auth::protocol::{run_session, ProtocolConfig};
use wiretap_auth::secure_code::{PartitionParams, SecurePolarCode};

#[derive(Debug, Parser)]
#[command(
    name = "wiretap-auth",
    version,
    about = "Message authentication over a binary symmetric wiretap channel"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(flatten)]
    params: Params,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Message-length multiplier in (0, 1] for scenario runs.
    #[arg(long, global = true, default_value_t = 1.0)]
    scale: f64,
}

#[derive(Debug, Args)]
struct Params {
    /// Main channel crossover.
    #[arg(long, global = true, default_value_t = 0.1)]
    p: f64,
    /// Eavesdropper channel crossover.
    #[arg(long, global = true, default_value_t = 0.3)]
    q: f64,
    /// Code length, a power of two.
    #[arg(long, global = true, default_value_t = 8192)]
    n: usize,
    #[arg(long, global = true, default_value_t = 0.1)]
    beta: f64,
    #[arg(long, global = true, default_value_t = 0.1)]
    gamma: f64,
    /// Message length in bits.
    #[arg(long, global = true, default_value_t = 1024)]
    t: usize,
    /// Tag length in bits.
    #[arg(long, global = true, default_value_t = 64)]
    u: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Side {
    Bob,
    Eve,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-index qualities and the A/B/X/Y label.
    Partition {
        /// Replace the poor-channel threshold.
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Tag a message.
    Hash {
        /// Message as hex (t bits); random when absent.
        #[arg(long)]
        message: Option<String>,
        /// Key as hex (3u bits); random when absent.
        #[arg(long)]
        key: Option<String>,
    },
    /// Secure-encode an A payload.
    Encode {
        /// Payload as hex (|A| bits); random when absent.
        #[arg(long)]
        payload: Option<String>,
    },
    /// SC-decode a channel word to its A payload.
    Decode {
        /// Channel word as hex (n bits).
        #[arg(long)]
        word: String,
        /// Decode with Bob's or Eve's crossover.
        #[arg(long, value_enum, default_value_t = Side::Bob)]
        side: Side,
    },
    /// Honest session; writes one JSON transcript per round.
    Authenticate {
        #[arg(long, default_value_t = 10)]
        rounds: usize,
        #[arg(long)]
        key: Option<String>,
    },
    /// Monte-Carlo attack success rates.
    Attack {
        /// Scenario label A-F; otherwise the parameter flags are used.
        #[arg(long)]
        scenario: Option<char>,
        /// `kind/variant`, or `all`.
        #[arg(long, default_value = "all")]
        strategy: String,
        #[arg(long, default_value_t = 1000)]
        rounds: u64,
    },
    /// Run a named experiment.
    Experiment {
        name: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Debug)]
enum CliError {
    Param(String),
    Io(io::Error),
}

impl From<wiretap_auth::Error> for CliError {
    fn from(e: wiretap_auth::Error) -> Self {
        CliError::Param(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

fn records<T: Serialize>(rows: &[T], format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(rows).expect("rows serialize") + "\n"),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r)
                    .map_err(|e| CliError::Io(io::Error::other(e)))?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| CliError::Io(io::Error::other(e.to_string())))?;
            Ok(String::from_utf8(bytes).expect("csv is utf-8"))
        }
    }
}

fn code(p: &Params, sigma: Option<f64>) -> Result<SecurePolarCode, CliError> {
    let wc = WiretapChannel::new(p.p, p.q)?;
    let pp = PolarParams::from_len(p.n)?;
    let mut params = PartitionParams::new(p.beta, p.gamma)?;
    if let Some(s) = sigma {
        params = params.with_sigma(s)?;
    }
    Ok(SecurePolarCode::new(wc, pp, params))
}

fn key_or_random(hex: Option<&str>, u: usize, seed: RngSeed) -> Result<LfsrHashKey, CliError> {
    Ok(match hex {
        Some(h) => LfsrHashKey::from_hex(h, u)?,
        None => LfsrHashKey::random(u, &mut seed.rng())?,
    })
}

fn bits_or_random(hex: Option<&str>, len: usize, seed: RngSeed) -> Result<BitVector, CliError> {
    Ok(match hex {
        Some(h) => BitVector::from_hex(h, len)?,
        None => random_bits(len, seed),
    })
}

#[derive(Serialize)]
struct HashRow {
    t: usize,
    u: usize,
    key: String,
    tag: String,
}

#[derive(Serialize)]
struct EncodeRow {
    n: usize,
    payload_len: usize,
    payload: String,
    codeword: String,
}

#[derive(Serialize)]
struct DecodeRow {
    n: usize,
    payload_len: usize,
    payload: String,
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let g = &cli.global;
    let p = &cli.params;
    let seed = RngSeed::new(g.seed, 0);
    match &cli.command {
        Command::Partition { sigma } => records(&code(p, *sigma)?.partition_rows(), g.format),
        Command::Hash { message, key } => {
            let hp = HashParams::new(p.t, p.u)?;
            let key = key_or_random(key.as_deref(), p.u, seed.child(0))?;
            let m = bits_or_random(message.as_deref(), p.t, seed.child(1))?;
            let tag = hash(&m, &key, &hp)?;
            records(
                &[HashRow {
                    t: p.t,
                    u: p.u,
                    key: key.to_hex(),
                    tag: tag.to_hex(),
                }],
                g.format,
            )
        }
        Command::Encode { payload } => {
            let c = code(p, None)?;
            let info = bits_or_random(payload.as_deref(), c.payload_len(), seed.child(0))?;
            let x = c.encode(&info, seed.child(1))?;
            records(
                &[EncodeRow {
                    n: c.n(),
                    payload_len: c.payload_len(),
                    payload: info.to_hex(),
                    codeword: x.to_hex(),
                }],
                g.format,
            )
        }
        Command::Decode { word, side } => {
            let c = code(p, None)?;
            let y = BitVector::from_hex(word, c.n())?;
            let ch = match side {
                Side::Bob => c.channel().main,
                Side::Eve => c.channel().eve,
            };
            let a = c.decode_over(&y, ch)?;
            records(
                &[DecodeRow {
                    n: c.n(),
                    payload_len: c.payload_len(),
                    payload: a.to_hex(),
                }],
                g.format,
            )
        }
        Command::Authenticate { rounds, key } => {
            let hp = HashParams::new(p.t, p.u)?;
            let key = key_or_random(key.as_deref(), p.u, seed.child(0))?;
            let cfg = ProtocolConfig::new(code(p, None)?, hp, key)?;
            let msgs: Vec<BitVector> = (0..*rounds as u64)
                .map(|j| random_bits(p.t, seed.child(1).child(j)))
                .collect();
            let mut out = String::new();
            for r in run_session(&msgs, &cfg, seed.child(2))? {
                out.push_str(&r.to_json_line());
                out.push('\n');
            }
            Ok(out)
        }
        Command::Attack {
            scenario,
            strategy,
            rounds,
        } => {
            let (label, template) = match scenario {
                Some(l) => {
                    let sc = Scenario::get(*l)?;
                    (
                        sc.label.to_string(),
                        sc.config(p.n, g.scale, seed.child(0))?,
                    )
                }
                None => {
                    let hp = HashParams::new(p.t, p.u)?;
                    let key = LfsrHashKey::random(p.u, &mut seed.child(0).rng())?;
                    (
                        format!("n{}_p{}_q{}", p.n, p.p, p.q),
                        ProtocolConfig::new(code(p, None)?, hp, key)?,
                    )
                }
            };
            let strategies = if strategy == "all" {
                AttackStrategy::all()
            } else {
                vec![strategy.parse::<AttackStrategy>()?]
            };
            let mut outcomes = Vec::new();
            for (i, s) in strategies.into_iter().enumerate() {
                if let Estimate::Measured(o) = estimate_success(
                    Some(s),
                    &template,
                    &label,
                    *rounds,
                    seed.child(1 + i as u64),
                )? {
                    outcomes.push(o);
                }
            }
            match g.format {
                Format::Json => records(&outcomes, g.format),
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_outcomes_csv(&mut buf, &outcomes)?;
                    Ok(String::from_utf8(buf).expect("csv is utf-8"))
                }
            }
        }
        Command::Experiment { name, trials } => {
            if !EXPERIMENT_NAMES.contains(&name.as_str()) {
                return Err(CliError::Param(format!(
                    "unknown experiment `{name}`; expected one of {}",
                    EXPERIMENT_NAMES.join(", ")
                )));
            }
            let opts = RunOptions {
                seed,
                scale: g.scale,
                trials: *trials,
                p: p.p,
                q: p.q,
            };
            let table = run_named(name, &opts)?;
            Ok(match g.format {
                Format::Csv => table.to_csv()?,
                Format::Json => table.to_json() + "\n",
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|text| {
        match &cli.global.out {
            Some(path) => File::create(path)?.write_all(text.as_bytes())?,
            None => io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Param(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
