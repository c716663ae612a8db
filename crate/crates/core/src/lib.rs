//! Multi-message authentication over a binary symmetric wiretap channel.
//!
//! Alice tags each message with an LFSR-based universal hash and sends the
//! tag through a strong-secrecy polar code. Bob recovers the tag with
//! successive-cancellation decoding; Eve, listening through a noisier
//! channel, learns essentially nothing about it.
//!
//! ```
//! use wiretap_auth::bits::{random_bits, RngSeed};
//! use wiretap_auth::protocol::{build_config, run_session, ConfigParams};
//!
//! let params = ConfigParams { p: 0.1, q: 0.3, r: 10, beta: 0.1, gamma: 0.1, t: 256, u: 16 };
//! let cfg = build_config(&params, RngSeed::new(7, 0)).unwrap();
//! let msgs = vec![random_bits(256, RngSeed::new(7, 1))];
//! let rounds = run_session(&msgs, &cfg, RngSeed::new(7, 2)).unwrap();
//! assert!(rounds[0].decision.is_accept());
//! ```

pub mod adversary;
pub mod bits;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod lfsr_hash;
pub mod polar;
pub mod protocol;
pub mod secure_code;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/bits-and-channels.md")]
    struct BitsAndChannels;
    #[doc = include_str!("../../../book/src/polar-codes.md")]
    struct PolarCodes;
    #[doc = include_str!("../../../book/src/secure-code.md")]
    struct SecureCode;
    #[doc = include_str!("../../../book/src/hashing.md")]
    struct Hashing;
    #[doc = include_str!("../../../book/src/protocol.md")]
    struct Protocol;
    #[doc = include_str!("../../../book/src/attacks.md")]
    struct Attacks;
    #[doc = include_str!("../../../book/src/experiments.md")]
    struct Experiments;
}
