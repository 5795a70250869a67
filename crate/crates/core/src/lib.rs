//! Longest matches between symbolic sequences, shortest distances between
//! orbits, and the collision entropy and correlation dimension that govern
//! their growth in `log n`.
//!
//! ```
//! use matchlaw::entropy::renyi2_iid;
//! use matchlaw::matching::{encoded_lcs};
//! use matchlaw::encoders::Encoder;
//! use matchlaw::symbolic::{IidSource, Source};
//!
//! # fn main() -> Result<(), matchlaw::error::Error> {
//! let coin = Source::Iid(IidSource::uniform(2)?);
//! let n = 1 << 14;
//! let m = encoded_lcs(&coin.sample(n, 1)?, &coin.sample(n, 2)?, &Encoder::Identity, n)?.value;
//! let predicted = 2.0 * (n as f64).ln() / renyi2_iid(&[0.5, 0.5]);
//! assert!((m as f64 - predicted).abs() < 10.0);
//! # Ok(())
//! # }
//! ```
//!
//! * [`symbolic`], [`encoders`]: sources and the maps applied before matching.
//! * [`matching`]: longest common substring, encoded and weighted variants.
//! * [`entropy`]: closed-form and empirical order-2 Rényi entropy.
//! * [`dynamics`]: circle and torus maps, observations, random systems.
//! * [`geometry`]: shortest distances and correlation sums.
//! * [`harness`]: seeded Monte Carlo experiments, configs and CSV output.

pub mod dynamics;
pub mod encoders;
pub mod entropy;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod matching;
pub mod rng;
pub mod stats;
pub mod symbolic;
